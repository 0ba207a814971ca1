//! Propagators: bounds narrowing for relations, membership recording and
//! guard reification.

use std::collections::BTreeSet;

use super::{Constraint, Entailment, Expr, Interval, RelOp, Slot, Store, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Fail;

#[derive(Debug)]
pub(crate) enum Prop {
    Rel { lhs: Expr, op: RelOp, rhs: Expr },
    Member { elem: Expr, set: VarId },
    Reify { c: Constraint, b: VarId },
    Placeholder,
}

impl Prop {
    /// Integer and set variables whose changes should wake this propagator.
    pub(crate) fn watched(&self) -> (BTreeSet<VarId>, BTreeSet<VarId>) {
        let mut fd = BTreeSet::new();
        let mut sets = BTreeSet::new();
        match self {
            Prop::Rel { lhs, rhs, .. } => {
                lhs.collect_vars(&mut fd);
                rhs.collect_vars(&mut fd);
            }
            Prop::Member { elem, .. } => elem.collect_vars(&mut fd),
            Prop::Reify { c, b } => {
                fd = c.fd_vars();
                fd.insert(*b);
                sets = c.set_vars();
            }
            Prop::Placeholder => {}
        }
        (fd, sets)
    }
}

/// Decides `a op b` from interval bounds alone when possible.
pub(crate) fn bounds_decide(a: Interval, op: RelOp, b: Interval) -> Option<bool> {
    let point_eq = a.lo == a.hi && b.lo == b.hi && a.lo == b.lo;
    let apart = a.hi < b.lo || b.hi < a.lo;
    match op {
        RelOp::Eq if point_eq => Some(true),
        RelOp::Eq if apart => Some(false),
        RelOp::Ne if point_eq => Some(false),
        RelOp::Ne if apart => Some(true),
        RelOp::Lt if a.hi < b.lo => Some(true),
        RelOp::Lt if a.lo >= b.hi => Some(false),
        RelOp::Le if a.hi <= b.lo => Some(true),
        RelOp::Le if a.lo > b.hi => Some(false),
        RelOp::Gt => bounds_decide(b, RelOp::Lt, a),
        RelOp::Ge => bounds_decide(b, RelOp::Le, a),
        _ => None,
    }
}

fn clamp(v: i128) -> i64 {
    v.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

impl Store {
    /// Runs one propagator. Returns `Ok(true)` once it can never prune again.
    pub(crate) fn run_prop(&mut self, id: usize, changed: &mut Vec<VarId>) -> Result<bool, Fail> {
        let prop = std::mem::replace(&mut self.props[id].prop, Prop::Placeholder);
        let out = match &prop {
            Prop::Rel { lhs, op, rhs } => self.revise_rel(lhs, *op, rhs, changed),
            Prop::Member { elem, set } => self.revise_member(elem, *set, changed),
            Prop::Reify { c, b } => self.revise_reify(c, *b, changed),
            Prop::Placeholder => Ok(true),
        };
        self.props[id].prop = prop;
        out
    }

    fn revise_rel(
        &mut self,
        lhs: &Expr,
        op: RelOp,
        rhs: &Expr,
        changed: &mut Vec<VarId>,
    ) -> Result<bool, Fail> {
        let (il, ir) = (self.interval(lhs), self.interval(rhs));
        match bounds_decide(il, op, ir) {
            Some(true) => return Ok(true),
            Some(false) => return Err(Fail),
            None => {}
        }
        const INF: i128 = i128::MAX / 4;
        match op {
            RelOp::Eq => {
                if let (Expr::Var(x), Expr::Var(y)) = (lhs, rhs) {
                    if x != y {
                        let dx = self.domain(*x).unwrap().clone();
                        self.intersect_var(*y, &dx, changed)?;
                        let dy = self.domain(*y).unwrap().clone();
                        self.intersect_var(*x, &dy, changed)?;
                    }
                } else {
                    let i = il.intersect(ir);
                    self.project(lhs, i, changed)?;
                    self.project(rhs, i, changed)?;
                }
            }
            RelOp::Ne => {
                if let Some(v) = point(self.interval(rhs)) {
                    if let Expr::Var(x) = lhs {
                        self.remove_value(*x, v, changed)?;
                    }
                }
                if let Some(v) = point(self.interval(lhs)) {
                    if let Expr::Var(y) = rhs {
                        self.remove_value(*y, v, changed)?;
                    }
                }
            }
            RelOp::Lt | RelOp::Le | RelOp::Gt | RelOp::Ge => {
                // Normalize to `small ≤ big - gap`.
                let (small, big, gap) = match op {
                    RelOp::Lt => (lhs, rhs, 1),
                    RelOp::Le => (lhs, rhs, 0),
                    RelOp::Gt => (rhs, lhs, 1),
                    _ => (rhs, lhs, 0),
                };
                let ib = self.interval(big);
                self.project(small, Interval::new(-INF, ib.hi - gap), changed)?;
                let is = self.interval(small);
                self.project(big, Interval::new(is.lo + gap, INF), changed)?;
            }
        }
        let (il, ir) = (self.interval(lhs), self.interval(rhs));
        match bounds_decide(il, op, ir) {
            Some(true) => Ok(true),
            Some(false) => Err(Fail),
            None => {
                // Exact decision for var ≠ var once the domains separate.
                if op == RelOp::Ne {
                    if let (Expr::Var(x), Expr::Var(y)) = (lhs, rhs) {
                        if self.domain(*x).unwrap().is_disjoint(self.domain(*y).unwrap()) {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
        }
    }

    /// Narrows the variables of `e` so that `e` can only take values in `target`.
    fn project(&mut self, e: &Expr, target: Interval, changed: &mut Vec<VarId>) -> Result<(), Fail> {
        if target.is_empty() {
            return Err(Fail);
        }
        match e {
            Expr::Const(c) => {
                let c = *c as i128;
                if c < target.lo || c > target.hi {
                    return Err(Fail);
                }
            }
            Expr::Var(v) => {
                if target.hi < i64::MIN as i128 || target.lo > i64::MAX as i128 {
                    return Err(Fail);
                }
                self.narrow(*v, clamp(target.lo), clamp(target.hi), changed)?;
            }
            Expr::Add(a, b) => {
                let ib = self.interval(b);
                self.project(a, target.sub(ib), changed)?;
                let ia = self.interval(a);
                self.project(b, target.sub(ia), changed)?;
            }
            Expr::Sub(a, b) => {
                // a - b ∈ T  ⇒  a ∈ T + b,  b ∈ a - T
                let ib = self.interval(b);
                self.project(a, target.add(ib), changed)?;
                let ia = self.interval(a);
                self.project(b, ia.sub(target), changed)?;
            }
            Expr::Neg(a) => self.project(a, target.neg(), changed)?,
            Expr::Mul(a, b) => {
                let ib = self.interval(b);
                if !ib.contains_zero() {
                    self.project(a, target.div_hull(ib), changed)?;
                }
                let ia = self.interval(a);
                if !ia.contains_zero() {
                    self.project(b, target.div_hull(ia), changed)?;
                }
                let whole = self.interval(a).mul(self.interval(b));
                if whole.intersect(target).is_empty() {
                    return Err(Fail);
                }
            }
        }
        Ok(())
    }

    fn revise_member(&mut self, elem: &Expr, set: VarId, changed: &mut Vec<VarId>) -> Result<bool, Fail> {
        let Some(v) = point(self.interval(elem)) else {
            return Ok(false);
        };
        if let Slot::Set(members) = &mut self.vars[set.index()].slot {
            if members.insert(v) {
                changed.push(set);
            }
        }
        Ok(true)
    }

    fn revise_reify(&mut self, c: &Constraint, b: VarId, changed: &mut Vec<VarId>) -> Result<bool, Fail> {
        let want = match self.entails_unchecked(c) {
            Entailment::True => 1,
            Entailment::False => 0,
            Entailment::Unknown => return Ok(false),
        };
        self.narrow(b, want, want, changed)?;
        Ok(true)
    }

    fn fd_slot(&mut self, v: VarId) -> &mut super::FdDomain {
        match &mut self.vars[v.index()].slot {
            Slot::Fd(d) => d,
            Slot::Set(_) => unreachable!("integer operation on set variable"),
        }
    }

    fn narrow(&mut self, v: VarId, lo: i64, hi: i64, changed: &mut Vec<VarId>) -> Result<(), Fail> {
        let d = self.fd_slot(v);
        if d.restrict(lo, hi) {
            changed.push(v);
        }
        if d.is_empty() {
            Err(Fail)
        } else {
            Ok(())
        }
    }

    fn remove_value(&mut self, v: VarId, x: i64, changed: &mut Vec<VarId>) -> Result<(), Fail> {
        let d = self.fd_slot(v);
        if d.remove(x) {
            changed.push(v);
        }
        if d.is_empty() {
            Err(Fail)
        } else {
            Ok(())
        }
    }

    fn intersect_var(
        &mut self,
        v: VarId,
        other: &super::FdDomain,
        changed: &mut Vec<VarId>,
    ) -> Result<(), Fail> {
        let d = self.fd_slot(v);
        if d.intersect(other) {
            changed.push(v);
        }
        if d.is_empty() {
            Err(Fail)
        } else {
            Ok(())
        }
    }
}

fn point(i: Interval) -> Option<i64> {
    (i.lo == i.hi && i.lo >= i64::MIN as i128 && i.lo <= i64::MAX as i128).then_some(i.lo as i64)
}
