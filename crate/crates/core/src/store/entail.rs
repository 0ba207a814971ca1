//! Three-valued entailment.
//!
//! Each atom is first decided from bounds, then from exact domain reasoning
//! for `x op c` and `x op y`. Conjunctions are split into groups of atoms that
//! share integer variables; a group whose atoms are not individually decided
//! is settled by enumerating the joint domain when it is small enough.

use std::collections::BTreeSet;

use super::propagate::bounds_decide;
use super::{Constraint, Entailment, Expr, RelOp, Store, StoreError, VarId};

/// Largest joint domain enumerated to decide a group of atoms.
pub const ENUMERATION_LIMIT: u128 = 1 << 16;

impl Store {
    /// Does the current store entail `c`? `False` means the store entails the
    /// negation of `c`; `Unknown` means neither could be established.
    pub fn entails(&self, c: &Constraint) -> Result<Entailment, StoreError> {
        self.check_constraint(c)?;
        if self.failed {
            return Err(StoreError::QueryOnFailedStore);
        }
        Ok(self.entails_unchecked(c))
    }

    pub(crate) fn entails_unchecked(&self, c: &Constraint) -> Entailment {
        let atoms = c.atoms();
        if atoms.len() == 1 {
            return self.atom_entails(&atoms[0]);
        }
        let mut result = Entailment::True;
        for group in group_atoms(&atoms) {
            match self.group_entails(&group) {
                Entailment::False => return Entailment::False,
                Entailment::Unknown => result = Entailment::Unknown,
                Entailment::True => {}
            }
        }
        result
    }

    fn group_entails(&self, atoms: &[&Constraint]) -> Entailment {
        let mut all_true = true;
        for a in atoms {
            match self.atom_entails(a) {
                Entailment::False => return Entailment::False,
                Entailment::Unknown => all_true = false,
                Entailment::True => {}
            }
        }
        if all_true {
            return Entailment::True;
        }
        if atoms.len() == 1 {
            return Entailment::Unknown;
        }
        self.enumerate(atoms)
    }

    fn atom_entails(&self, atom: &Constraint) -> Entailment {
        match atom {
            Constraint::True => Entailment::True,
            Constraint::False => Entailment::False,
            Constraint::Rel(a, op, b) => self.rel_entails(a, *op, b),
            Constraint::Member(e, s) => self.member_entails(e, *s),
            Constraint::And(..) | Constraint::Between(..) => self.entails_unchecked(atom),
        }
    }

    fn rel_entails(&self, a: &Expr, op: RelOp, b: &Expr) -> Entailment {
        if let Some(v) = bounds_decide(self.interval(a), op, self.interval(b)) {
            return truth(v);
        }
        match (a, b) {
            (Expr::Var(x), Expr::Const(c)) => self.var_const(*x, op, *c),
            (Expr::Const(c), Expr::Var(x)) => self.var_const(*x, op.flip(), *c),
            (Expr::Var(x), Expr::Var(y)) if x != y => {
                let (dx, dy) = (self.domain(*x).unwrap(), self.domain(*y).unwrap());
                match op {
                    RelOp::Eq if dx.is_disjoint(dy) => Entailment::False,
                    RelOp::Ne if dx.is_disjoint(dy) => Entailment::True,
                    // Bounds are exact for orderings between distinct variables.
                    _ => Entailment::Unknown,
                }
            }
            _ => {
                let atom = Constraint::Rel(a.clone(), op, b.clone());
                self.enumerate(&[&atom])
            }
        }
    }

    fn var_const(&self, x: VarId, op: RelOp, c: i64) -> Entailment {
        let d = self.domain(x).unwrap();
        match op {
            RelOp::Eq if !d.contains(c) => Entailment::False,
            RelOp::Ne if !d.contains(c) => Entailment::True,
            _ => Entailment::Unknown,
        }
    }

    /// Set variables only carry a lower bound, so membership is never refuted.
    fn member_entails(&self, e: &Expr, s: VarId) -> Entailment {
        let known = self.members(s).unwrap();
        let i = self.interval(e);
        if i.is_empty() || known.is_empty() {
            return Entailment::Unknown;
        }
        if i.lo == i.hi {
            return if known.contains(&(i.lo as i64)) {
                Entailment::True
            } else {
                Entailment::Unknown
            };
        }
        // Every possible value of e must already be a member.
        let lo_ok = i.lo >= *known.first().unwrap() as i128;
        let hi_ok = i.hi <= *known.last().unwrap() as i128;
        if !(lo_ok && hi_ok) {
            return Entailment::Unknown;
        }
        match self.expr_values(e) {
            Some(values) if values.iter().all(|v| known.contains(&(*v as i64))) => Entailment::True,
            _ => Entailment::Unknown,
        }
    }

    /// All values `e` can take, if the variables' joint domain is small.
    fn expr_values(&self, e: &Expr) -> Option<BTreeSet<i128>> {
        let mut vars = BTreeSet::new();
        e.collect_vars(&mut vars);
        let vars: Vec<VarId> = vars.into_iter().collect();
        let mut out = BTreeSet::new();
        self.for_each_assignment(&vars, |lookup| {
            out.insert(e.eval_wide(&lookup));
            true
        })?;
        Some(out)
    }

    /// Decides a set of atoms by enumerating every assignment of their
    /// integer variables. Membership atoms count as possibly true.
    fn enumerate(&self, atoms: &[&Constraint]) -> Entailment {
        let mut vars = BTreeSet::new();
        for a in atoms {
            vars.extend(a.fd_vars());
        }
        let vars: Vec<VarId> = vars.into_iter().collect();
        let mut always = true;
        let mut ever = false;
        let finished = self.for_each_assignment(&vars, |lookup| {
            let mut definite = true;
            let mut possible = true;
            for a in atoms {
                match a {
                    Constraint::Rel(l, op, r) => {
                        if !op.holds(l.eval_wide(&lookup), r.eval_wide(&lookup)) {
                            definite = false;
                            possible = false;
                        }
                    }
                    Constraint::Member(e, s) => {
                        let v = e.eval_wide(&lookup);
                        if !self.members(*s).unwrap().contains(&(v as i64)) {
                            definite = false;
                        }
                    }
                    Constraint::True => {}
                    _ => {
                        definite = false;
                        possible = false;
                    }
                }
            }
            always &= definite;
            ever |= possible;
            always || !ever
        });
        match finished {
            None => Entailment::Unknown,
            Some(()) if always => Entailment::True,
            Some(()) if !ever => Entailment::False,
            Some(()) => Entailment::Unknown,
        }
    }

    /// Calls `f` on every assignment of `vars` until it returns false.
    /// Returns `None` when the joint domain exceeds [`ENUMERATION_LIMIT`].
    fn for_each_assignment<F>(&self, vars: &[VarId], mut f: F) -> Option<()>
    where
        F: FnMut(&dyn Fn(VarId) -> i128) -> bool,
    {
        let mut size: u128 = 1;
        for v in vars {
            size = size.saturating_mul(self.domain(*v)?.size());
            if size > ENUMERATION_LIMIT {
                return None;
            }
        }
        let values: Vec<Vec<i64>> = vars.iter().map(|v| self.domain(*v).unwrap().iter().collect()).collect();
        if values.iter().any(Vec::is_empty) {
            return Some(());
        }
        let mut cursor = vec![0usize; vars.len()];
        loop {
            let lookup = |v: VarId| {
                let k = vars.iter().position(|w| *w == v).expect("variable in enumeration");
                values[k][cursor[k]] as i128
            };
            if !f(&lookup) {
                return Some(());
            }
            let mut k = 0;
            loop {
                if k == vars.len() {
                    return Some(());
                }
                cursor[k] += 1;
                if cursor[k] < values[k].len() {
                    break;
                }
                cursor[k] = 0;
                k += 1;
            }
        }
    }
}

fn truth(b: bool) -> Entailment {
    if b {
        Entailment::True
    } else {
        Entailment::False
    }
}

/// Partitions atoms into connected groups by shared integer variables.
fn group_atoms(atoms: &[Constraint]) -> Vec<Vec<&Constraint>> {
    let vars: Vec<BTreeSet<VarId>> = atoms.iter().map(Constraint::fd_vars).collect();
    let mut parent: Vec<usize> = (0..atoms.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..atoms.len() {
        for j in 0..i {
            if !vars[i].is_disjoint(&vars[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<&Constraint>)> = Vec::new();
    for (i, atom) in atoms.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(atom),
            None => groups.push((root, vec![atom])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}
