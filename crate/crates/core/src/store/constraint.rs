use std::collections::BTreeSet;
use std::fmt;

use super::VarId;

/// Integer expression over store variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    Var(VarId),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn var(v: VarId) -> Self {
        Expr::Var(v)
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Self {
        Expr::Neg(Box::new(a))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Neg(a) => a.collect_vars(out),
        }
    }

    /// Exact 64-bit evaluation; `lookup` yields the value of a variable.
    pub fn eval<F>(&self, lookup: &F) -> Result<Option<i64>, Overflow>
    where
        F: Fn(VarId) -> Option<i64>,
    {
        Ok(match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(v) => lookup(*v),
            Expr::Add(a, b) => match (a.eval(lookup)?, b.eval(lookup)?) {
                (Some(x), Some(y)) => Some(x.checked_add(y).ok_or(Overflow)?),
                _ => None,
            },
            Expr::Sub(a, b) => match (a.eval(lookup)?, b.eval(lookup)?) {
                (Some(x), Some(y)) => Some(x.checked_sub(y).ok_or(Overflow)?),
                _ => None,
            },
            Expr::Mul(a, b) => match (a.eval(lookup)?, b.eval(lookup)?) {
                (Some(x), Some(y)) => Some(x.checked_mul(y).ok_or(Overflow)?),
                _ => None,
            },
            Expr::Neg(a) => match a.eval(lookup)? {
                Some(x) => Some(x.checked_neg().ok_or(Overflow)?),
                None => None,
            },
        })
    }

    /// Evaluation in `i128` used by enumeration; never wraps for store-sized values.
    pub(crate) fn eval_wide<F>(&self, lookup: &F) -> i128
    where
        F: Fn(VarId) -> i128,
    {
        match self {
            Expr::Const(c) => *c as i128,
            Expr::Var(v) => lookup(*v),
            Expr::Add(a, b) => a.eval_wide(lookup).saturating_add(b.eval_wide(lookup)),
            Expr::Sub(a, b) => a.eval_wide(lookup).saturating_sub(b.eval_wide(lookup)),
            Expr::Mul(a, b) => a.eval_wide(lookup).saturating_mul(b.eval_wide(lookup)),
            Expr::Neg(a) => a.eval_wide(lookup).saturating_neg(),
        }
    }
}

/// Raised when exact integer evaluation leaves the signed 64-bit range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn holds(self, a: i128, b: i128) -> bool {
        match self {
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
        }
    }

    /// The operator with its operands swapped: `a op b` ⇔ `b op.flip() a`.
    pub fn flip(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Gt,
            RelOp::Le => RelOp::Ge,
            RelOp::Gt => RelOp::Lt,
            RelOp::Ge => RelOp::Le,
            other => other,
        }
    }

    pub fn negate(self) -> RelOp {
        match self {
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
            RelOp::Lt => RelOp::Ge,
            RelOp::Le => RelOp::Gt,
            RelOp::Gt => RelOp::Le,
            RelOp::Ge => RelOp::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Ne => "<>",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }
}

/// A constraint over store variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    True,
    False,
    Rel(Expr, RelOp, Expr),
    /// `lo < x < hi`, both bounds strict.
    Between(Expr, Expr, Expr),
    /// Membership of an integer in a set variable.
    Member(Expr, VarId),
    And(Box<Constraint>, Box<Constraint>),
}

impl Constraint {
    pub fn rel(a: Expr, op: RelOp, b: Expr) -> Self {
        Constraint::Rel(a, op, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Self {
        Constraint::Rel(a, RelOp::Eq, b)
    }

    pub fn and(a: Constraint, b: Constraint) -> Self {
        Constraint::And(Box::new(a), Box::new(b))
    }

    /// Flattens `And` and `Between` into a list of atomic constraints.
    pub fn atoms(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        self.push_atoms(&mut out);
        out
    }

    fn push_atoms(&self, out: &mut Vec<Constraint>) {
        match self {
            Constraint::And(a, b) => {
                a.push_atoms(out);
                b.push_atoms(out);
            }
            Constraint::Between(lo, x, hi) => {
                out.push(Constraint::Rel(lo.clone(), RelOp::Lt, x.clone()));
                out.push(Constraint::Rel(x.clone(), RelOp::Lt, hi.clone()));
            }
            other => out.push(other.clone()),
        }
    }

    /// Integer variables mentioned (set variables excluded).
    pub fn fd_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_fd_vars(&mut out);
        out
    }

    fn collect_fd_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Constraint::True | Constraint::False => {}
            Constraint::Rel(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Constraint::Between(a, x, b) => {
                a.collect_vars(out);
                x.collect_vars(out);
                b.collect_vars(out);
            }
            Constraint::Member(e, _) => e.collect_vars(out),
            Constraint::And(a, b) => {
                a.collect_fd_vars(out);
                b.collect_fd_vars(out);
            }
        }
    }

    /// Set variables mentioned.
    pub fn set_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for atom in self.atoms() {
            if let Constraint::Member(_, s) = atom {
                out.insert(s);
            }
        }
        out
    }
}

/// Closed interval in `i128`, wide enough that arithmetic on `i64` bounds is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: i128,
    pub hi: i128,
}

impl Interval {
    pub fn new(lo: i128, hi: i128) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: i128) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn intersect(self, o: Interval) -> Interval {
        Interval::new(self.lo.max(o.lo), self.hi.min(o.hi))
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo.saturating_add(o.lo), self.hi.saturating_add(o.hi))
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo.saturating_sub(o.hi), self.hi.saturating_sub(o.lo))
    }

    pub fn neg(self) -> Interval {
        Interval::new(self.hi.saturating_neg(), self.lo.saturating_neg())
    }

    pub fn mul(self, o: Interval) -> Interval {
        let c = [
            self.lo.saturating_mul(o.lo),
            self.lo.saturating_mul(o.hi),
            self.hi.saturating_mul(o.lo),
            self.hi.saturating_mul(o.hi),
        ];
        Interval::new(*c.iter().min().unwrap(), *c.iter().max().unwrap())
    }

    /// Hull of `{ a | a * b ∈ self, b ∈ divisor }` over the reals, rounded inwards.
    /// `divisor` must not contain zero.
    pub fn div_hull(self, divisor: Interval) -> Interval {
        debug_assert!(!divisor.contains_zero());
        let corners = [
            (self.lo, divisor.lo),
            (self.lo, divisor.hi),
            (self.hi, divisor.lo),
            (self.hi, divisor.hi),
        ];
        let mut lo = i128::MAX;
        let mut hi = i128::MIN;
        for (n, d) in corners {
            lo = lo.min(div_ceil(n, d));
            hi = hi.max(div_floor(n, d));
        }
        Interval::new(lo, hi)
    }
}

fn div_floor(n: i128, d: i128) -> i128 {
    let q = n / d;
    if (n % d != 0) && ((n < 0) != (d < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(n: i128, d: i128) -> i128 {
    let q = n / d;
    if (n % d != 0) && ((n < 0) == (d < 0)) {
        q + 1
    } else {
        q
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "v{}", v.0),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Neg(a) => write!(f, "-({a})"),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::True => write!(f, "true"),
            Constraint::False => write!(f, "false"),
            Constraint::Rel(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Constraint::Between(a, x, b) => write!(f, "{a} < {x} < {b}"),
            Constraint::Member(e, s) => write!(f, "{e} in v{}", s.0),
            Constraint::And(a, b) => write!(f, "({a}) /\\ ({b})"),
        }
    }
}
