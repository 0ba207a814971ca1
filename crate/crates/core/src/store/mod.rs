//! Finite-domain constraint store.
//!
//! The store holds integer variables (with interval-list domains), boolean
//! variables, and set variables that only carry a lower bound of known
//! members. Constraints told to the store are turned into propagators that run
//! to a fixpoint; [`Store::entails`] answers three-valued entailment queries
//! against the current domains, and [`Store::reify`] attaches a boolean that
//! tracks the entailment status of a guard.
//!
//! Variables are organized in *families*. A scalar model variable is a family
//! with no subscripts; `S[3]` or `delta[2, 5]` are cells of indexed families,
//! created on first access. Families declared `persistent` write their
//! determined cells into a [`PersistentFactBase`] that survives
//! [`Store::reset_for_next_unit`].

mod constraint;
mod domain;
mod entail;
mod facts;
mod propagate;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use constraint::{Constraint, Expr, Interval, Overflow, RelOp};
pub use domain::FdDomain;
pub use facts::PersistentFactBase;

use propagate::Prop;

/// Handle to a store variable. Only meaningful for the store that issued it
/// (and, for scalar model variables, for the stores derived from it by reset).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilyId(u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Fd,
    Bool,
    Set,
}

impl VarKind {
    fn describe(self) -> &'static str {
        match self {
            VarKind::Fd => "integer",
            VarKind::Bool => "boolean",
            VarKind::Set => "set",
        }
    }
}

/// Subscripts of a family cell (zero, one or two of them).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    parts: [i64; 2],
    arity: u8,
}

impl CellIndex {
    pub fn scalar() -> Self {
        CellIndex {
            parts: [0, 0],
            arity: 0,
        }
    }

    pub fn one(i: i64) -> Self {
        CellIndex {
            parts: [i, 0],
            arity: 1,
        }
    }

    pub fn two(i: i64, j: i64) -> Self {
        CellIndex {
            parts: [i, j],
            arity: 2,
        }
    }

    /// Builds an index from at most two subscripts.
    pub fn from_slice(parts: &[i64]) -> Option<Self> {
        match parts {
            [] => Some(Self::scalar()),
            [i] => Some(Self::one(*i)),
            [i, j] => Some(Self::two(*i, *j)),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn parts(&self) -> &[i64] {
        &self.parts[..self.arity as usize]
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arity == 0 {
            return Ok(());
        }
        write!(f, "[")?;
        for (i, p) in self.parts().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Fd { lo: i64, hi: i64 },
    Bool,
    Set,
}

/// Declaration of a variable family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub name: String,
    pub kind: FamilyKind,
    pub arity: u8,
    pub persistent: bool,
}

impl FamilySpec {
    pub fn scalar(name: impl Into<String>, kind: FamilyKind) -> Self {
        FamilySpec {
            name: name.into(),
            kind,
            arity: 0,
            persistent: false,
        }
    }

    pub fn stream(name: impl Into<String>, kind: FamilyKind, arity: u8) -> Self {
        FamilySpec {
            name: name.into(),
            kind,
            arity,
            persistent: false,
        }
    }

    pub fn persistent(mut self) -> Self {
        self.persistent = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entailment {
    True,
    False,
    Unknown,
}

impl Entailment {
    pub fn is_true(self) -> bool {
        self == Entailment::True
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TellResult {
    Ok,
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    Stable,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreStatus {
    Stable,
    Pending,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("invalid domain {lo}..{hi}: lower bound exceeds upper bound")]
    InvalidDomain { lo: i64, hi: i64 },
    #[error("unknown variable v{0}")]
    UnknownVariable(u32),
    #[error("`{name}` is a {found} variable but {expected} is required")]
    KindMismatch {
        name: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("entailment queried on a failed store")]
    QueryOnFailedStore,
    #[error("persistent cell {family}{index} already holds {existing}, cannot become {value}")]
    PersistentConflict {
        family: String,
        index: CellIndex,
        existing: i64,
        value: i64,
    },
    #[error("`{0}` is not a persistent family")]
    NotPersistent(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("`{name}` takes {expected} subscript(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("`{0}` is already declared")]
    DuplicateName(String),
    #[error("integer overflow while evaluating an expression")]
    Overflow,
}

impl From<Overflow> for StoreError {
    fn from(_: Overflow) -> Self {
        StoreError::Overflow
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Fd(FdDomain),
    Set(BTreeSet<i64>),
}

#[derive(Debug, Clone)]
struct VarInfo {
    name: String,
    kind: VarKind,
    slot: Slot,
    cell: Option<(FamilyId, CellIndex)>,
}

#[derive(Debug, Clone)]
struct Family {
    spec: FamilySpec,
    cells: Vec<(CellIndex, VarId)>,
}

#[derive(Debug)]
struct PropSlot {
    prop: Prop,
    done: bool,
}

/// Upper bound on propagator executions per call to [`Store::propagate`].
/// Bounds propagation over very wide domains can otherwise creep one value at
/// a time (e.g. `x < y ∧ y < x` over the full `i64` range).
const PROPAGATION_BUDGET: usize = 2_000_000;

#[derive(Debug)]
pub struct Store {
    vars: Vec<VarInfo>,
    families: Vec<Family>,
    family_index: HashMap<String, FamilyId>,
    cells: HashMap<(FamilyId, CellIndex), VarId>,
    props: Vec<PropSlot>,
    watch: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    guards: HashMap<Constraint, VarId>,
    failed: bool,
    budget_exhausted: bool,
    facts: PersistentFactBase,
}

impl Default for Store {
    fn default() -> Self {
        Self::new()
    }
}

impl Store {
    pub fn new() -> Self {
        Self::with_facts(PersistentFactBase::new())
    }

    pub fn with_facts(facts: PersistentFactBase) -> Self {
        Store {
            vars: Vec::new(),
            families: Vec::new(),
            family_index: HashMap::new(),
            cells: HashMap::new(),
            props: Vec::new(),
            watch: Vec::new(),
            queue: VecDeque::new(),
            queued: Vec::new(),
            guards: HashMap::new(),
            failed: false,
            budget_exhausted: false,
            facts,
        }
    }

    // ----- declarations -------------------------------------------------

    /// Declares a variable family. Scalar families get their single cell
    /// immediately so that their `VarId`s are stable across resets.
    pub fn declare(&mut self, spec: FamilySpec) -> Result<FamilyId, StoreError> {
        if let FamilyKind::Fd { lo, hi } = spec.kind {
            if lo > hi {
                return Err(StoreError::InvalidDomain { lo, hi });
            }
        }
        if self.family_index.contains_key(&spec.name) {
            return Err(StoreError::DuplicateName(spec.name));
        }
        let id = FamilyId(self.families.len() as u32);
        self.family_index.insert(spec.name.clone(), id);
        let scalar = spec.arity == 0;
        self.families.push(Family {
            spec,
            cells: Vec::new(),
        });
        if scalar {
            self.cell(id, CellIndex::scalar())?;
        }
        Ok(id)
    }

    /// Declares a scalar integer model variable with domain `[lo, hi]`.
    pub fn declare_fd_var(&mut self, name: &str, lo: i64, hi: i64) -> Result<VarId, StoreError> {
        let fam = self.declare(FamilySpec::scalar(name, FamilyKind::Fd { lo, hi }))?;
        self.cell(fam, CellIndex::scalar())
    }

    pub fn declare_bool_var(&mut self, name: &str) -> Result<VarId, StoreError> {
        let fam = self.declare(FamilySpec::scalar(name, FamilyKind::Bool))?;
        self.cell(fam, CellIndex::scalar())
    }

    pub fn declare_set_var(&mut self, name: &str) -> Result<VarId, StoreError> {
        let fam = self.declare(FamilySpec::scalar(name, FamilyKind::Set))?;
        self.cell(fam, CellIndex::scalar())
    }

    /// Creates a fresh integer variable that lives only until the next reset.
    pub fn new_fd_var(&mut self, name: &str, lo: i64, hi: i64) -> Result<VarId, StoreError> {
        if lo > hi {
            return Err(StoreError::InvalidDomain { lo, hi });
        }
        Ok(self.push_var(name.to_string(), VarKind::Fd, Slot::Fd(FdDomain::range(lo, hi)), None))
    }

    pub fn new_bool_var(&mut self, name: &str) -> VarId {
        self.push_var(name.to_string(), VarKind::Bool, Slot::Fd(FdDomain::range(0, 1)), None)
    }

    pub fn new_set_var(&mut self, name: &str) -> VarId {
        self.push_var(name.to_string(), VarKind::Set, Slot::Set(BTreeSet::new()), None)
    }

    fn push_var(
        &mut self,
        name: String,
        kind: VarKind,
        slot: Slot,
        cell: Option<(FamilyId, CellIndex)>,
    ) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo {
            name,
            kind,
            slot,
            cell,
        });
        self.watch.push(Vec::new());
        id
    }

    pub fn family(&self, name: &str) -> Option<FamilyId> {
        self.family_index.get(name).copied()
    }

    pub fn family_spec(&self, id: FamilyId) -> &FamilySpec {
        &self.families[id.0 as usize].spec
    }

    /// The variable of a scalar family.
    pub fn lookup(&self, name: &str) -> Option<VarId> {
        let fam = self.family(name)?;
        self.cells.get(&(fam, CellIndex::scalar())).copied()
    }

    /// Returns the cell `family[index]`, creating it on first access. Cells of
    /// persistent families start from the recorded facts.
    pub fn cell(&mut self, family: FamilyId, index: CellIndex) -> Result<VarId, StoreError> {
        if let Some(v) = self.cells.get(&(family, index)) {
            return Ok(*v);
        }
        let spec = self.families[family.0 as usize].spec.clone();
        if spec.arity as usize != index.arity() {
            return Err(StoreError::ArityMismatch {
                name: spec.name,
                expected: spec.arity as usize,
                got: index.arity(),
            });
        }
        let name = format!("{}{}", spec.name, index);
        let (kind, slot) = match spec.kind {
            FamilyKind::Fd { lo, hi } => (VarKind::Fd, FdDomain::range(lo, hi)),
            FamilyKind::Bool => (VarKind::Bool, FdDomain::range(0, 1)),
            FamilyKind::Set => {
                let members = if spec.persistent {
                    self.facts
                        .members(&spec.name, index)
                        .cloned()
                        .unwrap_or_default()
                } else {
                    BTreeSet::new()
                };
                let id = self.push_var(name, VarKind::Set, Slot::Set(members), Some((family, index)));
                self.register_cell(family, index, id);
                return Ok(id);
            }
        };
        let mut dom = slot;
        if spec.persistent {
            if let Some(v) = self.facts.value(&spec.name, index) {
                dom.restrict(v, v);
                if dom.is_empty() {
                    self.fail();
                }
            }
        }
        let id = self.push_var(name, kind, Slot::Fd(dom), Some((family, index)));
        self.register_cell(family, index, id);
        Ok(id)
    }

    fn register_cell(&mut self, family: FamilyId, index: CellIndex, id: VarId) {
        self.cells.insert((family, index), id);
        self.families[family.0 as usize].cells.push((index, id));
    }

    /// Cells of a family created in this store, sorted by index.
    pub fn family_cells(&self, family: FamilyId) -> Vec<(CellIndex, VarId)> {
        let mut cells = self.families[family.0 as usize].cells.clone();
        cells.sort();
        cells
    }

    // ----- inspection ---------------------------------------------------

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.vars[v.index()].name
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.vars[v.index()].kind
    }

    pub fn domain(&self, v: VarId) -> Option<&FdDomain> {
        match &self.vars.get(v.index())?.slot {
            Slot::Fd(d) => Some(d),
            Slot::Set(_) => None,
        }
    }

    /// Known members of a set variable.
    pub fn members(&self, v: VarId) -> Option<&BTreeSet<i64>> {
        match &self.vars.get(v.index())?.slot {
            Slot::Set(s) => Some(s),
            Slot::Fd(_) => None,
        }
    }

    /// Value of a determined integer or boolean variable.
    pub fn value(&self, v: VarId) -> Option<i64> {
        self.domain(v).and_then(FdDomain::value)
    }

    pub fn status(&self) -> StoreStatus {
        if self.failed {
            StoreStatus::Failed
        } else if self.queue.is_empty() {
            StoreStatus::Stable
        } else {
            StoreStatus::Pending
        }
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    /// True when the last propagation stopped on [`PROPAGATION_BUDGET`].
    pub fn budget_exhausted(&self) -> bool {
        self.budget_exhausted
    }

    pub fn facts(&self) -> &PersistentFactBase {
        &self.facts
    }

    pub fn posted_count(&self) -> usize {
        self.props.len()
    }

    /// Interval enclosing every value `e` can take under the current domains.
    pub fn interval(&self, e: &Expr) -> Interval {
        match e {
            Expr::Const(c) => Interval::point(*c as i128),
            Expr::Var(v) => match self.domain(*v) {
                Some(d) if !d.is_empty() => {
                    Interval::new(d.min().unwrap() as i128, d.max().unwrap() as i128)
                }
                _ => Interval::new(1, 0),
            },
            Expr::Add(a, b) => self.interval(a).add(self.interval(b)),
            Expr::Sub(a, b) => self.interval(a).sub(self.interval(b)),
            Expr::Mul(a, b) => self.interval(a).mul(self.interval(b)),
            Expr::Neg(a) => self.interval(a).neg(),
        }
    }

    /// Exact value of `e` if all its variables are determined.
    pub fn eval(&self, e: &Expr) -> Result<Option<i64>, StoreError> {
        self.check_expr(e)?;
        Ok(e.eval(&|v| self.value(v))?)
    }

    // ----- validation of constraint shapes -------------------------------

    fn check_var(&self, v: VarId, want_set: bool) -> Result<(), StoreError> {
        let info = self
            .vars
            .get(v.index())
            .ok_or(StoreError::UnknownVariable(v.0))?;
        let is_set = info.kind == VarKind::Set;
        if is_set != want_set {
            return Err(StoreError::KindMismatch {
                name: info.name.clone(),
                expected: if want_set { "a set" } else { "an integer" },
                found: info.kind.describe(),
            });
        }
        Ok(())
    }

    fn check_expr(&self, e: &Expr) -> Result<(), StoreError> {
        let mut vars = BTreeSet::new();
        e.collect_vars(&mut vars);
        vars.into_iter().try_for_each(|v| self.check_var(v, false))
    }

    fn check_constraint(&self, c: &Constraint) -> Result<(), StoreError> {
        match c {
            Constraint::True | Constraint::False => Ok(()),
            Constraint::Rel(a, _, b) => {
                self.check_expr(a)?;
                self.check_expr(b)
            }
            Constraint::Between(a, x, b) => {
                self.check_expr(a)?;
                self.check_expr(x)?;
                self.check_expr(b)
            }
            Constraint::Member(e, s) => {
                self.check_expr(e)?;
                self.check_var(*s, true)
            }
            Constraint::And(a, b) => {
                self.check_constraint(a)?;
                self.check_constraint(b)
            }
        }
    }

    // ----- tell / propagate / reify --------------------------------------

    /// Adds `c` to the store and propagates to a fixpoint.
    pub fn tell(&mut self, c: &Constraint) -> Result<TellResult, StoreError> {
        self.check_constraint(c)?;
        if self.failed {
            return Ok(TellResult::Inconsistent);
        }
        for atom in c.atoms() {
            match atom {
                Constraint::True => {}
                Constraint::False => self.fail(),
                Constraint::Rel(a, op, b) => self.add_prop(Prop::Rel { lhs: a, op, rhs: b }),
                Constraint::Member(e, s) => self.add_prop(Prop::Member { elem: e, set: s }),
                Constraint::And(..) | Constraint::Between(..) => unreachable!("atoms are flat"),
            }
            if self.failed {
                break;
            }
        }
        Ok(match self.propagate() {
            Propagation::Stable => TellResult::Ok,
            Propagation::Failed => TellResult::Inconsistent,
        })
    }

    /// Returns the boolean reifying `c`: it becomes 1 when `c` is entailed and
    /// 0 when `c` is disentailed. Idempotent for equal constraints.
    pub fn reify(&mut self, c: &Constraint) -> Result<VarId, StoreError> {
        self.check_constraint(c)?;
        if let Some(b) = self.guards.get(c) {
            return Ok(*b);
        }
        let b = self.new_bool_var("guard");
        self.guards.insert(c.clone(), b);
        self.add_prop(Prop::Reify { c: c.clone(), b });
        self.propagate();
        Ok(b)
    }

    fn add_prop(&mut self, prop: Prop) {
        let id = self.props.len();
        let (fd, sets) = prop.watched();
        for v in fd.into_iter().chain(sets) {
            self.watch[v.index()].push(id);
        }
        self.props.push(PropSlot { prop, done: false });
        self.queued.push(false);
        self.enqueue(id);
    }

    fn enqueue(&mut self, id: usize) {
        if !self.queued[id] && !self.props[id].done {
            self.queued[id] = true;
            self.queue.push_back(id);
        }
    }

    pub(crate) fn fail(&mut self) {
        self.failed = true;
        self.queue.clear();
        for q in &mut self.queued {
            *q = false;
        }
    }

    /// Runs queued propagators until nothing changes.
    pub fn propagate(&mut self) -> Propagation {
        if self.failed {
            return Propagation::Failed;
        }
        let mut steps = 0usize;
        let mut changed = Vec::new();
        self.budget_exhausted = false;
        while let Some(id) = self.queue.pop_front() {
            self.queued[id] = false;
            if self.props[id].done {
                continue;
            }
            steps += 1;
            if steps > PROPAGATION_BUDGET {
                self.budget_exhausted = true;
                self.queue.clear();
                self.queued.iter_mut().for_each(|q| *q = false);
                break;
            }
            changed.clear();
            match self.run_prop(id, &mut changed) {
                Ok(done) => self.props[id].done = done,
                Err(propagate::Fail) => {
                    self.fail();
                    return Propagation::Failed;
                }
            }
            for v in changed.drain(..) {
                for k in 0..self.watch[v.index()].len() {
                    let w = self.watch[v.index()][k];
                    self.enqueue(w);
                }
            }
        }
        Propagation::Stable
    }

    // ----- persistence ----------------------------------------------------

    /// Records a ground fact on a persistent cell: a value for integer
    /// families, a member for set families. The fact is visible at once and in
    /// every later time-unit.
    pub fn assert_fact(
        &mut self,
        family: &str,
        index: CellIndex,
        value: i64,
    ) -> Result<TellResult, StoreError> {
        let fam = self
            .family(family)
            .ok_or_else(|| StoreError::UnknownFamily(family.to_string()))?;
        let spec = self.family_spec(fam).clone();
        if !spec.persistent {
            return Err(StoreError::NotPersistent(spec.name));
        }
        if spec.arity as usize != index.arity() {
            return Err(StoreError::ArityMismatch {
                name: spec.name,
                expected: spec.arity as usize,
                got: index.arity(),
            });
        }
        match spec.kind {
            FamilyKind::Set => {
                self.facts.record_member(&spec.name, index, value);
                let cell = self.cell(fam, index)?;
                self.tell(&Constraint::Member(Expr::Const(value), cell))
            }
            _ => {
                self.facts
                    .record_value(&spec.name, index, value)
                    .map_err(|c| StoreError::PersistentConflict {
                        family: spec.name.clone(),
                        index,
                        existing: c.existing,
                        value,
                    })?;
                let cell = self.cell(fam, index)?;
                self.tell(&Constraint::eq(Expr::Var(cell), Expr::Const(value)))
            }
        }
    }

    /// Writes determined persistent cells into the fact base.
    fn flush_facts(&mut self) {
        for info in &self.vars {
            let Some((fam, index)) = info.cell else {
                continue;
            };
            let spec = &self.families[fam.0 as usize].spec;
            if !spec.persistent {
                continue;
            }
            match &info.slot {
                Slot::Fd(d) => {
                    if let Some(v) = d.value() {
                        // Cells start from their recorded fact, so a
                        // surviving store never disagrees with it.
                        let _ = self.facts.record_value(&spec.name, index, v);
                    }
                }
                Slot::Set(members) => {
                    for m in members {
                        self.facts.record_member(&spec.name, index, *m);
                    }
                }
            }
        }
    }

    /// Ends the time-unit: temporal constraints, domains and guards are
    /// dropped; declarations and persistent facts carry over. Scalar model
    /// variables are re-created with the same `VarId`s when they were declared
    /// before any temporary variable.
    pub fn reset_for_next_unit(mut self) -> Store {
        if !self.failed {
            self.flush_facts();
        }
        let mut next = Store::with_facts(self.facts);
        for fam in self.families {
            next.declare(fam.spec)
                .expect("re-declaring families of a valid store");
        }
        next
    }
}
