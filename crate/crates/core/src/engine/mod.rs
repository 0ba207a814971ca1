//! Time-unit scheduler for process terms.
//!
//! Each unit starts from the processes scheduled by the previous unit plus
//! the environment's tells. Processes are installed from a FIFO queue; guards
//! of `when` and `sum` become reified booleans in the store and are polled at
//! stable points. When nothing fires any more the unit is quiescent: `unless`
//! continuations whose guard is not entailed are scheduled for the next unit,
//! outputs are read off the store, and the store is reset.

mod policy;
mod trace;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsl::{self, Branch, Cond, Decl, Definition, Expr, ModelAst, Process, SumRange, VarRef, VarType};
use crate::events::EventStream;
use crate::oracle::{FactorOracle, OracleError};
use crate::store::{
    self, CellIndex, Constraint, Entailment, FamilyId, FamilyKind, FamilySpec, Store, StoreError,
    TellResult, VarId,
};

pub use policy::{choose, PolicyParseError, StarPolicy, StarSampler};
pub use trace::{ChoiceRecord, NativeRecord, OutValue, Trace, UnitRecord, UnitStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub seed: u64,
    pub star_policy: StarPolicy,
    /// Record inconsistent units and keep going instead of aborting.
    pub continue_on_fail: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            seed: 0,
            star_policy: StarPolicy::default(),
            continue_on_fail: false,
        }
    }
}

impl EngineConfig {
    pub fn with_seed(seed: u64) -> Self {
        EngineConfig {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("unit {unit}: the store became inconsistent")]
    StoreFailed { unit: u64, record: Box<UnitRecord> },
    #[error("unit {unit}: {what} `{text}` is not determined")]
    Undetermined {
        unit: u64,
        what: &'static str,
        text: String,
    },
    #[error("unit {unit}: unknown name `{name}`")]
    UnknownName { unit: u64, name: String },
    #[error("unit {unit}: no definition named `{name}`")]
    UnknownDefinition { unit: u64, name: String },
    #[error("unit {unit}: `{name}` takes {expected} argument(s), got {got}")]
    ArityMismatch {
        unit: u64,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("unit {unit}: {source}")]
    Store { unit: u64, source: StoreError },
    #[error("unit {unit}: {source}")]
    Oracle { unit: u64, source: OracleError },
}

impl EngineError {
    pub fn unit(&self) -> u64 {
        match self {
            EngineError::StoreFailed { unit, .. }
            | EngineError::Undetermined { unit, .. }
            | EngineError::UnknownName { unit, .. }
            | EngineError::UnknownDefinition { unit, .. }
            | EngineError::ArityMismatch { unit, .. }
            | EngineError::Store { unit, .. }
            | EngineError::Oracle { unit, .. } => *unit,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Binding {
    Value(i64),
    /// A `local` variable: one store variable per unit, same identity across
    /// units for one instantiation.
    Local { id: u32, lo: i64, hi: i64 },
}

#[derive(Clone, Default)]
struct Env<'m>(Option<Rc<Frame<'m>>>);

struct Frame<'m> {
    name: &'m str,
    binding: Binding,
    parent: Env<'m>,
}

impl<'m> Env<'m> {
    fn bind(&self, name: &'m str, binding: Binding) -> Env<'m> {
        Env(Some(Rc::new(Frame {
            name,
            binding,
            parent: self.clone(),
        })))
    }

    fn get(&self, name: &str) -> Option<Binding> {
        let mut cur = self.0.as_ref();
        while let Some(f) = cur {
            if f.name == name {
                return Some(f.binding);
            }
            cur = f.parent.0.as_ref();
        }
        None
    }
}

#[derive(Clone)]
struct Task<'m> {
    proc: &'m Process,
    env: Env<'m>,
}

struct Guarded<'m> {
    guard: &'m Cond,
    body: &'m Process,
    env: Env<'m>,
    flag: Option<VarId>,
}

impl<'m> Guarded<'m> {
    fn new(guard: &'m Cond, body: &'m Process, env: Env<'m>) -> Self {
        Guarded {
            guard,
            body,
            env,
            flag: None,
        }
    }
}

enum Target {
    Const(i64),
    Var(VarId),
}

pub struct Engine<'m> {
    config: EngineConfig,
    defs: HashMap<&'m str, &'m Definition>,
    consts: HashMap<&'m str, i64>,
    families: HashMap<&'m str, FamilyId>,
    outputs: Vec<&'m str>,
    store: Store,
    rng: ChaCha8Rng,
    star: StarSampler,
    unit: u64,
    system: &'m Process,
    next_queue: Vec<Task<'m>>,
    delayed: BTreeMap<u64, Vec<Task<'m>>>,
    next_local: u32,
    oracle: Option<FactorOracle>,
    pending: VecDeque<Task<'m>>,
    whens: Vec<Guarded<'m>>,
    sums: Vec<Vec<Guarded<'m>>>,
    unlesses: Vec<Guarded<'m>>,
    locals: HashMap<u32, VarId>,
    failed: bool,
    rec: UnitRecord,
    rollback: Option<Rollback<'m>>,
}

/// What a discarded unit restores.
struct Rollback<'m> {
    tasks: Vec<Task<'m>>,
    delayed: BTreeMap<u64, Vec<Task<'m>>>,
    oracle: Option<FactorOracle>,
}

fn empty_record(unit: u64) -> UnitRecord {
    UnitRecord {
        unit,
        env: Vec::new(),
        fired: Vec::new(),
        choices: Vec::new(),
        natives: Vec::new(),
        outputs: BTreeMap::new(),
        status: UnitStatus::Ok,
        processes: 0,
    }
}

fn subst_expr(e: &Expr, env: &Env<'_>) -> Expr {
    match e {
        Expr::Int(_) => e.clone(),
        Expr::Ref(r) if r.index.is_empty() => match env.get(&r.name) {
            Some(Binding::Value(v)) => Expr::Int(v),
            _ => e.clone(),
        },
        Expr::Ref(r) => Expr::Ref(subst_ref(r, env)),
        Expr::Add(a, b) => Expr::add(subst_expr(a, env), subst_expr(b, env)),
        Expr::Sub(a, b) => Expr::sub(subst_expr(a, env), subst_expr(b, env)),
        Expr::Mul(a, b) => Expr::mul(subst_expr(a, env), subst_expr(b, env)),
        Expr::Neg(a) => Expr::Neg(Box::new(subst_expr(a, env))),
    }
}

fn subst_ref(r: &VarRef, env: &Env<'_>) -> VarRef {
    VarRef {
        name: r.name.clone(),
        index: r.index.iter().map(|e| subst_expr(e, env)).collect(),
    }
}

fn subst_cond(c: &Cond, env: &Env<'_>) -> Cond {
    match c {
        Cond::True | Cond::False => c.clone(),
        Cond::Rel(a, op, b) => Cond::Rel(subst_expr(a, env), *op, subst_expr(b, env)),
        Cond::Between(a, x, b) => {
            Cond::Between(subst_expr(a, env), subst_expr(x, env), subst_expr(b, env))
        }
        Cond::Member(e, s) => Cond::Member(subst_expr(e, env), subst_ref(s, env)),
        Cond::And(a, b) => Cond::and(subst_cond(a, env), subst_cond(b, env)),
    }
}

impl<'m> Engine<'m> {
    /// Prepares a validated model for execution.
    pub fn new(model: &'m ModelAst, config: EngineConfig) -> Result<Self, EngineError> {
        let mut store = Store::new();
        let mut families = HashMap::new();
        let mut consts = HashMap::new();
        let mut oracle = None;
        let err = |source| EngineError::Store { unit: 0, source };
        for d in model.decls() {
            let spec = match d {
                Decl::Const { name, value } => {
                    consts.insert(name.as_str(), *value);
                    continue;
                }
                Decl::Var { name, ty } => FamilySpec::scalar(name.clone(), kind_of(*ty)),
                Decl::Stream {
                    name,
                    ty,
                    arity,
                    persistent,
                } => FamilySpec {
                    name: name.clone(),
                    kind: kind_of(*ty),
                    arity: *arity,
                    persistent: *persistent,
                },
                Decl::Set {
                    name,
                    arity,
                    persistent,
                } => FamilySpec {
                    name: name.clone(),
                    kind: FamilyKind::Set,
                    arity: *arity,
                    persistent: *persistent,
                },
                Decl::Oracle { lo, hi } => {
                    oracle = Some(FactorOracle::new(*lo, *hi));
                    continue;
                }
                Decl::Out(_) => continue,
            };
            let name = d.name().expect("named declaration");
            families.insert(name, store.declare(spec).map_err(err)?);
        }
        if oracle.is_some() {
            let full = FamilyKind::Fd {
                lo: i64::MIN,
                hi: i64::MAX,
            };
            for (name, kind, arity) in [
                (dsl::ORACLE_S, full, 1),
                (dsl::ORACLE_DELTA, full, 2),
                (dsl::ORACLE_FROM, FamilyKind::Set, 1),
            ] {
                let spec = FamilySpec::stream(name, kind, arity).persistent();
                families.insert(name, store.declare(spec).map_err(err)?);
            }
            // The initial state has no suffix link.
            store
                .assert_fact(dsl::ORACLE_S, CellIndex::one(0), -1)
                .map_err(err)?;
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let star = StarSampler::new(config.star_policy.clone());
        Ok(Engine {
            defs: model.definitions().map(|d| (d.name.as_str(), d)).collect(),
            consts,
            families,
            outputs: model.outputs(),
            store,
            rng,
            star,
            unit: 0,
            system: model.system(),
            next_queue: Vec::new(),
            delayed: BTreeMap::new(),
            next_local: 0,
            oracle,
            pending: VecDeque::new(),
            whens: Vec::new(),
            sums: Vec::new(),
            unlesses: Vec::new(),
            locals: HashMap::new(),
            failed: false,
            rec: empty_record(0),
            rollback: None,
            config,
        })
    }

    /// Number of completed units.
    pub fn unit(&self) -> u64 {
        self.unit
    }

    pub fn oracle(&self) -> Option<&FactorOracle> {
        self.oracle.as_ref()
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Checks that environment constraints only mention declared names, so a
    /// bad line can be rejected before a unit is consumed.
    pub fn check_env(&self, conds: &[Cond]) -> Result<(), EngineError> {
        let mut missing = None;
        let mut visit = |r: &VarRef| {
            let known = self.consts.contains_key(r.name.as_str())
                || self.families.contains_key(r.name.as_str());
            if !known && missing.is_none() {
                missing = Some(r.name.clone());
            }
        };
        fn walk(c: &Cond, f: &mut dyn FnMut(&VarRef)) {
            match c {
                Cond::True | Cond::False => {}
                Cond::Rel(a, _, b) => {
                    a.for_each_ref(f);
                    b.for_each_ref(f);
                }
                Cond::Between(a, x, b) => {
                    a.for_each_ref(f);
                    x.for_each_ref(f);
                    b.for_each_ref(f);
                }
                Cond::Member(e, s) => {
                    e.for_each_ref(f);
                    f(s);
                    s.index.iter().for_each(|i| i.for_each_ref(f));
                }
                Cond::And(a, b) => {
                    walk(a, f);
                    walk(b, f);
                }
            }
        }
        conds.iter().for_each(|c| walk(c, &mut visit));
        match missing {
            Some(name) => Err(EngineError::UnknownName {
                unit: self.unit + 1,
                name,
            }),
            None => Ok(()),
        }
    }

    /// Runs one time-unit with the given environment constraints.
    pub fn run_time_unit(&mut self, env: &[(String, Cond)]) -> Result<UnitRecord, EngineError> {
        self.unit += 1;
        self.rec = empty_record(self.unit);
        self.failed = false;
        let result = self.execute_unit(env);
        self.pending.clear();
        self.whens.clear();
        self.sums.clear();
        let unlesses = std::mem::take(&mut self.unlesses);
        if let Err(e) = result {
            self.end_unit();
            return Err(e);
        }
        if self.failed {
            let mut rec = std::mem::replace(&mut self.rec, empty_record(0));
            rec.status = UnitStatus::Failed;
            self.end_unit();
            if let Some(rb) = self.rollback.take() {
                // The unit is discarded: its processes run again next unit.
                self.next_queue = rb.tasks;
                self.delayed = rb.delayed;
                self.oracle = rb.oracle;
                return Ok(rec);
            }
            return Err(EngineError::StoreFailed {
                unit: rec.unit,
                record: Box::new(rec),
            });
        }
        for u in unlesses {
            let entailed = match self.lower_cond(u.guard, &u.env)? {
                Some(c) => self.entails(&c)? == Entailment::True,
                None => false,
            };
            if !entailed {
                self.next_queue.push(Task {
                    proc: u.body,
                    env: u.env,
                });
            }
        }
        self.collect_outputs()?;
        let rec = std::mem::replace(&mut self.rec, empty_record(0));
        self.end_unit();
        Ok(rec)
    }

    fn end_unit(&mut self) {
        let store = std::mem::take(&mut self.store);
        self.store = store.reset_for_next_unit();
        self.locals.clear();
    }

    fn execute_unit(&mut self, env: &[(String, Cond)]) -> Result<(), EngineError> {
        if self.unit == 1 {
            self.pending.push_back(Task {
                proc: self.system,
                env: Env::default(),
            });
        }
        self.pending.extend(self.next_queue.drain(..));
        if let Some(delayed) = self.delayed.remove(&self.unit) {
            self.pending.extend(delayed);
        }
        if self.config.continue_on_fail {
            self.rollback = Some(Rollback {
                tasks: self.pending.iter().cloned().collect(),
                delayed: self.delayed.clone(),
                oracle: self.oracle.clone(),
            });
        }
        for (text, c) in env {
            self.rec.env.push(text.clone());
            let Some(sc) = self.lower_cond(c, &Env::default())? else {
                return Err(self.undetermined("environment constraint", c.to_string()));
            };
            self.tell(&sc)?;
        }
        loop {
            while let Some(task) = self.pending.pop_front() {
                if self.failed {
                    return Ok(());
                }
                self.install(task)?;
            }
            if self.failed {
                return Ok(());
            }
            if self.fire_whens()? || self.fire_sums()? {
                continue;
            }
            return Ok(());
        }
    }

    fn undetermined(&self, what: &'static str, text: String) -> EngineError {
        EngineError::Undetermined {
            unit: self.unit,
            what,
            text,
        }
    }

    fn store_err(&self, source: StoreError) -> EngineError {
        EngineError::Store {
            unit: self.unit,
            source,
        }
    }

    fn tell(&mut self, c: &Constraint) -> Result<(), EngineError> {
        match self.store.tell(c).map_err(|e| self.store_err(e))? {
            TellResult::Ok => {}
            TellResult::Inconsistent => self.failed = true,
        }
        Ok(())
    }

    fn entails(&self, c: &Constraint) -> Result<Entailment, EngineError> {
        self.store.entails(c).map_err(|e| self.store_err(e))
    }

    // ----- lowering AST to store constraints ------------------------------

    fn local_var(&mut self, id: u32, name: &str, lo: i64, hi: i64) -> Result<VarId, EngineError> {
        if let Some(v) = self.locals.get(&id) {
            return Ok(*v);
        }
        let v = self
            .store
            .new_fd_var(&format!("{name}#{id}"), lo, hi)
            .map_err(|e| self.store_err(e))?;
        self.locals.insert(id, v);
        Ok(v)
    }

    /// `None` when a subscript is not determined yet.
    fn lower_ref(&mut self, r: &VarRef, env: &Env<'m>) -> Result<Option<Target>, EngineError> {
        if r.index.is_empty() {
            match env.get(&r.name) {
                Some(Binding::Value(v)) => return Ok(Some(Target::Const(v))),
                Some(Binding::Local { id, lo, hi }) => {
                    return Ok(Some(Target::Var(self.local_var(id, &r.name, lo, hi)?)))
                }
                None => {}
            }
            if let Some(v) = self.consts.get(r.name.as_str()) {
                return Ok(Some(Target::Const(*v)));
            }
        }
        let mut index = [0i64; 2];
        for (k, e) in r.index.iter().enumerate() {
            let Some(se) = self.lower_expr(e, env)? else {
                return Ok(None);
            };
            match self.store.eval(&se).map_err(|e| self.store_err(e))? {
                Some(v) if k < 2 => index[k] = v,
                Some(_) => {
                    return Err(self.store_err(StoreError::ArityMismatch {
                        name: r.name.clone(),
                        expected: 2,
                        got: r.index.len(),
                    }))
                }
                None => return Ok(None),
            }
        }
        let Some(&fam) = self.families.get(r.name.as_str()) else {
            return Err(EngineError::UnknownName {
                unit: self.unit,
                name: r.name.clone(),
            });
        };
        let idx = CellIndex::from_slice(&index[..r.index.len().min(2)]).expect("at most two subscripts");
        let v = self.store.cell(fam, idx).map_err(|e| self.store_err(e))?;
        Ok(Some(Target::Var(v)))
    }

    fn lower_expr(&mut self, e: &Expr, env: &Env<'m>) -> Result<Option<store::Expr>, EngineError> {
        Ok(Some(match e {
            Expr::Int(n) => store::Expr::Const(*n),
            Expr::Ref(r) => match self.lower_ref(r, env)? {
                Some(Target::Const(v)) => store::Expr::Const(v),
                Some(Target::Var(v)) => store::Expr::Var(v),
                None => return Ok(None),
            },
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                let Some(x) = self.lower_expr(a, env)? else {
                    return Ok(None);
                };
                let Some(y) = self.lower_expr(b, env)? else {
                    return Ok(None);
                };
                match e {
                    Expr::Add(..) => store::Expr::add(x, y),
                    Expr::Sub(..) => store::Expr::sub(x, y),
                    _ => store::Expr::mul(x, y),
                }
            }
            Expr::Neg(a) => match self.lower_expr(a, env)? {
                Some(x) => store::Expr::neg(x),
                None => return Ok(None),
            },
        }))
    }

    fn lower_cond(&mut self, c: &Cond, env: &Env<'m>) -> Result<Option<Constraint>, EngineError> {
        macro_rules! sub {
            ($e:expr) => {
                match self.lower_expr($e, env)? {
                    Some(x) => x,
                    None => return Ok(None),
                }
            };
        }
        Ok(Some(match c {
            Cond::True => Constraint::True,
            Cond::False => Constraint::False,
            Cond::Rel(a, op, b) => Constraint::Rel(sub!(a), *op, sub!(b)),
            Cond::Between(a, x, b) => Constraint::Between(sub!(a), sub!(x), sub!(b)),
            Cond::Member(e, s) => {
                let elem = sub!(e);
                match self.lower_ref(s, env)? {
                    Some(Target::Var(v)) => Constraint::Member(elem, v),
                    Some(Target::Const(_)) => {
                        return Err(self.store_err(StoreError::KindMismatch {
                            name: s.name.clone(),
                            expected: "a set",
                            found: "constant",
                        }))
                    }
                    None => return Ok(None),
                }
            }
            Cond::And(a, b) => {
                let Some(x) = self.lower_cond(a, env)? else {
                    return Ok(None);
                };
                let Some(y) = self.lower_cond(b, env)? else {
                    return Ok(None);
                };
                Constraint::and(x, y)
            }
        }))
    }

    /// Value of an argument, subscript bound or range bound at install time.
    fn eval(&mut self, e: &Expr, env: &Env<'m>, what: &'static str) -> Result<i64, EngineError> {
        let value = match self.lower_expr(e, env)? {
            Some(se) => self.store.eval(&se).map_err(|err| self.store_err(err))?,
            None => None,
        };
        value.ok_or_else(|| self.undetermined(what, subst_expr(e, env).to_string()))
    }

    // ----- installation ---------------------------------------------------

    fn install(&mut self, task: Task<'m>) -> Result<(), EngineError> {
        self.rec.processes += 1;
        let Task { proc, env } = task;
        match proc {
            Process::Skip => {}
            Process::Tell(c) => {
                let Some(sc) = self.lower_cond(c, &env)? else {
                    return Err(self.undetermined("constraint", subst_cond(c, &env).to_string()));
                };
                self.tell(&sc)?;
            }
            Process::When(c, body) => self.whens.push(Guarded::new(c, body, env)),
            Process::Unless(c, body) => self.unlesses.push(Guarded::new(c, body, env)),
            Process::Next(body) => self.next_queue.push(Task { proc: body, env }),
            Process::Star(body) => {
                let d = self.star.delay(&mut self.rng);
                let task = Task { proc: body, env };
                if d == 0 {
                    self.pending.push_back(task);
                } else {
                    self.delayed.entry(self.unit + d).or_default().push(task);
                }
            }
            Process::Bang(body) => {
                self.pending.push_back(Task {
                    proc: body,
                    env: env.clone(),
                });
                self.next_queue.push(Task { proc, env });
            }
            Process::Par(parts) => {
                for p in parts {
                    self.pending.push_back(Task {
                        proc: p,
                        env: env.clone(),
                    });
                }
            }
            Process::Local(decls, body) => {
                let mut inner = env;
                for d in decls {
                    let (lo, hi) = d.range.unwrap_or((i64::MIN, i64::MAX));
                    let id = self.next_local;
                    self.next_local += 1;
                    inner = inner.bind(&d.name, Binding::Local { id, lo, hi });
                }
                self.pending.push_back(Task {
                    proc: body,
                    env: inner,
                });
            }
            Process::Sum(branches) => {
                let mut expanded = Vec::new();
                for b in branches {
                    match b {
                        Branch::Guarded { guard, body } => {
                            expanded.push(Guarded::new(guard, body, env.clone()))
                        }
                        Branch::Family {
                            var,
                            range,
                            guard,
                            body,
                        } => {
                            let values: Vec<i64> = match range {
                                SumRange::Interval(a, b) => {
                                    let lo = self.eval(a, &env, "sum range bound")?;
                                    let hi = self.eval(b, &env, "sum range bound")?;
                                    (lo..=hi).collect()
                                }
                                SumRange::List(items) => items
                                    .iter()
                                    .map(|e| self.eval(e, &env, "sum range value"))
                                    .collect::<Result<_, _>>()?,
                            };
                            for v in values {
                                let inner = env.bind(var, Binding::Value(v));
                                expanded.push(Guarded::new(guard, body, inner));
                            }
                        }
                    }
                }
                if !expanded.is_empty() {
                    self.sums.push(expanded);
                }
            }
            Process::Call(name, args) => {
                let Some(def) = self.defs.get(name.as_str()).copied() else {
                    return Err(EngineError::UnknownDefinition {
                        unit: self.unit,
                        name: name.clone(),
                    });
                };
                if def.params.len() != args.len() {
                    return Err(EngineError::ArityMismatch {
                        unit: self.unit,
                        name: name.clone(),
                        expected: def.params.len(),
                        got: args.len(),
                    });
                }
                let mut inner = Env::default();
                for (p, a) in def.params.iter().zip(args) {
                    let v = self.eval(a, &env, "argument")?;
                    inner = inner.bind(p, Binding::Value(v));
                }
                self.pending.push_back(Task {
                    proc: &def.body,
                    env: inner,
                });
            }
            Process::Native(name, args) => self.native(name, args, &env)?,
        }
        Ok(())
    }

    fn native(&mut self, name: &str, args: &[Expr], env: &Env<'m>) -> Result<(), EngineError> {
        if name != dsl::ORACLE_ADD || args.len() != 1 || self.oracle.is_none() {
            return Err(EngineError::UnknownDefinition {
                unit: self.unit,
                name: name.to_string(),
            });
        }
        let symbol = self.eval(&args[0], env, "argument")?;
        let unit = self.unit;
        let fo = self.oracle.as_mut().expect("checked above");
        let state = fo
            .add_symbol(symbol)
            .map_err(|source| EngineError::Oracle { unit, source })?;
        let suffix = fo.suffix(state as i64).expect("new state exists");
        let sources: Vec<usize> = (0..state)
            .filter(|&k| fo.transitions(k).get(&symbol) == Some(&state))
            .collect();
        let state = state as i64;
        let mut results = vec![self.store.assert_fact(dsl::ORACLE_S, CellIndex::one(state), suffix)];
        for k in sources {
            let k = k as i64;
            results.push(self.store.assert_fact(dsl::ORACLE_DELTA, CellIndex::two(k, symbol), state));
            results.push(self.store.assert_fact(dsl::ORACLE_FROM, CellIndex::one(k), symbol));
        }
        for r in results {
            if r.map_err(|e| self.store_err(e))? == TellResult::Inconsistent {
                self.failed = true;
            }
        }
        self.rec.natives.push(NativeRecord {
            name: name.to_string(),
            args: vec![symbol],
            result: state,
        });
        Ok(())
    }

    // ----- firing ---------------------------------------------------------

    fn guard_status(&mut self, g: &mut Guarded<'m>) -> Result<Entailment, EngineError> {
        let flag = match g.flag {
            Some(f) => f,
            None => {
                let Some(c) = self.lower_cond(g.guard, &g.env)? else {
                    return Ok(Entailment::Unknown);
                };
                let f = self.store.reify(&c).map_err(|e| self.store_err(e))?;
                g.flag = Some(f);
                f
            }
        };
        Ok(match self.store.value(flag) {
            Some(1) => Entailment::True,
            Some(_) => Entailment::False,
            None => Entailment::Unknown,
        })
    }

    fn fire_whens(&mut self) -> Result<bool, EngineError> {
        let whens = std::mem::take(&mut self.whens);
        let mut keep = Vec::with_capacity(whens.len());
        let mut fired = false;
        for mut w in whens {
            match self.guard_status(&mut w)? {
                Entailment::True => {
                    self.rec.fired.push(subst_cond(w.guard, &w.env).to_string());
                    self.pending.push_back(Task {
                        proc: w.body,
                        env: w.env,
                    });
                    fired = true;
                }
                // Disentailed guards stay disentailed for the rest of the unit.
                Entailment::False => {}
                Entailment::Unknown => keep.push(w),
            }
        }
        self.whens = keep;
        Ok(fired)
    }

    fn fire_sums(&mut self) -> Result<bool, EngineError> {
        let sums = std::mem::take(&mut self.sums);
        let mut keep = Vec::with_capacity(sums.len());
        let mut fired = false;
        for mut branches in sums {
            let mut enabled = Vec::new();
            for (i, b) in branches.iter_mut().enumerate() {
                if self.guard_status(b)? == Entailment::True {
                    enabled.push(i);
                }
            }
            if enabled.is_empty() {
                keep.push(branches);
                continue;
            }
            let k = *choose(&mut self.rng, &enabled);
            let chosen = branches.swap_remove(k);
            self.rec.choices.push(ChoiceRecord {
                branch: k,
                enabled,
                guard: subst_cond(chosen.guard, &chosen.env).to_string(),
            });
            self.pending.push_back(Task {
                proc: chosen.body,
                env: chosen.env,
            });
            fired = true;
        }
        self.sums = keep;
        Ok(fired)
    }

    // ----- outputs --------------------------------------------------------

    fn collect_outputs(&mut self) -> Result<(), EngineError> {
        for &name in &self.outputs {
            let Some(&fam) = self.families.get(name) else {
                continue;
            };
            let arity = self.store.family_spec(fam).arity;
            for (idx, var) in self.store.family_cells(fam) {
                let key = if arity == 0 {
                    name.to_string()
                } else {
                    format!("{name}{idx}")
                };
                if let Some(members) = self.store.members(var) {
                    if !members.is_empty() {
                        let vals = members.iter().copied().collect();
                        self.rec.outputs.insert(key, OutValue::Set(vals));
                    }
                } else if let Some(v) = self.store.value(var) {
                    self.rec.outputs.insert(key, OutValue::Int(v));
                }
            }
        }
        Ok(())
    }
}

fn kind_of(ty: VarType) -> FamilyKind {
    match ty {
        VarType::Bool => FamilyKind::Bool,
        other => {
            let (lo, hi) = other.bounds();
            FamilyKind::Fd { lo, hi }
        }
    }
}

/// Result of [`run`]: the records produced, and the error that stopped the
/// run early, if any. On a store failure the failing unit's record is the
/// last one in the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: Trace,
    pub error: Option<EngineError>,
}

/// Runs `units` time-units, feeding each unit its environment constraints.
pub fn run(model: &ModelAst, inputs: &EventStream, units: u64, config: EngineConfig) -> RunOutcome {
    let mut trace = Trace::default();
    let mut engine = match Engine::new(model, config) {
        Ok(e) => e,
        Err(error) => {
            return RunOutcome {
                trace,
                error: Some(error),
            }
        }
    };
    for u in 1..=units {
        match engine.run_time_unit(inputs.tells(u)) {
            Ok(rec) => trace.records.push(rec),
            Err(error) => {
                if let EngineError::StoreFailed { record, .. } = &error {
                    trace.records.push((**record).clone());
                }
                return RunOutcome {
                    trace,
                    error: Some(error),
                };
            }
        }
    }
    RunOutcome { trace, error: None }
}
