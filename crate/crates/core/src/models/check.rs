//! Trace properties of the shipped models. Checkers are pure functions of
//! their arguments.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dsl::{Cond, Expr, VarRef};
use crate::engine::{OutValue, Trace, UnitRecord};
use crate::oracle::FactorOracle;
use crate::store::{self, Constraint, Entailment, RelOp, Store, TellResult, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckReport {
    fn pass(property: &str) -> Self {
        CheckReport {
            property: property.to_string(),
            passed: true,
            first_violation: None,
            witness: None,
        }
    }

    fn fail(property: &str, unit: u64, witness: String) -> Self {
        CheckReport {
            property: property.to_string(),
            passed: false,
            first_violation: Some(unit),
            witness: Some(witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("unit {unit}: trace does not match the model's schema: {message}")]
    TraceSchemaMismatch { unit: u64, message: String },
}

fn mismatch(unit: u64, message: impl Into<String>) -> CheckError {
    CheckError::TraceSchemaMismatch {
        unit,
        message: message.into(),
    }
}

/// Splits `name[3]` into `("name", 3)`.
fn indexed_key(key: &str) -> Option<(&str, i64)> {
    let (name, rest) = key.split_once('[')?;
    let idx = rest.strip_suffix(']')?.trim().parse().ok()?;
    Some((name, idx))
}

fn int_output(r: &UnitRecord, key: &str, value: &OutValue) -> Result<i64, CheckError> {
    value
        .as_int()
        .ok_or_else(|| mismatch(r.unit, format!("output `{key}` is not an integer")))
}

fn check_units_contiguous(trace: &Trace) -> Result<(), CheckError> {
    for (i, r) in trace.records.iter().enumerate() {
        if r.unit != i as u64 + 1 {
            return Err(mismatch(r.unit, format!("expected unit {}", i + 1)));
        }
    }
    Ok(())
}

/// Filters model: at every unit each object is held by at most one filter,
/// apart from a holder that is released by `end[j]` in that same unit, and
/// an object is only handed to a filter while no other filter keeps it.
pub fn check_mutual_exclusion(trace: &Trace) -> Result<CheckReport, CheckError> {
    const P: &str = "mutual_exclusion";
    check_units_contiguous(trace)?;
    // object -> filters holding it in the previous unit
    let mut previous: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for r in &trace.records {
        let mut holders: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        let mut work = BTreeMap::new();
        let mut ended = BTreeMap::new();
        for (key, value) in &r.outputs {
            let (name, idx) =
                indexed_key(key).ok_or_else(|| mismatch(r.unit, format!("unexpected output `{key}`")))?;
            let v = int_output(r, key, value)?;
            match name {
                "busy" => holders.entry(v).or_default().push(idx),
                "work" => {
                    work.insert(idx, v);
                }
                "end" => {
                    ended.insert(idx, v == 1);
                }
                "held" => {}
                _ => return Err(mismatch(r.unit, format!("unexpected output `{key}`"))),
            }
        }
        for (object, filters) in &holders {
            let released = ended.get(object).copied().unwrap_or(false);
            let kept: Vec<i64> = filters
                .iter()
                .copied()
                .filter(|f| {
                    let was_holding = previous.get(object).is_some_and(|p| p.contains(f));
                    !(released && was_holding)
                })
                .collect();
            if kept.len() > 1 {
                return Ok(CheckReport::fail(
                    P,
                    r.unit,
                    format!("filters {kept:?} are busy on object {object}"),
                ));
            }
        }
        for (object, filter) in &work {
            let holds = holders.get(object).is_some_and(|h| h.contains(filter));
            if !holds {
                return Ok(CheckReport::fail(
                    P,
                    r.unit,
                    format!("object {object} chose filter {filter}, which is not busy on it"),
                ));
            }
            let released = ended.get(object).copied().unwrap_or(false);
            if let Some(prev) = previous.get(object) {
                if !released && prev.iter().any(|f| f != filter) {
                    return Ok(CheckReport::fail(
                        P,
                        r.unit,
                        format!("object {object} chose filter {filter} while {prev:?} still held it"),
                    ));
                }
            }
        }
        // end[j] releases every holder of j from the next unit on.
        holders.retain(|object, _| !ended.get(object).copied().unwrap_or(false));
        previous = holders;
    }
    Ok(CheckReport::pass(P))
}

/// Minimal store over the player's variables, used to decide what the
/// environment entailed in a unit.
struct PlayerView {
    store: Store,
    go: VarId,
    note: VarId,
}

impl PlayerView {
    fn new(r: &UnitRecord) -> Result<Self, CheckError> {
        let mut store = Store::new();
        let go = store
            .declare_fd_var("go", i64::MIN, i64::MAX)
            .expect("fresh store");
        let note = store.declare_fd_var("note", 0, 127).expect("fresh store");
        let mut view = PlayerView { store, go, note };
        for text in &r.env {
            let cond = crate::dsl::parse_cond(text)
                .map_err(|e| mismatch(r.unit, format!("env `{text}`: {e}")))?;
            let c = view.lower_cond(r.unit, &cond)?;
            let ok = view
                .store
                .tell(&c)
                .map_err(|e| mismatch(r.unit, e.to_string()))?;
            if ok == TellResult::Inconsistent {
                return Err(mismatch(r.unit, "environment tells are inconsistent"));
            }
        }
        Ok(view)
    }

    fn lower_expr(&self, unit: u64, e: &Expr) -> Result<store::Expr, CheckError> {
        Ok(match e {
            Expr::Int(n) => store::Expr::Const(*n),
            Expr::Ref(VarRef { name, index }) if index.is_empty() => match name.as_str() {
                "go" => store::Expr::Var(self.go),
                "note" => store::Expr::Var(self.note),
                _ => return Err(mismatch(unit, format!("env mentions `{name}`"))),
            },
            Expr::Ref(r) => return Err(mismatch(unit, format!("env mentions `{}`", r.name))),
            Expr::Add(a, b) => store::Expr::add(self.lower_expr(unit, a)?, self.lower_expr(unit, b)?),
            Expr::Sub(a, b) => store::Expr::sub(self.lower_expr(unit, a)?, self.lower_expr(unit, b)?),
            Expr::Mul(a, b) => store::Expr::mul(self.lower_expr(unit, a)?, self.lower_expr(unit, b)?),
            Expr::Neg(a) => store::Expr::neg(self.lower_expr(unit, a)?),
        })
    }

    fn lower_cond(&self, unit: u64, c: &Cond) -> Result<Constraint, CheckError> {
        Ok(match c {
            Cond::True => Constraint::True,
            Cond::False => Constraint::False,
            Cond::Rel(a, op, b) => Constraint::Rel(self.lower_expr(unit, a)?, *op, self.lower_expr(unit, b)?),
            Cond::Between(a, x, b) => Constraint::Between(
                self.lower_expr(unit, a)?,
                self.lower_expr(unit, x)?,
                self.lower_expr(unit, b)?,
            ),
            Cond::Member(..) => return Err(mismatch(unit, "env tells a set membership")),
            Cond::And(a, b) => Constraint::and(self.lower_cond(unit, a)?, self.lower_cond(unit, b)?),
        })
    }

    fn go_at_least(&self, i: i64) -> bool {
        let c = Constraint::rel(store::Expr::Var(self.go), RelOp::Ge, store::Expr::Const(i));
        self.store.entails(&c) == Ok(Entailment::True)
    }
}

/// Improvisation model: each improvised `out_note` leaving state `pos = k`
/// is σ_{k+1} or a symbol of from(suffix(k)) in `fo`, and the i-th symbol
/// enters the oracle only in a unit whose input entails `go >= i`.
pub fn check_improv_consistency(trace: &Trace, fo: &FactorOracle) -> Result<CheckReport, CheckError> {
    const P: &str = "improv_consistency";
    check_units_contiguous(trace)?;
    let mut learned = 0i64;
    for r in &trace.records {
        for key in r.outputs.keys() {
            if key != "out_note" && key != "pos" {
                return Err(mismatch(r.unit, format!("unexpected output `{key}`")));
            }
        }
        let adds = r.natives.iter().filter(|n| n.name == crate::dsl::ORACLE_ADD).count() as i64;
        if adds > 0 {
            let view = PlayerView::new(r)?;
            for i in learned + 1..=learned + adds {
                if !view.go_at_least(i) {
                    return Ok(CheckReport::fail(
                        P,
                        r.unit,
                        format!("symbol {i} was learned before go >= {i} held"),
                    ));
                }
            }
            learned += adds;
        }
        let Some(out) = r.outputs.get("out_note") else {
            continue;
        };
        let out = int_output(r, "out_note", out)?;
        let k = match r.outputs.get("pos") {
            Some(v) => int_output(r, "pos", v)?,
            None => return Err(mismatch(r.unit, "`out_note` without `pos`")),
        };
        let spine = usize::try_from(k).ok().and_then(|k| fo.sequence().get(k)).copied();
        if spine == Some(out) {
            continue;
        }
        let follows = match fo.suffix(k) {
            Ok(s) if s >= 0 => fo.from_set(s).is_ok_and(|f| f.contains(&out)),
            Ok(_) => false,
            Err(_) => return Err(mismatch(r.unit, format!("state {k} is not in the oracle"))),
        };
        if !follows {
            return Ok(CheckReport::fail(
                P,
                r.unit,
                format!("out_note = {out} at state {k} is neither sigma_{} nor in from(suffix({k}))", k + 1),
            ));
        }
    }
    Ok(CheckReport::pass(P))
}

/// Improvisation model: no `out_note` before a unit whose input entails
/// `go >= n`.
pub fn check_wait_gate(trace: &Trace, n: i64) -> Result<CheckReport, CheckError> {
    const P: &str = "wait_gate";
    check_units_contiguous(trace)?;
    let mut open = false;
    for r in &trace.records {
        if !open && !r.env.is_empty() {
            open = PlayerView::new(r)?.go_at_least(n);
        }
        if !open && r.outputs.contains_key("out_note") {
            return Ok(CheckReport::fail(
                P,
                r.unit,
                format!("out_note emitted before go >= {n}"),
            ));
        }
    }
    Ok(CheckReport::pass(P))
}
