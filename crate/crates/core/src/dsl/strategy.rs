//! Proptest generators for syntax trees. Terms are syntactically well formed
//! but not necessarily valid models.

use proptest::prelude::*;

use super::ast::*;
use crate::store::RelOp;

const VARS: &[&str] = &["x", "y", "pitch", "go", "note", "w_1"];
const SETS: &[&str] = &["played", "wait"];
const DEFS: &[&str] = &["P", "Q", "Improv"];

fn int() -> impl Strategy<Value = i64> {
    prop_oneof![
        4 => -200i64..200,
        1 => any::<i64>(),
    ]
}

fn var_name() -> impl Strategy<Value = String> {
    proptest::sample::select(VARS).prop_map(str::to_string)
}

pub fn relop() -> impl Strategy<Value = RelOp> {
    proptest::sample::select(vec![
        RelOp::Eq,
        RelOp::Ne,
        RelOp::Lt,
        RelOp::Le,
        RelOp::Gt,
        RelOp::Ge,
    ])
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        int().prop_map(Expr::Int),
        var_name().prop_map(|n| Expr::name(&n)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (var_name(), inner.clone()).prop_map(|(n, i)| Expr::Ref(VarRef::indexed(n, vec![i]))),
            inner.clone().prop_map(|i| Expr::Ref(VarRef::indexed(ORACLE_S, vec![i]))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Ref(VarRef::indexed(ORACLE_DELTA, vec![a, b]))),
        ]
    })
}

fn set_ref() -> impl Strategy<Value = VarRef> {
    prop_oneof![
        proptest::sample::select(SETS).prop_map(VarRef::scalar),
        (proptest::sample::select(SETS), expr()).prop_map(|(n, e)| VarRef::indexed(n, vec![e])),
        expr().prop_map(|e| VarRef::indexed(ORACLE_FROM, vec![e])),
    ]
}

pub fn cond() -> impl Strategy<Value = Cond> {
    let atom = prop_oneof![
        1 => Just(Cond::True),
        1 => Just(Cond::False),
        6 => (expr(), relop(), expr()).prop_map(|(a, op, b)| Cond::Rel(a, op, b)),
        2 => (expr(), expr(), expr()).prop_map(|(a, x, b)| Cond::Between(a, x, b)),
        2 => (expr(), set_ref()).prop_map(|(e, s)| Cond::Member(e, s)),
    ];
    atom.prop_recursive(3, 8, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| Cond::and(a, b))
    })
}

fn sum_range() -> impl Strategy<Value = SumRange> {
    prop_oneof![
        (expr(), expr()).prop_map(|(a, b)| SumRange::Interval(a, b)),
        proptest::collection::vec(expr(), 1..4).prop_map(SumRange::List),
    ]
}

fn branch(body: BoxedStrategy<Process>) -> impl Strategy<Value = Branch> {
    prop_oneof![
        (cond(), body.clone()).prop_map(|(guard, body)| Branch::Guarded { guard, body }),
        (var_name(), sum_range(), cond(), body).prop_map(|(var, range, guard, body)| {
            Branch::Family {
                var,
                range,
                guard,
                body,
            }
        }),
    ]
}

fn local_decl() -> impl Strategy<Value = LocalDecl> {
    (var_name(), proptest::option::of((-50i64..50, 0i64..50))).prop_map(|(name, r)| LocalDecl {
        name,
        range: r.map(|(lo, w)| (lo, lo + w)),
    })
}

/// Process terms covering every agent form.
pub fn process() -> impl Strategy<Value = Process> {
    let leaf = prop_oneof![
        Just(Process::Skip),
        cond().prop_map(Process::Tell),
        (proptest::sample::select(DEFS), proptest::collection::vec(expr(), 0..3))
            .prop_map(|(n, args)| Process::Call(n.to_string(), args)),
        expr().prop_map(|e| Process::Native(ORACLE_ADD.to_string(), vec![e])),
    ];
    leaf.prop_recursive(4, 32, 4, |inner| {
        let boxed = inner.clone().boxed();
        prop_oneof![
            (cond(), inner.clone()).prop_map(|(c, p)| Process::When(c, Box::new(p))),
            (cond(), inner.clone()).prop_map(|(c, p)| Process::Unless(c, Box::new(p))),
            inner.clone().prop_map(|p| Process::Next(Box::new(p))),
            inner.clone().prop_map(|p| Process::Star(Box::new(p))),
            inner.clone().prop_map(|p| Process::Bang(Box::new(p))),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Process::Par),
            (proptest::collection::vec(local_decl(), 1..3), inner)
                .prop_map(|(d, p)| Process::Local(d, Box::new(p))),
            proptest::collection::vec(branch(boxed), 1..4).prop_map(Process::Sum),
        ]
    })
}
