use proptest::prelude::*;

use super::*;
use crate::store::RelOp;

fn codes(src: &str) -> Vec<ErrorCode> {
    match load(src) {
        Ok(_) => Vec::new(),
        Err(ds) => ds.into_iter().map(|d| d.code).collect(),
    }
}

#[test]
fn minimal_program() {
    let m = parse_model("var x: 0..10; system = tell(x = 1)").unwrap();
    assert_eq!(
        m.system(),
        &Process::Tell(Cond::rel(Expr::name("x"), RelOp::Eq, Expr::Int(1)))
    );
    assert!(validate(&m).is_ok());
}

#[test]
fn dangling_relation_is_reported_at_its_position() {
    let err = parse_model("system = when x = do skip").unwrap_err();
    assert_eq!((err.line, err.column), (1, 19));
    assert_eq!(err.found, "`do`");
}

#[test]
fn every_agent_form_parses() {
    let src = "skip || tell(x = 1) || when x = 1 do skip || unless x = 1 next skip || next skip \
               || star skip || bang skip || local y: 0..3 in tell(y = 2) \
               || sum { when true do skip; for i in {1..3} when i = x do skip } || P(1, x) \
               || oracle.add(x)";
    let Process::Par(parts) = parse_process(src).unwrap() else {
        panic!("expected a parallel composition");
    };
    let kinds: Vec<&str> = parts
        .iter()
        .map(|p| match p {
            Process::Skip => "skip",
            Process::Tell(_) => "tell",
            Process::When(..) => "when",
            Process::Unless(..) => "unless",
            Process::Next(_) => "next",
            Process::Star(_) => "star",
            Process::Bang(_) => "bang",
            Process::Local(..) => "local",
            Process::Sum(_) => "sum",
            Process::Call(..) => "call",
            Process::Native(..) => "native",
            Process::Par(_) => "par",
        })
        .collect();
    assert_eq!(
        kinds,
        ["skip", "tell", "when", "unless", "next", "star", "bang", "local", "sum", "call", "native"]
    );
}

#[test]
fn chained_relations() {
    assert_eq!(
        parse_cond("60 < pitch < 100").unwrap(),
        Cond::Between(Expr::Int(60), Expr::name("pitch"), Expr::Int(100))
    );
    assert_eq!(
        parse_cond("0 <= x < 5").unwrap(),
        Cond::and(
            Cond::rel(Expr::Int(0), RelOp::Le, Expr::name("x")),
            Cond::rel(Expr::name("x"), RelOp::Lt, Expr::Int(5))
        )
    );
}

#[test]
fn parenthesized_constraint_and_expression() {
    let c = parse_cond("(x + 1) * 2 = y /\\ (a = 1 /\\ b = 2)").unwrap();
    let Cond::And(left, right) = c else { panic!() };
    assert!(matches!(*left, Cond::Rel(Expr::Mul(..), RelOp::Eq, _)));
    assert!(matches!(*right, Cond::And(..)));
}

#[test]
fn negative_literals_and_negation() {
    assert_eq!(parse_cond("S = -1").unwrap(), Cond::rel(Expr::name("S"), RelOp::Eq, Expr::Int(-1)));
    let e = parse_cond("-(x) = -x").unwrap();
    let neg = Expr::Neg(Box::new(Expr::name("x")));
    assert_eq!(e, Cond::rel(neg.clone(), RelOp::Eq, neg));
    assert_eq!(
        parse_cond("x = -9223372036854775808").unwrap(),
        Cond::rel(Expr::name("x"), RelOp::Eq, Expr::Int(i64::MIN))
    );
}

#[test]
fn booleans_as_constraints_and_values() {
    assert_eq!(parse_cond("true").unwrap(), Cond::True);
    assert_eq!(
        parse_cond("End = true").unwrap(),
        Cond::rel(Expr::name("End"), RelOp::Eq, Expr::Int(1))
    );
}

#[test]
fn unguarded_recursion_rejected() {
    assert_eq!(codes("def P() = P() system = P()"), [ErrorCode::RecursionNotGuarded]);
    assert_eq!(codes("def P() = next P() system = P()"), []);
    assert_eq!(
        codes("var x: 0..1; def P() = when x = 1 do Q() def Q() = P() system = P()"),
        [ErrorCode::RecursionNotGuarded]
    );
    assert_eq!(codes("var x: 0..1; def P() = unless x = 1 next P() system = P()"), []);
}

#[test]
fn validation_codes() {
    assert_eq!(codes("def Q(a) = skip system = Q(1, 2)"), [ErrorCode::ArityMismatch]);
    assert_eq!(codes("system = R()"), [ErrorCode::UnknownDefinition]);
    assert_eq!(codes("system = tell(x = 1)"), [ErrorCode::UndeclaredVariable]);
    assert_eq!(codes("system = skip var x: 0..1;"), []);
    assert_eq!(codes("system = tell(x = 1) var x: 0..1;"), [ErrorCode::UndeclaredVariable]);
    assert_eq!(
        codes("def P() = skip def P() = skip system = P()"),
        [ErrorCode::DuplicateDefinition]
    );
    assert_eq!(codes("var x: 0..1; var x: bool; system = skip"), [ErrorCode::DuplicateDeclaration]);
    assert_eq!(
        codes("var x: 0..9; system = sum i in {5..1} when x = i do skip"),
        [ErrorCode::EmptySumRange]
    );
    assert_eq!(codes("set s; system = tell(s = 1)"), [ErrorCode::KindMismatch]);
    assert_eq!(codes("system = oracle.add(1)"), [ErrorCode::OracleNotDeclared]);
    assert_eq!(codes("out y; system = skip"), [ErrorCode::UnknownOutput]);
    assert_eq!(codes("var x: 5..1; system = skip"), [ErrorCode::InvalidDomain]);
    assert_eq!(codes("system = skip system = skip"), [ErrorCode::ParseError]);
    assert_eq!(codes("var x: 0..1;"), [ErrorCode::ParseError]);
}

#[test]
fn model_round_trip() {
    let src = "const C = 60; var pitch: 0..127; persistent stream sigma: 0..127; \
               stream d[,]: bool; set played; persistent set wait[]; oracle: 0..127; out pitch;\n\
               def Loop(k) = tell(pitch = C) || unless pitch = k next Loop(k + 1)\n\
               system = Loop(0) || when 52 in played do tell(sigma[1] = 52)";
    let m = parse_model(src).unwrap();
    assert!(validate(&m).is_ok(), "{:?}", validate(&m));
    let printed = m.to_string();
    assert_eq!(parse_model(&printed).unwrap(), m, "{printed}");
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_model("var x: 0..1;\nsystem = tell(x = )").unwrap_err();
    assert_eq!((err.line, err.column), (2, 19));
}

#[test]
fn repl_lines() {
    assert_eq!(parse_cond_list("").unwrap(), vec![]);
    let cs = parse_cond_list("note = 60, go >= 1").unwrap();
    assert_eq!(cs.len(), 2);
    assert!(parse_cond_list("garbage").is_err());
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(p in strategy::process()) {
        let text = p.to_string();
        let back = parse_process(&text);
        prop_assert_eq!(back.as_ref(), Ok(&p), "printed: {}", text);
    }
}
