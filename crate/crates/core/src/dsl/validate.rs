//! Static checks run before a model is executed.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::{Diagnostic, ErrorCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Global {
    Const(i64),
    Var,
    Stream(u8),
    Set(u8),
}

struct Checker<'a> {
    globals: HashMap<&'a str, (Global, usize)>,
    defs: HashMap<&'a str, &'a Definition>,
    oracle: bool,
    errors: Vec<Diagnostic>,
}

/// Where the walk currently is: for error messages and declaration order.
#[derive(Clone, Copy)]
struct Site<'a> {
    def: Option<&'a str>,
    pos: Pos,
    item: usize,
}

pub fn validate(ast: &ModelAst) -> Result<(), Vec<Diagnostic>> {
    let mut c = Checker {
        globals: HashMap::new(),
        defs: HashMap::new(),
        oracle: false,
        errors: Vec::new(),
    };
    c.collect(ast);
    for (item_no, item) in ast.items.iter().enumerate() {
        match item {
            Item::Def(d) => {
                let site = Site {
                    def: Some(&d.name),
                    pos: d.pos,
                    item: item_no,
                };
                let scope: Vec<&str> = d.params.iter().map(String::as_str).collect();
                c.process(&d.body, &scope, site);
            }
            Item::System(p, pos) => {
                let site = Site {
                    def: None,
                    pos: *pos,
                    item: item_no,
                };
                c.process(p, &[], site);
            }
            Item::Decl(Decl::Out(names), pos) => {
                for n in names {
                    match c.globals.get(n.as_str()) {
                        Some((Global::Const(_), _)) | None => c.push(
                            ErrorCode::UnknownOutput,
                            format!("output `{n}` is not a declared variable, stream or set"),
                            None,
                            *pos,
                        ),
                        _ => {}
                    }
                }
            }
            Item::Decl(..) => {}
        }
    }
    c.recursion(ast);
    if c.errors.is_empty() {
        Ok(())
    } else {
        Err(c.errors)
    }
}

impl<'a> Checker<'a> {
    fn push(&mut self, code: ErrorCode, message: String, def: Option<&str>, pos: Pos) {
        self.errors.push(Diagnostic {
            code,
            message,
            definition: def.map(str::to_string),
            line: pos.line,
            column: pos.col,
        });
    }

    fn collect(&mut self, ast: &'a ModelAst) {
        for (item_no, item) in ast.items.iter().enumerate() {
            match item {
                Item::Decl(d, pos) => {
                    let entry = match d {
                        Decl::Const { value, .. } => Some(Global::Const(*value)),
                        Decl::Var { ty, .. } | Decl::Stream { ty, .. } => {
                            if let VarType::Range(lo, hi) = ty {
                                if lo > hi {
                                    self.push(
                                        ErrorCode::InvalidDomain,
                                        format!("empty domain {lo}..{hi}"),
                                        None,
                                        *pos,
                                    );
                                }
                            }
                            match d {
                                Decl::Stream { arity, .. } => Some(Global::Stream(*arity)),
                                _ => Some(Global::Var),
                            }
                        }
                        Decl::Set { arity, .. } => Some(Global::Set(*arity)),
                        Decl::Oracle { lo, hi } => {
                            if self.oracle {
                                self.push(
                                    ErrorCode::DuplicateDeclaration,
                                    "the oracle is declared more than once".into(),
                                    None,
                                    *pos,
                                );
                            }
                            if lo > hi {
                                self.push(
                                    ErrorCode::InvalidDomain,
                                    format!("empty oracle alphabet {lo}..{hi}"),
                                    None,
                                    *pos,
                                );
                            }
                            self.oracle = true;
                            None
                        }
                        Decl::Out(_) => None,
                    };
                    if let (Some(g), Some(name)) = (entry, d.name()) {
                        if self.globals.insert(name, (g, item_no)).is_some() {
                            self.push(
                                ErrorCode::DuplicateDeclaration,
                                format!("`{name}` is declared more than once"),
                                None,
                                *pos,
                            );
                        }
                    }
                }
                Item::Def(d) => {
                    if self.defs.insert(&d.name, d).is_some() {
                        self.push(
                            ErrorCode::DuplicateDefinition,
                            format!("`{}` is defined more than once", d.name),
                            Some(&d.name),
                            d.pos,
                        );
                    }
                }
                Item::System(..) => {}
            }
        }
    }

    fn global(&mut self, name: &str, site: Site<'_>) -> Option<Global> {
        match self.globals.get(name) {
            Some(&(g, at)) if at < site.item => Some(g),
            Some(_) => {
                self.push(
                    ErrorCode::UndeclaredVariable,
                    format!("`{name}` is used before its declaration"),
                    site.def,
                    site.pos,
                );
                None
            }
            None => {
                self.push(
                    ErrorCode::UndeclaredVariable,
                    format!("`{name}` is not declared"),
                    site.def,
                    site.pos,
                );
                None
            }
        }
    }

    fn arity_error(&mut self, r: &VarRef, expected: usize, site: Site<'_>) {
        self.push(
            ErrorCode::ArityMismatch,
            format!(
                "`{}` takes {expected} subscript(s), got {}",
                r.name,
                r.index.len()
            ),
            site.def,
            site.pos,
        );
    }

    fn kind_error(&mut self, r: &VarRef, want: &str, site: Site<'_>) {
        self.push(
            ErrorCode::KindMismatch,
            format!("`{}` is used as {want}", r.name),
            site.def,
            site.pos,
        );
    }

    fn oracle_ref(&mut self, r: &VarRef, site: Site<'_>) -> bool {
        if !self.oracle {
            self.push(
                ErrorCode::OracleNotDeclared,
                format!("`{}` needs an `oracle` declaration", r.name),
                site.def,
                site.pos,
            );
            return false;
        }
        true
    }

    /// A reference in integer position.
    fn int_ref(&mut self, r: &VarRef, scope: &[&str], site: Site<'_>) {
        for e in &r.index {
            self.expr(e, scope, site);
        }
        match r.name.as_str() {
            ORACLE_S | ORACLE_DELTA => {
                let want = if r.name == ORACLE_S { 1 } else { 2 };
                if self.oracle_ref(r, site) && r.index.len() != want {
                    self.arity_error(r, want, site);
                }
                return;
            }
            ORACLE_FROM => {
                if self.oracle_ref(r, site) {
                    self.kind_error(r, "an integer but is a set", site);
                }
                return;
            }
            n if n.starts_with("oracle.") => {
                self.push(
                    ErrorCode::UndeclaredVariable,
                    format!("unknown oracle family `{n}`"),
                    site.def,
                    site.pos,
                );
                return;
            }
            _ => {}
        }
        if scope.contains(&r.name.as_str()) {
            if !r.index.is_empty() {
                self.arity_error(r, 0, site);
            }
            return;
        }
        match self.global(&r.name, site) {
            Some(Global::Const(_)) | Some(Global::Var) if !r.index.is_empty() => {
                self.arity_error(r, 0, site)
            }
            Some(Global::Stream(k)) if r.index.len() != k as usize => {
                self.arity_error(r, k as usize, site)
            }
            Some(Global::Set(_)) => self.kind_error(r, "an integer but is a set", site),
            _ => {}
        }
    }

    /// A reference in set position (right of `in`).
    fn set_ref(&mut self, r: &VarRef, scope: &[&str], site: Site<'_>) {
        for e in &r.index {
            self.expr(e, scope, site);
        }
        if r.name == ORACLE_FROM {
            if self.oracle_ref(r, site) && r.index.len() != 1 {
                self.arity_error(r, 1, site);
            }
            return;
        }
        if r.name.starts_with("oracle.") || scope.contains(&r.name.as_str()) {
            self.kind_error(r, "a set but is an integer", site);
            return;
        }
        match self.global(&r.name, site) {
            Some(Global::Set(k)) if r.index.len() != k as usize => {
                self.arity_error(r, k as usize, site)
            }
            Some(Global::Set(_)) | None => {}
            Some(_) => self.kind_error(r, "a set but is an integer", site),
        }
    }

    fn expr(&mut self, e: &Expr, scope: &[&str], site: Site<'_>) {
        match e {
            Expr::Int(_) => {}
            Expr::Ref(r) => self.int_ref(r, scope, site),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                self.expr(a, scope, site);
                self.expr(b, scope, site);
            }
            Expr::Neg(a) => self.expr(a, scope, site),
        }
    }

    fn cond(&mut self, c: &Cond, scope: &[&str], site: Site<'_>) {
        match c {
            Cond::True | Cond::False => {}
            Cond::Rel(a, _, b) => {
                self.expr(a, scope, site);
                self.expr(b, scope, site);
            }
            Cond::Between(a, x, b) => {
                self.expr(a, scope, site);
                self.expr(x, scope, site);
                self.expr(b, scope, site);
            }
            Cond::Member(e, s) => {
                self.expr(e, scope, site);
                self.set_ref(s, scope, site);
            }
            Cond::And(a, b) => {
                self.cond(a, scope, site);
                self.cond(b, scope, site);
            }
        }
    }

    /// Value of an expression built only from literals and constants.
    fn static_value(&self, e: &Expr, scope: &[&str]) -> Option<i64> {
        match e {
            Expr::Int(n) => Some(*n),
            Expr::Ref(r) if r.index.is_empty() && !scope.contains(&r.name.as_str()) => {
                match self.globals.get(r.name.as_str()) {
                    Some((Global::Const(v), _)) => Some(*v),
                    _ => None,
                }
            }
            Expr::Ref(_) => None,
            Expr::Add(a, b) => self.static_value(a, scope)?.checked_add(self.static_value(b, scope)?),
            Expr::Sub(a, b) => self.static_value(a, scope)?.checked_sub(self.static_value(b, scope)?),
            Expr::Mul(a, b) => self.static_value(a, scope)?.checked_mul(self.static_value(b, scope)?),
            Expr::Neg(a) => self.static_value(a, scope)?.checked_neg(),
        }
    }

    fn process(&mut self, p: &Process, scope: &[&str], site: Site<'_>) {
        match p {
            Process::Skip => {}
            Process::Tell(c) => self.cond(c, scope, site),
            Process::When(c, body) | Process::Unless(c, body) => {
                self.cond(c, scope, site);
                self.process(body, scope, site);
            }
            Process::Next(body) | Process::Star(body) | Process::Bang(body) => {
                self.process(body, scope, site)
            }
            Process::Par(parts) => parts.iter().for_each(|q| self.process(q, scope, site)),
            Process::Local(decls, body) => {
                let mut inner = scope.to_vec();
                for d in decls {
                    if let Some((lo, hi)) = d.range {
                        if lo > hi {
                            self.push(
                                ErrorCode::InvalidDomain,
                                format!("local `{}` has empty domain {lo}..{hi}", d.name),
                                site.def,
                                site.pos,
                            );
                        }
                    }
                    inner.push(&d.name);
                }
                self.process(body, &inner, site);
            }
            Process::Sum(branches) => {
                for b in branches {
                    match b {
                        Branch::Guarded { guard, body } => {
                            self.cond(guard, scope, site);
                            self.process(body, scope, site);
                        }
                        Branch::Family {
                            var,
                            range,
                            guard,
                            body,
                        } => {
                            match range {
                                SumRange::Interval(a, b) => {
                                    self.expr(a, scope, site);
                                    self.expr(b, scope, site);
                                    if let (Some(lo), Some(hi)) =
                                        (self.static_value(a, scope), self.static_value(b, scope))
                                    {
                                        if lo > hi {
                                            self.push(
                                                ErrorCode::EmptySumRange,
                                                format!("sum over `{var}` ranges over empty {{{lo}..{hi}}}"),
                                                site.def,
                                                site.pos,
                                            );
                                        }
                                    }
                                }
                                SumRange::List(items) => {
                                    items.iter().for_each(|e| self.expr(e, scope, site))
                                }
                            }
                            let mut inner = scope.to_vec();
                            inner.push(var);
                            self.cond(guard, &inner, site);
                            self.process(body, &inner, site);
                        }
                    }
                }
            }
            Process::Call(name, args) => {
                args.iter().for_each(|e| self.expr(e, scope, site));
                match self.defs.get(name.as_str()) {
                    None => self.push(
                        ErrorCode::UnknownDefinition,
                        format!("no definition named `{name}`"),
                        site.def,
                        site.pos,
                    ),
                    Some(d) if d.params.len() != args.len() => {
                        let expected = d.params.len();
                        self.push(
                            ErrorCode::ArityMismatch,
                            format!("`{name}` takes {expected} argument(s), got {}", args.len()),
                            site.def,
                            site.pos,
                        )
                    }
                    Some(_) => {}
                }
            }
            Process::Native(name, args) => {
                args.iter().for_each(|e| self.expr(e, scope, site));
                if name != ORACLE_ADD {
                    self.push(
                        ErrorCode::UnknownDefinition,
                        format!("no builtin process named `{name}`"),
                        site.def,
                        site.pos,
                    );
                } else if !self.oracle {
                    self.push(
                        ErrorCode::OracleNotDeclared,
                        "`oracle.add` needs an `oracle` declaration".into(),
                        site.def,
                        site.pos,
                    );
                } else if args.len() != 1 {
                    self.push(
                        ErrorCode::ArityMismatch,
                        format!("`oracle.add` takes 1 argument, got {}", args.len()),
                        site.def,
                        site.pos,
                    );
                }
            }
        }
    }

    /// Rejects call cycles that can unfold within a single time-unit.
    fn recursion(&mut self, ast: &'a ModelAst) {
        let defs: Vec<&Definition> = ast.definitions().collect();
        let index: HashMap<&str, usize> =
            defs.iter().enumerate().map(|(i, d)| (d.name.as_str(), i)).collect();
        let edges: Vec<BTreeSet<usize>> = defs
            .iter()
            .map(|d| {
                let mut out = BTreeSet::new();
                same_unit_calls(&d.body, &mut |callee| {
                    if let Some(&j) = index.get(callee) {
                        out.insert(j);
                    }
                });
                out
            })
            .collect();
        let reach: Vec<BTreeSet<usize>> = (0..defs.len())
            .map(|start| {
                let mut seen = BTreeSet::new();
                let mut stack: Vec<usize> = edges[start].iter().copied().collect();
                while let Some(n) = stack.pop() {
                    if seen.insert(n) {
                        stack.extend(edges[n].iter().copied());
                    }
                }
                seen
            })
            .collect();
        for (i, d) in defs.iter().enumerate() {
            if !reach[i].contains(&i) {
                continue;
            }
            let cycle: Vec<usize> = (0..defs.len())
                .filter(|&j| reach[i].contains(&j) && reach[j].contains(&i))
                .collect();
            if cycle[0] != i {
                continue;
            }
            let names: Vec<&str> = cycle.iter().map(|&j| defs[j].name.as_str()).collect();
            self.push(
                ErrorCode::RecursionNotGuarded,
                format!(
                    "recursive call cycle {} is not under `next`",
                    names.join(" -> ")
                ),
                Some(&d.name),
                d.pos,
            );
        }
    }
}

/// Calls reachable without crossing a `next` (the body of `unless … next`
/// also runs in the following unit).
fn same_unit_calls<'p>(p: &'p Process, f: &mut dyn FnMut(&'p str)) {
    match p {
        Process::Call(name, _) => f(name),
        Process::Next(_) | Process::Unless(..) => {}
        Process::When(_, b) | Process::Star(b) | Process::Bang(b) | Process::Local(_, b) => {
            same_unit_calls(b, f)
        }
        Process::Par(parts) => parts.iter().for_each(|q| same_unit_calls(q, f)),
        Process::Sum(branches) => {
            for b in branches {
                match b {
                    Branch::Guarded { body, .. } | Branch::Family { body, .. } => {
                        same_unit_calls(body, f)
                    }
                }
            }
        }
        Process::Skip | Process::Tell(_) | Process::Native(..) => {}
    }
}
