//! Recursive-descent parser. The grammar is written out in `docs/grammar.md`.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;
use crate::store::RelOp;

type PResult<T> = Result<T, ParseError>;

pub fn parse_model(src: &str) -> PResult<ModelAst> {
    let mut p = Parser::new(src)?;
    let m = p.model()?;
    Ok(m)
}

pub fn parse_process(src: &str) -> PResult<Process> {
    let mut p = Parser::new(src)?;
    let proc = p.process()?;
    p.expect_eof()?;
    Ok(proc)
}

pub fn parse_cond(src: &str) -> PResult<Cond> {
    let mut p = Parser::new(src)?;
    let c = p.cond()?;
    p.expect_eof()?;
    Ok(c)
}

/// Comma-separated constraints, as typed into the REPL. Empty input is an
/// empty list.
pub fn parse_cond_list(src: &str) -> PResult<Vec<Cond>> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    if p.peek() == &Tok::Eof {
        return Ok(out);
    }
    loop {
        out.push(p.cond()?);
        if !p.eat_sym(",") {
            break;
        }
    }
    p.expect_eof()?;
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

fn is_relop(t: &Tok) -> Option<RelOp> {
    match t {
        Tok::Sym("=") => Some(RelOp::Eq),
        Tok::Sym("<>") | Tok::Sym("!=") => Some(RelOp::Ne),
        Tok::Sym("<") => Some(RelOp::Lt),
        Tok::Sym("<=") => Some(RelOp::Le),
        Tok::Sym(">") => Some(RelOp::Gt),
        Tok::Sym(">=") => Some(RelOp::Ge),
        _ => None,
    }
}

/// Tokens that may continue an expression or relation; used to tell a
/// parenthesized constraint from a parenthesized expression.
fn continues_relation(t: &Tok) -> bool {
    is_relop(t).is_some()
        || matches!(t, Tok::Sym("+") | Tok::Sym("-") | Tok::Sym("*") | Tok::Kw("in"))
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let pos = self.pos();
        Err(ParseError {
            line: pos.line,
            column: pos.col,
            expected: expected.to_string(),
            found: self.peek().describe(),
        })
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Tok::Kw(x) if *x == k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&format!("`{k}`"))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("an identifier"),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(n) => {
                let v = if neg { -(n as i128) } else { n as i128 };
                match i64::try_from(v) {
                    Ok(v) => {
                        self.bump();
                        Ok(v)
                    }
                    Err(_) => self.error("an integer that fits in 64 bits"),
                }
            }
            _ => self.error("an integer"),
        }
    }

    fn int_range(&mut self) -> PResult<(i64, i64)> {
        let lo = self.signed_int()?;
        self.expect_sym("..")?;
        let hi = self.signed_int()?;
        Ok((lo, hi))
    }

    fn var_type(&mut self) -> PResult<VarType> {
        if self.eat_kw("bool") {
            Ok(VarType::Bool)
        } else if self.eat_kw("int") {
            Ok(VarType::Int)
        } else if matches!(self.peek(), Tok::Int(_) | Tok::Sym("-")) {
            let (lo, hi) = self.int_range()?;
            Ok(VarType::Range(lo, hi))
        } else {
            self.error("`bool`, `int` or a range `lo..hi`")
        }
    }

    /// Optional `[]` / `[,]` suffix; returns the number of subscripts.
    fn arity_suffix(&mut self) -> PResult<Option<u8>> {
        if !self.eat_sym("[") {
            return Ok(None);
        }
        let mut arity = 1;
        while self.eat_sym(",") {
            arity += 1;
        }
        self.expect_sym("]")?;
        Ok(Some(arity))
    }

    // ----- items ---------------------------------------------------------

    fn model(&mut self) -> PResult<ModelAst> {
        let mut items = Vec::new();
        let mut has_system = false;
        while self.peek() != &Tok::Eof {
            let pos = self.pos();
            let item = match self.peek().clone() {
                Tok::Kw("const") => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect_sym("=")?;
                    let value = self.signed_int()?;
                    Item::Decl(Decl::Const { name, value }, pos)
                }
                Tok::Kw("var") => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect_sym(":")?;
                    let ty = self.var_type()?;
                    Item::Decl(Decl::Var { name, ty }, pos)
                }
                Tok::Kw("persistent") | Tok::Kw("stream") | Tok::Kw("set") => {
                    let persistent = self.eat_kw("persistent");
                    if self.eat_kw("stream") {
                        let name = self.ident()?;
                        let arity = self.arity_suffix()?.unwrap_or(1);
                        self.expect_sym(":")?;
                        let ty = self.var_type()?;
                        Item::Decl(
                            Decl::Stream {
                                name,
                                ty,
                                arity,
                                persistent,
                            },
                            pos,
                        )
                    } else if self.eat_kw("set") {
                        let name = self.ident()?;
                        let arity = self.arity_suffix()?.unwrap_or(0);
                        Item::Decl(
                            Decl::Set {
                                name,
                                arity,
                                persistent,
                            },
                            pos,
                        )
                    } else {
                        return self.error("`stream` or `set`");
                    }
                }
                Tok::Kw("oracle") => {
                    self.bump();
                    self.expect_sym(":")?;
                    let (lo, hi) = self.int_range()?;
                    Item::Decl(Decl::Oracle { lo, hi }, pos)
                }
                Tok::Kw("out") => {
                    self.bump();
                    let mut names = vec![self.ident()?];
                    while self.eat_sym(",") {
                        names.push(self.ident()?);
                    }
                    Item::Decl(Decl::Out(names), pos)
                }
                Tok::Kw("def") => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect_sym("(")?;
                    let mut params = Vec::new();
                    if !self.eat_sym(")") {
                        loop {
                            params.push(self.ident()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                        self.expect_sym(")")?;
                    }
                    self.expect_sym("=")?;
                    let body = self.process()?;
                    Item::Def(Definition {
                        name,
                        params,
                        body,
                        pos,
                    })
                }
                Tok::Kw("system") => {
                    if has_system {
                        return self.error("a single `system` entry");
                    }
                    self.bump();
                    self.expect_sym("=")?;
                    has_system = true;
                    Item::System(self.process()?, pos)
                }
                _ => return self.error("a declaration, `def` or `system`"),
            };
            items.push(item);
            while self.eat_sym(";") {}
        }
        if !has_system {
            return self.error("`system`");
        }
        Ok(ModelAst { items })
    }

    // ----- processes -----------------------------------------------------

    fn process(&mut self) -> PResult<Process> {
        let first = self.unary()?;
        if !matches!(self.peek(), Tok::Sym("||")) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat_sym("||") {
            parts.push(self.unary()?);
        }
        Ok(Process::Par(parts))
    }

    fn boxed_unary(&mut self) -> PResult<Box<Process>> {
        Ok(Box::new(self.unary()?))
    }

    fn unary(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Kw("skip") => {
                self.bump();
                Ok(Process::Skip)
            }
            Tok::Kw("tell") => {
                self.bump();
                self.expect_sym("(")?;
                let c = self.cond()?;
                self.expect_sym(")")?;
                Ok(Process::Tell(c))
            }
            Tok::Kw("when") => {
                self.bump();
                let c = self.cond()?;
                self.expect_kw("do")?;
                Ok(Process::When(c, self.boxed_unary()?))
            }
            Tok::Kw("unless") => {
                self.bump();
                let c = self.cond()?;
                self.expect_kw("next")?;
                Ok(Process::Unless(c, self.boxed_unary()?))
            }
            Tok::Kw("next") => {
                self.bump();
                Ok(Process::Next(self.boxed_unary()?))
            }
            Tok::Kw("star") => {
                self.bump();
                Ok(Process::Star(self.boxed_unary()?))
            }
            Tok::Kw("bang") => {
                self.bump();
                Ok(Process::Bang(self.boxed_unary()?))
            }
            Tok::Kw("local") => {
                self.bump();
                let mut decls = Vec::new();
                loop {
                    let name = self.ident()?;
                    let range = if self.eat_sym(":") {
                        Some(self.int_range()?)
                    } else {
                        None
                    };
                    decls.push(LocalDecl { name, range });
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_kw("in")?;
                Ok(Process::Local(decls, self.boxed_unary()?))
            }
            Tok::Kw("sum") => {
                self.bump();
                self.sum()
            }
            Tok::Kw("par") => {
                self.bump();
                self.expect_sym("{")?;
                let p = self.process()?;
                self.expect_sym("}")?;
                Ok(p)
            }
            Tok::Sym("(") => {
                self.bump();
                let p = self.process()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::Kw("oracle") => {
                self.bump();
                self.expect_sym(".")?;
                let op = self.ident()?;
                let args = self.args()?;
                Ok(Process::Native(format!("oracle.{op}"), args))
            }
            Tok::Ident(name) => {
                self.bump();
                let args = self.args()?;
                Ok(Process::Call(name, args))
            }
            _ => self.error("a process"),
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn sum(&mut self) -> PResult<Process> {
        if !self.eat_sym("{") {
            let (var, range) = self.sum_binder()?;
            self.expect_kw("when")?;
            let guard = self.cond()?;
            self.expect_kw("do")?;
            let body = self.unary()?;
            return Ok(Process::Sum(vec![Branch::Family {
                var,
                range,
                guard,
                body,
            }]));
        }
        let mut branches = Vec::new();
        loop {
            if self.eat_kw("for") {
                let (var, range) = self.sum_binder()?;
                self.expect_kw("when")?;
                let guard = self.cond()?;
                self.expect_kw("do")?;
                let body = self.unary()?;
                branches.push(Branch::Family {
                    var,
                    range,
                    guard,
                    body,
                });
            } else if self.eat_kw("when") {
                let guard = self.cond()?;
                self.expect_kw("do")?;
                let body = self.unary()?;
                branches.push(Branch::Guarded { guard, body });
            } else {
                return self.error("`when` or `for`");
            }
            let sep = self.eat_sym(";");
            if self.eat_sym("}") {
                break;
            }
            if !sep {
                return self.error("`;` or `}`");
            }
        }
        Ok(Process::Sum(branches))
    }

    fn sum_binder(&mut self) -> PResult<(String, SumRange)> {
        let var = self.ident()?;
        self.expect_kw("in")?;
        self.expect_sym("{")?;
        let first = self.expr()?;
        let range = if self.eat_sym("..") {
            SumRange::Interval(first, self.expr()?)
        } else {
            let mut items = vec![first];
            while self.eat_sym(",") {
                items.push(self.expr()?);
            }
            SumRange::List(items)
        };
        self.expect_sym("}")?;
        Ok((var, range))
    }

    // ----- constraints ---------------------------------------------------

    fn cond(&mut self) -> PResult<Cond> {
        let mut c = self.cond_atom()?;
        while self.eat_sym("/\\") || self.eat_sym("&&") {
            let rhs = self.cond_atom()?;
            c = Cond::and(c, rhs);
        }
        Ok(c)
    }

    fn cond_atom(&mut self) -> PResult<Cond> {
        if matches!(self.peek(), Tok::Sym("(")) {
            let save = self.at;
            self.bump();
            if let Ok(c) = self.cond() {
                if self.eat_sym(")") && !continues_relation(self.peek()) {
                    return Ok(c);
                }
            }
            self.at = save;
        }
        if let Tok::Kw(k @ ("true" | "false")) = self.peek().clone() {
            if !continues_relation(self.peek_at(1)) {
                self.bump();
                return Ok(if k == "true" { Cond::True } else { Cond::False });
            }
        }
        let a = self.expr()?;
        if self.eat_kw("in") {
            let set = self.var_ref()?;
            return Ok(Cond::Member(a, set));
        }
        let Some(op) = is_relop(self.peek()) else {
            return self.error("a relation (`=`, `<>`, `<`, `<=`, `>`, `>=`) or `in`");
        };
        self.bump();
        let b = self.expr()?;
        if let Some(op2) = is_relop(self.peek()) {
            self.bump();
            let c = self.expr()?;
            if op == RelOp::Lt && op2 == RelOp::Lt {
                return Ok(Cond::Between(a, b, c));
            }
            return Ok(Cond::and(Cond::Rel(a, op, b.clone()), Cond::Rel(b, op2, c)));
        }
        Ok(Cond::Rel(a, op, b))
    }

    // ----- expressions ---------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat_sym("+") {
                e = Expr::add(e, self.term()?);
            } else if self.eat_sym("-") {
                e = Expr::sub(e, self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut e = self.factor()?;
        while self.eat_sym("*") {
            e = Expr::mul(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Tok::Sym("-")) {
            if let Tok::Int(_) = self.peek_at(1) {
                return Ok(Expr::Int(self.signed_int()?));
            }
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Int(self.signed_int()?)),
            Tok::Kw("true") => {
                self.bump();
                Ok(Expr::Int(1))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(Expr::Int(0))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Kw("oracle") | Tok::Ident(_) => Ok(Expr::Ref(self.var_ref()?)),
            _ => self.error("an expression"),
        }
    }

    fn var_ref(&mut self) -> PResult<VarRef> {
        let name = if self.eat_kw("oracle") {
            self.expect_sym(".")?;
            format!("oracle.{}", self.ident()?)
        } else {
            self.ident()?
        };
        let mut index = Vec::new();
        if self.eat_sym("[") {
            loop {
                index.push(self.expr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("]")?;
        }
        Ok(VarRef { name, index })
    }
}
