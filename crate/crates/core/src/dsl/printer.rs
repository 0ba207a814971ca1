//! Pretty-printing back to concrete syntax. Output reparses to an equal AST.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Int(_) | Expr::Ref(_) | Expr::Neg(_) => 3,
    }
}

fn write_operand(f: &mut Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Ref(r) => write!(f, "{r}"),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                let p = prec(self);
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    _ => "*",
                };
                write_operand(f, a, prec(a) < p)?;
                write!(f, " {op} ")?;
                write_operand(f, b, prec(b) <= p)
            }
            Expr::Neg(a) => match a.as_ref() {
                Expr::Ref(r) => write!(f, "-{r}"),
                other => write!(f, "-({other})"),
            },
        }
    }
}

impl Display for VarRef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.index.is_empty() {
            write!(f, "[{}]", join(&self.index, ", "))?;
        }
        Ok(())
    }
}

fn join<T: Display>(items: &[T], sep: &str) -> String {
    let mut s = String::new();
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            s.push_str(sep);
        }
        let _ = write!(s, "{x}");
    }
    s
}

impl Display for Cond {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Cond::True => write!(f, "true"),
            Cond::False => write!(f, "false"),
            Cond::Rel(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Cond::Between(a, x, b) => write!(f, "{a} < {x} < {b}"),
            Cond::Member(e, s) => write!(f, "{e} in {s}"),
            Cond::And(a, b) => {
                write!(f, "{a} /\\ ")?;
                if matches!(b.as_ref(), Cond::And(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl Display for SumRange {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SumRange::Interval(a, b) => write!(f, "{{{a}..{b}}}"),
            SumRange::List(items) => write!(f, "{{{}}}", join(items, ", ")),
        }
    }
}

/// Wraps parallel compositions so they stay a single operand.
struct Operand<'a>(&'a Process);

impl Display for Operand<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self.0 {
            Process::Par(_) => write!(f, "({})", self.0),
            p => write!(f, "{p}"),
        }
    }
}

impl Display for Branch {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Guarded { guard, body } => write!(f, "when {guard} do {}", Operand(body)),
            Branch::Family {
                var,
                range,
                guard,
                body,
            } => write!(f, "for {var} in {range} when {guard} do {}", Operand(body)),
        }
    }
}

impl Display for Process {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Process::Skip => write!(f, "skip"),
            Process::Tell(c) => write!(f, "tell({c})"),
            Process::When(c, p) => write!(f, "when {c} do {}", Operand(p)),
            Process::Unless(c, p) => write!(f, "unless {c} next {}", Operand(p)),
            Process::Next(p) => write!(f, "next {}", Operand(p)),
            Process::Star(p) => write!(f, "star {}", Operand(p)),
            Process::Bang(p) => write!(f, "bang {}", Operand(p)),
            Process::Par(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " || ")?;
                    }
                    write!(f, "{}", Operand(p))?;
                }
                Ok(())
            }
            Process::Local(decls, p) => {
                write!(f, "local ")?;
                for (i, d) in decls.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", d.name)?;
                    if let Some((lo, hi)) = d.range {
                        write!(f, ": {lo}..{hi}")?;
                    }
                }
                write!(f, " in {}", Operand(p))
            }
            Process::Sum(branches) => match branches.as_slice() {
                [Branch::Family {
                    var,
                    range,
                    guard,
                    body,
                }] => write!(f, "sum {var} in {range} when {guard} do {}", Operand(body)),
                _ => write!(f, "sum {{ {} }}", join(branches, "; ")),
            },
            Process::Call(name, args) | Process::Native(name, args) => {
                write!(f, "{name}({})", join(args, ", "))
            }
        }
    }
}

impl Display for VarType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            VarType::Range(lo, hi) => write!(f, "{lo}..{hi}"),
            VarType::Bool => write!(f, "bool"),
            VarType::Int => write!(f, "int"),
        }
    }
}

fn arity_suffix(arity: u8) -> String {
    if arity == 0 {
        String::new()
    } else {
        format!("[{}]", ",".repeat(arity as usize - 1))
    }
}

impl Display for Decl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Const { name, value } => write!(f, "const {name} = {value};"),
            Decl::Var { name, ty } => write!(f, "var {name}: {ty};"),
            Decl::Stream {
                name,
                ty,
                arity,
                persistent,
            } => {
                if *persistent {
                    write!(f, "persistent ")?;
                }
                let suffix = if *arity == 1 { String::new() } else { arity_suffix(*arity) };
                write!(f, "stream {name}{suffix}: {ty};")
            }
            Decl::Set {
                name,
                arity,
                persistent,
            } => {
                if *persistent {
                    write!(f, "persistent ")?;
                }
                write!(f, "set {name}{};", arity_suffix(*arity))
            }
            Decl::Oracle { lo, hi } => write!(f, "oracle: {lo}..{hi};"),
            Decl::Out(names) => write!(f, "out {};", names.join(", ")),
        }
    }
}

impl Display for ModelAst {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            match item {
                Item::Decl(d, _) => writeln!(f, "{d}")?,
                Item::Def(d) => {
                    writeln!(f, "def {}({}) =\n    {}", d.name, d.params.join(", "), d.body)?
                }
                Item::System(p, _) => writeln!(f, "system =\n    {p}")?,
            }
        }
        Ok(())
    }
}
