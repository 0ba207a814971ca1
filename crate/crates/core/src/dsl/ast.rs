//! Abstract syntax of model files.

use crate::store::RelOp;

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

pub const ORACLE_S: &str = "oracle.S";
pub const ORACLE_DELTA: &str = "oracle.delta";
pub const ORACLE_FROM: &str = "oracle.from";
pub const ORACLE_ADD: &str = "oracle.add";

/// A variable, constant or parameter reference, possibly subscripted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: String,
    pub index: Vec<Expr>,
}

impl VarRef {
    pub fn scalar(name: impl Into<String>) -> Self {
        VarRef {
            name: name.into(),
            index: Vec::new(),
        }
    }

    pub fn indexed(name: impl Into<String>, index: Vec<Expr>) -> Self {
        VarRef {
            name: name.into(),
            index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Ref(VarRef),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn name(n: &str) -> Self {
        Expr::Ref(VarRef::scalar(n))
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

    /// Visits every reference, including those nested inside subscripts.
    pub fn for_each_ref<'a>(&'a self, f: &mut dyn FnMut(&'a VarRef)) {
        match self {
            Expr::Int(_) => {}
            Expr::Ref(r) => {
                f(r);
                r.index.iter().for_each(|e| e.for_each_ref(f));
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.for_each_ref(f);
                b.for_each_ref(f);
            }
            Expr::Neg(a) => a.for_each_ref(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cond {
    True,
    False,
    Rel(Expr, RelOp, Expr),
    /// `lo < x < hi`
    Between(Expr, Expr, Expr),
    Member(Expr, VarRef),
    And(Box<Cond>, Box<Cond>),
}

impl Cond {
    pub fn rel(a: Expr, op: RelOp, b: Expr) -> Self {
        Cond::Rel(a, op, b)
    }

    pub fn and(a: Cond, b: Cond) -> Self {
        Cond::And(Box::new(a), Box::new(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SumRange {
    Interval(Expr, Expr),
    List(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    /// `when c do P`
    Guarded { guard: Cond, body: Process },
    /// `for v in R when c do P`, one branch per value of `v`.
    Family {
        var: String,
        range: SumRange,
        guard: Cond,
        body: Process,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecl {
    pub name: String,
    pub range: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Process {
    Skip,
    Tell(Cond),
    When(Cond, Box<Process>),
    /// `unless c next P`: P runs next unit unless c is entailed now.
    Unless(Cond, Box<Process>),
    Next(Box<Process>),
    Star(Box<Process>),
    Bang(Box<Process>),
    Par(Vec<Process>),
    Local(Vec<LocalDecl>, Box<Process>),
    Sum(Vec<Branch>),
    Call(String, Vec<Expr>),
    Native(String, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarType {
    Range(i64, i64),
    Bool,
    Int,
}

impl VarType {
    pub fn bounds(self) -> (i64, i64) {
        match self {
            VarType::Range(lo, hi) => (lo, hi),
            VarType::Bool => (0, 1),
            VarType::Int => (i64::MIN, i64::MAX),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Const { name: String, value: i64 },
    Var { name: String, ty: VarType },
    Stream {
        name: String,
        ty: VarType,
        arity: u8,
        persistent: bool,
    },
    Set {
        name: String,
        arity: u8,
        persistent: bool,
    },
    Oracle { lo: i64, hi: i64 },
    Out(Vec<String>),
}

impl Decl {
    /// The name this declaration introduces, if any.
    pub fn name(&self) -> Option<&str> {
        match self {
            Decl::Const { name, .. }
            | Decl::Var { name, .. }
            | Decl::Stream { name, .. }
            | Decl::Set { name, .. } => Some(name),
            Decl::Oracle { .. } | Decl::Out(_) => None,
        }
    }
}

#[derive(Debug, Clone, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Process,
    pub pos: Pos,
}

impl PartialEq for Definition {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.body == other.body
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Decl(Decl, Pos),
    Def(Definition),
    System(Process, Pos),
}

/// A parsed model: declarations, definitions and the `system` entry point, in
/// source order.
#[derive(Debug, Clone, Eq)]
pub struct ModelAst {
    pub items: Vec<Item>,
}

impl PartialEq for ModelAst {
    fn eq(&self, other: &Self) -> bool {
        fn strip(i: &Item) -> Item {
            match i {
                Item::Decl(d, _) => Item::Decl(d.clone(), Pos::default()),
                Item::Def(d) => Item::Def(d.clone()),
                Item::System(p, _) => Item::System(p.clone(), Pos::default()),
            }
        }
        self.items.len() == other.items.len()
            && self.items.iter().zip(&other.items).all(|(a, b)| strip(a) == strip(b))
    }
}

impl ModelAst {
    pub fn decls(&self) -> impl Iterator<Item = &Decl> {
        self.items.iter().filter_map(|i| match i {
            Item::Decl(d, _) => Some(d),
            _ => None,
        })
    }

    pub fn definitions(&self) -> impl Iterator<Item = &Definition> {
        self.items.iter().filter_map(|i| match i {
            Item::Def(d) => Some(d),
            _ => None,
        })
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions().find(|d| d.name == name)
    }

    pub fn system(&self) -> &Process {
        self.items
            .iter()
            .find_map(|i| match i {
                Item::System(p, _) => Some(p),
                _ => None,
            })
            .expect("parser guarantees a system entry")
    }

    pub fn outputs(&self) -> Vec<&str> {
        self.decls()
            .filter_map(|d| match d {
                Decl::Out(names) => Some(names.iter().map(String::as_str)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn oracle_alphabet(&self) -> Option<(i64, i64)> {
        self.decls().find_map(|d| match d {
            Decl::Oracle { lo, hi } => Some((*lo, *hi)),
            _ => None,
        })
    }

    pub fn constant(&self, name: &str) -> Option<i64> {
        self.decls().find_map(|d| match d {
            Decl::Const { name: n, value } if n == name => Some(*value),
            _ => None,
        })
    }
}
