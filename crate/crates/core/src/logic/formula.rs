use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Head of an application: a declared symbol or a bound second-order variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    Symbol(String),
    Var(String),
}

impl Head {
    pub fn name(&self) -> &str {
        match self {
            Head::Symbol(s) | Head::Var(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Bound first-order variable.
    Var(String),
    /// Declared (or skolem) constant.
    Const(String),
    App(Head, Vec<Term>),
}

impl Term {
    /// Nesting depth: constants and variables are 0, `f(c)` is 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(h, args) => matches!(h, Head::Symbol(_)) && args.iter().all(Term::is_ground),
        }
    }

    fn subst(&self, map: &BTreeMap<String, Replacement>) -> Term {
        match self {
            Term::Var(v) => match map.get(v) {
                Some(Replacement::Term(t)) => t.clone(),
                _ => self.clone(),
            },
            Term::Const(_) => self.clone(),
            Term::App(h, args) => Term::App(
                subst_head(h, map),
                args.iter().map(|a| a.subst(map)).collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub head: Head,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn is_ground(&self) -> bool {
        matches!(self.head, Head::Symbol(_)) && self.args.iter().all(Term::is_ground)
    }
}

/// Whether a bound variable ranges over a sort or a second-order kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinderType {
    Sort(String),
    Kind(String),
}

impl BinderType {
    pub fn name(&self) -> &str {
        match self {
            BinderType::Sort(s) | BinderType::Kind(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binder {
    pub name: String,
    pub ty: BinderType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Atom),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<Binder>, Box<Formula>),
}

/// What a bound variable is replaced by during instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Replacement {
    /// A ground term, for first-order variables.
    Term(Term),
    /// A declared symbol, for second-order variables.
    Symbol(String),
}

fn subst_head(h: &Head, map: &BTreeMap<String, Replacement>) -> Head {
    match h {
        Head::Var(v) => match map.get(v) {
            Some(Replacement::Symbol(s)) => Head::Symbol(s.clone()),
            _ => h.clone(),
        },
        Head::Symbol(_) => h.clone(),
    }
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(binders: Vec<Binder>, body: Formula) -> Formula {
        Formula::Forall(binders, Box::new(body))
    }

    /// Replaces free occurrences of the mapped variables. Replacements must be
    /// ground, so no capture can happen.
    pub fn subst(&self, map: &BTreeMap<String, Replacement>) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom {
                head: subst_head(&a.head, map),
                args: a.args.iter().map(|t| t.subst(map)).collect(),
            }),
            Formula::And(a, b) => Formula::and(a.subst(map), b.subst(map)),
            Formula::Implies(a, b) => Formula::implies(a.subst(map), b.subst(map)),
            Formula::Forall(bs, body) => {
                let shadowed = bs.iter().any(|b| map.contains_key(&b.name));
                if shadowed {
                    let mut inner = map.clone();
                    for b in bs {
                        inner.remove(&b.name);
                    }
                    Formula::forall(bs.clone(), body.subst(&inner))
                } else {
                    Formula::forall(bs.clone(), body.subst(map))
                }
            }
        }
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha_formula(self, other, &mut Vec::new())
    }

    /// Splits a conjunction tree into its conjuncts, left to right.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => out.push(f),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::And(a, b) | Formula::Implies(a, b) => a.has_quantifier() || b.has_quantifier(),
            Formula::Forall(..) => true,
        }
    }
}

fn alpha_term(a: &Term, b: &Term, env: &[(&str, &str)]) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => alpha_var(x, y, env),
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::App(h1, a1), Term::App(h2, a2)) => {
            alpha_head(h1, h2, env)
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| alpha_term(x, y, env))
        }
        _ => false,
    }
}

fn alpha_var(x: &str, y: &str, env: &[(&str, &str)]) -> bool {
    for (l, r) in env.iter().rev() {
        if *l == x || *r == y {
            return *l == x && *r == y;
        }
    }
    x == y
}

fn alpha_head(a: &Head, b: &Head, env: &[(&str, &str)]) -> bool {
    match (a, b) {
        (Head::Symbol(x), Head::Symbol(y)) => x == y,
        (Head::Var(x), Head::Var(y)) => alpha_var(x, y, env),
        _ => false,
    }
}

fn alpha_formula<'a>(a: &'a Formula, b: &'a Formula, env: &mut Vec<(&'a str, &'a str)>) -> bool {
    match (a, b) {
        (Formula::Atom(x), Formula::Atom(y)) => {
            alpha_head(&x.head, &y.head, env)
                && x.args.len() == y.args.len()
                && x.args.iter().zip(&y.args).all(|(s, t)| alpha_term(s, t, env))
        }
        (Formula::And(a1, b1), Formula::And(a2, b2))
        | (Formula::Implies(a1, b1), Formula::Implies(a2, b2)) => {
            alpha_formula(a1, a2, env) && alpha_formula(b1, b2, env)
        }
        (Formula::Forall(bs1, f1), Formula::Forall(bs2, f2)) => {
            if bs1.len() != bs2.len() || bs1.iter().zip(bs2).any(|(x, y)| x.ty != y.ty) {
                return false;
            }
            let mark = env.len();
            env.extend(bs1.iter().zip(bs2).map(|(x, y)| (x.name.as_str(), y.name.as_str())));
            let ok = alpha_formula(f1, f2, env);
            env.truncate(mark);
            ok
        }
        _ => false,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::App(h, args) => {
                write!(f, "{}(", h.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return f.write_str(self.head.name());
        }
        write!(f, "{}", Term::App(self.head.clone(), self.args.clone()))
    }
}

impl fmt::Display for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.ty.name())
    }
}

struct Paren<'a>(&'a Formula, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compound = |g: &Formula| matches!(g, Formula::Implies(..) | Formula::Forall(..));
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(a, b) => write!(
                f,
                "{} & {}",
                Paren(a, compound(a)),
                Paren(b, compound(b) || matches!(**b, Formula::And(..)))
            ),
            Formula::Implies(a, b) => {
                write!(f, "{} -> {}", Paren(a, compound(a)), Paren(b, matches!(**b, Formula::Forall(..))))
            }
            Formula::Forall(bs, body) => {
                f.write_str("FORALL ")?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{b}")?;
                }
                write!(f, ": {body}")
            }
        }
    }
}
