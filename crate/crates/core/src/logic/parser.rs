//! Text syntax for formulas:
//!
//! ```text
//! formula := FORALL binder {, binder} : formula | conj [-> formula]
//! conj    := unary {& unary}
//! unary   := ( formula ) | FORALL ... | atom
//! atom    := Ident [( term {, term} )] [= TRUE]
//! term    := Ident [( term {, term} )]
//! binder  := Ident : Ident
//! ```
//!
//! `=>` and `AND` are accepted as spellings of `->` and `&`. A trailing
//! `= TRUE` on an atom is dropped: predicates are boolean-valued already.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::formula::{Atom, Binder, BinderType, Formula, Head, Term};
use super::signature::{Kind, Signature};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at offset {pos}")]
    Lexical { pos: usize, ch: char },
    #[error("syntax error at offset {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("unknown symbol `{name}` at offset {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("arity error at offset {pos}: `{name}` takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        pos: usize,
        expected: usize,
        found: usize,
    },
    #[error("sort error at offset {pos}: `{name}` has {found}, expected {expected}")]
    Sort {
        name: String,
        pos: usize,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Forall,
    True,
    LParen,
    RParen,
    Comma,
    Colon,
    Amp,
    Arrow,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("identifier `{s}`"),
            Tok::Forall => "`FORALL`".into(),
            Tok::True => "`TRUE`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b':' => Tok::Colon,
            b'&' => Tok::Amp,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'=' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'=' => Tok::Eq,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                match &text[start..=i] {
                    "FORALL" | "forall" => Tok::Forall,
                    "AND" => Tok::Amp,
                    "TRUE" | "true" => Tok::True,
                    s => Tok::Ident(s.into()),
                }
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Lexical { pos: i, ch });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

// Untyped syntax tree; names are resolved against the signature afterwards
// so that arity problems are reported before problems inside the arguments.
#[derive(Debug)]
struct RawTerm {
    name: String,
    pos: usize,
    args: Option<Vec<RawTerm>>,
}

#[derive(Debug)]
enum Raw {
    Atom(RawTerm),
    And(Box<Raw>, Box<Raw>),
    Implies(Box<Raw>, Box<Raw>),
    Forall(Vec<(String, usize, String, usize)>, Box<Raw>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            expected: expected.into(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<usize, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.fail(expected)
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.bump().1;
                Ok((s, p))
            }
            _ => self.fail("identifier"),
        }
    }

    fn formula(&mut self) -> Result<Raw, ParseError> {
        if *self.peek() == Tok::Forall {
            return self.forall();
        }
        let lhs = self.conj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Raw::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn forall(&mut self) -> Result<Raw, ParseError> {
        self.expect(Tok::Forall, "`FORALL`")?;
        let mut binders = Vec::new();
        loop {
            let (name, npos) = self.ident()?;
            self.expect(Tok::Colon, "`:` after bound variable")?;
            let (ty, tpos) = self.ident()?;
            binders.push((name, npos, ty, tpos));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Colon => {
                    self.bump();
                    break;
                }
                _ => return self.fail("`,` or `:` in quantifier"),
            }
        }
        let body = self.formula()?;
        Ok(Raw::Forall(binders, Box::new(body)))
    }

    fn conj(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Raw, ParseError> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Forall => self.forall(),
            Tok::Ident(_) => {
                let t = self.term()?;
                if *self.peek() == Tok::Eq {
                    self.bump();
                    self.expect(Tok::True, "`TRUE` after `=`")?;
                }
                Ok(Raw::Atom(t))
            }
            _ => self.fail("formula"),
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let (name, pos) = self.ident()?;
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            let mut args = alloc::vec![self.term()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
            Some(args)
        } else {
            None
        };
        Ok(RawTerm { name, pos, args })
    }

    fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail("end of input")
        }
    }
}

struct Resolver<'a> {
    sig: &'a Signature,
    scope: Vec<(String, BinderType)>,
}

fn arity(name: &str, pos: usize, expected: usize, found: usize) -> ParseError {
    ParseError::Arity {
        name: name.into(),
        pos,
        expected,
        found,
    }
}

fn sort_err(name: &str, pos: usize, expected: &str, found: &str) -> ParseError {
    ParseError::Sort {
        name: name.into(),
        pos,
        expected: expected.into(),
        found: found.into(),
    }
}

impl Resolver<'_> {
    fn lookup(&self, name: &str) -> Option<&BinderType> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn kind_of_var(&self, name: &str) -> Option<&Kind> {
        match self.lookup(name)? {
            BinderType::Kind(k) => self.sig.kind(k),
            BinderType::Sort(_) => None,
        }
    }

    fn formula(&mut self, raw: &Raw) -> Result<Formula, ParseError> {
        Ok(match raw {
            Raw::Atom(t) => Formula::Atom(self.atom(t)?),
            Raw::And(a, b) => Formula::and(self.formula(a)?, self.formula(b)?),
            Raw::Implies(a, b) => Formula::implies(self.formula(a)?, self.formula(b)?),
            Raw::Forall(bs, body) => {
                let mark = self.scope.len();
                let mut binders = Vec::new();
                for (name, npos, ty, tpos) in bs {
                    if self.sig.is_declared(name) {
                        return Err(sort_err(name, *npos, "a fresh variable name", "a declared symbol"));
                    }
                    let ty = if self.sig.has_sort(ty) {
                        BinderType::Sort(ty.clone())
                    } else if self.sig.kind(ty).is_some() {
                        BinderType::Kind(ty.clone())
                    } else {
                        return Err(ParseError::UnknownSymbol {
                            name: ty.clone(),
                            pos: *tpos,
                        });
                    };
                    self.scope.push((name.clone(), ty.clone()));
                    binders.push(Binder {
                        name: name.clone(),
                        ty,
                    });
                }
                let body = self.formula(body)?;
                self.scope.truncate(mark);
                Formula::forall(binders, body)
            }
        })
    }

    fn atom(&mut self, t: &RawTerm) -> Result<Atom, ParseError> {
        let found = t.args.as_ref().map_or(0, Vec::len);
        let (head, sorts) = if self.lookup(&t.name).is_some() {
            match self.kind_of_var(&t.name) {
                Some(Kind::Pred(a)) => (Head::Var(t.name.clone()), a.clone()),
                _ => {
                    let found = self.lookup(&t.name).unwrap().name().to_string();
                    return Err(sort_err(&t.name, t.pos, "a predicate", &found));
                }
            }
        } else if let Some(a) = self.sig.predicate(&t.name) {
            (Head::Symbol(t.name.clone()), a.to_vec())
        } else if self.sig.is_declared(&t.name) {
            return Err(sort_err(&t.name, t.pos, "a predicate", "a non-predicate symbol"));
        } else {
            return Err(ParseError::UnknownSymbol {
                name: t.name.clone(),
                pos: t.pos,
            });
        };
        if sorts.len() != found {
            return Err(arity(&t.name, t.pos, sorts.len(), found));
        }
        let args = self.args(t, &sorts)?;
        Ok(Atom { head, args })
    }

    fn args(&mut self, t: &RawTerm, sorts: &[String]) -> Result<Vec<Term>, ParseError> {
        let mut out = Vec::new();
        for (a, want) in t.args.iter().flatten().zip(sorts) {
            let (term, got) = self.term(a)?;
            if &got != want {
                return Err(sort_err(&a.name, a.pos, want, &got));
            }
            out.push(term);
        }
        Ok(out)
    }

    fn term(&mut self, t: &RawTerm) -> Result<(Term, String), ParseError> {
        let found = t.args.as_ref().map_or(0, Vec::len);
        if let Some(ty) = self.lookup(&t.name).cloned() {
            return match (ty, &t.args) {
                (BinderType::Sort(s), None) => Ok((Term::Var(t.name.clone()), s)),
                (BinderType::Sort(_), Some(_)) => Err(arity(&t.name, t.pos, 0, found)),
                (BinderType::Kind(k), _) => match self.sig.kind(&k) {
                    Some(Kind::Func(args, res)) => {
                        let (args, res) = (args.clone(), res.clone());
                        if args.len() != found {
                            return Err(arity(&t.name, t.pos, args.len(), found));
                        }
                        let a = self.args(t, &args)?;
                        Ok((Term::App(Head::Var(t.name.clone()), a), res))
                    }
                    _ => Err(sort_err(&t.name, t.pos, "a term", "a predicate variable")),
                },
            };
        }
        if let Some(sort) = self.sig.constant(&t.name) {
            if t.args.is_some() {
                return Err(arity(&t.name, t.pos, 0, found));
            }
            return Ok((Term::Const(t.name.clone()), sort.into()));
        }
        if let Some((args, res)) = self.sig.function(&t.name) {
            let (args, res) = (args.to_vec(), res.to_string());
            if args.len() != found {
                return Err(arity(&t.name, t.pos, args.len(), found));
            }
            let a = self.args(t, &args)?;
            return Ok((Term::App(Head::Symbol(t.name.clone()), a), res));
        }
        if self.sig.predicate(&t.name).is_some() {
            return Err(sort_err(&t.name, t.pos, "a term", "a predicate"));
        }
        Err(ParseError::UnknownSymbol {
            name: t.name.clone(),
            pos: t.pos,
        })
    }
}

/// Parses and sort-checks a closed formula.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let raw = p.formula()?;
    p.finish()?;
    Resolver {
        sig,
        scope: Vec::new(),
    }
    .formula(&raw)
}

/// Parses a ground term and returns it with its sort.
pub fn parse_term(text: &str, sig: &Signature) -> Result<(Term, String), ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let raw = p.term()?;
    p.finish()?;
    Resolver {
        sig,
        scope: Vec::new(),
    }
    .term(&raw)
}
