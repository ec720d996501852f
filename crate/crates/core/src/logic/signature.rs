use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("symbol `{0}` is declared twice")]
    Duplicate(String),
    #[error("`{symbol}` refers to undeclared sort `{sort}`")]
    UnknownSort { symbol: String, sort: String },
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
    #[error("kind `{0}` must take at least one argument")]
    EmptyKind(String),
}

/// The type of a second-order variable: a predicate or function shape.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Pred(Vec<String>),
    Func(Vec<String>, String),
}

/// Sorted vocabulary the formulas are checked against.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: BTreeSet<String>,
    constants: BTreeMap<String, String>,
    functions: BTreeMap<String, (Vec<String>, String)>,
    predicates: BTreeMap<String, Vec<String>>,
    kinds: BTreeMap<String, Kind>,
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(s, "FORALL" | "forall" | "AND" | "TRUE" | "true")
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sorts `IMG` and `BB`, the detector/label/ground-truth functions, the
    /// enlargement post-processor, and the second-order kinds needed to state
    /// that training behavior carries over to the operational domain.
    pub fn perception() -> Self {
        let mut s = Self::new();
        let strs = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        for sort in ["IMG", "BB"] {
            s.add_sort(sort).unwrap();
        }
        for f in ["DNN", "label", "ground_truth"] {
            s.add_function(f, strs(&["IMG"]), "BB").unwrap();
        }
        s.add_function("Enlarge", strs(&["BB"]), "BB").unwrap();
        s.add_predicate("Training", strs(&["IMG"])).unwrap();
        s.add_predicate("ODD", strs(&["IMG"])).unwrap();
        s.add_predicate("Cover", strs(&["BB", "BB"])).unwrap();
        s.add_kind("BEHAVIOR", Kind::Pred(strs(&["BB", "BB"]))).unwrap();
        s.add_kind("F1", Kind::Func(strs(&["BB"]), "BB".into())).unwrap();
        s.add_kind("F2", Kind::Func(strs(&["IMG"]), "BB".into())).unwrap();
        s
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.sorts.contains(name)
            || self.constants.contains_key(name)
            || self.functions.contains_key(name)
            || self.predicates.contains_key(name)
            || self.kinds.contains_key(name)
    }

    fn fresh(&self, name: &str) -> Result<(), SignatureError> {
        if !is_identifier(name) {
            return Err(SignatureError::BadName(name.into()));
        }
        if self.is_declared(name) {
            return Err(SignatureError::Duplicate(name.into()));
        }
        Ok(())
    }

    fn known_sort(&self, symbol: &str, sort: &str) -> Result<(), SignatureError> {
        if self.sorts.contains(sort) {
            Ok(())
        } else {
            Err(SignatureError::UnknownSort {
                symbol: symbol.into(),
                sort: sort.into(),
            })
        }
    }

    pub fn add_sort(&mut self, name: &str) -> Result<(), SignatureError> {
        self.fresh(name)?;
        self.sorts.insert(name.into());
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str, sort: &str) -> Result<(), SignatureError> {
        self.fresh(name)?;
        self.known_sort(name, sort)?;
        self.constants.insert(name.into(), sort.into());
        Ok(())
    }

    pub fn add_function(
        &mut self,
        name: &str,
        args: Vec<String>,
        result: &str,
    ) -> Result<(), SignatureError> {
        self.fresh(name)?;
        for a in args.iter().map(String::as_str).chain([result]) {
            self.known_sort(name, a)?;
        }
        if args.is_empty() {
            self.constants.insert(name.into(), result.into());
        } else {
            self.functions.insert(name.into(), (args, result.into()));
        }
        Ok(())
    }

    pub fn add_predicate(&mut self, name: &str, args: Vec<String>) -> Result<(), SignatureError> {
        self.fresh(name)?;
        for a in &args {
            self.known_sort(name, a)?;
        }
        self.predicates.insert(name.into(), args);
        Ok(())
    }

    pub fn add_kind(&mut self, name: &str, kind: Kind) -> Result<(), SignatureError> {
        self.fresh(name)?;
        let (args, result) = match &kind {
            Kind::Pred(a) => (a, None),
            Kind::Func(a, r) => (a, Some(r.as_str())),
        };
        if args.is_empty() {
            return Err(SignatureError::EmptyKind(name.into()));
        }
        for a in args.iter().map(String::as_str).chain(result) {
            self.known_sort(name, a)?;
        }
        self.kinds.insert(name.into(), kind);
        Ok(())
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sorts.contains(name)
    }

    pub fn sorts(&self) -> impl Iterator<Item = &str> {
        self.sorts.iter().map(String::as_str)
    }

    pub fn constant(&self, name: &str) -> Option<&str> {
        self.constants.get(name).map(String::as_str)
    }

    pub fn constants(&self) -> impl Iterator<Item = (&str, &str)> {
        self.constants.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn function(&self, name: &str) -> Option<(&[String], &str)> {
        self.functions
            .get(name)
            .map(|(a, r)| (a.as_slice(), r.as_str()))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, &[String], &str)> {
        self.functions
            .iter()
            .map(|(k, (a, r))| (k.as_str(), a.as_slice(), r.as_str()))
    }

    pub fn predicate(&self, name: &str) -> Option<&[String]> {
        self.predicates.get(name).map(Vec::as_slice)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.predicates.iter().map(|(k, a)| (k.as_str(), a.as_slice()))
    }

    pub fn kind(&self, name: &str) -> Option<&Kind> {
        self.kinds.get(name)
    }

    pub fn kinds(&self) -> impl Iterator<Item = (&str, &Kind)> {
        self.kinds.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Declared symbols whose shape matches `kind`, in name order.
    pub fn symbols_of_kind(&self, kind: &Kind) -> Vec<String> {
        match kind {
            Kind::Pred(args) => self
                .predicates
                .iter()
                .filter(|(_, a)| *a == args)
                .map(|(n, _)| n.clone())
                .collect(),
            Kind::Func(args, res) => self
                .functions
                .iter()
                .filter(|(_, (a, r))| a == args && r == res)
                .map(|(n, _)| n.clone())
                .collect(),
        }
    }

    /// Does the declared symbol `name` fit `kind`?
    pub fn symbol_has_kind(&self, name: &str, kind: &Kind) -> bool {
        match kind {
            Kind::Pred(args) => self.predicate(name) == Some(args.as_slice()),
            Kind::Func(args, res) => {
                matches!(self.function(name), Some((a, r)) if a == args.as_slice() && r == res)
            }
        }
    }
}
