//! Axiom-set files and proof scripts.
//!
//! ```json
//! {"signature": {"sorts": ["IMG", "BB"],
//!                "constants": {"d0": "IMG"},
//!                "functions": {"DNN": {"args": ["IMG"], "result": "BB"}},
//!                "predicates": {"Cover": ["BB", "BB"]},
//!                "kinds": {"BEHAVIOR": {"args": ["BB", "BB"]},
//!                          "F1": {"args": ["BB"], "result": "BB"}}},
//!  "axioms": {"E2": "FORALL d:IMG: Training(d) -> ..."},
//!  "conjectures": {"G1": "..."}}
//! ```
//!
//! Without a `signature` block the perception vocabulary is assumed. A kind
//! without a `result` ranges over predicates, one with a result over
//! functions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use safebox_core::logic::{parse_formula, Axioms, Formula, Kind, ProofScript, Signature};

use crate::{read_text, Error, FormatError};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SignatureDoc {
    #[serde(default)]
    pub sorts: Vec<String>,
    #[serde(default)]
    pub constants: BTreeMap<String, String>,
    #[serde(default)]
    pub functions: BTreeMap<String, SymbolDoc>,
    #[serde(default)]
    pub predicates: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub kinds: BTreeMap<String, SymbolDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolDoc {
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<String>,
}

impl SignatureDoc {
    pub fn build(&self) -> Result<Signature, FormatError> {
        let err = |e: safebox_core::logic::SignatureError| FormatError::schema(format!("signature: {e}"));
        let mut sig = Signature::new();
        for s in &self.sorts {
            sig.add_sort(s).map_err(err)?;
        }
        for (name, sort) in &self.constants {
            sig.add_constant(name, sort).map_err(err)?;
        }
        for (name, f) in &self.functions {
            let result = f
                .result
                .as_deref()
                .ok_or_else(|| FormatError::schema(format!("signature: function `{name}` needs a result sort")))?;
            sig.add_function(name, f.args.clone(), result).map_err(err)?;
        }
        for (name, args) in &self.predicates {
            sig.add_predicate(name, args.clone()).map_err(err)?;
        }
        for (name, k) in &self.kinds {
            let kind = match &k.result {
                Some(r) => Kind::Func(k.args.clone(), r.clone()),
                None => Kind::Pred(k.args.clone()),
            };
            sig.add_kind(name, kind).map_err(err)?;
        }
        Ok(sig)
    }

    pub fn from_signature(sig: &Signature) -> Self {
        Self {
            sorts: sig.sorts().map(String::from).collect(),
            constants: sig.constants().map(|(n, s)| (n.into(), s.into())).collect(),
            functions: sig
                .functions()
                .map(|(n, args, r)| {
                    (
                        n.into(),
                        SymbolDoc {
                            args: args.to_vec(),
                            result: Some(r.into()),
                        },
                    )
                })
                .collect(),
            predicates: sig.predicates().map(|(n, args)| (n.into(), args.to_vec())).collect(),
            kinds: sig
                .kinds()
                .map(|(n, k)| {
                    let doc = match k {
                        Kind::Pred(args) => SymbolDoc {
                            args: args.clone(),
                            result: None,
                        },
                        Kind::Func(args, r) => SymbolDoc {
                            args: args.clone(),
                            result: Some(r.clone()),
                        },
                    };
                    (n.into(), doc)
                })
                .collect(),
        }
    }
}

pub(crate) fn signature_or_default(doc: Option<&SignatureDoc>) -> Result<Signature, FormatError> {
    doc.map_or_else(|| Ok(Signature::perception()), SignatureDoc::build)
}

#[derive(Deserialize)]
struct TheoryDoc {
    signature: Option<SignatureDoc>,
    #[serde(default)]
    axioms: BTreeMap<String, String>,
    #[serde(default)]
    conjectures: BTreeMap<String, String>,
}

/// A signature with named axioms and named (unproved) conjectures.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    pub signature: Signature,
    pub axioms: Axioms,
    pub conjectures: Axioms,
}

impl Theory {
    fn formula(&self, name: &str) -> Option<&Formula> {
        self.axioms.get(name).or_else(|| self.conjectures.get(name))
    }

    /// A goal given either as the name of an axiom/conjecture or as formula
    /// text. Returns the name when it was one.
    pub fn resolve_goal(&self, goal: &str) -> Result<(Option<String>, Formula), FormatError> {
        if let Some(f) = self.formula(goal) {
            return Ok((Some(goal.into()), f.clone()));
        }
        parse_formula(goal, &self.signature)
            .map(|f| (None, f))
            .map_err(|e| FormatError::schema(format!("goal is neither a known name nor a formula: {e}")))
    }

    /// The premises for a query: the named entries (axioms or conjectures)
    /// when `names` is given, otherwise every axiom. The goal itself is
    /// never among its own premises.
    pub fn premises(&self, names: Option<&[String]>, goal: Option<&str>) -> Result<Axioms, FormatError> {
        let mut out = match names {
            Some(names) => names
                .iter()
                .map(|n| {
                    self.formula(n)
                        .map(|f| (n.clone(), f.clone()))
                        .ok_or_else(|| FormatError::schema(format!("unknown axiom or conjecture `{n}`")))
                })
                .collect::<Result<Axioms, _>>()?,
            None => self.axioms.clone(),
        };
        if let Some(g) = goal {
            out.remove(g);
        }
        Ok(out)
    }
}

fn formulas(section: &str, entries: BTreeMap<String, String>, sig: &Signature) -> Result<Axioms, FormatError> {
    entries
        .into_iter()
        .map(|(name, text)| {
            parse_formula(&text, sig)
                .map(|f| (name.clone(), f))
                .map_err(|e| FormatError::schema(format!("{section}.{name}: {e}")))
        })
        .collect()
}

pub fn parse_theory(text: &str) -> Result<Theory, FormatError> {
    let doc: TheoryDoc = serde_json::from_str(text)?;
    let signature = signature_or_default(doc.signature.as_ref())?;
    let axioms = formulas("axioms", doc.axioms, &signature)?;
    let conjectures = formulas("conjectures", doc.conjectures, &signature)?;
    if let Some(dup) = axioms.keys().find(|k| conjectures.contains_key(*k)) {
        return Err(FormatError::schema(format!("`{dup}` is both an axiom and a conjecture")));
    }
    Ok(Theory {
        signature,
        axioms,
        conjectures,
    })
}

pub fn load_theory(path: &Path) -> Result<Theory, Error> {
    parse_theory(&read_text(path)?).map_err(|e| Error::format(path, e))
}

pub fn load_script(path: &Path) -> Result<ProofScript, Error> {
    ProofScript::parse(&read_text(path)?).map_err(|e| Error::format(path, FormatError::schema(e.to_string())))
}
