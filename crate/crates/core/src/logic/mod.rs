//! A restricted first-order language with second-order universal variables,
//! a proof-script checker, and a bounded forward-chaining deriver.
//!
//! The two engines are independent: [`derive_bounded`] searches, while
//! [`check_script`] only replays commands. Derivations translate into scripts
//! ([`Derivation::to_scripts`]) so every search result can be re-checked.

mod checker;
mod derive;
mod formula;
mod parser;
pub mod perception;
mod signature;

use alloc::collections::BTreeMap;
use alloc::string::String;

pub use checker::{check_script, Command, ProofScript, ScriptSyntaxError, Sequent, Trace, TraceStep, Verdict};
pub use derive::{
    check_bundle, derive_bounded, BundleRejection, DeriveError, DeriveVerdict, Derivation, DerivedLemma,
    GoalProof, InstanceStep, Justification, ScriptBundle,
};
pub use formula::{Atom, Binder, BinderType, Formula, Head, Replacement, Term};
pub use parser::{parse_formula, parse_term, ParseError};
pub use signature::{Kind, Signature, SignatureError};

/// Named closed formulas, iterated in name order.
pub type Axioms = BTreeMap<String, Formula>;

/// Depth that covers terms such as `Enlarge(DNN(d1))`.
pub const DEFAULT_DEPTH: usize = 3;
