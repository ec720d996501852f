//! Assurance-case files and assessment reports.
//!
//! ```json
//! {"signature": {...},
//!  "nodes": [
//!    {"id": "G1", "kind": "goal", "text": "...", "formula": "FORALL ...",
//!     "rule": "dempster", "children": ["E1", "E2"]},
//!    {"id": "E1", "kind": "solution", "formula": "...", "mass": {"holds": 1.0}}]}
//! ```
//!
//! Masses are over `{holds, not_holds}`. Mass not given to `holds` or
//! `not_holds` goes to Θ; if `theta` is written out, the three must sum to 1.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use safebox_core::assurance::{
    AssessmentReport, CaseNode, CombinationRule, MassFunction, NodeKind, Soundness, HOLDS, NOT_HOLDS,
};
use safebox_core::logic::Signature;

use crate::theory::{signature_or_default, SignatureDoc};
use crate::{read_text, to_pretty, Error, FormatError};

#[derive(Deserialize)]
struct CaseDoc {
    signature: Option<SignatureDoc>,
    nodes: Vec<NodeDoc>,
}

#[derive(Deserialize)]
struct NodeDoc {
    id: String,
    kind: KindDoc,
    #[serde(default)]
    text: String,
    formula: Option<String>,
    mass: Option<MassDoc>,
    #[serde(default)]
    children: Vec<String>,
    rule: Option<RuleDoc>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Goal,
    Strategy,
    Solution,
    Assumption,
    Context,
}

#[derive(Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RuleDoc {
    Dempster,
    Yager,
}

impl From<RuleDoc> for CombinationRule {
    fn from(r: RuleDoc) -> Self {
        match r {
            RuleDoc::Dempster => CombinationRule::Dempster,
            RuleDoc::Yager => CombinationRule::Yager,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MassDoc {
    #[serde(default)]
    holds: f64,
    #[serde(default)]
    not_holds: f64,
    theta: Option<f64>,
}

impl MassDoc {
    fn build(&self) -> Result<MassFunction, safebox_core::assurance::MassError> {
        match self.theta {
            None => MassFunction::binary(self.holds, self.not_holds),
            Some(theta) => MassFunction::new(
                MassFunction::binary_frame(),
                [(HOLDS, self.holds), (NOT_HOLDS, self.not_holds), (HOLDS | NOT_HOLDS, theta)],
            ),
        }
    }
}

/// A loaded case: its vocabulary and its nodes, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub signature: Signature,
    pub nodes: Vec<CaseNode>,
}

pub fn parse_case(text: &str) -> Result<Case, FormatError> {
    let doc: CaseDoc = serde_json::from_str(text)?;
    let signature = signature_or_default(doc.signature.as_ref())?;
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| {
            let mass = n
                .mass
                .as_ref()
                .map(MassDoc::build)
                .transpose()
                .map_err(|e| FormatError::schema(format!("node {:?}: mass: {e}", n.id)))?;
            Ok(CaseNode {
                kind: match n.kind {
                    KindDoc::Goal => NodeKind::Goal,
                    KindDoc::Strategy => NodeKind::Strategy,
                    KindDoc::Solution => NodeKind::Solution,
                    KindDoc::Assumption => NodeKind::Assumption,
                    KindDoc::Context => NodeKind::Context,
                },
                id: n.id,
                text: n.text,
                formula: n.formula,
                mass,
                children: n.children,
                rule: n.rule.map(Into::into).unwrap_or_default(),
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(Case { signature, nodes })
}

pub fn load_case(path: &Path) -> Result<Case, Error> {
    parse_case(&read_text(path)?).map_err(|e| Error::format(path, e))
}

#[derive(Serialize)]
struct ReportDoc {
    goals: Vec<GoalDoc>,
}

#[derive(Serialize)]
struct GoalDoc {
    id: String,
    rule: &'static str,
    combination_order: Vec<String>,
    assumptions: Vec<String>,
    masses: BTreeMap<String, f64>,
    belief: f64,
    plausibility: f64,
    soundness: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    proof: Option<ProofDoc>,
}

#[derive(Serialize)]
struct ProofDoc {
    lemmas: Vec<LemmaDoc>,
    goal: String,
    script: Vec<String>,
    traces: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct LemmaDoc {
    name: String,
    formula: String,
    script: Vec<String>,
}

fn commands(script: &safebox_core::logic::ProofScript) -> Vec<String> {
    script.commands.iter().map(ToString::to_string).collect()
}

pub fn report_to_json(report: &AssessmentReport) -> String {
    let goals = report
        .goals
        .iter()
        .map(|g| {
            let (soundness, reason, proof) = match &g.soundness {
                Soundness::Sound { bundle, traces } => (
                    "sound",
                    None,
                    Some(ProofDoc {
                        lemmas: bundle
                            .lemmas
                            .iter()
                            .map(|(name, f, s)| LemmaDoc {
                                name: name.clone(),
                                formula: f.to_string(),
                                script: commands(s),
                            })
                            .collect(),
                        goal: bundle.goal.to_string(),
                        script: commands(&bundle.main),
                        traces: traces.iter().map(|(n, t)| (n.clone(), t.to_string())).collect(),
                    }),
                ),
                Soundness::UpperBoundOnly { reason } => ("upper_bound_only", Some(reason.clone()), None),
            };
            GoalDoc {
                id: g.id.clone(),
                rule: g.rule.as_str(),
                combination_order: g.combination_order.clone(),
                assumptions: g.assumptions.clone(),
                masses: g.combined.focal().map(|(s, m)| (g.combined.subset_name(s), m)).collect(),
                belief: g.belief,
                plausibility: g.plausibility,
                soundness,
                reason,
                proof,
            }
        })
        .collect();
    to_pretty(&ReportDoc { goals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_default_remainder_to_theta() {
        let case = parse_case(
            r#"{"nodes": [{"id": "S", "kind": "solution", "mass": {"holds": 0.7, "not_holds": 0.1}}]}"#,
        )
        .unwrap();
        let m = case.nodes[0].mass.as_ref().unwrap();
        assert!((m.mass(HOLDS | NOT_HOLDS) - 0.2).abs() < 1e-12);
        assert_eq!(case.signature, Signature::perception());
    }

    #[test]
    fn explicit_theta_must_normalize() {
        let err = parse_case(
            r#"{"nodes": [{"id": "S", "kind": "solution", "mass": {"holds": 0.7, "theta": 0.7}}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("\"S\""), "{err}");
        assert!(parse_case(r#"{"nodes": [{"id": "S", "kind": "gaol"}]}"#).is_err());
    }

    #[test]
    fn rule_defaults_to_dempster() {
        let case = parse_case(
            r#"{"nodes": [{"id": "G", "kind": "goal"}, {"id": "H", "kind": "goal", "rule": "yager"}]}"#,
        )
        .unwrap();
        assert_eq!(case.nodes[0].rule, CombinationRule::Dempster);
        assert_eq!(case.nodes[1].rule, CombinationRule::Yager);
    }
}
