//! GSN-style assurance cases with Dempster-Shafer confidence, gated by a
//! logical soundness check.
//!
//! Combining evidence masses says nothing about whether the evidence actually
//! entails the goal. A goal's combined belief is therefore reported as
//! `Sound` only when its formula is derived from the formulas of its
//! supporting nodes *and* the derivation's scripts pass the independent
//! checker; otherwise it is flagged `UpperBoundOnly`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::logic::{
    check_bundle, derive_bounded, parse_formula, Axioms, DeriveVerdict, Formula, ParseError, ScriptBundle,
    Signature, Trace,
};

/// Masses must sum to one within this tolerance.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MassError {
    #[error("frame must have between 1 and 63 distinct elements")]
    BadFrame,
    #[error("mass functions are defined over different frames")]
    FrameMismatch,
    #[error("mass assigned to the empty set or outside the frame")]
    BadSubset,
    #[error("masses must be finite and non-negative, got {0}")]
    NegativeMass(f64),
    #[error("masses sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("unknown frame element `{0}`")]
    UnknownElement(String),
    #[error("total conflict (K = 1): Dempster's rule is undefined")]
    TotalConflict,
}

/// Basic belief assignment over a finite frame of discernment. Subsets are
/// bitmasks over the frame's elements; the full mask is Θ.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Vec<String>,
    masses: BTreeMap<u64, f64>,
}

pub const HOLDS: u64 = 0b01;
pub const NOT_HOLDS: u64 = 0b10;

impl MassFunction {
    pub fn new(frame: Vec<String>, masses: impl IntoIterator<Item = (u64, f64)>) -> Result<Self, MassError> {
        let distinct: BTreeSet<&String> = frame.iter().collect();
        if frame.is_empty() || frame.len() > 63 || distinct.len() != frame.len() {
            return Err(MassError::BadFrame);
        }
        let full = (1u64 << frame.len()) - 1;
        let mut out: BTreeMap<u64, f64> = BTreeMap::new();
        for (set, m) in masses {
            if set == 0 || set & !full != 0 {
                return Err(MassError::BadSubset);
            }
            if !m.is_finite() || m < 0.0 {
                return Err(MassError::NegativeMass(m));
            }
            if m > 0.0 {
                *out.entry(set).or_insert(0.0) += m;
            }
        }
        let total: f64 = out.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(MassError::NotNormalized(total));
        }
        Ok(Self { frame, masses: out })
    }

    /// All mass on Θ: no evidence either way.
    pub fn vacuous(frame: Vec<String>) -> Result<Self, MassError> {
        let n = frame.len();
        if n == 0 || n > 63 {
            return Err(MassError::BadFrame);
        }
        Self::new(frame, [((1u64 << n) - 1, 1.0)])
    }

    /// The two-element frame `{holds, not_holds}`.
    pub fn binary_frame() -> Vec<String> {
        alloc::vec!["holds".into(), "not_holds".into()]
    }

    /// Binary mass with `holds` and `not_holds` given; the rest goes to Θ.
    pub fn binary(holds: f64, not_holds: f64) -> Result<Self, MassError> {
        let theta = 1.0 - holds - not_holds;
        if theta < -MASS_TOLERANCE {
            return Err(MassError::NotNormalized(holds + not_holds));
        }
        Self::new(
            Self::binary_frame(),
            [(HOLDS, holds), (NOT_HOLDS, not_holds), (HOLDS | NOT_HOLDS, theta.max(0.0))],
        )
    }

    pub fn frame(&self) -> &[String] {
        &self.frame
    }

    pub fn theta(&self) -> u64 {
        (1u64 << self.frame.len()) - 1
    }

    /// Bitmask for a set of named elements.
    pub fn subset<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<u64, MassError> {
        let mut set = 0;
        for n in names {
            let i = self
                .frame
                .iter()
                .position(|e| e == n)
                .ok_or_else(|| MassError::UnknownElement(n.into()))?;
            set |= 1 << i;
        }
        Ok(set)
    }

    pub fn mass(&self, set: u64) -> f64 {
        self.masses.get(&set).copied().unwrap_or(0.0)
    }

    /// Focal elements with their masses, in bitmask order.
    pub fn focal(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.masses.iter().map(|(k, v)| (*k, *v))
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Bel(A): mass committed to subsets of `set`.
    pub fn belief(&self, set: u64) -> f64 {
        self.focal().filter(|(b, _)| b & !set == 0).map(|(_, m)| m).sum()
    }

    /// Pl(A): mass not contradicting `set`.
    pub fn plausibility(&self, set: u64) -> f64 {
        self.focal().filter(|(b, _)| b & set != 0).map(|(_, m)| m).sum()
    }

    pub fn subset_name(&self, set: u64) -> String {
        if set == self.theta() {
            return "Θ".into();
        }
        let names: Vec<&str> = (0..self.frame.len())
            .filter(|i| set & (1 << i) != 0)
            .map(|i| self.frame[i].as_str())
            .collect();
        if names.len() == 1 {
            names[0].into()
        } else {
            format!("{{{}}}", names.join(","))
        }
    }

    // Unnormalized conjunctive combination and its conflict K.
    fn conjunctive(&self, other: &MassFunction) -> Result<(BTreeMap<u64, f64>, f64), MassError> {
        if self.frame != other.frame {
            return Err(MassError::FrameMismatch);
        }
        let mut out = BTreeMap::new();
        let mut conflict = 0.0;
        for (b, mb) in self.focal() {
            for (c, mc) in other.focal() {
                let prod = mb * mc;
                match b & c {
                    0 => conflict += prod,
                    a => *out.entry(a).or_insert(0.0) += prod,
                }
            }
        }
        Ok((out, conflict))
    }

    /// Conflict mass K between the two sources.
    pub fn conflict(&self, other: &MassFunction) -> Result<f64, MassError> {
        Ok(self.conjunctive(other)?.1)
    }
}

impl fmt::Display for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (s, m)) in self.focal().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {m}", self.subset_name(s))?;
        }
        f.write_str("}")
    }
}

/// Dempster's rule: conjunctive combination renormalized by `1 - K`.
pub fn combine_dempster(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, MassError> {
    let (joint, k) = m1.conjunctive(m2)?;
    let norm = 1.0 - k;
    if norm <= 1e-12 || joint.is_empty() {
        return Err(MassError::TotalConflict);
    }
    Ok(MassFunction {
        frame: m1.frame.clone(),
        masses: joint
            .into_iter()
            .filter(|(_, m)| *m > 0.0)
            .map(|(s, m)| (s, m / norm))
            .collect(),
    })
}

/// Yager's rule: conjunctive combination with the conflict moved to Θ.
pub fn combine_yager(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, MassError> {
    let (mut joint, k) = m1.conjunctive(m2)?;
    if k > 0.0 {
        *joint.entry(m1.theta()).or_insert(0.0) += k;
    }
    joint.retain(|_, m| *m > 0.0);
    Ok(MassFunction {
        frame: m1.frame.clone(),
        masses: joint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombinationRule {
    #[default]
    Dempster,
    Yager,
}

impl CombinationRule {
    pub fn combine(self, a: &MassFunction, b: &MassFunction) -> Result<MassFunction, MassError> {
        match self {
            CombinationRule::Dempster => combine_dempster(a, b),
            CombinationRule::Yager => combine_yager(a, b),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CombinationRule::Dempster => "dempster",
            CombinationRule::Yager => "yager",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Goal,
    Strategy,
    Solution,
    Assumption,
    Context,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Goal => "goal",
            NodeKind::Strategy => "strategy",
            NodeKind::Solution => "solution",
            NodeKind::Assumption => "assumption",
            NodeKind::Context => "context",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseNode {
    pub id: String,
    pub kind: NodeKind,
    pub text: String,
    pub formula: Option<String>,
    pub mass: Option<MassFunction>,
    pub children: Vec<String>,
    pub rule: CombinationRule,
}

impl CaseNode {
    pub fn new(id: &str, kind: NodeKind) -> Self {
        Self {
            id: id.into(),
            kind,
            text: String::new(),
            formula: None,
            mass: None,
            children: Vec::new(),
            rule: CombinationRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaseError {
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("node `{node}` refers to unknown child `{child}`")]
    UnknownChild { node: String, child: String },
    #[error("cycle through node `{0}`")]
    Cycle(String),
    #[error("solution `{0}` carries no mass")]
    MissingMass(String),
    #[error("node `{node}`: {source}")]
    Formula { node: String, source: ParseError },
    #[error("node `{node}`: {source}")]
    Mass { node: String, source: MassError },
    #[error("node `{0}` clashes with an axiom of the same name")]
    NameClash(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Soundness {
    /// The goal follows from its evidence; the checker accepted every script.
    Sound {
        bundle: ScriptBundle,
        traces: Vec<(String, Trace)>,
    },
    /// Combined belief is only an upper bound on confidence in the goal.
    UpperBoundOnly { reason: String },
}

impl Soundness {
    pub fn is_sound(&self) -> bool {
        matches!(self, Soundness::Sound { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalAssessment {
    pub id: String,
    pub rule: CombinationRule,
    /// Solutions combined, left to right.
    pub combination_order: Vec<String>,
    /// Assumption/context nodes whose formulas joined the axiom set.
    pub assumptions: Vec<String>,
    pub combined: MassFunction,
    pub belief: f64,
    pub plausibility: f64,
    pub soundness: Soundness,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssessmentReport {
    pub goals: Vec<GoalAssessment>,
}

fn check_structure(nodes: &[CaseNode]) -> Result<BTreeMap<&str, &CaseNode>, CaseError> {
    let mut by_id = BTreeMap::new();
    for n in nodes {
        if by_id.insert(n.id.as_str(), n).is_some() {
            return Err(CaseError::DuplicateId(n.id.clone()));
        }
    }
    for n in nodes {
        for c in &n.children {
            if !by_id.contains_key(c.as_str()) {
                return Err(CaseError::UnknownChild {
                    node: n.id.clone(),
                    child: c.clone(),
                });
            }
        }
        if n.kind == NodeKind::Solution && n.mass.is_none() {
            return Err(CaseError::MissingMass(n.id.clone()));
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color: BTreeMap<&str, u8> = BTreeMap::new();
    fn visit<'a>(
        id: &'a str,
        by_id: &BTreeMap<&'a str, &'a CaseNode>,
        color: &mut BTreeMap<&'a str, u8>,
    ) -> Result<(), CaseError> {
        match color.get(id) {
            Some(1) => return Err(CaseError::Cycle(id.into())),
            Some(2) => return Ok(()),
            _ => {}
        }
        color.insert(id, 1);
        for c in &by_id[id].children {
            visit(c, by_id, color)?;
        }
        color.insert(id, 2);
        Ok(())
    }
    for n in nodes {
        visit(&n.id, &by_id, &mut color)?;
    }
    Ok(by_id)
}

/// Solutions and assumption/context nodes under `goal`, looking through
/// strategies but not into sub-goals (those are assessed on their own).
fn supporting<'a>(goal: &'a CaseNode, by_id: &BTreeMap<&str, &'a CaseNode>) -> (Vec<&'a CaseNode>, Vec<&'a CaseNode>) {
    let mut solutions = BTreeMap::new();
    let mut assumptions = BTreeMap::new();
    let mut stack: Vec<&str> = goal.children.iter().map(String::as_str).collect();
    let mut seen = BTreeSet::new();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        let n = by_id[id];
        match n.kind {
            NodeKind::Solution => {
                solutions.insert(n.id.as_str(), n);
            }
            NodeKind::Assumption | NodeKind::Context => {
                assumptions.insert(n.id.as_str(), n);
            }
            NodeKind::Strategy => stack.extend(n.children.iter().map(String::as_str)),
            NodeKind::Goal => {}
        }
    }
    (solutions.into_values().collect(), assumptions.into_values().collect())
}

/// Assesses every goal of the case. `context` holds extra named axioms
/// (e.g. mathematical facts) available to every deduction check.
pub fn assess_case(
    nodes: &[CaseNode],
    sig: &Signature,
    context: &Axioms,
    depth: usize,
) -> Result<AssessmentReport, CaseError> {
    let by_id = check_structure(nodes)?;
    let mut parsed: BTreeMap<&str, Formula> = BTreeMap::new();
    for n in nodes {
        if let Some(text) = &n.formula {
            let f = parse_formula(text, sig).map_err(|source| CaseError::Formula {
                node: n.id.clone(),
                source,
            })?;
            parsed.insert(n.id.as_str(), f);
        }
    }

    let mut report = AssessmentReport::default();
    for goal in nodes.iter().filter(|n| n.kind == NodeKind::Goal) {
        let (solutions, assumptions) = supporting(goal, &by_id);
        let mut combined = MassFunction::vacuous(MassFunction::binary_frame()).expect("binary frame");
        if let Some((first, rest)) = solutions.split_first() {
            combined = first.mass.clone().expect("checked above");
            for s in rest {
                combined = goal
                    .rule
                    .combine(&combined, s.mass.as_ref().expect("checked above"))
                    .map_err(|source| CaseError::Mass {
                        node: goal.id.clone(),
                        source,
                    })?;
            }
        }
        let holds = combined.subset(["holds"]).unwrap_or(HOLDS);

        let soundness = soundness(goal, &solutions, &assumptions, &parsed, sig, context, depth)?;
        report.goals.push(GoalAssessment {
            id: goal.id.clone(),
            rule: goal.rule,
            combination_order: solutions.iter().map(|s| s.id.clone()).collect(),
            assumptions: assumptions
                .iter()
                .filter(|a| parsed.contains_key(a.id.as_str()))
                .map(|a| a.id.clone())
                .collect(),
            belief: combined.belief(holds),
            plausibility: combined.plausibility(holds),
            combined,
            soundness,
        });
    }
    Ok(report)
}

fn soundness(
    goal: &CaseNode,
    solutions: &[&CaseNode],
    assumptions: &[&CaseNode],
    parsed: &BTreeMap<&str, Formula>,
    sig: &Signature,
    context: &Axioms,
    depth: usize,
) -> Result<Soundness, CaseError> {
    let upper = |reason: String| Ok(Soundness::UpperBoundOnly { reason });
    let Some(goal_formula) = parsed.get(goal.id.as_str()) else {
        return upper("goal has no formula".into());
    };
    if solutions.is_empty() {
        return upper("no supporting evidence".into());
    }
    if let Some(s) = solutions.iter().find(|s| !parsed.contains_key(s.id.as_str())) {
        return upper(format!("solution `{}` has no formula", s.id));
    }
    let mut axioms = context.clone();
    for n in solutions.iter().chain(assumptions) {
        if let Some(f) = parsed.get(n.id.as_str()) {
            if axioms.insert(n.id.clone(), f.clone()).is_some() {
                return Err(CaseError::NameClash(n.id.clone()));
            }
        }
    }
    match derive_bounded(sig, &axioms, goal_formula, depth) {
        Err(e) => upper(e.to_string()),
        Ok(DeriveVerdict::NotDerivable { depth }) => {
            upper(format!("goal is not derivable from its evidence at depth {depth}"))
        }
        Ok(DeriveVerdict::Derivable(d)) => {
            let bundle = d.to_scripts();
            match check_bundle(sig, &axioms, &bundle) {
                Ok(traces) => Ok(Soundness::Sound { bundle, traces }),
                Err(e) => upper(format!("derivation rejected by the checker: {e}")),
            }
        }
    }
}

/// Indented text rendering of the case with each goal's assessment.
pub fn render_tree(nodes: &[CaseNode], report: &AssessmentReport) -> String {
    let by_id: BTreeMap<&str, &CaseNode> = nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    let assessed: BTreeMap<&str, &GoalAssessment> = report.goals.iter().map(|g| (g.id.as_str(), g)).collect();
    let children: BTreeSet<&str> = nodes.iter().flat_map(|n| n.children.iter().map(String::as_str)).collect();
    let mut out = String::new();
    fn line(
        out: &mut String,
        id: &str,
        indent: usize,
        by_id: &BTreeMap<&str, &CaseNode>,
        assessed: &BTreeMap<&str, &GoalAssessment>,
    ) {
        let Some(n) = by_id.get(id) else { return };
        let _ = write!(out, "{:indent$}[{}] {}", "", n.kind.as_str(), n.id, indent = indent * 2);
        if !n.text.is_empty() {
            let _ = write!(out, ": {}", n.text);
        }
        if let Some(g) = assessed.get(id) {
            let flag = match &g.soundness {
                Soundness::Sound { .. } => "sound".to_string(),
                Soundness::UpperBoundOnly { reason } => format!("upper-bound-only ({reason})"),
            };
            let _ = write!(out, "  => belief {:.6} via {}, {flag}", g.belief, g.rule.as_str());
        } else if let Some(m) = &n.mass {
            let _ = write!(out, "  mass {m}");
        }
        out.push('\n');
        for c in &n.children {
            line(out, c, indent + 1, by_id, assessed);
        }
    }
    for n in nodes.iter().filter(|n| !children.contains(n.id.as_str())) {
        line(&mut out, &n.id, 0, &by_id, &assessed);
    }
    out
}
