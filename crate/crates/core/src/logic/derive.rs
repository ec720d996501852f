//! Bounded forward chaining over a finite Herbrand base.
//!
//! Supported fragment: every axiom is a block of universal quantifiers over
//! an implication chain. A *first-order clause* has only atoms as premises and
//! conclusions; its second-order variables are instantiated with every
//! declared symbol of the matching kind and its first-order variables with
//! ground terms of nesting at most `depth`. A *higher-order clause* (one with
//! quantified premises or conclusions) must bind only second-order variables;
//! each of its instances fires once all its premises are proved as stand-alone
//! lemmas, and its conclusions become new lemmas.
//!
//! Every success comes with a [`Derivation`] that translates into proof
//! scripts for [`check_script`](super::checker::check_script).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::checker::{check_script, Command, ProofScript, Trace, Verdict};
use super::formula::{Atom, Binder, BinderType, Formula, Head, Replacement, Term};
use super::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeriveError {
    #[error("`{name}` is outside the supported fragment: {reason}")]
    Fragment { name: String, reason: String },
    #[error("derivation depth must be positive")]
    ZeroDepth,
}

/// One instantiated axiom or lemma used during forward chaining.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceStep {
    pub rule: String,
    /// Arguments per quantifier block, printed as they would be typed.
    pub blocks: Vec<Vec<String>>,
    pub derived: Vec<Atom>,
}

/// Proof of one closed goal: skolemize, instantiate, close propositionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalProof {
    pub skolems: Vec<Vec<String>>,
    pub steps: Vec<InstanceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// A quantified premise proved on its own.
    Proved(GoalProof),
    /// A conclusion of a higher-order clause instance whose premises are
    /// the named axioms/lemmas.
    Instance {
        rule: String,
        blocks: Vec<Vec<String>>,
        premises: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedLemma {
    pub name: String,
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub goal: Formula,
    pub depth: usize,
    /// Only the lemmas the final proof depends on, in dependency order.
    pub lemmas: Vec<DerivedLemma>,
    pub proof: GoalProof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeriveVerdict {
    Derivable(Derivation),
    NotDerivable { depth: usize },
}

impl DeriveVerdict {
    pub fn is_derivable(&self) -> bool {
        matches!(self, DeriveVerdict::Derivable(_))
    }
}

/// Scripts for each lemma, in order, followed by the main goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptBundle {
    pub lemmas: Vec<(String, Formula, ProofScript)>,
    pub goal: Formula,
    pub main: ProofScript,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("proof of `{name}` rejected at step {step}: {reason}")]
pub struct BundleRejection {
    pub name: String,
    pub step: usize,
    pub reason: String,
}

fn inst_commands(rule: &str, blocks: &[Vec<String>]) -> Vec<Command> {
    let mut cmds = alloc::vec![Command::Lemma(rule.into())];
    cmds.extend(blocks.iter().map(|args| Command::Inst {
        position: -1,
        args: args.clone(),
    }));
    cmds
}

impl GoalProof {
    pub fn to_script(&self) -> ProofScript {
        let mut cmds: Vec<Command> = self
            .skolems
            .iter()
            .map(|names| Command::Skolem {
                position: 1,
                names: names.clone(),
            })
            .collect();
        for s in &self.steps {
            cmds.extend(inst_commands(&s.rule, &s.blocks));
        }
        cmds.push(Command::Prop);
        ProofScript::new(cmds)
    }
}

impl Derivation {
    /// Mechanical translation into checker scripts.
    pub fn to_scripts(&self) -> ScriptBundle {
        let lemmas = self
            .lemmas
            .iter()
            .map(|l| {
                let script = match &l.justification {
                    Justification::Proved(p) => p.to_script(),
                    Justification::Instance {
                        rule,
                        blocks,
                        premises,
                    } => {
                        let mut cmds = inst_commands(rule, blocks);
                        cmds.extend(premises.iter().map(|p| Command::Lemma(p.clone())));
                        cmds.push(Command::Prop);
                        ProofScript::new(cmds)
                    }
                };
                (l.name.clone(), l.formula.clone(), script)
            })
            .collect();
        ScriptBundle {
            lemmas,
            goal: self.goal.clone(),
            main: self.proof.to_script(),
        }
    }
}

/// Checks every lemma script in order (each may use the axioms and earlier
/// lemmas), then the main script. Returns the traces on success.
pub fn check_bundle(
    sig: &Signature,
    axioms: &BTreeMap<String, Formula>,
    bundle: &ScriptBundle,
) -> Result<Vec<(String, Trace)>, BundleRejection> {
    let mut available = axioms.clone();
    let mut traces = Vec::new();
    let entries = bundle
        .lemmas
        .iter()
        .map(|(n, f, s)| (n.as_str(), f, s))
        .chain([("goal", &bundle.goal, &bundle.main)]);
    for (name, formula, script) in entries {
        match check_script(sig, &available, formula, script) {
            Verdict::Accepted(t) => traces.push((name.to_string(), t)),
            Verdict::Rejected { step, reason } => {
                return Err(BundleRejection {
                    name: name.into(),
                    step,
                    reason,
                })
            }
        }
        available.insert(name.into(), formula.clone());
    }
    Ok(traces)
}

#[derive(Debug, Clone)]
struct Clause {
    name: String,
    blocks: Vec<Vec<Binder>>,
    premises: Vec<Formula>,
    conclusions: Vec<Formula>,
}

impl Clause {
    fn higher_order(&self) -> bool {
        self.premises
            .iter()
            .chain(&self.conclusions)
            .any(|f| !matches!(f, Formula::Atom(_)))
    }

    fn binders(&self) -> impl Iterator<Item = &Binder> {
        self.blocks.iter().flatten()
    }
}

fn fragment(name: &str, reason: impl Into<String>) -> DeriveError {
    DeriveError::Fragment {
        name: name.into(),
        reason: reason.into(),
    }
}

fn clause_of(name: &str, formula: &Formula) -> Result<Clause, DeriveError> {
    let mut clause = clause_of_unchecked(formula);
    clause.name = name.into();
    if clause.higher_order() {
        if clause
            .binders()
            .any(|b| matches!(b.ty, BinderType::Sort(_)))
        {
            return Err(fragment(
                name,
                "a clause with quantified premises or conclusions may only bind second-order variables",
            ));
        }
        for p in &clause.premises {
            if !matches!(p, Formula::Atom(_)) {
                goal_shape(name, p)?;
            }
        }
    }
    Ok(clause)
}

struct GoalShape {
    blocks: Vec<Vec<Binder>>,
    premises: Vec<Atom>,
    conclusions: Vec<Atom>,
}

fn goal_shape(name: &str, formula: &Formula) -> Result<GoalShape, DeriveError> {
    let c = clause_of_unchecked(formula);
    if c.binders().any(|b| matches!(b.ty, BinderType::Kind(_))) {
        return Err(fragment(name, "goals cannot quantify over second-order variables"));
    }
    let atoms = |fs: Vec<Formula>, what: &str| -> Result<Vec<Atom>, DeriveError> {
        fs.into_iter()
            .map(|f| match f {
                Formula::Atom(a) => Ok(a),
                other => Err(fragment(
                    name,
                    format!("goal {what} must be atoms, found `{other}`"),
                )),
            })
            .collect()
    };
    Ok(GoalShape {
        premises: atoms(c.premises, "premises")?,
        conclusions: atoms(c.conclusions, "conclusions")?,
        blocks: c.blocks,
    })
}

fn clause_of_unchecked(formula: &Formula) -> Clause {
    let mut blocks = Vec::new();
    let mut body = formula;
    while let Formula::Forall(bs, inner) = body {
        blocks.push(bs.clone());
        body = inner;
    }
    let mut premises = Vec::new();
    while let Formula::Implies(a, b) = body {
        premises.extend(a.conjuncts().into_iter().cloned());
        body = b;
    }
    Clause {
        name: String::new(),
        blocks,
        premises,
        conclusions: body.conjuncts().into_iter().cloned().collect(),
    }
}

/// Every assignment of declared symbols to the clause's second-order binders.
fn so_assignments(sig: &Signature, clause: &Clause) -> Vec<BTreeMap<String, String>> {
    let mut out = alloc::vec![BTreeMap::new()];
    for b in clause.binders() {
        let BinderType::Kind(k) = &b.ty else { continue };
        let syms = sig.kind(k).map(|k| sig.symbols_of_kind(k)).unwrap_or_default();
        out = out
            .into_iter()
            .flat_map(|m| {
                syms.iter().map(move |s| {
                    let mut m = m.clone();
                    m.insert(b.name.clone(), s.clone());
                    m
                })
            })
            .collect();
    }
    out
}

fn symbol_map(assign: &BTreeMap<String, String>) -> BTreeMap<String, Replacement> {
    assign
        .iter()
        .map(|(k, v)| (k.clone(), Replacement::Symbol(v.clone())))
        .collect()
}

/// A first-order clause with its second-order variables fixed.
#[derive(Debug, Clone)]
struct FoRule {
    clause: usize,
    symbols: BTreeMap<String, String>,
    premises: Vec<Atom>,
    conclusions: Vec<Atom>,
    /// First-order variables and their sorts.
    vars: Vec<(String, String)>,
}

fn as_atom(f: &Formula) -> Atom {
    match f {
        Formula::Atom(a) => a.clone(),
        _ => unreachable!("first-order clause with non-atomic part"),
    }
}

fn fo_rules(sig: &Signature, clauses: &[Clause]) -> Vec<FoRule> {
    let mut rules = Vec::new();
    for (ci, c) in clauses.iter().enumerate() {
        if c.higher_order() {
            continue;
        }
        let vars: Vec<(String, String)> = c
            .binders()
            .filter_map(|b| match &b.ty {
                BinderType::Sort(s) => Some((b.name.clone(), s.clone())),
                BinderType::Kind(_) => None,
            })
            .collect();
        for assign in so_assignments(sig, c) {
            let map = symbol_map(&assign);
            rules.push(FoRule {
                clause: ci,
                symbols: assign,
                premises: c.premises.iter().map(|p| as_atom(&p.subst(&map))).collect(),
                conclusions: c.conclusions.iter().map(|p| as_atom(&p.subst(&map))).collect(),
                vars: vars.clone(),
            });
        }
    }
    rules
}

fn match_term(
    pat: &Term,
    ground: &Term,
    binding: &mut BTreeMap<String, Term>,
    depth: usize,
) -> bool {
    match (pat, ground) {
        (Term::Var(v), _) => match binding.get(v) {
            Some(t) => t == ground,
            None => {
                if ground.depth() > depth {
                    return false;
                }
                binding.insert(v.clone(), ground.clone());
                true
            }
        },
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(h1, a1), Term::App(h2, a2)) => {
            h1 == h2
                && a1.len() == a2.len()
                && a1
                    .iter()
                    .zip(a2)
                    .all(|(p, g)| match_term(p, g, binding, depth))
        }
        _ => false,
    }
}

fn match_atom(pat: &Atom, ground: &Atom, binding: &BTreeMap<String, Term>, depth: usize) -> Option<BTreeMap<String, Term>> {
    if pat.head != ground.head || pat.args.len() != ground.args.len() {
        return None;
    }
    let mut b = binding.clone();
    pat.args
        .iter()
        .zip(&ground.args)
        .all(|(p, g)| match_term(p, g, &mut b, depth))
        .then_some(b)
}

fn ground_atom(pat: &Atom, binding: &BTreeMap<String, Term>) -> Atom {
    let map: BTreeMap<String, Replacement> = binding
        .iter()
        .map(|(k, v)| (k.clone(), Replacement::Term(v.clone())))
        .collect();
    match Formula::Atom(pat.clone()).subst(&map) {
        Formula::Atom(a) => a,
        _ => unreachable!(),
    }
}

/// All ground terms of nesting at most `depth`, grouped by sort.
fn herbrand_universe(
    sig: &Signature,
    extra: &[(String, String)],
    depth: usize,
) -> BTreeMap<String, Vec<Term>> {
    let mut by_sort: BTreeMap<String, BTreeSet<Term>> = BTreeMap::new();
    for (c, s) in sig
        .constants()
        .map(|(c, s)| (c.to_string(), s.to_string()))
        .chain(extra.iter().cloned())
    {
        by_sort.entry(s).or_default().insert(Term::Const(c));
    }
    for _ in 0..depth {
        let mut new: Vec<(String, Term)> = Vec::new();
        for (name, args, res) in sig.functions() {
            let mut combos: Vec<Vec<Term>> = alloc::vec![Vec::new()];
            for a in args {
                let pool: Vec<Term> = by_sort.get(a).map(|s| s.iter().cloned().collect()).unwrap_or_default();
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        pool.iter().map(move |t| {
                            let mut c = c.clone();
                            c.push(t.clone());
                            c
                        })
                    })
                    .collect();
            }
            for c in combos {
                new.push((res.into(), Term::App(Head::Symbol(name.into()), c)));
            }
        }
        for (s, t) in new {
            by_sort.entry(s).or_default().insert(t);
        }
    }
    by_sort
        .into_iter()
        .map(|(s, set)| (s, set.into_iter().collect()))
        .collect()
}

struct Engine<'a> {
    sig: &'a Signature,
    depth: usize,
}

type Justify = Option<(usize, BTreeMap<String, Term>)>;

impl Engine<'_> {
    fn skolem_name(&self, var: &str, taken: &BTreeSet<String>) -> String {
        let base = var.trim_end_matches(|c: char| c.is_ascii_digit());
        let base = if base.is_empty() { "c" } else { base };
        (1..)
            .map(|i| format!("{base}{i}"))
            .find(|n| !self.sig.is_declared(n) && !taken.contains(n))
            .unwrap()
    }

    /// Forward-chains to saturation; returns the proof of `goal` if every
    /// conclusion is reached.
    fn prove_goal(&self, shape: &GoalShape, clauses: &[Clause], rules: &[FoRule]) -> Option<GoalProof> {
        let mut taken = BTreeSet::new();
        let mut skolems = Vec::new();
        let mut locals = Vec::new();
        let mut map = BTreeMap::new();
        for block in &shape.blocks {
            let mut names = Vec::new();
            for b in block {
                let n = self.skolem_name(&b.name, &taken);
                taken.insert(n.clone());
                locals.push((n.clone(), b.ty.name().to_string()));
                map.insert(b.name.clone(), Term::Const(n.clone()));
                names.push(n);
            }
            skolems.push(names);
        }
        let targets: Vec<Atom> = shape.conclusions.iter().map(|a| ground_atom(a, &map)).collect();

        let mut index: BTreeMap<Atom, usize> = BTreeMap::new();
        let mut facts: Vec<(Atom, Justify)> = Vec::new();
        for h in &shape.premises {
            let a = ground_atom(h, &map);
            if !index.contains_key(&a) {
                index.insert(a.clone(), facts.len());
                facts.push((a, None));
            }
        }

        let mut universe: Option<BTreeMap<String, Vec<Term>>> = None;
        loop {
            let mut added = false;
            for (ri, rule) in rules.iter().enumerate() {
                let mut bindings = alloc::vec![BTreeMap::new()];
                for p in &rule.premises {
                    let mut next = Vec::new();
                    for b in &bindings {
                        for (fact, _) in &facts {
                            if let Some(nb) = match_atom(p, fact, b, self.depth) {
                                next.push(nb);
                            }
                        }
                    }
                    bindings = next;
                    if bindings.is_empty() {
                        break;
                    }
                }
                if bindings.is_empty() {
                    continue;
                }
                if rule.vars.iter().any(|(v, _)| !bindings[0].contains_key(v)) {
                    let u = universe
                        .get_or_insert_with(|| herbrand_universe(self.sig, &locals, self.depth));
                    for (v, sort) in &rule.vars {
                        let pool = u.get(sort).cloned().unwrap_or_default();
                        bindings = bindings
                            .into_iter()
                            .flat_map(|b| {
                                if b.contains_key(v) {
                                    alloc::vec![b]
                                } else {
                                    pool.iter()
                                        .map(|t| {
                                            let mut b = b.clone();
                                            b.insert(v.clone(), t.clone());
                                            b
                                        })
                                        .collect()
                                }
                            })
                            .collect();
                    }
                }
                for b in bindings {
                    for c in &rule.conclusions {
                        let a = ground_atom(c, &b);
                        if !index.contains_key(&a) {
                            index.insert(a.clone(), facts.len());
                            facts.push((a, Some((ri, b.clone()))));
                            added = true;
                        }
                    }
                }
            }
            if !added || targets.iter().all(|t| index.contains_key(t)) {
                break;
            }
        }
        if !targets.iter().all(|t| index.contains_key(t)) {
            return None;
        }

        // Walk back from the targets to the rule instances they need.
        let mut used: BTreeMap<usize, (usize, BTreeMap<String, Term>)> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = targets.iter().map(|t| index[t]).collect();
        while let Some(i) = stack.pop() {
            if !seen.insert(i) {
                continue;
            }
            if let Some((ri, b)) = &facts[i].1 {
                used.entry(i).or_insert((*ri, b.clone()));
                for p in &rules[*ri].premises {
                    stack.push(index[&ground_atom(p, b)]);
                }
            }
        }
        let mut steps: Vec<InstanceStep> = Vec::new();
        for (fi, (ri, b)) in used {
            let rule = &rules[ri];
            let clause = &clauses[rule.clause];
            let blocks: Vec<Vec<String>> = clause
                .blocks
                .iter()
                .map(|bs| {
                    bs.iter()
                        .map(|x| match &x.ty {
                            BinderType::Kind(_) => rule.symbols[&x.name].clone(),
                            BinderType::Sort(_) => format!("{}", b[&x.name]),
                        })
                        .collect()
                })
                .collect();
            match steps
                .iter_mut()
                .find(|s| s.rule == clause.name && s.blocks == blocks)
            {
                Some(s) => s.derived.push(facts[fi].0.clone()),
                None => steps.push(InstanceStep {
                    rule: clause.name.clone(),
                    blocks,
                    derived: alloc::vec![facts[fi].0.clone()],
                }),
            }
        }
        Some(GoalProof { skolems, steps })
    }
}

/// Tries to derive `goal` from `axioms`, instantiating over terms of nesting
/// at most `depth`. Always terminates.
pub fn derive_bounded(
    sig: &Signature,
    axioms: &BTreeMap<String, Formula>,
    goal: &Formula,
    depth: usize,
) -> Result<DeriveVerdict, DeriveError> {
    if depth == 0 {
        return Err(DeriveError::ZeroDepth);
    }
    let goal_shape_ = goal_shape("goal", goal)?;
    let mut clauses: Vec<Clause> = axioms
        .iter()
        .map(|(n, f)| clause_of(n, f))
        .collect::<Result<_, _>>()?;
    let mut known: Vec<(String, Formula)> =
        axioms.iter().map(|(n, f)| (n.clone(), f.clone())).collect();
    let mut lemmas: Vec<DerivedLemma> = Vec::new();
    let mut fired: BTreeSet<(usize, BTreeMap<String, String>)> = BTreeSet::new();
    let engine = Engine { sig, depth };
    let mut counter = 0usize;
    let mut fresh_name = |known: &[(String, Formula)]| loop {
        counter += 1;
        let n = format!("L{counter}");
        if !known.iter().any(|(k, _)| *k == n) && !axioms.contains_key(&n) {
            return n;
        }
    };
    let find = |known: &[(String, Formula)], f: &Formula| {
        known.iter().find(|(_, g)| g.alpha_eq(f)).map(|(n, _)| n.clone())
    };

    loop {
        let rules = fo_rules(sig, &clauses);
        let mut changed = false;
        let n_clauses = clauses.len();
        for ci in 0..n_clauses {
            if !clauses[ci].higher_order() {
                continue;
            }
            for assign in so_assignments(sig, &clauses[ci]) {
                if fired.contains(&(ci, assign.clone())) {
                    continue;
                }
                let map = symbol_map(&assign);
                let clause = clauses[ci].clone();
                let mut premise_names = Vec::new();
                let mut ok = true;
                for p in clause.premises.iter().map(|p| p.subst(&map)) {
                    if let Some(n) = find(&known, &p) {
                        premise_names.push(n);
                        continue;
                    }
                    let shape = goal_shape(&clause.name, &p)?;
                    match engine.prove_goal(&shape, &clauses, &rules) {
                        Some(proof) => {
                            let name = fresh_name(&known);
                            clauses.push(clause_of(&name, &p)?);
                            known.push((name.clone(), p.clone()));
                            lemmas.push(DerivedLemma {
                                name: name.clone(),
                                formula: p,
                                justification: Justification::Proved(proof),
                            });
                            premise_names.push(name);
                            changed = true;
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                fired.insert((ci, assign.clone()));
                let blocks: Vec<Vec<String>> = clause
                    .blocks
                    .iter()
                    .map(|bs| bs.iter().map(|b| assign[&b.name].clone()).collect())
                    .collect();
                for c in clause.conclusions.iter().map(|c| c.subst(&map)) {
                    if find(&known, &c).is_some() {
                        continue;
                    }
                    let name = fresh_name(&known);
                    clauses.push(clause_of(&name, &c)?);
                    known.push((name.clone(), c.clone()));
                    lemmas.push(DerivedLemma {
                        name,
                        formula: c,
                        justification: Justification::Instance {
                            rule: clause.name.clone(),
                            blocks: blocks.clone(),
                            premises: premise_names.clone(),
                        },
                    });
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let rules = fo_rules(sig, &clauses);
    let Some(proof) = engine.prove_goal(&goal_shape_, &clauses, &rules) else {
        return Ok(DeriveVerdict::NotDerivable { depth });
    };

    // Keep only the lemmas the proof depends on.
    let by_name: BTreeMap<&str, &DerivedLemma> = lemmas.iter().map(|l| (l.name.as_str(), l)).collect();
    let mut needed = BTreeSet::new();
    let mut stack: Vec<String> = proof.steps.iter().map(|s| s.rule.clone()).collect();
    while let Some(n) = stack.pop() {
        let Some(l) = by_name.get(n.as_str()) else { continue };
        if !needed.insert(n) {
            continue;
        }
        match &l.justification {
            Justification::Proved(p) => stack.extend(p.steps.iter().map(|s| s.rule.clone())),
            Justification::Instance { rule, premises, .. } => {
                stack.push(rule.clone());
                stack.extend(premises.iter().cloned());
            }
        }
    }
    let lemmas = lemmas
        .into_iter()
        .filter(|l| needed.contains(&l.name))
        .collect();
    Ok(DeriveVerdict::Derivable(Derivation {
        goal: goal.clone(),
        depth,
        lemmas,
        proof,
    }))
}
