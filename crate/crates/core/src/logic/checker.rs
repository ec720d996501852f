//! Replays a proof script against a sequent, PVS style.
//!
//! The sequent starts as `⊢ goal`. Antecedents are addressed `-1, -2, ...`
//! and consequents `1, 2, ...`; `lemma` inserts at `-1`, pushing the others
//! down. The checker does no search: each command either transforms the
//! sequent or the script is rejected at that step.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::formula::{BinderType, Formula, Replacement, Term};
use super::parser::parse_term;
use super::signature::{is_identifier, Signature};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Insert a named axiom or lemma as antecedent `-1`.
    Lemma(String),
    /// Replace the top quantifier block of a consequent by fresh constants.
    Skolem { position: i64, names: Vec<String> },
    /// Instantiate the top quantifier block of an antecedent. Each argument is
    /// a ground term (first-order binder) or a declared symbol name
    /// (second-order binder).
    Inst { position: i64, args: Vec<String> },
    /// Close the sequent by propositional reasoning, treating atoms and
    /// quantified subformulas as opaque.
    Prop,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Lemma(n) => write!(f, "lemma {n}"),
            Command::Skolem { position, names } => write!(f, "skolem {position} {}", names.join(" ")),
            Command::Inst { position, args } => write!(f, "inst {position} {}", args.join(" ")),
            Command::Prop => f.write_str("prop"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ScriptSyntaxError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProofScript {
    pub commands: Vec<Command>,
}

// Splits on whitespace outside parentheses and strips double quotes.
fn tokens(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in line.chars() {
        match c {
            '"' => {}
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(core::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl ProofScript {
    pub fn new(commands: Vec<Command>) -> Self {
        Self { commands }
    }

    /// Reads one command per line. Blank lines and `#` comments are skipped;
    /// PVS-style `(lemma E2)` and quoted arguments are tolerated.
    pub fn parse(text: &str) -> Result<Self, ScriptSyntaxError> {
        let mut commands = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let mut line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('(') && line.ends_with(')') {
                line = line[1..line.len() - 1].trim();
            }
            let err = |reason: String| ScriptSyntaxError {
                line: line_no,
                reason,
            };
            let toks = tokens(line);
            let Some(first) = toks.first() else { continue };
            let position = |t: Option<&String>| -> Result<i64, ScriptSyntaxError> {
                t.and_then(|s| s.parse::<i64>().ok())
                    .filter(|p| *p != 0)
                    .ok_or_else(|| err("expected a non-zero formula position".into()))
            };
            let cmd = match first.as_str() {
                "lemma" => match toks.as_slice() {
                    [_, name] => Command::Lemma(name.clone()),
                    _ => return Err(err("usage: lemma NAME".into())),
                },
                "skolem" => {
                    let position = position(toks.get(1))?;
                    let names: Vec<String> = toks[2..]
                        .iter()
                        .flat_map(|t| {
                            t.trim_matches(|c| c == '(' || c == ')')
                                .split_whitespace()
                                .map(ToString::to_string)
                                .collect::<Vec<_>>()
                        })
                        .collect();
                    if names.is_empty() {
                        return Err(err("usage: skolem POSITION NAME...".into()));
                    }
                    Command::Skolem { position, names }
                }
                "inst" => {
                    let position = position(toks.get(1))?;
                    if toks.len() < 3 {
                        return Err(err("usage: inst POSITION TERM...".into()));
                    }
                    Command::Inst {
                        position,
                        args: toks[2..].to_vec(),
                    }
                }
                "prop" if toks.len() == 1 => Command::Prop,
                other => return Err(err(format!("unknown command `{other}`"))),
            };
            commands.push(cmd);
        }
        Ok(Self { commands })
    }
}

impl fmt::Display for ProofScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.commands {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sequent {
    pub antecedents: Vec<Formula>,
    pub consequents: Vec<Formula>,
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.antecedents.iter().enumerate() {
            writeln!(f, "[-{}] {a}", i + 1)?;
        }
        writeln!(f, "  |-------")?;
        for (i, c) in self.consequents.iter().enumerate() {
            writeln!(f, "[{}] {c}", i + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub command: Command,
    /// `None` once the command closed the proof.
    pub sequent: Option<Sequent>,
}

/// Replayable record of an accepted proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: Sequent,
    pub steps: Vec<TraceStep>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.initial)?;
        for s in &self.steps {
            writeln!(f, "\nRule? ({})", s.command)?;
            match &s.sequent {
                Some(seq) => write!(f, "{seq}")?,
                None => writeln!(f, "Q.E.D.")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accepted(Trace),
    Rejected {
        /// 1-based index of the failing command; `commands.len() + 1` when
        /// the script ran out with the sequent still open.
        step: usize,
        reason: String,
    },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted(_))
    }
}

struct State<'a> {
    sig: Signature,
    axioms: &'a BTreeMap<String, Formula>,
    seq: Sequent,
}

impl State<'_> {
    fn step(&mut self, cmd: &Command) -> Result<bool, String> {
        match cmd {
            Command::Lemma(name) => {
                let f = self
                    .axioms
                    .get(name)
                    .ok_or_else(|| format!("no axiom or lemma named `{name}`"))?;
                self.seq.antecedents.insert(0, f.clone());
                Ok(false)
            }
            Command::Skolem { position, names } => {
                if *position < 0 {
                    return Err(format!("skolem needs a consequent position, got {position}"));
                }
                let idx = (*position - 1) as usize;
                let f = self
                    .seq
                    .consequents
                    .get(idx)
                    .ok_or_else(|| format!("no consequent at position {position}"))?;
                let Formula::Forall(binders, body) = f else {
                    return Err(format!("consequent {position} is not universally quantified"));
                };
                if binders.len() != names.len() {
                    return Err(format!(
                        "quantifier binds {} variable(s) but {} name(s) were given",
                        binders.len(),
                        names.len()
                    ));
                }
                let mut map = BTreeMap::new();
                for (b, n) in binders.iter().zip(names) {
                    let BinderType::Sort(sort) = &b.ty else {
                        return Err(format!("cannot skolemize second-order variable `{}`", b.name));
                    };
                    if !is_identifier(n) || self.sig.is_declared(n) {
                        return Err(format!("skolem constant `{n}` is not fresh"));
                    }
                    self.sig
                        .add_constant(n, sort)
                        .map_err(|e| e.to_string())?;
                    map.insert(b.name.clone(), Replacement::Term(Term::Const(n.clone())));
                }
                let new = body.subst(&map);
                self.seq.consequents[idx] = new;
                Ok(false)
            }
            Command::Inst { position, args } => {
                if *position > 0 {
                    return Err(format!("inst needs an antecedent position, got {position}"));
                }
                let idx = (-*position - 1) as usize;
                let f = self
                    .seq
                    .antecedents
                    .get(idx)
                    .ok_or_else(|| format!("no antecedent at position {position}"))?;
                let Formula::Forall(binders, body) = f else {
                    return Err(format!("antecedent {position} is not universally quantified"));
                };
                if binders.len() != args.len() {
                    return Err(format!(
                        "quantifier binds {} variable(s) but {} term(s) were given",
                        binders.len(),
                        args.len()
                    ));
                }
                let mut map = BTreeMap::new();
                for (b, a) in binders.iter().zip(args) {
                    let rep = match &b.ty {
                        BinderType::Sort(sort) => {
                            let (t, got) = parse_term(a, &self.sig)
                                .map_err(|e| format!("argument `{a}`: {e}"))?;
                            if &got != sort {
                                return Err(format!(
                                    "sort mismatch: `{a}` has sort {got}, `{}` needs {sort}",
                                    b.name
                                ));
                            }
                            Replacement::Term(t)
                        }
                        BinderType::Kind(k) => {
                            let kind = self
                                .sig
                                .kind(k)
                                .ok_or_else(|| format!("unknown kind {k}"))?;
                            if !self.sig.symbol_has_kind(a, kind) {
                                return Err(format!(
                                    "sort mismatch: `{a}` is not a declared symbol of kind {k}"
                                ));
                            }
                            Replacement::Symbol(a.clone())
                        }
                    };
                    map.insert(b.name.clone(), rep);
                }
                let new = body.subst(&map);
                self.seq.antecedents[idx] = new;
                Ok(false)
            }
            Command::Prop => {
                let ants: Vec<&Formula> = self.seq.antecedents.iter().collect();
                let cons: Vec<&Formula> = self.seq.consequents.iter().collect();
                if prop_valid(ants, cons) {
                    Ok(true)
                } else {
                    Err("propositional reasoning cannot close the sequent".into())
                }
            }
        }
    }
}

/// Runs `script` on `⊢ goal`. Deterministic and total: every command does a
/// bounded amount of work and there is no backtracking over commands.
pub fn check_script(
    sig: &Signature,
    axioms: &BTreeMap<String, Formula>,
    goal: &Formula,
    script: &ProofScript,
) -> Verdict {
    let initial = Sequent {
        antecedents: Vec::new(),
        consequents: alloc::vec![goal.clone()],
    };
    let mut st = State {
        sig: sig.clone(),
        axioms,
        seq: initial.clone(),
    };
    let mut steps = Vec::new();
    for (i, cmd) in script.commands.iter().enumerate() {
        match st.step(cmd) {
            Ok(true) => {
                steps.push(TraceStep {
                    command: cmd.clone(),
                    sequent: None,
                });
                if i + 1 < script.commands.len() {
                    return Verdict::Rejected {
                        step: i + 2,
                        reason: "proof is already complete".into(),
                    };
                }
                return Verdict::Accepted(Trace { initial, steps });
            }
            Ok(false) => steps.push(TraceStep {
                command: cmd.clone(),
                sequent: Some(st.seq.clone()),
            }),
            Err(reason) => {
                return Verdict::Rejected {
                    step: i + 1,
                    reason: format!("{cmd}: {reason}"),
                }
            }
        }
    }
    Verdict::Rejected {
        step: script.commands.len() + 1,
        reason: "proof incomplete: the sequent is still open".into(),
    }
}

fn is_opaque(f: &Formula) -> bool {
    matches!(f, Formula::Atom(_) | Formula::Forall(..))
}

fn contains(set: &[&Formula], f: &Formula) -> bool {
    set.iter().any(|g| g.alpha_eq(f))
}

// Premise already available without branching.
fn immediate(ants: &[&Formula], f: &Formula) -> bool {
    match f {
        Formula::And(a, b) => immediate(ants, a) && immediate(ants, b),
        _ => contains(ants, f),
    }
}

/// Decides `ants ⊢ cons` for the implication/conjunction fragment with a
/// cut-free sequent calculus. All rules are invertible, so the choice of
/// which formula to decompose only affects speed.
pub(crate) fn prop_valid<'a>(mut ants: Vec<&'a Formula>, mut cons: Vec<&'a Formula>) -> bool {
    // non-branching rules first
    loop {
        if let Some(i) = ants.iter().position(|f| matches!(f, Formula::And(..))) {
            let Formula::And(a, b) = ants.swap_remove(i) else { unreachable!() };
            ants.push(a);
            ants.push(b);
            continue;
        }
        if let Some(i) = cons.iter().position(|f| matches!(f, Formula::Implies(..))) {
            let Formula::Implies(a, b) = cons.swap_remove(i) else { unreachable!() };
            ants.push(a);
            cons.push(b);
            continue;
        }
        break;
    }
    let opaque_left: Vec<&Formula> = ants.iter().copied().filter(|f| is_opaque(f)).collect();
    if cons.iter().any(|c| is_opaque(c) && contains(&opaque_left, c)) {
        return true;
    }

    let imps: Vec<usize> = ants
        .iter()
        .enumerate()
        .filter(|(_, f)| matches!(f, Formula::Implies(..)))
        .map(|(i, _)| i)
        .collect();
    let ready = imps.iter().copied().find(|&i| {
        let Formula::Implies(a, _) = ants[i] else { unreachable!() };
        immediate(&opaque_left, a)
    });
    if let Some(i) = ready {
        let Formula::Implies(_, b) = ants.swap_remove(i) else { unreachable!() };
        ants.push(b);
        return prop_valid(ants, cons);
    }
    if let Some(i) = cons.iter().position(|f| matches!(f, Formula::And(..))) {
        let Formula::And(a, b) = cons.swap_remove(i) else { unreachable!() };
        let mut left = cons.clone();
        left.push(a);
        cons.push(b);
        return prop_valid(ants.clone(), left) && prop_valid(ants, cons);
    }
    if let Some(&i) = imps.first() {
        let Formula::Implies(a, b) = ants.swap_remove(i) else { unreachable!() };
        let mut need = cons.clone();
        need.push(a);
        let mut with_b = ants.clone();
        with_b.push(b);
        return prop_valid(ants, need) && prop_valid(with_b, cons);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::parse_formula;

    fn f(s: &str) -> Formula {
        let mut sig = Signature::perception();
        sig.add_constant("c", "BB").unwrap();
        sig.add_constant("e", "BB").unwrap();
        parse_formula(s, &sig).unwrap()
    }

    #[test]
    fn prop_modus_ponens_and_failure() {
        let a = f("Cover(c, e)");
        let b = f("Cover(e, c)");
        let ab = f("Cover(c, e) -> Cover(e, c)");
        assert!(prop_valid(alloc::vec![&a, &ab], alloc::vec![&b]));
        assert!(!prop_valid(alloc::vec![&ab], alloc::vec![&b]));
        // Peirce-free classical tautology in the fragment
        let taut = f("Cover(c, e) & Cover(e, c) -> Cover(e, c) & Cover(c, e)");
        assert!(prop_valid(alloc::vec![], alloc::vec![&taut]));
    }

    #[test]
    fn prop_treats_quantifiers_up_to_renaming() {
        let p = f("FORALL x:BB: Cover(x, x)");
        let q = f("FORALL y:BB: Cover(y, y)");
        assert!(prop_valid(alloc::vec![&p], alloc::vec![&q]));
        let r = f("FORALL y:BB: Cover(y, c)");
        assert!(!prop_valid(alloc::vec![&p], alloc::vec![&r]));
    }

    #[test]
    fn script_text_format() {
        let s = ProofScript::parse(
            "# E5\nlemma E2\n(lemma E3)\nskolem 1 (\"d1\")\ninst -1 Enlarge(DNN(d1)) label(d1) ground_truth(d1)\nprop\n",
        )
        .unwrap();
        assert_eq!(s.commands.len(), 5);
        assert_eq!(s.commands[1], Command::Lemma("E3".into()));
        assert_eq!(
            s.commands[2],
            Command::Skolem {
                position: 1,
                names: alloc::vec!["d1".into()]
            }
        );
        let Command::Inst { position, args } = &s.commands[3] else { panic!() };
        assert_eq!(*position, -1);
        assert_eq!(args.len(), 3);
        assert!(ProofScript::parse("grind").is_err());
        assert!(ProofScript::parse("inst 0 d1").is_err());
        assert!(ProofScript::parse("lemma").is_err());
        // display round trip
        assert_eq!(ProofScript::parse(&alloc::format!("{s}")).unwrap(), s);
    }

    #[test]
    fn inst_arguments_with_spaces_survive_tokenizing() {
        let s = ProofScript::parse("inst -1 f(a, b) c").unwrap();
        let Command::Inst { args, .. } = &s.commands[0] else { panic!() };
        assert_eq!(args, &alloc::vec!["f(a, b)".to_string(), "c".into()]);
    }
}
