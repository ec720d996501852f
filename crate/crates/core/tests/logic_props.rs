use proptest::prelude::*;
use safebox_core::logic::{
    check_bundle, derive_bounded, parse_formula, perception, Atom, Axioms, Binder, BinderType, Formula, Head,
    Signature, Term,
};

fn app(f: &str, args: Vec<Term>) -> Term {
    Term::App(Head::Symbol(f.into()), args)
}

fn img_term() -> impl Strategy<Value = Term> {
    prop_oneof![Just(Term::Var("d".into())), Just(Term::Var("e".into()))]
}

fn bb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::Var("A".into())),
        img_term().prop_map(|d| app("DNN", vec![d])),
        img_term().prop_map(|d| app("label", vec![d])),
        img_term().prop_map(|d| app("ground_truth", vec![d])),
    ];
    leaf.prop_recursive(2, 4, 1, |inner| inner.prop_map(|t| app("Enlarge", vec![t])))
}

fn atom() -> impl Strategy<Value = Formula> {
    let atom = |p: &str, args| Formula::Atom(Atom { head: Head::Symbol(p.into()), args });
    prop_oneof![
        (bb_term(), bb_term()).prop_map(move |(a, b)| atom("Cover", vec![a, b])),
        img_term().prop_map(move |d| atom("Training", vec![d])),
        img_term().prop_map(move |d| atom("ODD", vec![d])),
    ]
}

fn binder(name: &str, sort: &str) -> Binder {
    Binder { name: name.into(), ty: BinderType::Sort(sort.into()) }
}

/// Closed formulas: `d` and `A` bound at the top, `e` by inner quantifiers.
fn formula() -> impl Strategy<Value = Formula> {
    let body = atom().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            inner.prop_map(|f| Formula::forall(vec![binder("e", "IMG")], f)),
        ]
    });
    body.prop_map(|f| {
        Formula::forall(
            vec![binder("d", "IMG"), binder("e", "IMG"), binder("A", "BB")],
            f,
        )
    })
}

proptest! {
    #[test]
    fn printing_then_parsing_is_identity(f in formula()) {
        let sig = Signature::perception();
        let text = f.to_string();
        let back = parse_formula(&text, &sig).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert!(back.alpha_eq(&f));
    }
}

fn subsets(names: &[&'static str]) -> Vec<Vec<&'static str>> {
    (0..1u32 << names.len())
        .map(|mask| names.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, n)| *n).collect())
        .collect()
}

#[test]
fn depth_monotone_and_every_derivation_checks() {
    let sig = Signature::perception();
    for goal_name in ["E5", "G1"] {
        let goal = perception::formula(goal_name);
        for names in subsets(&["E1", "E2", "E3", "E4", "E5"]) {
            if names.contains(&goal_name) {
                continue;
            }
            let axioms: Axioms = perception::axioms(&names);
            let mut before = false;
            for depth in 1..=3 {
                let verdict = derive_bounded(&sig, &axioms, &goal, depth).unwrap();
                let now = verdict.is_derivable();
                assert!(!before || now, "{goal_name} from {names:?}: derivable at depth {} but not {depth}", depth - 1);
                if let safebox_core::logic::DeriveVerdict::Derivable(d) = verdict {
                    check_bundle(&sig, &axioms, &d.to_scripts())
                        .unwrap_or_else(|e| panic!("{goal_name} from {names:?} at depth {depth}: {e}"));
                }
                before = now;
            }
        }
    }
}
