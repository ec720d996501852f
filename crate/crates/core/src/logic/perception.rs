//! The pedestrian-detection argument: evidence E1-E4, the derived lemma E5,
//! and the safety goal G1, over [`Signature::perception`].

use alloc::string::String;
use alloc::vec::Vec;

use super::{parse_formula, Axioms, ProofScript, Signature};

/// Training behavior carries over to the operational domain, for every
/// behavior and every pair of transformations.
pub const E1: &str = "FORALL Behavior:BEHAVIOR, f1:F1, f2:F2: \
(FORALL d:IMG: Training(d) -> Behavior(f1(DNN(d)), f2(d))) -> \
(FORALL d_op:IMG: ODD(d_op) -> Behavior(f1(DNN(d_op)), f2(d_op)))";
/// On training images, the enlarged prediction covers the label.
pub const E2: &str = "FORALL d:IMG: Training(d) -> Cover(Enlarge(DNN(d)), label(d))";
/// On training images, the label covers the object.
pub const E3: &str = "FORALL d:IMG: Training(d) -> Cover(label(d), ground_truth(d))";
/// Containment is transitive.
pub const E4: &str = "FORALL A:BB, B:BB, C:BB: (Cover(A, B) & Cover(B, C)) -> Cover(A, C)";
/// On training images, the enlarged prediction covers the object.
pub const E5: &str = "FORALL d:IMG: Training(d) -> Cover(Enlarge(DNN(d)), ground_truth(d))";
/// In the operational domain, the enlarged prediction covers the object.
pub const G1: &str = "FORALL d:IMG: ODD(d) -> Cover(Enlarge(DNN(d)), ground_truth(d))";

pub const ALL: [(&str, &str); 6] = [("E1", E1), ("E2", E2), ("E3", E3), ("E4", E4), ("E5", E5), ("G1", G1)];

/// E5 from {E2, E3, E4}: cite the evidence, fix an image, instantiate, close.
pub const E5_SCRIPT: &str = "\
lemma E2
lemma E3
lemma E4
skolem 1 d1
inst -2 d1
inst -3 d1
inst -1 Enlarge(DNN(d1)) label(d1) ground_truth(d1)
prop
";

/// G1 from {E1, E5}: instantiate E1 with Cover, Enlarge and ground_truth.
pub const G1_SCRIPT: &str = "\
lemma E1
lemma E5
inst -2 Cover Enlarge ground_truth
prop
";

/// Parses the named formulas (panics only if the built-in text is broken).
pub fn axioms(names: &[&str]) -> Axioms {
    let sig = Signature::perception();
    names
        .iter()
        .map(|n| {
            let text = ALL.iter().find(|(k, _)| k == n).map(|(_, t)| *t).expect("unknown formula");
            (String::from(*n), parse_formula(text, &sig).expect("built-in formula"))
        })
        .collect()
}

pub fn formula(name: &str) -> super::Formula {
    axioms(&[name]).into_values().next().unwrap()
}

pub fn scripts() -> Vec<(&'static str, ProofScript)> {
    alloc::vec![
        ("E5", ProofScript::parse(E5_SCRIPT).unwrap()),
        ("G1", ProofScript::parse(G1_SCRIPT).unwrap()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_script, derive_bounded, DeriveVerdict, Verdict};

    fn check(goal: &str, ax: &[&str], script: &str) -> Verdict {
        check_script(
            &Signature::perception(),
            &axioms(ax),
            &formula(goal),
            &ProofScript::parse(script).unwrap(),
        )
    }

    #[test]
    fn e5_script_is_accepted() {
        let v = check("E5", &["E2", "E3", "E4"], E5_SCRIPT);
        let Verdict::Accepted(trace) = v else { panic!("{v:?}") };
        assert_eq!(trace.steps.len(), 8);
        assert!(trace.steps.last().unwrap().sequent.is_none());
    }

    #[test]
    fn g1_script_is_accepted() {
        let v = check("G1", &["E1", "E5"], G1_SCRIPT);
        assert!(v.is_accepted(), "{v:?}");
    }

    #[test]
    fn rejections_name_the_step() {
        let v = check("E5", &["E2", "E4"], E5_SCRIPT);
        assert!(matches!(v, Verdict::Rejected { step: 2, .. }), "{v:?}");
        // prop without the transitivity instance cannot close
        let v = check("E5", &["E2", "E3", "E4"], "lemma E2\nlemma E3\nskolem 1 d1\ninst -1 d1\ninst -2 d1\nprop\n");
        assert!(matches!(v, Verdict::Rejected { step: 6, .. }), "{v:?}");
        // wrong sort
        let v = check("E5", &["E2"], "lemma E2\ninst -1 Enlarge\n");
        assert!(matches!(v, Verdict::Rejected { step: 2, ref reason } if reason.contains("Enlarge")), "{v:?}");
        // second-order argument of the wrong kind
        let v = check("G1", &["E1", "E5"], "lemma E1\nlemma E5\ninst -2 Cover DNN ground_truth\nprop\n");
        assert!(matches!(v, Verdict::Rejected { step: 3, .. }), "{v:?}");
        // skolem name clashing with a declared symbol
        let v = check("E5", &["E2"], "skolem 1 DNN\n");
        assert!(matches!(v, Verdict::Rejected { step: 1, .. }));
        // running out of commands
        let v = check("E5", &["E2"], "lemma E2\n");
        assert!(matches!(v, Verdict::Rejected { step: 2, .. }));
        // commands after Q.E.D.
        let v = check("G1", &["E1", "E5"], &alloc::format!("{G1_SCRIPT}prop\n"));
        assert!(matches!(v, Verdict::Rejected { step: 5, .. }));
    }

    #[test]
    fn derive_reproduces_sufficiency_findings() {
        let sig = Signature::perception();
        let g1 = formula("G1");
        let full = derive_bounded(&sig, &axioms(&["E1", "E2", "E3", "E4"]), &g1, 3).unwrap();
        assert!(full.is_derivable());
        let no_e3 = derive_bounded(&sig, &axioms(&["E1", "E2", "E4"]), &g1, 3).unwrap();
        assert_eq!(no_e3, DeriveVerdict::NotDerivable { depth: 3 });
        let e1e2 = derive_bounded(&sig, &axioms(&["E1", "E2"]), &g1, 3).unwrap();
        assert!(!e1e2.is_derivable());
        let e5 = derive_bounded(&sig, &axioms(&["E2", "E3", "E4"]), &formula("E5"), 2).unwrap();
        assert!(e5.is_derivable());
        // Enlarge(DNN(d1)) has nesting 2
        let shallow = derive_bounded(&sig, &axioms(&["E2", "E3", "E4"]), &formula("E5"), 1).unwrap();
        assert!(!shallow.is_derivable());
    }
}
