//! Fluted-fragment membership checking and fragment classification.
//!
//! A formula is fluted when every atom applies its predicate to a contiguous
//! ascending run of variables ending at the innermost live variable, and
//! every quantifier binds only that innermost variable. Membership is
//! tracked as a level: an atom ending at `x_k` lives at level `k`, boolean
//! combinations require equal levels, and a quantifier over `x_v` lowers
//! level `v` to `v - 1`. Atoms with no arguments live at every level.

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::signature::Signature;

/// Outcome of a flutedness check. `level` is the level the whole formula
/// lives at (0 for a sentence quantified from `x1` outward); when the
/// formula only has levelless parts the minimal level 0 is reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlutednessReport {
    pub is_fluted: bool,
    /// Number of distinct variables used (bound or free).
    pub variable_count: usize,
    pub level: usize,
    pub first_violation: Option<String>,
}

/// `Ok(None)` means the subformula fits every level; `Ok(Some(k))` means it
/// lives exactly at level `k`; `Err` carries the first violation found.
fn level_of(f: &Formula) -> std::result::Result<Option<usize>, String> {
    match f {
        Formula::True | Formula::False => Ok(None),
        Formula::Atom { args, .. } => {
            if args.is_empty() {
                Ok(None)
            } else if args.windows(2).all(|w| w[1] == w[0] + 1) {
                Ok(Some(*args.last().unwrap()))
            } else {
                Err(format!(
                    "atom `{f}` must apply to consecutive variables x{}..x{} ending at the innermost one",
                    args.iter().min().unwrap(),
                    args.iter().max().unwrap()
                ))
            }
        }
        Formula::Eq(i, j) => {
            if *j == *i + 1 {
                Ok(Some(*j))
            } else {
                Err(format!("equality `{f}` must relate consecutive variables"))
            }
        }
        Formula::Not(g) => level_of(g),
        Formula::And(l, r)
        | Formula::Or(l, r)
        | Formula::Implies(l, r)
        | Formula::Iff(l, r) => {
            let a = level_of(l)?;
            let b = level_of(r)?;
            match (a, b) {
                (None, x) | (x, None) => Ok(x),
                (Some(p), Some(q)) if p == q => Ok(Some(p)),
                (Some(p), Some(q)) => Err(format!(
                    "subformulas `{l}` and `{r}` end at different variables x{p} and x{q}"
                )),
            }
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => match level_of(g)? {
            Some(k) if k != *v => Err(format!(
                "quantifier binds x{v} but its body ends at x{k}; only the innermost variable may be bound"
            )),
            _ => Ok(Some(v - 1)),
        },
    }
}

/// Checks fluted membership. Never fails; violations land in the report.
pub fn validate_fluted(f: &Formula) -> FlutednessReport {
    let variable_count = f.vars_used().len();
    match level_of(f) {
        Ok(level) => FlutednessReport {
            is_fluted: true,
            variable_count,
            level: level.unwrap_or(0),
            first_violation: None,
        },
        Err(msg) => FlutednessReport {
            is_fluted: false,
            variable_count,
            level: 0,
            first_violation: Some(msg),
        },
    }
}

/// Returns the tightest fragment tag for a fluted formula:
/// `FL^m` when no distinguished predicate occurs, `FL^2 kT^u` when the
/// formula is two-variable and mentions no non-distinguished binary
/// predicate and no equality, `FL^m kT` otherwise. `k` counts the
/// distinguished predicates that actually occur.
pub fn classify_fragment(f: &Formula, sig: &Signature) -> Result<String> {
    f.validate(sig)?;
    let report = validate_fluted(f);
    if !report.is_fluted {
        return Err(Error::NotFluted(
            report.first_violation.unwrap_or_else(|| "unknown violation".into()),
        ));
    }
    let m = report.variable_count;
    let occurring = f.predicates();
    let k = occurring
        .iter()
        .filter(|p| sig.is_distinguished(p))
        .count();
    if k == 0 {
        return Ok(format!("FL^{m}"));
    }
    let other_binary = occurring
        .iter()
        .any(|p| !sig.is_distinguished(p) && sig.arity(p) == Some(2));
    if m == 2 && !other_binary && !f.uses_equality() {
        Ok(format!("FL^2 {k}T^u"))
    } else {
        Ok(format!("FL^{m} {k}T"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn sig() -> Signature {
        let mut s = Signature::new();
        for p in ["student", "prof", "lecturer"] {
            s.declare(p, 1).unwrap();
        }
        s.declare("p", 1).unwrap();
        s.declare("z", 0).unwrap();
        s.declare("admires", 2).unwrap();
        s.declare("r", 2).unwrap();
        s.declare("intro", 3).unwrap();
        s.declare_transitive("t").unwrap();
        s.set_equality(true);
        s
    }

    #[test]
    fn accepts_the_two_variable_example() {
        let f = parse_formula(
            "forall x1 (student(x1) -> ~forall x2 (prof(x2) -> admires(x1,x2)))",
            &sig(),
        )
        .unwrap();
        let r = validate_fluted(&f);
        assert!(r.is_fluted);
        assert_eq!(r.variable_count, 2);
        assert_eq!(r.level, 0);
    }

    #[test]
    fn accepts_the_three_variable_example() {
        let f = parse_formula(
            "forall x1 (lecturer(x1) -> ~exists x2 (prof(x2) & forall x3 (student(x3) -> intro(x1,x2,x3))))",
            &sig(),
        )
        .unwrap();
        let r = validate_fluted(&f);
        assert!(r.is_fluted);
        assert_eq!(r.variable_count, 3);
        assert_eq!(classify_fragment(&f, &sig()).unwrap(), "FL^3");
    }

    #[test]
    fn rejects_reflexivity_symmetry_transitivity() {
        let s = sig();
        for text in [
            "forall x1 r(x1,x1)",
            "forall x1 forall x2 (r(x1,x2) -> r(x2,x1))",
            "forall x1 forall x2 forall x3 (r(x1,x2) & r(x2,x3) -> r(x1,x3))",
        ] {
            let f = parse_formula(text, &s).unwrap();
            let r = validate_fluted(&f);
            assert!(!r.is_fluted, "accepted `{text}`");
            assert!(r.first_violation.is_some());
        }
    }

    #[test]
    fn accepts_suffix_atoms_and_constants() {
        let s = sig();
        let f = parse_formula("forall x1 exists x2 (t(x1,x2) & p(x2))", &s).unwrap();
        let r = validate_fluted(&f);
        assert!(r.is_fluted);
        assert_eq!(r.variable_count, 2);

        let g = parse_formula("forall x1 (z & p(x1) -> exists x2 t(x1,x2))", &s).unwrap();
        assert!(validate_fluted(&g).is_fluted);

        let open = parse_formula("p(x1) & exists x2 t(x1,x2)", &s).unwrap();
        let ro = validate_fluted(&open);
        assert!(ro.is_fluted);
        assert_eq!(ro.level, 1);
    }

    #[test]
    fn rejects_wrong_binder() {
        let s = sig();
        let f = parse_formula("exists x2 p(x1)", &s).unwrap();
        assert!(!validate_fluted(&f).is_fluted);
    }

    #[test]
    fn equality_behaves_like_a_binary_suffix_atom() {
        let s = sig();
        let f = parse_formula("forall x1 forall x2 (t(x1,x2) -> x1 = x2)", &s).unwrap();
        assert!(validate_fluted(&f).is_fluted);
        let g = parse_formula("forall x1 x1 = x1", &s).unwrap();
        assert!(!validate_fluted(&g).is_fluted);
    }

    #[test]
    fn classifies_fragments() {
        let s = sig();
        let u = parse_formula("forall x1 (p(x1) -> exists x2 (t(x1,x2) & p(x2)))", &s).unwrap();
        assert_eq!(classify_fragment(&u, &s).unwrap(), "FL^2 1T^u");

        let with_r =
            parse_formula("forall x1 (p(x1) -> exists x2 (t(x1,x2) & r(x1,x2)))", &s).unwrap();
        assert_eq!(classify_fragment(&with_r, &s).unwrap(), "FL^2 1T");

        let no_t = parse_formula("forall x1 p(x1)", &s).unwrap();
        assert_eq!(classify_fragment(&no_t, &s).unwrap(), "FL^1");

        let eq = parse_formula(
            "forall x1 forall x2 (t(x1,x2) -> x1 = x2)",
            &s,
        )
        .unwrap();
        assert_eq!(classify_fragment(&eq, &s).unwrap(), "FL^2 1T");

        let not_fluted = parse_formula("forall x1 r(x1,x1)", &s).unwrap();
        assert!(matches!(
            classify_fragment(&not_fluted, &s),
            Err(Error::NotFluted(_))
        ));
    }
}
