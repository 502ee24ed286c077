//! Formula evaluation over finite structures.
//!
//! Two independent evaluators are provided: a top-down recursive one
//! (`evaluate`) and a bottom-up one computing full satisfying-tuple sets
//! (`satisfying_tuples`). They share nothing but the AST, so agreement
//! between them is a meaningful cross-check.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::signature::Signature;
use crate::structure::Structure;

/// Standard Tarskian evaluation. `assignment[i]` binds `x_{i+1}`; the free
/// variables of `f` must all be covered.
pub fn evaluate(s: &Structure, f: &Formula, assignment: &[usize], sig: &Signature) -> Result<bool> {
    f.validate(sig)?;
    if let Some(&bad) = assignment.iter().find(|&&e| e >= s.domain) {
        return Err(Error::InvalidStructure(format!(
            "assignment element {bad} outside the domain 0..{}",
            s.domain
        )));
    }
    let width = f.vars_used().into_iter().max().unwrap_or(0);
    let mut env: Vec<Option<usize>> = vec![None; width.max(assignment.len()) + 1];
    for (i, &e) in assignment.iter().enumerate() {
        env[i + 1] = Some(e);
    }
    eval_rec(s, f, &mut env)
}

fn eval_rec(s: &Structure, f: &Formula, env: &mut Vec<Option<usize>>) -> Result<bool> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom { pred, args } => {
            let mut tuple = Vec::with_capacity(args.len());
            for &v in args {
                tuple.push(env[v].ok_or(Error::UnboundVariable(v))?);
            }
            Ok(s.holds(pred, &tuple))
        }
        Formula::Eq(i, j) => {
            let a = env[*i].ok_or(Error::UnboundVariable(*i))?;
            let b = env[*j].ok_or(Error::UnboundVariable(*j))?;
            Ok(a == b)
        }
        Formula::Not(g) => Ok(!eval_rec(s, g, env)?),
        Formula::And(l, r) => Ok(eval_rec(s, l, env)? && eval_rec(s, r, env)?),
        Formula::Or(l, r) => Ok(eval_rec(s, l, env)? || eval_rec(s, r, env)?),
        Formula::Implies(l, r) => Ok(!eval_rec(s, l, env)? || eval_rec(s, r, env)?),
        Formula::Iff(l, r) => Ok(eval_rec(s, l, env)? == eval_rec(s, r, env)?),
        Formula::Exists(v, g) => {
            let saved = env[*v];
            let mut any = false;
            for e in 0..s.domain {
                env[*v] = Some(e);
                if eval_rec(s, g, env)? {
                    any = true;
                    break;
                }
            }
            env[*v] = saved;
            Ok(any)
        }
        Formula::Forall(v, g) => {
            let saved = env[*v];
            let mut all = true;
            for e in 0..s.domain {
                env[*v] = Some(e);
                if !eval_rec(s, g, env)? {
                    all = false;
                    break;
                }
            }
            env[*v] = saved;
            Ok(all)
        }
    }
}

/// Bottom-up evaluator: the set of assignments to `x1..x_width` satisfying
/// `f`, each as a tuple of length `width`. Free variables must lie within
/// `x1..x_width`. Cost is `O(domain^W · |f|)` where `W` covers every bound
/// variable too; intended for small cross-check instances.
pub fn satisfying_tuples(
    s: &Structure,
    f: &Formula,
    width: usize,
    sig: &Signature,
) -> Result<BTreeSet<Vec<usize>>> {
    f.validate(sig)?;
    if let Some(&v) = f.free_vars().iter().max() {
        if v > width {
            return Err(Error::UnboundVariable(v));
        }
    }
    let full = width.max(f.vars_used().into_iter().max().unwrap_or(0));
    let all = all_tuples(s.domain, full);
    let sat = sat_rec(s, f, full, &all);
    Ok(all
        .iter()
        .filter(|t| sat.contains(*t))
        .map(|t| t[..width].to_vec())
        .collect())
}

fn all_tuples(domain: usize, width: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..width {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..domain).map(move |e| {
                    let mut u = t.clone();
                    u.push(e);
                    u
                })
            })
            .collect();
    }
    out
}

fn sat_rec(
    s: &Structure,
    f: &Formula,
    width: usize,
    all: &[Vec<usize>],
) -> BTreeSet<Vec<usize>> {
    match f {
        Formula::True => all.iter().cloned().collect(),
        Formula::False => BTreeSet::new(),
        Formula::Atom { pred, args } => all
            .iter()
            .filter(|t| {
                let tuple: Vec<usize> = args.iter().map(|&v| t[v - 1]).collect();
                s.holds(pred, &tuple)
            })
            .cloned()
            .collect(),
        Formula::Eq(i, j) => all
            .iter()
            .filter(|t| t[*i - 1] == t[*j - 1])
            .cloned()
            .collect(),
        Formula::Not(g) => {
            let inner = sat_rec(s, g, width, all);
            all.iter().filter(|t| !inner.contains(*t)).cloned().collect()
        }
        Formula::And(l, r) => {
            let a = sat_rec(s, l, width, all);
            let b = sat_rec(s, r, width, all);
            a.intersection(&b).cloned().collect()
        }
        Formula::Or(l, r) => {
            let a = sat_rec(s, l, width, all);
            let b = sat_rec(s, r, width, all);
            a.union(&b).cloned().collect()
        }
        Formula::Implies(l, r) => {
            let a = sat_rec(s, l, width, all);
            let b = sat_rec(s, r, width, all);
            all.iter()
                .filter(|t| !a.contains(*t) || b.contains(*t))
                .cloned()
                .collect()
        }
        Formula::Iff(l, r) => {
            let a = sat_rec(s, l, width, all);
            let b = sat_rec(s, r, width, all);
            all.iter()
                .filter(|t| a.contains(*t) == b.contains(*t))
                .cloned()
                .collect()
        }
        Formula::Exists(v, g) => {
            let inner = sat_rec(s, g, width, all);
            all.iter()
                .filter(|t| {
                    (0..s.domain).any(|e| {
                        let mut u = (*t).clone();
                        u[*v - 1] = e;
                        inner.contains(&u)
                    })
                })
                .cloned()
                .collect()
        }
        Formula::Forall(v, g) => {
            let inner = sat_rec(s, g, width, all);
            all.iter()
                .filter(|t| {
                    (0..s.domain).all(|e| {
                        let mut u = (*t).clone();
                        u[*v - 1] = e;
                        inner.contains(&u)
                    })
                })
                .cloned()
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 1).unwrap();
        sig.declare("z", 0).unwrap();
        sig.declare_transitive("t").unwrap();
        sig.set_equality(true);
        sig
    }

    fn example_structure() -> Structure {
        let mut s = Structure::new(3);
        for pair in [[0, 1], [1, 2], [0, 2]] {
            s.insert("t", pair.to_vec());
        }
        s.insert("p", vec![1]);
        s.insert("p", vec![2]);
        s
    }

    #[test]
    fn evaluates_the_guarded_example() {
        let s = example_structure();
        let f = parse_formula("forall x1 forall x2 (t(x1,x2) -> p(x2))", &sig()).unwrap();
        assert!(evaluate(&s, &f, &[], &sig()).unwrap());
    }

    #[test]
    fn exists_true_and_equality() {
        let s = example_structure();
        let f = parse_formula("exists x1 true", &sig()).unwrap();
        assert!(evaluate(&s, &f, &[], &sig()).unwrap());
        let eq = parse_formula("x1 = x2", &sig()).unwrap();
        assert!(!evaluate(&s, &eq, &[0, 1], &sig()).unwrap());
        assert!(evaluate(&s, &eq, &[2, 2], &sig()).unwrap());
    }

    #[test]
    fn unbound_variables_are_errors() {
        let s = example_structure();
        let f = parse_formula("p(x2)", &sig()).unwrap();
        assert!(matches!(
            evaluate(&s, &f, &[0], &sig()),
            Err(Error::UnboundVariable(2))
        ));
    }

    #[test]
    fn satisfying_tuples_projects_correctly() {
        let s = example_structure();
        let f = parse_formula("exists x2 (t(x1,x2) & p(x2))", &sig()).unwrap();
        let sat = satisfying_tuples(&s, &f, 1, &sig()).unwrap();
        let expect: BTreeSet<Vec<usize>> = [vec![0], vec![1]].into_iter().collect();
        assert_eq!(sat, expect);
    }

    fn random_structure(rng: &mut ChaCha8Rng, domain: usize) -> Structure {
        let mut s = Structure::new(domain);
        for e in 0..domain {
            if rng.gen_bool(0.5) {
                s.insert("p", vec![e]);
            }
            if rng.gen_bool(0.5) {
                s.insert("q", vec![e]);
            }
            for d in 0..domain {
                if rng.gen_bool(0.3) {
                    s.insert("t", vec![e, d]);
                }
            }
        }
        if rng.gen_bool(0.5) {
            s.set_zeroary("z", true);
        }
        s
    }

    fn random_formula(rng: &mut ChaCha8Rng, depth: usize, level: usize) -> Formula {
        // Generates formulas whose free variables are within x1..x_level.
        let max_kind = if depth == 0 { 5 } else { 11 };
        match rng.gen_range(0..max_kind) {
            0 => Formula::True,
            1 => Formula::atom("z", &[]),
            2 if level >= 1 => Formula::atom("p", &[rng.gen_range(1..=level)]),
            2 => Formula::True,
            3 if level >= 1 => Formula::atom("q", &[rng.gen_range(1..=level)]),
            3 => Formula::False,
            4 if level >= 2 => Formula::atom("t", &[level - 1, level]),
            4 => Formula::False,
            5 => Formula::not(random_formula(rng, depth - 1, level)),
            6 => Formula::and(
                random_formula(rng, depth - 1, level),
                random_formula(rng, depth - 1, level),
            ),
            7 => Formula::or(
                random_formula(rng, depth - 1, level),
                random_formula(rng, depth - 1, level),
            ),
            8 => Formula::implies(
                random_formula(rng, depth - 1, level),
                random_formula(rng, depth - 1, level),
            ),
            9 if level >= 2 => Formula::Eq(level - 1, level),
            9 => Formula::True,
            _ => {
                if rng.gen_bool(0.5) {
                    Formula::exists(level + 1, random_formula(rng, depth - 1, level + 1))
                } else {
                    Formula::forall(level + 1, random_formula(rng, depth - 1, level + 1))
                }
            }
        }
    }

    #[test]
    fn evaluators_agree_on_random_inputs() {
        let sig = sig();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for round in 0..300 {
            let domain = rng.gen_range(1..=3);
            let s = random_structure(&mut rng, domain);
            let width = rng.gen_range(0..=2usize);
            let f = random_formula(&mut rng, 3, width);
            let sat = satisfying_tuples(&s, &f, width, &sig).unwrap();
            let mut assignment = vec![0usize; width];
            loop {
                let direct = evaluate(&s, &f, &assignment, &sig).unwrap();
                assert_eq!(
                    direct,
                    sat.contains(&assignment),
                    "round {round}: disagreement on {f} at {assignment:?}"
                );
                // Advance the assignment odometer.
                let mut i = 0;
                loop {
                    if i == width {
                        break;
                    }
                    assignment[i] += 1;
                    if assignment[i] < domain {
                        break;
                    }
                    assignment[i] = 0;
                    i += 1;
                }
                if i == width {
                    break;
                }
            }
        }
    }
}
