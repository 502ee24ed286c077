//! Bounded brute-force satisfiability oracle.
//!
//! Searches domain sizes 1..=max ascending; per size, a depth-first search
//! assigns one extension bit at a time (predicates in name order, tuples in
//! lexicographic order, `false` before `true`). Three prunes keep the search
//! feasible, none of which can change the SAT verdict:
//! - three-valued evaluation of the goal formula under the partial
//!   extension (backtrack on definite falsity, finish on definite truth);
//! - transitivity consistency on distinguished predicates (the closure of
//!   the bits set so far may not touch a bit already fixed false);
//! - symmetry breaking: unary profiles must be non-decreasing from each
//!   element to the next (every model can be reordered into this form).
//!
//! A search that outlives a small plain budget restarts with forced-bit
//! propagation: after each branch, any unassigned bit with only one value
//! that survives the prunes is fixed to that value without branching, to a
//! fixpoint. A failing value admits no model in the subtree, so propagation
//! changes neither the verdict nor the first model found; it collapses
//! searches whose contradiction lives in bits far down the assignment
//! order. Probes are charged to the node budget like branches.
//!
//! Transitivity of distinguished predicates is a side condition of the
//! search space, not a conjunct of the formula.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::formula::Formula;
use crate::signature::Signature;
use crate::structure::Structure;

pub const DEFAULT_ORACLE_NODE_CAP: u64 = 20_000_000;

/// Plain-search node allowance per domain size before the search restarts
/// with forced-bit propagation enabled.
const PROBE_TRIGGER: u64 = 20_000;

/// Smallest model of the sentence `f` with at most `max_size` elements in
/// which every distinguished predicate is transitive, or `None` if no such
/// model exists. Deterministic: the model returned is the first in the
/// fixed enumeration order.
pub fn bounded_sat_oracle(f: &Formula, max_size: usize, sig: &Signature) -> Result<Option<Structure>> {
    bounded_sat_oracle_with(f, max_size, sig, DEFAULT_ORACLE_NODE_CAP)
}

/// As [`bounded_sat_oracle`] with an explicit node budget. Exceeding the
/// budget is an error, reported distinctly from "no model within bound".
pub fn bounded_sat_oracle_with(
    f: &Formula,
    max_size: usize,
    sig: &Signature,
    node_cap: u64,
) -> Result<Option<Structure>> {
    f.validate(sig)?;
    if let Some(&v) = f.free_vars().iter().next() {
        return Err(Error::UnboundVariable(v));
    }
    let mut nodes = 0u64;
    for n in 1..=max_size {
        let plain_limit = nodes.saturating_add(PROBE_TRIGGER).min(node_cap);
        let mut search = Search::new(f, sig, n, plain_limit, false)?;
        let outcome = match search.run(&mut nodes) {
            Err(Error::Resource { .. }) if plain_limit < node_cap => {
                let mut search = Search::new(f, sig, n, node_cap, true)?;
                search.run(&mut nodes)
            }
            other => other,
        };
        if let Some(model) = outcome? {
            return Ok(Some(model));
        }
    }
    Ok(None)
}

struct Slot {
    name: String,
    arity: usize,
    distinguished: bool,
    bits: Vec<Option<bool>>,
}

struct Search<'a> {
    f: &'a Formula,
    sig: &'a Signature,
    n: usize,
    limit: u64,
    probe: bool,
    slots: Vec<Slot>,
    slot_of: BTreeMap<String, usize>,
    /// Flattened assignment order: (slot index, tuple rank).
    positions: Vec<(usize, usize)>,
    unary_slots: Vec<usize>,
    env: Vec<Option<usize>>,
}

impl<'a> Search<'a> {
    fn new(f: &'a Formula, sig: &'a Signature, n: usize, limit: u64, probe: bool) -> Result<Search<'a>> {
        let mut slots = Vec::new();
        let mut slot_of = BTreeMap::new();
        let mut positions = Vec::new();
        let mut total_bits = 0usize;
        for pred in f.predicates() {
            let arity = sig.arity(pred).expect("validated above");
            let size = (n as u64).checked_pow(arity as u32).unwrap_or(u64::MAX);
            total_bits = total_bits.saturating_add(size as usize);
            if total_bits > 100_000 {
                return Err(Error::resource(
                    "oracle",
                    format!("candidate space at domain size {n} needs {total_bits}+ extension bits"),
                ));
            }
            let idx = slots.len();
            slot_of.insert(pred.to_string(), idx);
            for rank in 0..size as usize {
                positions.push((idx, rank));
            }
            slots.push(Slot {
                name: pred.to_string(),
                arity,
                distinguished: sig.is_distinguished(pred),
                bits: vec![None; size as usize],
            });
        }
        let unary_slots = slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.arity == 1)
            .map(|(i, _)| i)
            .collect();
        let width = f.vars_used().into_iter().max().unwrap_or(0);
        Ok(Search {
            f,
            sig,
            n,
            limit,
            probe,
            slots,
            slot_of,
            positions,
            unary_slots,
            env: vec![None; width + 1],
        })
    }

    fn run(&mut self, nodes: &mut u64) -> Result<Option<Structure>> {
        match self.eval3(self.f) {
            Some(false) => Ok(None),
            Some(true) => self.complete().map(Some),
            None => self.dfs(0, nodes),
        }
    }

    fn dfs(&mut self, mut idx: usize, nodes: &mut u64) -> Result<Option<Structure>> {
        while idx < self.positions.len() && {
            let (s, r) = self.positions[idx];
            self.slots[s].bits[r].is_some()
        } {
            idx += 1;
        }
        if idx == self.positions.len() {
            return Err(Error::Internal(
                "three-valued evaluation stayed unknown on a total assignment".into(),
            ));
        }
        let (slot, rank) = self.positions[idx];
        for value in [false, true] {
            self.charge(nodes)?;
            self.slots[slot].bits[rank] = Some(value);
            if self.prunes_pass(slot) {
                match self.eval3(self.f) {
                    Some(false) => {}
                    Some(true) => {
                        let model = self.complete()?;
                        self.slots[slot].bits[rank] = None;
                        return Ok(Some(model));
                    }
                    None if self.probe => {
                        let mut trail = Vec::new();
                        if self.propagate(&mut trail, nodes)? {
                            match self.eval3(self.f) {
                                Some(false) => {}
                                Some(true) => {
                                    let model = self.complete()?;
                                    self.undo(&trail);
                                    self.slots[slot].bits[rank] = None;
                                    return Ok(Some(model));
                                }
                                None => {
                                    if let Some(model) = self.dfs(idx + 1, nodes)? {
                                        self.undo(&trail);
                                        self.slots[slot].bits[rank] = None;
                                        return Ok(Some(model));
                                    }
                                }
                            }
                        }
                        self.undo(&trail);
                    }
                    None => {
                        if let Some(model) = self.dfs(idx + 1, nodes)? {
                            self.slots[slot].bits[rank] = None;
                            return Ok(Some(model));
                        }
                    }
                }
            }
            self.slots[slot].bits[rank] = None;
        }
        Ok(None)
    }

    fn charge(&self, nodes: &mut u64) -> Result<()> {
        *nodes += 1;
        if *nodes > self.limit {
            return Err(Error::resource(
                "oracle",
                format!("node budget {} exhausted", self.limit),
            ));
        }
        Ok(())
    }

    /// Fixes, to a fixpoint, every unassigned bit for which one value
    /// already fails a prune or falsifies the formula. Such a value admits
    /// no model in the current subtree (the symmetry prune: no canonical
    /// model), so forcing the other value preserves both the verdict and
    /// the first model in enumeration order. Returns false when some bit
    /// has no surviving value.
    fn propagate(&mut self, trail: &mut Vec<(usize, usize)>, nodes: &mut u64) -> Result<bool> {
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..self.positions.len() {
                let (slot, rank) = self.positions[i];
                if self.slots[slot].bits[rank].is_some() {
                    continue;
                }
                let mut viable = [false; 2];
                for value in [false, true] {
                    self.charge(nodes)?;
                    self.slots[slot].bits[rank] = Some(value);
                    viable[value as usize] =
                        self.prunes_pass(slot) && self.eval3(self.f) != Some(false);
                    self.slots[slot].bits[rank] = None;
                }
                match (viable[0], viable[1]) {
                    (false, false) => return Ok(false),
                    (true, true) => {}
                    (survives_false, _) => {
                        self.slots[slot].bits[rank] = Some(!survives_false);
                        trail.push((slot, rank));
                        changed = true;
                    }
                }
            }
        }
        Ok(true)
    }

    fn undo(&mut self, trail: &[(usize, usize)]) {
        for &(slot, rank) in trail {
            self.slots[slot].bits[rank] = None;
        }
    }

    /// Checks the prunes affected by the most recent assignment in `slot`.
    fn prunes_pass(&self, slot: usize) -> bool {
        if self.slots[slot].arity == 1 && !self.profiles_nondecreasing() {
            return false;
        }
        if self.slots[slot].distinguished && !self.transitivity_consistent(slot) {
            return false;
        }
        true
    }

    /// Definite lexicographic comparison of adjacent unary profiles: prune
    /// only when profile(e) > profile(e+1) is already certain.
    fn profiles_nondecreasing(&self) -> bool {
        for e in 0..self.n.saturating_sub(1) {
            for &s in &self.unary_slots {
                match (self.slots[s].bits[e], self.slots[s].bits[e + 1]) {
                    (Some(a), Some(b)) if a == b => continue,
                    (Some(true), Some(false)) => return false,
                    _ => break,
                }
            }
        }
        true
    }

    /// The closure of the pairs already set true may not contain a pair
    /// already set false.
    fn transitivity_consistent(&self, slot: usize) -> bool {
        let n = self.n;
        let bits = &self.slots[slot].bits;
        let mut adj = vec![false; n * n];
        for (rank, bit) in bits.iter().enumerate() {
            if *bit == Some(true) {
                adj[rank] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if adj[i * n + k] {
                    for j in 0..n {
                        if adj[k * n + j] {
                            adj[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for rank in 0..n * n {
            if adj[rank] && bits[rank] == Some(false) {
                return false;
            }
        }
        true
    }

    fn eval3(&mut self, f: &Formula) -> Option<bool> {
        match f {
            Formula::True => Some(true),
            Formula::False => Some(false),
            Formula::Atom { pred, args } => {
                let slot = self.slot_of[pred];
                let mut rank = 0usize;
                for &v in args {
                    rank = rank * self.n + self.env[v].expect("bound by quantifier");
                }
                self.slots[slot].bits[rank]
            }
            Formula::Eq(i, j) => Some(self.env[*i] == self.env[*j]),
            Formula::Not(g) => self.eval3(g).map(|b| !b),
            Formula::And(l, r) => match self.eval3(l) {
                Some(false) => Some(false),
                lv => match self.eval3(r) {
                    Some(false) => Some(false),
                    rv => match (lv, rv) {
                        (Some(true), Some(true)) => Some(true),
                        _ => None,
                    },
                },
            },
            Formula::Or(l, r) => match self.eval3(l) {
                Some(true) => Some(true),
                lv => match self.eval3(r) {
                    Some(true) => Some(true),
                    rv => match (lv, rv) {
                        (Some(false), Some(false)) => Some(false),
                        _ => None,
                    },
                },
            },
            Formula::Implies(l, r) => match self.eval3(l) {
                Some(false) => Some(true),
                lv => match self.eval3(r) {
                    Some(true) => Some(true),
                    rv => match (lv, rv) {
                        (Some(true), Some(false)) => Some(false),
                        _ => None,
                    },
                },
            },
            Formula::Iff(l, r) => match (self.eval3(l), self.eval3(r)) {
                (Some(a), Some(b)) => Some(a == b),
                _ => None,
            },
            Formula::Exists(v, g) => {
                let saved = self.env[*v];
                let mut unknown = false;
                let mut result = Some(false);
                for e in 0..self.n {
                    self.env[*v] = Some(e);
                    match self.eval3(g) {
                        Some(true) => {
                            result = Some(true);
                            break;
                        }
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                self.env[*v] = saved;
                match result {
                    Some(true) => Some(true),
                    _ if unknown => None,
                    r => r,
                }
            }
            Formula::Forall(v, g) => {
                let saved = self.env[*v];
                let mut unknown = false;
                let mut result = Some(true);
                for e in 0..self.n {
                    self.env[*v] = Some(e);
                    match self.eval3(g) {
                        Some(false) => {
                            result = Some(false);
                            break;
                        }
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                self.env[*v] = saved;
                match result {
                    Some(false) => Some(false),
                    _ if unknown => None,
                    r => r,
                }
            }
        }
    }

    /// Completes the partial assignment into the least full structure:
    /// unassigned bits become false, except that distinguished predicates
    /// take the transitive closure of their true bits.
    fn complete(&self) -> Result<Structure> {
        let mut model = Structure::new(self.n);
        for slot in &self.slots {
            let mut ranks: Vec<usize> = slot
                .bits
                .iter()
                .enumerate()
                .filter(|(_, b)| **b == Some(true))
                .map(|(r, _)| r)
                .collect();
            if slot.distinguished {
                let n = self.n;
                let mut adj = vec![false; n * n];
                for &r in &ranks {
                    adj[r] = true;
                }
                for k in 0..n {
                    for i in 0..n {
                        if adj[i * n + k] {
                            for j in 0..n {
                                if adj[k * n + j] {
                                    adj[i * n + j] = true;
                                }
                            }
                        }
                    }
                }
                for (rank, bit) in slot.bits.iter().enumerate() {
                    if adj[rank] && *bit == Some(false) {
                        return Err(Error::Internal(
                            "transitivity pruning missed a forced pair".into(),
                        ));
                    }
                }
                ranks = (0..n * n).filter(|&r| adj[r]).collect();
            }
            for rank in ranks {
                model.insert(&slot.name, unrank(rank, self.n, slot.arity));
            }
        }
        // The three-valued check said "true under every completion"; verify.
        if !evaluate(&model, self.f, &[], self.sig)? {
            return Err(Error::Internal(
                "three-valued evaluation declared truth on a non-model".into(),
            ));
        }
        for pred in self.sig.distinguished() {
            if !model.check_transitive(pred)?.is_empty() {
                return Err(Error::Internal(
                    "completion produced a non-transitive distinguished predicate".into(),
                ));
            }
        }
        Ok(model)
    }
}

fn unrank(mut rank: usize, n: usize, arity: usize) -> Vec<usize> {
    let mut tuple = vec![0usize; arity];
    for slot in (0..arity).rev() {
        tuple[slot] = rank % n;
        rank /= n;
    }
    tuple
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 1).unwrap();
        sig.declare("z", 0).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    #[test]
    fn finds_the_smallest_positive_model() {
        let s = sig();
        let f = parse_formula("exists x1 p(x1)", &s).unwrap();
        let model = bounded_sat_oracle(&f, 1, &s).unwrap().unwrap();
        assert_eq!(model.domain, 1);
        assert!(model.holds("p", &[0]));
    }

    #[test]
    fn contradiction_has_no_model() {
        let s = sig();
        let f = parse_formula("exists x1 p(x1) & forall x1 ~p(x1)", &s).unwrap();
        assert_eq!(bounded_sat_oracle(&f, 4, &s).unwrap(), None);
    }

    #[test]
    fn forbidden_witness_sentence_is_unsat() {
        let s = sig();
        let f = parse_formula(
            "forall x1 (p(x1) -> exists x2 (p(x2) & t(x1,x2))) \
             & forall x1 (p(x1) -> forall x2 (p(x2) -> ~t(x1,x2))) \
             & exists x1 p(x1)",
            &s,
        )
        .unwrap();
        assert_eq!(bounded_sat_oracle(&f, 4, &s).unwrap(), None);
    }

    #[test]
    fn respects_transitivity_as_a_side_condition() {
        let s = sig();
        // A 2-chain of t forces the closing pair, which q then observes.
        let f = parse_formula(
            "exists x1 (p(x1) & exists x2 (t(x1,x2) & q(x2) & exists x3 (t(x2,x3) & p(x3)))) \
             & forall x1 forall x2 (t(x1,x2) -> q(x2))",
            &s,
        )
        .unwrap();
        let model = bounded_sat_oracle(&f, 4, &s).unwrap().unwrap();
        for pred in ["t"] {
            assert!(model.check_transitive(pred).unwrap().is_empty());
        }
        assert!(evaluate(&model, &f, &[], &sig()).unwrap());
    }

    #[test]
    fn deterministic_and_minimal() {
        let s = sig();
        let f = parse_formula("exists x1 (p(x1) & exists x2 (t(x1,x2) & ~p(x2)))", &s).unwrap();
        let a = bounded_sat_oracle(&f, 5, &s).unwrap().unwrap();
        let b = bounded_sat_oracle(&f, 5, &s).unwrap().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.domain, 2);
    }

    #[test]
    fn node_budget_is_a_distinct_error() {
        let s = sig();
        let f = parse_formula(
            "forall x1 (p(x1) -> exists x2 (p(x2) & t(x1,x2))) \
             & forall x1 (p(x1) -> forall x2 (p(x2) -> ~t(x1,x2))) \
             & exists x1 p(x1)",
            &s,
        )
        .unwrap();
        match bounded_sat_oracle_with(&f, 6, &s, 10) {
            Err(Error::Resource { stage, .. }) => assert_eq!(stage, "oracle"),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn max_size_zero_means_no_model() {
        let s = sig();
        let f = parse_formula("exists x1 p(x1)", &s).unwrap();
        assert_eq!(bounded_sat_oracle(&f, 0, &s).unwrap(), None);
    }

    #[test]
    fn open_formulas_are_rejected() {
        let s = sig();
        let f = parse_formula("p(x1)", &s).unwrap();
        assert!(matches!(
            bounded_sat_oracle(&f, 2, &s),
            Err(Error::UnboundVariable(1))
        ));
    }
}
