//! Satisfiability via certificate search.
//!
//! The search core enumerates candidate sets P of realized 1-types
//! (smallest first), derives the minimal order forced by positive
//! universal links, and then looks for reach-sets completing P into a
//! certificate.  Reach possibilities are organized per base type as an
//! interval family: every admissible reach-set contains the order-forced
//! floor, stays inside the admissible ceiling, and discharges every
//! witness obligation.  Condition C1 is imposed by a greatest-fixpoint
//! pass over these families; a nonempty fixpoint at every base yields a
//! certificate, which is re-verified end to end before being returned.
//!
//! For order-target types the families additionally live below an
//! enumerated reach envelope M (the union of all reach-sets at that
//! type), because C2 forces every predecessor to absorb the whole
//! envelope.  Enumerating envelopes restores completeness that per-type
//! intervals alone would lose.
//!
//! The core consumes assembled per-type obligations ([`SearchInput`]) so
//! that two front-ends can share it: [`solve_basic`] translates a set of
//! basic formulas (each witness obligation single-route), and the
//! reduction pipeline translates a width-2 clause normal form without
//! materializing one basic formula per 1-type pair (witness obligations
//! there carry a positive and a negative route at once, either of which
//! discharges the block).
//!
//! UNSAT means the whole (P, envelope) space was exhausted; the candidate
//! budget converts blowups into a resource error instead of a wrong
//! verdict.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::normalform::{BasicFormula, BasicFormulaSet, OneType};
use crate::structure::Structure;

use super::{
    build_model, cert_models, is_certificate, single_distinguished, Certificate, SuperType,
};

/// Resource limits for [`solve_basic`].
#[derive(Debug, Clone)]
pub struct SolveBasicConfig {
    /// Maximum number of unary predicates (the 1-type space is 2^sigma).
    pub sigma_cap: usize,
    /// Budget on candidate (realized-set, envelope) pairs.
    pub candidate_cap: u64,
}

impl Default for SolveBasicConfig {
    fn default() -> Self {
        SolveBasicConfig { sigma_cap: 4, candidate_cap: 2_000_000 }
    }
}

/// Outcome of the basic-set decision.
#[derive(Debug, Clone)]
pub enum BasicOutcome {
    /// A certificate satisfying every formula, plus its realization, with
    /// the branch's zero-ary valuation applied.
    Sat { certificate: Certificate, model: Structure },
    Unsat,
}

/// One witness obligation at a base type.  A reach-set R discharges it
/// either through `pos` (some type of R is a witness) or through `neg`
/// (some realized candidate type has a witness outside the reach: the
/// candidate must not be order-forced below the base, and no member of
/// {base} ∪ R may order-precede it).  Front-ends with single-route
/// obligations leave the other side empty.
#[derive(Debug, Clone, Default)]
pub(crate) struct WitnessReq {
    pub pos: BTreeSet<usize>,
    pub neg: BTreeSet<usize>,
}

/// Per-type search obligations over 1-type ranks, assembled by a
/// front-end.  Ranks index 1-types over `width` unary predicates.
#[derive(Debug, Clone)]
pub(crate) struct SearchInput {
    pub width: usize,
    /// Ranks that may be realized at all.
    pub allowed: BTreeSet<usize>,
    /// Obligations that must intersect the realized set.
    pub coverage: Vec<BTreeSet<usize>>,
    /// Witness obligations per rank.
    pub reqs: BTreeMap<usize, Vec<WitnessReq>>,
    /// Reaches forbidden per rank, beyond `global_bad`.
    pub bad: BTreeMap<usize, BTreeSet<usize>>,
    /// Ranks nobody may reach.
    pub global_bad: BTreeSet<usize>,
    /// Forced reaches between realized ranks, beyond `global_link`.
    pub link_pos: BTreeSet<(usize, usize)>,
    /// Ranks every realized rank must reach.
    pub global_link: BTreeSet<usize>,
    /// Ranks that cannot be realized alongside a rank.
    pub excl: BTreeMap<usize, BTreeSet<usize>>,
}

impl SearchInput {
    pub fn empty(width: usize) -> Self {
        SearchInput {
            width,
            allowed: BTreeSet::new(),
            coverage: Vec::new(),
            reqs: BTreeMap::new(),
            bad: BTreeMap::new(),
            global_bad: BTreeSet::new(),
            link_pos: BTreeSet::new(),
            global_link: BTreeSet::new(),
            excl: BTreeMap::new(),
        }
    }

    fn is_bad(&self, r: usize, r2: usize) -> bool {
        self.global_bad.contains(&r2) || self.bad.get(&r).is_some_and(|s| s.contains(&r2))
    }

    fn is_linked(&self, r: usize, r2: usize) -> bool {
        self.global_link.contains(&r2) || self.link_pos.contains(&(r, r2))
    }
}

pub fn solve_basic(psi: &BasicFormulaSet) -> Result<BasicOutcome> {
    solve_basic_with(psi, &SolveBasicConfig::default())
}

pub fn solve_basic_with(
    psi: &BasicFormulaSet,
    config: &SolveBasicConfig,
) -> Result<BasicOutcome> {
    let sig = &psi.sig;
    single_distinguished(sig)?;
    let w = sig.unary_predicates().len();
    if w > config.sigma_cap {
        return Err(Error::resource(
            "certificate",
            format!("{w} unary predicates exceed the 1-type cap {}", config.sigma_cap),
        ));
    }
    let n = 1usize << w;
    let types = OneType::all(w);

    let mut input = SearchInput::empty(w);
    input.allowed = (0..n).collect();
    let rank_of = |pi: &OneType| -> Result<usize> {
        if pi.width() != w {
            return Err(Error::Signature(format!(
                "1-type width {} does not match the signature's {w} unary predicates",
                pi.width()
            )));
        }
        Ok(pi.rank())
    };
    for bf in &psi.formulas {
        match bf {
            BasicFormula::ExistsMu(mu) => {
                input
                    .coverage
                    .push((0..n).filter(|&r| mu.eval(&types[r], sig)).collect());
            }
            BasicFormula::ForallMu(mu) => {
                input.allowed.retain(|&r| mu.eval(&types[r], sig));
            }
            BasicFormula::ExistWitness(pi, mu, positive) => {
                let r = rank_of(pi)?;
                let sat: BTreeSet<usize> =
                    (0..n).filter(|&r2| mu.eval(&types[r2], sig)).collect();
                let req = if *positive {
                    WitnessReq { pos: sat, neg: BTreeSet::new() }
                } else {
                    WitnessReq { pos: BTreeSet::new(), neg: sat }
                };
                input.reqs.entry(r).or_default().push(req);
            }
            BasicFormula::UniversalLink(pi, pi2, positive) => {
                let r = rank_of(pi)?;
                let r2 = rank_of(pi2)?;
                if *positive {
                    input.link_pos.insert((r, r2));
                } else {
                    input.bad.entry(r).or_default().insert(r2);
                }
            }
        }
    }

    let mut budget = config.candidate_cap;
    match search_certificate(&input, &mut budget)? {
        Some(cert) => finish(psi, cert),
        None => Ok(BasicOutcome::Unsat),
    }
}

/// Runs the certificate search over assembled obligations.  Returns the
/// first certificate in canonical order (realized sets by size, then
/// lexicographically over the allowed pool), or None on exhaustion.
pub(crate) fn search_certificate(
    input: &SearchInput,
    budget: &mut u64,
) -> Result<Option<Certificate>> {
    let mut g = input.allowed.clone();
    // A rank excluding itself can never be realized.
    g.retain(|&r| !input.excl.get(&r).is_some_and(|s| s.contains(&r)));

    // Iterated prefilter: a type whose obligations cannot be discharged
    // inside the surviving pool can never be realized.
    loop {
        let snapshot: Vec<usize> = g.iter().copied().collect();
        let mut changed = false;
        for r in snapshot {
            let ok = input.reqs.get(&r).into_iter().flatten().all(|req| {
                req.pos.iter().any(|r2| g.contains(r2) && !input.is_bad(r, *r2))
                    || req.neg.iter().any(|r2| g.contains(r2) && !input.is_linked(r, *r2))
            });
            if !ok {
                g.remove(&r);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if input.coverage.iter().any(|sat| sat.is_disjoint(&g)) {
        return Ok(None);
    }

    let glist: Vec<usize> = g.iter().copied().collect();
    for size in 1..=glist.len() {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let plist: Vec<usize> = combo.iter().map(|&i| glist[i]).collect();
            spend(budget)?;
            if let Some(cert) = try_realized_set(&plist, input, budget)? {
                return Ok(Some(cert));
            }
            if !advance(&mut combo, glist.len()) {
                break;
            }
        }
    }
    Ok(None)
}

fn spend(budget: &mut u64) -> Result<()> {
    if *budget == 0 {
        return Err(Error::resource(
            "certificate",
            "candidate budget exhausted before the search space was covered",
        ));
    }
    *budget -= 1;
    Ok(())
}

/// Advances a size-k combination over 0..limit in lexicographic order.
fn advance(combo: &mut [usize], limit: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] + (k - i) < limit {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Tries to complete a candidate realized-type set into a certificate.
fn try_realized_set(
    plist: &[usize],
    input: &SearchInput,
    budget: &mut u64,
) -> Result<Option<Certificate>> {
    let plen = plist.len();
    if plen > 16 {
        return Err(Error::resource(
            "certificate",
            format!("{plen} realized 1-types exceed the interval-family capacity 16"),
        ));
    }
    // Mutually exclusive ranks cannot be realized together.
    for &ru in plist {
        if let Some(ex) = input.excl.get(&ru) {
            if plist.iter().any(|rv| ex.contains(rv)) {
                return Ok(None);
            }
        }
    }
    let pset: BTreeSet<usize> = plist.iter().copied().collect();
    if input.coverage.iter().any(|sat| sat.is_disjoint(&pset)) {
        return Ok(None);
    }
    let full: u32 = if plen == 32 { u32::MAX } else { (1u32 << plen) - 1 };

    // The minimal order: transitive closure of the positive links inside P.
    let mut ll = vec![false; plen * plen];
    for (u, &ru) in plist.iter().enumerate() {
        for (v, &rv) in plist.iter().enumerate() {
            if input.is_linked(ru, rv) {
                ll[u * plen + v] = true;
            }
        }
    }
    for k in 0..plen {
        for u in 0..plen {
            if ll[u * plen + k] {
                for v in 0..plen {
                    if ll[k * plen + v] {
                        ll[u * plen + v] = true;
                    }
                }
            }
        }
    }

    let bad_mask: Vec<u32> = plist
        .iter()
        .map(|&ru| {
            plist
                .iter()
                .enumerate()
                .filter(|(_, rv)| input.is_bad(ru, **rv))
                .fold(0u32, |m, (v, _)| m | 1 << v)
        })
        .collect();

    // An order edge into a forbidden reach can never be absorbed.
    for u in 0..plen {
        for v in 0..plen {
            if ll[u * plen + v] && bad_mask[u] & (1 << v) != 0 {
                return Ok(None);
            }
        }
    }

    // Per-base obligations translated to masks over P positions.
    let to_mask = |sat: &BTreeSet<usize>| -> u32 {
        plist
            .iter()
            .enumerate()
            .filter(|(_, r)| sat.contains(r))
            .fold(0u32, |m, (v, _)| m | 1 << v)
    };
    let obstructors: Vec<u32> = (0..plen)
        .map(|v| (0..plen).filter(|&a| ll[a * plen + v]).fold(0u32, |m, a| m | 1 << a))
        .collect();
    let mut req_masks: Vec<Vec<(u32, Vec<(usize, u32)>)>> = vec![Vec::new(); plen];
    for (u, &ru) in plist.iter().enumerate() {
        for req in input.reqs.get(&ru).into_iter().flatten() {
            let pos = to_mask(&req.pos) & !bad_mask[u];
            let neg: Vec<(usize, u32)> = plist
                .iter()
                .enumerate()
                .filter(|(v, rv)| req.neg.contains(rv) && !ll[u * plen + *v])
                .map(|(v, _)| (v, obstructors[v]))
                .collect();
            if pos == 0 && neg.is_empty() {
                return Ok(None);
            }
            req_masks[u].push((pos, neg));
        }
    }

    let qlist: Vec<usize> = (0..plen)
        .filter(|&v| (0..plen).any(|u| ll[u * plen + v]))
        .collect();

    // Enumerate reach envelopes for the order targets.
    let mut envelope: Vec<u32> = vec![full; plen];
    let mut stack: Vec<u32> = Vec::new();
    enumerate_envelopes(
        &qlist,
        0,
        &mut stack,
        &mut envelope,
        &EnvelopeContext { plen, ll: &ll, bad_mask: &bad_mask, full },
        &mut |envelope| {
            spend(budget)?;
            Ok(try_envelope(
                plist,
                input.width,
                &ll,
                &bad_mask,
                &req_masks,
                &qlist,
                envelope,
            ))
        },
    )
}

struct EnvelopeContext<'a> {
    plen: usize,
    ll: &'a [bool],
    bad_mask: &'a [u32],
    full: u32,
}

/// Recursively assigns an envelope to each order target and calls the
/// visitor with every consistent assignment.  The envelope at q bounds
/// every reach-set at q from above, so consistency requires it to absorb
/// the envelopes of q's own order successors.
fn enumerate_envelopes(
    qlist: &[usize],
    depth: usize,
    stack: &mut Vec<u32>,
    envelope: &mut Vec<u32>,
    ctx: &EnvelopeContext,
    visit: &mut dyn FnMut(&[u32]) -> Result<Option<Certificate>>,
) -> Result<Option<Certificate>> {
    if depth == qlist.len() {
        // Check absorption between targets under the completed assignment.
        for (i, &q) in qlist.iter().enumerate() {
            let mut forced = 0u32;
            for (j, &v) in qlist.iter().enumerate() {
                if ctx.ll[q * ctx.plen + v] {
                    forced |= (1 << v) | stack[j];
                }
            }
            if forced & !stack[i] != 0 {
                return Ok(None);
            }
        }
        for (j, &q) in qlist.iter().enumerate() {
            envelope[q] = stack[j];
        }
        return visit(envelope);
    }
    let q = qlist[depth];
    let allowed = ctx.full & !ctx.bad_mask[q];
    let mut sub = allowed;
    loop {
        stack.push(sub);
        if let Some(cert) =
            enumerate_envelopes(qlist, depth + 1, stack, envelope, ctx, visit)?
        {
            return Ok(Some(cert));
        }
        stack.pop();
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & allowed;
    }
    Ok(None)
}

/// Interval families and the C1 fixpoint for one (P, envelope) candidate.
fn try_envelope(
    plist: &[usize],
    width: usize,
    ll: &[bool],
    bad_mask: &[u32],
    req_masks: &[Vec<(u32, Vec<(usize, u32)>)>],
    qlist: &[usize],
    envelope: &[u32],
) -> Option<Certificate> {
    let plen = plist.len();
    let full: u32 = if plen == 32 { u32::MAX } else { (1u32 << plen) - 1 };
    let is_target: Vec<bool> = {
        let mut t = vec![false; plen];
        for &q in qlist {
            t[q] = true;
        }
        t
    };

    // Interval bounds per base.
    let mut lo = vec![0u32; plen];
    let mut hi = vec![0u32; plen];
    for u in 0..plen {
        let mut floor = 0u32;
        for v in 0..plen {
            if ll[u * plen + v] {
                floor |= (1 << v) | envelope[v];
            }
        }
        lo[u] = floor;
        hi[u] = full & !bad_mask[u];
        if is_target[u] {
            hi[u] &= envelope[u];
        }
        if lo[u] & !hi[u] != 0 {
            return None;
        }
    }

    // F[u]: bitset over subset indices (the index IS the reach mask).
    let words = (1usize << plen).div_ceil(64);
    let mut fam: Vec<Vec<u64>> = vec![vec![0u64; words]; plen];
    for u in 0..plen {
        let free = hi[u] & !lo[u];
        let mut sub = free;
        loop {
            let reach = lo[u] | sub;
            let ok = req_masks[u].iter().all(|(pos, neg)| {
                pos & reach != 0 || neg.iter().any(|(_, obst)| obst & reach == 0)
            });
            if ok {
                fam[u][reach as usize / 64] |= 1u64 << (reach as usize % 64);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        if fam[u].iter().all(|&w| w == 0) {
            return None;
        }
    }

    // C1 greatest fixpoint: keep a reach-set only while every member type
    // has a surviving reach-set contained in it.
    loop {
        // supported[v][s] = some surviving reach at v is a subset of s.
        let mut supported: Vec<Vec<u64>> = fam.clone();
        for sup in &mut supported {
            for b in 0..plen {
                let bit = 1usize << b;
                for s in 0..1usize << plen {
                    if s & bit != 0 && sup[(s ^ bit) / 64] & (1u64 << ((s ^ bit) % 64)) != 0
                    {
                        sup[s / 64] |= 1u64 << (s % 64);
                    }
                }
            }
        }
        let mut changed = false;
        for u in 0..plen {
            for s in 0..1usize << plen {
                if fam[u][s / 64] & (1u64 << (s % 64)) == 0 {
                    continue;
                }
                let ok = (0..plen).all(|v| {
                    s & (1 << v) == 0 || supported[v][s / 64] & (1u64 << (s % 64)) != 0
                });
                if !ok {
                    fam[u][s / 64] &= !(1u64 << (s % 64));
                    changed = true;
                }
            }
            if fam[u].iter().all(|&w| w == 0) {
                return None;
            }
        }
        if !changed {
            break;
        }
    }

    // Extract: the least surviving reach per base, closed under support.
    let least = |u: usize| -> u32 {
        for s in 0..1usize << plen {
            if fam[u][s / 64] & (1u64 << (s % 64)) != 0 {
                return s as u32;
            }
        }
        unreachable!("fixpoint families are nonempty")
    };
    let mut chosen: BTreeSet<(usize, u32)> = (0..plen).map(|u| (u, least(u))).collect();
    let mut work: Vec<(usize, u32)> = chosen.iter().copied().collect();
    while let Some((_, reach)) = work.pop() {
        for v in 0..plen {
            if reach & (1 << v) == 0 {
                continue;
            }
            let mut support = None;
            for s in 0..1usize << plen {
                if fam[v][s / 64] & (1u64 << (s % 64)) != 0 && s as u32 & !reach == 0 {
                    support = Some(s as u32);
                    break;
                }
            }
            let support = support.expect("fixpoint guarantees a contained support");
            if chosen.insert((v, support)) {
                work.push((v, support));
            }
        }
    }

    let supertypes: BTreeSet<SuperType> = chosen
        .iter()
        .map(|&(u, reach)| {
            let base = OneType::from_rank(plist[u], width);
            let r = (0..plen)
                .filter(|v| reach & (1 << v) != 0)
                .map(|v| OneType::from_rank(plist[v], width))
                .collect();
            SuperType::new(base, r)
        })
        .collect();
    let order: BTreeSet<(OneType, OneType)> = (0..plen)
        .flat_map(|u| (0..plen).map(move |v| (u, v)))
        .filter(|&(u, v)| ll[u * plen + v])
        .map(|(u, v)| {
            (OneType::from_rank(plist[u], width), OneType::from_rank(plist[v], width))
        })
        .collect();
    Some(Certificate { supertypes, order })
}

/// Re-verifies a found certificate end to end and packages the outcome.
fn finish(psi: &BasicFormulaSet, cert: Certificate) -> Result<BasicOutcome> {
    let sig = &psi.sig;
    let report = is_certificate(&cert);
    if !report.ok {
        return Err(Error::Internal(format!(
            "search produced an invalid certificate: {}",
            report.violations.join("; ")
        )));
    }
    for bf in &psi.formulas {
        if !cert_models(&cert, bf, sig)? {
            return Err(Error::Internal(format!(
                "search produced a certificate that fails {bf:?}"
            )));
        }
    }
    let mut model = build_model(&cert, sig)?;
    for (z, &value) in &psi.zeroary_valuation {
        model.set_zeroary(z, value);
    }
    let conj = psi.to_formula()?;
    if !evaluate(&model, &conj, &[], sig)? {
        return Err(Error::Internal(
            "certificate realization fails the basic-formula conjunction".into(),
        ));
    }
    Ok(BasicOutcome::Sat { certificate: cert, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::UnaryFormula;
    use crate::oracle::bounded_sat_oracle;
    use crate::parser::parse_formula;
    use crate::signature::Signature;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig1() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    fn sig2() -> Signature {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 1).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    fn mu(text: &str, sig: &Signature) -> UnaryFormula {
        UnaryFormula::new(parse_formula(text, sig).unwrap(), sig).unwrap()
    }

    fn set(sig: &Signature, formulas: Vec<BasicFormula>) -> BasicFormulaSet {
        BasicFormulaSet {
            sig: sig.clone(),
            formulas,
            zeroary_valuation: Default::default(),
        }
    }

    fn assert_sat(psi: &BasicFormulaSet) -> (Certificate, Structure) {
        match solve_basic(psi).unwrap() {
            BasicOutcome::Sat { certificate, model } => (certificate, model),
            BasicOutcome::Unsat => panic!("expected SAT"),
        }
    }

    #[test]
    fn single_exists_is_sat() {
        let sig = sig1();
        let psi = set(&sig, vec![BasicFormula::ExistsMu(mu("p(x1)", &sig))]);
        let (cert, model) = assert_sat(&psi);
        assert_eq!(model.domain, 2 * cert.supertypes.len());
    }

    #[test]
    fn empty_set_is_sat_with_all_negative_type() {
        let sig = sig2();
        let psi = set(&sig, vec![]);
        let (cert, _) = assert_sat(&psi);
        assert_eq!(cert.supertypes.len(), 1);
        let st = cert.supertypes.iter().next().unwrap();
        assert_eq!(st.base.to_bit_string(), "00");
        assert!(st.reach.is_empty());
    }

    #[test]
    fn forced_forbidden_witness_is_unsat() {
        // Every p-element needs a t-linked p-witness, but p-to-p links are
        // forbidden.
        let sig = sig1();
        let pi_p = OneType::from_bit_string("1").unwrap();
        let psi = set(
            &sig,
            vec![
                BasicFormula::ExistsMu(mu("p(x1)", &sig)),
                BasicFormula::ExistWitness(pi_p.clone(), mu("p(x1)", &sig), true),
                BasicFormula::UniversalLink(pi_p.clone(), pi_p.clone(), false),
            ],
        );
        assert!(matches!(solve_basic(&psi).unwrap(), BasicOutcome::Unsat));
    }

    #[test]
    fn transitive_chain_forces_unsat_without_extra_type() {
        // p-elements need a strictly fresh witness forever: p needs a
        // t-linked q, q needs a t-linked p, and both self-links are
        // forbidden while the p-q links are universal, forcing a cycle
        // whose closure violates the forbidden self-links.
        let sig = sig2();
        let pi_p = OneType::from_bit_string("10").unwrap();
        let pi_q = OneType::from_bit_string("01").unwrap();
        let psi = set(
            &sig,
            vec![
                BasicFormula::ExistsMu(mu("p(x1) & ~q(x1)", &sig)),
                BasicFormula::UniversalLink(pi_p.clone(), pi_q.clone(), true),
                BasicFormula::UniversalLink(pi_q.clone(), pi_p.clone(), true),
                BasicFormula::UniversalLink(pi_p.clone(), pi_p.clone(), false),
                BasicFormula::ExistWitness(pi_p.clone(), mu("q(x1) & ~p(x1)", &sig), true),
            ],
        );
        // The q-type must be realized for the witness; then p << q << p
        // forces p << p, contradicting the negative link.
        assert!(matches!(solve_basic(&psi).unwrap(), BasicOutcome::Unsat));
    }

    #[test]
    fn negative_witness_needs_an_unordered_type() {
        let sig = sig1();
        let pi_p = OneType::from_bit_string("1").unwrap();
        let pi_np = OneType::from_bit_string("0").unwrap();
        // Every p-element needs a non-t-successor p-element, and p is
        // universally linked to itself, so no candidate survives.
        let psi = set(
            &sig,
            vec![
                BasicFormula::ExistsMu(mu("p(x1)", &sig)),
                BasicFormula::ExistWitness(pi_p.clone(), mu("p(x1)", &sig), false),
                BasicFormula::UniversalLink(pi_p.clone(), pi_p.clone(), true),
            ],
        );
        assert!(matches!(solve_basic(&psi).unwrap(), BasicOutcome::Unsat));

        // Allowing a second p-free type does not help the p-witness, but
        // dropping the positive link does.
        let psi = set(
            &sig,
            vec![
                BasicFormula::ExistsMu(mu("p(x1)", &sig)),
                BasicFormula::ExistWitness(pi_p.clone(), mu("p(x1)", &sig), false),
            ],
        );
        let (cert, _) = assert_sat(&psi);
        assert!(cert.types().contains(&pi_p) || cert.types().contains(&pi_np));
    }

    #[test]
    fn solver_result_always_reverifies() {
        let sig = sig2();
        let pi_p = OneType::from_bit_string("10").unwrap();
        let psi = set(
            &sig,
            vec![
                BasicFormula::ExistsMu(mu("p(x1)", &sig)),
                BasicFormula::ExistWitness(pi_p.clone(), mu("q(x1)", &sig), true),
                BasicFormula::ForallMu(mu("p(x1) | q(x1)", &sig)),
            ],
        );
        let (cert, model) = assert_sat(&psi);
        for bf in &psi.formulas {
            assert!(cert_models(&cert, bf, &sig).unwrap());
        }
        assert!(model.check_transitive("t").unwrap().is_empty());
        assert!(evaluate(&model, &psi.to_formula().unwrap(), &[], &sig).unwrap());
    }

    #[test]
    fn sigma_cap_is_enforced() {
        let mut sig = Signature::new();
        for name in ["a", "b", "c", "d", "e"] {
            sig.declare(name, 1).unwrap();
        }
        sig.declare_transitive("t").unwrap();
        let psi = set(&sig, vec![]);
        let err = solve_basic(&psi).unwrap_err();
        assert!(matches!(err, Error::Resource { ref stage, .. } if stage == "certificate"));
        let config = SolveBasicConfig { sigma_cap: 5, ..Default::default() };
        assert!(solve_basic_with(&psi, &config).is_ok());
    }

    #[test]
    fn candidate_budget_turns_into_resource_error() {
        let sig = sig2();
        let pi_p = OneType::from_bit_string("10").unwrap();
        let psi = set(
            &sig,
            vec![
                BasicFormula::ExistsMu(mu("p(x1) & ~q(x1)", &sig)),
                BasicFormula::ExistsMu(mu("q(x1) & ~p(x1)", &sig)),
                BasicFormula::ExistsMu(mu("p(x1) & q(x1)", &sig)),
                BasicFormula::UniversalLink(pi_p.clone(), pi_p.clone(), false),
                BasicFormula::ExistWitness(pi_p, mu("q(x1)", &sig), true),
            ],
        );
        let config = SolveBasicConfig { candidate_cap: 2, ..Default::default() };
        let err = solve_basic_with(&psi, &config).unwrap_err();
        assert!(matches!(err, Error::Resource { ref stage, .. } if stage == "certificate"));
    }

    #[test]
    fn zeroary_valuation_lands_in_the_model() {
        let mut sig = sig1();
        sig.declare("z", 0).unwrap();
        let mut psi = set(&sig, vec![BasicFormula::ExistsMu(mu("p(x1)", &sig))]);
        psi.zeroary_valuation.insert("z".into(), true);
        let (_, model) = assert_sat(&psi);
        assert!(model.holds("z", &[]));
    }

    /// Random basic sets over one unary predicate, cross-checked against
    /// the bounded oracle on the rendered conjunction.
    #[test]
    fn random_small_sets_agree_with_the_oracle() {
        let sig = sig1();
        let pi_p = OneType::from_bit_string("1").unwrap();
        let pi_np = OneType::from_bit_string("0").unwrap();
        let mus = ["p(x1)", "~p(x1)", "p(x1) | ~p(x1)"];
        let mut rng = ChaCha8Rng::seed_from_u64(0x50b5);
        let mut sat_count = 0;
        let mut unsat_count = 0;
        for _ in 0..300 {
            let count = rng.gen_range(2..=6);
            let formulas: Vec<BasicFormula> = (0..count)
                .map(|_| {
                    let m = mu(mus[rng.gen_range(0..mus.len())], &sig);
                    let pi = if rng.gen_bool(0.5) { pi_p.clone() } else { pi_np.clone() };
                    let pi2 = if rng.gen_bool(0.5) { pi_p.clone() } else { pi_np.clone() };
                    match rng.gen_range(0..4) {
                        0 => BasicFormula::ExistsMu(m),
                        1 => BasicFormula::ForallMu(m),
                        2 => BasicFormula::ExistWitness(pi, m, rng.gen_bool(0.5)),
                        _ => BasicFormula::UniversalLink(pi, pi2, rng.gen_bool(0.5)),
                    }
                })
                .collect();
            let psi = set(&sig, formulas);
            let rendered = psi.to_formula().unwrap();
            let oracle = bounded_sat_oracle(&rendered, 6, &sig).unwrap();
            match solve_basic(&psi).unwrap() {
                BasicOutcome::Sat { model, .. } => {
                    sat_count += 1;
                    assert!(
                        evaluate(&model, &rendered, &[], &sig).unwrap(),
                        "solver model fails the conjunction"
                    );
                    assert!(
                        oracle.is_some(),
                        "solver says SAT, oracle finds nothing up to size 6: {rendered}"
                    );
                }
                BasicOutcome::Unsat => {
                    unsat_count += 1;
                    assert!(
                        oracle.is_none(),
                        "solver says UNSAT but the oracle found a model of {rendered}"
                    );
                }
            }
        }
        assert!(sat_count > 50, "suite too one-sided: {sat_count} SAT");
        assert!(unsat_count > 50, "suite too one-sided: {unsat_count} UNSAT");
    }
}
