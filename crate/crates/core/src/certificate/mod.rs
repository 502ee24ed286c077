//! Certificates: finite summaries of transitive structures that decide
//! satisfiability for sets of basic formulas.
//!
//! A super-type records an element's 1-type together with the 1-types of
//! the elements it reaches through the distinguished predicate `t`.  A
//! certificate is a set of super-types plus a transitive order on the
//! realized 1-types saying which type-pairs are universally `t`-linked.
//! Certificates abstract structures exactly enough for basic formulas:
//! every structure's certificate satisfies the same basic formulas, and
//! every certificate is realized by a structure with two elements per
//! super-type.

pub mod solve;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::normalform::{BasicFormula, OneType};
use crate::signature::Signature;
use crate::structure::Structure;

pub use solve::{solve_basic, solve_basic_with, BasicOutcome, SolveBasicConfig};

/// A 1-type together with the set of 1-types reachable through `t`.
/// The reach may be empty and need not contain the base.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SuperType {
    pub base: OneType,
    pub reach: BTreeSet<OneType>,
}

impl SuperType {
    pub fn new(base: OneType, reach: BTreeSet<OneType>) -> Self {
        SuperType { base, reach }
    }
}

/// A set of super-types with a transitive order on the realized 1-types.
/// Valid certificates additionally satisfy the closure conditions checked
/// by [`is_certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    pub supertypes: BTreeSet<SuperType>,
    pub order: BTreeSet<(OneType, OneType)>,
}

impl Certificate {
    /// The realized 1-types: bases of the super-types.
    pub fn types(&self) -> BTreeSet<OneType> {
        self.supertypes.iter().map(|st| st.base.clone()).collect()
    }

    /// Width of the 1-types, if the certificate is nonempty.
    pub fn width(&self) -> Option<usize> {
        self.supertypes.iter().next().map(|st| st.base.width())
    }

    /// Serializes to the certificate dump format: bitstring positions
    /// follow sorted unary-predicate names, `1` meaning positive.
    pub fn to_json(&self) -> String {
        let supertypes: Vec<serde_json::Value> = self
            .supertypes
            .iter()
            .map(|st| {
                serde_json::json!({
                    "base": st.base.to_bit_string(),
                    "reach": st.reach.iter().map(OneType::to_bit_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        let order: Vec<serde_json::Value> = self
            .order
            .iter()
            .map(|(a, b)| serde_json::json!([a.to_bit_string(), b.to_bit_string()]))
            .collect();
        serde_json::json!({ "supertypes": supertypes, "order": order }).to_string()
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let bad = |msg: &str| Error::InvalidCertificate(msg.to_string());
        let supertypes = value
            .get("supertypes")
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad("missing `supertypes` array"))?
            .iter()
            .map(|entry| {
                let base = entry
                    .get("base")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| bad("super-type needs a `base` bitstring"))?;
                let reach = entry
                    .get("reach")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| bad("super-type needs a `reach` array"))?
                    .iter()
                    .map(|r| {
                        r.as_str()
                            .ok_or_else(|| bad("`reach` entries must be bitstrings"))
                            .and_then(OneType::from_bit_string)
                    })
                    .collect::<Result<BTreeSet<_>>>()?;
                Ok(SuperType::new(OneType::from_bit_string(base)?, reach))
            })
            .collect::<Result<BTreeSet<_>>>()?;
        let order = value
            .get("order")
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad("missing `order` array"))?
            .iter()
            .map(|pair| {
                let pair = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                    bad("`order` entries must be two-element arrays")
                })?;
                let a = pair[0]
                    .as_str()
                    .ok_or_else(|| bad("`order` entries must be bitstrings"))?;
                let b = pair[1]
                    .as_str()
                    .ok_or_else(|| bad("`order` entries must be bitstrings"))?;
                Ok((OneType::from_bit_string(a)?, OneType::from_bit_string(b)?))
            })
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Certificate { supertypes, order })
    }
}

/// Outcome of [`is_certificate`]: overall verdict plus one line per
/// violation found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Checks the certificate conditions and reports each violation:
/// the order must relate realized 1-types only and be transitive;
/// every reached 1-type needs a realized super-type whose reach is
/// contained in the reacher's (C1); and an order pair forces every
/// super-type of the source to reach the target's base and everything
/// the target reaches (C2).
pub fn is_certificate(c: &Certificate) -> CertificateReport {
    let mut violations = Vec::new();
    let widths: BTreeSet<usize> = c
        .supertypes
        .iter()
        .flat_map(|st| {
            std::iter::once(st.base.width()).chain(st.reach.iter().map(OneType::width))
        })
        .chain(c.order.iter().flat_map(|(a, b)| [a.width(), b.width()]))
        .collect();
    if widths.len() > 1 {
        violations.push(format!(
            "mixed 1-type widths: {:?}",
            widths.into_iter().collect::<Vec<_>>()
        ));
        return CertificateReport { ok: false, violations };
    }

    let realized = c.types();
    for (a, b) in &c.order {
        for t in [a, b] {
            if !realized.contains(t) {
                violations.push(format!("order relates unrealized 1-type {t}"));
            }
        }
    }
    for (a, b) in &c.order {
        for (b2, d) in &c.order {
            if b == b2 && !c.order.contains(&(a.clone(), d.clone())) {
                violations.push(format!(
                    "order is not transitive: {a} before {b} before {d}, but not {a} before {d}"
                ));
            }
        }
    }
    for st in &c.supertypes {
        for target in &st.reach {
            let supported = c
                .supertypes
                .iter()
                .any(|cand| cand.base == *target && cand.reach.is_subset(&st.reach));
            if !supported {
                violations.push(format!(
                    "C1 fails: <{}; ..> reaches {} but no super-type based there has \
                     a contained reach",
                    st.base, target
                ));
            }
        }
    }
    for (a, b) in &c.order {
        for st in c.supertypes.iter().filter(|st| st.base == *a) {
            for st2 in c.supertypes.iter().filter(|st| st.base == *b) {
                if !st.reach.contains(b) || !st2.reach.is_subset(&st.reach) {
                    violations.push(format!(
                        "C2 fails: {a} is ordered before {b} but a super-type at {a} \
                         does not absorb a super-type at {b}"
                    ));
                }
            }
        }
    }
    violations.sort();
    violations.dedup();
    CertificateReport { ok: violations.is_empty(), violations }
}

/// The distinguished predicate of `sig`, required to be unique.
pub(crate) fn single_distinguished(sig: &Signature) -> Result<String> {
    let mut it = sig.distinguished();
    match (it.next(), it.next()) {
        (Some(t), None) => Ok(t.to_string()),
        _ => Err(Error::Signature(
            "certificates need exactly one distinguished predicate".into(),
        )),
    }
}

/// Reads off the certificate of a transitive structure: the realized
/// super-types, ordered by universal `t`-linkage between realized 1-types.
/// Self-pairs count, so a 1-type precedes itself only when every element
/// of that type is `t`-related to every element of that type, itself
/// included.
pub fn certificate_of(s: &Structure, sig: &Signature) -> Result<Certificate> {
    s.validate(sig)?;
    let t = single_distinguished(sig)?;
    for (pred, ext) in &s.extensions {
        let arity = sig.arity(pred).unwrap_or(0);
        if arity >= 2 && pred != &t && !ext.is_empty() {
            return Err(Error::WrongFragment(format!(
                "structure interprets the non-distinguished predicate `{pred}` of arity \
                 {arity}; certificates cover unary predicates and `{t}` only"
            )));
        }
    }
    let violations = s.check_transitive(&t)?;
    if let Some((a, b, c)) = violations.first() {
        return Err(Error::InvalidStructure(format!(
            "`{t}` is not transitive: ({a},{b}) and ({b},{c}) hold but ({a},{c}) does not"
        )));
    }

    let types: Vec<OneType> = (0..s.domain)
        .map(|a| OneType::of_element(s, sig, a))
        .collect();
    let supertypes: BTreeSet<SuperType> = (0..s.domain)
        .map(|a| {
            let reach = (0..s.domain)
                .filter(|&b| s.holds(&t, &[a, b]))
                .map(|b| types[b].clone())
                .collect();
            SuperType::new(types[a].clone(), reach)
        })
        .collect();

    let mut by_type: BTreeMap<&OneType, Vec<usize>> = BTreeMap::new();
    for (a, ty) in types.iter().enumerate() {
        by_type.entry(ty).or_default().push(a);
    }
    let mut order = BTreeSet::new();
    for (pi, xs) in &by_type {
        for (pi2, ys) in &by_type {
            let linked = xs
                .iter()
                .all(|&a| ys.iter().all(|&b| s.holds(&t, &[a, b])));
            if linked {
                order.insert(((*pi).clone(), (*pi2).clone()));
            }
        }
    }
    Ok(Certificate { supertypes, order })
}

/// The certificate-satisfaction relation: six conditions selected by the
/// shape of the basic formula and the polarity of its `t`-literal.
pub fn cert_models(c: &Certificate, psi: &BasicFormula, sig: &Signature) -> Result<bool> {
    let w = sig.unary_predicates().len();
    if let Some(cw) = c.width() {
        if cw != w {
            return Err(Error::Signature(format!(
                "certificate width {cw} does not match the signature's {w} unary predicates"
            )));
        }
    }
    let check_width = |pi: &OneType| -> Result<()> {
        if pi.width() != w {
            return Err(Error::Signature(format!(
                "1-type width {} does not match the signature's {w} unary predicates",
                pi.width()
            )));
        }
        Ok(())
    };

    Ok(match psi {
        // Positive witness: every super-type at the base reaches a 1-type
        // entailing mu.
        BasicFormula::ExistWitness(pi, mu, true) => {
            check_width(pi)?;
            c.supertypes
                .iter()
                .filter(|st| st.base == *pi)
                .map(|st| st.reach.iter().any(|pi2| mu.eval(pi2, sig)))
                .all(|ok| ok)
        }
        // Positive link: realized source and target must be ordered.
        BasicFormula::UniversalLink(pi, pi2, true) => {
            check_width(pi)?;
            check_width(pi2)?;
            let realized = c.types();
            !(realized.contains(pi) && realized.contains(pi2))
                || c.order.contains(&(pi.clone(), pi2.clone()))
        }
        // Negative witness: every super-type at the base has a realized
        // mu-type that neither the base nor anything it reaches precedes.
        BasicFormula::ExistWitness(pi, mu, false) => {
            check_width(pi)?;
            c.supertypes
                .iter()
                .filter(|st| st.base == *pi)
                .map(|st| {
                    c.supertypes.iter().any(|cand| {
                        mu.eval(&cand.base, sig)
                            && !c.order.contains(&(pi.clone(), cand.base.clone()))
                            && !st.reach.iter().any(|alpha| {
                                c.order.contains(&(alpha.clone(), cand.base.clone()))
                            })
                    })
                })
                .all(|ok| ok)
        }
        // Negative link: no super-type at the base may reach the target.
        BasicFormula::UniversalLink(pi, pi2, false) => {
            check_width(pi)?;
            check_width(pi2)?;
            c.supertypes
                .iter()
                .filter(|st| st.base == *pi)
                .all(|st| !st.reach.contains(pi2))
        }
        BasicFormula::ExistsMu(mu) => {
            c.supertypes.iter().any(|st| mu.eval(&st.base, sig))
        }
        BasicFormula::ForallMu(mu) => {
            c.supertypes.iter().all(|st| mu.eval(&st.base, sig))
        }
    })
}

/// Builds a structure realizing the certificate on exactly two elements
/// per super-type: a plus-element serving positive witness requests and a
/// minus-element serving negative ones.  `t` is the transitive closure of
/// direct witness edges (into plus-elements whose base and reach the
/// source reaches) and order edges (between all elements of ordered
/// bases).
pub fn build_model(c: &Certificate, sig: &Signature) -> Result<Structure> {
    let report = is_certificate(c);
    if !report.ok {
        return Err(Error::InvalidCertificate(report.violations.join("; ")));
    }
    if c.supertypes.is_empty() {
        return Err(Error::InvalidCertificate(
            "an empty certificate has no nonempty realization".into(),
        ));
    }
    let w = sig.unary_predicates().len();
    if c.width() != Some(w) {
        return Err(Error::Signature(format!(
            "certificate width {:?} does not match the signature's {w} unary predicates",
            c.width()
        )));
    }
    let t = single_distinguished(sig)?;

    let sts: Vec<&SuperType> = c.supertypes.iter().collect();
    // Element 2i is the plus-element of super-type i, 2i+1 its minus-element.
    let mut s = Structure::new(2 * sts.len());
    let unaries: Vec<&str> = sig.unary_predicates();
    for (i, st) in sts.iter().enumerate() {
        for (bit, u) in unaries.iter().enumerate() {
            if st.base.bit(bit) {
                s.insert(u, vec![2 * i]);
                s.insert(u, vec![2 * i + 1]);
            }
        }
    }
    for (i, st) in sts.iter().enumerate() {
        for (j, st2) in sts.iter().enumerate() {
            let absorbed =
                st.reach.contains(&st2.base) && st2.reach.is_subset(&st.reach);
            let ordered = c.order.contains(&(st.base.clone(), st2.base.clone()));
            for a in [2 * i, 2 * i + 1] {
                if absorbed {
                    s.insert(&t, vec![a, 2 * j]);
                }
                if ordered {
                    s.insert(&t, vec![a, 2 * j]);
                    s.insert(&t, vec![a, 2 * j + 1]);
                }
            }
        }
    }
    s.transitive_closure(&t)
}
