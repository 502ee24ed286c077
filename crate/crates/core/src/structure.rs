//! Finite structures: explicit domains and predicate extensions, with
//! transitivity checking and transitive closure on binary predicates.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signature::Signature;

/// A finite interpretation. Elements are `0..domain`. A predicate absent
/// from `extensions` has the empty extension; 0-ary predicates hold iff
/// their extension contains the empty tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub domain: usize,
    #[serde(default)]
    pub extensions: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl Structure {
    pub fn new(domain: usize) -> Structure {
        Structure {
            domain,
            extensions: BTreeMap::new(),
        }
    }

    pub fn holds(&self, pred: &str, tuple: &[usize]) -> bool {
        self.extensions
            .get(pred)
            .is_some_and(|ext| ext.contains(tuple))
    }

    pub fn tuples(&self, pred: &str) -> impl Iterator<Item = &Vec<usize>> {
        self.extensions.get(pred).into_iter().flatten()
    }

    pub fn insert(&mut self, pred: &str, tuple: Vec<usize>) {
        self.extensions
            .entry(pred.to_string())
            .or_default()
            .insert(tuple);
    }

    /// Sets a 0-ary predicate's truth value.
    pub fn set_zeroary(&mut self, pred: &str, value: bool) {
        if value {
            self.insert(pred, vec![]);
        } else if let Some(ext) = self.extensions.get_mut(pred) {
            ext.remove(&vec![]);
        }
    }

    /// Signature-independent well-formedness: nonempty domain, in-range
    /// tuple entries, consistent tuple lengths per predicate.
    pub fn validate_shape(&self) -> Result<()> {
        if self.domain == 0 {
            return Err(Error::InvalidStructure("empty domains are disallowed".into()));
        }
        for (pred, ext) in &self.extensions {
            let mut len: Option<usize> = None;
            for tuple in ext {
                match len {
                    None => len = Some(tuple.len()),
                    Some(l) if l != tuple.len() => {
                        return Err(Error::InvalidStructure(format!(
                            "`{pred}` mixes tuple lengths {l} and {}",
                            tuple.len()
                        )))
                    }
                    _ => {}
                }
                if let Some(&bad) = tuple.iter().find(|&&e| e >= self.domain) {
                    return Err(Error::InvalidStructure(format!(
                        "`{pred}` contains element {bad} outside the domain 0..{}",
                        self.domain
                    )));
                }
            }
        }
        Ok(())
    }

    /// Shape check plus signature conformance: every extension belongs to a
    /// declared predicate and matches its arity.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        self.validate_shape()?;
        for (pred, ext) in &self.extensions {
            match sig.arity(pred) {
                None => return Err(Error::UnknownPredicate(pred.clone())),
                Some(a) => {
                    if let Some(t) = ext.iter().next() {
                        if t.len() != a {
                            return Err(Error::ArityMismatch {
                                pred: pred.clone(),
                                declared: a,
                                used: t.len(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// All triples (a, b, c) with (a,b) and (b,c) in `pred` but (a,c)
    /// missing, in ascending order. Empty iff the extension is transitive.
    pub fn check_transitive(&self, pred: &str) -> Result<Vec<(usize, usize, usize)>> {
        let pairs = self.binary_pairs(pred)?;
        let mut out = Vec::new();
        for &(a, b) in &pairs {
            for &(b2, c) in &pairs {
                if b2 == b && !pairs.contains(&(a, c)) {
                    out.push((a, b, c));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Returns a copy in which `pred`'s extension is replaced by its
    /// transitive closure. Idempotent.
    pub fn transitive_closure(&self, pred: &str) -> Result<Structure> {
        if self.domain > 4096 {
            return Err(Error::resource(
                "transitive_closure",
                format!("domain {} exceeds the closure limit 4096", self.domain),
            ));
        }
        let pairs = self.binary_pairs(pred)?;
        let n = self.domain;
        let mut adj = vec![false; n * n];
        for &(a, b) in &pairs {
            adj[a * n + b] = true;
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
        let closed: BTreeSet<Vec<usize>> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| adj[a * n + b])
            .map(|(a, b)| vec![a, b])
            .collect();
        let mut out = self.clone();
        out.extensions.insert(pred.to_string(), closed);
        Ok(out)
    }

    fn binary_pairs(&self, pred: &str) -> Result<BTreeSet<(usize, usize)>> {
        let mut pairs = BTreeSet::new();
        for tuple in self.tuples(pred) {
            if tuple.len() != 2 {
                return Err(Error::InvalidStructure(format!(
                    "`{pred}` is not binary in this structure"
                )));
            }
            pairs.insert((tuple[0], tuple[1]));
        }
        Ok(pairs)
    }
}

/// Parses the JSON structure format and checks well-formedness.
pub fn structure_from_json(text: &str) -> Result<Structure> {
    let s: Structure = serde_json::from_str(text)?;
    s.validate_shape()?;
    Ok(s)
}

impl Structure {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("structure serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Structure {
        let mut s = Structure::new(3);
        s.insert("t", vec![0, 1]);
        s.insert("t", vec![1, 2]);
        s
    }

    #[test]
    fn transitivity_violations_are_reported() {
        let s = chain();
        assert_eq!(s.check_transitive("t").unwrap(), vec![(0, 1, 2)]);
        let mut full = Structure::new(3);
        for a in 0..3 {
            for b in 0..3 {
                full.insert("t", vec![a, b]);
            }
        }
        assert!(full.check_transitive("t").unwrap().is_empty());
        assert!(Structure::new(2).check_transitive("t").unwrap().is_empty());
    }

    #[test]
    fn closure_adds_missing_pairs_and_is_idempotent() {
        let s = chain();
        let c = s.transitive_closure("t").unwrap();
        assert!(c.holds("t", &[0, 2]));
        assert!(c.check_transitive("t").unwrap().is_empty());
        assert_eq!(c.transitive_closure("t").unwrap(), c);

        let mut cycle = Structure::new(2);
        cycle.insert("t", vec![0, 1]);
        cycle.insert("t", vec![1, 0]);
        let cc = cycle.transitive_closure("t").unwrap();
        for pair in [[0, 1], [1, 0], [0, 0], [1, 1]] {
            assert!(cc.holds("t", &pair));
        }
    }

    #[test]
    fn json_round_trip_matches_format() {
        let mut s = Structure::new(3);
        s.insert("p", vec![0]);
        s.insert("p", vec![2]);
        s.insert("t", vec![0, 1]);
        let json = s.to_json();
        assert_eq!(
            json,
            r#"{"domain":3,"extensions":{"p":[[0],[2]],"t":[[0,1]]}}"#
        );
        assert_eq!(structure_from_json(&json).unwrap(), s);
    }

    #[test]
    fn zeroary_extensions_serialize_as_empty_tuples() {
        let mut s = Structure::new(1);
        s.set_zeroary("z", true);
        assert!(s.holds("z", &[]));
        let json = s.to_json();
        assert_eq!(json, r#"{"domain":1,"extensions":{"z":[[]]}}"#);
        s.set_zeroary("z", false);
        assert!(!s.holds("z", &[]));
    }

    #[test]
    fn shape_validation_rejects_bad_structures() {
        assert!(structure_from_json(r#"{"domain":0,"extensions":{}}"#).is_err());
        assert!(structure_from_json(r#"{"domain":2,"extensions":{"p":[[5]]}}"#).is_err());
        assert!(
            structure_from_json(r#"{"domain":2,"extensions":{"p":[[0],[0,1]]}}"#).is_err()
        );
        let ok = structure_from_json(r#"{"domain":2}"#).unwrap();
        assert_eq!(ok.extensions.len(), 0);
    }

    #[test]
    fn validate_against_signature() {
        let mut sig = Signature::new();
        sig.declare("p", 1).unwrap();
        let mut s = Structure::new(2);
        s.insert("p", vec![1]);
        assert!(s.validate(&sig).is_ok());
        s.insert("q", vec![0]);
        assert!(matches!(s.validate(&sig), Err(Error::UnknownPredicate(_))));
    }
}
