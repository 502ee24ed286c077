//! Relational signatures: predicate declarations, distinguished transitive
//! predicates, and the equality switch.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Keywords that cannot be used as predicate names.
const RESERVED: [&str; 4] = ["forall", "exists", "true", "false"];

/// A relational signature.
///
/// Holds every declared predicate with its arity, the subset of binary
/// predicates distinguished as transitive, and whether equality atoms are
/// permitted. Predicate maps are ordered so that every iteration over a
/// signature is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    preds: BTreeMap<String, usize>,
    distinguished: BTreeSet<String>,
    equality: bool,
}

/// A name is usable as a predicate if it is an identifier (leading letter or
/// underscore), is not a keyword, and cannot be confused with a variable
/// token `x<digits>`.
pub fn valid_predicate_name(name: &str) -> bool {
    let mut chars = name.chars();
    let starts_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    let rest_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    let is_var = name.len() > 1
        && name.starts_with('x')
        && name[1..].chars().all(|c| c.is_ascii_digit());
    starts_ok && rest_ok && !is_var && !RESERVED.contains(&name)
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// Declares a predicate. Redeclaring a name with the same arity is a
    /// no-op; redeclaring with a different arity is an error.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<()> {
        if !valid_predicate_name(name) {
            return Err(Error::Signature(format!(
                "`{name}` is not a valid predicate name"
            )));
        }
        match self.preds.get(name) {
            Some(&a) if a != arity => Err(Error::Signature(format!(
                "`{name}` redeclared with arity {arity}, previously {a}"
            ))),
            _ => {
                self.preds.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    /// Declares a binary predicate and marks it transitive.
    pub fn declare_transitive(&mut self, name: &str) -> Result<()> {
        self.declare(name, 2)?;
        self.distinguished.insert(name.to_string());
        Ok(())
    }

    pub fn set_equality(&mut self, enabled: bool) {
        self.equality = enabled;
    }

    pub fn equality_enabled(&self) -> bool {
        self.equality
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.preds.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.preds.contains_key(name)
    }

    pub fn is_distinguished(&self, name: &str) -> bool {
        self.distinguished.contains(name)
    }

    /// All predicates with arities, in name order.
    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.preds.iter().map(|(n, &a)| (n.as_str(), a))
    }

    /// Distinguished predicate names, in name order.
    pub fn distinguished(&self) -> impl Iterator<Item = &str> {
        self.distinguished.iter().map(|s| s.as_str())
    }

    /// Names of the given arity, in name order.
    pub fn predicates_of_arity(&self, arity: usize) -> Vec<&str> {
        self.preds
            .iter()
            .filter(|&(_, &a)| a == arity)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Unary predicate names, in name order. Every 1-type bit layout in this
    /// crate indexes into this list.
    pub fn unary_predicates(&self) -> Vec<&str> {
        self.predicates_of_arity(1)
    }

    pub fn max_arity(&self) -> usize {
        self.preds.values().copied().max().unwrap_or(0)
    }

    pub fn num_predicates(&self) -> usize {
        self.preds.len()
    }

    /// Adds every declaration of `other`; arity conflicts are errors.
    /// Equality is enabled if either side enables it.
    pub fn merge(&mut self, other: &Signature) -> Result<()> {
        for (name, &arity) in &other.preds {
            self.declare(name, arity)?;
        }
        for name in &other.distinguished {
            self.distinguished.insert(name.clone());
        }
        self.equality |= other.equality;
        Ok(())
    }

    /// Returns a fresh name not present in the signature, formed by appending
    /// a counter to `stem`.
    pub fn fresh_name(&self, stem: &str) -> String {
        if !self.contains(stem) && valid_predicate_name(stem) {
            return stem.to_string();
        }
        for k in 0.. {
            let candidate = format!("{stem}{k}");
            if !self.contains(&candidate) {
                return candidate;
            }
        }
        unreachable!()
    }
}
