//! Tiling systems and grid encodings over transitive relations.
//!
//! A tiling system lists tile types together with the pairs allowed to sit
//! next to each other horizontally and vertically. [`encode_2t`] and
//! [`encode_3t`] translate a system into fluted sentences over two or three
//! distinguished transitive relations whose models all contain an infinite
//! expanded grid, so tiling questions transfer to satisfiability questions.
//! The builders produce finite structures on which the encodings are checked
//! conjunct by conjunct: a toroidal model for the two-relation sentence and
//! a clipped window of the intended plane model for the three-relation one.

mod three;
mod two;

pub use three::{build_grid_window_3t, encode_3t, encode_3t_extended};
pub use two::{build_torus, check_grid_like, encode_2t, GridLikeReport};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::signature::valid_predicate_name;
use crate::{Error, Formula, Result, Signature};

/// A finite tiling system: tile names plus the admissible horizontal pairs
/// `(left, right)` and vertical pairs `(lower, upper)`.
///
/// Serializes as
/// `{"tiles":["A","B"],"horizontal":[["A","B"]],"vertical":[["A","A"]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSystem {
    pub tiles: Vec<String>,
    pub horizontal: Vec<(String, String)>,
    pub vertical: Vec<(String, String)>,
}

impl TilingSystem {
    /// Checks that tile names are distinct valid predicate names and that
    /// every adjacency pair references declared tiles. An empty tile set is
    /// allowed; the encoders reject it only when tile conjuncts are
    /// requested.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &self.tiles {
            if !valid_predicate_name(t) {
                return Err(Error::Signature(format!(
                    "tile name `{t}` is not usable as a predicate name"
                )));
            }
            if !seen.insert(t.as_str()) {
                return Err(Error::Signature(format!("tile `{t}` is declared twice")));
            }
        }
        for (axis, pairs) in [("horizontal", &self.horizontal), ("vertical", &self.vertical)] {
            for (a, b) in pairs {
                for t in [a, b] {
                    if !seen.contains(t.as_str()) {
                        return Err(Error::Signature(format!(
                            "{axis} pair ({a}, {b}) references undeclared tile `{t}`"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses and validates the JSON form.
    pub fn from_json(text: &str) -> Result<TilingSystem> {
        let ts: TilingSystem = serde_json::from_str(text)?;
        ts.validate()?;
        Ok(ts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tiling systems serialize")
    }

    fn matches<'a>(pairs: &'a [(String, String)], tile: &str, first: bool) -> Vec<&'a str> {
        let mut out: Vec<&str> = pairs
            .iter()
            .filter(|(a, b)| if first { a == tile } else { b == tile })
            .map(|(a, b)| if first { b.as_str() } else { a.as_str() })
            .collect();
        out.dedup();
        out
    }

    /// Tiles allowed directly to the right of `tile`.
    pub(crate) fn right_of(&self, tile: &str) -> Vec<&str> {
        Self::matches(&self.horizontal, tile, true)
    }

    /// Tiles allowed directly to the left of `tile`.
    pub(crate) fn left_of(&self, tile: &str) -> Vec<&str> {
        Self::matches(&self.horizontal, tile, false)
    }

    /// Tiles allowed directly above `tile`.
    pub(crate) fn above(&self, tile: &str) -> Vec<&str> {
        Self::matches(&self.vertical, tile, true)
    }

    /// Tiles allowed directly below `tile`.
    pub(crate) fn below(&self, tile: &str) -> Vec<&str> {
        Self::matches(&self.vertical, tile, false)
    }
}

/// A tile for every cell of a square block, keyed by `(column, row)`.
///
/// Serializes as `{"size": 4, "cells": {"0,0": "A", ...}}` with one
/// `"column,row"` key per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileAssignment {
    size: usize,
    cells: BTreeMap<(usize, usize), String>,
}

#[derive(Serialize, Deserialize)]
struct RawAssignment {
    size: usize,
    cells: BTreeMap<String, String>,
}

impl TileAssignment {
    /// An empty assignment over a `size` by `size` block.
    pub fn new(size: usize) -> TileAssignment {
        TileAssignment { size, cells: BTreeMap::new() }
    }

    /// Assigns `tile` to every cell of the block.
    pub fn uniform(size: usize, tile: &str) -> TileAssignment {
        let mut out = TileAssignment::new(size);
        for x in 0..size {
            for y in 0..size {
                out.cells.insert((x, y), tile.to_string());
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn set(&mut self, x: usize, y: usize, tile: &str) -> Result<()> {
        if x >= self.size || y >= self.size {
            return Err(Error::Signature(format!(
                "cell ({x}, {y}) lies outside a {0} by {0} block",
                self.size
            )));
        }
        self.cells.insert((x, y), tile.to_string());
        Ok(())
    }

    pub fn tile(&self, x: usize, y: usize) -> Option<&str> {
        self.cells.get(&(x, y)).map(String::as_str)
    }

    /// Cells without a tile, in column-major order.
    pub fn missing(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.size {
            for y in 0..self.size {
                if !self.cells.contains_key(&(x, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// The distinct tile names used, sorted.
    pub fn tiles_used(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.cells.values().map(String::as_str).collect();
        set.into_iter().collect()
    }

    pub fn from_json(text: &str) -> Result<TileAssignment> {
        let raw: RawAssignment = serde_json::from_str(text)?;
        let mut out = TileAssignment::new(raw.size);
        for (key, tile) in &raw.cells {
            let (x, y) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| {
                    Error::Signature(format!("cell key `{key}` is not of the form \"column,row\""))
                })?;
            out.set(x, y, tile)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let raw = RawAssignment {
            size: self.size,
            cells: self
                .cells
                .iter()
                .map(|(&(x, y), tile)| (format!("{x},{y}"), tile.clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("tile assignments serialize")
    }
}

/// An emitted grid sentence together with the signature it is meant to be
/// read in. The signature carries the distinguished transitive relations
/// and, for the two-relation encoding, the equality switch; neither is
/// recoverable from the formula alone.
#[derive(Debug, Clone)]
pub struct GridEncoding {
    pub formula: Formula,
    pub signature: Signature,
}

impl GridEncoding {
    fn assemble(groups: &[(&'static str, Vec<Formula>)], signature: Signature) -> Result<GridEncoding> {
        let conjuncts: Vec<Formula> = groups.iter().flat_map(|(_, fs)| fs.iter().cloned()).collect();
        let formula = Formula::conj(conjuncts);
        formula.validate(&signature)?;
        Ok(GridEncoding { formula, signature })
    }
}

/// `var` satisfies exactly one of `preds`: at least one of the atoms holds
/// and no two hold together.
fn exactly_one(preds: &[String], var: usize) -> Formula {
    let atoms: Vec<Formula> = preds.iter().map(|p| Formula::atom(p, &[var])).collect();
    if atoms.len() == 1 {
        return atoms.into_iter().next().expect("one atom");
    }
    let mut excl = Vec::new();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            excl.push(Formula::or(
                Formula::not(atoms[i].clone()),
                Formula::not(atoms[j].clone()),
            ));
        }
    }
    Formula::and(Formula::disj(atoms), Formula::conj(excl))
}

/// Declares the tile predicates on top of a grid signature, rejecting names
/// that collide with the grid predicates.
fn declare_tiles(sig: &mut Signature, ts: &TilingSystem) -> Result<()> {
    for t in &ts.tiles {
        if sig.contains(t) {
            return Err(Error::Signature(format!(
                "tile name `{t}` collides with a grid predicate"
            )));
        }
        sig.declare(t, 1)?;
    }
    Ok(())
}
