//! Grid encoding over two transitive relations, with equality.
//!
//! Colours `c00..c33` tile the plane with period 4 in both directions:
//! cell `(k, l)` carries `c{k mod 4}{l mod 4}`. The relations `b` and `r`
//! alternate as clique glue: `b` joins the 2 by 2 blocks with even-even
//! lower-left corners, `r` the blocks with odd-odd corners, and mixing
//! rules force enough agreement between the two for the derived successor
//! relations to be confluent. [`build_torus`] realizes the intended finite
//! model on `Z(4m) x Z(4m)` and [`check_grid_like`] verifies the derived
//! successors directly on any structure.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{declare_tiles, exactly_one, GridEncoding, TileAssignment, TilingSystem};
use crate::signature::valid_predicate_name;
use crate::{Error, Formula, Result, Signature, Structure};

/// Colour name with both indices reduced mod 4.
fn colour(i: usize, j: usize) -> String {
    format!("c{}{}", i % 4, j % 4)
}

fn colour_names() -> Vec<String> {
    let mut out = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            out.push(colour(i, j));
        }
    }
    out
}

fn a1(p: &str) -> Formula {
    Formula::atom(p, &[1])
}

fn a2(p: &str) -> Formula {
    Formula::atom(p, &[2])
}

fn rel(p: &str) -> Formula {
    Formula::atom(p, &[1, 2])
}

/// The signature of the encoding: transitive `b` and `r`, the sixteen
/// colours, equality on, plus one unary predicate per tile if requested.
fn grid_signature(ts: &TilingSystem, include_tiles: bool) -> Result<Signature> {
    let mut sig = Signature::new();
    sig.declare_transitive("b")?;
    sig.declare_transitive("r")?;
    for name in colour_names() {
        sig.declare(&name, 1)?;
    }
    sig.set_equality(true);
    if include_tiles {
        declare_tiles(&mut sig, ts)?;
    }
    Ok(sig)
}

/// One step of a clique cycle: everything coloured `from` sees a `t`-related
/// element coloured `to`.
fn clique_step(t: &str, from: &str, to: &str) -> Formula {
    Formula::forall(
        1,
        Formula::implies(
            a1(from),
            Formula::exists(2, Formula::conj(vec![rel(t), a2(to)])),
        ),
    )
}

/// A mixing rule: `prem`-coloured elements whose `t_from`-successors carry
/// one of the two trigger colours are also `t_to`-related to them.
fn mixing_rule(prem: &str, t_from: &str, trig1: &str, trig2: &str, t_to: &str) -> Formula {
    Formula::forall(
        1,
        Formula::implies(
            a1(prem),
            Formula::forall(
                2,
                Formula::implies(
                    Formula::and(rel(t_from), Formula::or(a2(trig1), a2(trig2))),
                    rel(t_to),
                ),
            ),
        ),
    )
}

/// The premise and trigger colours of the four mixing-rule families. Each
/// trigger names a colour the premise shares a red block with; the pairs are
/// exactly the colour pairs of the inter-clique arrows.
fn mixing_table() -> Vec<(String, String, String)> {
    let mut rows = Vec::with_capacity(8);
    for i in [0usize, 2] {
        rows.push((colour(i, i), colour(i, i + 3), colour(i + 3, i)));
    }
    for i in [1usize, 3] {
        rows.push((colour(i, i), colour(i, i + 1), colour(i + 1, i)));
    }
    for i in [0usize, 2] {
        rows.push((colour(i, i + 1), colour(i, i + 2), colour(i + 3, i + 1)));
    }
    for i in [1usize, 3] {
        // The triggers mirror the previous family under the diagonal flip:
        // one more row down, one column right.
        rows.push((colour(i, i + 3), colour(i + 1, i + 3), colour(i, i + 2)));
    }
    rows
}

/// Red pairs carrying a trigger colour must also be blue, 8 conjuncts. Red
/// edges only ever sit inside red blocks, so the universal form is safe.
fn red_to_blue_rules() -> Vec<Formula> {
    mixing_table()
        .iter()
        .map(|(prem, t1, t2)| mixing_rule(prem, "r", t1, t2, "b"))
        .collect()
}

/// Each premise-coloured element has, per trigger colour, a successor reached
/// by blue and red at once, 16 conjuncts. The universal blue-to-red transfer
/// is unsatisfiable next to the identity group on any model spanning two full
/// colour periods (blue chains of clique, arrow, clique reach a second period
/// while red blocks cannot), so this direction asserts witnesses instead.
fn blue_to_red_rules() -> Vec<Formula> {
    let mut out = Vec::with_capacity(16);
    for (prem, t1, t2) in mixing_table() {
        for trig in [&t1, &t2] {
            out.push(Formula::forall(
                1,
                Formula::implies(
                    a1(&prem),
                    Formula::exists(2, Formula::conj(vec![rel("b"), a2(trig), rel("r")])),
                ),
            ));
        }
    }
    out
}

/// The grid part of the encoding, grouped for inspection. 74 conjuncts.
pub(crate) fn grid_groups() -> Vec<(&'static str, Vec<Formula>)> {
    let origin = vec![Formula::exists(1, a1("c00"))];
    let partition = vec![Formula::forall(1, exactly_one(&colour_names(), 1))];

    // Transitive paths never join distinct elements of one colour.
    let mut identity = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let c = colour(i, j);
            identity.push(Formula::forall(
                1,
                Formula::implies(
                    a1(&c),
                    Formula::forall(
                        2,
                        Formula::implies(
                            Formula::and(Formula::or(rel("b"), rel("r")), a2(&c)),
                            Formula::Eq(1, 2),
                        ),
                    ),
                ),
            ));
        }
    }

    // Every element sits in a 4-element clique of its parity: the cycle
    // ij -> (i+1)j -> (i+1)(j+1) -> i(j+1) -> ij closes by the identity
    // group, so the four witnesses collapse to one clique.
    let mut blue_cliques = Vec::with_capacity(16);
    for i in [0usize, 2] {
        for j in [0usize, 2] {
            blue_cliques.push(clique_step("b", &colour(i, j), &colour(i + 1, j)));
            blue_cliques.push(clique_step("b", &colour(i + 1, j), &colour(i + 1, j + 1)));
            blue_cliques.push(clique_step("b", &colour(i + 1, j + 1), &colour(i, j + 1)));
            blue_cliques.push(clique_step("b", &colour(i, j + 1), &colour(i, j)));
        }
    }
    let mut red_cliques = Vec::with_capacity(16);
    for i in [1usize, 3] {
        for j in [1usize, 3] {
            red_cliques.push(clique_step("r", &colour(i, j), &colour(i + 1, j)));
            red_cliques.push(clique_step("r", &colour(i + 1, j), &colour(i + 1, j + 1)));
            red_cliques.push(clique_step("r", &colour(i + 1, j + 1), &colour(i, j + 1)));
            red_cliques.push(clique_step("r", &colour(i, j + 1), &colour(i, j)));
        }
    }

    vec![
        ("origin", origin),
        ("partition", partition),
        ("identity", identity),
        ("blue_cliques", blue_cliques),
        ("red_cliques", red_cliques),
        ("red_implies_blue", red_to_blue_rules()),
        ("blue_implies_red", blue_to_red_rules()),
    ]
}

/// Tile conjuncts: a tile partition plus the horizontal and vertical
/// adjacency rules, case-split over the colour of the source so each
/// conjunct stays fluted. 32 adjacency conjuncts per tile.
pub(crate) fn tile_groups(ts: &TilingSystem) -> Vec<(&'static str, Vec<Formula>)> {
    let tile_partition = vec![Formula::forall(1, exactly_one(&ts.tiles, 1))];
    let adjacency = |tile: &str, allowed: &[&str], src: String, t: &str, dst: String| {
        let succ: Vec<Formula> = allowed.iter().map(|c| a2(c)).collect();
        Formula::forall(
            1,
            Formula::implies(
                Formula::conj(vec![a1(tile), a1(&src)]),
                Formula::forall(
                    2,
                    Formula::implies(Formula::and(rel(t), a2(&dst)), Formula::disj(succ)),
                ),
            ),
        )
    };

    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for tile in &ts.tiles {
        let right = ts.right_of(tile);
        let up = ts.above(tile);
        for i in 0..4 {
            let t = if i % 2 == 0 { "b" } else { "r" };
            for j in 0..4 {
                horizontal.push(adjacency(tile, &right, colour(i, j), t, colour(i + 1, j)));
            }
        }
        for j in 0..4 {
            let t = if j % 2 == 0 { "b" } else { "r" };
            for i in 0..4 {
                vertical.push(adjacency(tile, &up, colour(i, j), t, colour(i, j + 1)));
            }
        }
    }
    vec![
        ("tile_partition", tile_partition),
        ("tile_horizontal", horizontal),
        ("tile_vertical", vertical),
    ]
}

/// Encodes a tiling system over two transitive relations with equality.
///
/// The grid part alone is satisfiable over infinite grids and over the tori
/// built by [`build_torus`]; with `include_tiles` the sentence is satisfiable
/// exactly when the system tiles the plane or some torus. Fails when tile
/// conjuncts are requested for an empty tile set.
pub fn encode_2t(ts: &TilingSystem, include_tiles: bool) -> Result<GridEncoding> {
    ts.validate()?;
    if include_tiles && ts.tiles.is_empty() {
        return Err(Error::Signature(
            "cannot emit tile conjuncts for an empty tile set".to_string(),
        ));
    }
    let signature = grid_signature(ts, include_tiles)?;
    let mut groups = grid_groups();
    if include_tiles {
        groups.extend(tile_groups(ts));
    }
    GridEncoding::assemble(&groups, signature)
}

/// Builds the intended toroidal model on `Z(4m) x Z(4m)` expanded with the
/// tiles of `ta`, which must cover every cell of the `4m` by `4m` block.
///
/// Element `(k, l)` is index `k*4m + l` and carries colour
/// `c{k mod 4}{l mod 4}`. Blue cliques cover the 2 by 2 blocks with
/// even-even corners, red cliques those with odd-odd corners (wrapping),
/// and directed blue edges run between cliques around each red block, away
/// from the block when its corner `(x, y)` has `x = y (mod 4)` and towards
/// it otherwise. Both relations are then closed transitively.
pub fn build_torus(m: usize, ta: &TileAssignment) -> Result<Structure> {
    if m == 0 {
        return Err(Error::Signature("torus parameter must be positive".to_string()));
    }
    let side = 4 * m;
    if side * side > 4096 {
        return Err(Error::resource(
            "build_torus",
            format!("torus with {} elements exceeds the closure limit 4096", side * side),
        ));
    }
    if ta.size() != side {
        return Err(Error::Signature(format!(
            "assignment covers a {0} by {0} block, expected {side} by {side}",
            ta.size()
        )));
    }
    if let Some(&(x, y)) = ta.missing().first() {
        return Err(Error::Signature(format!("assignment misses cell ({x}, {y})")));
    }
    for tile in ta.tiles_used() {
        if !valid_predicate_name(tile) {
            return Err(Error::Signature(format!(
                "tile name `{tile}` is not usable as a predicate name"
            )));
        }
        if tile == "b" || tile == "r" || (tile.len() == 3 && tile.starts_with('c')) {
            return Err(Error::Signature(format!(
                "tile name `{tile}` collides with a grid predicate"
            )));
        }
    }

    let mut s = Structure::new(side * side);
    let id = |x: usize, y: usize| (x % side) * side + (y % side);
    for x in 0..side {
        for y in 0..side {
            s.insert(&colour(x, y), vec![id(x, y)]);
            s.insert(ta.tile(x, y).expect("assignment is total"), vec![id(x, y)]);
        }
    }

    let corners = |x: usize, y: usize| [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)];
    for x in (0..side).step_by(2) {
        for y in (0..side).step_by(2) {
            for (ax, ay) in corners(x, y) {
                for (bx, by) in corners(x, y) {
                    if (ax, ay) != (bx, by) {
                        s.insert("b", vec![id(ax, ay), id(bx, by)]);
                    }
                }
            }
        }
    }
    for x in (1..side).step_by(2) {
        for y in (1..side).step_by(2) {
            for (ax, ay) in corners(x, y) {
                for (bx, by) in corners(x, y) {
                    if (ax, ay) != (bx, by) {
                        s.insert("r", vec![id(ax % side, ay % side), id(bx % side, by % side)]);
                    }
                }
            }
            // Directed edges between the four blue cliques around this red
            // block; orientation flips with the corner class.
            let (l, d) = (x + side - 1, y + side - 1);
            let arrows: [((usize, usize), (usize, usize)); 4] = if x % 4 == y % 4 {
                [
                    ((x, y), (x + 1, y)),
                    ((x, y), (x, y + 1)),
                    ((l, y), (l, y + 1)),
                    ((x, d), (x + 1, d)),
                ]
            } else {
                [
                    ((x + 1, y), (x, y)),
                    ((x, y + 1), (x, y)),
                    ((l, y + 1), (l, y)),
                    ((x + 1, d), (x, d)),
                ]
            };
            for ((ax, ay), (bx, by)) in arrows {
                s.insert("b", vec![id(ax, ay), id(bx, by)]);
            }
        }
    }

    let s = s.transitive_closure("b")?.transitive_closure("r")?;
    Ok(s)
}

/// Outcome of [`check_grid_like`]: which elements lack derived successors
/// and where confluence breaks. `confluence_failures` keeps at most
/// [`CONFLUENCE_FAILURE_CAP`] quadruples; the count is always exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridLikeReport {
    pub h_successor_failures: Vec<usize>,
    pub v_successor_failures: Vec<usize>,
    /// Quadruples `[x, y, xv, yv]` with `h(x,y)`, `v(x,xv)`, `v(y,yv)` but
    /// not `h(xv,yv)`.
    pub confluence_failures: Vec<[usize; 4]>,
    pub confluence_failure_count: usize,
}

pub(crate) const CONFLUENCE_FAILURE_CAP: usize = 64;

impl GridLikeReport {
    pub fn is_grid_like(&self) -> bool {
        self.h_successor_failures.is_empty()
            && self.v_successor_failures.is_empty()
            && self.confluence_failure_count == 0
    }
}

fn binary_pairs(s: &Structure, pred: &str) -> Result<BTreeSet<(usize, usize)>> {
    let mut out = BTreeSet::new();
    for tuple in s.tuples(pred) {
        if tuple.len() != 2 {
            return Err(Error::InvalidStructure(format!(
                "`{pred}` is not binary in this structure"
            )));
        }
        out.insert((tuple[0], tuple[1]));
    }
    Ok(out)
}

/// Computes the derived successor relations of a structure interpreting
/// `b`, `r` and the sixteen colours, then checks that every element has a
/// horizontal and a vertical successor and that the two relations commute.
/// Structures passing both checks embed a standard grid.
pub fn check_grid_like(s: &Structure) -> Result<GridLikeReport> {
    let mut required = vec!["b".to_string(), "r".to_string()];
    required.extend(colour_names());
    for p in &required {
        if !s.extensions.contains_key(p) {
            return Err(Error::Signature(format!("structure does not interpret `{p}`")));
        }
    }
    let blue = binary_pairs(s, "b")?;
    let red = binary_pairs(s, "r")?;
    let mut cells: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for name in colour_names() {
        let mut elems: Vec<usize> = Vec::new();
        for tuple in s.tuples(&name) {
            if tuple.len() != 1 {
                return Err(Error::InvalidStructure(format!(
                    "`{name}` is not unary in this structure"
                )));
            }
            elems.push(tuple[0]);
        }
        cells.insert(name, elems);
    }

    let mut h: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut v: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..4 {
        for j in 0..4 {
            let here = &cells[&colour(i, j)];
            let pairs = if i % 2 == 0 { &blue } else { &red };
            for &u in here {
                for &w in &cells[&colour(i + 1, j)] {
                    if pairs.contains(&(u, w)) {
                        h.insert((u, w));
                    }
                }
            }
            let pairs = if j % 2 == 0 { &blue } else { &red };
            for &u in here {
                for &w in &cells[&colour(i, j + 1)] {
                    if pairs.contains(&(u, w)) {
                        v.insert((u, w));
                    }
                }
            }
        }
    }

    let mut has_h = vec![false; s.domain];
    let mut has_v = vec![false; s.domain];
    let mut v_succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, _) in &h {
        has_h[u] = true;
    }
    for &(u, w) in &v {
        has_v[u] = true;
        v_succ.entry(u).or_default().push(w);
    }
    let mut report = GridLikeReport {
        h_successor_failures: (0..s.domain).filter(|&u| !has_h[u]).collect(),
        v_successor_failures: (0..s.domain).filter(|&u| !has_v[u]).collect(),
        confluence_failures: Vec::new(),
        confluence_failure_count: 0,
    };
    let empty = Vec::new();
    for &(x, y) in &h {
        for &xv in v_succ.get(&x).unwrap_or(&empty) {
            for &yv in v_succ.get(&y).unwrap_or(&empty) {
                if !h.contains(&(xv, yv)) {
                    report.confluence_failure_count += 1;
                    if report.confluence_failures.len() < CONFLUENCE_FAILURE_CAP {
                        report.confluence_failures.push([x, y, xv, yv]);
                    }
                }
            }
        }
    }
    Ok(report)
}
