//! Plaquette contraction of a square-grid Ising model into a Forney-style
//! model.
//!
//! Plaquettes are the unit squares `(r, c)` with corners `(r..=r+1, c..=c+1)`,
//! ranging over the grid extended by one row and column on the top/left
//! (`r, c >= -1`). Taking the squares with `r + c` even gives a checkerboard in
//! which every grid edge lies in exactly one chosen square and every vertex is
//! a corner of exactly two. Each chosen square that holds at least one grid
//! edge is contracted into a single factor over its in-grid corners; vertices
//! left with a single adjacent factor receive an all-ones singleton.

use std::collections::BTreeMap;

use super::forney::validate_forney;
use super::{Factor, FactorGraph, ForneyGraph, ModelError, VarId};
use crate::logspace::SignedLog;

struct Plaquette {
    corners: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

fn not_a_grid(rows: usize, cols: usize, reason: impl Into<String>) -> ModelError {
    ModelError::NotAGrid {
        rows,
        cols,
        reason: reason.into(),
    }
}

/// Contracts a binary pairwise grid model into an equivalent Forney-style
/// model over the same variables.
///
/// The input may contain any number of singleton factors per vertex and any
/// number of pairwise factors per nearest-neighbour pair. Each vertex's
/// singletons are absorbed whole into the lexicographically first contracted
/// plaquette that covers it.
pub fn ising_to_forney(g: &FactorGraph, rows: usize, cols: usize) -> Result<ForneyGraph, ModelError> {
    let n = rows * cols;
    if rows == 0 || cols == 0 || g.num_vars() != n {
        return Err(not_a_grid(rows, cols, format!("model has {} variables", g.num_vars())));
    }
    if g.cards().iter().any(|&c| c != 2) {
        return Err(not_a_grid(rows, cols, "variables must be binary"));
    }

    // log-tables of the singleton and pairwise potentials, merged per vertex / edge
    let mut single: Vec<Vec<SignedLog>> = vec![vec![SignedLog::ONE; 2]; n];
    let mut pair: BTreeMap<(usize, usize), Vec<SignedLog>> = BTreeMap::new();
    for (a, f) in g.factors().iter().enumerate() {
        match *f.scope() {
            [v] => {
                for s in 0..2 {
                    single[v.index()][s] = single[v.index()][s] * f.values()[s];
                }
            }
            [u, v] => {
                let (iu, iv) = (u.index(), v.index());
                let adjacent = (iu / cols == iv / cols && iu.abs_diff(iv) == 1)
                    || iu.abs_diff(iv) == cols;
                if !adjacent {
                    return Err(not_a_grid(rows, cols, format!("factor {a} couples non-neighbours {u}, {v}")));
                }
                // store in (low, high) orientation
                let (lo, hi, swap) = if iu < iv { (iu, iv, false) } else { (iv, iu, true) };
                let entry = pair.entry((lo, hi)).or_insert_with(|| vec![SignedLog::ONE; 4]);
                for x in 0..2 {
                    for y in 0..2 {
                        let val = if swap { f.values()[y * 2 + x] } else { f.values()[x * 2 + y] };
                        entry[x * 2 + y] = entry[x * 2 + y] * val;
                    }
                }
            }
            _ => return Err(not_a_grid(rows, cols, format!("factor {a} has arity {}", f.arity()))),
        }
    }

    let (ri, ci) = (rows as isize, cols as isize);
    let inside = |r: isize, c: isize| r >= 0 && r < ri && c >= 0 && c < ci;
    let id = |r: isize, c: isize| (r * ci + c) as usize;

    let mut plaquettes = Vec::new();
    for r in -1..ri {
        for c in -1..ci {
            if (r + c).rem_euclid(2) != 0 {
                continue;
            }
            let corners: Vec<usize> = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
                .into_iter()
                .filter(|&(a, b)| inside(a, b))
                .map(|(a, b)| id(a, b))
                .collect();
            let mut edges = Vec::new();
            for (a, b) in [
                ((r, c), (r, c + 1)),
                ((r + 1, c), (r + 1, c + 1)),
                ((r, c), (r + 1, c)),
                ((r, c + 1), (r + 1, c + 1)),
            ] {
                if inside(a.0, a.1) && inside(b.0, b.1) {
                    edges.push((id(a.0, a.1), id(b.0, b.1)));
                }
            }
            if !edges.is_empty() {
                let mut corners = corners;
                corners.sort_unstable();
                plaquettes.push(Plaquette { corners, edges });
            }
        }
    }

    // singleton ownership: first plaquette (in (r, c) order) covering the vertex
    let mut owner = vec![None; n];
    let mut cover = vec![0usize; n];
    for (p, pl) in plaquettes.iter().enumerate() {
        for &v in &pl.corners {
            cover[v] += 1;
            owner[v].get_or_insert(p);
        }
    }

    let mut factors = Vec::with_capacity(plaquettes.len() + 2 * rows + 2 * cols);
    for (p, pl) in plaquettes.iter().enumerate() {
        let k = pl.corners.len();
        let size = 1usize << k;
        let mut values = vec![SignedLog::ONE; size];
        let pos = |v: usize| pl.corners.iter().position(|&u| u == v).unwrap();
        for (idx, value) in values.iter_mut().enumerate() {
            let state = |v: usize| (idx >> (k - 1 - pos(v))) & 1;
            for &(u, v) in &pl.edges {
                let table = pair.get(&(u, v));
                if let Some(t) = table {
                    *value = *value * t[state(u) * 2 + state(v)];
                }
            }
            for &v in &pl.corners {
                if owner[v] == Some(p) {
                    *value = *value * single[v][state(v)];
                }
            }
        }
        factors.push(Factor::new(
            pl.corners.iter().map(|&v| VarId(v)).collect(),
            vec![2; k],
            values,
        )?);
    }
    for v in 0..n {
        match cover[v] {
            2 => {}
            1 => factors.push(Factor::uniform(vec![VarId(v)], vec![2])?),
            // isolated vertex (1x1 grid): its fields plus a uniform partner
            _ => {
                factors.push(Factor::new(vec![VarId(v)], vec![2], single[v].clone())?);
                factors.push(Factor::uniform(vec![VarId(v)], vec![2])?);
            }
        }
    }
    let covered: usize = plaquettes.iter().map(|p| p.edges.len()).sum();
    if covered != pair.len().max(covered) || pair.keys().count() > covered {
        return Err(not_a_grid(rows, cols, "pairwise factors outside the plaquette cover"));
    }
    validate_forney(FactorGraph::new(vec![2; n], factors)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{default_order, EliminationOrder};
    use crate::model::gen_ising_grid;
    use crate::oracle::brute_z;

    #[test]
    fn two_by_two_is_one_plaquette_plus_closures() {
        let g = gen_ising_grid(2, 2, 1.0, 0.1, 5).unwrap();
        let f = ising_to_forney(&g, 2, 2).unwrap();
        let arities: Vec<usize> = f.factors().iter().map(|x| x.arity()).collect();
        assert_eq!(arities.iter().filter(|&&a| a == 4).count(), 1);
        let z0 = brute_z(&g).unwrap();
        let z1 = brute_z(&f).unwrap();
        assert!((z0.ln_abs() - z1.ln_abs()).abs() < 1e-12);
    }

    #[test]
    fn preserves_z_on_small_grids() {
        for (rows, cols) in [(1, 1), (1, 4), (3, 1), (2, 3), (3, 3), (4, 4), (3, 4)] {
            for seed in 0..3 {
                let g = gen_ising_grid(rows, cols, 1.5, 0.5, seed).unwrap();
                let f = ising_to_forney(&g, rows, cols).unwrap();
                let z0 = brute_z(&g).unwrap();
                let z1 = brute_z(&f).unwrap();
                assert!(
                    (z0.ln_abs() - z1.ln_abs()).abs() < 1e-10,
                    "{rows}x{cols} seed {seed}: {z0:?} vs {z1:?}"
                );
            }
        }
    }

    #[test]
    fn ten_by_ten_structure() {
        let g = gen_ising_grid(10, 10, 1.0, 0.1, 0).unwrap();
        let f = ising_to_forney(&g, 10, 10).unwrap();
        assert!(f.vars().all(|v| f.degree(v) == 2));
        assert!(f.max_arity() == 4);
        let order: EliminationOrder = default_order(&f);
        assert_eq!(order.max_bucket_scope(&f), 14);
    }

    #[test]
    fn rejects_non_grid() {
        let g = gen_ising_grid(3, 3, 1.0, 0.1, 0).unwrap();
        assert!(matches!(ising_to_forney(&g, 1, 9), Err(ModelError::NotAGrid { .. })));
        let diag = Factor::uniform(vec![VarId(0), VarId(4)], vec![2, 2]).unwrap();
        let (cards, mut fs) = g.graph.clone().into_parts();
        fs.push(diag);
        let bad = FactorGraph::new(cards, fs).unwrap();
        assert!(matches!(ising_to_forney(&bad, 3, 3), Err(ModelError::NotAGrid { .. })));
    }
}
