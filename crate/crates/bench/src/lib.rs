//! Shared fixtures for the benchmarks in `benches/`.

use gmbe_core::model::{gen_forney_3regular, gen_ising_grid, ising_to_forney};
use gmbe_core::{build_minibucket_tree, default_order, Direction, ForneyGraph, MiniBucketTree};

/// Plaquette form of a `rows x cols` Ising grid at strength 1, with its
/// upper-bound tree.
pub fn ising(rows: usize, cols: usize, ibound: usize, seed: u64) -> (ForneyGraph, MiniBucketTree) {
    let grid = gen_ising_grid(rows, cols, 1.0, 0.1, seed).expect("valid grid");
    let g = ising_to_forney(&grid.graph, rows, cols).expect("grid converts");
    let tree = build_minibucket_tree(&g, &default_order(&g), ibound, Direction::Upper).expect("tree");
    (g, tree)
}

/// 3-regular Forney model at strength 1 with its upper-bound tree.
pub fn regular(num_factors: usize, ibound: usize, seed: u64) -> (ForneyGraph, MiniBucketTree) {
    let g = gen_forney_3regular(num_factors, 1.0, seed).expect("valid size");
    let tree = build_minibucket_tree(&g, &default_order(&g), ibound, Direction::Upper).expect("tree");
    (g, tree)
}
