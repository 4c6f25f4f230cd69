use gmbe_core::io::{emit_csv, ResultRow};
use gmbe_core::model::{gen_forney_3regular, gen_ising_grid, ising_to_forney};
use gmbe_core::oracle::brute_z;
use gmbe_core::{
    build_minibucket_tree, default_order, optimize_bound, run_be, run_mbe, run_wmbe, Direction,
    Factor, FactorGraph, Method, OptimizerConfig, VarId,
};
use proptest::prelude::*;

fn model(cards: Vec<usize>, pairs: Vec<(usize, usize)>, logs: Vec<f64>) -> FactorGraph {
    let n = cards.len();
    let mut it = logs.into_iter().cycle();
    let mut factors: Vec<Factor> = (0..n)
        .map(|v| {
            let vals: Vec<f64> = (0..cards[v]).map(|_| it.next().unwrap()).collect();
            Factor::from_log(vec![VarId(v)], vec![cards[v]], &vals).unwrap()
        })
        .collect();
    for (a, b) in pairs {
        let (a, b) = (a % n, b % n);
        if a == b {
            continue;
        }
        let vals: Vec<f64> = (0..cards[a] * cards[b]).map(|_| it.next().unwrap()).collect();
        factors.push(Factor::from_log(vec![VarId(a), VarId(b)], vec![cards[a], cards[b]], &vals).unwrap());
    }
    FactorGraph::new(cards, factors).unwrap()
}

fn arb_model() -> impl Strategy<Value = FactorGraph> {
    (
        prop::collection::vec(2usize..=3, 3..=7),
        prop::collection::vec((0usize..7, 0usize..7), 2..=12),
        prop::collection::vec(-2.0f64..2.0, 8..=40),
    )
        .prop_map(|(c, p, l)| model(c, p, l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_sandwich_z(g in arb_model()) {
        let z = brute_z(&g).unwrap().ln_abs();
        let order = default_order(&g);
        let up = build_minibucket_tree(&g, &order, 2, Direction::Upper).unwrap();
        let lo = build_minibucket_tree(&g, &order, 2, Direction::Lower).unwrap();
        prop_assert!(run_wmbe(&g, &up).unwrap().log_bound >= z - 1e-9);
        prop_assert!(run_mbe(&g, &up).unwrap().log_bound >= z - 1e-9);
        prop_assert!(run_wmbe(&g, &lo).unwrap().log_bound <= z + 1e-9);
        prop_assert!((run_be(&g, &order).unwrap().ln_abs() - z).abs() < 1e-10);
    }
}

#[test]
fn optimized_bounds_stay_above_z() {
    for seed in 0..4 {
        let g = gen_forney_3regular(8, 1.5, seed).unwrap();
        let z = brute_z(&g).unwrap().ln_abs();
        let tree = build_minibucket_tree(&g, &default_order(&g), 3, Direction::Upper).unwrap();
        for m in Method::ALL {
            let r = optimize_bound(&g, &tree, &OptimizerConfig::for_method(m).with_iterations(25)).unwrap();
            assert!(r.log_bound >= z - 1e-9, "{m} seed {seed}: {} < {z}", r.log_bound);
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(r.method, m.tag());
        }
    }
}

#[test]
fn plaquette_form_keeps_z_and_tightens() {
    let grid = gen_ising_grid(4, 4, 1.0, 0.1, 9).unwrap();
    let f = ising_to_forney(&grid.graph, 4, 4).unwrap();
    let z = brute_z(&grid.graph).unwrap().ln_abs();
    assert!((brute_z(&f).unwrap().ln_abs() - z).abs() < 1e-10);
    let tree = build_minibucket_tree(&f, &default_order(&f), 4, Direction::Upper).unwrap();
    let start = run_wmbe(&f, &tree).unwrap().log_bound;
    let wg = optimize_bound(&f, &tree, &OptimizerConfig::for_method(Method::WmbeWG).with_iterations(40)).unwrap();
    assert!(wg.log_bound <= start && wg.log_bound >= z - 1e-9);
}

#[test]
fn sweep_sized_table() {
    let rows: Vec<ResultRow> = (0..10u64)
        .flat_map(|seed| {
            Method::ALL.into_iter().map(move |m| ResultRow {
                model_id: format!("m{seed}"),
                method: m.tag().into(),
                ibound: 4,
                t: 1.0,
                seed,
                direction: Direction::Upper.to_string(),
                log_bound: Some(1.0),
                reference: None,
                metric_kind: None,
                metric: None,
                wall_time_s: 0.0,
                status: "ok".into(),
            })
        })
        .collect();
    let text = emit_csv(&rows).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.records().count(), 60);
}
