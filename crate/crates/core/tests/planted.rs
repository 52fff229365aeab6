use decograph::estimator::{select_k, FitConfig};
use decograph::graphon::SsmParams;
use decograph::metrics::adjusted_rand_index;
use decograph::rng::{derive_seed, seeded, shuffle, uniform_open};
use decograph::{encode_one_hot, fit, sample_graph_at, GraphonSpec};

fn planted_groups(xi: &[f64], k: usize) -> Vec<usize> {
    xi.iter()
        .map(|&x| ((x * k as f64).ceil() as usize).clamp(1, k) - 1)
        .collect()
}

/// Four groups, each with its own dominant decoration inside the group and a
/// uniform law between groups.
fn four_group_model() -> GraphonSpec {
    let mut q: Vec<Vec<f64>> = (0..4)
        .map(|g| (0..4).map(|l| if l == g { 0.85 } else { 0.05 }).collect())
        .collect();
    q.push(vec![0.25; 4]);
    let shape_map = (0..4)
        .map(|g| (0..4).map(|h| if g == h { g } else { 4 }).collect())
        .collect();
    GraphonSpec::ssm(SsmParams { k: 4, shape_map, q }).unwrap()
}

#[test]
fn grid_search_finds_planted_group_count() {
    let spec = four_group_model();
    let mut hits = 0;
    let mut chosen = Vec::new();
    for seed in 0..10u64 {
        let xi = stratified_positions(400, derive_seed(41, &[seed]));
        let sample = sample_graph_at(&spec, xi, derive_seed(41, &[seed, 1])).unwrap();
        let k = select_k(&encode_one_hot(&sample.graph), &FitConfig { seed, ..FitConfig::default() }).unwrap();
        hits += usize::from((4..=6).contains(&k));
        chosen.push(k);
    }
    assert!(hits >= 8, "selected k = {chosen:?}");
}

/// One latent position per cell of an `n`-cell grid, in random order, so the
/// planted groups are balanced like the estimator's.
fn stratified_positions(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    let mut cells: Vec<usize> = (0..n).collect();
    shuffle(&mut rng, &mut cells);
    cells
        .into_iter()
        .map(|c| (c as f64 + uniform_open(&mut rng)) / n as f64)
        .collect()
}

#[test]
fn full_pipeline_recovers_four_groups() {
    let spec = four_group_model();
    let sample = sample_graph_at(&spec, stratified_positions(200, 4), 5).unwrap();
    let f = fit(&sample.graph, &FitConfig { k: Some(4), ..FitConfig::default() }).unwrap();
    assert_eq!(adjusted_rand_index(f.assignment.node_labels(), &planted_groups(&sample.xi, 4)), 1.0);
    assert_eq!(f.assignment.s(), 5);
}
