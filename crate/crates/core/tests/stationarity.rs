mod oracle;

use std::collections::HashMap;

use oracle::{feasible, permutations, tracks, MotOracle, Norm, Track};
use trajmean_core::mot_mean::MotGibbsChain;
use trajmean_core::{
    CostMode, ExistenceAssignment, GibbsConfig, MotMeanConfig, MotMetricConfig,
    MultiObjectTrajectory, Trajectory,
};

type State = (Vec<bool>, Vec<Vec<usize>>);

fn traj(states: &[Option<f64>]) -> Trajectory {
    let mut t = Trajectory::empty(states.len(), 1);
    for (k, s) in states.iter().enumerate() {
        if let Some(x) = s {
            t.set(k, &[*x]);
        }
    }
    t
}

fn exact_law(oracle: &mut MotOracle, alpha: f64) -> HashMap<State, (f64, f64)> {
    let len = oracle.len();
    let perms = permutations(len);
    let sizes: Vec<usize> = oracle.samples.iter().map(Vec::len).collect();
    let mut states = Vec::new();
    for mask in 0u32..(1 << len) {
        let eta: Vec<bool> = (0..len).map(|i| mask & (1 << i) != 0).collect();
        let rows: Vec<Vec<&Vec<usize>>> = sizes
            .iter()
            .map(|&s| perms.iter().filter(|p| feasible(&eta, p, s)).collect())
            .collect();
        let mut idx = vec![0usize; rows.len()];
        loop {
            let omega: Vec<Vec<usize>> =
                idx.iter().zip(&rows).map(|(i, r)| r[*i].clone()).collect();
            let s = oracle.s(&eta, &omega);
            states.push(((eta.clone(), omega), s));
            let mut d = 0;
            while d < idx.len() {
                idx[d] += 1;
                if idx[d] < rows[d].len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == idx.len() {
                break;
            }
        }
    }
    let z: f64 = states.iter().map(|(_, s)| (-alpha * s).exp()).sum();
    states
        .into_iter()
        .map(|(k, s)| (k, ((-alpha * s).exp() / z, s)))
        .collect()
}

fn check(
    samples: &[MultiObjectTrajectory],
    metric: MotMetricConfig,
    alpha: f64,
    sweeps: usize,
    seed: u64,
) -> f64 {
    let plain: Vec<Vec<Track>> = samples.iter().map(tracks).collect();
    let mut oracle = MotOracle::new(&plain, metric.p, metric.c, metric.r, Norm::Max);
    let law = exact_law(&mut oracle, alpha);

    let mut cfg = MotMeanConfig::new(metric);
    cfg.search_mode = CostMode::Exact;
    let mut gibbs = GibbsConfig::new(sweeps, seed);
    gibbs.alpha = Some(alpha);
    let len = oracle.len();
    let omega: Vec<Vec<usize>> = samples.iter().map(|_| (0..len).collect()).collect();
    let mut chain = MotGibbsChain::new(
        samples,
        &cfg,
        &gibbs,
        vec![false; len],
        ExistenceAssignment { omega },
    )
    .unwrap();
    assert_eq!(chain.alpha(), alpha);

    let mut counts: HashMap<State, usize> = HashMap::new();
    for _ in 0..sweeps {
        chain.sweep();
        let key = (chain.eta().to_vec(), chain.omega().to_vec());
        let (_, s) = law.get(&key).expect("chain left the feasible set");
        assert!(
            (chain.cost() - s).abs() <= 1e-9 * (1.0 + s),
            "{} vs {s}",
            chain.cost()
        );
        *counts.entry(key).or_default() += 1;
    }
    law.iter()
        .map(|(k, (rho, _))| {
            (counts.get(k).copied().unwrap_or(0) as f64 / sweeps as f64 - rho).abs()
        })
        .sum::<f64>()
        / 2.0
}

#[test]
fn chain_matches_exact_law_with_two_slots() {
    let y = MultiObjectTrajectory::new(
        2,
        vec![traj(&[Some(0.0), Some(0.5)]), traj(&[None, Some(1.5)])],
    )
    .unwrap();
    let metric = MotMetricConfig::ospa2(1.0, 1.0, 1.5).unwrap();
    let tv = check(&[y], metric, 2.0, 100_000, 11);
    assert!(tv < 0.05, "total variation {tv}");
}

#[test]
fn chain_matches_exact_law_with_three_slots() {
    let a = MultiObjectTrajectory::new(
        2,
        vec![traj(&[Some(0.0), Some(0.4)]), traj(&[Some(2.0), None])],
    )
    .unwrap();
    let b = MultiObjectTrajectory::new(2, vec![traj(&[Some(0.3), Some(0.6)])]).unwrap();
    let metric = MotMetricConfig::ospa2(2.0, 1.0, 1.2).unwrap();
    let tv = check(&[a, b], metric, 1.5, 200_000, 3);
    assert!(tv < 0.05, "total variation {tv}");
}
