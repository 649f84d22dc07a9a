mod oracle;

use oracle::{same, track, tracks, MotOracle, Norm, Track};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajmean_core::mot_mean::{gibbs_mot_mean, greedy_mot_mean};
use trajmean_core::traj_mean::{gibbs_trajectory_mean, greedy_trajectory_mean};
use trajmean_core::{
    GibbsConfig, MotMeanConfig, MotMetricConfig, MultiObjectTrajectory, TrajMeanConfig, Trajectory,
};

fn random_traj(rng: &mut ChaCha8Rng, window: usize, density: f64, grid: bool) -> Trajectory {
    let mut t = Trajectory::empty(window, 1);
    for k in 0..window {
        if rng.random_bool(density) {
            let x = if grid {
                rng.random_range(0..5) as f64 * 0.75
            } else {
                rng.random_range(0.0..4.0)
            };
            t.set(k, &[x]);
        }
    }
    t
}

#[test]
fn trajectory_mean_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut greedy_hits, mut gibbs_hits) = (0u64, 0u64);
    let trials: u64 = 60;
    for trial in 0..trials {
        let window = rng.random_range(1..=8);
        let n = rng.random_range(1..=4);
        let r = if trial % 2 == 0 { 1.0 } else { 2.0 };
        let samples: Vec<Trajectory> = (0..n)
            .map(|_| random_traj(&mut rng, window, 0.6, false))
            .collect();
        let plain: Vec<Track> = samples.iter().map(track).collect();
        let refs: Vec<&Track> = plain.iter().collect();
        let best = oracle::traj_mean_cost(&refs, &vec![1.0; n], 1.5, r);
        let cfg = TrajMeanConfig::new(1.5, r).unwrap();
        let (_, g) = greedy_trajectory_mean(&samples, &cfg).unwrap();
        assert!(
            g >= best - 1e-9 * (1.0 + best),
            "greedy {g} undercuts {best}"
        );
        greedy_hits += same(g, best, 1e-9) as u64;
        let (_, s) = gibbs_trajectory_mean(&samples, &cfg, &GibbsConfig::new(200, trial)).unwrap();
        assert!(s >= best - 1e-9 * (1.0 + best));
        gibbs_hits += same(s, best, 1e-9) as u64;
    }
    assert!(
        greedy_hits * 10 >= trials * 9,
        "greedy {greedy_hits}/{trials}"
    );
    assert!(
        gibbs_hits * 20 >= trials * 19,
        "gibbs {gibbs_hits}/{trials}"
    );
}

fn random_mot_instance(rng: &mut ChaCha8Rng) -> Vec<MultiObjectTrajectory> {
    let window = rng.random_range(1..=4);
    (0..2)
        .map(|_| {
            let count = rng.random_range(1..=2);
            let elements = (0..count)
                .map(|_| loop {
                    let t = random_traj(rng, window, 0.7, true);
                    if !t.is_empty() {
                        break t;
                    }
                })
                .collect();
            MultiObjectTrajectory::new(window, elements).unwrap()
        })
        .collect()
}

#[test]
fn mot_mean_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut greedy_hits, mut gibbs_hits) = (0u64, 0u64);
    let trials: u64 = 40;
    for trial in 0..trials {
        let samples = random_mot_instance(&mut rng);
        let r = if trial % 2 == 0 { 1.0 } else { 2.0 };
        let plain: Vec<Vec<Track>> = samples.iter().map(tracks).collect();
        let best = MotOracle::new(&plain, 2.0, 2.0, r, Norm::Max).optimum();
        let cfg = MotMeanConfig::new(MotMetricConfig::ospa2(r, 2.0, 2.0).unwrap()).with_seed(trial);
        let g = greedy_mot_mean(&samples, &cfg).unwrap();
        assert!(
            g.cost >= best - 1e-9 * (1.0 + best),
            "greedy {} undercuts {best}",
            g.cost
        );
        greedy_hits += same(g.cost, best, 1e-9) as u64;
        let s = gibbs_mot_mean(&samples, &cfg, &GibbsConfig::new(200, trial)).unwrap();
        assert!(s.cost <= g.cost);
        gibbs_hits += same(s.cost, best, 1e-9) as u64;
    }
    assert!(
        greedy_hits * 10 >= trials * 9,
        "greedy {greedy_hits}/{trials}"
    );
    assert!(
        gibbs_hits * 20 >= trials * 19,
        "gibbs {gibbs_hits}/{trials}"
    );
}
