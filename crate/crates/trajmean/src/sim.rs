//! Desk-scale distributed-fusion experiment: constant-velocity ground truth,
//! perturbed node estimates, consensus by multi-object trajectory means and
//! expanding-window OSPA² evaluation.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use trajmean_core::mot_mean::{gibbs_mot_mean, greedy_mot_mean};
use trajmean_core::mot_metric::mot_distance;
use trajmean_core::{
    GibbsConfig, MotMeanConfig, MotMetricConfig, MultiObjectTrajectory, Trajectory,
};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Default for Region {
    fn default() -> Self {
        Self {
            x: [0.0, 2000.0],
            y: [0.0, 1000.0],
        }
    }
}

impl Region {
    fn contains(&self, p: [f64; 2]) -> bool {
        (self.x[0]..=self.x[1]).contains(&p[0]) && (self.y[0]..=self.y[1]).contains(&p[1])
    }

    fn sample(&self, rng: &mut impl Rng) -> [f64; 2] {
        [
            rng.random_range(self.x[0]..=self.x[1]),
            rng.random_range(self.y[0]..=self.y[1]),
        ]
    }
}

/// Perturbation applied by one class of node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeType {
    /// Standard deviation of the additive position noise per coordinate.
    pub sigma: f64,
    /// Probability that a scan of a track is reported.
    pub p_detect: f64,
    /// Expected false tracks per scan.
    pub false_rate: f64,
    /// Probability that a track is split in two.
    pub break_prob: f64,
    /// Maximum shift of birth and death, in scans.
    pub jitter: usize,
}

impl Default for NodeType {
    fn default() -> Self {
        Self {
            sigma: 15.0,
            p_detect: 0.85,
            false_rate: 0.05,
            break_prob: 0.05,
            jitter: 3,
        }
    }
}

impl NodeType {
    /// Reports the truth unchanged.
    pub fn perfect() -> Self {
        Self {
            sigma: 0.0,
            p_detect: 1.0,
            false_rate: 0.0,
            break_prob: 0.0,
            jitter: 0,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        let ok = self.sigma >= 0.0
            && self.sigma.is_finite()
            && self.p_detect > 0.0
            && self.p_detect <= 1.0
            && self.false_rate >= 0.0
            && self.false_rate.is_finite()
            && (0.0..=1.0).contains(&self.break_prob);
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid node type {self:?}")))
        }
    }
}

fn default_node_types() -> Vec<NodeType> {
    [(0.85, 0.05), (0.7, 0.01), (0.9, 0.07)]
        .into_iter()
        .map(|(p_detect, false_rate)| NodeType {
            p_detect,
            false_rate,
            ..NodeType::default()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_trajectories: usize,
    /// Number of scans `K`.
    pub window: usize,
    pub region: Region,
    /// Shortest ground-truth lifetime, in scans.
    pub min_length: usize,
    /// Speed range of ground-truth and false tracks, per scan.
    pub speed: [f64; 2],
    pub num_nodes: usize,
    /// Node `i` uses `node_types[i % node_types.len()]`.
    pub node_types: Vec<NodeType>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_trajectories: 20,
            window: 100,
            region: Region::default(),
            min_length: 20,
            speed: [5.0, 20.0],
            num_nodes: 8,
            node_types: default_node_types(),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.window < 2 {
            return Err(Error::Invalid("window must be at least 2".into()));
        }
        let r = &self.region;
        if !(r.x[0] <= r.x[1] && r.y[0] <= r.y[1]) || r.x.iter().chain(&r.y).any(|v| !v.is_finite())
        {
            return Err(Error::Invalid(format!("invalid region {r:?}")));
        }
        if !(0.0 <= self.speed[0] && self.speed[0] <= self.speed[1] && self.speed[1].is_finite()) {
            return Err(Error::Invalid(format!(
                "invalid speed range {:?}",
                self.speed
            )));
        }
        if self.num_nodes > 0 && self.node_types.is_empty() {
            return Err(Error::Invalid("node_types must not be empty".into()));
        }
        self.node_types.iter().try_for_each(NodeType::validate)
    }

    pub fn node(&self, i: usize) -> &NodeType {
        &self.node_types[i % self.node_types.len()]
    }
}

/// Straight segment starting at `start` with a random heading whose end stays
/// inside the region; falls back to standing still.
fn velocity(
    region: &Region,
    speed: [f64; 2],
    start: [f64; 2],
    steps: usize,
    rng: &mut impl Rng,
) -> [f64; 2] {
    for _ in 0..100 {
        let heading = rng.random_range(0.0..std::f64::consts::TAU);
        let s = rng.random_range(speed[0]..=speed[1]);
        let v = [s * heading.cos(), s * heading.sin()];
        let end = [
            start[0] + v[0] * steps as f64,
            start[1] + v[1] * steps as f64,
        ];
        if region.contains(end) {
            return v;
        }
    }
    [0.0, 0.0]
}

fn straight_track(
    window: usize,
    birth: usize,
    len: usize,
    start: [f64; 2],
    v: [f64; 2],
) -> Trajectory {
    let mut t = Trajectory::empty(window, 2);
    for i in 0..len {
        t.set(
            birth + i,
            &[start[0] + v[0] * i as f64, start[1] + v[1] * i as f64],
        );
    }
    t
}

/// Constant-velocity trajectories with random birth and death, contained in
/// the region.
pub fn generate_ground_truth(cfg: &ScenarioConfig, rng: &mut impl Rng) -> MultiObjectTrajectory {
    let k = cfg.window;
    let min_len = cfg.min_length.clamp(2, k);
    let elements = (0..cfg.num_trajectories)
        .map(|_| {
            let birth = rng.random_range(0..=k - min_len);
            let len = rng.random_range(min_len..=k - birth);
            let start = cfg.region.sample(rng);
            let v = velocity(&cfg.region, cfg.speed, start, len - 1, rng);
            straight_track(k, birth, len, start, v)
        })
        .collect();
    MultiObjectTrajectory::new(k, elements).expect("tracks share the window")
}

/// First state and per-scan velocity of a constant-velocity track.
fn kinematics(t: &Trajectory) -> Option<(usize, usize, [f64; 2], [f64; 2])> {
    let (first, x0) = t.iter().next()?;
    let (last, x1) = t.iter().last()?;
    let v = if last > first {
        let dt = (last - first) as f64;
        [(x1[0] - x0[0]) / dt, (x1[1] - x0[1]) / dt]
    } else {
        [0.0, 0.0]
    };
    Some((first, last, [x0[0], x0[1]], v))
}

/// Reports scans of `span`, taking states from `truth` where it exists and
/// extrapolating the constant-velocity `anchor` elsewhere.
fn report_segment(
    window: usize,
    span: (usize, usize),
    truth: Option<&Trajectory>,
    anchor: (usize, [f64; 2], [f64; 2]),
    node: &NodeType,
    noise: Option<&Normal<f64>>,
    rng: &mut impl Rng,
) -> Trajectory {
    let (k0, x0, v) = anchor;
    let mut t = Trajectory::empty(window, 2);
    for k in span.0..=span.1 {
        if node.p_detect < 1.0 && !rng.random_bool(node.p_detect) {
            continue;
        }
        let dt = k as f64 - k0 as f64;
        let mut x = match truth.and_then(|t| t.state(k)) {
            Some(s) => [s[0], s[1]],
            None => [x0[0] + v[0] * dt, x0[1] + v[1] * dt],
        };
        if let Some(n) = noise {
            x[0] += n.sample(rng);
            x[1] += n.sample(rng);
        }
        t.set(k, &x);
    }
    t
}

/// Simulated tracker output of one node: jittered lifetimes, track breaks,
/// missed scans, position noise and short false tracks.
pub fn simulate_node_estimate(
    gt: &MultiObjectTrajectory,
    node: &NodeType,
    scenario: &ScenarioConfig,
    rng: &mut impl Rng,
) -> MultiObjectTrajectory {
    let window = gt.window();
    let noise = (node.sigma > 0.0).then(|| Normal::new(0.0, node.sigma).expect("sigma validated"));
    let jitter = node.jitter as i64;
    let shift = |k: usize, rng: &mut dyn RngCore| -> usize {
        let d = if jitter > 0 {
            rng.random_range(-jitter..=jitter)
        } else {
            0
        };
        (k as i64 + d).clamp(0, window as i64 - 1) as usize
    };
    let mut elements = Vec::new();
    for t in gt.elements() {
        let Some((first, last, x0, v)) = kinematics(t) else {
            continue;
        };
        let start = shift(first, rng);
        let end = shift(last, rng).max(start);
        let mut spans = vec![(start, end)];
        if node.break_prob > 0.0 && end > start && rng.random_bool(node.break_prob) {
            let b = rng.random_range(start + 1..=end);
            spans = vec![(start, b - 1), (b, end)];
        }
        for span in spans {
            let seg = report_segment(
                window,
                span,
                Some(t),
                (first, x0, v),
                node,
                noise.as_ref(),
                rng,
            );
            if !seg.is_empty() {
                elements.push(seg);
            }
        }
    }
    if node.false_rate > 0.0 {
        let count = Poisson::new(node.false_rate * window as f64)
            .expect("rate validated")
            .sample(rng) as usize;
        for _ in 0..count {
            let len = rng.random_range(3..=10).min(window);
            let birth = rng.random_range(0..=window - len);
            let start = scenario.region.sample(rng);
            let v = velocity(&scenario.region, scenario.speed, start, len - 1, rng);
            let seg = report_segment(
                window,
                (birth, birth + len - 1),
                None,
                (birth, start, v),
                node,
                noise.as_ref(),
                rng,
            );
            if !seg.is_empty() {
                elements.push(seg);
            }
        }
    }
    MultiObjectTrajectory::new(window, elements).expect("tracks share the window")
}

/// Entry `t` is the distance between both inputs restricted to scans `0..=t`.
pub fn expanding_window_ospa2(
    est: &MultiObjectTrajectory,
    gt: &MultiObjectTrajectory,
    cfg: &MotMetricConfig,
) -> Result<Vec<f64>, Error> {
    if est.window() != gt.window() {
        return Err(Error::Invalid(format!(
            "windows differ: {} vs {}",
            est.window(),
            gt.window()
        )));
    }
    (1..=gt.window())
        .map(|t| Ok(mot_distance(&est.truncated(t), &gt.truncated(t), cfg)?))
        .collect()
}

pub fn cardinality_series(x: &MultiObjectTrajectory) -> Vec<usize> {
    (0..x.window()).map(|k| x.cardinality_at(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "greedy1")]
    Greedy1,
    #[serde(rename = "greedy2")]
    Greedy2,
    #[serde(rename = "gibbs1")]
    Gibbs1,
    #[serde(rename = "gibbs2")]
    Gibbs2,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Greedy1,
        Method::Greedy2,
        Method::Gibbs1,
        Method::Gibbs2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Greedy1 => "greedy1",
            Method::Greedy2 => "greedy2",
            Method::Gibbs1 => "gibbs1",
            Method::Gibbs2 => "gibbs2",
        }
    }

    /// Order `r` of the mean.
    pub fn order(&self) -> f64 {
        match self {
            Method::Greedy1 | Method::Gibbs1 => 1.0,
            Method::Greedy2 | Method::Gibbs2 => 2.0,
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "unknown method {s:?}; expected greedy1, greedy2, gibbs1 or gibbs2"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub p: f64,
    pub c: f64,
    pub r: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            p: 100.0,
            c: 100.0 * std::f64::consts::SQRT_2,
            r: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusConfig {
    pub max_iters: usize,
    pub gibbs_iterations: usize,
    pub efficient_proposal: bool,
    pub rearrange_nonexistence: bool,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            gibbs_iterations: 10,
            efficient_proposal: true,
            rearrange_nonexistence: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub evaluation: EvaluationConfig,
    pub consensus: ConsensusConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.scenario.validate()?;
        self.evaluation_metric()?;
        for r in [1.0, 2.0] {
            self.consensus_metric(r)?;
        }
        if self.consensus.max_iters == 0 || self.consensus.gibbs_iterations == 0 {
            return Err(Error::Invalid("iteration counts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn evaluation_metric(&self) -> Result<MotMetricConfig, Error> {
        let e = &self.evaluation;
        Ok(MotMetricConfig::ospa2(e.r, e.p, e.c)?)
    }

    /// OSPA² metric of the mean of order `r`, sharing `p` and `c` with the
    /// evaluation.
    pub fn consensus_metric(&self, r: f64) -> Result<MotMetricConfig, Error> {
        MotMetricConfig::ospa2(r, self.evaluation.p, self.evaluation.c)
            .map_err(|e| Error::Invalid(format!("consensus metric of order {r}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    /// Distance to the truth over the full window.
    pub ospa2: f64,
    pub ospa2_series: Vec<f64>,
    pub cardinality_series: Vec<usize>,
    /// Consensus cost `S`; fused estimates only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub truth_cardinality: Vec<usize>,
    pub nodes: Vec<EstimateReport>,
    pub fused: Vec<EstimateReport>,
}

/// Everything a trial generates, before evaluation.
pub struct Scenario {
    pub truth: MultiObjectTrajectory,
    pub nodes: Vec<MultiObjectTrajectory>,
    /// Seed of the consensus searches.
    pub consensus_seed: u64,
}

/// Trial `trial` draws from its own stream of the scenario seed.
pub fn generate_scenario(cfg: &ScenarioConfig, trial: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let truth = generate_ground_truth(cfg, &mut rng);
    let node_seeds: Vec<u64> = (0..cfg.num_nodes).map(|_| rng.next_u64()).collect();
    let nodes = node_seeds
        .iter()
        .enumerate()
        .map(|(i, s)| {
            simulate_node_estimate(&truth, cfg.node(i), cfg, &mut ChaCha8Rng::seed_from_u64(*s))
        })
        .collect();
    Scenario {
        truth,
        nodes,
        consensus_seed: rng.next_u64(),
    }
}

pub fn fuse(
    nodes: &[MultiObjectTrajectory],
    cfg: &ExperimentConfig,
    method: Method,
    seed: u64,
) -> Result<(MultiObjectTrajectory, f64), Error> {
    let mean_cfg = MotMeanConfig::new(cfg.consensus_metric(method.order())?)
        .with_seed(seed)
        .with_max_iters(cfg.consensus.max_iters);
    let out = match method {
        Method::Greedy1 | Method::Greedy2 => greedy_mot_mean(nodes, &mean_cfg)?,
        Method::Gibbs1 | Method::Gibbs2 => {
            let mut gibbs = GibbsConfig::new(cfg.consensus.gibbs_iterations, seed);
            gibbs.use_efficient_proposal = cfg.consensus.efficient_proposal;
            gibbs.rearrange_nonexistence = cfg.consensus.rearrange_nonexistence;
            gibbs_mot_mean(nodes, &mean_cfg, &gibbs)?
        }
    };
    Ok((out.mean, out.cost))
}

fn evaluate(
    name: String,
    est: &MultiObjectTrajectory,
    truth: &MultiObjectTrajectory,
    metric: &MotMetricConfig,
) -> Result<EstimateReport, Error> {
    let series = expanding_window_ospa2(est, truth, metric)?;
    Ok(EstimateReport {
        name,
        ospa2: *series.last().expect("window >= 1"),
        ospa2_series: series,
        cardinality_series: cardinality_series(est),
        cost: None,
        seconds: None,
    })
}

/// Generates, fuses and evaluates trial `trial`. Wall-clock times are only
/// recorded with `timing`, so that reports are reproducible by default.
pub fn run_trial(
    cfg: &ExperimentConfig,
    methods: &[Method],
    trial: usize,
    timing: bool,
) -> Result<TrialReport, Error> {
    let metric = cfg.evaluation_metric()?;
    let scenario = generate_scenario(&cfg.scenario, trial);
    let nodes = scenario
        .nodes
        .iter()
        .enumerate()
        .map(|(i, est)| evaluate(format!("node{}", i + 1), est, &scenario.truth, &metric))
        .collect::<Result<Vec<_>, _>>()?;
    let fused = methods
        .iter()
        .map(|&m| {
            let clock = Instant::now();
            let (mean, cost) = fuse(&scenario.nodes, cfg, m, scenario.consensus_seed)?;
            let seconds = clock.elapsed().as_secs_f64();
            let mut report = evaluate(m.name().to_owned(), &mean, &scenario.truth, &metric)?;
            report.cost = Some(cost);
            report.seconds = timing.then_some(seconds);
            Ok(report)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(TrialReport {
        trial,
        truth_cardinality: cardinality_series(&scenario.truth),
        nodes,
        fused,
    })
}

/// Thread count from `TRAJMEAN_THREADS`; 0 or unset lets the pool decide.
pub fn threads_from_env() -> usize {
    std::env::var("TRAJMEAN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs `trials` independent trials on a pool of `threads` workers
/// (0 = one per core). Reports come back in trial order.
pub fn run_monte_carlo(
    cfg: &ExperimentConfig,
    methods: &[Method],
    trials: usize,
    timing: bool,
    threads: usize,
) -> Result<Vec<TrialReport>, Error> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, methods, t, timing))
            .collect()
    })
}
