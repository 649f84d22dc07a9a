//! Fréchet-mean trajectory of a set of sample trajectories.
//!
//! The search runs over existence vectors `γ ∈ {0,1}^K`. For a given `γ` the
//! optimal states are solved per scan, so the objective `W(γ)` is a function
//! of `γ` alone. In exact mode the per-scan problems carry the weights
//! `w_n / |D_γ ∪ D_n|`; in approximate mode the states are solved once with
//! the weights `w_n` and reused for every `γ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::float::powr;
use crate::geometry::{euclidean, mean_into};
use crate::gibbs::{sample_by_cost, seeded_rng, GibbsConfig};
use crate::trajectory::{ExistenceHistory, OspaParams, Trajectory};
use crate::{Error, Result};

/// How the per-scan states depend on the candidate domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    #[default]
    Exact,
    Approximate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajMeanConfig {
    pub params: OspaParams,
    /// Maximum greedy sweeps.
    pub max_iters: usize,
    /// Convergence threshold on the last accepted improvement.
    pub threshold: f64,
    pub cost_mode: CostMode,
    /// Per-sample weights, all 1 when absent.
    pub weights: Option<Vec<f64>>,
}

impl TrajMeanConfig {
    pub fn new(c: f64, r: f64) -> Result<Self> {
        Ok(Self {
            params: OspaParams::new(c, r)?,
            max_iters: 5,
            threshold: 0.0,
            cost_mode: CostMode::Exact,
            weights: None,
        })
    }

    pub fn with_mode(mut self, mode: CostMode) -> Self {
        self.cost_mode = mode;
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    fn validate(&self, n: usize) -> Result<Vec<f64>> {
        OspaParams::new(self.params.c, self.params.r)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::InvalidParameter("threshold must be >= 0".into()));
        }
        match &self.weights {
            None => Ok(vec![1.0; n]),
            Some(w) if w.len() != n => Err(Error::InvalidParameter(format!(
                "{} weights for {n} samples",
                w.len()
            ))),
            Some(w) if w.iter().any(|x| !(*x > 0.0 && x.is_finite())) => Err(
                Error::InvalidParameter("weights must be positive and finite".into()),
            ),
            Some(w) => Ok(w.clone()),
        }
    }
}

/// Inner search used when a trajectory mean is one step of a larger problem.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerSearch {
    Greedy { max_iters: usize, threshold: f64 },
    Gibbs(GibbsConfig),
}

/// Relative slack below which a cost change counts as a tie.
const TIE_SLACK: f64 = 1e-12;

#[inline]
pub(crate) fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - TIE_SLACK * (1.0 + incumbent.abs())
}

pub(crate) struct Objective<'a> {
    samples: &'a [&'a Trajectory],
    weights: &'a [f64],
    params: OspaParams,
    mode: CostMode,
    window: usize,
    dim: usize,
    sizes: Vec<usize>,
    /// Approximate mode only: γ-independent states and their errors.
    fixed_states: Vec<f64>,
    fixed_err: Vec<f64>,
    has_member: Vec<bool>,
}

/// Running numerators/denominators of `W` for incremental flips.
struct Tally {
    numer: Vec<f64>,
    denom: Vec<usize>,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(
        samples: &'a [&'a Trajectory],
        weights: &'a [f64],
        params: OspaParams,
        mode: CostMode,
    ) -> Self {
        let window = samples[0].window();
        let dim = samples
            .iter()
            .find(|s| !s.is_empty())
            .map_or(samples[0].dim(), |s| s.dim());
        let sizes = samples.iter().map(|s| s.len()).collect();
        let has_member = (0..window)
            .map(|k| samples.iter().any(|s| s.contains(k)))
            .collect();
        let mut obj = Self {
            samples,
            weights,
            params,
            mode,
            window,
            dim,
            sizes,
            fixed_states: Vec::new(),
            fixed_err: Vec::new(),
            has_member,
        };
        if mode == CostMode::Approximate {
            obj.fixed_states = vec![0.0; window * dim];
            obj.fixed_err = vec![0.0; window * samples.len()];
            let mut pts: Vec<&[f64]> = Vec::with_capacity(samples.len());
            let mut ws: Vec<f64> = Vec::with_capacity(samples.len());
            for k in 0..window {
                pts.clear();
                ws.clear();
                for (s, w) in samples.iter().zip(weights) {
                    if s.contains(k) {
                        pts.push(s.raw_state(k));
                        ws.push(*w);
                    }
                }
                if pts.is_empty() {
                    continue;
                }
                let x = &mut obj.fixed_states[k * dim..(k + 1) * dim];
                mean_into(&pts, &ws, params.c, params.r, x);
                for (n, s) in samples.iter().enumerate() {
                    if s.contains(k) {
                        obj.fixed_err[k * samples.len() + n] =
                            powr(euclidean(x, s.raw_state(k)).min(params.c), params.r);
                    }
                }
            }
        }
        obj
    }

    pub(crate) fn initial_gamma(&self) -> Vec<bool> {
        self.has_member.clone()
    }

    fn denominators(&self, gamma: &[bool]) -> Vec<usize> {
        self.samples
            .iter()
            .zip(&self.sizes)
            .map(|(s, size)| {
                size + gamma
                    .iter()
                    .zip(s.presence())
                    .filter(|(g, p)| **g && !**p)
                    .count()
            })
            .collect()
    }

    fn combine(&self, numer: &[f64], denom: &[usize]) -> f64 {
        numer
            .iter()
            .zip(denom)
            .zip(self.weights)
            .map(|((a, d), w)| if *d == 0 { 0.0 } else { w * a / *d as f64 })
            .sum()
    }

    /// Per-scan states `x*(γ)` (zeros where `γ_k = 0` or no sample exists).
    pub(crate) fn states(&self, gamma: &[bool]) -> Vec<f64> {
        let mut out = vec![0.0; self.window * self.dim];
        match self.mode {
            CostMode::Approximate => {
                for k in (0..self.window).filter(|&k| gamma[k]) {
                    out[k * self.dim..(k + 1) * self.dim]
                        .copy_from_slice(&self.fixed_states[k * self.dim..(k + 1) * self.dim]);
                }
            }
            CostMode::Exact => {
                let denom = self.denominators(gamma);
                let mut pts = Vec::with_capacity(self.samples.len());
                let mut ws = Vec::with_capacity(self.samples.len());
                for k in (0..self.window).filter(|&k| gamma[k] && self.has_member[k]) {
                    self.gather(k, &denom, &mut pts, &mut ws);
                    mean_into(
                        &pts,
                        &ws,
                        self.params.c,
                        self.params.r,
                        &mut out[k * self.dim..(k + 1) * self.dim],
                    );
                }
            }
        }
        out
    }

    fn gather<'s>(
        &'s self,
        k: usize,
        denom: &[usize],
        pts: &mut Vec<&'s [f64]>,
        ws: &mut Vec<f64>,
    ) {
        pts.clear();
        ws.clear();
        for (n, s) in self.samples.iter().enumerate() {
            if s.contains(k) {
                pts.push(s.raw_state(k));
                ws.push(self.weights[n] / denom[n] as f64);
            }
        }
    }

    /// `W(γ)` evaluated from scratch.
    pub(crate) fn evaluate(&self, gamma: &[bool]) -> f64 {
        let tally = self.tally(gamma);
        self.combine(&tally.numer, &tally.denom)
    }

    fn tally(&self, gamma: &[bool]) -> Tally {
        let n_samples = self.samples.len();
        let c_pow = self.params.c_pow();
        let denom = self.denominators(gamma);
        let mut numer = vec![0.0; n_samples];
        let mut pts = Vec::with_capacity(n_samples);
        let mut ws = Vec::with_capacity(n_samples);
        let mut x = vec![0.0; self.dim];
        for k in 0..self.window {
            if gamma[k] {
                let exact_state = self.mode == CostMode::Exact && self.has_member[k];
                if exact_state {
                    self.gather(k, &denom, &mut pts, &mut ws);
                    mean_into(&pts, &ws, self.params.c, self.params.r, &mut x);
                }
                for (n, s) in self.samples.iter().enumerate() {
                    numer[n] += if !s.contains(k) {
                        c_pow
                    } else if exact_state {
                        powr(
                            euclidean(&x, s.raw_state(k)).min(self.params.c),
                            self.params.r,
                        )
                    } else {
                        self.fixed_err[k * n_samples + n]
                    };
                }
            } else {
                for (n, s) in self.samples.iter().enumerate() {
                    if s.contains(k) {
                        numer[n] += c_pow;
                    }
                }
            }
        }
        Tally { numer, denom }
    }

    /// Cost after flipping `γ_k`, leaving `gamma` untouched.
    fn flip_cost(&self, gamma: &mut [bool], k: usize, tally: &Tally) -> f64 {
        match self.mode {
            CostMode::Exact => {
                gamma[k] = !gamma[k];
                let c = self.evaluate(gamma);
                gamma[k] = !gamma[k];
                c
            }
            CostMode::Approximate => {
                let mut total = 0.0;
                for n in 0..self.samples.len() {
                    let (dn, dd) = self.flip_delta(gamma[k], k, n);
                    let d = tally.denom[n] as isize + dd;
                    if d > 0 {
                        total += self.weights[n] * (tally.numer[n] + dn) / d as f64;
                    }
                }
                total
            }
        }
    }

    fn flip_delta(&self, current: bool, k: usize, n: usize) -> (f64, isize) {
        let c_pow = self.params.c_pow();
        let present = self.samples[n].contains(k);
        let err = if present {
            self.fixed_err[k * self.samples.len() + n]
        } else {
            c_pow
        };
        let off = if present { c_pow } else { 0.0 };
        let step = if present { 0 } else { 1 };
        if current {
            (off - err, -step)
        } else {
            (err - off, step)
        }
    }

    fn commit_flip(&self, gamma: &mut [bool], k: usize, tally: &mut Tally) {
        if self.mode == CostMode::Approximate {
            for n in 0..self.samples.len() {
                let (dn, dd) = self.flip_delta(gamma[k], k, n);
                tally.numer[n] += dn;
                tally.denom[n] = (tally.denom[n] as isize + dd) as usize;
            }
        }
        gamma[k] = !gamma[k];
    }

    fn finish(&self, gamma: &[bool]) -> (Trajectory, f64) {
        let history = ExistenceHistory {
            dim: self.dim,
            gamma: gamma.to_vec(),
            states: self.states(gamma),
        };
        (history.reconstruct(), self.evaluate(gamma))
    }

    pub(crate) fn greedy(&self, max_iters: usize, threshold: f64) -> (Trajectory, f64) {
        let mut gamma = self.initial_gamma();
        let mut tally = self.tally(&gamma);
        let mut cost = self.combine(&tally.numer, &tally.denom);
        let mut delta = f64::INFINITY;
        let mut sweeps = 0;
        while sweeps < max_iters && delta > threshold {
            sweeps += 1;
            let mut accepted = false;
            for k in 0..self.window {
                let candidate = self.flip_cost(&mut gamma, k, &tally);
                if improves(candidate, cost) {
                    self.commit_flip(&mut gamma, k, &mut tally);
                    delta = cost - candidate;
                    cost = candidate;
                    accepted = true;
                }
            }
            if !accepted {
                break;
            }
        }
        self.finish(&gamma)
    }

    pub(crate) fn gibbs(&self, cfg: &GibbsConfig) -> (Trajectory, f64) {
        let mut rng = seeded_rng(cfg.seed);
        let mut gamma = self.initial_gamma();
        let mut tally = self.tally(&gamma);
        let mut cost = self.combine(&tally.numer, &tally.denom);
        let alpha = cfg.resolve_alpha(cost);
        let mut best = gamma.clone();
        let mut best_cost = cost;
        for _ in 0..cfg.iterations {
            for k in 0..self.window {
                let flipped = self.flip_cost(&mut gamma, k, &tally);
                let (off, on) = if gamma[k] {
                    (flipped, cost)
                } else {
                    (cost, flipped)
                };
                let take_on = sample_by_cost(&mut rng, &[off, on], alpha) == 1;
                if take_on != gamma[k] {
                    self.commit_flip(&mut gamma, k, &mut tally);
                    cost = flipped;
                }
                if improves(cost, best_cost) {
                    best.copy_from_slice(&gamma);
                    best_cost = cost;
                }
            }
        }
        self.finish(&best)
    }

    pub(crate) fn solve(&self, search: &InnerSearch) -> (Trajectory, f64) {
        match search {
            InnerSearch::Greedy {
                max_iters,
                threshold,
            } => self.greedy(*max_iters, *threshold),
            InnerSearch::Gibbs(g) => self.gibbs(g),
        }
    }
}

fn check_samples(samples: &[Trajectory]) -> Result<()> {
    let first = samples.first().ok_or(Error::NoSamples)?;
    let dim = samples
        .iter()
        .find(|s| !s.is_empty())
        .map_or(first.dim(), |s| s.dim());
    for s in samples {
        if s.window() != first.window() {
            return Err(Error::WindowMismatch {
                expected: first.window(),
                found: s.window(),
            });
        }
        if !s.is_empty() && s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
    }
    Ok(())
}

/// `W(γ)` and the optimising states `x*(γ)`.
pub fn cost_w(
    gamma: &[bool],
    samples: &[Trajectory],
    cfg: &TrajMeanConfig,
) -> Result<(f64, ExistenceHistory)> {
    check_samples(samples)?;
    let weights = cfg.validate(samples.len())?;
    if gamma.len() != samples[0].window() {
        return Err(Error::WindowMismatch {
            expected: samples[0].window(),
            found: gamma.len(),
        });
    }
    let refs: Vec<&Trajectory> = samples.iter().collect();
    let obj = Objective::new(&refs, &weights, cfg.params, cfg.cost_mode);
    let history = ExistenceHistory {
        dim: obj.dim,
        gamma: gamma.to_vec(),
        states: obj.states(gamma),
    };
    Ok((obj.evaluate(gamma), history))
}

/// Greedy coordinate search over the existence vector, starting from the
/// union of the sample domains. Returns the mean and its cost.
pub fn greedy_trajectory_mean(
    samples: &[Trajectory],
    cfg: &TrajMeanConfig,
) -> Result<(Trajectory, f64)> {
    check_samples(samples)?;
    let weights = cfg.validate(samples.len())?;
    let refs: Vec<&Trajectory> = samples.iter().collect();
    let obj = Objective::new(&refs, &weights, cfg.params, cfg.cost_mode);
    Ok(obj.greedy(cfg.max_iters, cfg.threshold))
}

/// Gibbs sampling over the existence vector; returns the best visited mean.
pub fn gibbs_trajectory_mean(
    samples: &[Trajectory],
    cfg: &TrajMeanConfig,
    gibbs: &GibbsConfig,
) -> Result<(Trajectory, f64)> {
    check_samples(samples)?;
    gibbs.validate()?;
    let weights = cfg.validate(samples.len())?;
    let refs: Vec<&Trajectory> = samples.iter().collect();
    let obj = Objective::new(&refs, &weights, cfg.params, cfg.cost_mode);
    Ok(obj.gibbs(gibbs))
}
