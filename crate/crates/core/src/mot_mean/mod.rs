//! Fréchet-mean multi-object trajectory.
//!
//! A candidate mean is encoded as an existence list `η ∈ {0,1}^L` with a
//! trajectory per slot, where `L = Σ_n |Y^(n)|`. Each sample `Y^(n)` is
//! padded to `L` slots the same way: entry `j` exists iff `j < |Y^(n)|`.
//! Row `n` of the existence assignment `ω` is a permutation of `0..L`
//! matching mean slots to sample entries. The trajectory of an active slot
//! is the weighted trajectory mean of the sample entries assigned to it, so
//! the search runs over `(η, ω)` only.

mod gibbs;
mod greedy;
mod insertion;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::mot_metric::{MotMetricConfig, MultiObjectTrajectory};
use crate::traj_mean::{improves, CostMode, InnerSearch, Objective};
use crate::trajectory::{distance_pow, Trajectory};
use crate::{Error, Result};

pub use gibbs::{gibbs_mot_mean, MotGibbsChain};
pub use greedy::{add_trajectories, delete_trajectories, greedy_mot_mean, optimize_permutation};
pub use insertion::{inverse_insertion, repeated_insertion};

/// Existence list and per-slot trajectories of a candidate mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MotRepresentation {
    pub eta: Vec<bool>,
    /// Empty trajectory where a slot is inactive or has no assigned entry.
    pub tau: Vec<Trajectory>,
}

impl MotRepresentation {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// The multi-object trajectory formed by the active slots.
    pub fn reconstruct(&self, window: usize) -> MultiObjectTrajectory {
        let elements = self
            .eta
            .iter()
            .zip(&self.tau)
            .filter(|(e, _)| **e)
            .map(|(_, t)| t.clone())
            .collect();
        MultiObjectTrajectory::new(window, elements).expect("slot trajectories share the window")
    }
}

/// `N x L` matrix whose row `n` is a permutation of `0..L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceAssignment {
    pub omega: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotMeanConfig {
    pub metric: MotMetricConfig,
    /// Maximum outer iterations of the greedy search.
    pub max_iters: usize,
    /// Convergence threshold on the last accepted improvement.
    pub threshold: f64,
    /// Seed of the candidate draws inside `add_trajectories`.
    pub seed: u64,
    /// Search used for every slot trajectory mean.
    pub inner: InnerSearch,
    /// Cost mode of slot means while searching; reported costs always use
    /// the exact mode.
    pub search_mode: CostMode,
}

impl MotMeanConfig {
    pub fn new(metric: MotMetricConfig) -> Self {
        Self {
            metric,
            max_iters: 100,
            threshold: 0.0,
            seed: 0,
            inner: InnerSearch::Greedy {
                max_iters: 5,
                threshold: 0.0,
            },
            search_mode: CostMode::Approximate,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    fn validate(&self) -> Result<()> {
        self.metric.validated()?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::InvalidParameter("threshold must be >= 0".into()));
        }
        match &self.inner {
            InnerSearch::Greedy { max_iters, .. } if *max_iters == 0 => Err(
                Error::InvalidParameter("inner max_iters must be >= 1".into()),
            ),
            InnerSearch::Gibbs(g) => g.validate(),
            _ => Ok(()),
        }
    }
}

/// Result of a multi-object mean computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MotMean {
    pub mean: MultiObjectTrajectory,
    /// `S(η, ω)` with exact slot means.
    pub cost: f64,
    pub representation: MotRepresentation,
    pub assignment: ExistenceAssignment,
}

/// Whether `row` is an existence assignment between `eta` and a sample
/// with `size` entries.
pub(crate) fn row_is_valid(eta: &[bool], row: &[usize], size: usize) -> bool {
    let active = eta.iter().filter(|e| **e).count();
    if active <= size {
        eta.iter().zip(row).all(|(e, j)| !*e || *j < size)
    } else {
        eta.iter().zip(row).all(|(e, j)| *e || *j >= size)
    }
}

fn is_permutation(row: &[usize]) -> bool {
    let mut seen = vec![false; row.len()];
    for &v in row {
        if v >= row.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Swaps entries of `row` until it is an existence assignment for `eta`.
/// Offending slots are paired with donors in ascending order.
pub(crate) fn repair_row(eta: &[bool], row: &mut [usize], size: usize) {
    let active = eta.iter().filter(|e| **e).count();
    let (bad, donor): (Vec<usize>, Vec<usize>) = if active <= size {
        (
            (0..row.len())
                .filter(|&l| eta[l] && row[l] >= size)
                .collect(),
            (0..row.len())
                .filter(|&l| !eta[l] && row[l] < size)
                .collect(),
        )
    } else {
        (
            (0..row.len())
                .filter(|&l| !eta[l] && row[l] < size)
                .collect(),
            (0..row.len())
                .filter(|&l| eta[l] && row[l] >= size)
                .collect(),
        )
    };
    for (a, b) in bad.into_iter().zip(donor) {
        row.swap(a, b);
    }
}

struct CachedMean {
    cost: f64,
    mean: Trajectory,
}

/// Slot-cost evaluator shared by the greedy and Gibbs searches.
pub(crate) struct Problem<'a> {
    cfg: &'a MotMeanConfig,
    window: usize,
    dim: usize,
    sizes: Vec<usize>,
    chi: Vec<&'a [Trajectory]>,
    len: usize,
    p_pow: f64,
    search_cache: BTreeMap<Vec<u64>, CachedMean>,
    report_cache: BTreeMap<Vec<u64>, CachedMean>,
}

const CACHE_LIMIT: usize = 20_000;

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Eval {
    Search,
    Report,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(
        samples: &'a [MultiObjectTrajectory],
        cfg: &'a MotMeanConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let first = samples.first().ok_or(Error::NoSamples)?;
        let window = first.window();
        let mut dim = None;
        for s in samples {
            if s.window() != window {
                return Err(Error::WindowMismatch {
                    expected: window,
                    found: s.window(),
                });
            }
            if let Some(d) = s.dim() {
                match dim {
                    None => dim = Some(d),
                    Some(e) if e != d => {
                        return Err(Error::DimensionMismatch {
                            expected: e,
                            found: d,
                        })
                    }
                    _ => {}
                }
            }
        }
        let dim = dim
            .or_else(|| {
                samples
                    .iter()
                    .flat_map(|s| s.elements())
                    .map(Trajectory::dim)
                    .next()
            })
            .unwrap_or(1);
        let sizes: Vec<usize> = samples.iter().map(MultiObjectTrajectory::len).collect();
        Ok(Self {
            cfg,
            window,
            dim,
            len: sizes.iter().sum(),
            sizes,
            chi: samples
                .iter()
                .map(MultiObjectTrajectory::elements)
                .collect(),
            p_pow: cfg.metric.p_pow(),
            search_cache: BTreeMap::new(),
            report_cache: BTreeMap::new(),
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn num_samples(&self) -> usize {
        self.sizes.len()
    }

    pub(crate) fn size(&self, n: usize) -> usize {
        self.sizes[n]
    }

    pub(crate) fn entry(&self, n: usize, j: usize) -> &'a Trajectory {
        let entries: &'a [Trajectory] = self.chi[n];
        &entries[j]
    }

    pub(crate) fn p_pow(&self) -> f64 {
        self.p_pow
    }

    pub(crate) fn cfg(&self) -> &'a MotMeanConfig {
        self.cfg
    }

    pub(crate) fn dist_pow(&self, a: &Trajectory, b: &Trajectory) -> f64 {
        distance_pow(a, b, self.cfg.metric.ospa_params())
    }

    pub(crate) fn identity(&self) -> Vec<Vec<usize>> {
        vec![(0..self.len).collect(); self.sizes.len()]
    }

    pub(crate) fn check(&self, eta: &[bool], omega: &[Vec<usize>]) -> Result<()> {
        if eta.len() != self.len || omega.len() != self.sizes.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} slots and {} assignment rows",
                self.len,
                self.sizes.len()
            )));
        }
        for row in omega {
            if row.len() != self.len || !is_permutation(row) {
                return Err(Error::NotAPermutation(format!("{row:?}")));
            }
        }
        if !self.all_valid(eta, omega) {
            return Err(Error::InvalidExistenceAssignment);
        }
        Ok(())
    }

    pub(crate) fn all_valid(&self, eta: &[bool], omega: &[Vec<usize>]) -> bool {
        omega
            .iter()
            .zip(&self.sizes)
            .all(|(row, &size)| row_is_valid(eta, row, size))
    }

    fn inv_kappa(&self, norm: usize, n: usize) -> f64 {
        let k = self.cfg.metric.kappa(norm, self.sizes[n]);
        if k > 0.0 {
            1.0 / k
        } else {
            0.0
        }
    }

    fn members(&self, omega: &[Vec<usize>], l: usize) -> Vec<(usize, usize)> {
        (0..self.sizes.len())
            .filter(|&n| omega[n][l] < self.sizes[n])
            .map(|n| (n, omega[n][l]))
            .collect()
    }

    /// Contribution of slot `l` to `S`.
    pub(crate) fn slot_cost(
        &mut self,
        eta: &[bool],
        norm: usize,
        omega: &[Vec<usize>],
        l: usize,
        eval: Eval,
    ) -> f64 {
        let members = self.members(omega, l);
        let mut penalty = 0.0;
        for n in 0..self.sizes.len() {
            let member = omega[n][l] < self.sizes[n];
            if member != eta[l] {
                penalty += self.p_pow * self.inv_kappa(norm, n);
            }
        }
        if !eta[l] || members.is_empty() {
            return penalty;
        }
        penalty + self.with_mean(norm, &members, eval, |c, _| c)
    }

    /// Mean trajectory of slot `l` (empty when it has no members).
    pub(crate) fn slot_mean(
        &mut self,
        norm: usize,
        omega: &[Vec<usize>],
        l: usize,
        eval: Eval,
    ) -> Trajectory {
        let members = self.members(omega, l);
        if members.is_empty() {
            return Trajectory::empty(self.window, self.dim);
        }
        self.with_mean(norm, &members, eval, |_, t| t.clone())
    }

    fn with_mean<T>(
        &mut self,
        norm: usize,
        members: &[(usize, usize)],
        eval: Eval,
        f: impl FnOnce(f64, &Trajectory) -> T,
    ) -> T {
        // Uniformly scaled weights share a minimiser, so the cache is keyed on
        // weights relative to the largest one.
        let weights: Vec<f64> = members
            .iter()
            .map(|&(n, _)| self.inv_kappa(norm, n))
            .collect();
        let scale = weights.iter().copied().fold(0.0, f64::max);
        let rel: Vec<f64> = weights.iter().map(|w| w / scale).collect();
        let mut key = Vec::with_capacity(3 * members.len());
        for (&(n, j), w) in members.iter().zip(&rel) {
            key.extend([n as u64, j as u64, w.to_bits()]);
        }
        let cfg = self.cfg;
        let chi = &self.chi;
        let cache = match eval {
            Eval::Search => &mut self.search_cache,
            Eval::Report => &mut self.report_cache,
        };
        if cache.len() > CACHE_LIMIT && !cache.contains_key(&key) {
            cache.clear();
        }
        let entry = cache.entry(key).or_insert_with(|| {
            let refs: Vec<&Trajectory> = members.iter().map(|&(n, j)| &chi[n][j]).collect();
            let params = cfg.metric.ospa_params();
            let solve = |mode| Objective::new(&refs, &rel, params, mode).solve(&cfg.inner);
            let (mean, cost) = match eval {
                Eval::Search => solve(cfg.search_mode),
                Eval::Report => {
                    let exact = solve(CostMode::Exact);
                    let approx = solve(CostMode::Approximate);
                    if improves(approx.1, exact.1) {
                        approx
                    } else {
                        exact
                    }
                }
            };
            CachedMean { cost, mean }
        });
        f(scale * entry.cost, &entry.mean)
    }

    /// `S(η, ω)`; the caller guarantees the constraint holds.
    pub(crate) fn cost(&mut self, eta: &[bool], omega: &[Vec<usize>], eval: Eval) -> f64 {
        let norm = eta.iter().filter(|e| **e).count();
        (0..self.len)
            .map(|l| self.slot_cost(eta, norm, omega, l, eval))
            .sum()
    }

    /// Slot means for every slot (empty where inactive).
    pub(crate) fn means(
        &mut self,
        eta: &[bool],
        omega: &[Vec<usize>],
        eval: Eval,
    ) -> Vec<Trajectory> {
        let norm = eta.iter().filter(|e| **e).count();
        (0..self.len)
            .map(|l| {
                if eta[l] {
                    self.slot_mean(norm, omega, l, eval)
                } else {
                    Trajectory::empty(self.window, self.dim)
                }
            })
            .collect()
    }

    pub(crate) fn finish(&mut self, eta: Vec<bool>, omega: Vec<Vec<usize>>) -> MotMean {
        let cost = self.cost(&eta, &omega, Eval::Report);
        let tau = self.means(&eta, &omega, Eval::Report);
        let representation = MotRepresentation { eta, tau };
        MotMean {
            mean: representation.reconstruct(self.window),
            cost,
            representation,
            assignment: ExistenceAssignment { omega },
        }
    }

    pub(crate) fn empty_result(&self) -> MotMean {
        MotMean {
            mean: MultiObjectTrajectory::empty(self.window),
            cost: 0.0,
            representation: MotRepresentation {
                eta: Vec::new(),
                tau: Vec::new(),
            },
            assignment: ExistenceAssignment {
                omega: vec![Vec::new(); self.sizes.len()],
            },
        }
    }
}

/// `S(η, ω)` and the slot trajectories `τ*(η, ω)`, with exact slot means.
pub fn cost_s(
    eta: &[bool],
    omega: &ExistenceAssignment,
    samples: &[MultiObjectTrajectory],
    cfg: &MotMeanConfig,
) -> Result<(f64, Vec<Trajectory>)> {
    let mut problem = Problem::new(samples, cfg)?;
    problem.check(eta, &omega.omega)?;
    let cost = problem.cost(eta, &omega.omega, Eval::Report);
    Ok((cost, problem.means(eta, &omega.omega, Eval::Report)))
}
