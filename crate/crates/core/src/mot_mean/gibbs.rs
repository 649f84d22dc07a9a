//! Gibbs sampling over `(η, ω)` targeting `ρ ∝ exp(-α S(η, ω))` on the
//! feasible set. Each assignment row is resampled coordinate-wise through
//! its insertion vector relative to a fixed reference permutation.

use alloc::vec;
use alloc::vec::Vec;

use super::greedy::{greedy_search, Candidate};
use super::insertion::{insert_unchecked, invert_unchecked};
use super::{row_is_valid, Eval, ExistenceAssignment, MotMean, MotMeanConfig, Problem};
use crate::gibbs::{sample_by_cost, seeded_rng, GibbsConfig, SeededRng};
use crate::mot_metric::MultiObjectTrajectory;
use crate::traj_mean::improves;
use crate::Result;

/// `d_T^r` between every pair of existing sample entries.
struct PairTable {
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    dist: Vec<f64>,
    total: usize,
    p_pow: f64,
}

impl PairTable {
    fn new(p: &Problem) -> Self {
        let sizes: Vec<usize> = (0..p.num_samples()).map(|n| p.size(n)).collect();
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut total = 0;
        for s in &sizes {
            offsets.push(total);
            total += s;
        }
        let mut dist = vec![0.0; total * total];
        for n in 0..sizes.len() {
            for a in 0..sizes[n] {
                let g = offsets[n] + a;
                for m in n + 1..sizes.len() {
                    for b in 0..sizes[m] {
                        let h = offsets[m] + b;
                        let d = p.dist_pow(p.entry(n, a), p.entry(m, b));
                        dist[g * total + h] = d;
                        dist[h * total + g] = d;
                    }
                }
            }
        }
        Self {
            offsets,
            sizes,
            dist,
            total,
            p_pow: p.p_pow(),
        }
    }

    #[inline]
    fn pair(&self, n: usize, a: usize, m: usize, b: usize) -> f64 {
        match (a < self.sizes[n], b < self.sizes[m]) {
            (true, true) => self.dist[(self.offsets[n] + a) * self.total + self.offsets[m] + b],
            (false, false) => 0.0,
            _ => self.p_pow,
        }
    }
}

/// A running chain; exposes its state so that its law can be inspected.
pub struct MotGibbsChain<'a> {
    p: Problem<'a>,
    rng: SeededRng,
    alpha: f64,
    rearrange_alpha: f64,
    efficient: bool,
    rearrange: bool,
    theta: Vec<Vec<usize>>,
    pairs: Option<PairTable>,
    state: Candidate,
    slots: Vec<f64>,
    best: Candidate,
}

fn slot_vector(p: &mut Problem, eta: &[bool], omega: &[Vec<usize>]) -> Vec<f64> {
    let norm = eta.iter().filter(|e| **e).count();
    (0..p.len())
        .map(|l| p.slot_cost(eta, norm, omega, l, Eval::Search))
        .collect()
}

impl<'a> MotGibbsChain<'a> {
    /// Starts a chain at a feasible `(η, ω)`.
    pub fn new(
        samples: &'a [MultiObjectTrajectory],
        cfg: &'a MotMeanConfig,
        gibbs: &GibbsConfig,
        eta: Vec<bool>,
        omega: ExistenceAssignment,
    ) -> Result<Self> {
        gibbs.validate()?;
        let mut p = Problem::new(samples, cfg)?;
        p.check(&eta, &omega.omega)?;
        let cost = p.cost(&eta, &omega.omega, Eval::Search);
        Ok(Self::start(
            p,
            gibbs,
            Candidate {
                eta,
                omega: omega.omega,
                cost,
            },
        ))
    }

    fn start(mut p: Problem<'a>, gibbs: &GibbsConfig, state: Candidate) -> Self {
        let alpha = gibbs.resolve_alpha(state.cost);
        let pairs = (gibbs.use_efficient_proposal || gibbs.rearrange_nonexistence)
            .then(|| PairTable::new(&p));
        let slots = slot_vector(&mut p, &state.eta, &state.omega);
        Self {
            p,
            rng: seeded_rng(gibbs.seed),
            alpha,
            rearrange_alpha: gibbs.rearrange_alpha.unwrap_or(alpha),
            efficient: gibbs.use_efficient_proposal,
            rearrange: gibbs.rearrange_nonexistence,
            theta: state.omega.clone(),
            pairs,
            best: state.clone(),
            slots,
            state,
        }
    }

    pub fn eta(&self) -> &[bool] {
        &self.state.eta
    }

    pub fn omega(&self) -> &[Vec<usize>] {
        &self.state.omega
    }

    pub fn cost(&self) -> f64 {
        self.state.cost
    }

    pub fn best_cost(&self) -> f64 {
        self.best.cost
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn record(&mut self) {
        if improves(self.state.cost, self.best.cost) {
            self.best = self.state.clone();
        }
    }

    /// One full sweep: optional rearrangement, every `η_l`, then every row.
    pub fn sweep(&mut self) {
        if self.p.len() == 0 {
            return;
        }
        if self.rearrange {
            self.rearrange_inactive();
        }
        self.sample_existence();
        for n in 0..self.p.num_samples() {
            self.sample_row(n);
        }
    }

    fn sample_existence(&mut self) {
        for l in 0..self.p.len() {
            let mut flipped = self.state.eta.clone();
            flipped[l] = !flipped[l];
            let (alt_slots, alt_cost) = if self.p.all_valid(&flipped, &self.state.omega) {
                let s = slot_vector(&mut self.p, &flipped, &self.state.omega);
                let c = s.iter().sum();
                (Some(s), c)
            } else {
                (None, f64::INFINITY)
            };
            let on = self.state.eta[l];
            let costs = if on {
                [alt_cost, self.state.cost]
            } else {
                [self.state.cost, alt_cost]
            };
            let pick_on = sample_by_cost(&mut self.rng, &costs, self.alpha) == 1;
            if pick_on != on {
                self.state.eta = flipped;
                self.slots = alt_slots.expect("infeasible states have no mass");
                self.state.cost = alt_cost;
                self.record();
            }
        }
    }

    /// `S` with row `n` replaced by `row`, touching only changed slots.
    fn cost_with_row(&mut self, n: usize, row: &mut Vec<usize>) -> (f64, Vec<(usize, f64)>) {
        let norm = self.state.eta.iter().filter(|e| **e).count();
        core::mem::swap(&mut self.state.omega[n], row);
        let mut changed = Vec::new();
        let mut total = 0.0;
        for l in 0..self.p.len() {
            if self.state.omega[n][l] != row[l] {
                let c = self
                    .p
                    .slot_cost(&self.state.eta, norm, &self.state.omega, l, Eval::Search);
                changed.push((l, c));
                total += c;
            } else {
                total += self.slots[l];
            }
        }
        core::mem::swap(&mut self.state.omega[n], row);
        (total, changed)
    }

    fn surrogate(&self, n: usize, row: &[usize]) -> f64 {
        let pairs = self
            .pairs
            .as_ref()
            .expect("pair table built for the surrogate");
        let mut total = 0.0;
        for l in 0..row.len() {
            for m in (0..self.p.num_samples()).filter(|&m| m != n) {
                let b = self.state.omega[m][l];
                total += if self.state.eta[l] {
                    pairs.pair(n, row[l], m, b)
                } else if b < self.p.size(m) {
                    self.p.p_pow()
                } else {
                    0.0
                };
            }
        }
        total
    }

    fn sample_row(&mut self, n: usize) {
        let len = self.p.len();
        let size = self.p.size(n);
        let theta = self.theta[n].clone();
        let mut j = invert_unchecked(&theta, &self.state.omega[n]);
        for l in 0..len {
            let mut rows = Vec::with_capacity(l + 1);
            let mut costs = Vec::with_capacity(l + 1);
            let mut updates = Vec::with_capacity(l + 1);
            for v in 0..=l {
                j[l] = v;
                let mut row = insert_unchecked(&theta, &j);
                if !row_is_valid(&self.state.eta, &row, size) {
                    costs.push(f64::INFINITY);
                    updates.push(None);
                } else if self.efficient {
                    costs.push(self.surrogate(n, &row));
                    updates.push(None);
                } else {
                    let (c, changed) = self.cost_with_row(n, &mut row);
                    costs.push(c);
                    updates.push(Some(changed));
                }
                rows.push(row);
            }
            let v = sample_by_cost(&mut self.rng, &costs, self.alpha);
            j[l] = v;
            if rows[v] == self.state.omega[n] {
                continue;
            }
            self.state.omega[n] = rows.swap_remove(v);
            if let Some(changed) = updates.swap_remove(v) {
                for (slot, c) in changed {
                    self.slots[slot] = c;
                }
                self.state.cost = costs[v];
                self.record();
            }
        }
        if self.efficient {
            self.slots = slot_vector(&mut self.p, &self.state.eta, &self.state.omega);
            self.state.cost = self.slots.iter().sum();
            self.record();
        }
    }

    /// Resamples, per row, the entries held by inactive slots from the
    /// pairwise-distance law. `S` is unchanged by construction.
    fn rearrange_inactive(&mut self) {
        let inactive: Vec<usize> = (0..self.p.len()).filter(|&l| !self.state.eta[l]).collect();
        if inactive.len() < 2 {
            return;
        }
        let pairs = self
            .pairs
            .take()
            .expect("pair table built for rearrangement");
        let reference: Vec<usize> = (0..inactive.len()).collect();
        for n in 0..self.p.num_samples() {
            let mut values: Vec<usize> = inactive.iter().map(|&l| self.state.omega[n][l]).collect();
            values.sort_unstable();
            let current: Vec<usize> = inactive
                .iter()
                .map(|&l| {
                    values
                        .binary_search(&self.state.omega[n][l])
                        .expect("value present")
                })
                .collect();
            let mut j = invert_unchecked(&reference, &current);
            for l in 0..inactive.len() {
                let mut costs = Vec::with_capacity(l + 1);
                for v in 0..=l {
                    j[l] = v;
                    let order = insert_unchecked(&reference, &j);
                    let mut r = 0.0;
                    for (i, &slot) in inactive.iter().enumerate() {
                        for m in (0..self.p.num_samples()).filter(|&m| m != n) {
                            r +=
                                2.0 * pairs.pair(n, values[order[i]], m, self.state.omega[m][slot]);
                        }
                    }
                    costs.push(r);
                }
                j[l] = sample_by_cost(&mut self.rng, &costs, self.rearrange_alpha);
            }
            let order = insert_unchecked(&reference, &j);
            for (i, &slot) in inactive.iter().enumerate() {
                self.state.omega[n][slot] = values[order[i]];
            }
        }
        self.pairs = Some(pairs);
        self.slots = slot_vector(&mut self.p, &self.state.eta, &self.state.omega);
        self.state.cost = self.slots.iter().sum();
    }

    /// Best visited state with exact slot means.
    pub fn into_best(mut self) -> MotMean {
        self.p.finish(self.best.eta, self.best.omega)
    }
}

/// Gibbs multi-object consensus started from the greedy solution. Returns
/// whichever of the greedy and best visited states has the lower exact cost.
pub fn gibbs_mot_mean(
    samples: &[MultiObjectTrajectory],
    cfg: &MotMeanConfig,
    gibbs: &GibbsConfig,
) -> Result<MotMean> {
    gibbs.validate()?;
    let mut p = Problem::new(samples, cfg)?;
    if p.len() == 0 {
        return Ok(p.empty_result());
    }
    let init = greedy_search(&mut p);
    let mut chain = MotGibbsChain::start(p, gibbs, init.clone());
    for _ in 0..gibbs.iterations {
        chain.sweep();
    }
    let best = chain.best.clone();
    let visited = chain.p.finish(best.eta, best.omega);
    let greedy = chain.p.finish(init.eta, init.omega);
    Ok(if improves(visited.cost, greedy.cost) {
        visited
    } else {
        greedy
    })
}
