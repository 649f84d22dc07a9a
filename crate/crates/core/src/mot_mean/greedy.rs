//! Greedy alternating search over the assignment `ω` and the existence
//! list `η`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{repair_row, Eval, ExistenceAssignment, MotMean, MotMeanConfig, Problem};
use crate::assignment::{solve_assignment, CostMatrix};
use crate::float::powr;
use crate::gibbs::{seeded_rng, SeededRng};
use crate::mot_metric::MultiObjectTrajectory;
use crate::traj_mean::improves;
use crate::trajectory::Trajectory;
use crate::Result;

/// Search state with its cost under [`Eval::Search`].
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub eta: Vec<bool>,
    pub omega: Vec<Vec<usize>>,
    pub cost: f64,
}

/// Re-assigns every row optimally against the current slot means. The new
/// rows are kept only when they strictly lower the cost.
pub(crate) fn optimize_rows(p: &mut Problem, state: &mut Candidate) {
    let len = p.len();
    let tau = p.means(&state.eta, &state.omega, Eval::Search);
    let active: Vec<usize> = (0..len).filter(|&l| state.eta[l]).collect();
    let mut rows = Vec::with_capacity(p.num_samples());
    for n in 0..p.num_samples() {
        let size = p.size(n);
        let mut row = vec![usize::MAX; len];
        let mut used = vec![false; len];
        if !active.is_empty() && size > 0 {
            let m = CostMatrix::from_fn(active.len(), size, |a, j| {
                p.dist_pow(&tau[active[a]], p.entry(n, j))
            })
            .expect("trajectory distances are finite");
            for (a, j) in solve_assignment(&m).pairs {
                row[active[a]] = j;
                used[j] = true;
            }
        }
        let free = (0..len).filter(|&v| !used[v]);
        let open: Vec<usize> = (0..len).filter(|&l| row[l] == usize::MAX).collect();
        for (l, v) in open.into_iter().zip(free) {
            row[l] = v;
        }
        rows.push(row);
    }
    debug_assert!(p.all_valid(&state.eta, &rows));
    let cost = p.cost(&state.eta, &rows, Eval::Search);
    if improves(cost, state.cost) {
        state.omega = rows;
        state.cost = cost;
    }
}

/// Tries to activate each inactive slot with a cluster of sample entries
/// that are currently unmatched or matched at the cut-off.
pub(crate) fn add_slots(p: &mut Problem, rng: &mut SeededRng, state: &mut Candidate) {
    let len = p.len();
    let tau = p.means(&state.eta, &state.omega, Eval::Search);
    let metric = p.cfg().metric;
    let saturated = powr(metric.c, metric.r) * (1.0 - 1e-12);
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); p.num_samples()];
    for (n, pool) in pools.iter_mut().enumerate() {
        for l in 0..len {
            let j = state.omega[n][l];
            if j < p.size(n) && (!state.eta[l] || p.dist_pow(&tau[l], p.entry(n, j)) >= saturated) {
                pool.push(j);
            }
        }
    }
    let mut pool: Vec<(usize, usize)> = pools
        .iter()
        .enumerate()
        .flat_map(|(n, js)| js.iter().map(move |&j| (n, j)))
        .collect();
    let inactive: Vec<usize> = (0..len).filter(|&l| !state.eta[l]).collect();
    for l in inactive {
        if pool.is_empty() {
            break;
        }
        let (un, uj) = pool.remove(rng.random_range(0..pool.len()));
        let u: &Trajectory = p.entry(un, uj);
        let mut omega = state.omega.clone();
        for (n, row) in omega.iter_mut().enumerate() {
            let mut nearest: Option<(f64, usize)> = None;
            for &j in &pools[n] {
                let d = p.dist_pow(u, p.entry(n, j));
                if nearest.is_none_or(|(best, _)| d < best) {
                    nearest = Some((d, j));
                }
            }
            if let Some((_, j)) = nearest {
                let at = row
                    .iter()
                    .position(|&v| v == j)
                    .expect("rows are permutations");
                row.swap(l, at);
            }
        }
        let mut eta = state.eta.clone();
        eta[l] = true;
        for (n, row) in omega.iter_mut().enumerate() {
            repair_row(&eta, row, p.size(n));
        }
        let cost = p.cost(&eta, &omega, Eval::Search);
        if improves(cost, state.cost) {
            *state = Candidate { eta, omega, cost };
        }
    }
}

/// Deactivates active slots, in ascending order, whenever that strictly
/// lowers the cost.
pub(crate) fn delete_slots(p: &mut Problem, state: &mut Candidate) {
    for l in 0..p.len() {
        if !state.eta[l] {
            continue;
        }
        let mut eta = state.eta.clone();
        eta[l] = false;
        let mut omega = state.omega.clone();
        for (n, row) in omega.iter_mut().enumerate() {
            repair_row(&eta, row, p.size(n));
        }
        let cost = p.cost(&eta, &omega, Eval::Search);
        if improves(cost, state.cost) {
            *state = Candidate { eta, omega, cost };
        }
    }
}

pub(crate) fn greedy_search(p: &mut Problem) -> Candidate {
    let cfg = p.cfg();
    let mut rng = seeded_rng(cfg.seed);
    let eta = vec![false; p.len()];
    let omega = p.identity();
    let cost = p.cost(&eta, &omega, Eval::Search);
    let mut state = Candidate { eta, omega, cost };
    optimize_rows(p, &mut state);
    let mut best = state.clone();
    let mut delta = f64::INFINITY;
    let mut iter = 0;
    while iter < cfg.max_iters && delta > cfg.threshold {
        iter += 1;
        add_slots(p, &mut rng, &mut state);
        delete_slots(p, &mut state);
        optimize_rows(p, &mut state);
        if !improves(state.cost, best.cost) {
            break;
        }
        delta = best.cost - state.cost;
        best = state.clone();
    }
    best
}

/// Greedy multi-object consensus. The returned cost uses exact slot means.
pub fn greedy_mot_mean(samples: &[MultiObjectTrajectory], cfg: &MotMeanConfig) -> Result<MotMean> {
    let mut p = Problem::new(samples, cfg)?;
    if p.len() == 0 {
        return Ok(p.empty_result());
    }
    let best = greedy_search(&mut p);
    Ok(p.finish(best.eta, best.omega))
}

fn start<'a>(
    samples: &'a [MultiObjectTrajectory],
    cfg: &'a MotMeanConfig,
    eta: &[bool],
    omega: &ExistenceAssignment,
) -> Result<(Problem<'a>, Candidate)> {
    let mut p = Problem::new(samples, cfg)?;
    p.check(eta, &omega.omega)?;
    let cost = p.cost(eta, &omega.omega, Eval::Search);
    let state = Candidate {
        eta: eta.to_vec(),
        omega: omega.omega.clone(),
        cost,
    };
    Ok((p, state))
}

/// One assignment step. Returns the new rows and their cost, with slot
/// means evaluated in `cfg.search_mode`.
pub fn optimize_permutation(
    eta: &[bool],
    omega: &ExistenceAssignment,
    samples: &[MultiObjectTrajectory],
    cfg: &MotMeanConfig,
) -> Result<(ExistenceAssignment, f64)> {
    let (mut p, mut state) = start(samples, cfg, eta, omega)?;
    optimize_rows(&mut p, &mut state);
    Ok((ExistenceAssignment { omega: state.omega }, state.cost))
}

/// One activation pass, drawing candidates with `cfg.seed`.
pub fn add_trajectories(
    eta: &[bool],
    omega: &ExistenceAssignment,
    samples: &[MultiObjectTrajectory],
    cfg: &MotMeanConfig,
) -> Result<(Vec<bool>, ExistenceAssignment)> {
    let (mut p, mut state) = start(samples, cfg, eta, omega)?;
    let mut rng = seeded_rng(cfg.seed);
    add_slots(&mut p, &mut rng, &mut state);
    Ok((state.eta, ExistenceAssignment { omega: state.omega }))
}

/// One deactivation pass. Rows are repaired when a deletion changes which
/// side of the constraint applies, so the assignment is returned too.
pub fn delete_trajectories(
    eta: &[bool],
    omega: &ExistenceAssignment,
    samples: &[MultiObjectTrajectory],
    cfg: &MotMeanConfig,
) -> Result<(Vec<bool>, ExistenceAssignment)> {
    let (mut p, mut state) = start(samples, cfg, eta, omega)?;
    delete_slots(&mut p, &mut state);
    Ok((state.eta, ExistenceAssignment { omega: state.omega }))
}
