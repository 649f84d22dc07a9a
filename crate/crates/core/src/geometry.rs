//! Base state-space distances with cut-off and weighted Fréchet means of
//! state vectors under the truncated cost `Σ w_n min(|x - v_n|, c)^r`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::float::{powr, sqrt};
use crate::{Error, Result};

const MAX_REFINE_ITERS: usize = 100;
const MOVE_TOLERANCE: f64 = 1e-9;
const WEISZFELD_GUARD: f64 = 1e-12;
const MAX_STEP_DOUBLINGS: usize = 40;
const MAX_NEWTON_STEPS: usize = 20;

/// Cut-off `c` and order `r` of a base distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseDistanceConfig {
    pub cutoff: f64,
    pub order: f64,
}

impl BaseDistanceConfig {
    pub fn new(cutoff: f64, order: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cut-off must be positive and finite, got {cutoff}"
            )));
        }
        if !(order >= 1.0 && order.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "order must be finite and >= 1, got {order}"
            )));
        }
        Ok(Self { cutoff, order })
    }
}

#[inline]
pub(crate) fn euclidean(y: &[f64], z: &[f64]) -> f64 {
    debug_assert_eq!(y.len(), z.len());
    let mut acc = 0.0;
    for (a, b) in y.iter().zip(z) {
        let d = a - b;
        acc += d * d;
    }
    sqrt(acc)
}

/// `min(|y - z|_2, c)`.
pub fn base_distance(y: &[f64], z: &[f64], c: f64) -> Result<f64> {
    if y.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: z.len(),
        });
    }
    Ok(euclidean(y, z).min(c))
}

/// Truncated cost `Σ w_n min(|x - v_n|, c)^r`.
pub fn truncated_cost(x: &[f64], points: &[&[f64]], weights: &[f64], c: f64, r: f64) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * powr(euclidean(x, p).min(c), r))
        .sum()
}

/// Local minimiser of the weighted, cut-off-truncated cost.
///
/// Returns a point whose cost is no larger than the cost at the weighted
/// arithmetic mean, and no larger than the cost at any of the sample points.
pub fn weighted_state_mean(points: &[&[f64]], weights: &[f64], c: f64, r: f64) -> Result<Vec<f64>> {
    let Some(first) = points.first() else {
        return Err(Error::NoContributingStates);
    };
    let dim = first.len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    if weights.len() != points.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "weights must be positive and finite, got {w}"
        )));
    }
    BaseDistanceConfig::new(c, r)?;
    let mut out = vec![0.0; dim];
    mean_into(points, weights, c, r, &mut out);
    Ok(out)
}

/// Unchecked solver used on hot paths. `points` must be nonempty.
pub(crate) fn mean_into(points: &[&[f64]], weights: &[f64], c: f64, r: f64, out: &mut [f64]) {
    debug_assert!(!points.is_empty());
    if points.len() == 1 {
        out.copy_from_slice(points[0]);
        return;
    }
    let mut active = vec![false; points.len()];
    weighted_mean(points, weights, None, out);
    refine(points, weights, c, r, out, &mut active);
    let best_cost = truncated_cost(out, points, weights, c, r);

    // The mean start can land where the cut-off hides every sample; any sample
    // point strictly beating it seeds a second local search.
    let mut seed: Option<(usize, f64)> = None;
    for (n, p) in points.iter().enumerate() {
        let cost = truncated_cost(p, points, weights, c, r);
        if cost < best_cost && seed.is_none_or(|(_, s)| cost < s) {
            seed = Some((n, cost));
        }
    }
    let Some((n, seed_cost)) = seed else {
        return;
    };
    let mut candidate = vec![0.0; out.len()];
    let anchor = points[n];
    for (flag, p) in active.iter_mut().zip(points) {
        *flag = euclidean(anchor, p) < c;
    }
    weighted_mean(points, weights, Some(&active), &mut candidate);
    refine(points, weights, c, r, &mut candidate, &mut active);
    if truncated_cost(&candidate, points, weights, c, r) < seed_cost {
        out.copy_from_slice(&candidate);
    } else {
        out.copy_from_slice(anchor);
    }
}

fn weighted_mean(points: &[&[f64]], weights: &[f64], mask: Option<&[bool]>, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut total = 0.0;
    for (n, (p, w)) in points.iter().zip(weights).enumerate() {
        if mask.is_some_and(|m| !m[n]) {
            continue;
        }
        total += w;
        for (o, v) in out.iter_mut().zip(p.iter()) {
            *o += w * v;
        }
    }
    if total > 0.0 {
        out.iter_mut().for_each(|x| *x /= total);
    }
}

/// Trimmed fixed-point iteration: samples at distance >= c contribute the
/// constant `c^r` and are left out of the update.
fn refine(points: &[&[f64]], weights: &[f64], c: f64, r: f64, x: &mut [f64], active: &mut [bool]) {
    let dim = x.len();
    let mut next = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut previous: Option<Vec<bool>> = None;
    for _ in 0..MAX_REFINE_ITERS {
        let mut total = 0.0;
        next.iter_mut().for_each(|v| *v = 0.0);
        for (n, p) in points.iter().enumerate() {
            let d = euclidean(x, p);
            active[n] = d < c;
            if !active[n] {
                continue;
            }
            let a = if r == 2.0 {
                weights[n]
            } else if r < 2.0 {
                weights[n] * powr(d.max(WEISZFELD_GUARD), r - 2.0)
            } else {
                weights[n] * powr(d, r - 2.0)
            };
            total += a;
            for (o, v) in next.iter_mut().zip(p.iter()) {
                *o += a * v;
            }
        }
        if total <= 0.0 {
            break;
        }
        next.iter_mut().for_each(|v| *v /= total);
        if r != 2.0 {
            extend_step(points, weights, c, r, x, &mut next, &mut trial);
        }
        let moved = euclidean(x, &next);
        x.copy_from_slice(&next);
        let stable = previous.as_deref() == Some(&*active);
        if stable && moved < MOVE_TOLERANCE {
            break;
        }
        match previous.as_mut() {
            Some(prev) => prev.copy_from_slice(active),
            None => previous = Some(active.to_vec()),
        }
    }
    if r != 2.0 {
        newton_polish(points, weights, c, r, x);
    }
}

/// Damped Newton steps on the samples within the cut-off, accepted only when
/// they lower the truncated cost.
fn newton_polish(points: &[&[f64]], weights: &[f64], c: f64, r: f64, x: &mut [f64]) {
    let dim = x.len();
    let mut hess = vec![0.0; dim * dim];
    let mut grad = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut cost = truncated_cost(x, points, weights, c, r);
    for _ in 0..MAX_NEWTON_STEPS {
        hess.iter_mut().for_each(|h| *h = 0.0);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (p, w) in points.iter().zip(weights) {
            let d = euclidean(x, p);
            if d >= c || d < WEISZFELD_GUARD {
                continue;
            }
            let a = w * r * powr(d, r - 2.0);
            for i in 0..dim {
                let ui = (x[i] - p[i]) / d;
                grad[i] += a * (x[i] - p[i]);
                for j in 0..dim {
                    let uj = (x[j] - p[j]) / d;
                    let eye = if i == j { 1.0 } else { 0.0 };
                    hess[i * dim + j] += a * (eye + (r - 2.0) * ui * uj);
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| hess[i * dim + i]).sum();
        if !(trace > 0.0) {
            return;
        }
        for i in 0..dim {
            hess[i * dim + i] += 1e-12 * trace;
        }
        let Some(step) = solve_dense(&mut hess, &mut grad, dim) else {
            return;
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_STEP_DOUBLINGS {
            for ((t, a), s) in trial.iter_mut().zip(x.iter()).zip(step) {
                *t = a - scale * s;
            }
            let next = truncated_cost(&trial, points, weights, c, r);
            if next < cost {
                cost = next;
                accepted = true;
                break;
            }
            scale /= 2.0;
        }
        if !accepted {
            return;
        }
        let moved = euclidean(x, &trial);
        x.copy_from_slice(&trial);
        if moved < MOVE_TOLERANCE {
            return;
        }
    }
}

/// Gaussian elimination with partial pivoting; `b` holds the solution.
fn solve_dense<'b>(a: &mut [f64], b: &'b mut [f64], n: usize) -> Option<&'b [f64]> {
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = b[col];
        for k in col + 1..n {
            v -= a[col * n + k] * b[k];
        }
        b[col] = v / a[col * n + col];
    }
    b.iter().all(|v| v.is_finite()).then_some(&*b)
}

/// Fixed-point steps crawl near sample points; doubles the step while the
/// cost keeps falling.
fn extend_step(
    points: &[&[f64]],
    weights: &[f64],
    c: f64,
    r: f64,
    x: &[f64],
    next: &mut [f64],
    trial: &mut [f64],
) {
    let mut best = truncated_cost(next, points, weights, c, r);
    let mut scale = 2.0;
    for _ in 0..MAX_STEP_DOUBLINGS {
        for ((t, a), b) in trial.iter_mut().zip(x).zip(next.iter()) {
            *t = a + scale * (b - a);
        }
        let cost = truncated_cost(trial, points, weights, c, r);
        if !(cost < best) {
            break;
        }
        best = cost;
        scale *= 2.0;
    }
    if scale > 2.0 {
        let used = scale / 2.0;
        for (n, a) in next.iter_mut().zip(x) {
            *n = a + used * (*n - a);
        }
    }
}
