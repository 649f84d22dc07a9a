//! Shared pieces of the Gibbs samplers: configuration, the seeded generator
//! and categorical sampling from unnormalised log-weights.

use alloc::format;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::float::exp;
use crate::{Error, Result};

pub(crate) type SeededRng = ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters of a Gibbs sampler targeting `ρ(y) ∝ exp(-α g(y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    /// Number of full sweeps.
    pub iterations: usize,
    /// Inverse temperature. `None` selects `10 / g(y_init)`.
    pub alpha: Option<f64>,
    pub seed: u64,
    /// Sample assignment rows from the pairwise-distance surrogate instead of
    /// the exact cost.
    pub use_efficient_proposal: bool,
    /// Resample the assignment entries of non-existent slots between sweeps.
    pub rearrange_nonexistence: bool,
    /// Inverse temperature of the rearrangement law. `None` reuses `alpha`.
    pub rearrange_alpha: Option<f64>,
}

impl GibbsConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            alpha: None,
            seed,
            use_efficient_proposal: false,
            rearrange_nonexistence: false,
            rearrange_alpha: None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter(
                "Gibbs iterations must be >= 1".into(),
            ));
        }
        for a in [self.alpha, self.rearrange_alpha].into_iter().flatten() {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "Gibbs temperature must be positive, got {a}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn resolve_alpha(&self, initial_cost: f64) -> f64 {
        self.alpha.unwrap_or({
            if initial_cost > 0.0 {
                10.0 / initial_cost
            } else {
                1.0
            }
        })
    }
}

/// Draws index `i` with probability `∝ exp(-alpha * costs[i])`. Infinite
/// costs get zero mass; at least one cost must be finite.
pub(crate) fn sample_by_cost<R: Rng + ?Sized>(rng: &mut R, costs: &[f64], alpha: f64) -> usize {
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    debug_assert!(best.is_finite());
    let mut total = 0.0;
    for c in costs {
        if c.is_finite() {
            total += exp(-alpha * (c - best));
        }
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, c) in costs.iter().enumerate() {
        if !c.is_finite() {
            continue;
        }
        last = i;
        let w = exp(-alpha * (c - best));
        if u < w {
            return i;
        }
        u -= w;
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categorical_frequencies() {
        let mut rng = seeded_rng(7);
        let costs = [0.0, core::f64::consts::LN_2, f64::INFINITY];
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[sample_by_cost(&mut rng, &costs, 1.0)] += 1;
        }
        assert_eq!(counts[2], 0);
        let frac = counts[0] as f64 / 30_000.0;
        assert!((frac - 2.0 / 3.0).abs() < 0.015, "{frac}");
    }

    #[test]
    fn default_alpha_scales_with_cost() {
        let g = GibbsConfig::new(5, 0);
        assert_eq!(g.resolve_alpha(4.0), 2.5);
        assert_eq!(g.resolve_alpha(0.0), 1.0);
        assert!(GibbsConfig::new(0, 0).validate().is_err());
    }
}
