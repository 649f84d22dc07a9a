//! OSPA-construction distances between multi-object trajectories: OSPA²
//! and its normaliser variants COLA-OSPA and TT-OSPA.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::assignment::{solve_assignment, CostMatrix};
use crate::float::{powr, root};
use crate::trajectory::{distance_pow, OspaParams, Trajectory};
use crate::{Error, Result};

/// A multiset of trajectories over one shared window.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiObjectTrajectory {
    window: usize,
    elements: Vec<Trajectory>,
}

impl MultiObjectTrajectory {
    pub fn empty(window: usize) -> Self {
        Self {
            window,
            elements: Vec::new(),
        }
    }

    pub fn new(window: usize, elements: Vec<Trajectory>) -> Result<Self> {
        let dim = elements.iter().find(|e| !e.is_empty()).map(Trajectory::dim);
        for e in &elements {
            if e.window() != window {
                return Err(Error::WindowMismatch {
                    expected: window,
                    found: e.window(),
                });
            }
            if let Some(d) = dim {
                if !e.is_empty() && e.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: e.dim(),
                    });
                }
            }
        }
        Ok(Self { window, elements })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Trajectory] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Trajectory> {
        self.elements
    }

    /// State dimension of the first nonempty element.
    pub fn dim(&self) -> Option<usize> {
        self.elements
            .iter()
            .find(|e| !e.is_empty())
            .map(Trajectory::dim)
    }

    /// Restriction to scans `0..t`; elements left without any scan are
    /// dropped.
    pub fn truncated(&self, t: usize) -> Self {
        Self {
            window: self.window,
            elements: self
                .elements
                .iter()
                .map(|e| e.truncated(t))
                .filter(|e| !e.is_empty())
                .collect(),
        }
    }

    /// Number of elements whose domain contains scan `k`.
    pub fn cardinality_at(&self, k: usize) -> usize {
        self.elements.iter().filter(|e| e.contains(k)).count()
    }
}

/// Normaliser `κ(s, m)` of the OSPA construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    /// `κ = max(s, m)`.
    Ospa2,
    /// `κ = c^r`, with `p = c`.
    Cola,
    /// `κ = 1`, with `p = c / alpha^(1/r)`.
    Tt { alpha: f64 },
}

impl Kappa {
    pub fn name(&self) -> &'static str {
        match self {
            Kappa::Ospa2 => "ospa2",
            Kappa::Cola => "cola",
            Kappa::Tt { .. } => "tt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotMetricConfig {
    pub r: f64,
    /// Cardinality penalty.
    pub p: f64,
    /// Cut-off of the base trajectory distance.
    pub c: f64,
    pub kappa: Kappa,
}

impl MotMetricConfig {
    /// OSPA² with `c ∈ [p, 2^(1/r) p]`.
    pub fn ospa2(r: f64, p: f64, c: f64) -> Result<Self> {
        Self {
            r,
            p,
            c,
            kappa: Kappa::Ospa2,
        }
        .validated()
    }

    pub fn cola(r: f64, c: f64) -> Result<Self> {
        Self {
            r,
            p: c,
            c,
            kappa: Kappa::Cola,
        }
        .validated()
    }

    pub fn tt(r: f64, c: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "TT alpha must be positive, got {alpha}"
            )));
        }
        Self {
            r,
            p: c / root(alpha, r),
            c,
            kappa: Kappa::Tt { alpha },
        }
        .validated()
    }

    /// Checks the parameter band and the variant constraints.
    pub fn validated(self) -> Result<Self> {
        OspaParams::new(self.c, self.r)?;
        if !(self.p >= 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cardinality penalty must be >= 0, got {}",
                self.p
            )));
        }
        let upper = root(2.0, self.r) * self.p;
        let slack = 1e-12 * self.c.max(1.0);
        if self.c < self.p - slack || self.c > upper + slack {
            return Err(Error::InvalidParameter(format!(
                "cut-off c = {} outside [p, 2^(1/r) p] = [{}, {}]",
                self.c, self.p, upper
            )));
        }
        match self.kappa {
            Kappa::Cola if (self.p - self.c).abs() > slack => {
                Err(Error::InvalidParameter("COLA requires p = c".into()))
            }
            Kappa::Tt { alpha } if (self.p - self.c / root(alpha, self.r)).abs() > slack => Err(
                Error::InvalidParameter("TT requires p = c / alpha^(1/r)".into()),
            ),
            _ => Ok(self),
        }
    }

    pub fn ospa_params(&self) -> OspaParams {
        OspaParams {
            c: self.c,
            r: self.r,
        }
    }

    #[inline]
    pub fn p_pow(&self) -> f64 {
        powr(self.p, self.r)
    }

    /// `κ(s, m)`, symmetric in its arguments.
    #[inline]
    pub fn kappa(&self, s: usize, m: usize) -> f64 {
        match self.kappa {
            Kappa::Ospa2 => s.max(m) as f64,
            Kappa::Cola => powr(self.c, self.r),
            Kappa::Tt { .. } => 1.0,
        }
    }
}

/// Distance given the `m x s` matrix of `d_T^r` values between the smaller
/// set's elements (rows) and the larger set's (columns).
pub fn distance_from_costs(costs: &CostMatrix, cfg: &MotMetricConfig) -> f64 {
    let (m, s) = (
        costs.rows().min(costs.cols()),
        costs.rows().max(costs.cols()),
    );
    if s == 0 {
        return 0.0;
    }
    let matched = solve_assignment(costs).total;
    let numer = matched + (s - m) as f64 * cfg.p_pow();
    let kappa = cfg.kappa(s, m);
    if kappa == 0.0 {
        return 0.0;
    }
    root(numer / kappa, cfg.r)
}

/// OSPA-based distance between two multi-object trajectories.
pub fn mot_distance(
    x: &MultiObjectTrajectory,
    y: &MultiObjectTrajectory,
    cfg: &MotMetricConfig,
) -> Result<f64> {
    if x.window != y.window {
        return Err(Error::WindowMismatch {
            expected: x.window,
            found: y.window,
        });
    }
    if let (Some(a), Some(b)) = (x.dim(), y.dim()) {
        if a != b {
            return Err(Error::DimensionMismatch {
                expected: a,
                found: b,
            });
        }
    }
    let params = cfg.ospa_params();
    let oriented = |small: &MultiObjectTrajectory, large: &MultiObjectTrajectory| {
        CostMatrix::from_fn(small.len(), large.len(), |i, j| {
            distance_pow(&small.elements[i], &large.elements[j], params)
        })
        .map(|costs| distance_from_costs(&costs, cfg))
    };
    match x.len().cmp(&y.len()) {
        Ordering::Less => oriented(x, y),
        Ordering::Greater => oriented(y, x),
        // Both orientations, so that rounding cannot break symmetry.
        Ordering::Equal => Ok(oriented(x, y)?.min(oriented(y, x)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn traj(window: usize, pts: &[(usize, f64)]) -> Trajectory {
        let domain: Vec<usize> = pts.iter().map(|p| p.0).collect();
        let states: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.1]).collect();
        Trajectory::from_parts(window, 1, &domain, &states).unwrap()
    }

    #[test]
    fn empty_sets_are_at_zero() {
        let cfg = MotMetricConfig::ospa2(1.0, 1.0, 1.0).unwrap();
        let e = MultiObjectTrajectory::empty(3);
        assert_eq!(mot_distance(&e, &e, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn identical_sets_are_at_zero() {
        let x = MultiObjectTrajectory::new(
            3,
            vec![traj(3, &[(0, 1.0)]), traj(3, &[(1, 2.0), (2, 2.0)])],
        )
        .unwrap();
        for cfg in [
            MotMetricConfig::ospa2(2.0, 3.0, 4.0).unwrap(),
            MotMetricConfig::cola(1.0, 2.0).unwrap(),
            MotMetricConfig::tt(1.0, 2.0, 2.0).unwrap(),
        ] {
            assert_eq!(mot_distance(&x, &x, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn one_extra_element_costs_half() {
        let cfg = MotMetricConfig::ospa2(1.0, 1.0, 1.0).unwrap();
        let u = traj(2, &[(0, 0.0)]);
        let w = traj(2, &[(1, 0.0)]);
        let x = MultiObjectTrajectory::new(2, vec![u.clone()]).unwrap();
        let y = MultiObjectTrajectory::new(2, vec![u, w]).unwrap();
        assert!((mot_distance(&x, &y, &cfg).unwrap() - 0.5).abs() < 1e-12);
        assert!((mot_distance(&y, &x, &cfg).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parameter_band() {
        assert!(MotMetricConfig::ospa2(1.0, 100.0, 100.0 * core::f64::consts::SQRT_2).is_ok());
        assert!(MotMetricConfig::ospa2(2.0, 100.0, 100.0 * core::f64::consts::SQRT_2).is_ok());
        assert!(MotMetricConfig::ospa2(1.0, 100.0, 99.0).is_err());
        assert!(MotMetricConfig::ospa2(2.0, 100.0, 150.0).is_err());
        assert!(MotMetricConfig::tt(1.0, 10.0, 2.0).is_ok());
        assert!(MotMetricConfig::tt(1.0, 10.0, 3.0).is_err());
        let bad_cola = MotMetricConfig {
            r: 1.0,
            p: 1.0,
            c: 1.5,
            kappa: Kappa::Cola,
        };
        assert!(bad_cola.validated().is_err());
    }

    #[test]
    fn cardinality_bound_premise_holds() {
        // κ(j+1) - κ(j) <= κ(L)/L for j >= L, with κ(j) = κ(j, |Y|), |Y| <= L.
        for cfg in [
            MotMetricConfig::ospa2(1.0, 2.0, 2.5).unwrap(),
            MotMetricConfig::cola(2.0, 3.0).unwrap(),
            MotMetricConfig::tt(1.0, 2.0, 1.5).unwrap(),
        ] {
            for l in 1..=50usize {
                for card in 0..=l {
                    let bound = cfg.kappa(l, card) / l as f64;
                    for j in l..l + 60 {
                        assert_eq!(cfg.kappa(j, card), cfg.kappa(j, 0));
                        assert!(cfg.kappa(j + 1, card) - cfg.kappa(j, card) <= bound + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn window_mismatch_is_an_error() {
        let cfg = MotMetricConfig::ospa2(1.0, 1.0, 1.0).unwrap();
        let a = MultiObjectTrajectory::empty(2);
        let b = MultiObjectTrajectory::empty(3);
        assert!(matches!(
            mot_distance(&a, &b, &cfg),
            Err(Error::WindowMismatch { .. })
        ));
    }
}
