//! Trajectories over a finite scan window, their existence-history
//! decomposition, and the OSPA trajectory distance.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::float::{powr, root};
use crate::geometry::euclidean;
use crate::{Error, Result};

/// Cut-off `c` and order `r` of the OSPA trajectory distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaParams {
    pub c: f64,
    pub r: f64,
}

impl OspaParams {
    pub fn new(c: f64, r: f64) -> Result<Self> {
        crate::geometry::BaseDistanceConfig::new(c, r)?;
        Ok(Self { c, r })
    }

    #[inline]
    pub(crate) fn c_pow(&self) -> f64 {
        powr(self.c, self.r)
    }
}

/// A partial map from scans `0..window` to state vectors of a fixed
/// dimension. Storage is dense per scan; absent scans hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    window: usize,
    dim: usize,
    present: Vec<bool>,
    coords: Vec<f64>,
    len: usize,
}

impl Trajectory {
    /// The zero trajectory: empty domain.
    pub fn empty(window: usize, dim: usize) -> Self {
        Self {
            window,
            dim,
            present: vec![false; window],
            coords: vec![0.0; window * dim],
            len: 0,
        }
    }

    /// Builds a trajectory from parallel `domain`/`states` lists.
    pub fn from_parts(
        window: usize,
        dim: usize,
        domain: &[usize],
        states: &[Vec<f64>],
    ) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidTrajectory("window must be at least 1".into()));
        }
        if domain.len() != states.len() {
            return Err(Error::InvalidTrajectory(format!(
                "{} domain instants but {} states",
                domain.len(),
                states.len()
            )));
        }
        let mut traj = Self::empty(window, dim);
        for (&k, s) in domain.iter().zip(states) {
            if k >= window {
                return Err(Error::InvalidTrajectory(format!(
                    "scan {k} outside window of length {window}"
                )));
            }
            if traj.present[k] {
                return Err(Error::InvalidTrajectory(format!("scan {k} listed twice")));
            }
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTrajectory(format!(
                    "non-finite state at scan {k}"
                )));
            }
            traj.set(k, s);
        }
        Ok(traj)
    }

    /// Sets the state at scan `k`, adding `k` to the domain.
    pub fn set(&mut self, k: usize, state: &[f64]) {
        assert!(k < self.window && state.len() == self.dim);
        if !self.present[k] {
            self.present[k] = true;
            self.len += 1;
        }
        self.coords[k * self.dim..(k + 1) * self.dim].copy_from_slice(state);
    }

    /// Removes scan `k` from the domain.
    pub fn remove(&mut self, k: usize) {
        if self.present[k] {
            self.present[k] = false;
            self.len -= 1;
            self.coords[k * self.dim..(k + 1) * self.dim].fill(0.0);
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Domain size `|D_u|`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        self.present[k]
    }

    pub fn state(&self, k: usize) -> Option<&[f64]> {
        self.present[k].then(|| self.raw_state(k))
    }

    #[inline]
    pub(crate) fn raw_state(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub(crate) fn presence(&self) -> &[bool] {
        &self.present
    }

    /// Domain instants in ascending order.
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, p)| **p)
            .map(|(k, _)| k)
    }

    /// `(scan, state)` pairs in ascending scan order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.domain().map(move |k| (k, self.raw_state(k)))
    }

    /// The same trajectory restricted to scans `0..t`.
    pub fn truncated(&self, t: usize) -> Self {
        let mut out = self.clone();
        for k in t.min(self.window)..self.window {
            out.remove(k);
        }
        out
    }

    /// Existence history `(γ, x)`.
    pub fn decompose(&self) -> ExistenceHistory {
        ExistenceHistory {
            dim: self.dim,
            gamma: self.present.clone(),
            states: self.coords.clone(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.window != other.window {
            return Err(Error::WindowMismatch {
                expected: self.window,
                found: other.window,
            });
        }
        if self.dim != other.dim && !self.is_empty() && !other.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// The `(γ, x)` decomposition of a trajectory: a binary existence vector and
/// a dense array of `K` states. States at scans with `γ_k = 0` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceHistory {
    pub dim: usize,
    pub gamma: Vec<bool>,
    /// Row-major `K x dim` states.
    pub states: Vec<f64>,
}

impl ExistenceHistory {
    pub fn new(gamma: Vec<bool>, states: Vec<Vec<f64>>) -> Result<Self> {
        if gamma.len() != states.len() {
            return Err(Error::InvalidTrajectory(format!(
                "existence vector has length {} but {} states given",
                gamma.len(),
                states.len()
            )));
        }
        let dim = states.first().map_or(0, Vec::len);
        if let Some(bad) = states.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Self {
            dim,
            gamma,
            states: states.into_iter().flatten().collect(),
        })
    }

    pub fn window(&self) -> usize {
        self.gamma.len()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    /// Rebuilds the trajectory: domain `{k : γ_k = 1}`, states `x_k` on it.
    pub fn reconstruct(&self) -> Trajectory {
        let mut t = Trajectory::empty(self.gamma.len(), self.dim);
        for (k, _) in self.gamma.iter().enumerate().filter(|(_, g)| **g) {
            t.set(k, self.state(k));
        }
        t
    }
}

/// `d_T^(c,r)(u, v)^r`, without validation.
pub(crate) fn distance_pow(u: &Trajectory, v: &Trajectory, params: OspaParams) -> f64 {
    let (c, r) = (params.c, params.r);
    let c_pow = params.c_pow();
    let mut union = 0usize;
    let mut acc = 0.0;
    for k in 0..u.window {
        match (u.present[k], v.present[k]) {
            (true, true) => {
                union += 1;
                acc += powr(euclidean(u.raw_state(k), v.raw_state(k)).min(c), r);
            }
            (true, false) | (false, true) => {
                union += 1;
                acc += c_pow;
            }
            (false, false) => {}
        }
    }
    if union == 0 {
        0.0
    } else {
        acc / union as f64
    }
}

/// OSPA trajectory distance of order `r` with cut-off `c`. Two empty
/// trajectories are at distance 0.
pub fn ospa_trajectory_distance(u: &Trajectory, v: &Trajectory, params: OspaParams) -> Result<f64> {
    u.check_compatible(v)?;
    Ok(root(distance_pow(u, v, params), params.r))
}
