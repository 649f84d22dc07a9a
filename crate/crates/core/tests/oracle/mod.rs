//! Independent brute-force reference implementations used by the tests.
//! Trajectories are plain `Vec<Option<Vec<f64>>>` so nothing here shares
//! code with the library under test.

#![allow(dead_code)]

use std::collections::HashMap;

use trajmean_core::{MultiObjectTrajectory, Trajectory};

pub type Track = Vec<Option<Vec<f64>>>;

pub fn track(t: &Trajectory) -> Track {
    (0..t.window())
        .map(|k| t.state(k).map(<[f64]>::to_vec))
        .collect()
}

pub fn tracks(x: &MultiObjectTrajectory) -> Vec<Track> {
    x.elements().iter().map(track).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `d_T^r` between two tracks.
pub fn dist_pow(u: &Track, v: &Track, c: f64, r: f64) -> f64 {
    let mut sum = 0.0;
    let mut union = 0usize;
    for (a, b) in u.iter().zip(v) {
        match (a, b) {
            (Some(a), Some(b)) => {
                sum += dist(a, b).min(c).powf(r);
                union += 1;
            }
            (None, None) => {}
            _ => {
                sum += c.powf(r);
                union += 1;
            }
        }
    }
    if union == 0 {
        0.0
    } else {
        sum / union as f64
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum over injective maps rows -> cols (or cols -> rows).
pub fn brute_assignment(cost: &[Vec<f64>]) -> f64 {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows > cols {
        let t: Vec<Vec<f64>> = (0..cols)
            .map(|j| (0..rows).map(|i| cost[i][j]).collect())
            .collect();
        return brute_assignment(&t);
    }
    permutations(cols)
        .iter()
        .map(|p| (0..rows).map(|i| cost[i][p[i]]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug)]
pub enum Norm {
    Max,
    Const(f64),
}

impl Norm {
    pub fn at(&self, s: usize, m: usize) -> f64 {
        match self {
            Norm::Max => s.max(m) as f64,
            Norm::Const(v) => *v,
        }
    }
}

pub fn mot_distance(x: &[Track], y: &[Track], p: f64, c: f64, r: f64, norm: Norm) -> f64 {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    if large.is_empty() {
        return 0.0;
    }
    let m: Vec<Vec<f64>> = small
        .iter()
        .map(|a| large.iter().map(|b| dist_pow(a, b, c, r)).collect())
        .collect();
    let total = brute_assignment(&m) + (large.len() - small.len()) as f64 * p.powf(r);
    (total / norm.at(large.len(), small.len())).powf(1.0 / r)
}

/// `min_x Σ w_i min(|x - y_i|, c)^r` for 1-D points and r in {1, 2}.
pub fn scan_min(points: &[(f64, f64)], c: f64, r: f64) -> f64 {
    let eval = |x: f64| -> f64 {
        points
            .iter()
            .map(|(y, w)| w * (x - y).abs().min(c).powf(r))
            .sum()
    };
    let mut best = points.iter().map(|(_, w)| w * c.powf(r)).sum::<f64>();
    if r == 1.0 {
        for (y, _) in points {
            best = best.min(eval(*y));
        }
    } else if r == 2.0 {
        for mask in 1u32..(1 << points.len()) {
            let (mut sw, mut swy) = (0.0, 0.0);
            for (i, (y, w)) in points.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    sw += w;
                    swy += w * y;
                }
            }
            best = best.min(eval(swy / sw));
        }
    } else {
        panic!("oracle supports r = 1 and r = 2 only");
    }
    best
}

/// `W(γ)` with optimal 1-D states per scan.
pub fn w_cost(gamma: &[bool], samples: &[&Track], weights: &[f64], c: f64, r: f64) -> f64 {
    let cr = c.powf(r);
    let denom: Vec<usize> = samples
        .iter()
        .map(|s| {
            gamma
                .iter()
                .zip(s.iter())
                .filter(|(g, x)| **g || x.is_some())
                .count()
        })
        .collect();
    let scale: Vec<f64> = weights
        .iter()
        .zip(&denom)
        .map(|(w, d)| if *d == 0 { 0.0 } else { w / *d as f64 })
        .collect();
    let mut total = 0.0;
    for k in 0..gamma.len() {
        let mut pts = Vec::new();
        for (n, s) in samples.iter().enumerate() {
            match (&s[k], gamma[k]) {
                (Some(y), true) => pts.push((y[0], scale[n])),
                (Some(_), false) | (None, true) => total += scale[n] * cr,
                (None, false) => {}
            }
        }
        if !pts.is_empty() {
            total += scan_min(&pts, c, r);
        }
    }
    total
}

/// Exhaustive minimum of `W` over all existence vectors.
pub fn traj_mean_cost(samples: &[&Track], weights: &[f64], c: f64, r: f64) -> f64 {
    let k = samples[0].len();
    (0u32..(1 << k))
        .map(|mask| {
            let gamma: Vec<bool> = (0..k).map(|i| mask & (1 << i) != 0).collect();
            w_cost(&gamma, samples, weights, c, r)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn feasible(eta: &[bool], row: &[usize], size: usize) -> bool {
    let active = eta.iter().filter(|e| **e).count();
    (0..eta.len()).all(|l| {
        if active <= size {
            !eta[l] || row[l] < size
        } else {
            eta[l] || row[l] >= size
        }
    })
}

pub struct MotOracle<'a> {
    pub samples: &'a [Vec<Track>],
    pub p: f64,
    pub c: f64,
    pub r: f64,
    pub norm: Norm,
    memo: HashMap<Vec<(usize, usize, u64)>, f64>,
}

impl<'a> MotOracle<'a> {
    pub fn new(samples: &'a [Vec<Track>], p: f64, c: f64, r: f64, norm: Norm) -> Self {
        Self {
            samples,
            p,
            c,
            r,
            norm,
            memo: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    /// `S(η, ω)` with exhaustive slot means.
    pub fn s(&mut self, eta: &[bool], omega: &[Vec<usize>]) -> f64 {
        let norm = eta.iter().filter(|e| **e).count();
        let pr = self.p.powf(self.r);
        let mut total = 0.0;
        for l in 0..eta.len() {
            let mut members = Vec::new();
            for (n, s) in self.samples.iter().enumerate() {
                let kappa = self.norm.at(norm, s.len());
                let w = if kappa > 0.0 { 1.0 / kappa } else { 0.0 };
                let exists = omega[n][l] < s.len();
                if exists && eta[l] {
                    members.push((n, omega[n][l], w.to_bits()));
                } else if exists || eta[l] {
                    total += pr * w;
                }
            }
            if !members.is_empty() {
                total += self.slot(&members);
            }
        }
        total
    }

    fn slot(&mut self, members: &[(usize, usize, u64)]) -> f64 {
        if let Some(v) = self.memo.get(members) {
            return *v;
        }
        let refs: Vec<&Track> = members
            .iter()
            .map(|&(n, j, _)| &self.samples[n][j])
            .collect();
        let ws: Vec<f64> = members.iter().map(|m| f64::from_bits(m.2)).collect();
        let v = traj_mean_cost(&refs, &ws, self.c, self.r);
        self.memo.insert(members.to_vec(), v);
        v
    }

    /// Minimum of `S` over every feasible `(η, ω)`.
    pub fn optimum(&mut self) -> f64 {
        let len = self.len();
        if len == 0 {
            return 0.0;
        }
        let perms = permutations(len);
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << len) {
            let eta: Vec<bool> = (0..len).map(|i| mask & (1 << i) != 0).collect();
            let rows: Vec<Vec<&Vec<usize>>> = self
                .samples
                .iter()
                .map(|s| {
                    perms
                        .iter()
                        .filter(|p| feasible(&eta, p, s.len()))
                        .collect()
                })
                .collect();
            let mut idx = vec![0usize; rows.len()];
            loop {
                let omega: Vec<Vec<usize>> =
                    idx.iter().zip(&rows).map(|(i, r)| r[*i].clone()).collect();
                best = best.min(self.s(&eta, &omega));
                let mut d = 0;
                while d < idx.len() {
                    idx[d] += 1;
                    if idx[d] < rows[d].len() {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == idx.len() {
                    break;
                }
            }
        }
        best
    }
}

/// Matches within a relative tolerance.
pub fn same(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
