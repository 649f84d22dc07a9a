//! Rectangular min-cost linear assignment by shortest augmenting paths with
//! dual potentials (Jonker–Volgenant style, no padding).

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Dense row-major `rows x cols` matrix of non-negative costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCost {
                row: i / cols.max(1),
                col: i % cols.max(1),
            });
        }
        if let Some(v) = data.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "assignment costs must be non-negative, got {v}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged cost matrix".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

/// Optimal matching of `min(rows, cols)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total: f64,
}

/// Minimises the summed cost over all matchings of size `min(rows, cols)`.
pub fn solve_assignment(costs: &CostMatrix) -> Assignment {
    let (n, m) = (costs.rows, costs.cols);
    if n == 0 || m == 0 {
        return Assignment {
            pairs: Vec::new(),
            total: 0.0,
        };
    }
    let mut pairs: Vec<(usize, usize)> = if n <= m {
        shortest_augmenting(n, m, |i, j| costs.get(i, j))
    } else {
        shortest_augmenting(m, n, |i, j| costs.get(j, i))
            .into_iter()
            .map(|(j, i)| (i, j))
            .collect()
    };
    pairs.sort_unstable();
    let total = pairs.iter().map(|&(i, j)| costs.get(i, j)).sum();
    Assignment { pairs, total }
}

/// Requires `n <= m`. Returns `(row, col)` for every row.
fn shortest_augmenting(
    n: usize,
    m: usize,
    cost: impl Fn(usize, usize) -> f64,
) -> Vec<(usize, usize)> {
    // 1-based with column 0 as the virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| (owner[j] - 1, j - 1))
        .collect()
}
