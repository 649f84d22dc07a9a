//! Repeated insertion: a bijection between insertion vectors `j` with
//! `j[l] <= l` and permutations, for a fixed reference permutation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

fn check_permutation(p: &[usize], what: &str) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return Err(Error::NotAPermutation(format!("{what} {p:?}")));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Builds `π` by inserting `theta[l]` at position `j[l]`, shifting later
/// entries right. Positions are 0-based, so `j[l] <= l`.
pub fn repeated_insertion(theta: &[usize], j: &[usize]) -> Result<Vec<usize>> {
    check_permutation(theta, "reference")?;
    if theta.len() != j.len() {
        return Err(Error::InvalidParameter(format!(
            "insertion vector of length {} for a reference of length {}",
            j.len(),
            theta.len()
        )));
    }
    if let Some((index, &value)) = j.iter().enumerate().find(|(l, v)| **v > *l) {
        return Err(Error::InvalidInsertionVector { index, value });
    }
    Ok(insert_unchecked(theta, j))
}

pub(crate) fn insert_unchecked(theta: &[usize], j: &[usize]) -> Vec<usize> {
    let mut pi = Vec::with_capacity(theta.len());
    for (&t, &pos) in theta.iter().zip(j) {
        pi.insert(pos, t);
    }
    pi
}

/// The unique `j` with `repeated_insertion(theta, j) == pi`.
pub fn inverse_insertion(theta: &[usize], pi: &[usize]) -> Result<Vec<usize>> {
    check_permutation(theta, "reference")?;
    check_permutation(pi, "permutation")?;
    if theta.len() != pi.len() {
        return Err(Error::InvalidParameter(
            "permutations differ in length".into(),
        ));
    }
    Ok(invert_unchecked(theta, pi))
}

pub(crate) fn invert_unchecked(theta: &[usize], pi: &[usize]) -> Vec<usize> {
    let mut pos = vec![0usize; pi.len()];
    for (i, &v) in pi.iter().enumerate() {
        pos[v] = i;
    }
    (0..theta.len())
        .map(|l| (0..l).filter(|&m| pos[theta[m]] < pos[theta[l]]).count())
        .collect()
}
