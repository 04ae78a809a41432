use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::objective::{Objective, DEFAULT_INNER_TOL};
use crate::support::{DenseVector, SupportSet};

use super::constants::guard;

/// Best `k`-sparse solution by enumerating all supports of size `k`.
///
/// Restricted minima are monotone under inclusion, so size exactly `k` covers `≤ k`.
/// Ties go to the lexicographically first support.
pub fn brute_force_best_sparse<F: Objective + ?Sized>(f: &F, k: usize) -> Result<(DenseVector, f64)> {
    let n = f.dim();
    if k > n {
        return Err(invalid(format!("sparsity {k} exceeds dimension {n}")));
    }
    guard(n, k)?;
    let supports: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let best = supports
        .par_iter()
        .enumerate()
        .map(|(rank, idx)| {
            let sol = f.restricted_minimize(&SupportSet::from_indices(idx.iter().copied()), DEFAULT_INNER_TOL);
            (rank, sol.value, sol.x)
        })
        .reduce_with(|a, b| {
            if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("at least one support");
    Ok((best.2, best.1))
}
