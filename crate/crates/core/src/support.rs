//! Index sets, hard thresholding and support extraction.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Dense solution vector. Gradients, targets and iterates all use this.
pub type DenseVector = DVector<f64>;

/// Default magnitude below which an entry counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// A sorted set of distinct coordinate indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn new() -> Self {
        SupportSet(Vec::new())
    }

    /// Builds a set from arbitrary indices, sorting and removing duplicates.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SupportSet(v)
    }

    /// `{0, 1, ..., k-1}`.
    pub fn leading(k: usize) -> Self {
        SupportSet((0..k).collect())
    }

    /// Every index of `[n]`.
    pub fn full(n: usize) -> Self {
        Self::leading(n)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Returns `true` if `i` was not already present.
    pub fn insert(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, i);
                true
            }
        }
    }

    /// Returns `true` if `i` was present.
    pub fn remove(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// `self ∪ {insert} \ {remove}`.
    pub fn swapped(&self, insert: usize, remove: usize) -> Self {
        let mut out = self.clone();
        out.remove(remove);
        out.insert(insert);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        SupportSet::from_indices(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Checks every index is below `n`.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= n => Err(invalid(format!(
                "support index {max} out of range for dimension {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        SupportSet::from_indices(iter)
    }
}

/// `H_r(x)`: keeps the `r` largest-magnitude entries, zeroing the rest.
/// Ties go to the lowest index.
pub fn hard_threshold(x: &DenseVector, r: usize) -> Result<DenseVector> {
    let n = x.len();
    if r > n {
        return Err(invalid(format!(
            "hard threshold level {r} exceeds dimension {n}"
        )));
    }
    let keep = top_magnitudes(x.as_slice(), r);
    let mut out = DenseVector::zeros(n);
    for i in keep.iter() {
        out[i] = x[i];
    }
    Ok(out)
}

/// Indices of the `r` largest `|values|`, lowest index first among ties.
pub fn top_magnitudes(values: &[f64], r: usize) -> SupportSet {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps index order among equal magnitudes
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    SupportSet::from_indices(order.into_iter().take(r))
}

/// `{i : |x_i| > zero_tol}`.
pub fn support_of(x: &DenseVector, zero_tol: f64) -> SupportSet {
    SupportSet(
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > zero_tol)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Index maximizing `score` over `candidates`; the first (lowest) index wins ties.
pub(crate) fn argmax_by<I, F>(candidates: I, mut score: F) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for i in candidates {
        let v = score(i);
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index minimizing `score`; lowest index wins ties.
pub(crate) fn argmin_by<I, F>(candidates: I, mut score: F) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> f64,
{
    argmax_by(candidates, |i| -score(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DenseVector {
        DenseVector::from_column_slice(xs)
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(hard_threshold(&v(&[3.0, -1.0, 0.0]), 2).unwrap(), v(&[3.0, -1.0, 0.0]));
        assert_eq!(hard_threshold(&v(&[3.0, -1.0, 2.0]), 1).unwrap(), v(&[3.0, 0.0, 0.0]));
        assert_eq!(hard_threshold(&v(&[3.0, -1.0, 2.0]), 0).unwrap(), v(&[0.0, 0.0, 0.0]));
        assert!(hard_threshold(&v(&[1.0]), 2).is_err());
    }

    #[test]
    fn threshold_ties_prefer_low_index() {
        let x = v(&[1.0, -2.0, 2.0, 2.0]);
        assert_eq!(hard_threshold(&x, 2).unwrap(), v(&[0.0, -2.0, 2.0, 0.0]));
    }

    #[test]
    fn support_examples() {
        assert_eq!(support_of(&v(&[0.0, 2.0, 0.0, -1.0]), 0.0).as_slice(), &[1, 3]);
        assert!(support_of(&v(&[0.0, 0.0]), 0.0).is_empty());
        assert_eq!(support_of(&v(&[1e-14, 1.0]), 1e-12).as_slice(), &[1]);
    }

    #[test]
    fn set_operations() {
        let mut s = SupportSet::from_indices([4, 1, 4, 2]);
        assert_eq!(s.as_slice(), &[1, 2, 4]);
        assert!(s.insert(3));
        assert!(!s.insert(3));
        assert!(s.remove(1));
        assert_eq!(s.swapped(0, 4).as_slice(), &[0, 2, 3]);
        assert!(s.check_bounds(5).is_ok());
        assert!(s.check_bounds(4).is_err());
        let t = SupportSet::from_indices([2, 7]);
        assert_eq!(s.union(&t).as_slice(), &[2, 3, 4, 7]);
        assert_eq!(s.intersection(&t).as_slice(), &[2]);
        assert_eq!(s.difference(&t).as_slice(), &[3, 4]);
        assert_eq!(s.to_string(), "{2, 3, 4}");
    }

    #[test]
    fn arg_selection_ties() {
        let vals = [1.0, 3.0, 3.0, 0.5];
        assert_eq!(argmax_by(0..4, |i| vals[i]), Some(1));
        assert_eq!(argmin_by([3, 0, 2], |i| vals[i]), Some(3));
        assert_eq!(argmax_by(std::iter::empty(), |i| vals[i]), None);
    }

    proptest! {
        #[test]
        fn threshold_properties(xs in prop::collection::vec(-10.0f64..10.0, 1..20), r in 0usize..20) {
            let x = v(&xs);
            let r = r.min(xs.len());
            let h = hard_threshold(&x, r).unwrap();
            prop_assert_eq!(hard_threshold(&h, r).unwrap(), h.clone());
            prop_assert!(h.norm() <= x.norm());
            prop_assert!(support_of(&h, 0.0).len() <= r);
            for i in 0..xs.len() {
                prop_assert!(h[i] == 0.0 || h[i] == x[i]);
            }
        }
    }
}
