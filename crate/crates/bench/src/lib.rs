//! Shared fixtures for the benchmarks.

use otrates_core::measures::{discretize_gaussian, DiscreteMeasure, GaussianSpec};
use otrates_core::SymMatrix;

/// Discretized `N(0, diag(a))` and `N(0, diag(b))` on 6σ grids.
pub fn gaussian_pair(a: &[f64], b: &[f64], points_per_axis: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let spec = |v: &[f64]| GaussianSpec::new(SymMatrix::from_diagonal(v)).expect("positive variances");
    (
        discretize_gaussian(&spec(a), points_per_axis, 6.0).expect("valid grid"),
        discretize_gaussian(&spec(b), points_per_axis, 6.0).expect("valid grid"),
    )
}

/// A fixed non-commuting covariance pair in dimension 3.
pub fn correlated_pair() -> (SymMatrix, SymMatrix) {
    let a = SymMatrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 0.8, 0.1], vec![0.0, 0.1, 1.2]]);
    let b = SymMatrix::from_rows(&[vec![2.0, -0.4, 0.2], vec![-0.4, 1.0, 0.0], vec![0.2, 0.0, 0.5]]);
    (a.expect("square"), b.expect("square"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let (mu, nu) = gaussian_pair(&[1.0, 1.0], &[2.0, 2.0], 11);
        assert_eq!((mu.len(), nu.len()), (121, 121));
        let (a, b) = correlated_pair();
        assert!(a.min_eigenvalue() > 0.0 && b.min_eigenvalue() > 0.0);
    }
}
