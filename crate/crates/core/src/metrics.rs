//! Gap functionals between two fields: sup norm over a ball, `L²(μ)`
//! norm, and the global Lipschitz bounds of the Brenier and entropic maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{AssumptionParams, DiscreteMeasure};

/// Default ball-grid resolution per axis.
pub fn default_ball_points(dim: usize) -> usize {
    if dim <= 1 {
        101
    } else {
        41
    }
}

/// Closed ball `{|x| ≤ radius}` resolved by a box grid with a ball mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactBallSpec {
    pub radius: f64,
    pub grid_points_per_axis: usize,
}

impl CompactBallSpec {
    pub fn new(radius: f64, grid_points_per_axis: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if grid_points_per_axis == 0 {
            return Err(Error::InvalidArgument("grid_points_per_axis must be positive".into()));
        }
        Ok(Self {
            radius,
            grid_points_per_axis,
        })
    }

    /// Box grid spacing; zero for a single-node grid.
    pub fn spacing(&self) -> f64 {
        let n = self.grid_points_per_axis;
        if n < 2 {
            0.0
        } else {
            2.0 * self.radius / (n - 1) as f64
        }
    }

    /// Box-grid nodes on `[-R, R]^dim` that fall inside the ball.
    pub fn points(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.grid_points_per_axis;
        let r = self.radius;
        let axis: Vec<f64> = if n == 1 {
            vec![0.0]
        } else {
            (0..n)
                .map(|k| r * (2 * k) as f64 / (n - 1) as f64 - r)
                .map(|v| if v.abs() < 1e-15 * r { 0.0 } else { v })
                .collect()
        };
        let total = (n as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        if total > crate::measures::MAX_GRID_NODES {
            return Err(Error::GridTooLarge {
                nodes: total,
                limit: crate::measures::MAX_GRID_NODES,
            });
        }
        let limit = r * r * (1.0 + 1e-12);
        let mut out = Vec::new();
        let mut idx = vec![0usize; dim];
        'outer: loop {
            let p: Vec<f64> = idx.iter().map(|&k| axis[k]).collect();
            if p.iter().map(|v| v * v).sum::<f64>() <= limit {
                out.push(p);
            }
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        if out.is_empty() || dim == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(out)
    }
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Largest `|a(x) - b(x)|` over the masked ball grid.
pub fn sup_gap_on_grid<A, B>(field_a: A, field_b: B, dim: usize, k: &CompactBallSpec) -> Result<f64>
where
    A: Fn(&[f64]) -> Vec<f64> + Sync,
    B: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let pts = k.points(dim)?;
    Ok(pts
        .par_iter()
        .map(|x| diff_norm(&field_a(x), &field_b(x)))
        .reduce(|| 0.0, f64::max))
}

/// Scalar version of [`sup_gap_on_grid`].
pub fn sup_scalar_gap_on_grid<A, B>(field_a: A, field_b: B, dim: usize, k: &CompactBallSpec) -> Result<f64>
where
    A: Fn(&[f64]) -> f64 + Sync,
    B: Fn(&[f64]) -> f64 + Sync,
{
    let pts = k.points(dim)?;
    Ok(pts
        .par_iter()
        .map(|x| (field_a(x) - field_b(x)).abs())
        .reduce(|| 0.0, f64::max))
}

/// Interval that contains the true sup of a gap field with Lipschitz
/// constant `lipschitz` on the ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBracket {
    pub lower: f64,
    pub upper: f64,
}

/// Every point of the ball lies within `h·√d` of a masked node, so the
/// grid max plus `L·h·√d` bounds the sup from above.
pub fn certified_sup_gap<A, B>(
    field_a: A,
    field_b: B,
    dim: usize,
    k: &CompactBallSpec,
    lipschitz: f64,
) -> Result<SupBracket>
where
    A: Fn(&[f64]) -> Vec<f64> + Sync,
    B: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let lower = sup_gap_on_grid(field_a, field_b, dim, k)?;
    Ok(SupBracket {
        lower,
        upper: lower + lipschitz * k.spacing() * (dim as f64).sqrt(),
    })
}

/// `√(Σ wᵢ |a(xᵢ) - b(xᵢ)|²)`.
pub fn l2_mu_gap<A, B>(field_a: A, field_b: B, mu: &DiscreteMeasure) -> f64
where
    A: Fn(&[f64]) -> Vec<f64> + Sync,
    B: Fn(&[f64]) -> Vec<f64> + Sync,
{
    (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let x = mu.point(i);
            let d = diff_norm(&field_a(x), &field_b(x));
            mu.weights()[i] * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Scalar version of [`l2_mu_gap`].
pub fn l2_mu_scalar_gap<A, B>(field_a: A, field_b: B, mu: &DiscreteMeasure) -> f64
where
    A: Fn(&[f64]) -> f64 + Sync,
    B: Fn(&[f64]) -> f64 + Sync,
{
    (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let x = mu.point(i);
            let d = field_a(x) - field_b(x);
            mu.weights()[i] * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Global Lipschitz bound `√(α/β)` of the Brenier map.
pub fn caffarelli_bound(params: &AssumptionParams) -> f64 {
    (params.alpha / params.beta).sqrt()
}

/// Global Lipschitz bound `½(√(4α/β + ε²α²) - εα)` of the entropic map.
pub fn chewi_pooladian_bound(params: &AssumptionParams, eps: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let ea = eps * a;
    // Rationalized form; the naive difference cancels badly for large ε.
    let disc = (4.0 * a / b + ea * ea).sqrt();
    2.0 * (a / b) / (disc + ea)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_ot::{brenier_map_matrix, entropic_map_matrix, sup_gap_on_ball};
    use crate::linalg::SymMatrix;
    use crate::measures::{assumption_params, discretize_gaussian, GaussianSpec};
    use proptest::prelude::*;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn params(alpha: f64, beta: f64) -> AssumptionParams {
        AssumptionParams {
            alpha,
            beta,
            poincare_constant: 1.0,
            differential_entropy: 0.0,
        }
    }

    #[test]
    fn ball_grid_masks_corners() {
        let k = CompactBallSpec::new(1.0, 3).unwrap();
        let pts = k.points(2).unwrap();
        // The 3x3 box minus its four corners.
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(|p| norm(p) <= 1.0 + 1e-12));
        assert_eq!(k.points(1).unwrap(), vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert_eq!(
            CompactBallSpec::new(2.0, 1).unwrap().points(3).unwrap(),
            vec![vec![0.0; 3]]
        );
        assert!(CompactBallSpec::new(0.0, 3).is_err());
        assert!(CompactBallSpec::new(1.0, 0).is_err());
        assert!(matches!(k.points(0), Err(Error::EmptyGrid)));
    }

    #[test]
    fn trivial_gaps() {
        let k = CompactBallSpec::new(1.5, 21).unwrap();
        let id = |x: &[f64]| x.to_vec();
        assert_eq!(sup_gap_on_grid(id, id, 2, &k).unwrap(), 0.0);
        let shifted = |x: &[f64]| vec![x[0] + 3.0, x[1] - 4.0];
        assert!((sup_gap_on_grid(id, shifted, 2, &k).unwrap() - 5.0).abs() < 1e-12);

        let mu = DiscreteMeasure::dirac(vec![0.5, 2.0]).unwrap();
        let sq = |x: &[f64]| vec![x[0] * x[0], x[1]];
        let expect = diff_norm(&sq(&[0.5, 2.0]), &[0.5, 2.0]);
        assert!((l2_mu_gap(id, sq, &mu) - expect).abs() < 1e-15);
        assert_eq!(l2_mu_gap(id, id, &mu), 0.0);
    }

    #[test]
    fn isotropic_gap_on_ball_grid() {
        let i1 = SymMatrix::identity(1);
        let t0 = brenier_map_matrix(&i1, &i1).unwrap();
        let te = entropic_map_matrix(&i1, &i1, 1.0).unwrap();
        let k = CompactBallSpec::new(1.0, 101).unwrap();
        let gap = sup_gap_on_grid(|x| te.apply(x), |x| t0.apply(x), 1, &k).unwrap();
        let analytic = sup_gap_on_ball(&i1, &i1, 1.0, 1.0).unwrap();
        assert!((gap - analytic).abs() < 1e-9);
        assert!((gap - 0.38197).abs() < 1e-5);
    }

    #[test]
    fn linear_gap_second_moment() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.6]]).unwrap();
        let b = SymMatrix::from_rows(&[vec![2.0, -0.2], vec![-0.2, 1.0]]).unwrap();
        let t0 = brenier_map_matrix(&a, &b).unwrap();
        let te = entropic_map_matrix(&a, &b, 0.3).unwrap();
        let delta = &te.matrix - &t0.matrix;
        let d = delta.as_matrix();
        let expect = (d * a.as_matrix() * d.transpose()).trace();
        let mu = discretize_gaussian(&GaussianSpec::new(a.clone()).unwrap(), 61, 7.0).unwrap();
        let got = l2_mu_gap(|x| te.apply(x), |x| t0.apply(x), &mu);
        assert!((got * got - expect).abs() < 1e-4, "{} vs {}", got * got, expect);
    }

    #[test]
    fn bracket_contains_analytic_sup() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.4], vec![0.4, 2.0]]).unwrap();
        let b = SymMatrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 1.5]]).unwrap();
        let eps = 0.4;
        let t0 = brenier_map_matrix(&a, &b).unwrap();
        let te = entropic_map_matrix(&a, &b, eps).unwrap();
        let p = assumption_params(
            &GaussianSpec::new(a.clone()).unwrap(),
            &GaussianSpec::new(b.clone()).unwrap(),
        );
        let l = caffarelli_bound(&p) + chewi_pooladian_bound(&p, eps);
        let k = CompactBallSpec::new(2.0, 41).unwrap();
        let br = certified_sup_gap(|x| te.apply(x), |x| t0.apply(x), 2, &k, l).unwrap();
        let truth = sup_gap_on_ball(&a, &b, eps, 2.0).unwrap();
        assert!(br.lower <= truth + 1e-12 && truth <= br.upper, "{br:?} vs {truth}");
    }

    #[test]
    fn lipschitz_bound_examples() {
        assert_eq!(caffarelli_bound(&params(2.0, 2.0)), 1.0);
        assert!((caffarelli_bound(&params(1.0, 0.25)) - 2.0).abs() < 1e-15);
        assert!((caffarelli_bound(&params(0.25, 1.0)) - 0.5).abs() < 1e-15);
        assert!((chewi_pooladian_bound(&params(1.0, 1.0), 0.0) - 1.0).abs() < 1e-15);
        let v = chewi_pooladian_bound(&params(1.0, 1.0), 2.0);
        assert!((v - 0.5 * (8f64.sqrt() - 2.0)).abs() < 1e-15);
        assert!((v - 0.41421).abs() < 1e-5);
        let i2 = SymMatrix::identity(2);
        let coef = entropic_map_matrix(&i2, &i2, 2.0).unwrap().matrix.get(0, 0);
        assert!((coef - v).abs() < 1e-12);
        let far = chewi_pooladian_bound(&params(1.0, 1.0), 1e8);
        assert!(far > 0.0 && far < 1e-7);
    }

    #[test]
    fn isotropic_sharpness() {
        for &s2 in &[0.3, 1.0, 4.0] {
            let g = GaussianSpec::isotropic(3, s2).unwrap();
            let p = assumption_params(&g, &g);
            for &eps in &[0.0, 0.01, 0.5, 3.0] {
                let m = entropic_map_matrix(g.covariance(), g.covariance(), eps).unwrap();
                assert!((m.matrix.get(1, 1) - chewi_pooladian_bound(&p, eps)).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn entropic_bound_below_brenier_bound(alpha in 1e-3..1e3f64, beta in 1e-3..1e3f64, eps in 0.0..1e3f64) {
            let p = params(alpha, beta);
            let cp = chewi_pooladian_bound(&p, eps);
            prop_assert!(cp > 0.0);
            prop_assert!(cp <= caffarelli_bound(&p) * (1.0 + 1e-14));
            prop_assert!(chewi_pooladian_bound(&p, eps * 1.5 + 1e-3) <= cp * (1.0 + 1e-14));
        }

        #[test]
        fn refinement_never_lowers_sup(n in 2usize..12, r in 0.5..3.0f64, c0 in -1.0..1.0f64, c1 in -1.0..1.0f64) {
            // An odd n-point axis is contained in the (2n-1)-point axis.
            let field = |x: &[f64]| vec![(c0 * x[0]).sin() + c1 * x[1] * x[0], x[1].cos()];
            let zero = |_: &[f64]| vec![0.0, 0.0];
            let coarse = CompactBallSpec::new(r, 2 * n + 1).unwrap();
            let fine = CompactBallSpec::new(r, 4 * n + 1).unwrap();
            let a = sup_gap_on_grid(field, zero, 2, &coarse).unwrap();
            let b = sup_gap_on_grid(field, zero, 2, &fine).unwrap();
            prop_assert!(b >= a - 1e-15);
        }
    }
}
