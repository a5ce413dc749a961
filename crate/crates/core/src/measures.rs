//! Measure specifications, grid discretization and the curvature/Poincaré/
//! entropy constants of Gaussian pairs.

use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, SymMatrix};

/// Largest tensor grid `discretize_gaussian` will build.
pub const MAX_GRID_NODES: u128 = 10_000_000;

pub const DEFAULT_TRUNC_SIGMAS: f64 = 6.0;

/// Default grid resolution per axis for a given dimension.
pub fn default_points_per_axis(dim: usize) -> usize {
    match dim {
        1 => 401,
        2 => 61,
        _ => 21,
    }
}

/// Zero-mean Gaussian `N(0, covariance)` with strictly positive definite
/// covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussian", into = "RawGaussian")]
pub struct GaussianSpec {
    covariance: SymMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawGaussian {
    dim: usize,
    covariance: SymMatrix,
}

impl TryFrom<RawGaussian> for GaussianSpec {
    type Error = Error;

    fn try_from(raw: RawGaussian) -> Result<Self> {
        if raw.dim != raw.covariance.dim() {
            return Err(Error::InvalidMeasure(format!(
                "dim is {} but covariance is {}x{}",
                raw.dim,
                raw.covariance.dim(),
                raw.covariance.dim()
            )));
        }
        GaussianSpec::new(raw.covariance)
    }
}

impl From<GaussianSpec> for RawGaussian {
    fn from(g: GaussianSpec) -> Self {
        RawGaussian {
            dim: g.dim(),
            covariance: g.covariance,
        }
    }
}

impl GaussianSpec {
    pub fn new(covariance: SymMatrix) -> Result<Self> {
        let min = covariance.min_eigenvalue();
        if !(min > 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "covariance must be positive definite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { covariance })
    }

    pub fn standard(dim: usize) -> Self {
        Self {
            covariance: SymMatrix::identity(dim),
        }
    }

    pub fn isotropic(dim: usize, variance: f64) -> Result<Self> {
        Self::new(SymMatrix::scaled_identity(dim, variance))
    }

    pub fn dim(&self) -> usize {
        self.covariance.dim()
    }

    pub fn covariance(&self) -> &SymMatrix {
        &self.covariance
    }

    /// Principal axes as matrix columns together with the variance along
    /// each. Diagonal covariances keep the canonical basis.
    pub fn principal_axes(&self) -> (DMatrix<f64>, Vec<f64>) {
        let d = self.dim();
        if self.covariance.is_diagonal() {
            let vars = (0..d).map(|i| self.covariance.get(i, i)).collect();
            (DMatrix::identity(d, d), vars)
        } else {
            let s = self.covariance.spectrum();
            (s.vectors, s.values)
        }
    }

    /// Shannon differential entropy `½ log((2πe)^d det A)` in nats.
    pub fn differential_entropy(&self) -> f64 {
        0.5 * ((2.0 * PI * E).ln() * self.dim() as f64 + self.covariance.determinant().ln())
    }
}

/// Tagged measure description as it appears in experiment configs:
/// `{"type":"gaussian","dim":d,"covariance":[[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureSpec {
    Gaussian(GaussianSpec),
}

impl MeasureSpec {
    pub fn dim(&self) -> usize {
        match self {
            MeasureSpec::Gaussian(g) => g.dim(),
        }
    }

    pub fn as_gaussian(&self) -> &GaussianSpec {
        match self {
            MeasureSpec::Gaussian(g) => g,
        }
    }
}

/// Curvature, Poincaré and entropy constants of a source/target pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    /// Upper bound on the Hessian of the source log-density.
    pub alpha: f64,
    /// Lower bound on the Hessian of the target log-density.
    pub beta: f64,
    pub poincare_constant: f64,
    /// Shannon differential entropy of the source, in nats.
    pub differential_entropy: f64,
}

/// Exact constants for `N(0, A) → N(0, B)`: `α = ‖A⁻¹‖`, `β = 1/‖B‖`,
/// `C_P = ‖A‖`.
pub fn assumption_params(source: &GaussianSpec, target: &GaussianSpec) -> AssumptionParams {
    let a = source.covariance();
    let b = target.covariance();
    // PD is a GaussianSpec invariant, so both reciprocals are finite.
    let alpha = 1.0 / a.min_eigenvalue();
    AssumptionParams {
        alpha,
        beta: 1.0 / op_norm(b),
        poincare_constant: op_norm(a),
        differential_entropy: source.differential_entropy(),
    }
}

/// Axis-aligned (in some orthonormal frame) tensor-product grid.
///
/// Node `k` of a measure carrying this layout sits at
/// `frame · (axes[0][k_0], …, axes[d-1][k_{d-1}])`, with `k` the row-major
/// flattening of the multi-index (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub frame: DMatrix<f64>,
    pub axes: Vec<Vec<f64>>,
}

impl TensorGrid {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product of axis spacings, when every axis is uniform with ≥ 2 nodes.
    pub fn cell_volume(&self) -> Option<f64> {
        let mut vol = 1.0;
        for axis in &self.axes {
            if axis.len() < 2 {
                return None;
            }
            let h = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
            let uniform = axis.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
            if !uniform || !(h > 0.0) {
                return None;
            }
            vol *= h;
        }
        Some(vol)
    }

    fn points(&self) -> Vec<f64> {
        let d = self.dim();
        let shape = self.shape();
        let n = self.len();
        let mut out = Vec::with_capacity(n * d);
        let mut idx = vec![0usize; d];
        let mut local = vec![0.0; d];
        for _ in 0..n {
            for k in 0..d {
                local[k] = self.axes[k][idx[k]];
            }
            for r in 0..d {
                out.push((0..d).map(|c| self.frame[(r, c)] * local[c]).sum());
            }
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

/// Weighted point cloud. Weights are normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    grid: Option<TensorGrid>,
}

impl DiscreteMeasure {
    /// Builds a measure from explicit points. Weights must be finite and
    /// nonnegative with positive total; they are rescaled to sum to one.
    /// Points must be pairwise distinct.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidMeasure("empty support".into()))?;
        if dim == 0 {
            return Err(Error::InvalidMeasure("points must have dimension ≥ 1".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                left: points.len(),
                right: weights.len(),
            });
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidMeasure("points have inconsistent dimensions".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("points"));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if order.windows(2).any(|w| points[w[0]] == points[w[1]]) {
            return Err(Error::InvalidMeasure("support points must be distinct".into()));
        }
        let weights = normalized(weights)?;
        Ok(Self {
            dim,
            points: points.into_iter().flatten().collect(),
            weights,
            grid: None,
        })
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(vec![point], vec![1.0])
    }

    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    /// Measure on the nodes of `grid` with the given (unnormalized) weights.
    pub fn on_grid(grid: TensorGrid, weights: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.dim() == 0 {
            return Err(Error::InvalidMeasure("empty grid".into()));
        }
        if grid.frame.nrows() != grid.dim() || grid.frame.ncols() != grid.dim() {
            return Err(Error::InvalidMeasure("grid frame must be dim x dim".into()));
        }
        if weights.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                left: grid.len(),
                right: weights.len(),
            });
        }
        let weights = normalized(weights)?;
        Ok(Self {
            dim: grid.dim(),
            points: grid.points(),
            weights,
            grid: Some(grid),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + Clone + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// Flat row-major coordinate buffer, `len() * dim()` long.
    pub fn coordinates(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid(&self) -> Option<&TensorGrid> {
        self.grid.as_ref()
    }

    pub fn cell_volume(&self) -> Option<f64> {
        self.grid.as_ref().and_then(TensorGrid::cell_volume)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.points().zip(&self.weights) {
            for (mk, pk) in m.iter_mut().zip(p) {
                *mk += w * pk;
            }
        }
        m
    }

    /// Second-moment matrix `Σ wᵢ xᵢ xᵢᵀ` (the covariance for centred data).
    pub fn second_moment(&self) -> SymMatrix {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for (p, w) in self.points().zip(&self.weights) {
            for r in 0..d {
                for c in 0..d {
                    m[(r, c)] += w * p[r] * p[c];
                }
            }
        }
        SymMatrix::new(m).expect("finite square matrix")
    }

    /// Empirical covariance about the weighted mean.
    pub fn covariance(&self) -> SymMatrix {
        let mean = self.mean();
        let d = self.dim;
        let mut m = self.second_moment().into_matrix();
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] -= mean[r] * mean[c];
            }
        }
        SymMatrix::new(m).expect("finite square matrix")
    }
}

fn normalized(weights: Vec<f64>) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidMeasure("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidMeasure("weights must have positive total mass".into()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Tensor grid quadrature of a Gaussian in its principal axes.
///
/// Each axis spans `±trunc_sigmas·σ_k` with `points_per_axis` equispaced
/// nodes (odd, so the origin is a node); weights are the density at the
/// nodes, renormalized.
pub fn discretize_gaussian(spec: &GaussianSpec, points_per_axis: usize, trunc_sigmas: f64) -> Result<DiscreteMeasure> {
    if points_per_axis < 3 || points_per_axis % 2 == 0 {
        return Err(Error::InvalidGrid(format!(
            "points_per_axis must be odd and at least 3, got {points_per_axis}"
        )));
    }
    if !(3.0..=10.0).contains(&trunc_sigmas) {
        return Err(Error::InvalidGrid(format!(
            "trunc_sigmas must lie in [3, 10], got {trunc_sigmas}"
        )));
    }
    let d = spec.dim();
    let nodes = (points_per_axis as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if nodes > MAX_GRID_NODES {
        return Err(Error::GridTooLarge {
            nodes,
            limit: MAX_GRID_NODES,
        });
    }

    let (frame, variances) = spec.principal_axes();
    let half = (points_per_axis - 1) as f64;
    let axes: Vec<Vec<f64>> = variances
        .iter()
        .map(|&var| {
            let extent = trunc_sigmas * var.sqrt();
            (0..points_per_axis)
                .map(|k| extent * (2.0 * k as f64 - half) / half)
                .collect()
        })
        .collect();

    // Per-axis log densities; the tensor weight is their product.
    let axis_logw: Vec<Vec<f64>> = axes
        .iter()
        .zip(&variances)
        .map(|(axis, &var)| axis.iter().map(|t| -0.5 * t * t / var).collect())
        .collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let n = nodes as usize;
    let mut weights = Vec::with_capacity(n);
    let mut idx = vec![0usize; d];
    for _ in 0..n {
        let logw: f64 = (0..d).map(|k| axis_logw[k][idx[k]]).sum();
        weights.push(logw.exp());
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    DiscreteMeasure::on_grid(TensorGrid { frame, axes }, weights)
}

/// Riemann estimate `-Σ wᵢ log(wᵢ / vol)` of the differential entropy of a
/// measure on a uniform grid. `cell_volume` overrides the grid's own.
pub fn differential_entropy_discrete(m: &DiscreteMeasure, cell_volume: Option<f64>) -> Result<f64> {
    let vol = cell_volume.or_else(|| m.cell_volume()).ok_or(Error::NonuniformGrid)?;
    if !(vol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cell volume must be positive, got {vol}"
        )));
    }
    Ok(-m
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * (w / vol).ln())
        .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal_pdf(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn three_point_grid() {
        let m = discretize_gaussian(&GaussianSpec::standard(1), 3, 6.0).unwrap();
        let xs: Vec<f64> = m.points().map(|p| p[0]).collect();
        assert_eq!(xs, vec![-6.0, 0.0, 6.0]);
        let mid = std_normal_pdf(0.0) / (std_normal_pdf(0.0) + 2.0 * std_normal_pdf(6.0));
        assert!((m.weights()[1] - mid).abs() < 1e-15);
        assert!(m.weights()[1] > 0.999);
        assert_eq!(m.weights()[0], m.weights()[2]);
    }

    #[test]
    fn weights_are_even() {
        let spec = GaussianSpec::new(SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap()).unwrap();
        let m = discretize_gaussian(&spec, 11, 5.0).unwrap();
        let n = m.len();
        for i in 0..n {
            // Row-major tensor ordering maps the multi-index k to n-1-k under x → -x.
            assert_eq!(m.weights()[i], m.weights()[n - 1 - i]);
            let p = m.point(i);
            let q = m.point(n - 1 - i);
            assert!(p.iter().zip(q).all(|(a, b)| (a + b).abs() < 1e-14));
        }
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fine_grid_variance() {
        let m = discretize_gaussian(&GaussianSpec::standard(1), 401, 6.0).unwrap();
        let var: f64 = m.points().zip(m.weights()).map(|(p, w)| w * p[0] * p[0]).sum();
        assert!((0.999..=1.001).contains(&var), "{var}");
    }

    #[test]
    fn rotated_grid_covariance() {
        let cov = SymMatrix::from_rows(&[vec![2.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let m = discretize_gaussian(&GaussianSpec::new(cov.clone()).unwrap(), 61, 6.0).unwrap();
        assert!(m.covariance().max_abs_diff(&cov) < 1e-6);
        assert!(m.mean().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn grid_validation() {
        let g = GaussianSpec::standard(1);
        assert!(matches!(discretize_gaussian(&g, 4, 6.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(discretize_gaussian(&g, 1, 6.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(discretize_gaussian(&g, 5, 2.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(discretize_gaussian(&g, 5, 11.0), Err(Error::InvalidGrid(_))));
        let g3 = GaussianSpec::standard(3);
        assert!(matches!(
            discretize_gaussian(&g3, 217, 6.0),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn assumption_params_examples() {
        let p = assumption_params(&GaussianSpec::standard(2), &GaussianSpec::standard(2));
        assert_eq!((p.alpha, p.beta, p.poincare_constant), (1.0, 1.0, 1.0));
        assert!((p.differential_entropy - (2.0 * PI * E).ln()).abs() < 1e-14);
        assert!((p.differential_entropy - 2.83788).abs() < 1e-5);

        let p = assumption_params(&GaussianSpec::isotropic(1, 4.0).unwrap(), &GaussianSpec::standard(1));
        assert_eq!(p.alpha, 0.25);
        assert_eq!(p.poincare_constant, 4.0);

        let p = assumption_params(
            &GaussianSpec::standard(2),
            &GaussianSpec::new(SymMatrix::from_diagonal(&[1.0, 9.0])).unwrap(),
        );
        assert_eq!(p.beta, 1.0 / 9.0);
    }

    #[test]
    fn alpha_times_poincare_is_condition_number() {
        let iso = GaussianSpec::isotropic(3, 2.5).unwrap();
        let p = assumption_params(&iso, &iso);
        assert!((p.alpha * p.poincare_constant - 1.0).abs() < 1e-14);
        let aniso = GaussianSpec::new(SymMatrix::from_diagonal(&[1.0, 4.0])).unwrap();
        let p = assumption_params(&aniso, &iso);
        assert!(p.alpha * p.poincare_constant > 1.0 + 1e-6);
    }

    #[test]
    fn poincare_monotone_in_loewner_order() {
        let a = GaussianSpec::new(SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.8]]).unwrap()).unwrap();
        let bigger = GaussianSpec::new(a.covariance() + &SymMatrix::from_diagonal(&[0.1, 0.5])).unwrap();
        let pa = assumption_params(&a, &a).poincare_constant;
        let pb = assumption_params(&bigger, &a).poincare_constant;
        assert!(pa <= pb);
    }

    #[test]
    fn entropy_examples() {
        let two = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let h = differential_entropy_discrete(&two, Some(1.0)).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-15);
        let h2 = differential_entropy_discrete(&two, Some(2.0)).unwrap();
        assert!((h2 - h - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            differential_entropy_discrete(&two, None),
            Err(Error::NonuniformGrid)
        ));

        let g = discretize_gaussian(&GaussianSpec::standard(1), 401, 6.0).unwrap();
        let h = differential_entropy_discrete(&g, None).unwrap();
        assert!((h - 0.5 * (2.0 * PI * E).ln()).abs() < 1e-3, "{h}");
        assert!((h - 1.41894).abs() < 1e-3);
    }

    #[test]
    fn discrete_measure_validation() {
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![-0.5, 1.5]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]).is_err());
        let m = DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        assert_eq!(m.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn json_schema() {
        let spec: MeasureSpec =
            serde_json::from_str(r#"{"type":"gaussian","dim":2,"covariance":[[1.0,0.0],[0.0,9.0]]}"#).unwrap();
        assert_eq!(spec.dim(), 2);
        assert_eq!(spec.as_gaussian().covariance().get(1, 1), 9.0);
        let back = serde_json::to_value(&spec).unwrap();
        assert_eq!(back["type"], "gaussian");
        assert_eq!(back["dim"], 2);

        for bad in [
            r#"{"type":"gaussian","dim":1,"covariance":[[1.0,0.0],[0.0,1.0]]}"#,
            r#"{"type":"gaussian","dim":1,"covariance":[[-1.0]]}"#,
            r#"{"type":"laplace","dim":1,"covariance":[[1.0]]}"#,
        ] {
            assert!(serde_json::from_str::<MeasureSpec>(bad).is_err(), "{bad}");
        }
    }
}
