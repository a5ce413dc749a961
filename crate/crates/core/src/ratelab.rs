//! ε-sweeps of the map and potential gaps, log-log rate fits, envelope
//! checks and the first-order cost expansion.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_ot::{brenier_map_matrix, map_gap, prop11_bound, LinearMap};
use crate::linalg::{op_norm, SymMatrix};
use crate::measures::{discretize_gaussian, DiscreteMeasure, GaussianSpec, DEFAULT_TRUNC_SIGMAS};
use crate::metrics::{l2_mu_gap, l2_mu_scalar_gap, sup_gap_on_grid, sup_scalar_gap_on_grid, CompactBallSpec};
use crate::sinkhorn::{
    normalize_potentials, primal_value, DualPotentials, EntropicPotential, SinkhornOptions, SinkhornSolver,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};

/// CSV column order of [`SweepRecord`].
pub const CSV_HEADER: &str =
    "eps,sup_gap_grad,sup_gap_pot,prop11_bound,l2_gap_grad_sq,l2_gap_pot_sq,cost_eps,rel_entropy,residual,iterations";

fn yes() -> bool {
    true
}

/// Gap measurements at one regularization level.
///
/// `cost_eps` is the transport cost `∫ ½|x - y|² dπ_ε` of the plan and
/// `rel_entropy` its entropy relative to `μ ⊗ ν`, so the entropic cost is
/// `cost_eps + ε · rel_entropy`. Both are absent on the closed-form path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub sup_gap_grad: f64,
    pub sup_gap_pot: f64,
    pub prop11_bound: Option<f64>,
    pub l2_gap_grad_sq: f64,
    pub l2_gap_pot_sq: f64,
    pub cost_eps: Option<f64>,
    pub rel_entropy: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Not part of the CSV schema; rows read back are assumed converged.
    #[serde(skip_serializing, default = "yes")]
    pub converged: bool,
}

impl SweepRecord {
    /// `C_ε = cost + ε · KL`, when the plan was computed.
    pub fn entropic_cost(&self) -> Option<f64> {
        Some(self.cost_eps? + self.eps * self.rel_entropy?)
    }

    /// Whether the closed-form sup bound, if present, dominates the gap.
    pub fn within_bound(&self) -> bool {
        self.prop11_bound.map_or(true, |b| self.sup_gap_grad <= b + 1e-12)
    }
}

pub fn write_records_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `n` geometrically spaced values from `hi` down to `lo`.
pub fn geometric_grid(hi: f64, lo: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > 0.0 && lo > 0.0 && hi.is_finite() && lo.is_finite()) || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "geometric grid needs positive bounds and n ≥ 1, got [{lo}, {hi}], n = {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![hi]);
    }
    let ratio = (lo / hi).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|k| if k == n - 1 { lo } else { hi * (ratio * k as f64).exp() })
        .collect())
}

/// 12 points from 1 down to 1e-3.
pub fn default_gaussian_eps_grid() -> Vec<f64> {
    geometric_grid(1.0, 1e-3, 12).expect("valid constants")
}

/// 8 points from 1 down to a twentieth of the largest covariance
/// eigenvalue, below which discretization bias takes over.
pub fn default_sinkhorn_eps_grid(mu: &GaussianSpec, nu: &GaussianSpec) -> Vec<f64> {
    let scale = op_norm(mu.covariance()).max(op_norm(nu.covariance()));
    let lo = (0.05 * scale).min(0.5);
    geometric_grid(1.0, lo, 8).expect("positive bounds")
}

/// Quadratic potential `½xᵀTx` shifted to have zero mean under `N(0, A)`.
fn centred_potential<'a>(t: &'a LinearMap, a: &SymMatrix) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    let c = 0.5 * t.matrix.matmul(a).trace();
    move |x| t.potential(x) - c
}

/// Closed-form sweep between `N(0, A)` and `N(0, B)`; every quantity is
/// exact and the ε values are processed independently.
pub fn run_gaussian_sweep(a: &SymMatrix, b: &SymMatrix, radius: f64, eps_grid: &[f64]) -> Result<Vec<SweepRecord>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    a.check_dim(b)?;
    eps_grid
        .par_iter()
        .map(|&eps| gaussian_record(a, b, radius, eps))
        .collect()
}

fn gaussian_record(a: &SymMatrix, b: &SymMatrix, radius: f64, eps: f64) -> Result<SweepRecord> {
    let delta = map_gap(a, b, eps)?;
    let spectrum = delta.eigenvalues();
    let (lo, hi) = (spectrum[0], spectrum[spectrum.len() - 1]);
    // Normalized potential gap: q(x) - c with q(x) = ½xᵀΔx, c = ½tr(ΔA).
    // On the ball q ranges over [½R² min(0, λ_min), ½R² max(0, λ_max)].
    let delta_a = delta.matmul(a);
    let c = 0.5 * delta_a.trace();
    let r2 = 0.5 * radius * radius;
    let sup_pot = (r2 * lo.min(0.0) - c).abs().max((r2 * hi.max(0.0) - c).abs());
    Ok(SweepRecord {
        eps,
        sup_gap_grad: radius * op_norm(&delta),
        sup_gap_pot: sup_pot,
        prop11_bound: Some(prop11_bound(a, b, eps, radius)?),
        // E|Δx|² = tr(ΔAΔ), Var(½xᵀΔx) = ½tr((ΔA)²).
        l2_gap_grad_sq: (&delta_a * delta.as_matrix()).trace().max(0.0),
        l2_gap_pot_sq: (0.5 * (&delta_a * &delta_a).trace()).max(0.0),
        cost_eps: None,
        rel_entropy: None,
        residual: 0.0,
        iterations: 0,
        converged: true,
    })
}

/// Discretization and solver settings of a Sinkhorn sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornSweepParams {
    /// Odd node count per principal axis of each discretized Gaussian.
    pub points_per_axis: usize,
    /// Half-width of the grids in standard deviations.
    pub trunc_sigmas: f64,
    /// Radius of the ball on which sup gaps are measured.
    pub radius: f64,
    /// Box-grid resolution of that ball.
    pub ball_points: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl SinkhornSweepParams {
    pub fn with_defaults(dim: usize, radius: f64) -> Self {
        Self {
            points_per_axis: crate::measures::default_points_per_axis(dim),
            trunc_sigmas: DEFAULT_TRUNC_SIGMAS,
            radius,
            ball_points: crate::metrics::default_ball_points(dim),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Sinkhorn sweep together with the measures it ran on.
#[derive(Debug, Clone)]
pub struct SinkhornSweep {
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub records: Vec<SweepRecord>,
    /// Normalized potentials for each record, in grid order.
    pub potentials: Vec<DualPotentials>,
}

/// Discretizes both Gaussians, solves at each ε in order (warm-starting
/// from the previous level) and measures the estimated potential and map
/// against the exact Brenier pair. A solve that exhausts its budget still
/// yields a record, flagged via `converged = false`.
pub fn run_sinkhorn_sweep(
    mu_spec: &GaussianSpec,
    nu_spec: &GaussianSpec,
    params: &SinkhornSweepParams,
    eps_grid: &[f64],
) -> Result<SinkhornSweep> {
    if mu_spec.dim() != nu_spec.dim() {
        return Err(Error::DimensionMismatch {
            left: mu_spec.dim(),
            right: nu_spec.dim(),
        });
    }
    if eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("eps values must be positive".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("eps grid must be strictly decreasing".into()));
    }
    let dim = mu_spec.dim();
    let ball = CompactBallSpec::new(params.radius, params.ball_points)?;
    let mu = discretize_gaussian(mu_spec, params.points_per_axis, params.trunc_sigmas)?;
    let nu = discretize_gaussian(nu_spec, params.points_per_axis, params.trunc_sigmas)?;
    let (a, b) = (mu_spec.covariance(), nu_spec.covariance());
    let t0 = brenier_map_matrix(a, b)?;
    let phi0 = centred_potential(&t0, a);

    let solver = SinkhornSolver::new(&mu, &nu)?;
    let opts = SinkhornOptions {
        tol: params.tol,
        max_iter: params.max_iter,
        record_dual: false,
    };
    let mut records = Vec::with_capacity(eps_grid.len());
    let mut potentials = Vec::with_capacity(eps_grid.len());
    let mut warm: Option<DualPotentials> = None;
    for &eps in eps_grid {
        let (pots, converged) = match solver.solve_scaled(eps, warm.as_ref(), &opts) {
            Ok(out) => (out.potentials, true),
            Err(Error::MaxIterExceeded { potentials, .. }) => (*potentials, false),
            Err(e) => return Err(e),
        };
        let pots = normalize_potentials(&pots, &mu)?;
        let est = EntropicPotential::new(&pots, &nu)?;
        let plan = primal_value(&pots, &mu, &nu)?;
        let grad = |x: &[f64]| est.gradient(x);
        let pot = |x: &[f64]| est.value(x);
        let ref_grad = |x: &[f64]| t0.apply(x);
        let l2_grad = l2_mu_gap(grad, ref_grad, &mu);
        let l2_pot = l2_mu_scalar_gap(pot, &phi0, &mu);
        records.push(SweepRecord {
            eps,
            sup_gap_grad: sup_gap_on_grid(grad, ref_grad, dim, &ball)?,
            sup_gap_pot: sup_scalar_gap_on_grid(pot, &phi0, dim, &ball)?,
            prop11_bound: None,
            l2_gap_grad_sq: l2_grad * l2_grad,
            l2_gap_pot_sq: l2_pot * l2_pot,
            cost_eps: Some(plan.cost),
            rel_entropy: Some(plan.rel_entropy),
            residual: pots.residual,
            iterations: pots.iterations,
            converged,
        });
        warm = Some(pots.clone());
        potentials.push(pots);
    }
    Ok(SinkhornSweep {
        mu,
        nu,
        records,
        potentials,
    })
}

/// Column of a [`SweepRecord`] used for fits and envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapField {
    SupGapGrad,
    SupGapPot,
    L2GapGradSq,
    L2GapPotSq,
}

impl GapField {
    pub fn value(self, r: &SweepRecord) -> f64 {
        match self {
            GapField::SupGapGrad => r.sup_gap_grad,
            GapField::SupGapPot => r.sup_gap_pot,
            GapField::L2GapGradSq => r.l2_gap_grad_sq,
            GapField::L2GapPotSq => r.l2_gap_pot_sq,
        }
    }
}

/// Least-squares fit of `log value = slope · log ε + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `max value / ε^exponent` over all records, for the requested exponent.
    pub envelope_constant: f64,
}

pub fn fit_loglog_slope(records: &[SweepRecord], field: GapField, target_exponent: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.eps, field.value(r)))
        .filter(|&(e, v)| e > 0.0 && v > 0.0 && e.is_finite() && v.is_finite())
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateData(format!(
            "need at least 3 records with positive values, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateData("all eps values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let envelope_constant = verify_envelope(records, field, target_exponent, EnvelopeForm::Power).constant;
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        envelope_constant,
    })
}

/// Shape of the comparison function in [`verify_envelope`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeForm {
    /// `ε^p`
    Power,
    /// `ε^p + ε`
    PowerPlusLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub holds: bool,
    pub constant: f64,
}

/// Smallest `C` with `value ≤ C · envelope(ε)` on every record.
pub fn verify_envelope(records: &[SweepRecord], field: GapField, exponent: f64, form: EnvelopeForm) -> Envelope {
    let constant = records
        .iter()
        .map(|r| {
            let env = match form {
                EnvelopeForm::Power => r.eps.powf(exponent),
                EnvelopeForm::PowerPlusLinear => r.eps.powf(exponent) + r.eps,
            };
            let v = field.value(r);
            if v == 0.0 {
                0.0
            } else {
                v / env
            }
        })
        .fold(0.0, |acc: f64, c| {
            if c.is_nan() || acc.is_nan() {
                f64::NAN
            } else {
                acc.max(c)
            }
        });
    Envelope {
        holds: constant.is_finite(),
        constant,
    }
}

/// `[C_ε - C₀ + (d/2) ε log ε - (ε/2)(h_μ + h_ν)] / ε` for each record
/// carrying a plan; `h` are differential entropies.
pub fn expansion_check(records: &[SweepRecord], h_mu: f64, h_nu: f64, c0: f64, dim: usize) -> Vec<(f64, f64)> {
    expansion_defects(records, h_mu, h_nu, c0, dim, 0.0)
}

/// Variant of [`expansion_check`] that keeps the `-(d/2) ε log 2π` term of
/// the Gaussian heat-kernel normalization, which the entropy-relative-to-
/// `μ ⊗ ν` convention produces.
pub fn expansion_check_corrected(
    records: &[SweepRecord],
    h_mu: f64,
    h_nu: f64,
    c0: f64,
    dim: usize,
) -> Vec<(f64, f64)> {
    expansion_defects(records, h_mu, h_nu, c0, dim, (2.0 * std::f64::consts::PI).ln())
}

fn expansion_defects(
    records: &[SweepRecord],
    h_mu: f64,
    h_nu: f64,
    c0: f64,
    dim: usize,
    log_scale: f64,
) -> Vec<(f64, f64)> {
    let half_d = 0.5 * dim as f64;
    records
        .iter()
        .filter_map(|r| {
            let c_eps = r.entropic_cost()?;
            let e = r.eps;
            let defect = (c_eps - c0 + half_d * e * (e.ln() + log_scale) - 0.5 * e * (h_mu + h_nu)) / e;
            Some((e, defect))
        })
        .collect()
}
