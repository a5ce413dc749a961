//! Log-domain Sinkhorn for the cost `½|x - y|²` and the Schrödinger-system
//! extension of the entropic potential to all of `ℝ^d`.
//!
//! The solver alternates the exact block updates
//!
//! ```text
//! f(x) = -ε log Σ_j v_j exp((g_j - ½|x - y_j|²)/ε)
//! g(y) = -ε log Σ_i w_i exp((f_i - ½|x_i - y|²)/ε)
//! ```
//!
//! and stops on the sup-norm defect of that fixed-point system. When both
//! supports are tensor grids in the same orthonormal frame the kernel
//! factorizes over axes and each update is applied one axis at a time.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::measures::DiscreteMeasure;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Entropic dual pair `(f_ε, g_ε)` on the two supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPotentials {
    pub eps: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// Total Sinkhorn sweeps spent, across all ε stages.
    pub iterations: usize,
    pub residual: f64,
}

/// Conditional law `π_ε^x` of the plan given a source point, as weights on
/// the target support.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalWeights {
    pub anchor: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub tol: f64,
    /// Sweep budget per ε stage.
    pub max_iter: usize,
    /// Keep the dual objective after every sweep of the final stage.
    pub record_dual: bool,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            record_dual: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub potentials: DualPotentials,
    /// Dual objective after each sweep of the last stage (empty unless
    /// requested).
    pub dual_trace: Vec<f64>,
}

/// Numerically stable `log Σ exp(zᵢ)`; `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp(z: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = z.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + z.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn log_weights(weights: &[f64]) -> Vec<f64> {
    weights.iter().map(|w| w.ln()).collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Per-axis node coordinates of two grids that share an orthonormal frame.
#[derive(Debug, Clone)]
struct SharedFrame {
    mu_axes: Vec<Vec<f64>>,
    nu_axes: Vec<Vec<f64>>,
}

impl SharedFrame {
    fn detect(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Option<Self> {
        let (gm, gn) = (mu.grid()?, nu.grid()?);
        let d = gm.dim();
        if gn.dim() != d {
            return None;
        }
        let same = gm
            .frame
            .iter()
            .zip(gn.frame.iter())
            .all(|(a, b)| (a - b).abs() <= 1e-12);
        let gram = gm.frame.transpose() * &gm.frame;
        let orthonormal = (gram - DMatrix::identity(d, d)).amax() <= 1e-12;
        (same && orthonormal).then(|| Self {
            mu_axes: gm.axes.clone(),
            nu_axes: gn.axes.clone(),
        })
    }
}

/// Soft-min (c-transform) operators of the quadratic cost between two
/// supports.
#[derive(Debug, Clone)]
pub struct CostKernel<'a> {
    mu: &'a DiscreteMeasure,
    nu: &'a DiscreteMeasure,
    log_w: Vec<f64>,
    log_v: Vec<f64>,
    shared: Option<SharedFrame>,
}

impl<'a> CostKernel<'a> {
    pub fn new(mu: &'a DiscreteMeasure, nu: &'a DiscreteMeasure) -> Result<Self> {
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                left: mu.dim(),
                right: nu.dim(),
            });
        }
        Ok(Self {
            mu,
            nu,
            log_w: log_weights(mu.weights()),
            log_v: log_weights(nu.weights()),
            shared: SharedFrame::detect(mu, nu),
        })
    }

    /// Same as [`CostKernel::new`] but never takes the separable path.
    pub fn dense(mu: &'a DiscreteMeasure, nu: &'a DiscreteMeasure) -> Result<Self> {
        let mut k = Self::new(mu, nu)?;
        k.shared = None;
        Ok(k)
    }

    pub fn is_separable(&self) -> bool {
        self.shared.is_some()
    }

    /// `x_i ↦ -ε log Σ_j v_j exp((g_j - c(x_i, y_j))/ε)`.
    pub fn update_f(&self, g: &[f64], eps: f64) -> Vec<f64> {
        let offsets: Vec<f64> = g.iter().zip(&self.log_v).map(|(g, lv)| lv + g / eps).collect();
        match &self.shared {
            Some(s) => separable_softmin(&offsets, &s.nu_axes, &s.mu_axes, eps),
            None => dense_softmin(self.mu, self.nu, &offsets, eps),
        }
    }

    /// `y_j ↦ -ε log Σ_i w_i exp((f_i - c(x_i, y_j))/ε)`.
    pub fn update_g(&self, f: &[f64], eps: f64) -> Vec<f64> {
        let offsets: Vec<f64> = f.iter().zip(&self.log_w).map(|(f, lw)| lw + f / eps).collect();
        match &self.shared {
            Some(s) => separable_softmin(&offsets, &s.mu_axes, &s.nu_axes, eps),
            None => dense_softmin(self.nu, self.mu, &offsets, eps),
        }
    }

    fn check(&self, pots: &DualPotentials) -> Result<()> {
        if pots.f.len() != self.mu.len() {
            return Err(Error::DimensionMismatch {
                left: pots.f.len(),
                right: self.mu.len(),
            });
        }
        if pots.g.len() != self.nu.len() {
            return Err(Error::DimensionMismatch {
                left: pots.g.len(),
                right: self.nu.len(),
            });
        }
        Ok(())
    }
}

/// For each query point: `-ε · LSE_j(offsets_j - ½|q - p_j|²/ε)`.
fn dense_softmin(query: &DiscreteMeasure, summed: &DiscreteMeasure, offsets: &[f64], eps: f64) -> Vec<f64> {
    let inv = 0.5 / eps;
    (0..query.len())
        .into_par_iter()
        .map(|i| {
            let q = query.point(i);
            let terms = summed.points().zip(offsets).map(move |(p, o)| o - inv * sq_dist(q, p));
            -eps * log_sum_exp(terms)
        })
        .collect()
}

/// Separable version of [`dense_softmin`]: `offsets` is a row-major tensor
/// over the `from` grid, the result a tensor over the `to` grid.
fn separable_softmin(offsets: &[f64], from: &[Vec<f64>], to: &[Vec<f64>], eps: f64) -> Vec<f64> {
    let inv = 0.5 / eps;
    let mut shape: Vec<usize> = from.iter().map(Vec::len).collect();
    let mut tensor = offsets.to_vec();
    for k in 0..shape.len() {
        let cost: Vec<f64> = to[k]
            .iter()
            .flat_map(|&t| from[k].iter().map(move |&s| inv * (t - s) * (t - s)))
            .collect();
        tensor = lse_along_axis(&tensor, &shape, k, &cost, to[k].len());
        shape[k] = to[k].len();
    }
    tensor.iter_mut().for_each(|v| *v *= -eps);
    tensor
}

/// `out[.., i, ..] = LSE_j(input[.., j, ..] - cost[i][j])` along axis `k`.
fn lse_along_axis(input: &[f64], shape: &[usize], k: usize, cost: &[f64], n_out: usize) -> Vec<f64> {
    let outer: usize = shape[..k].iter().product();
    let m = shape[k];
    let inner: usize = shape[k + 1..].iter().product();
    let mut out = vec![0.0; outer * n_out * inner];
    out.par_chunks_mut(n_out * inner).enumerate().for_each(|(o, block)| {
        let mut column = vec![0.0; m];
        for q in 0..inner {
            for (j, c) in column.iter_mut().enumerate() {
                *c = input[(o * m + j) * inner + q];
            }
            for i in 0..n_out {
                let row = &cost[i * m..(i + 1) * m];
                block[i * inner + q] = log_sum_exp(column.iter().zip(row).map(|(v, c)| v - c));
            }
        }
    });
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared bounding-box diagonal of a support.
fn bbox_diameter_sq(m: &DiscreteMeasure) -> f64 {
    (0..m.dim())
        .map(|k| {
            let (lo, hi) = m.points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[k]), hi.max(p[k]))
            });
            (hi - lo) * (hi - lo)
        })
        .sum()
}

/// Larger of the two squared support diameters.
///
/// A translation between the supports only adds separable terms to the
/// cost, so it has no bearing on how hard the problem is.
pub fn support_diameter_sq(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    bbox_diameter_sq(mu).max(bbox_diameter_sq(nu))
}

/// Geometric ε-scaling schedule: halve from `start` while staying above
/// `target`, then finish at `target`.
pub fn eps_schedule(start: f64, target: f64) -> Vec<f64> {
    let mut stages = Vec::new();
    let mut e = start;
    while e > target {
        stages.push(e);
        e *= 0.5;
    }
    stages.push(target);
    stages
}

/// Reusable solver over a fixed pair of supports.
#[derive(Debug, Clone)]
pub struct SinkhornSolver<'a> {
    kernel: CostKernel<'a>,
    diameter_sq: f64,
}

impl<'a> SinkhornSolver<'a> {
    pub fn new(mu: &'a DiscreteMeasure, nu: &'a DiscreteMeasure) -> Result<Self> {
        Ok(Self {
            kernel: CostKernel::new(mu, nu)?,
            diameter_sq: support_diameter_sq(mu, nu),
        })
    }

    pub fn with_kernel(kernel: CostKernel<'a>) -> Self {
        let diameter_sq = support_diameter_sq(kernel.mu, kernel.nu);
        Self { kernel, diameter_sq }
    }

    pub fn kernel(&self) -> &CostKernel<'a> {
        &self.kernel
    }

    /// Single-stage solve at `eps` from the given initial `g` (zero if absent).
    pub fn solve(&self, eps: f64, init_g: Option<&[f64]>, opts: &SinkhornOptions) -> Result<SolveOutcome> {
        check_solve_args(eps, opts)?;
        let m = self.kernel.nu.len();
        let g0 = match init_g {
            Some(g) if g.len() != m => {
                return Err(Error::DimensionMismatch {
                    left: g.len(),
                    right: m,
                })
            }
            Some(g) => g.to_vec(),
            None => vec![0.0; m],
        };
        self.run_stage(eps, g0, opts.tol, opts, 0)
    }

    /// Solve at `eps` with ε-scaling. Without a warm start the schedule
    /// begins at `max(eps, diameter²)` from `g ≡ 0`; with one it continues
    /// halving from the warm start's ε.
    pub fn solve_scaled(
        &self,
        eps: f64,
        warm: Option<&DualPotentials>,
        opts: &SinkhornOptions,
    ) -> Result<SolveOutcome> {
        check_solve_args(eps, opts)?;
        let (stages, mut g, mut spent) = match warm {
            Some(w) => {
                self.kernel.check(w)?;
                let stages = if w.eps > eps {
                    eps_schedule(w.eps * 0.5, eps)
                } else {
                    vec![eps]
                };
                (stages, w.g.clone(), w.iterations)
            }
            None => (
                eps_schedule(self.diameter_sq.max(eps), eps),
                vec![0.0; self.kernel.nu.len()],
                0,
            ),
        };
        let last = stages.len() - 1;
        for (k, &stage_eps) in stages.iter().enumerate() {
            let tol = if k == last { opts.tol } else { opts.tol.max(1e-6) };
            let out = self.run_stage(stage_eps, g, tol, opts, spent)?;
            if k == last {
                return Ok(out);
            }
            spent = out.potentials.iterations;
            g = out.potentials.g;
        }
        unreachable!("schedule always ends with the target stage")
    }

    fn run_stage(
        &self,
        eps: f64,
        mut g: Vec<f64>,
        tol: f64,
        opts: &SinkhornOptions,
        spent: usize,
    ) -> Result<SolveOutcome> {
        let k = &self.kernel;
        let (w, v) = (k.mu.weights(), k.nu.weights());
        let mut f = k.update_f(&g, eps);
        let mut trace = Vec::new();
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            g = k.update_g(&f, eps);
            let f_next = k.update_f(&g, eps);
            if f_next.iter().chain(&g).any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("sinkhorn potentials"));
            }
            let defect = max_abs_diff(&f, &f_next);
            if opts.record_dual {
                let mass: f64 = w
                    .iter()
                    .zip(f.iter().zip(&f_next))
                    .map(|(wi, (a, b))| wi * ((a - b) / eps).exp())
                    .sum();
                trace.push(dot(w, &f) + dot(v, &g) - eps * mass + eps);
            }
            if defect <= tol {
                let mut pots = DualPotentials {
                    eps,
                    f,
                    g,
                    iterations: spent + sweeps,
                    residual: 0.0,
                };
                pots.residual = residual_with(k, &pots);
                return Ok(SolveOutcome {
                    potentials: pots,
                    dual_trace: trace,
                });
            }
            if sweeps >= opts.max_iter {
                let mut pots = DualPotentials {
                    eps,
                    f,
                    g,
                    iterations: spent + sweeps,
                    residual: 0.0,
                };
                pots.residual = residual_with(k, &pots);
                return Err(Error::MaxIterExceeded {
                    tol,
                    max_iter: opts.max_iter,
                    potentials: Box::new(pots),
                });
            }
            f = f_next;
        }
    }
}

fn check_solve_args(eps: f64, opts: &SinkhornOptions) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be positive".into()));
    }
    Ok(())
}

/// Solves the entropic problem at `eps` with ε-scaling from a cold start.
pub fn sinkhorn_solve(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<DualPotentials> {
    let opts = SinkhornOptions {
        tol,
        max_iter,
        record_dual: false,
    };
    Ok(SinkhornSolver::new(mu, nu)?.solve_scaled(eps, None, &opts)?.potentials)
}

fn residual_with(k: &CostKernel<'_>, pots: &DualPotentials) -> f64 {
    let rf = max_abs_diff(&pots.f, &k.update_f(&pots.g, pots.eps));
    let rg = max_abs_diff(&pots.g, &k.update_g(&pots.f, pots.eps));
    rf.max(rg)
}

/// Sup-norm defect of the Schrödinger system at `pots`.
pub fn schrodinger_residual(pots: &DualPotentials, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let k = CostKernel::new(mu, nu)?;
    k.check(pots)?;
    Ok(residual_with(&k, pots))
}

/// Largest row and column marginal defects of the plan induced by `pots`.
pub fn marginal_defects(pots: &DualPotentials, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, f64)> {
    let k = CostKernel::new(mu, nu)?;
    k.check(pots)?;
    let eps = pots.eps;
    // Row i of the plan sums to w_i exp((f_i - f̃_i)/ε), f̃ the f-update of g.
    let defect = |pot: &[f64], updated: Vec<f64>, weights: &[f64]| {
        pot.iter()
            .zip(updated)
            .zip(weights)
            .map(|((p, u), w)| (w * ((p - u) / eps).exp() - w).abs())
            .fold(0.0, f64::max)
    };
    let rows = defect(&pots.f, k.update_f(&pots.g, eps), mu.weights());
    let cols = defect(&pots.g, k.update_g(&pots.f, eps), nu.weights());
    Ok((rows, cols))
}

/// Entropic dual objective
/// `Σ wᵢfᵢ + Σ v_j g_j - ε Σ wᵢ v_j exp((fᵢ + g_j - cᵢⱼ)/ε) + ε`.
pub fn dual_objective(pots: &DualPotentials, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let k = CostKernel::new(mu, nu)?;
    k.check(pots)?;
    let eps = pots.eps;
    let mass: f64 = pots
        .f
        .iter()
        .zip(k.update_f(&pots.g, eps))
        .zip(mu.weights())
        .map(|((f, u), w)| w * ((f - u) / eps).exp())
        .sum();
    Ok(dot(mu.weights(), &pots.f) + dot(nu.weights(), &pots.g) - eps * mass + eps)
}

/// Plan mass `wᵢ v_j exp((fᵢ + g_j - ½|xᵢ - y_j|²)/ε)` of cell `(i, j)`.
pub fn plan_density(
    pots: &DualPotentials,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    i: usize,
    j: usize,
) -> Result<f64> {
    if i >= mu.len() || j >= nu.len() || i >= pots.f.len() || j >= pots.g.len() {
        return Err(Error::IndexOutOfRange {
            i,
            j,
            n: mu.len(),
            m: nu.len(),
        });
    }
    let c = 0.5 * sq_dist(mu.point(i), nu.point(j));
    Ok(mu.weights()[i] * nu.weights()[j] * ((pots.f[i] + pots.g[j] - c) / pots.eps).exp())
}

/// Shifts `(f + s, g - s)` so that `Σ wᵢ φ_ε(xᵢ) = 0` with
/// `φ_ε(xᵢ) = ½|xᵢ|² - fᵢ`.
pub fn normalize_potentials(pots: &DualPotentials, mu: &DiscreteMeasure) -> Result<DualPotentials> {
    if pots.f.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            left: pots.f.len(),
            right: mu.len(),
        });
    }
    let shift: f64 = mu
        .points()
        .zip(&pots.f)
        .zip(mu.weights())
        .map(|((x, f), w)| w * (0.5 * dot(x, x) - f))
        .sum();
    Ok(DualPotentials {
        f: pots.f.iter().map(|f| f + shift).collect(),
        g: pots.g.iter().map(|g| g - shift).collect(),
        ..pots.clone()
    })
}

/// Primal transport cost and relative entropy of the plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalValue {
    pub cost: f64,
    pub rel_entropy: f64,
}

impl PrimalValue {
    /// `cost + ε · rel_entropy`, the entropic transport value.
    pub fn entropic_cost(&self, eps: f64) -> f64 {
        self.cost + eps * self.rel_entropy
    }
}

pub fn primal_value(pots: &DualPotentials, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<PrimalValue> {
    CostKernel::new(mu, nu)?.check(pots)?;
    let eps = pots.eps;
    let (cost, ent) = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let x = mu.point(i);
            let wi = mu.weights()[i];
            let mut cost = 0.0;
            let mut ent = 0.0;
            for ((y, vj), gj) in nu.points().zip(nu.weights()).zip(&pots.g) {
                let c = 0.5 * sq_dist(x, y);
                let log_ratio = (pots.f[i] + gj - c) / eps;
                let pi = wi * vj * log_ratio.exp();
                if pi > 0.0 {
                    cost += pi * c;
                    ent += pi * log_ratio;
                }
            }
            (cost, ent)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(PrimalValue {
        cost,
        rel_entropy: ent.max(0.0),
    })
}

/// The entropic potential `φ_ε` extended off the source support through the
/// Schrödinger system, with its gradient and Hessian.
///
/// Written as `φ_ε(x) = ε log Σ_j v_j exp((x·y_j - ½|y_j|² + g_j)/ε)`, a
/// log-sum-exp of affine functions of `x`.
#[derive(Debug, Clone)]
pub struct EntropicPotential<'a> {
    nu: &'a DiscreteMeasure,
    eps: f64,
    offsets: Vec<f64>,
}

impl<'a> EntropicPotential<'a> {
    pub fn new(pots: &DualPotentials, nu: &'a DiscreteMeasure) -> Result<Self> {
        if pots.g.len() != nu.len() {
            return Err(Error::DimensionMismatch {
                left: pots.g.len(),
                right: nu.len(),
            });
        }
        let eps = pots.eps;
        let offsets = nu
            .points()
            .zip(nu.weights())
            .zip(&pots.g)
            .map(|((y, v), g)| v.ln() + (g - 0.5 * dot(y, y)) / eps)
            .collect();
        Ok(Self { nu, eps, offsets })
    }

    pub fn dim(&self) -> usize {
        self.nu.dim()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn logits<'b>(&'b self, x: &'b [f64]) -> impl Iterator<Item = f64> + Clone + 'b {
        let inv = 1.0 / self.eps;
        self.nu
            .points()
            .zip(&self.offsets)
            .map(move |(y, o)| o + inv * dot(x, y))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.eps * log_sum_exp(self.logits(x))
    }

    pub fn conditional(&self, x: &[f64]) -> ConditionalWeights {
        let lse = log_sum_exp(self.logits(x));
        ConditionalWeights {
            anchor: x.to_vec(),
            weights: self.logits(x).map(|l| (l - lse).exp()).collect(),
        }
    }

    /// `∇φ_ε(x)`: the barycentre of `π_ε^x`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let p = self.conditional(x).weights;
        self.barycentre(&p)
    }

    fn barycentre(&self, p: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (y, pj) in self.nu.points().zip(p) {
            for (mk, yk) in m.iter_mut().zip(y) {
                *mk += pj * yk;
            }
        }
        m
    }

    /// `∇²φ_ε(x) = Cov(π_ε^x) / ε`.
    pub fn hessian(&self, x: &[f64]) -> SymMatrix {
        let p = self.conditional(x).weights;
        let m = self.barycentre(&p);
        let d = self.dim();
        let mut cov = DMatrix::zeros(d, d);
        for (y, pj) in self.nu.points().zip(&p) {
            for r in 0..d {
                let dr = y[r] - m[r];
                for c in 0..d {
                    cov[(r, c)] += pj * dr * (y[c] - m[c]);
                }
            }
        }
        SymMatrix::new(cov / self.eps).expect("finite covariance")
    }
}

/// `φ_ε(x) = ½|x|² - f_ε(x)`.
pub fn phi_eps_eval(pots: &DualPotentials, nu: &DiscreteMeasure, x: &[f64]) -> Result<f64> {
    Ok(EntropicPotential::new(pots, nu)?.value(x))
}

/// `∇φ_ε(x) = ∫ y dπ_ε^x(y)`.
pub fn entropic_map_eval(pots: &DualPotentials, nu: &DiscreteMeasure, x: &[f64]) -> Result<Vec<f64>> {
    Ok(EntropicPotential::new(pots, nu)?.gradient(x))
}

pub fn entropic_hessian_eval(pots: &DualPotentials, nu: &DiscreteMeasure, x: &[f64]) -> Result<SymMatrix> {
    Ok(EntropicPotential::new(pots, nu)?.hessian(x))
}

pub fn conditional_weights(pots: &DualPotentials, nu: &DiscreteMeasure, x: &[f64]) -> Result<ConditionalWeights> {
    Ok(EntropicPotential::new(pots, nu)?.conditional(x))
}
