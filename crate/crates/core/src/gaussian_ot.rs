//! Closed-form Brenier and entropic maps between centred Gaussians
//! `N(0, A) → N(0, B)` under the cost `½|x - y|²`.
//!
//! With `M = A^{1/2} B A^{1/2}`:
//!
//! ```text
//! T₀ = A^{-1/2} M^{1/2} A^{-1/2}
//! T_ε = A^{-1/2} (M + ε²/4 I)^{1/2} A^{-1/2} - (ε/2) A^{-1}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{op_norm, sym_sqrt, SymMatrix, DEFAULT_CLAMP_TOL};

/// A symmetric linear map `x ↦ M x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub matrix: SymMatrix,
}

impl LinearMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.apply(x)
    }

    /// The quadratic potential `½ xᵀ M x` whose gradient is this map.
    pub fn potential(&self, x: &[f64]) -> f64 {
        0.5 * self.matrix.quadratic_form(x)
    }
}

/// Shared intermediate quantities of a Gaussian pair.
struct Pair {
    inv_sqrt_a: SymMatrix,
    inv_a: SymMatrix,
    m: SymMatrix,
}

impl Pair {
    fn new(a: &SymMatrix, b: &SymMatrix) -> Result<Self> {
        a.check_dim(b)?;
        b.require_pd()?;
        let sqrt_a = sym_sqrt(a, DEFAULT_CLAMP_TOL)?;
        let inv_sqrt_a = a.inv_sqrt_pd()?;
        let inv_a = a.inverse_pd()?;
        let m = b.congruence(&sqrt_a)?;
        Ok(Self { inv_sqrt_a, inv_a, m })
    }

    fn entropic(&self, eps: f64) -> Result<SymMatrix> {
        let d = self.m.dim();
        let shifted = &self.m + &SymMatrix::scaled_identity(d, 0.25 * eps * eps);
        let root = sym_sqrt(&shifted, DEFAULT_CLAMP_TOL)?;
        let main = root.congruence(&self.inv_sqrt_a)?;
        if eps == 0.0 {
            Ok(main)
        } else {
            Ok(&main - &(&self.inv_a * (0.5 * eps)))
        }
    }
}

/// Brenier map matrix `T₀`.
pub fn brenier_map_matrix(a: &SymMatrix, b: &SymMatrix) -> Result<LinearMap> {
    entropic_map_matrix(a, b, 0.0)
}

/// Entropic Brenier map matrix `T_ε`; `eps = 0` gives `T₀` exactly.
pub fn entropic_map_matrix(a: &SymMatrix, b: &SymMatrix, eps: f64) -> Result<LinearMap> {
    check_eps(eps)?;
    let pair = Pair::new(a, b)?;
    Ok(LinearMap {
        matrix: pair.entropic(eps)?,
    })
}

/// The ε-linear upper bound on `sup_{|x| ≤ R} |T_ε x - T₀ x|`:
///
/// `R ε ‖A⁻¹‖/2 · (ε ‖M⁻¹‖^{1/2}/4 + ε³ ‖M⁻¹‖^{3/2}/16 + 1)`.
pub fn prop11_bound(a: &SymMatrix, b: &SymMatrix, eps: f64, radius: f64) -> Result<f64> {
    check_eps(eps)?;
    let pair = Pair::new(a, b)?;
    let inv_a = op_norm(&pair.inv_a);
    // ‖M⁻¹‖ = 1 / λ_min(M)
    let inv_m = 1.0 / pair.m.min_eigenvalue();
    Ok(radius * eps * (inv_a / 2.0) * (eps * inv_m.sqrt() / 4.0 + eps.powi(3) * inv_m.powf(1.5) / 16.0 + 1.0))
}

/// Exact `sup_{|x| ≤ R} |T_ε x - T₀ x| = R ‖T_ε - T₀‖_op`.
pub fn sup_gap_on_ball(a: &SymMatrix, b: &SymMatrix, eps: f64, radius: f64) -> Result<f64> {
    Ok(radius * op_norm(&map_gap(a, b, eps)?))
}

/// `T_ε - T₀`.
pub fn map_gap(a: &SymMatrix, b: &SymMatrix, eps: f64) -> Result<SymMatrix> {
    check_eps(eps)?;
    let pair = Pair::new(a, b)?;
    Ok(&pair.entropic(eps)? - &pair.entropic(0.0)?)
}

/// Unregularized cost `C₀ = ½ W₂²` between the two Gaussians (Bures formula,
/// halved for the `½|x - y|²` cost).
pub fn half_squared_w2(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let pair = Pair::new(a, b)?;
    let root = sym_sqrt(&pair.m, DEFAULT_CLAMP_TOL)?;
    Ok(0.5 * (a.trace() + b.trace() - 2.0 * root.trace()))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::InvalidArgument(format!(
            "eps must be finite and ≥ 0, got {eps}"
        )))
    }
}
