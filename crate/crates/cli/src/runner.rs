use std::fs;
use std::path::Path;

use otrates_core::linalg::loewner_leq;
use otrates_core::measures::assumption_params;
use otrates_core::metrics::{caffarelli_bound, chewi_pooladian_bound};
use otrates_core::ratelab::{
    expansion_check, expansion_check_corrected, fit_loglog_slope, run_gaussian_sweep, run_sinkhorn_sweep,
    verify_envelope, write_records_csv, EnvelopeForm, GapField, SinkhornSweepParams, SweepRecord,
};
use otrates_core::{entropic_map_matrix, half_squared_w2, SymMatrix};
use serde::Serialize;

use crate::config::{Mode, ResolvedConfig};
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub eps: f64,
    pub defect: f64,
    /// Defect with the `-(d/2) ε log 2π` normalization term included.
    pub defect_corrected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mode: &'static str,
    pub slope_grad: Option<f64>,
    pub slope_l2: Option<f64>,
    pub envelope_1_over_d_plus_4: f64,
    pub violations: usize,
    pub records: usize,
    pub unconverged: usize,
    pub r_squared_grad: Option<f64>,
    pub envelope_pot_1_over_d_plus_4: f64,
    pub envelope_l2_linear: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<Vec<ExpansionRow>>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<SweepRecord>,
    pub summary: Summary,
    pub report: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.violations > 0 {
            EXIT_VIOLATION
        } else if self.summary.unconverged > 0 {
            EXIT_UNCONVERGED
        } else {
            EXIT_OK
        }
    }
}

/// Counts ε values at which the closed-form sup bound or the ordering
/// `T_ε ≼ entropic bound · I ≼ Brenier bound · I` fails.
fn count_violations(cfg: &ResolvedConfig, records: &[SweepRecord]) -> Result<usize, CliError> {
    let (src, tgt) = (cfg.source.as_gaussian(), cfg.target.as_gaussian());
    let params = assumption_params(src, tgt);
    let d = cfg.dim();
    let caf = SymMatrix::scaled_identity(d, caffarelli_bound(&params));
    let mut violations = records.iter().filter(|r| !r.within_bound()).count();
    for &eps in &cfg.eps_grid {
        let t = entropic_map_matrix(src.covariance(), tgt.covariance(), eps)?.matrix;
        let cp = SymMatrix::scaled_identity(d, chewi_pooladian_bound(&params, eps));
        if !(loewner_leq(&t, &cp, 1e-10)? && loewner_leq(&cp, &caf, 1e-10)?) {
            violations += 1;
        }
    }
    Ok(violations)
}

/// Runs the sweep described by `cfg`; no files are touched.
pub fn run(cfg: &ResolvedConfig) -> Result<RunOutcome, CliError> {
    let (src, tgt) = (cfg.source.as_gaussian(), cfg.target.as_gaussian());
    let d = cfg.dim();
    let records = match cfg.mode {
        Mode::Gaussian => run_gaussian_sweep(src.covariance(), tgt.covariance(), cfg.radius, &cfg.eps_grid)?,
        Mode::Sinkhorn | Mode::Expansion => {
            let params = SinkhornSweepParams {
                points_per_axis: cfg.points_per_axis,
                trunc_sigmas: cfg.trunc_sigmas,
                radius: cfg.radius,
                ball_points: cfg.ball_points,
                tol: cfg.tol,
                max_iter: cfg.max_iter,
            };
            run_sinkhorn_sweep(src, tgt, &params, &cfg.eps_grid)?.records
        }
    };

    let exponent = 1.0 / (d as f64 + 4.0);
    let fit_grad = fit_loglog_slope(&records, GapField::SupGapGrad, exponent).ok();
    let fit_l2 = fit_loglog_slope(&records, GapField::L2GapGradSq, 1.0).ok();
    let expansion = if cfg.mode == Mode::Expansion {
        let (h_mu, h_nu) = (src.differential_entropy(), tgt.differential_entropy());
        let c0 = half_squared_w2(src.covariance(), tgt.covariance())?;
        let raw = expansion_check(&records, h_mu, h_nu, c0, d);
        let fixed = expansion_check_corrected(&records, h_mu, h_nu, c0, d);
        Some(
            raw.iter()
                .zip(&fixed)
                .map(|(&(eps, defect), &(_, defect_corrected))| ExpansionRow {
                    eps,
                    defect,
                    defect_corrected,
                })
                .collect(),
        )
    } else {
        None
    };
    let summary = Summary {
        mode: cfg.mode.as_str(),
        slope_grad: fit_grad.map(|f| f.slope),
        slope_l2: fit_l2.map(|f| f.slope),
        envelope_1_over_d_plus_4: verify_envelope(&records, GapField::SupGapGrad, exponent, EnvelopeForm::Power)
            .constant,
        violations: count_violations(cfg, &records)?,
        records: records.len(),
        unconverged: records.iter().filter(|r| !r.converged).count(),
        r_squared_grad: fit_grad.map(|f| f.r_squared),
        envelope_pot_1_over_d_plus_4: verify_envelope(
            &records,
            GapField::SupGapPot,
            exponent,
            EnvelopeForm::PowerPlusLinear,
        )
        .constant,
        envelope_l2_linear: verify_envelope(&records, GapField::L2GapGradSq, 1.0, EnvelopeForm::Power).constant,
        expansion,
    };
    let report = render_report(&summary);
    Ok(RunOutcome {
        records,
        summary,
        report,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

fn render_report(s: &Summary) -> String {
    let mut out = format!(
        "mode {}: {} records, {} unconverged, {} bound violations\n\
         slope of sup map gap {} (r² {}), slope of squared L2 gap {}\n\
         envelope constants: map {:.4e}, potential {:.4e}, squared L2 / eps {:.4e}\n",
        s.mode,
        s.records,
        s.unconverged,
        s.violations,
        fmt_opt(s.slope_grad),
        fmt_opt(s.r_squared_grad),
        fmt_opt(s.slope_l2),
        s.envelope_1_over_d_plus_4,
        s.envelope_pot_1_over_d_plus_4,
        s.envelope_l2_linear,
    );
    if let Some(rows) = &s.expansion {
        for r in rows {
            out.push_str(&format!(
                "expansion eps {}: defect {:+.5}, with log 2pi term {:+.5}\n",
                r.eps, r.defect, r.defect_corrected
            ));
        }
    }
    out
}

/// Writes `records.csv` and `summary.json` (plus `expansion.csv` in
/// expansion mode) into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    write_records_csv(&outcome.records, fs::File::create(dir.join("records.csv"))?)?;
    let json = serde_json::to_string_pretty(&outcome.summary).map_err(otrates_core::Error::from)?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    if let Some(rows) = &outcome.summary.expansion {
        let mut w = csv::Writer::from_path(dir.join("expansion.csv")).map_err(otrates_core::Error::from)?;
        for r in rows {
            w.serialize(r).map_err(otrates_core::Error::from)?;
        }
        w.flush()?;
    }
    Ok(())
}
