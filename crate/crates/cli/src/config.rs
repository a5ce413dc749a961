use std::path::{Path, PathBuf};

use otrates_core::measures::{default_points_per_axis, MeasureSpec, DEFAULT_TRUNC_SIGMAS};
use otrates_core::metrics::default_ball_points;
use otrates_core::ratelab::{default_gaussian_eps_grid, default_sinkhorn_eps_grid, geometric_grid};
use otrates_core::sinkhorn::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Gaussian,
    Sinkhorn,
    Expansion,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Gaussian => "gaussian",
            Mode::Sinkhorn => "sinkhorn",
            Mode::Expansion => "expansion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub points_per_axis: Option<usize>,
    #[serde(default = "default_trunc")]
    pub trunc_sigmas: f64,
}

fn default_trunc() -> f64 {
    DEFAULT_TRUNC_SIGMAS
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            points_per_axis: None,
            trunc_sigmas: DEFAULT_TRUNC_SIGMAS,
        }
    }
}

/// Experiment description as read from a JSON file. Everything but the two
/// measures and the radius has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional here; the subcommand supplies it and must agree if both are set.
    pub mode: Option<Mode>,
    pub source: MeasureSpec,
    pub target: MeasureSpec,
    pub radius: f64,
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub discretization: Discretization,
    pub ball_points: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Output directory, used when `--out` is not given.
    pub output: Option<PathBuf>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub mode: Mode,
    pub source: MeasureSpec,
    pub target: MeasureSpec,
    pub radius: f64,
    pub eps_grid: Vec<f64>,
    pub points_per_axis: usize,
    pub trunc_sigmas: f64,
    pub ball_points: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl ResolvedConfig {
    pub fn dim(&self) -> usize {
        self.source.dim()
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the config against `mode` and fills in defaults; `quick`
    /// shrinks grids and ε ranges for smoke runs.
    pub fn resolve(&self, mode: Mode, quick: bool) -> Result<ResolvedConfig, CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(invalid(
                    "mode",
                    format!("config says {}, command is {}", m.as_str(), mode.as_str()),
                ));
            }
        }
        let d = self.source.dim();
        if self.target.dim() != d {
            return Err(invalid(
                "target",
                format!("dimension {} differs from source dimension {d}", self.target.dim()),
            ));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid("radius", "must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be positive"));
        }
        let trunc = self.discretization.trunc_sigmas;
        if !(3.0..=10.0).contains(&trunc) {
            return Err(invalid("discretization.trunc_sigmas", "must lie in [3, 10]"));
        }

        let (src, tgt) = (self.source.as_gaussian(), self.target.as_gaussian());
        let eps_grid = match &self.eps_grid {
            Some(g) => {
                if g.is_empty() {
                    return Err(invalid("eps_grid", "must not be empty"));
                }
                if g.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                    return Err(invalid("eps_grid", "values must be positive"));
                }
                if g.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(invalid("eps_grid", "must be strictly decreasing"));
                }
                g.clone()
            }
            None => match (mode, quick) {
                (Mode::Gaussian, false) => default_gaussian_eps_grid(),
                (Mode::Gaussian, true) => geometric_grid(1.0, 1e-3, 6).expect("constant grid"),
                (_, false) => default_sinkhorn_eps_grid(src, tgt),
                (_, true) => {
                    let full = default_sinkhorn_eps_grid(src, tgt);
                    geometric_grid(1.0, *full.last().expect("nonempty"), 4).expect("positive grid")
                }
            },
        };

        let mut points = self
            .discretization
            .points_per_axis
            .unwrap_or_else(|| default_points_per_axis(d));
        let mut ball = self.ball_points.unwrap_or_else(|| default_ball_points(d));
        if quick {
            points = points.min(if d == 1 { 101 } else { 21 });
            ball = ball.min(if d == 1 { 51 } else { 21 });
        }
        if points < 3 || points % 2 == 0 {
            return Err(invalid("discretization.points_per_axis", "must be odd and at least 3"));
        }
        if ball == 0 {
            return Err(invalid("ball_points", "must be positive"));
        }

        if mode != Mode::Gaussian {
            // Keep the evaluation ball well inside the source grid's box.
            let half_width = trunc * src.covariance().min_eigenvalue().sqrt();
            if self.radius > half_width / 3.0 + 1e-12 {
                return Err(invalid(
                    "radius",
                    format!(
                        "must be at most a third of the source grid half-width ({:.4})",
                        half_width / 3.0
                    ),
                ));
            }
        }

        Ok(ResolvedConfig {
            mode,
            source: self.source.clone(),
            target: self.target.clone(),
            radius: self.radius,
            eps_grid,
            points_per_axis: points,
            trunc_sigmas: trunc,
            ball_points: ball,
            tol: self.tol,
            max_iter: self.max_iter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "source": {"type": "gaussian", "dim": 1, "covariance": [[1.0]]},
        "target": {"type": "gaussian", "dim": 1, "covariance": [[2.0]]},
        "radius": 1.0
    }"#;

    fn with(extra: &str) -> String {
        BASE.replacen("\"radius\": 1.0", &format!("\"radius\": 1.0, {extra}"), 1)
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        let g = c.resolve(Mode::Gaussian, false).unwrap();
        assert_eq!(g.eps_grid.len(), 12);
        assert_eq!(g.points_per_axis, 401);
        assert_eq!(g.ball_points, 101);
        let s = c.resolve(Mode::Sinkhorn, true).unwrap();
        assert_eq!((s.points_per_axis, s.ball_points, s.eps_grid.len()), (101, 51, 4));
    }

    #[test]
    fn rejects_bad_fields() {
        let cases = [
            (with(r#""eps_grid": [0.1, 0.5]"#), "eps_grid"),
            (with(r#""eps_grid": [1.0, -0.5]"#), "eps_grid"),
            (with(r#""discretization": {"points_per_axis": 100}"#), "points_per_axis"),
            (with(r#""mode": "sinkhorn""#), "mode"),
            (with(r#""tol": 0.0"#), "tol"),
        ];
        for (text, field) in cases {
            let err = ExperimentConfig::from_json(&text)
                .unwrap()
                .resolve(Mode::Gaussian, false)
                .unwrap_err();
            assert!(err.to_string().contains(field), "{err}");
        }
        let big = BASE.replace("\"radius\": 1.0", "\"radius\": 2.5");
        let err = ExperimentConfig::from_json(&big)
            .unwrap()
            .resolve(Mode::Sinkhorn, false)
            .unwrap_err();
        assert!(err.to_string().contains("radius"));
    }

    #[test]
    fn malformed_json_names_field() {
        let err = ExperimentConfig::from_json(r#"{"source": {"type": "gaussian", "dim": 1, "covariance": [[1.0]]}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("target"), "{err}");
        let err = ExperimentConfig::from_json(&with(r#""radiu": 2"#)).unwrap_err();
        assert!(err.to_string().contains("radiu"), "{err}");
    }
}
