//! JSON reports and manifests, plus aligned text summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub role: String,
    pub file: String,
    pub shape: [usize; 3],
}

/// Written next to the tensors of a generated problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub kind: String,
    pub n: usize,
    pub d: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub band: usize,
    pub xtrue: String,
    pub regularizer: String,
    pub noise: f64,
    pub seeds: Vec<u64>,
    pub files: Vec<FileEntry>,
}

/// Written next to decomposition factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorManifest {
    pub decomposition: String,
    pub inputs: Vec<FileEntry>,
    pub factors: Vec<FileEntry>,
    /// Per-Fourier-slice `r_i` (T-GSVD only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ranks: Option<Vec<usize>>,
    /// Per-Fourier-slice `p_i` (T-GSVD only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub splits: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub uniform: Option<bool>,
    /// Named residuals, each relative to the stated scale.
    pub residuals: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub imag_residue: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub mean_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shapes {
    pub a: [usize; 3],
    pub l: [usize; 3],
    pub b: [usize; 3],
}

/// Outcome of a Tikhonov solve over one or more noise seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub shapes: Shapes,
    pub regularizer: String,
    /// The `μ` used, or the geometric mean of the per-seed values.
    pub mu: f64,
    /// Per-seed `μ` chosen by the discrepancy principle.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_per_seed: Option<Vec<f64>>,
    pub noise: f64,
    /// Noise seeds, empty when a single right-hand side was supplied.
    pub seeds: Vec<u64>,
    /// Relative error per seed, when the exact solution is known.
    pub errors: Vec<f64>,
    pub mean_error: Option<f64>,
    /// `‖(Aᵀ*A + μ⁻¹Lᵀ*L) * X - Aᵀ*B‖_F / ‖Aᵀ*B‖_F` per seed.
    pub normal_residuals: Vec<f64>,
    pub max_normal_residual: f64,
    /// Largest `‖X_gsvd - X_normal‖_F / ‖X_normal‖_F` when the normal-equation
    /// oracle was run.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<Vec<SweepPoint>>,
    pub passed: bool,
    pub wall_time_s: f64,
}

impl SolveReport {
    /// The report with timing removed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_s: 0.0, ..self.clone() }
    }
}

pub fn solve_summary(r: &SolveReport) -> String {
    let mut s = String::new();
    let shape = |d: [usize; 3]| format!("{}x{}x{}", d[0], d[1], d[2]);
    let _ = writeln!(s, "{:<24}{}", "operator", shape(r.shapes.a));
    let _ = writeln!(s, "{:<24}{} ({})", "regularizer", shape(r.shapes.l), r.regularizer);
    let _ = writeln!(s, "{:<24}{}", "data", shape(r.shapes.b));
    let _ = writeln!(s, "{:<24}{:.4e}", "mu", r.mu);
    let _ = writeln!(s, "{:<24}{:.1e}", "noise level", r.noise);
    if let Some(sweep) = &r.sweep {
        let _ = writeln!(s, "\n{:>14}  {:>12}", "mu", "mean error");
        for p in sweep {
            let mark = if p.mu == r.mu { "  <" } else { "" };
            let _ = writeln!(s, "{:>14.4e}  {:>12.6}{mark}", p.mu, p.mean_error);
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "{:>8}  {:>12}  {:>12}  {:>14}", "seed", "mu", "rel. error", "normal resid.");
    for (k, res) in r.normal_residuals.iter().enumerate() {
        let seed = r.seeds.get(k).map_or("-".to_string(), |s| s.to_string());
        let mu = r.mu_per_seed.as_ref().and_then(|m| m.get(k)).copied().unwrap_or(r.mu);
        let e = r.errors.get(k).map_or("-".to_string(), |e| format!("{e:.6}"));
        let _ = writeln!(s, "{seed:>8}  {mu:>12.4e}  {e:>12}  {res:>14.3e}");
    }
    if let Some(m) = r.mean_error {
        let _ = writeln!(s, "{:<24}{:.6}", "mean relative error", m);
    }
    let _ = writeln!(s, "{:<24}{:.3e}", "max normal residual", r.max_normal_residual);
    if let Some(d) = r.oracle_deviation {
        let _ = writeln!(s, "{:<24}{:.3e}", "oracle deviation", d);
    }
    let _ = writeln!(s, "{:<24}{}", "checks", if r.passed { "pass" } else { "FAIL" });
    let _ = writeln!(s, "{:<24}{:.2} s", "wall time", r.wall_time_s);
    s
}

pub fn factor_summary(m: &FactorManifest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<24}{}", "decomposition", m.decomposition);
    for f in &m.factors {
        let _ = writeln!(s, "{:<24}{}x{}x{}  {}", f.role, f.shape[0], f.shape[1], f.shape[2], f.file);
    }
    if let Some(u) = m.uniform {
        let _ = writeln!(s, "{:<24}{}", "uniform structure", u);
    }
    for (k, v) in &m.residuals {
        let tol = m.tolerances.get(k).map(|t| format!("  (tol {t:.1e})")).unwrap_or_default();
        let _ = writeln!(s, "{k:<24}{v:.3e}{tol}");
    }
    let _ = writeln!(s, "{:<24}{:.3e}", "imaginary residue", m.imag_residue);
    let _ = writeln!(s, "{:<24}{}", "checks", if m.passed { "pass" } else { "FAIL" });
    s
}
