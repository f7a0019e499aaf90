//! Persisted results. JSON records hold the config echo and every number;
//! floats are written in shortest round-trip form, so a reload is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::fountain::FountainData;
use crate::lattice::{LatticeSeq, SolveResult, Window};
use crate::nonlinearity::{HypothesisReport, InconsistencyReport};
use crate::solver::AcceptanceCheck;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub index: usize,
    pub lambda: f64,
    #[serde(rename = "K")]
    pub half_width: usize,
    pub energy: f64,
    pub residual_inf_norm: f64,
    pub cerami_metric: f64,
    pub tail_mass: f64,
    pub tail_threshold: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Change under re-solve on the grown window.
    pub drift: Option<f64>,
    pub accepted: Option<bool>,
    /// `(k, u(k))` over the window.
    pub rows: Vec<(i64, f64)>,
}

impl SolutionRecord {
    pub fn new(index: usize, lambda: f64, res: &SolveResult, check: Option<&AcceptanceCheck>) -> Self {
        SolutionRecord {
            index,
            lambda,
            half_width: res.u.window().half_width(),
            energy: res.energy,
            residual_inf_norm: res.residual_inf_norm,
            cerami_metric: res.cerami_metric,
            tail_mass: res.tail_mass,
            tail_threshold: res.tail_threshold,
            iterations: res.iterations,
            converged: res.converged,
            drift: check.map(|c| c.drift),
            accepted: check.map(|c| c.accepted),
            rows: res.u.iter().collect(),
        }
    }

    pub fn profile(&self) -> Result<LatticeSeq> {
        let window = Window::new(self.half_width)?;
        let sites: Vec<i64> = window.sites().collect();
        let got: Vec<i64> = self.rows.iter().map(|r| r.0).collect();
        if sites != got {
            return Err(Error::Config(format!("solution {}: rows do not cover -K..=K", self.index)));
        }
        LatticeSeq::new(window, self.rows.iter().map(|r| r.1).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FountainTable {
    pub lambda: f64,
    pub d: f64,
    pub q: f64,
    pub rows: Vec<FountainData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub exit_code: i32,
    #[serde(default)]
    pub solutions: Vec<SolutionRecord>,
    #[serde(default)]
    pub hypotheses: Vec<HypothesisReport>,
    #[serde(default)]
    pub fountain: Vec<FountainTable>,
    #[serde(default)]
    pub inconsistency: Option<InconsistencyReport>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ResultRecord {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config: config.clone(),
            exit_code: 0,
            solutions: Vec::new(),
            hypotheses: Vec::new(),
            fountain: Vec::new(),
            inconsistency: None,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: ResultRecord = serde_json::from_str(text).map_err(|e| Error::Config(format!("record: {e}")))?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("record: unsupported schema_version {}", rec.schema_version)));
        }
        Ok(rec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Recomputes every solution's scalars from its embedded profile and the
    /// embedded config; returns the largest relative discrepancy.
    pub fn reverify(&self) -> Result<f64> {
        let base = self.config.problem_spec()?;
        let mut worst = 0.0_f64;
        for s in &self.solutions {
            let u = s.profile()?;
            let spec = base.on_window(u.window())?.with_lambda(s.lambda)?;
            let fresh = SolveResult::evaluate(u, &spec, s.iterations, self.config.solver.residual_tol, Vec::new())?;
            for (a, b) in [
                (fresh.energy, s.energy),
                (fresh.residual_inf_norm, s.residual_inf_norm),
                (fresh.cerami_metric, s.cerami_metric),
                (fresh.tail_mass, s.tail_mass),
            ] {
                worst = worst.max(rel_diff(a, b));
            }
        }
        Ok(worst)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Plain decimal in the readable range, exponent form outside it; both are
/// shortest round-trip representations.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Two-column plot data `k,u`.
pub fn write_profile_csv(path: &Path, rows: &[(i64, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["k", "u"]).map_err(csv_err)?;
    for (k, u) in rows {
        w.write_record([k.to_string(), fmt_f64(*u)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(path: &Path, sols: &[SolutionRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n", "lambda", "K", "J", "residual_inf_norm", "cerami_metric", "tail_mass", "drift", "accepted"])
        .map_err(csv_err)?;
    for s in sols {
        w.write_record([
            s.index.to_string(),
            fmt_f64(s.lambda),
            s.half_width.to_string(),
            fmt_f64(s.energy),
            fmt_f64(s.residual_inf_norm),
            fmt_f64(s.cerami_metric),
            fmt_f64(s.tail_mass),
            opt(s.drift),
            s.accepted.map(|a| a.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_hypotheses_csv(path: &Path, reports: &[HypothesisReport]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["condition", "verdict", "witness", "constants", "note"]).map_err(csv_err)?;
    for r in reports {
        let witness = match &r.verdict {
            crate::nonlinearity::Verdict::Refuted { witness } => serde_json::to_string(witness).unwrap_or_default(),
            _ => String::new(),
        };
        let constants: Vec<String> = r.constants.iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
        w.write_record([r.condition.to_string(), r.verdict.label().to_string(), witness, constants.join(";"), r.note.clone()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fountain_csv(path: &Path, table: &FountainTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "n",
        "beta_p",
        "beta_q",
        "r_n",
        "C_n",
        "h_n",
        "ln_T",
        "ln_rho_n",
        "a_n_bound",
        "min_J_Z_sphere",
        "max_J_over_rho_p_Y_sphere",
        "violations_i",
        "violations_ii",
        "note",
    ])
    .map_err(csv_err)?;
    for r in &table.rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.beta_p),
            fmt_f64(r.beta_q),
            r.r_n.map(fmt_f64).unwrap_or_else(|| "infeasible".into()),
            fmt_f64(r.c_n),
            r.h_n.to_string(),
            opt(r.ln_t),
            opt(r.ln_rho_n),
            opt(r.a_n_bound),
            opt(r.condition_i.as_ref().map(|c| c.min_energy)),
            opt(r.b_n_scaled),
            r.condition_i.as_ref().map(|c| c.violations.to_string()).unwrap_or_default(),
            r.condition_ii.as_ref().map(|c| c.violations.to_string()).unwrap_or_default(),
            r.note.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_inconsistency_csv(path: &Path, rep: &InconsistencyReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["K", "S_K", "S_K_over_2K_plus_1", "lower_bound_sum", "linear_certificate"]).map_err(csv_err)?;
    for r in &rep.rows {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.partial_sum),
            fmt_f64(r.mean),
            fmt_f64(r.lower_bound_sum),
            opt(r.linear_certificate),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
