use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fountain::FountainConfig;
use crate::lattice::{CoefficientField, ProblemSpec, Profile, Window};
use crate::nonlinearity::{Condition, NonlinearitySpec, SamplingPlan, WeightConvention};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    pub lambda: f64,
    /// Window half-width `K`.
    #[serde(rename = "K", alias = "k")]
    pub half_width: usize,
    #[serde(default = "unit_profile")]
    pub a: Profile,
    #[serde(default = "unit_profile")]
    pub b: Profile,
    /// Floor of `b`; the window minimum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
}

fn unit_profile() -> Profile {
    Profile::Constant { value: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    ExampleLog {
        mu: f64,
        nu: f64,
        #[serde(default)]
        weight: WeightConvention,
    },
    PurePower {
        q: f64,
        #[serde(default = "one")]
        c: f64,
    },
    /// `f ≡ 0`.
    Zero,
    /// `c φ_p(t)`.
    PPower {
        #[serde(default = "one")]
        c: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// How the single-solve and sweep subcommands pick their start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartConfig {
    Spike { site: i64, amplitude: f64 },
    Values { first: i64, values: Vec<f64> },
}

impl Default for StartConfig {
    fn default() -> Self {
        StartConfig::Spike { site: 0, amplitude: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Newton,
    /// Mountain pass from 0 to the start profile.
    #[default]
    MountainPass,
}

/// Subcommand-specific settings; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    /// Conditions whose refutation fails `check`.
    pub required: Vec<String>,
    pub plan: SamplingPlan,
    pub method: SolveMethod,
    pub start: StartConfig,
    pub n_target: usize,
    /// λ values for `sweep` and `fountain`; empty means the problem λ only.
    pub lambdas: Vec<f64>,
    /// Overrides for the (H2) constants used by `fountain`.
    pub d: Option<f64>,
    pub q: Option<f64>,
    pub fountain: FountainConfig,
    /// Amplitude `T` and threshold `T1` of the inconsistency demo.
    pub t: f64,
    pub t1: f64,
    pub k_list: Vec<i64>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            required: ["H1", "H2", "H3", "H4", "H5"].map(String::from).to_vec(),
            plan: SamplingPlan::default(),
            method: SolveMethod::default(),
            start: StartConfig::default(),
            n_target: 3,
            lambdas: Vec::new(),
            d: None,
            q: None,
            fountain: FountainConfig::default(),
            t: 2.0,
            t1: 1.0,
            k_list: vec![10, 100, 1000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Any of `json` (full record) and `csv` (tables and plot data).
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), formats: vec!["json".into(), "csv".into()] }
    }
}

impl OutputConfig {
    pub fn json(&self) -> bool {
        self.formats.iter().any(|f| f == "json")
    }

    pub fn csv(&self) -> bool {
        self.formats.iter().any(|f| f == "csv")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses TOML text; errors carry the line and key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Parameter checks done before any computation.
    pub fn validate(&self) -> Result<()> {
        let pr = &self.problem;
        let bad = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        if !(pr.p > 1.0 && pr.p.is_finite()) {
            return bad("problem.p", format!("must be > 1, got {}", pr.p));
        }
        if !(pr.lambda > 0.0 && pr.lambda.is_finite()) {
            return bad("problem.lambda", format!("must be > 0, got {}", pr.lambda));
        }
        if pr.half_width < 1 {
            return bad("problem.K", "must be >= 1".into());
        }
        match &self.nonlinearity {
            NonlinearityConfig::ExampleLog { mu, nu, .. } => {
                if !(*mu > 1.0) {
                    return bad("nonlinearity.mu", format!("must be > 1, got {mu}"));
                }
                if !(*nu >= 1.0) {
                    return bad("nonlinearity.nu", format!("must be >= 1, got {nu}"));
                }
            }
            NonlinearityConfig::PurePower { q, c } => {
                if !(*q > pr.p) {
                    return bad("nonlinearity.q", format!("must exceed p = {}, got {q}", pr.p));
                }
                if !(*c > 0.0) {
                    return bad("nonlinearity.c", format!("must be > 0, got {c}"));
                }
            }
            NonlinearityConfig::Zero | NonlinearityConfig::PPower { .. } => {}
        }
        if let Some(l) = self.task.lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return bad("task.lambdas", format!("entries must be > 0, got {l}"));
        }
        if let Err(e) = self.required_conditions() {
            return bad("task.required", e.to_string());
        }
        if self.task.fountain.samples == 0 {
            return bad("task.fountain.samples", "must be >= 1".into());
        }
        if let Some(f) = self.output.formats.iter().find(|f| !matches!(f.as_str(), "json" | "csv")) {
            return bad("output.formats", format!("unknown format '{f}' (json, csv)"));
        }
        self.solver.validate().map_err(|e| Error::Config(format!("solver: {e}")))?;
        self.problem_spec().map(|_| ()).map_err(|e| Error::Config(format!("problem: {e}")))
    }

    pub fn nonlinearity_spec(&self) -> Result<NonlinearitySpec> {
        let p = self.problem.p;
        match &self.nonlinearity {
            NonlinearityConfig::ExampleLog { mu, nu, weight } => NonlinearitySpec::example_log(p, *mu, *nu, *weight),
            NonlinearityConfig::PurePower { q, c } => NonlinearitySpec::pure_power(p, *q, *c),
            NonlinearityConfig::Zero => NonlinearitySpec::zero(p),
            NonlinearityConfig::PPower { c } => NonlinearitySpec::p_power(p, *c),
        }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let pr = &self.problem;
        let window = Window::new(pr.half_width)?;
        let coeffs = CoefficientField::new(window, pr.a.clone(), pr.b.clone(), pr.b0)?;
        ProblemSpec::new(pr.p, pr.lambda, coeffs, self.nonlinearity_spec()?)
    }

    pub fn required_conditions(&self) -> Result<Vec<Condition>> {
        self.task.required.iter().map(|s| s.parse()).collect()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.solver.seed = seed;
        self.task.fountain.seed = seed;
        self
    }
}
