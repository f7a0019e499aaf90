use std::fs;
use std::path::Path;

use super::config::{RunConfig, SolveMethod, StartConfig};
use super::record::{self, FountainTable, ResultRecord, SolutionRecord};
use crate::error::{Error, Result};
use crate::fountain::fountain_table;
use crate::lattice::{LatticeSeq, ProblemSpec, Window};
use crate::nonlinearity::{check_coefficients, check_hypothesis, inconsistency_demo, Condition, HypothesisReport, Verdict};
use crate::solver::{acceptance_check, lambda_continuation, mountain_pass, newton_solve, solution_sequence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_REFUTED: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// What a subcommand produced: the record plus a short human summary.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub record: ResultRecord,
    pub summary: Vec<String>,
}

impl CommandOutput {
    fn new(command: &str, cfg: &RunConfig) -> Self {
        CommandOutput { record: ResultRecord::new(command, cfg), summary: Vec::new() }
    }

    fn exit(mut self, code: i32) -> Self {
        self.record.exit_code = code;
        self
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn code(&self) -> i32 {
        self.record.exit_code
    }
}

fn hypothesis_reports(cfg: &RunConfig, spec: &ProblemSpec, conditions: &[Condition]) -> Result<Vec<HypothesisReport>> {
    conditions
        .iter()
        .map(|&c| match c {
            Condition::B => Ok(check_coefficients(&spec.coeffs)),
            _ => check_hypothesis(&spec.nonlinearity, c, &cfg.task.plan),
        })
        .collect()
}

pub fn cmd_check(cfg: &RunConfig) -> Result<CommandOutput> {
    let spec = cfg.problem_spec()?;
    let required = cfg.required_conditions()?;
    let reports = hypothesis_reports(cfg, &spec, &Condition::ALL)?;
    let mut out = CommandOutput::new("check", cfg);
    let mut refuted = false;
    let mut inconclusive = false;
    for r in &reports {
        let req = required.contains(&r.condition);
        out.say(format!("{:<4} {:<21}{}", r.condition, r.verdict.label(), if req { " (required)" } else { "" }));
        if req {
            refuted |= r.verdict.is_refuted();
            inconclusive |= r.verdict == Verdict::Inconclusive;
        }
    }
    out.record.hypotheses = reports;
    let code = if refuted {
        EXIT_REFUTED
    } else if inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    Ok(out.exit(code))
}

fn start_profile(start: &StartConfig, window: Window) -> Result<LatticeSeq> {
    match start {
        StartConfig::Spike { site, amplitude } => {
            if !window.contains(*site) {
                return Err(Error::Config(format!("task.start.site: {site} outside the window")));
            }
            Ok(LatticeSeq::spike(window, *site, *amplitude))
        }
        StartConfig::Values { first, values } => {
            let mut v = vec![0.0; window.len()];
            for (i, x) in values.iter().enumerate() {
                let k = first + i as i64;
                let o = window.offset(k).ok_or_else(|| Error::Config(format!("task.start.values: site {k} outside the window")))?;
                v[o] = *x;
            }
            LatticeSeq::new(window, v).map_err(|e| Error::Config(format!("task.start.values: {e}")))
        }
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<CommandOutput> {
    let spec = cfg.problem_spec()?;
    let start = start_profile(&cfg.task.start, spec.window())?;
    let mut out = CommandOutput::new("solve", cfg);
    let attempt = match cfg.task.method {
        SolveMethod::Newton => newton_solve(&start, &spec, &cfg.solver),
        SolveMethod::MountainPass => mountain_pass(&LatticeSeq::zeros(spec.window()), &start, &spec, &cfg.solver),
    };
    let res = match attempt {
        Ok(res) => res,
        Err(e @ (Error::NoPass(_) | Error::PathCollapse)) => {
            out.say(format!("no critical point: {e}"));
            out.record.notes.push(e.to_string());
            return Ok(out.exit(EXIT_PARTIAL));
        }
        Err(e) => return Err(e),
    };
    let check = acceptance_check(&res, &spec, &cfg.solver)?;
    let sol = SolutionRecord::new(1, spec.lambda, &res, Some(&check));
    out.say(format!(
        "J = {}  residual = {:e}  tail = {:e}  drift = {:e}  accepted = {}",
        sol.energy, sol.residual_inf_norm, sol.tail_mass, check.drift, check.accepted
    ));
    let code = if res.converged && check.accepted { EXIT_OK } else { EXIT_PARTIAL };
    out.record.solutions.push(sol);
    Ok(out.exit(code))
}

pub fn cmd_sequence(cfg: &RunConfig) -> Result<CommandOutput> {
    let spec = cfg.problem_spec()?;
    let mut out = CommandOutput::new("sequence", cfg);
    let n_target = cfg.task.n_target;
    if n_target == 0 {
        out.say("n_target = 0: nothing to compute");
        return Ok(out.exit(EXIT_OK));
    }
    let gate = hypothesis_reports(cfg, &spec, &[Condition::H1, Condition::H2, Condition::H3, Condition::H4, Condition::H5])?;
    let refused: Vec<String> = gate.iter().filter(|r| r.verdict.is_refuted()).map(|r| r.condition.to_string()).collect();
    out.record.hypotheses = gate;
    if !refused.is_empty() {
        let msg = format!(
            "refusing: {} refuted for {}; run `check` with this config for witnesses",
            refused.join(", "),
            spec.nonlinearity.label()
        );
        out.say(msg.clone());
        out.record.notes.push(msg);
        return Ok(out.exit(EXIT_REFUTED));
    }
    let seq = solution_sequence(&spec, &cfg.solver, n_target)?;
    for (i, res) in seq.solutions.iter().enumerate() {
        let check = acceptance_check(res, &spec, &cfg.solver)?;
        let sol = SolutionRecord::new(i + 1, spec.lambda, res, Some(&check));
        out.say(format!("u_{}: J = {}  residual = {:e}  tail = {:e}", i + 1, sol.energy, sol.residual_inf_norm, sol.tail_mass));
        out.record.solutions.push(sol);
    }
    out.record.notes.extend(seq.warning.clone());
    if seq.complete {
        Ok(out.exit(EXIT_OK))
    } else {
        out.say(format!("partial: found {} of {n_target} solutions", seq.solutions.len()));
        Ok(out.exit(EXIT_PARTIAL))
    }
}

fn lambdas(cfg: &RunConfig) -> Vec<f64> {
    if cfg.task.lambdas.is_empty() {
        vec![cfg.problem.lambda]
    } else {
        cfg.task.lambdas.clone()
    }
}

pub fn cmd_fountain(cfg: &RunConfig) -> Result<CommandOutput> {
    let spec = cfg.problem_spec()?;
    let mut out = CommandOutput::new("fountain", cfg);
    let h2 = check_hypothesis(&spec.nonlinearity, Condition::H2, &cfg.task.plan)?;
    let q = cfg.task.q.or(h2.constants.get("q").copied()).unwrap_or_else(|| spec.nonlinearity.growth_exponent());
    if !(q > spec.p) {
        return Err(Error::Config(format!("task.q: must exceed p = {}, got {q}", spec.p)));
    }
    let d = match cfg.task.d.or(h2.constants.get("d").copied()) {
        Some(d) if d > 0.0 && d.is_finite() => d,
        Some(d) if d < 0.0 || !d.is_finite() => return Err(Error::Config(format!("task.d: must be > 0, got {d}"))),
        _ => {
            out.record.notes.push("growth constant d estimated as 0; using d = 1".into());
            1.0
        }
    };
    if h2.verdict.is_refuted() {
        out.record.notes.push(format!("(H2) refuted on samples; table computed with d = {d}, q = {q} anyway"));
    }
    out.record.hypotheses.push(h2);
    let mut violated = false;
    let mut all_infeasible = false;
    for lambda in lambdas(cfg) {
        let rows = fountain_table(&spec.with_lambda(lambda)?, d, q, &cfg.task.fountain)?;
        let feasible = rows.iter().filter(|r| r.r_n.is_some()).count();
        let vi: usize = rows.iter().filter_map(|r| r.condition_i.as_ref()).map(|c| c.violations).sum();
        let vii: usize = rows.iter().filter_map(|r| r.condition_ii.as_ref()).map(|c| c.violations).sum();
        out.say(format!(
            "lambda = {lambda}: {feasible} of {} n feasible, {vi} condition (i) and {vii} condition (ii) violations",
            rows.len()
        ));
        if feasible == 0 {
            all_infeasible = true;
            let msg = format!("lambda = {lambda}: infeasible for every n <= 2K+1; increase K or decrease lambda*d");
            out.say(msg.clone());
            out.record.notes.push(msg);
        }
        violated |= vi + vii > 0;
        out.record.fountain.push(FountainTable { lambda, d, q, rows });
    }
    let code = if violated {
        EXIT_REFUTED
    } else if all_infeasible {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    };
    Ok(out.exit(code))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<CommandOutput> {
    let spec = cfg.problem_spec()?;
    if cfg.task.lambdas.is_empty() {
        return Err(Error::Config("task.lambdas: sweep needs at least one value".into()));
    }
    let start = start_profile(&cfg.task.start, spec.window())?;
    let mut out = CommandOutput::new("sweep", cfg);
    let steps = lambda_continuation(&start, &spec, &cfg.task.lambdas, &cfg.solver)?;
    let mut all = true;
    for (i, st) in steps.iter().enumerate() {
        all &= st.result.converged;
        out.say(format!(
            "lambda = {}: J = {}  residual = {:e}  converged = {}",
            st.lambda, st.result.energy, st.result.residual_inf_norm, st.result.converged
        ));
        out.record.solutions.push(SolutionRecord::new(i + 1, st.lambda, &st.result, None));
    }
    Ok(out.exit(if all { EXIT_OK } else { EXIT_PARTIAL }))
}

pub fn cmd_demo_inconsistency(cfg: &RunConfig) -> Result<CommandOutput> {
    let nl = cfg.nonlinearity_spec()?;
    let t = &cfg.task;
    let rep = inconsistency_demo(&nl, t.t, t.t1, &t.k_list).map_err(|e| match e {
        Error::Usage(m) => Error::Config(format!("task: {m}")),
        e => e,
    })?;
    let mut out = CommandOutput::new("demo-inconsistency", cfg);
    let code = if let Some(w) = &rep.violation {
        out.say(format!("precondition |f(k,t)| >= 1 for |t| >= T1 fails at {w:?}"));
        EXIT_REFUTED
    } else {
        for r in &rep.rows {
            out.say(format!("K = {}: S_K = {}  S_K/(2K+1) = {}", r.k, r.partial_sum, r.mean));
        }
        EXIT_OK
    };
    out.record.inconsistency = Some(rep);
    Ok(out.exit(code))
}

/// Writes the JSON record and the CSV tables of `out` into `dir`.
pub fn write_outputs(out: &CommandOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let rec = &out.record;
    let fmt = &rec.config.output;
    let stem = rec.command.replace('-', "_");
    if fmt.json() {
        fs::write(dir.join(format!("{stem}.json")), rec.to_json())?;
    }
    if !fmt.csv() {
        return Ok(());
    }
    if !rec.hypotheses.is_empty() || rec.command == "check" {
        record::write_hypotheses_csv(&dir.join(format!("{stem}_hypotheses.csv")), &rec.hypotheses)?;
    }
    if matches!(rec.command.as_str(), "solve" | "sequence" | "sweep") {
        record::write_summary_csv(&dir.join(format!("{stem}_summary.csv")), &rec.solutions)?;
        for s in &rec.solutions {
            record::write_profile_csv(&dir.join(format!("{stem}_u{}.csv", s.index)), &s.rows)?;
        }
    }
    for (i, t) in rec.fountain.iter().enumerate() {
        record::write_fountain_csv(&dir.join(format!("fountain_{}.csv", i + 1)), t)?;
    }
    if let Some(rep) = &rec.inconsistency {
        record::write_inconsistency_csv(&dir.join(format!("{stem}.csv")), rep)?;
    }
    Ok(())
}
