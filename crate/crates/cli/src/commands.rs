use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use cvqnd::ensemble::{run_ensemble, EnsembleConfig};
use cvqnd::protocol::{
    outcome_grid, pm_distribution, residuals_from_trace, run_protocol, DistributionRoute, ProtocolParams, Residuals,
};
use cvqnd::state::Moments;
use cvqnd::verify::{cases, default_inputs, run_matrix};
use cvqnd::wigner::wigner;
use cvqnd::{SingleModeState, REFERENCE_HALF_WIDTH, REFERENCE_POINTS, VERIFY_HALF_WIDTH};
use serde::Serialize;

use crate::config::{GridSpec, RunConfig};
use crate::output::{write_json, Cell, Csv};

/// Failure classes, mapped to exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Threshold or numerical failure; exit 1.
    Failed(anyhow::Error),
    /// Malformed configuration or input; exit 2.
    Config(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Failed(_) => 1,
            Self::Config(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Failed(e) => write!(f, "failed: {e:#}"),
            Self::Config(e) => write!(f, "configuration error: {e:#}"),
        }
    }
}

type CmdResult = Result<(), CliError>;

fn config_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Config(e.into())
}

fn failed(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Failed(e.into())
}

pub fn default_run_grid() -> GridSpec {
    GridSpec::symmetric(REFERENCE_HALF_WIDTH, REFERENCE_POINTS)
}

pub fn default_wide_grid() -> GridSpec {
    GridSpec::symmetric(VERIFY_HALF_WIDTH, REFERENCE_POINTS)
}

fn prepare_out(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(config_err)
}

#[derive(Serialize)]
struct CaseIssue<'a> {
    input_label: &'a str,
    q: f64,
    x_m: f64,
    error: &'a str,
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    n_cases: usize,
    n_points: usize,
    x_min: f64,
    x_max: f64,
    threshold: f64,
    /// Over the cases that ran; `null` if none did.
    max_residual: Option<f64>,
    max_r7: Option<f64>,
    max_r11: Option<f64>,
    max_r12: Option<f64>,
    pass: bool,
    /// Cases that could not be evaluated.
    failures: Vec<CaseIssue<'a>>,
    /// Failed boundary or norm-drift checks in cases that still produced
    /// residuals.
    violations: Vec<CaseIssue<'a>>,
}

pub fn verify(cfg: &RunConfig) -> CmdResult {
    let spec = cfg.grid_or(default_wide_grid());
    let grid = spec.build().map_err(config_err)?;
    let v = &cfg.verify;
    let inputs = match &v.inputs {
        Some(list) => list.clone(),
        None => default_inputs(v.random_seed, v.random_superpositions),
    };
    if inputs.is_empty() {
        return Err(config_err(anyhow!("verify input list is empty")));
    }
    // inputs must be well-formed; whether the chosen grid resolves them is
    // part of what verify reports
    let check_grid = default_wide_grid().build().map_err(config_err)?;
    for input in &inputs {
        input.prepare(check_grid).with_context(|| format!("input {}", input.label())).map_err(config_err)?;
    }
    prepare_out(&cfg.out_dir)?;

    let rows = run_matrix(grid, &cases(&inputs, &v.q_values, &v.x_m_values));

    let mut csv = Csv::new(&["input_label", "q", "x_m", "r7", "r11", "r12", "n_points"]);
    for row in &rows {
        let (r7, r11, r12) = row.outcome.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |r| (r.r7, r.r11, r.r12));
        csv.row(&[
            Cell::S(&row.case.label),
            Cell::F(row.case.q),
            Cell::F(row.case.x_m),
            Cell::F(r7),
            Cell::F(r11),
            Cell::F(r12),
            Cell::U(row.n_points),
        ]);
    }
    csv.write(&cfg.out_dir.join("verify.csv")).map_err(config_err)?;

    let mut failures = Vec::new();
    let mut violations = Vec::new();
    for r in &rows {
        let at = |error| CaseIssue { input_label: &r.case.label, q: r.case.q, x_m: r.case.x_m, error };
        match &r.outcome {
            Err(e) => failures.push(at(e.as_str())),
            Ok(_) => violations.extend(r.violations.iter().map(|e| at(e.as_str()))),
        }
    }
    let ran: Vec<&Residuals> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let max_of = |f: fn(&Residuals) -> f64| (!ran.is_empty()).then(|| ran.iter().map(|r| f(r)).fold(0.0, f64::max));
    let max_residual = max_of(Residuals::max);
    let pass = rows.iter().all(|r| r.passes(v.threshold));
    let summary = VerifySummary {
        n_cases: rows.len(),
        n_points: grid.n_points(),
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        threshold: v.threshold,
        max_residual,
        max_r7: max_of(|r| r.r7),
        max_r11: max_of(|r| r.r11),
        max_r12: max_of(|r| r.r12),
        pass,
        failures,
        violations,
    };
    write_json(&cfg.out_dir.join("verify_summary.json"), &summary).map_err(config_err)?;

    let shown = max_residual.map_or("n/a".to_string(), |m| format!("{m:.3e}"));
    let flagged = rows.iter().filter(|r| !r.violations.is_empty()).count();
    println!(
        "verify: {} cases on [{}, {}] x {}, max residual {shown}, {} failed to run, {flagged} with failed checks, threshold {:.1e}: {}",
        rows.len(),
        grid.x_min(),
        grid.x_max(),
        grid.n_points(),
        summary.failures.len(),
        v.threshold,
        if pass { "PASS" } else { "FAIL" }
    );
    if pass {
        Ok(())
    } else {
        Err(failed(anyhow!("identity verification failed at threshold {:.1e}", v.threshold)))
    }
}

#[derive(Serialize)]
struct DistributionSummary {
    n_nodes: usize,
    total: f64,
    route_discrepancy: Option<f64>,
}

#[derive(Serialize)]
struct RunReport {
    input_label: String,
    q: f64,
    delta_x: f64,
    x_m: f64,
    feedback_shift: f64,
    density: f64,
    input: Moments,
    /// Normalized states after conditioning, feedback and squeezing.
    conditioned: Moments,
    feedback: Moments,
    output: Moments,
    r7: f64,
    r11: f64,
    r12: f64,
    distribution: Option<DistributionSummary>,
}

pub fn run(cfg: &RunConfig) -> CmdResult {
    let grid = cfg.grid_or(default_run_grid()).build().map_err(config_err)?;
    let params = ProtocolParams::new(cfg.q).map_err(config_err)?;
    let psi_in = cfg.input.prepare(grid).context("preparing input").map_err(config_err)?;
    prepare_out(&cfg.out_dir)?;

    let trace = run_protocol(&psi_in, cfg.q, cfg.x_m).map_err(failed)?;
    let res = residuals_from_trace(&trace, cfg.q).map_err(failed)?;
    let norm_moments = |s: &SingleModeState| s.normalized().and_then(|n| n.moments()).map_err(failed);

    let out = &trace.psi_out_normalized;
    let mut csv = Csv::new(&["x", "re", "im", "abs2"]);
    for (x, a) in grid.points().iter().zip(out.amplitudes()) {
        csv.floats(&[*x, a.re, a.im, a.norm_sqr()]);
    }
    csv.write(&cfg.out_dir.join("output_state.csv")).map_err(config_err)?;

    let distribution = if cfg.distribution {
        let xm = outcome_grid(&grid, cfg.q, cfg.outcome_nodes).map_err(failed)?;
        let dist = pm_distribution(&psi_in, cfg.q, &xm, DistributionRoute::Both).map_err(failed)?;
        let mut csv = Csv::new(&["x_m", "p_kraus", "p_meter"]);
        let (pk, pm) = (dist.kraus.as_deref().unwrap_or_default(), dist.meter.as_deref().unwrap_or_default());
        for ((x, a), b) in xm.iter().zip(pk).zip(pm) {
            csv.floats(&[*x, *a, *b]);
        }
        csv.write(&cfg.out_dir.join("distribution.csv")).map_err(config_err)?;
        Some(DistributionSummary { n_nodes: xm.len(), total: dist.total(), route_discrepancy: dist.route_discrepancy() })
    } else {
        None
    };

    if cfg.wigner {
        let w = &cfg.wigner_grid;
        let axis = cvqnd::QuadratureGrid::symmetric(w.half_width, w.points).map_err(config_err)?.points();
        for (name, state) in [("wigner_input.csv", &psi_in), ("wigner_output.csv", out)] {
            let table = wigner(state, &axis, &axis).map_err(failed)?;
            let mut csv = Csv::new(&["x", "p", "w"]);
            for (i, x) in axis.iter().enumerate() {
                for (j, p) in axis.iter().enumerate() {
                    csv.floats(&[*x, *p, table[(i, j)]]);
                }
            }
            csv.write(&cfg.out_dir.join(name)).map_err(config_err)?;
        }
    }

    let report = RunReport {
        input_label: cfg.input.label(),
        q: cfg.q,
        delta_x: params.delta_x(),
        x_m: cfg.x_m,
        feedback_shift: cvqnd::protocol::feedback_shift(cfg.q, cfg.x_m).map_err(failed)?,
        density: trace.density,
        input: psi_in.moments().map_err(failed)?,
        conditioned: norm_moments(&trace.psi_bs)?,
        feedback: norm_moments(&trace.psi_fb)?,
        output: out.moments().map_err(failed)?,
        r7: res.r7,
        r11: res.r11,
        r12: res.r12,
        distribution,
    };
    write_json(&cfg.out_dir.join("moments.json"), &report).map_err(config_err)?;
    println!(
        "run: {} q={} x_m={} -> <x>_out={:.6} Var(x)_out={:.6} P(x_m)={:.6}",
        report.input_label, cfg.q, cfg.x_m, report.output.mean_x, report.output.var_x, report.density
    );
    Ok(())
}

pub fn ensemble(cfg: &RunConfig) -> CmdResult {
    let seed = cfg.seed.ok_or_else(|| config_err(anyhow!("ensemble needs an explicit seed (--seed or \"seed\")")))?;
    let grid = cfg.grid_or(default_wide_grid()).build().map_err(config_err)?;
    cfg.input.prepare(grid).context("preparing input").map_err(config_err)?;
    prepare_out(&cfg.out_dir)?;

    let ens = EnsembleConfig {
        grid,
        input: cfg.input.clone(),
        q: cfg.q,
        n_trajectories: cfg.n_trajectories,
        seed,
        outcome_nodes: cfg.outcome_nodes,
        photon_cutoff: cfg.photon_cutoff,
    };
    let report = run_ensemble(&ens).map_err(failed)?;
    write_json(&cfg.out_dir.join("ensemble_stats.json"), &report.stats).map_err(config_err)?;

    let mut csv = Csv::new(&["trajectory", "x_m", "mean_x_out", "mean_p_out"]);
    for t in &report.trajectories {
        csv.row(&[Cell::U(t.index), Cell::F(t.x_m), Cell::F(t.out.mean_x), Cell::F(t.out.mean_p)]);
    }
    csv.write(&cfg.out_dir.join("trajectories.csv")).map_err(config_err)?;

    let psi_in = cfg.input.prepare(grid).map_err(config_err)?;
    let mut csv = Csv::new(&["x", "input", "nonselective"]);
    for ((x, a), b) in grid.points().iter().zip(psi_in.density()).zip(&report.nonselective_density) {
        csv.floats(&[*x, a, *b]);
    }
    csv.write(&cfg.out_dir.join("nonselective_marginal.csv")).map_err(config_err)?;

    let s = &report.stats;
    let gain = s.gain.map_or("n/a".to_string(), |g| format!("{:.5}", g.value));
    println!(
        "ensemble ({}): {} q={} -> <x_m>={:.5} Var(x_m)={:.5} gain={gain} Var(p)_ns={:.5}",
        s.mode, s.input_label, s.q, s.xm_mean.value, s.xm_var.value, s.nonselective_var_p.value
    );
    Ok(())
}

#[derive(Serialize)]
struct BenchReport {
    threads: usize,
    n_points: usize,
    verify_cases: usize,
    verify_seconds: f64,
    verify_ms_per_case: f64,
    ensemble_trajectories: usize,
    ensemble_seconds: f64,
    ensemble_us_per_trajectory: f64,
}

/// Timings for a reduced verification matrix and a sampled ensemble.
pub fn bench(cfg: &RunConfig) -> CmdResult {
    let grid = cfg.grid_or(default_wide_grid()).build().map_err(config_err)?;
    prepare_out(&cfg.out_dir)?;
    let inputs = default_inputs(cfg.verify.random_seed, 1);
    let matrix = cases(&inputs, &cfg.verify.q_values, &cfg.verify.x_m_values);
    let t0 = Instant::now();
    let rows = run_matrix(grid, &matrix);
    let verify_seconds = t0.elapsed().as_secs_f64();
    if let Some(bad) = rows.iter().find(|r| r.outcome.is_err()) {
        return Err(failed(anyhow!("bench case {} failed: {:?}", bad.case.label, bad.outcome)));
    }

    let n_traj = cfg.n_trajectories.clamp(1, 2000);
    let ens = EnsembleConfig {
        grid,
        input: cfg.input.clone(),
        q: cfg.q,
        n_trajectories: n_traj,
        seed: cfg.seed.unwrap_or(0),
        outcome_nodes: cfg.outcome_nodes,
        photon_cutoff: cfg.photon_cutoff,
    };
    let t1 = Instant::now();
    run_ensemble(&ens).map_err(failed)?;
    let ensemble_seconds = t1.elapsed().as_secs_f64();

    let report = BenchReport {
        threads: rayon::current_num_threads(),
        n_points: grid.n_points(),
        verify_cases: rows.len(),
        verify_seconds,
        verify_ms_per_case: 1e3 * verify_seconds / rows.len() as f64,
        ensemble_trajectories: n_traj,
        ensemble_seconds,
        ensemble_us_per_trajectory: 1e6 * ensemble_seconds / n_traj as f64,
    };
    write_json(&cfg.out_dir.join("bench.json"), &report).map_err(config_err)?;
    println!(
        "bench ({} threads, {} points): verify {:.1} ms/case, ensemble {:.0} us/trajectory",
        report.threads, report.n_points, report.verify_ms_per_case, report.ensemble_us_per_trajectory
    );
    Ok(())
}
