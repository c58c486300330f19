use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use znav_core::flowfield::{measure_spectrum, write_flow, FlowField, FlowKind};
use znav_core::navigator::{on_shooting, write_outcomes_csv, write_trajectories_csv, Trajectory};
use znav_core::rl::{evaluate, load_policy, train, write_policy, Policy};
use znav_core::stats::{occupancy, summarize, EnsembleSummary, OccupancyGrid};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiment::{eval_config, shooting_config, train_config, Experiment};
use crate::manifest::Outputs;

pub const FLOW_FILE: &str = "flow.znf";
pub const FLOW_INFO_FILE: &str = "flow_info.json";
pub const POLICY_FILE: &str = "policy.znp";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const EVAL_SUMMARY_FILE: &str = "eval_summary.json";
pub const EVAL_OUTCOMES_FILE: &str = "eval_outcomes.csv";
pub const EVAL_TRAJECTORIES_FILE: &str = "eval_trajectories.csv";
pub const ON_SUMMARY_FILE: &str = "on_summary.json";
pub const ON_COUNTS_FILE: &str = "on_counts.csv";
pub const ON_OUTCOMES_FILE: &str = "on_outcomes.csv";
pub const ON_BEST_FILE: &str = "on_best.csv";
pub const ON_TRAJECTORIES_FILE: &str = "on_trajectories.csv";
pub const COMPARE_FILE: &str = "compare_report.json";
pub const OW_MAP_FILE: &str = "ow_map.csv";
pub const OW_MAP_META_FILE: &str = "ow_map.json";

/// A loaded config together with its raw bytes, which are hashed into the
/// manifest.
pub struct Invocation {
    pub config: ExperimentConfig,
    pub config_bytes: Vec<u8>,
}

impl Invocation {
    pub fn load(path: &Path) -> Result<Self> {
        let (config, config_bytes) = ExperimentConfig::load(path)?;
        Ok(Self { config, config_bytes })
    }
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> znav_core::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(value)?;
    b.push(b'\n');
    Ok(b)
}

fn say(log: &mut dyn Write, line: std::fmt::Arguments) -> Result<()> {
    writeln!(log, "{line}").map_err(|e| CliError::io("writing to stdout", e))
}

#[derive(Debug, Serialize)]
pub struct FlowInfo {
    pub kind: &'static str,
    pub time_dependent: bool,
    pub period: f64,
    pub u_max: f64,
    pub n_modes: Option<usize>,
    /// Fitted power-law exponent of the shell spectrum over `fit_range`.
    pub spectrum_slope: Option<f64>,
    pub fit_range: Option<[u32; 2]>,
}

pub fn flow_info(flow: &FlowField<f64>) -> Result<FlowInfo> {
    let (kind, n_modes, spec) = match flow.kind() {
        FlowKind::Analytic(_) => ("analytic", None, None),
        FlowKind::Gridded(_) => ("gridded", None, None),
        FlowKind::ModeSum(m) => ("modesum", Some(m.modes().len()), m.spectrum().copied()),
    };
    let (spectrum_slope, fit_range) = match spec {
        Some(s) => {
            let n = (4 * s.k_max as usize).next_power_of_two().max(64);
            let e = measure_spectrum(flow, n, 0.0)?;
            (Some(e.fit_slope(s.k_min as usize, s.k_max as usize)?), Some([s.k_min, s.k_max]))
        }
        None => (None, None),
    };
    Ok(FlowInfo {
        kind,
        time_dependent: flow.is_time_dependent(),
        period: flow.period(),
        u_max: flow.u_max(0.0),
        n_modes,
        spectrum_slope,
        fit_range,
    })
}

/// Generates the configured flow and writes it to `out` (relative paths are
/// taken under the output directory).
pub fn gen_flow(inv: &Invocation, out: Option<&Path>, log: &mut dyn Write) -> Result<PathBuf> {
    let cfg = &inv.config;
    let flow = crate::experiment::build_flow(&cfg.flow)?;
    let info = flow_info(&flow)?;
    let mut outputs = Outputs::new(&cfg.output_dir)?;
    let bytes = write_flow(&flow);
    let path = match out {
        None => outputs.write(FLOW_FILE, &bytes)?,
        Some(p) if p.is_relative() => outputs.write(&p.to_string_lossy(), &bytes)?,
        Some(p) => {
            std::fs::write(p, &bytes).map_err(|e| CliError::io(format!("writing {}", p.display()), e))?;
            outputs.record(&p.to_string_lossy(), &bytes);
            p.to_path_buf()
        }
    };
    outputs.write(FLOW_INFO_FILE, &json_bytes(&info)?)?;
    say(log, format_args!("u_max = {}", info.u_max))?;
    match info.spectrum_slope {
        Some(s) => say(log, format_args!("spectrum slope = {s:.4}"))?,
        None => say(log, format_args!("spectrum slope = n/a"))?,
    }
    say(log, format_args!("wrote {}", path.display()))?;
    outputs.finish("gen-flow", &inv.config_bytes)?;
    Ok(path)
}

pub fn cmd_train(inv: &Invocation, log: &mut dyn Write) -> Result<Policy<f64>> {
    let cfg = &inv.config;
    let exp = Experiment::new(cfg)?;
    let (policy, train_log) = train(
        &exp.flow,
        &exp.geometry,
        exp.untrained_policy(),
        &exp.reward,
        &exp.episode,
        &train_config(cfg),
    )?;
    let mut outputs = Outputs::new(&cfg.output_dir)?;
    outputs.write(POLICY_FILE, &write_policy(&policy))?;
    outputs.write(TRAIN_LOG_FILE, &to_bytes(|b| train_log.write_csv(b))?)?;
    let n = train_log.episodes.len();
    let tail = &train_log.episodes[n - (n / 10).max(1)..];
    let failed = tail.iter().filter(|e| !e.reached).count();
    say(
        log,
        format_args!(
            "trained {n} episodes; last {} episodes: {failed} failed; {} clamped decisions",
            tail.len(),
            train_log.clamped_decisions()
        ),
    )?;
    outputs.finish("train", &inv.config_bytes)?;
    Ok(policy)
}

fn load_checked(exp: &Experiment, path: &Path) -> Result<Policy<f64>> {
    let policy = load_policy(path, Some(&exp.coder))?;
    if policy.actions != exp.actions {
        return Err(znav_core::Error::Format {
            offset: 0,
            reason: format!(
                "policy has {} actions but the config declares {}",
                policy.actions.n_actions(),
                exp.actions.n_actions()
            ),
        }
        .into());
    }
    Ok(policy)
}

fn default_policy_path(cfg: &ExperimentConfig, policy: Option<&Path>) -> PathBuf {
    policy.map_or_else(|| cfg.output_dir.join(POLICY_FILE), Path::to_path_buf)
}

fn rl_ensemble(exp: &Experiment, cfg: &ExperimentConfig, policy: &Policy<f64>) -> Result<Vec<Trajectory<f64>>> {
    Ok(evaluate(
        &exp.flow,
        policy,
        &exp.geometry,
        &exp.reward,
        &exp.episode,
        &eval_config(cfg),
    )?)
}

pub fn cmd_eval(inv: &Invocation, policy: Option<&Path>, trajectories: bool, log: &mut dyn Write) -> Result<EnsembleSummary> {
    let cfg = &inv.config;
    let exp = Experiment::new(cfg)?;
    let policy = load_checked(&exp, &default_policy_path(cfg, policy))?;
    let trajs = rl_ensemble(&exp, cfg, &policy)?;
    let summary = summarize(&trajs, exp.t_free(), cfg.eval.n_bins)?;
    let mut outputs = Outputs::new(&cfg.output_dir)?;
    outputs.write(EVAL_SUMMARY_FILE, &json_bytes(&summary)?)?;
    outputs.write(EVAL_OUTCOMES_FILE, &to_bytes(|b| write_outcomes_csv(b, &trajs))?)?;
    if trajectories || cfg.eval.write_trajectories {
        outputs.write(EVAL_TRAJECTORIES_FILE, &to_bytes(|b| write_trajectories_csv(b, &trajs))?)?;
    }
    report(log, "RL", &summary)?;
    outputs.finish("eval", &inv.config_bytes)?;
    Ok(summary)
}

fn report(log: &mut dyn Write, label: &str, s: &EnsembleSummary) -> Result<()> {
    let norm = |m: Option<f64>| m.map_or("n/a".to_string(), |m| format!("{:.4}", m / s.t_free));
    say(
        log,
        format_args!(
            "{label}: {} trajectories, {} failed (rate {:.5}), median T/T_free = {}, median T_pow/T_free = {}",
            s.n_total,
            s.n_failed,
            s.failure_rate,
            norm(s.median_t),
            norm(s.median_t_pow)
        ),
    )
}

#[derive(Debug)]
struct OnCounts {
    n_total: usize,
    n_reached: usize,
    n_failed: usize,
    failure_rate: f64,
    best_t: Option<f64>,
    best_t_over_t_free: Option<f64>,
    best_initial_heading: Option<f64>,
}

impl OnCounts {
    fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        format!(
            "n_total,n_reached,n_failed,failure_rate,best_T,best_T_over_T_free,best_initial_heading\n{},{},{},{},{},{},{}\n",
            self.n_total,
            self.n_reached,
            self.n_failed,
            self.failure_rate,
            opt(self.best_t),
            opt(self.best_t_over_t_free),
            opt(self.best_initial_heading)
        )
    }
}

pub struct OnRun {
    pub trajectories: Vec<Trajectory<f64>>,
    pub summary: EnsembleSummary,
    pub best: Option<usize>,
    pub best_heading: Option<f64>,
}

fn on_ensemble(exp: &Experiment, cfg: &ExperimentConfig) -> Result<OnRun> {
    let sh = on_shooting(&exp.flow, &exp.geometry, &shooting_config(cfg))?;
    let summary = summarize(&sh.trajectories, exp.t_free(), cfg.eval.n_bins)?;
    let best_heading = sh.best.map(|i| sh.heading_of(i));
    Ok(OnRun {
        trajectories: sh.trajectories,
        summary,
        best: sh.best,
        best_heading,
    })
}

pub fn cmd_on(inv: &Invocation, trajectories: bool, log: &mut dyn Write) -> Result<EnsembleSummary> {
    let cfg = &inv.config;
    let exp = Experiment::new(cfg)?;
    let run = on_ensemble(&exp, cfg)?;
    let best = run.best.map(|i| &run.trajectories[i]);
    let counts = OnCounts {
        n_total: run.summary.n_total,
        n_reached: run.summary.n_total - run.summary.n_failed,
        n_failed: run.summary.n_failed,
        failure_rate: run.summary.failure_rate,
        best_t: best.map(|t| t.duration()),
        best_t_over_t_free: best.map(|t| t.duration() / exp.t_free()),
        best_initial_heading: run.best_heading,
    };
    let mut outputs = Outputs::new(&cfg.output_dir)?;
    outputs.write(ON_SUMMARY_FILE, &json_bytes(&run.summary)?)?;
    outputs.write(ON_COUNTS_FILE, counts.to_csv().as_bytes())?;
    outputs.write(ON_OUTCOMES_FILE, &to_bytes(|b| write_outcomes_csv(b, &run.trajectories))?)?;
    let best_slice: Vec<Trajectory<f64>> = best.cloned().into_iter().collect();
    outputs.write(ON_BEST_FILE, &to_bytes(|b| write_trajectories_csv(b, &best_slice))?)?;
    if trajectories || cfg.on.write_trajectories {
        outputs.write(ON_TRAJECTORIES_FILE, &to_bytes(|b| write_trajectories_csv(b, &run.trajectories))?)?;
    }
    report(log, "ON", &run.summary)?;
    if let Some(t) = counts.best_t_over_t_free {
        say(log, format_args!("ON best T/T_free = {t:.5}"))?;
    }
    outputs.finish("on", &inv.config_bytes)?;
    Ok(run.summary)
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub t_free: f64,
    pub u_max: f64,
    pub v_s: f64,
    pub rl_failure_rate: f64,
    pub on_failure_rate: f64,
    pub rl: EnsembleSummary,
    pub on: EnsembleSummary,
    pub occupancy_rl: OccupancyGrid,
    pub occupancy_on: OccupancyGrid,
}

pub fn cmd_compare(inv: &Invocation, policy: Option<&Path>, log: &mut dyn Write) -> Result<CompareReport> {
    let cfg = &inv.config;
    let exp = Experiment::new(cfg)?;
    let policy = load_checked(&exp, &default_policy_path(cfg, policy))?;
    let mut episode = exp.episode;
    episode.record_substeps = true;
    let rl_exp = Experiment { episode, ..exp.clone() };
    let rl = rl_ensemble(&rl_exp, cfg, &policy)?;
    let rl_summary = summarize(&rl, exp.t_free(), cfg.eval.n_bins)?;
    let on = on_ensemble(&exp, cfg)?;
    let (pixel, bounds) = exp.occupancy_layout(cfg)?;
    let report = CompareReport {
        t_free: exp.t_free(),
        u_max: exp.u_max,
        v_s: exp.geometry.speed,
        rl_failure_rate: rl_summary.failure_rate,
        on_failure_rate: on.summary.failure_rate,
        rl: rl_summary,
        on: on.summary,
        occupancy_rl: occupancy(&rl, pixel, bounds)?,
        occupancy_on: occupancy(&on.trajectories, pixel, bounds)?,
    };
    let mut outputs = Outputs::new(&cfg.output_dir)?;
    outputs.write(COMPARE_FILE, &json_bytes(&report)?)?;
    for (name, grid) in [("rl", &report.occupancy_rl), ("on", &report.occupancy_on)] {
        outputs.write(&format!("occupancy_{name}.csv"), &to_bytes(|b| grid.write_csv(b))?)?;
        outputs.write(&format!("occupancy_{name}.json"), &to_bytes(|b| grid.write_sidecar_json(b))?)?;
    }
    report_line(log, &report)?;
    outputs.finish("compare", &inv.config_bytes)?;
    Ok(report)
}

fn report_line(log: &mut dyn Write, r: &CompareReport) -> Result<()> {
    report(log, "RL", &r.rl)?;
    report(log, "ON", &r.on)
}

#[derive(Debug, Serialize)]
struct OwMeta {
    bounds: znav_core::stats::Bounds,
    n: usize,
    t: f64,
    row_axis: &'static str,
    min: f64,
    max: f64,
}

/// Okubo-Weiss parameter at the centres of an `n × n` grid over the
/// occupancy bounds.
pub fn cmd_ow_map(inv: &Invocation, log: &mut dyn Write) -> Result<PathBuf> {
    let cfg = &inv.config;
    let exp = Experiment::new(cfg)?;
    let (_, b) = exp.occupancy_layout(cfg)?;
    let n = cfg.ow_map.n;
    let (hx, hy) = ((b.x_max - b.x_min) / n as f64, (b.y_max - b.y_min) / n as f64);
    let mut rows = Vec::with_capacity(n);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n {
        let y = b.y_min + (j as f64 + 0.5) * hy;
        let row: Vec<f64> = (0..n)
            .map(|i| {
                let x = b.x_min + (i as f64 + 0.5) * hx;
                exp.flow.okubo_weiss(znav_core::geom::Vec2::new(x, y), cfg.ow_map.t)
            })
            .collect();
        for &v in &row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        rows.push(row);
    }
    let mut text = String::new();
    for row in &rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    let mut outputs = Outputs::new(&cfg.output_dir)?;
    let path = outputs.write(OW_MAP_FILE, text.as_bytes())?;
    let meta = OwMeta {
        bounds: b,
        n,
        t: cfg.ow_map.t,
        row_axis: "y",
        min: lo,
        max: hi,
    };
    outputs.write(OW_MAP_META_FILE, &json_bytes(&meta)?)?;
    say(log, format_args!("Okubo-Weiss range [{lo:.4}, {hi:.4}]; wrote {}", path.display()))?;
    outputs.finish("ow-map", &inv.config_bytes)?;
    Ok(path)
}
