//! Command-line front end: scenario runs, on/off comparisons, parameter
//! sweeps and their CSV/JSON artifacts.
//!
//! Output layout under `--out` (default `$IMPULSE_SIM_OUT` or `./out`):
//!
//! ```text
//! <scenario>/manifest.json
//! <scenario>/comparison.json            (compare only)
//! <scenario>/<variant>/trajectory.csv   t,x,v,d,u_pd
//! <scenario>/<variant>/events.csv       t,guard,c,pre_v,post_v,gain
//! <scenario>/<variant>/metrics.json
//! <scenario>/sweep_<param>.csv          (sweep only)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use impulse_core::{
    pd_control, preset, run, run_scenario, Guard, ScenarioSpec, SettlingReport,
    Trajectory, Variants, PRESETS,
};

pub const OUT_ENV: &str = "IMPULSE_SIM_OUT";

#[derive(Debug, Parser)]
#[command(name = "impulse-sim", version, about = "Impulse-based hybrid motion control simulator")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    /// Seed for time-varying damping (overrides the scenario's).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override a scenario field, e.g. `controller.gamma=0.7`. Repeatable.
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    pub overrides: Vec<String>,
    /// No summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a preset or scenario file.
    Run { scenario: String },
    /// Run with and without impulses and report the difference. `fig1`
    /// compares the two PD baselines instead.
    Compare { scenario: String },
    /// Re-run a scenario for each value of one parameter.
    Sweep {
        scenario: String,
        /// Dotted parameter path, e.g. `controller.gamma`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// List built-in presets.
    Presets,
}

/// Preset name or path to a scenario file, then `--set` overrides, then
/// `--seed`.
pub fn resolve_scenario(source: &str, common: &Common) -> Result<ScenarioSpec> {
    let mut spec = if PRESETS.contains(&source) {
        preset(source)?
    } else {
        let path = Path::new(source);
        if !path.exists() {
            bail!("`{source}` is neither a preset nor a scenario file");
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading {source}"))?;
        ScenarioSpec::from_toml(&text).with_context(|| format!("parsing {source}"))?
    };
    for assignment in &common.overrides {
        spec = spec.with_override(assignment)?;
    }
    if let Some(seed) = common.seed {
        spec = spec.with_seed(seed);
    }
    Ok(spec)
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    x: f64,
    v: f64,
    d: f64,
    u_pd: f64,
}

#[derive(Serialize)]
struct EventRow {
    t: f64,
    guard: &'static str,
    c: u8,
    pre_v: f64,
    post_v: f64,
    gain: f64,
}

pub fn write_trajectory_csv(path: &Path, spec: &ScenarioSpec, tr: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for (s, d) in tr.samples.iter().zip(&tr.damping) {
        w.serialize(TrajectoryRow {
            t: s.t,
            x: s.x,
            v: s.v,
            d: *d,
            u_pd: pd_control(s, &spec.plant),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events_csv(path: &Path, tr: &Trajectory) -> Result<()> {
    // explicit header so an event-free run still gets one
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["t", "guard", "c", "pre_v", "post_v", "gain"])?;
    for ev in &tr.jumps {
        w.serialize(EventRow {
            t: ev.t,
            guard: ev.guard.as_str(),
            c: ev.c.as_u8(),
            pre_v: ev.pre.v,
            post_v: ev.post.v,
            gain: ev.gain,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MetricsDoc<'a> {
    scenario: &'a str,
    variant: &'static str,
    metrics: &'a SettlingReport,
    position_events: usize,
    velocity_events: usize,
    interpolated_events: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub seed: Option<u64>,
    pub scenario: String,
    pub artifacts: Vec<PathBuf>,
}

fn variant_name(impulses: bool) -> &'static str {
    if impulses {
        "impulses_on"
    } else {
        "impulses_off"
    }
}

/// Writes trajectory, events and metrics for one variant; returns the paths.
pub fn write_variant(
    dir: &Path,
    spec: &ScenarioSpec,
    impulses: bool,
    tr: &Trajectory,
) -> Result<Vec<PathBuf>> {
    let variant = variant_name(impulses);
    let dir = dir.join(variant);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let traj = dir.join("trajectory.csv");
    let events = dir.join("events.csv");
    let metrics = dir.join("metrics.json");
    write_trajectory_csv(&traj, spec, tr)?;
    write_events_csv(&events, tr)?;
    let count = |g: Guard| tr.jumps.iter().filter(|e| e.guard == g).count();
    let doc = MetricsDoc {
        scenario: &spec.name,
        variant,
        metrics: &tr.metrics,
        position_events: count(Guard::PositionAxis),
        velocity_events: count(Guard::VelocityAxis),
        interpolated_events: tr.jumps.iter().filter(|e| e.interpolated).count(),
    };
    write_json(&metrics, &doc)?;
    Ok(vec![traj, events, metrics])
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_manifest(dir: &Path, spec: &ScenarioSpec, artifacts: Vec<PathBuf>) -> Result<()> {
    let manifest = Manifest {
        tool: "impulse-sim",
        version: env!("CARGO_PKG_VERSION"),
        command_line: std::env::args().collect(),
        seed: spec.damping.seed(),
        scenario: spec.to_toml()?,
        artifacts,
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

fn summary(label: &str, m: &SettlingReport) -> String {
    let settle = m
        .settling_time
        .map_or_else(|| "never".to_string(), |t| format!("{t:.4} s"));
    format!(
        "{label}: settling {settle}, overshoot {:.3e}, peak |v| {:.4}, jumps {}, final x {:.3e}",
        m.overshoot, m.peak_speed, m.jump_count, m.final_state.x
    )
}

pub fn cmd_run(spec: &ScenarioSpec, common: &Common) -> Result<()> {
    let dir = common.out.join(&spec.name);
    let outcome = run_scenario(spec)?;
    let mut artifacts = Vec::new();
    for (impulses, tr) in [(true, &outcome.on), (false, &outcome.off)] {
        if let Some(tr) = tr {
            artifacts.extend(write_variant(&dir, spec, impulses, tr)?);
            if !common.quiet {
                println!("{}", summary(&format!("{} {}", spec.name, variant_name(impulses)), &tr.metrics));
            }
        }
    }
    write_manifest(&dir, spec, artifacts)
}

pub fn cmd_compare(source: &str, common: &Common) -> Result<()> {
    if source == "fig1" {
        return compare_baselines(common);
    }
    let mut spec = resolve_scenario(source, common)?;
    spec.variants = Variants::Both;
    let dir = common.out.join(&spec.name);
    let outcome = run_scenario(&spec)?;
    let (Some(on), Some(off), Some(cmp)) = (&outcome.on, &outcome.off, &outcome.comparison) else {
        bail!("comparison needs both variants");
    };
    let mut artifacts = write_variant(&dir, &spec, true, on)?;
    artifacts.extend(write_variant(&dir, &spec, false, off)?);
    let report = dir.join("comparison.json");
    write_json(&report, cmp)?;
    artifacts.push(report);
    if !common.quiet {
        println!("{}", summary("impulses_on", &cmp.on));
        println!("{}", summary("impulses_off", &cmp.off));
        if let Some(r) = cmp.settling_ratio {
            println!("settling ratio on/off: {r:.4}");
        }
        println!("peak speed ratio on/off: {:.4}", cmp.peak_speed_ratio);
    }
    write_manifest(&dir, &spec, artifacts)
}

#[derive(Debug, Serialize)]
pub struct BaselineComparison {
    pub overdamped: SettlingReport,
    pub underdamped: SettlingReport,
    pub overdamped_sign_changes: usize,
    pub underdamped_sign_changes: usize,
}

fn compare_baselines(common: &Common) -> Result<()> {
    let dir = common.out.join("fig1");
    let mut artifacts = Vec::new();
    let mut reports = Vec::new();
    for name in ["fig1_overdamped", "fig1_underdamped"] {
        let mut spec = resolve_scenario(name, common)?;
        spec.variants = Variants::ImpulsesOff;
        let tr = run(spec.initial, &spec.setup(), false)?;
        artifacts.extend(write_variant(&dir.join(name), &spec, false, &tr)?);
        if !common.quiet {
            println!("{}", summary(name, &tr.metrics));
        }
        reports.push((tr.metrics, tr.sign_changes()));
    }
    let cmp = BaselineComparison {
        overdamped: reports[0].0,
        underdamped: reports[1].0,
        overdamped_sign_changes: reports[0].1,
        underdamped_sign_changes: reports[1].1,
    };
    let report = dir.join("comparison.json");
    write_json(&report, &cmp)?;
    artifacts.push(report);
    let spec = resolve_scenario("fig1_overdamped", common)?;
    write_manifest(&dir, &spec, artifacts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub status: &'static str,
    pub variant: &'static str,
    pub settling_time: Option<f64>,
    pub overshoot: Option<f64>,
    pub peak_speed: Option<f64>,
    pub jump_count: Option<usize>,
    pub final_x: Option<f64>,
    pub final_v: Option<f64>,
    pub iae: Option<f64>,
    pub error: String,
}

impl SweepRow {
    fn failed(value: &str, status: &'static str, variant: &'static str, error: String) -> Self {
        Self {
            value: value.to_string(),
            status,
            variant,
            settling_time: None,
            overshoot: None,
            peak_speed: None,
            jump_count: None,
            final_x: None,
            final_v: None,
            iae: None,
            error,
        }
    }
}

/// One row per value. Values that fail validation are marked `rejected`;
/// runs that error out are marked `failed`.
pub fn sweep(base: &ScenarioSpec, param: &str, values: &[String]) -> Vec<SweepRow> {
    let impulses = base.variants.runs_on();
    let variant = variant_name(impulses);
    values
        .par_iter()
        .map(|value| {
            let spec = match base.with_override(&format!("{param}={value}")) {
                Ok(spec) => spec,
                Err(e) => return SweepRow::failed(value, "rejected", variant, e.to_string()),
            };
            match run(spec.initial, &spec.setup(), impulses) {
                Ok(tr) => {
                    let m = tr.metrics;
                    SweepRow {
                        value: value.clone(),
                        status: "ok",
                        variant,
                        settling_time: m.settling_time,
                        overshoot: Some(m.overshoot),
                        peak_speed: Some(m.peak_speed),
                        jump_count: Some(m.jump_count),
                        final_x: Some(m.final_state.x),
                        final_v: Some(m.final_state.v),
                        iae: Some(m.iae),
                        error: String::new(),
                    }
                }
                Err(e) => SweepRow::failed(value, "failed", variant, e.to_string()),
            }
        })
        .collect()
}

pub fn cmd_sweep(spec: &ScenarioSpec, param: &str, values: &[String], common: &Common) -> Result<()> {
    let rows = sweep(spec, param, values);
    let dir = common.out.join(&spec.name);
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("sweep_{}.csv", param.replace('.', "_")));
    let mut w = csv::Writer::from_path(&path)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    if !common.quiet {
        for row in &rows {
            let settle = row
                .settling_time
                .map_or_else(|| "-".to_string(), |t| format!("{t:.4}"));
            println!(
                "{param}={}: {} settling {settle} jumps {} {}",
                row.value,
                row.status,
                row.jump_count.map_or_else(|| "-".into(), |n| n.to_string()),
                row.error
            );
        }
    }
    write_manifest(&dir, spec, vec![path])
}

pub fn execute(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Presets => {
            for name in PRESETS {
                println!("{name}");
            }
            Ok(())
        }
        Command::Run { scenario } => {
            let spec = resolve_scenario(scenario, common)?;
            cmd_run(&spec, common)
        }
        Command::Compare { scenario } => cmd_compare(scenario, common),
        Command::Sweep {
            scenario,
            param,
            values,
        } => {
            let spec = resolve_scenario(scenario, common)?;
            cmd_sweep(&spec, param, values, common)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(overrides: &[&str], seed: Option<u64>) -> Common {
        Common {
            out: PathBuf::from("unused"),
            seed,
            overrides: overrides.iter().map(|s| s.to_string()).collect(),
            quiet: true,
        }
    }

    #[test]
    fn seed_flag_wins_over_set() {
        let c = common(&["damping.seed=3"], Some(9));
        let spec = resolve_scenario("fig4_timevarying", &c).unwrap();
        assert_eq!(spec.damping.seed(), Some(9));
        let spec = resolve_scenario("fig4_timevarying", &common(&["damping.seed=3"], None)).unwrap();
        assert_eq!(spec.damping.seed(), Some(3));
    }

    #[test]
    fn missing_source_is_an_error() {
        assert!(resolve_scenario("definitely/not/here.toml", &common(&[], None)).is_err());
    }

    #[test]
    fn sweep_keeps_value_order() {
        let mut base = preset("fig2_underdamped_hybrid").unwrap();
        base.executor.t_end = 0.5;
        let values: Vec<String> = ["0.9", "0.49", "0.5", "fast"].iter().map(|s| s.to_string()).collect();
        let rows = sweep(&base, "controller.gamma", &values);
        let got: Vec<(&str, &str)> = rows.iter().map(|r| (r.value.as_str(), r.status)).collect();
        assert_eq!(
            got,
            [("0.9", "ok"), ("0.49", "rejected"), ("0.5", "ok"), ("fast", "rejected")]
        );
        assert!(rows.iter().all(|r| r.variant == "impulses_on"));
    }
}
