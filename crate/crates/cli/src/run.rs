//! One scenario run and its artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use log::{info, warn};
use robust_dbf::anm1d;
use robust_dbf::anm2d;
use robust_dbf::array_model::DataMatrix;
use robust_dbf::beamform;
use robust_dbf::pipeline::{run_pipeline, DualSurface, Method, PipelineOutput, SolverReport, SolverTrace};
use robust_dbf::C64;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::svg::{self, Series};

/// Interferers must sit this far below the desired direction.
pub const NULL_BAR_DB: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDepth {
    pub theta_deg: f64,
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Solver wall-clock (SDP or IVDST only).
    pub solve_seconds: f64,
    pub total_seconds: f64,
}

/// Contents of `result.json`. All fields except `timing` are reproducible
/// from the config and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub name: String,
    pub method: Method,
    pub seed: u64,
    pub snapshots: usize,
    pub order: usize,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub frequencies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles_deg: Option<Vec<f64>>,
    pub true_carriers: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub desired_index: Option<usize>,
    /// `[re, im]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_alpha1: Option<Vec<[f64; 2]>>,
    pub weights: Vec<[f64; 2]>,
    pub null_depths: Vec<NullDepth>,
    pub meets_null_bar: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverReport>,
    pub timing: Timing,
}

impl RunResult {
    pub fn weights_c64(&self) -> Vec<C64> {
        self.weights.iter().map(|w| C64::new(w[0], w[1])).collect()
    }

    /// Largest distance between an estimated frequency and the nearest true
    /// carrier, and vice versa.
    pub fn max_frequency_error(&self) -> f64 {
        let nearest = |x: f64, set: &[f64]| set.iter().map(|&y| beamform::circular_distance(x, y)).fold(f64::INFINITY, f64::min);
        let a = self.frequencies.iter().map(|&f| nearest(f, &self.true_carriers)).fold(0.0, f64::max);
        let b = self.true_carriers.iter().map(|&f| nearest(f, &self.frequencies)).fold(0.0, f64::max);
        a.max(b)
    }
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub plots: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { plots: true }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// `m,delta_1,…,delta_K`, one column per source.
pub fn write_offsets_csv<W: Write>(cfg: &ScenarioConfig, out: W) -> Result<()> {
    let scenario = cfg.scenario()?;
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["m".to_string()];
    head.extend((1..=scenario.sources.len()).map(|k| format!("delta_{k}")));
    w.write_record(&head)?;
    for m in 0..scenario.snapshots {
        let mut row = vec![m.to_string()];
        row.extend(scenario.sources.iter().map(|s| format!("{:.17e}", s.offset.values[m])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `m,element,re,im` for every snapshot entry.
pub fn write_data_csv<W: Write>(data: &DataMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "element", "re", "im"])?;
    for n in 0..data.elements() {
        for (m, z) in data.column(n).into_iter().enumerate() {
            w.write_record([m.to_string(), n.to_string(), format!("{:.17e}", z.re), format!("{:.17e}", z.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the offsets and snapshot matrix only.
pub fn simulate(cfg: &ScenarioConfig, dir: &Path, opts: RunOptions) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let scenario = cfg.scenario()?;
    let (data, _) = scenario.data()?;
    write_offsets_csv(cfg, create(dir, "offsets.csv")?)?;
    write_data_csv(&data, create(dir, "data.csv")?)?;
    write_text(dir, "config.toml", &cfg.to_toml()?)?;
    if opts.plots {
        write_text(dir, "offsets.svg", &offsets_svg(cfg)?)?;
    }
    Ok(())
}

fn offsets_svg(cfg: &ScenarioConfig) -> Result<String> {
    let scenario = cfg.scenario()?;
    let labels: Vec<String> = (1..=scenario.sources.len()).map(|k| format!("source {k}")).collect();
    let series: Vec<Series<'_>> = scenario
        .sources
        .iter()
        .zip(&labels)
        .map(|(s, label)| Series { label, points: s.offset.values.iter().enumerate().map(|(m, &d)| (m as f64, d)).collect() })
        .collect();
    Ok(svg::line_plot("Carrier frequency offsets", "snapshot m", "offset (cycles/sample)", &series, &[]))
}

fn write_outputs(cfg: &ScenarioConfig, out: &PipelineOutput, dir: &Path, opts: RunOptions) -> Result<()> {
    let scenario = cfg.scenario()?;
    let carriers: Vec<f64> = scenario.sources.iter().map(|s| s.carrier).collect();
    beamform::write_pattern_csv(&out.pattern, create(dir, "pattern.csv")?)?;
    match &out.dual {
        Some(DualSurface::OneD { grid, values }) => {
            beamform::write_dual_csv(grid, values, create(dir, "dual_polynomial.csv")?)?;
        }
        Some(DualSurface::TwoD { freqs, angles, values }) => {
            anm2d::write_dual2d_csv(freqs, angles, values, create(dir, "dual2d.csv")?)?;
        }
        None => {}
    }
    match &out.trace {
        Some(SolverTrace::Admm(history)) => anm1d::write_history_csv(history, create(dir, "solver_trace.csv")?)?,
        Some(SolverTrace::Ivdst(trace)) => {
            let mut w = create(dir, "solver_trace.csv")?;
            writeln!(w, "iter,objective,constraint_drift")?;
            for r in trace {
                writeln!(w, "{},{:.17e},{:.17e}", r.iter, r.objective, r.constraint_drift)?;
            }
        }
        None => {}
    }
    if !opts.plots {
        return Ok(());
    }
    let interferers = scenario.interferer_angles();
    let desired = scenario.desired_angle();
    let mut marks = vec![desired];
    marks.extend(&interferers);
    write_text(
        dir,
        "pattern.svg",
        &svg::line_plot(
            &format!("Radiation pattern ({})", out.method),
            "angle (deg)",
            "gain (dB)",
            &[Series { label: "pattern", points: out.pattern.iter().map(|&(t, g)| (t, g.max(-80.0))).collect() }],
            &marks,
        ),
    )?;
    match &out.dual {
        Some(DualSurface::OneD { grid, values }) => write_text(
            dir,
            "dual_polynomial.svg",
            &svg::line_plot(
                &format!("Dual polynomial ({})", out.method),
                "frequency (cycles/sample)",
                "q(f)",
                &[Series { label: "q", points: grid.iter().copied().zip(values.iter().copied()).collect() }],
                &carriers,
            ),
        )?,
        Some(DualSurface::TwoD { freqs, angles, values }) => {
            let truth: Vec<(f64, f64)> = scenario.sources.iter().map(|s| (s.carrier, s.angle_deg)).collect();
            write_text(
                dir,
                "dual2d.svg",
                &svg::heatmap("2D dual polynomial", "frequency (cycles/sample)", "angle (deg)", freqs, angles, values, &truth),
            )?
        }
        None => {}
    }
    write_text(dir, "offsets.svg", &offsets_svg(cfg)?)?;
    Ok(())
}

/// Builds the reproducible part of the result from a pipeline output.
pub fn summarize(cfg: &ScenarioConfig, out: &PipelineOutput, total_seconds: f64) -> Result<RunResult> {
    let scenario = cfg.scenario()?;
    Ok(RunResult {
        name: cfg.name.clone(),
        method: cfg.method,
        seed: cfg.seed,
        snapshots: cfg.snapshots,
        order: cfg.solver.order,
        status: "ok".into(),
        error: None,
        frequencies: out.freqs.clone(),
        angles_deg: out.angles.clone(),
        true_carriers: scenario.sources.iter().map(|s| s.carrier).collect(),
        desired_index: out.desired,
        sign_alpha1: out.sign_alpha1.as_deref().map(pairs),
        weights: pairs(&out.weights),
        null_depths: out.null_depths.iter().map(|&(theta_deg, gain_db)| NullDepth { theta_deg, gain_db }).collect(),
        meets_null_bar: out.meets_null_bar(NULL_BAR_DB),
        solver: out.solver.clone(),
        timing: Timing { solve_seconds: out.solve_seconds, total_seconds },
    })
}

pub struct RunArtifacts {
    pub dir: PathBuf,
    pub result: RunResult,
    pub output: PipelineOutput,
}

/// Runs the scenario and writes `offsets.csv`, `dual_polynomial.csv` or
/// `dual2d.csv`, `pattern.csv`, `solver_trace.csv`, `result.json`, the
/// resolved `config.toml` and (optionally) SVG views. A failed run still
/// writes `result.json`, with `status = "failed"`, before returning the error.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path, opts: RunOptions) -> Result<RunArtifacts> {
    cfg.validate()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_text(dir, "config.toml", &cfg.to_toml()?)?;
    write_offsets_csv(cfg, create(dir, "offsets.csv")?)?;
    let start = Instant::now();
    let output = match run_pipeline(&cfg.scenario()?, &cfg.settings()) {
        Ok(o) => o,
        Err(e) => {
            let failed = RunResult {
                name: cfg.name.clone(),
                method: cfg.method,
                seed: cfg.seed,
                snapshots: cfg.snapshots,
                order: cfg.solver.order,
                status: "failed".into(),
                error: Some(e.to_string()),
                frequencies: Vec::new(),
                angles_deg: None,
                true_carriers: cfg.sources.iter().map(|s| s.carrier).collect(),
                desired_index: None,
                sign_alpha1: None,
                weights: Vec::new(),
                null_depths: Vec::new(),
                meets_null_bar: false,
                solver: None,
                timing: Timing { solve_seconds: 0.0, total_seconds: start.elapsed().as_secs_f64() },
            };
            write_text(dir, "result.json", &serde_json::to_string_pretty(&failed)?)?;
            return Err(anyhow::Error::new(e).context(format!("run '{}' failed", cfg.name)));
        }
    };
    if let Some(r) = &output.solver {
        if !r.converged {
            warn!(
                "{}: solver stopped after {} iterations without meeting its tolerances (primal {:?}, dual {:?})",
                cfg.name, r.iterations, r.final_primal_residual, r.final_dual_residual
            );
        }
    }
    write_outputs(cfg, &output, dir, opts)?;
    let result = summarize(cfg, &output, start.elapsed().as_secs_f64())?;
    write_text(dir, "result.json", &serde_json::to_string_pretty(&result)?)?;
    info!(
        "{}: frequencies {:?}, null depths {:?} dB",
        cfg.name,
        result.frequencies,
        result.null_depths.iter().map(|d| d.gain_db).collect::<Vec<_>>()
    );
    Ok(RunArtifacts { dir: dir.to_path_buf(), result, output })
}

/// Re-renders the pattern of a finished run's weights on a new angle grid.
pub fn pattern_from_result(result_json: &Path, cfg: &ScenarioConfig, step: f64, dir: &Path, opts: RunOptions) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(result_json).with_context(|| format!("reading {}", result_json.display()))?;
    let result: RunResult = serde_json::from_str(&text).context("invalid result.json")?;
    let weights = result.weights_c64();
    let thetas = beamform::angle_grid(step);
    let pattern = beamform::radiation_pattern(&weights, &cfg.array_config()?, &thetas)?;
    fs::create_dir_all(dir)?;
    beamform::write_pattern_csv(&pattern, create(dir, "pattern.csv")?)?;
    if opts.plots {
        let points = pattern.iter().map(|&(t, g)| (t, g.max(-80.0))).collect();
        write_text(dir, "pattern.svg", &svg::line_plot("Radiation pattern", "angle (deg)", "gain (dB)", &[Series { label: "pattern", points }], &[]))?;
    }
    Ok(pattern)
}
