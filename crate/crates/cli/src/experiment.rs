//! Preset studies, randomized null-depth histograms and solver timing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use robust_dbf::array_model::random_trial_offsets;
use robust_dbf::pipeline::{run_pipeline, Method};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::presets::Preset;
use crate::run::{run_scenario, summarize, RunOptions, RunResult, NULL_BAR_DB};
use crate::svg;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub preset: String,
    pub description: String,
    pub runs: Vec<RunResult>,
}

/// Runs every method of a (non-randomized) preset into `root/<preset>/<method>/`
/// and writes `root/<preset>/summary.json`.
pub fn run_experiment(preset: &Preset, root: &Path, seed: Option<u64>, opts: RunOptions) -> Result<ExperimentSummary> {
    let dir = root.join(&preset.name);
    let mut runs = Vec::new();
    for &(method, order) in &preset.runs {
        let mut cfg = preset.config_for(method, order);
        if let Some(s) = seed {
            cfg.seed = s;
        }
        info!("{}: running {method} with L={order}", preset.name);
        runs.push(run_scenario(&cfg, &dir.join(method.name()), opts)?.result);
    }
    let summary = ExperimentSummary { preset: preset.name.clone(), description: preset.description.into(), runs };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDepth {
    pub trial: usize,
    pub method: Method,
    pub theta_deg: f64,
    pub gain_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub preset: String,
    pub trials: usize,
    pub seed: u64,
    pub depths: Vec<TrialDepth>,
    /// Per method: fraction of trials meeting the null bar at every interferer.
    pub pass_rate: Vec<(Method, f64)>,
}

/// Per-trial configs: offsets redrawn from the preset's offset type.
pub fn trial_configs(preset: &Preset, trials: usize, seed: u64) -> Vec<ScenarioConfig> {
    (0..trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let specs = random_trial_offsets(preset.kind, preset.base.sources[0].offset, &mut rng);
            let mut cfg = preset.base.clone();
            cfg.name = format!("{}-trial{t}", preset.name);
            for (src, spec) in cfg.sources.iter_mut().zip(specs) {
                src.offset = spec;
            }
            cfg
        })
        .collect()
}

/// `trials` randomized draws of the preset's offsets; every method runs on
/// the same data. Trials run in parallel; results are ordered by trial.
pub fn run_histogram(preset: &Preset, root: &Path, trials: usize, seed: u64, opts: RunOptions) -> Result<HistogramSummary> {
    let dir = root.join(&preset.name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let configs = trial_configs(preset, trials, seed);
    let per_trial: Vec<Vec<TrialDepth>> = configs
        .par_iter()
        .enumerate()
        .map(|(t, base)| -> Result<Vec<TrialDepth>> {
            let mut rows = Vec::new();
            for &(method, order) in &preset.runs {
                let mut cfg = base.clone();
                cfg.method = method;
                cfg.solver.order = order;
                let out = run_pipeline(&cfg.scenario()?, &cfg.settings())
                    .with_context(|| format!("trial {t}, method {method}"))?;
                let res = summarize(&cfg, &out, 0.0)?;
                rows.extend(res.null_depths.iter().map(|d| TrialDepth { trial: t, method, theta_deg: d.theta_deg, gain_db: d.gain_db }));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let depths: Vec<TrialDepth> = per_trial.into_iter().flatten().collect();

    let mut w = csv::Writer::from_path(dir.join("null_depths.csv"))?;
    w.write_record(["trial", "method", "theta_deg", "gain_db"])?;
    for d in &depths {
        w.write_record([d.trial.to_string(), d.method.to_string(), d.theta_deg.to_string(), format!("{:.17e}", d.gain_db)])?;
    }
    w.flush()?;

    let angles: Vec<f64> = preset.base.sources[1..].iter().map(|s| s.angle_deg).collect();
    let mut hist = csv::Writer::from_path(dir.join("histogram.csv"))?;
    hist.write_record(["method", "theta_deg", "bin_lo_db", "bin_hi_db", "count"])?;
    let mut pass_rate = Vec::new();
    for &(method, _) in &preset.runs {
        for &theta in &angles {
            let vals: Vec<f64> =
                depths.iter().filter(|d| d.method == method && d.theta_deg == theta).map(|d| d.gain_db).collect();
            let bins = histogram_bins(&vals, 5.0);
            for &(lo, hi, c) in &bins {
                hist.write_record([method.to_string(), theta.to_string(), lo.to_string(), hi.to_string(), c.to_string()])?;
            }
            if opts.plots {
                let doc = svg::histogram(&format!("{method}: gain at {theta}° relative to desired"), "gain (dB)", &bins);
                fs::write(dir.join(format!("histogram_{method}_{theta}.svg")), doc)?;
            }
        }
        let passed = (0..trials)
            .filter(|&t| depths.iter().filter(|d| d.trial == t && d.method == method).all(|d| d.gain_db <= -NULL_BAR_DB))
            .count();
        pass_rate.push((method, passed as f64 / trials.max(1) as f64));
    }
    hist.flush()?;

    let summary = HistogramSummary { preset: preset.name.clone(), trials, seed, depths, pass_rate };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Fixed-width bins `[lo, lo + width)` aligned to multiples of `width`,
/// covering the data (empty input gives no bins).
pub fn histogram_bins(values: &[f64], width: f64) -> Vec<(f64, f64, usize)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = (lo / width).floor() as i64;
    let last = (hi / width).floor() as i64;
    (first..=last)
        .map(|b| {
            let (a, z) = (b as f64 * width, (b + 1) as f64 * width);
            (a, z, finite.iter().filter(|&&v| v >= a && v < z).count())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub name: String,
    pub ivdst_order: usize,
    pub anm_order: usize,
    pub ivdst_seconds: f64,
    pub anm1d_seconds: f64,
    /// IVDST solve time over ADMM solve time.
    pub ratio: f64,
    pub ivdst_frequencies: Vec<f64>,
    pub anm1d_frequencies: Vec<f64>,
    pub ivdst_max_frequency_error: f64,
    pub anm1d_max_frequency_error: f64,
    pub anm1d_converged: bool,
    pub anm1d_iterations: usize,
}

/// Solves the same scenario (same data, same seed) with IVDST and with the
/// ADMM SDP and compares solver wall-clock.
pub fn benchmark(cfg: &ScenarioConfig, anm_order: usize, dir: Option<&Path>) -> Result<BenchmarkReport> {
    let run = |method: Method, order: usize| -> Result<RunResult> {
        let mut c = cfg.clone();
        c.method = method;
        c.solver.order = order;
        let out = run_pipeline(&c.scenario()?, &c.settings())?;
        summarize(&c, &out, 0.0)
    };
    let ivdst = run(Method::Ivdst, cfg.solver.order)?;
    let anm = run(Method::Anm1d, anm_order)?;
    let solver = anm.solver.clone();
    let report = BenchmarkReport {
        name: cfg.name.clone(),
        ivdst_order: cfg.solver.order,
        anm_order,
        ivdst_seconds: ivdst.timing.solve_seconds,
        anm1d_seconds: anm.timing.solve_seconds,
        ratio: ivdst.timing.solve_seconds / anm.timing.solve_seconds,
        ivdst_max_frequency_error: ivdst.max_frequency_error(),
        anm1d_max_frequency_error: anm.max_frequency_error(),
        ivdst_frequencies: ivdst.frequencies,
        anm1d_frequencies: anm.frequencies,
        anm1d_converged: solver.as_ref().is_some_and(|s| s.converged),
        anm1d_iterations: solver.map_or(0, |s| s.iterations),
    };
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        let mut f = fs::File::create(dir.join("benchmark.json"))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}

/// Output root: explicit flag, else `DBF_OUTPUT_ROOT`, else `./dbf-output`.
pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("DBF_OUTPUT_ROOT").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("dbf-output"))
}
