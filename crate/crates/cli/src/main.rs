use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use dbf_cli::experiment::{self, output_root};
use dbf_cli::presets;
use dbf_cli::run::{self, RunOptions};
use dbf_cli::ScenarioConfig;
use robust_dbf::pipeline::Method;

#[derive(Parser)]
#[command(name = "dbf", version, about = "Robust digital beamforming under time-varying carrier offsets")]
struct Cli {
    /// Root directory for outputs.
    #[arg(long, global = true, env = "DBF_OUTPUT_ROOT")]
    output_root: Option<PathBuf>,
    /// Skip the SVG views.
    #[arg(long, global = true)]
    no_plots: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate offsets and the snapshot matrix only.
    Simulate(Scenario),
    /// Run the full pipeline for one method.
    Solve(Scenario),
    /// Recompute the radiation pattern of a finished run's weights.
    Pattern {
        #[command(flatten)]
        scenario: Scenario,
        /// The run's result.json.
        #[arg(long)]
        result: PathBuf,
        /// Angular step in degrees.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Time IVDST against the ADMM SDP on identical data.
    Benchmark {
        #[command(flatten)]
        scenario: Scenario,
        /// DPSS order for the SDP (defaults to the preset's, else the config's).
        #[arg(long)]
        anm_order: Option<usize>,
    },
    /// Run every method of a preset study.
    Experiment {
        preset: String,
        /// Number of randomized trials (histogram presets).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List presets, or print one as a scenario file.
    Presets { name: Option<String> },
}

#[derive(Args, Clone)]
struct Scenario {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario (see `dbf presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: <output root>/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// DPSS order L.
    #[arg(long)]
    order: Option<usize>,
    /// DPSS half-bandwidth W.
    #[arg(long)]
    half_bandwidth: Option<f64>,
    /// IVDST step size.
    #[arg(long)]
    eta: Option<f64>,
    /// IVDST iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// ADMM penalty.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Fidelity radius relative to the data norm.
    #[arg(long)]
    eps: Option<f64>,
    /// Clustering threshold relative to the dual polynomial maximum.
    #[arg(long)]
    gamma0: Option<f64>,
    /// Coarse desired-carrier hint.
    #[arg(long)]
    hint: Option<f64>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
}

impl Scenario {
    fn resolve(&self) -> Result<(ScenarioConfig, Option<presets::Preset>)> {
        let (mut cfg, preset) = match (&self.config, &self.preset) {
            (Some(path), None) => (ScenarioConfig::load(path)?, None),
            (None, Some(name)) => {
                let p = presets::preset(name)?;
                (p.base.clone(), Some(p))
            }
            _ => bail!("give --config FILE or --preset NAME"),
        };
        if let Some(m) = self.method {
            cfg.method = m;
            if let Some(l) = preset.as_ref().and_then(|p| p.order_for(m)) {
                cfg.solver.order = l;
            }
        }
        let s = &mut cfg.solver;
        macro_rules! set {
            ($($flag:ident => $target:expr),* $(,)?) => { $(if let Some(v) = self.$flag { $target = v; })* };
        }
        set!(snapshots => cfg.snapshots, seed => cfg.seed, order => s.order, eta => s.eta, iters => s.iters,
             rho => s.rho, max_iters => s.max_iters, tol => s.tol, eps => s.eps, gamma0 => s.gamma0, grid => s.grid);
        if self.half_bandwidth.is_some() {
            s.half_bandwidth = self.half_bandwidth;
        }
        if self.hint.is_some() {
            s.hint = self.hint;
        }
        if self.clusters.is_some() {
            s.clusters = self.clusters;
        }
        cfg.validate()?;
        Ok((cfg, preset))
    }

    fn dir(&self, cfg: &ScenarioConfig, root: &std::path::Path) -> PathBuf {
        match (&self.out, &cfg.output) {
            (Some(d), _) => d.clone(),
            (None, Some(d)) if d.is_absolute() => d.clone(),
            (None, Some(d)) => root.join(d),
            (None, None) => root.join(&cfg.name),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    let root = output_root(cli.output_root.clone());
    let opts = RunOptions { plots: !cli.no_plots };
    match cli.command {
        Command::Simulate(sc) => {
            let (cfg, _) = sc.resolve()?;
            let dir = sc.dir(&cfg, &root);
            run::simulate(&cfg, &dir, opts)?;
            println!("{}", dir.display());
        }
        Command::Solve(sc) => {
            let (cfg, _) = sc.resolve()?;
            let dir = sc.dir(&cfg, &root);
            let art = run::run_scenario(&cfg, &dir, opts)?;
            println!("{}", serde_json::to_string_pretty(&art.result)?);
        }
        Command::Pattern { scenario, result, step } => {
            let (cfg, _) = scenario.resolve()?;
            let dir = scenario.dir(&cfg, &root);
            run::pattern_from_result(&result, &cfg, step, &dir, opts)?;
            println!("{}", dir.join("pattern.csv").display());
        }
        Command::Benchmark { scenario, anm_order } => {
            let (cfg, preset) = scenario.resolve()?;
            let anm_order = anm_order
                .or_else(|| preset.as_ref().and_then(|p| p.order_for(Method::Anm1d)))
                .unwrap_or(cfg.solver.order);
            let dir = scenario.dir(&cfg, &root);
            let report = experiment::benchmark(&cfg, anm_order, Some(&dir))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Experiment { preset, trials, seed } => {
            let p = presets::preset(&preset)?;
            match trials.or(p.trials) {
                Some(n) => {
                    let summary = experiment::run_histogram(&p, &root, n, seed.unwrap_or(0), opts)?;
                    for (m, rate) in &summary.pass_rate {
                        println!("{m}: {:.0}% of {} trials meet the null bar", 100.0 * rate, summary.trials);
                    }
                }
                None => {
                    let summary = experiment::run_experiment(&p, &root, seed, opts)?;
                    for r in &summary.runs {
                        println!(
                            "{:>6}  L={:<3} freqs={:?} nulls={:?} dB  bar={}",
                            r.method.to_string(),
                            r.order,
                            r.frequencies.iter().map(|f| (f * 1e4).round() / 1e4).collect::<Vec<_>>(),
                            r.null_depths.iter().map(|d| (d.gain_db * 10.0).round() / 10.0).collect::<Vec<_>>(),
                            if r.meets_null_bar { "met" } else { "missed" }
                        );
                    }
                }
            }
            println!("{}", root.join(&p.name).display());
        }
        Command::Presets { name: None } => {
            for n in presets::names() {
                println!("{n:<22} {}", presets::preset(&n)?.description);
            }
        }
        Command::Presets { name: Some(n) } => print!("{}", presets::preset(&n)?.base.to_toml()?),
    }
    Ok(())
}
