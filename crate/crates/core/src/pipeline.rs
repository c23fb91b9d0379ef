//! End-to-end runs: synthesize the snapshots, solve, localize carriers and
//! form the nulling weights with one of the four methods.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anm1d::{self, AdmmParams, IterRecord};
use crate::anm2d;
use crate::array_model::{self, ArrayConfig, DataMatrix, PhaseConvention, SourceSpec};
use crate::beamform::{self, DEFAULT_GRID};
use crate::dpss::{self, DpssBasis};
use crate::error::{Error, Result};
use crate::ivdst::{self, IvdstParams, IvdstRecord};
use crate::linalg::C64;
use crate::tensor_ops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical SMI with the uncorrected pilot `a(f₁°)`.
    Smi,
    Anm1d,
    Ivdst,
    Anm2d,
}

impl Method {
    pub const ALL: [Method; 4] = [Self::Smi, Self::Anm1d, Self::Ivdst, Self::Anm2d];

    pub fn name(self) -> &'static str {
        match self {
            Self::Smi => "smi",
            Self::Anm1d => "anm1d",
            Self::Ivdst => "ivdst",
            Self::Anm2d => "anm2d",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// The physical scene. The first source is the desired one.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub sources: Vec<SourceSpec>,
    pub snapshots: usize,
    pub convention: PhaseConvention,
}

impl Scenario {
    pub fn data(&self) -> Result<(DataMatrix, Vec<Vec<C64>>)> {
        array_model::build_data_matrix(&self.sources, &self.array, self.snapshots, self.convention)
    }

    pub fn desired_angle(&self) -> f64 {
        self.sources[0].angle_deg
    }

    pub fn interferer_angles(&self) -> Vec<f64> {
        self.sources[1..].iter().map(|s| s.angle_deg).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub method: Method,
    /// DPSS order L.
    pub order: usize,
    /// DPSS half-bandwidth; `None` means `L / (2M)`.
    pub half_bandwidth: Option<f64>,
    /// ADMM settings; the fidelity radius is taken from `fidelity` instead
    /// of `admm.eps`.
    pub admm: AdmmParams,
    /// Fidelity radius relative to `‖X*‖_F`. Zero forces an exact fit, which
    /// off-model data (any drifting offset) turns into a dual polynomial near
    /// 1 everywhere.
    pub fidelity: f64,
    pub ivdst: IvdstParams,
    /// Clustering threshold as a fraction of the dual polynomial's maximum.
    pub gamma0: f64,
    pub grid_size: usize,
    /// `(frequencies, angles)` of the 2D scan.
    pub grid_2d: (usize, usize),
    /// Coarse knowledge of the desired carrier; without it the smallest
    /// estimated frequency is taken as desired.
    pub hint: Option<f64>,
    /// Number of clusters; `None` means one per source.
    pub clusters: Option<usize>,
    /// Angular step of the reported pattern, degrees.
    pub pattern_step: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            method: Method::Ivdst,
            order: 7,
            half_bandwidth: None,
            admm: AdmmParams::default(),
            fidelity: 0.2,
            ivdst: IvdstParams::default(),
            gamma0: 0.9,
            grid_size: DEFAULT_GRID,
            grid_2d: (256, 181),
            hint: None,
            clusters: None,
            pattern_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub enum DualSurface {
    OneD { grid: Vec<f64>, values: Vec<f64> },
    TwoD { freqs: Vec<f64>, angles: Vec<f64>, values: Vec<Vec<f64>> },
}

impl DualSurface {
    pub fn max(&self) -> f64 {
        match self {
            Self::OneD { values, .. } => values.iter().copied().fold(0.0, f64::max),
            Self::TwoD { values, .. } => values.iter().flatten().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SolverTrace {
    Admm(Vec<IterRecord>),
    Ivdst(Vec<IvdstRecord>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub dual_objective: Option<f64>,
    pub fidelity: Option<f64>,
    pub min_block_eigenvalue: Option<f64>,
    pub psd_shift: Option<f64>,
    pub final_primal_residual: Option<f64>,
    pub final_dual_residual: Option<f64>,
    pub final_constraint_drift: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub method: Method,
    pub data: DataMatrix,
    pub waveforms: Vec<Vec<C64>>,
    pub basis: Option<DpssBasis>,
    pub dual: Option<DualSurface>,
    pub trace: Option<SolverTrace>,
    pub solver: Option<SolverReport>,
    pub freqs: Vec<f64>,
    /// Angles paired with `freqs` (2D method only).
    pub angles: Option<Vec<f64>>,
    pub desired: Option<usize>,
    pub sign_alpha1: Option<Vec<C64>>,
    pub s1_tilde: Vec<C64>,
    pub weights: Vec<C64>,
    pub pattern: Vec<(f64, f64)>,
    /// `(θ, dB)` at every interferer, relative to the desired direction.
    pub null_depths: Vec<(f64, f64)>,
    pub solve_seconds: f64,
}

impl PipelineOutput {
    /// Whether every interferer sits at least `bar_db` below the desired
    /// direction.
    pub fn meets_null_bar(&self, bar_db: f64) -> bool {
        self.null_depths.iter().all(|&(_, d)| d <= -bar_db)
    }
}

fn basis_for(scenario: &Scenario, settings: &Settings) -> Result<DpssBasis> {
    let w = settings.half_bandwidth.unwrap_or_else(|| dpss::half_bandwidth_for(scenario.snapshots, settings.order));
    dpss::dpss_basis(scenario.snapshots, w, settings.order)
}

pub fn run_pipeline(scenario: &Scenario, settings: &Settings) -> Result<PipelineOutput> {
    if scenario.sources.is_empty() {
        return Err(Error::InvalidParameter("scenario has no sources".into()));
    }
    if !(settings.gamma0 > 0.0 && settings.gamma0 <= 1.0) {
        return Err(Error::InvalidParameter(format!("gamma0 must lie in (0, 1], got {}", settings.gamma0)));
    }
    if !(settings.fidelity >= 0.0 && settings.fidelity < 1.0) {
        return Err(Error::InvalidParameter(format!("relative fidelity must lie in [0, 1), got {}", settings.fidelity)));
    }
    let (data, waveforms) = scenario.data()?;
    let admm = AdmmParams { eps: settings.fidelity * data.frobenius(), ..settings.admm };
    let cfg = &scenario.array;
    let k = settings.clusters.unwrap_or(scenario.sources.len());
    let thetas = beamform::angle_grid(settings.pattern_step);
    let x = data.entries();
    let m = scenario.snapshots;

    let mut out = PipelineOutput {
        method: settings.method,
        data: data.clone(),
        waveforms,
        basis: None,
        dual: None,
        trace: None,
        solver: None,
        freqs: Vec::new(),
        angles: None,
        desired: None,
        sign_alpha1: None,
        s1_tilde: Vec::new(),
        weights: Vec::new(),
        pattern: Vec::new(),
        null_depths: Vec::new(),
        solve_seconds: 0.0,
    };

    match settings.method {
        Method::Smi => {
            let f1 = scenario.sources[0].carrier;
            out.freqs = vec![f1];
            out.s1_tilde = crate::linalg::exp_vector(f1, m);
            out.weights = beamform::smi_baseline_weights(&data, f1)?;
        }
        Method::Anm1d | Method::Ivdst => {
            let basis = basis_for(scenario, settings)?;
            let start = Instant::now();
            let (q, slice, report, trace) = if settings.method == Method::Anm1d {
                let sol = anm1d::solve_sdp_1d(x, &basis, &admm)?;
                let last = sol.history.last().copied();
                let report = SolverReport {
                    converged: sol.converged,
                    iterations: sol.iterations,
                    objective: sol.objective,
                    dual_objective: Some(sol.dual_objective),
                    fidelity: Some(sol.fidelity),
                    min_block_eigenvalue: Some(sol.min_block_eigenvalue),
                    psd_shift: Some(sol.psd_shift),
                    final_primal_residual: last.map(|r| r.primal_res),
                    final_dual_residual: last.map(|r| r.dual_res),
                    final_constraint_drift: None,
                };
                (sol.q, sol.x_hat.slice(0).clone(), report, SolverTrace::Admm(sol.history))
            } else {
                let sol = ivdst::ivdst_solve(x, &basis, &settings.ivdst)?;
                let last = sol.trace.last().copied();
                let report = SolverReport {
                    converged: true,
                    iterations: sol.trace.len(),
                    objective: last.map_or(0.0, |r| r.objective),
                    dual_objective: None,
                    fidelity: None,
                    min_block_eigenvalue: None,
                    psd_shift: None,
                    final_primal_residual: None,
                    final_dual_residual: None,
                    final_constraint_drift: last.map(|r| r.constraint_drift),
                };
                // L*(X*) stands in for the primal slice the dual route lacks.
                let adj = tensor_ops::apply_l_adjoint(x, &basis)?;
                (sol.q, adj.slice(0).clone(), report, SolverTrace::Ivdst(sol.trace))
            };
            out.solve_seconds = start.elapsed().as_secs_f64();
            let grid = beamform::uniform_grid(settings.grid_size);
            let values = beamform::dual_polynomial_uniform(&q, settings.grid_size);
            let peak = values.iter().copied().fold(0.0, f64::max);
            let res = beamform::beamform_from_dual(
                &grid,
                &values,
                settings.gamma0 * peak,
                k,
                &slice,
                &data,
                &basis,
                cfg,
                settings.hint,
                &thetas,
            )?;
            out.freqs = res.f_tilde;
            out.desired = Some(res.desired);
            out.sign_alpha1 = Some(res.sign_alpha1);
            out.s1_tilde = res.s1_tilde;
            out.weights = res.w;
            out.dual = Some(DualSurface::OneD { grid, values });
            out.solver = Some(report);
            out.trace = Some(trace);
            out.basis = Some(basis);
        }
        Method::Anm2d => {
            let basis = basis_for(scenario, settings)?;
            let start = Instant::now();
            let sol = anm2d::solve_sdp_2d(x, &basis, cfg, &admm)?;
            out.solve_seconds = start.elapsed().as_secs_f64();
            let (nf, nt) = settings.grid_2d;
            let freqs = beamform::uniform_grid(nf);
            let angles = anm2d::sine_uniform_angles(nt);
            let values = anm2d::dual_polynomial_2d(&sol.q, &freqs, &angles, cfg)?;
            let peak = values.iter().flatten().copied().fold(0.0, f64::max);
            let atoms = anm2d::cluster_2d(&freqs, &angles, &values, settings.gamma0 * peak, k, m, cfg.len())?;
            let centers: Vec<f64> = atoms.iter().map(|a| a.0).collect();
            let desired = beamform::select_desired(&centers, settings.hint);
            let sign = anm2d::estimate_sign_alpha1_2d(&sol.x_hat, &atoms, desired, cfg)?;
            out.s1_tilde = beamform::reconstruct_s1(centers[desired], &sign, &basis);
            out.weights = beamform::smi_weights(&data, &out.s1_tilde)?;
            out.freqs = centers;
            out.angles = Some(atoms.iter().map(|a| a.1).collect());
            out.desired = Some(desired);
            out.sign_alpha1 = Some(sign);
            let last = sol.history.last().copied();
            out.solver = Some(SolverReport {
                converged: sol.converged,
                iterations: sol.iterations,
                objective: sol.objective,
                dual_objective: Some(sol.dual_objective),
                fidelity: Some(sol.fidelity),
                min_block_eigenvalue: Some(sol.min_block_eigenvalue),
                psd_shift: Some(sol.psd_shift),
                final_primal_residual: last.map(|r| r.primal_res),
                final_dual_residual: last.map(|r| r.dual_res),
                final_constraint_drift: None,
            });
            out.trace = Some(SolverTrace::Admm(sol.history));
            out.dual = Some(DualSurface::TwoD { freqs, angles, values });
            out.basis = Some(basis);
        }
    }

    out.pattern = beamform::radiation_pattern(&out.weights, cfg, &thetas)?;
    let interferers = scenario.interferer_angles();
    let depths = beamform::relative_gain_db(&out.weights, cfg, scenario.desired_angle(), &interferers)?;
    out.null_depths = interferers.into_iter().zip(depths).collect();
    Ok(out)
}
