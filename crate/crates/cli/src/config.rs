//! TOML scenario schema. Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use robust_dbf::anm1d::AdmmParams;
use robust_dbf::array_model::{make_offset, ArrayConfig, OffsetSpec, PhaseConvention, SourceSpec};
use robust_dbf::ivdst::IvdstParams;
use robust_dbf::pipeline::{Method, Scenario, Settings};
use robust_dbf::C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub method: Method,
    /// Snapshot count M.
    pub snapshots: usize,
    /// Seeds the IVDST initialization.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub convention: PhaseConvention,
    /// Output directory; relative paths resolve under the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub array: ArraySection,
    /// The first source is the desired one.
    pub sources: Vec<SourceSection>,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    /// Element spacing in wavelengths (with `elements`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Explicit element positions in wavelengths (instead of `elements`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub angle_deg: f64,
    pub carrier: f64,
    pub offset: OffsetSpec,
    /// Complex amplitude as `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// DPSS order L.
    pub order: usize,
    /// DPSS half-bandwidth W; defaults to `L / (2M)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_bandwidth: Option<f64>,
    pub eta: f64,
    pub iters: usize,
    pub decay: f64,
    pub decay_every: usize,
    pub rho: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Fidelity radius ε relative to `‖X*‖_F`.
    pub eps: f64,
    /// Clustering threshold as a fraction of the dual polynomial maximum.
    pub gamma0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    pub grid: usize,
    pub grid_2d: [usize; 2],
    pub pattern_step: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = Settings::default();
        Self {
            order: s.order,
            half_bandwidth: None,
            eta: s.ivdst.eta,
            iters: s.ivdst.iters,
            decay: s.ivdst.decay,
            decay_every: s.ivdst.decay_every,
            rho: s.admm.rho,
            max_iters: s.admm.max_iters,
            tol: s.admm.tol_primal,
            eps: s.fidelity,
            gamma0: s.gamma0,
            hint: None,
            clusters: None,
            grid: s.grid_size,
            grid_2d: [s.grid_2d.0, s.grid_2d.1],
            pattern_step: s.pattern_step,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid scenario config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            bail!("scenario '{}' has no sources", self.name);
        }
        if self.snapshots < 2 {
            bail!("need at least 2 snapshots, got {}", self.snapshots);
        }
        self.array_config()?;
        self.scenario()?;
        Ok(())
    }

    pub fn array_config(&self) -> Result<ArrayConfig> {
        let a = &self.array;
        Ok(match (&a.positions, a.elements) {
            (Some(_), Some(_)) => bail!("give either array.positions or array.elements, not both"),
            (Some(p), None) => {
                if a.spacing.is_some() {
                    bail!("array.spacing only applies with array.elements");
                }
                ArrayConfig::new(p.clone(), std::f64::consts::TAU)?
            }
            (None, Some(n)) => ArrayConfig::uniform(n, a.spacing.unwrap_or(0.5))?,
            (None, None) => bail!("array needs elements or positions"),
        })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let sources = self
            .sources
            .iter()
            .map(|s| {
                let spec = SourceSpec::new(s.angle_deg, s.carrier, make_offset(s.offset, self.snapshots)?)?;
                Ok(match s.amplitude {
                    Some([re, im]) => spec.with_amplitude(C64::new(re, im)),
                    None => spec,
                })
            })
            .collect::<robust_dbf::Result<_>>()?;
        Ok(Scenario { array: self.array_config()?, sources, snapshots: self.snapshots, convention: self.convention })
    }

    pub fn settings(&self) -> Settings {
        let s = &self.solver;
        Settings {
            method: self.method,
            order: s.order,
            half_bandwidth: s.half_bandwidth,
            admm: AdmmParams {
                rho: s.rho,
                max_iters: s.max_iters,
                tol_primal: s.tol,
                tol_dual: s.tol,
                ..AdmmParams::default()
            },
            fidelity: s.eps,
            ivdst: IvdstParams { eta: s.eta, decay: s.decay, decay_every: s.decay_every, iters: s.iters, seed: self.seed },
            gamma0: s.gamma0,
            grid_size: s.grid,
            grid_2d: (s.grid_2d[0], s.grid_2d[1]),
            hint: s.hint,
            clusters: s.clusters,
            pattern_step: s.pattern_step,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
method = "ivdst"
snapshots = 64
seed = 3

[array]
elements = 4
spacing = 0.5

[[sources]]
angle_deg = -20.0
carrier = 0.1
offset = { kind = "static", value = 0.003 }

[[sources]]
angle_deg = 30.0
carrier = 0.4
offset = { kind = "zigzag", slope = 4e-4, half_period = 16 }

[solver]
order = 5
gamma0 = 0.8
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ScenarioConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.method, Method::Ivdst);
        assert_eq!(cfg.solver.order, 5);
        assert_eq!(cfg.solver.eta, 4.0);
        let again = ScenarioConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
        let s = cfg.settings();
        assert_eq!(s.ivdst.seed, 3);
        assert_eq!(s.gamma0, 0.8);
        assert_eq!(cfg.scenario().unwrap().sources.len(), 2);
    }

    #[test]
    fn rejects_unknown_keys() {
        for (from, to) in [("seed = 3", "seed = 3\ncolour = 1"), ("order = 5", "order = 5\nlambda = 2"), ("spacing = 0.5", "spacing = 0.5\nrows = 2")] {
            let bad = SAMPLE.replace(from, to);
            assert!(ScenarioConfig::from_toml(&bad).is_err(), "{to}");
        }
        let bad = SAMPLE.replace("value = 0.003", "value = 0.003, slope = 1.0");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn rejects_inconsistent_arrays_and_sources() {
        let both = SAMPLE.replace("spacing = 0.5", "spacing = 0.5\npositions = [0.0, 0.5]");
        assert!(ScenarioConfig::from_toml(&both).is_err());
        let far = SAMPLE.replace("angle_deg = 30.0", "angle_deg = 120.0");
        assert!(ScenarioConfig::from_toml(&far).is_err());
        let method = SAMPLE.replace("\"ivdst\"", "\"cvx\"");
        assert!(ScenarioConfig::from_toml(&method).is_err());
    }
}
