//! Array geometry, carrier-offset trajectories, source waveforms and the
//! snapshot matrix `X* = Σ_k s_k asv(θ_k)`.

use std::f64::consts::TAU;
use std::io::Write;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

/// Element positions (in wavelengths) and wavenumber of a linear array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    positions: Vec<f64>,
    wavenumber: f64,
}

impl ArrayConfig {
    pub fn new(positions: Vec<f64>, wavenumber: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "an array needs at least 2 elements, got {}",
                positions.len()
            )));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("element positions must be finite".into()));
        }
        let mut sorted = positions.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("element positions must be distinct".into()));
        }
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {wavenumber}")));
        }
        Ok(Self { positions, wavenumber })
    }

    /// Centred uniform line `q_n = (n − (N−1)/2)·spacing`, wavenumber 2π.
    pub fn uniform(n: usize, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
        }
        let c = (n as f64 - 1.0) / 2.0;
        Self::new((0..n).map(|i| (i as f64 - c) * spacing).collect(), TAU)
    }

    /// Half-wavelength uniform array, the default geometry of the experiments.
    pub fn half_wavelength(n: usize) -> Result<Self> {
        Self::uniform(n, 0.5)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    /// Element spacing if the positions form an arithmetic progression in the
    /// given order.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let d = self.positions[1] - self.positions[0];
        let tol = 1e-9 * d.abs().max(1.0);
        let ok = d != 0.0
            && self
                .positions
                .windows(2)
                .all(|w| ((w[1] - w[0]) - d).abs() <= tol);
        ok.then_some(d)
    }
}

fn check_angle(theta_deg: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&theta_deg) {
        return Err(Error::Domain(format!("angle {theta_deg}° outside [-90, 90]")));
    }
    Ok(())
}

/// Per-element phase response `exp(j k0 sin θ q_n)` of a plane wave from
/// `theta_deg` degrees.
pub fn steering_vector(theta_deg: f64, cfg: &ArrayConfig) -> Result<Vec<C64>> {
    check_angle(theta_deg)?;
    Ok(steering_vector_sin(theta_deg.to_radians().sin(), cfg))
}

/// Steering vector parameterised by `sin θ` directly (used by grid scans).
pub fn steering_vector_sin(sin_theta: f64, cfg: &ArrayConfig) -> Vec<C64> {
    cfg.positions
        .iter()
        .map(|&q| C64::from_polar(1.0, cfg.wavenumber * sin_theta * q))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetKind {
    Static,
    Linear,
    Zigzag,
    Random,
}

impl OffsetKind {
    pub const ALL: [OffsetKind; 4] = [Self::Static, Self::Linear, Self::Zigzag, Self::Random];

    pub fn name(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::Linear => "linear",
            Self::Zigzag => "zigzag",
            Self::Random => "random",
        }
    }
}

impl std::fmt::Display for OffsetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OffsetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown offset kind '{s}'")))
    }
}

/// Generator parameters for a carrier-offset trajectory (cycles/sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OffsetSpec {
    Static { value: f64 },
    Linear { slope: f64 },
    /// Triangle wave starting at zero: `half_period` samples rising at
    /// `slope`, then `half_period` samples falling back, and so on.
    Zigzag { slope: f64, half_period: usize },
    /// Seeded Gaussian random walk started at zero and clipped to `±bound`.
    Random { bound: f64, seed: u64 },
}

impl OffsetSpec {
    pub fn kind(&self) -> OffsetKind {
        match self {
            Self::Static { .. } => OffsetKind::Static,
            Self::Linear { .. } => OffsetKind::Linear,
            Self::Zigzag { .. } => OffsetKind::Zigzag,
            Self::Random { .. } => OffsetKind::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetTrajectory {
    pub spec: OffsetSpec,
    pub values: Vec<f64>,
}

impl OffsetTrajectory {
    pub fn kind(&self) -> OffsetKind {
        self.spec.kind()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &d| a.max(d.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len().max(1) as f64
    }

    /// CSV with header `m,delta`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m,delta")?;
        for (m, d) in self.values.iter().enumerate() {
            writeln!(out, "{m},{d:.17e}")?;
        }
        Ok(())
    }
}

/// Generates the length-`m` offset sequence described by `spec`.
pub fn make_offset(spec: OffsetSpec, m: usize) -> Result<OffsetTrajectory> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 snapshots, got {m}")));
    }
    let values: Vec<f64> = match spec {
        OffsetSpec::Static { value } => vec![value; m],
        OffsetSpec::Linear { slope } => (0..m).map(|i| slope * i as f64).collect(),
        OffsetSpec::Zigzag { slope, half_period } => {
            if half_period == 0 {
                return Err(Error::InvalidParameter("zigzag half-period must be positive".into()));
            }
            (0..m)
                .map(|i| {
                    let pos = (i % half_period) as f64;
                    if (i / half_period) % 2 == 0 {
                        slope * pos
                    } else {
                        slope * (half_period as f64 - pos)
                    }
                })
                .collect()
        }
        OffsetSpec::Random { bound, seed } => {
            if !(bound.is_finite() && bound > 0.0) {
                return Err(Error::InvalidParameter(format!("random-walk bound must be positive, got {bound}")));
            }
            // Step size chosen so an unclipped walk of length m has a spread of
            // roughly 1.5·bound; the clip keeps the declared envelope.
            let step = Normal::new(0.0, 1.5 * bound / (m as f64).sqrt()).expect("finite std");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = 0.0;
            (0..m)
                .map(|i| {
                    if i > 0 {
                        acc += step.sample(&mut rng);
                    }
                    acc.clamp(-bound, bound)
                })
                .collect()
        }
    };
    if values.iter().any(|d| !d.is_finite() || d.abs() >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{} offset leaves the unit frequency interval",
            spec.kind()
        )));
    }
    Ok(OffsetTrajectory { spec, values })
}

/// Draws the offset specs of one randomized trial: three integers in 1..=6
/// with random sign, scaled by 0.01 (static value) or 0.001 (linear and
/// zigzag slopes). Random trials draw fresh walk seeds.
pub fn random_trial_offsets<R: Rng + ?Sized>(
    kind: OffsetKind,
    template: OffsetSpec,
    rng: &mut R,
) -> [OffsetSpec; 3] {
    let half_period = match template {
        OffsetSpec::Zigzag { half_period, .. } => half_period,
        _ => 1,
    };
    let bound = match template {
        OffsetSpec::Random { bound, .. } => bound,
        _ => 0.01,
    };
    std::array::from_fn(|_| {
        let k = rng.gen_range(1..=6) as f64;
        let mut signed = |scale: f64| if rng.gen_bool(0.5) { k * scale } else { -k * scale };
        match kind {
            OffsetKind::Static => OffsetSpec::Static { value: signed(0.01) },
            OffsetKind::Linear => OffsetSpec::Linear { slope: signed(0.001) },
            OffsetKind::Zigzag => OffsetSpec::Zigzag { slope: signed(0.001), half_period },
            OffsetKind::Random => OffsetSpec::Random { bound, seed: rng.gen() },
        }
    })
}

/// How a drifting offset enters the waveform phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseConvention {
    /// FM: `Φ[m] = Σ_{i<m} δ[i]`, phase `2π(f°m + Φ[m])`.
    #[default]
    Cumulative,
    /// Phase `2π(f° + δ[m])m`.
    Instantaneous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub angle_deg: f64,
    pub carrier: f64,
    pub offset: OffsetTrajectory,
    pub amplitude: C64,
}

impl SourceSpec {
    pub fn new(angle_deg: f64, carrier: f64, offset: OffsetTrajectory) -> Result<Self> {
        check_angle(angle_deg)?;
        if !(0.0..1.0).contains(&carrier) {
            return Err(Error::Domain(format!("carrier {carrier} outside [0, 1)")));
        }
        Ok(Self {
            angle_deg,
            carrier,
            offset,
            amplitude: C64::new(1.0, 0.0),
        })
    }

    pub fn with_amplitude(mut self, amplitude: C64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Source waveform `s[m] = amplitude · exp(j2π(f°m + Φ[m]))`.
pub fn synthesize_source(spec: &SourceSpec, m: usize, convention: PhaseConvention) -> Result<Vec<C64>> {
    if spec.offset.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "offset trajectory has {} samples, expected {m}",
            spec.offset.len()
        )));
    }
    let mut phi = 0.0;
    let mut out = Vec::with_capacity(m);
    for (i, &d) in spec.offset.values.iter().enumerate() {
        let cycles = match convention {
            PhaseConvention::Cumulative => spec.carrier * i as f64 + phi,
            PhaseConvention::Instantaneous => (spec.carrier + d) * i as f64,
        };
        out.push(spec.amplitude * C64::from_polar(1.0, TAU * cycles));
        phi += d;
    }
    Ok(out)
}

/// The M×N snapshot matrix (time down the rows, elements across).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    entries: CMat,
}

impl DataMatrix {
    pub fn new(entries: CMat) -> Self {
        Self { entries }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self::new(CMat::zeros(m, n))
    }

    pub fn snapshots(&self) -> usize {
        self.entries.nrows()
    }

    pub fn elements(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn column(&self, n: usize) -> Vec<C64> {
        linalg::col_to_vec(self.entries.as_ref(), n)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.norm_l2()
    }

    /// Number of singular values above `tol · σ_max`.
    pub fn numerical_rank(&self, tol: f64) -> Result<usize> {
        linalg::numerical_rank(self.entries.as_ref(), tol)
    }

    /// Row order reversed (m → M−1−m).
    pub fn time_reversed(&self) -> Self {
        let m = self.snapshots();
        Self::new(Mat::from_fn(m, self.elements(), |i, j| self.entries[(m - 1 - i, j)]))
    }
}

/// `X* = Σ_k s_k asv(θ_k)` together with the source waveforms.
pub fn build_data_matrix(
    specs: &[SourceSpec],
    cfg: &ArrayConfig,
    m: usize,
    convention: PhaseConvention,
) -> Result<(DataMatrix, Vec<Vec<C64>>)> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("at least one source is required".into()));
    }
    let mut x = CMat::zeros(m, cfg.len());
    let mut waveforms = Vec::with_capacity(specs.len());
    for spec in specs {
        let s = synthesize_source(spec, m, convention)?;
        let a = steering_vector(spec.angle_deg, cfg)?;
        for (j, &aj) in a.iter().enumerate() {
            for (i, &si) in s.iter().enumerate() {
                x[(i, j)] += si * aj;
            }
        }
        waveforms.push(s);
    }
    Ok((DataMatrix::new(x), waveforms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        for z in steering_vector(0.0, &cfg).unwrap() {
            assert!((z - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn mirrored_angle_conjugates_steering() {
        let cfg = ArrayConfig::half_wavelength(4).unwrap();
        let a = steering_vector(20.0, &cfg).unwrap();
        let b = steering_vector(-20.0, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.conj() - y).norm() < 1e-14);
        }
    }

    #[test]
    fn thirty_degrees_hand_values() {
        let cfg = ArrayConfig::half_wavelength(4).unwrap();
        assert_eq!(cfg.positions(), &[-0.75, -0.25, 0.25, 0.75]);
        let a = steering_vector(30.0, &cfg).unwrap();
        for (z, q) in a.iter().zip(cfg.positions()) {
            let want = c((std::f64::consts::PI * q).cos(), (std::f64::consts::PI * q).sin());
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn angle_out_of_range_is_rejected() {
        let cfg = ArrayConfig::half_wavelength(4).unwrap();
        assert!(matches!(steering_vector(91.0, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn offset_generators() {
        let z = make_offset(OffsetSpec::Static { value: 0.0 }, 120).unwrap();
        assert!(z.values.iter().all(|&d| d == 0.0));

        let lin = make_offset(OffsetSpec::Linear { slope: 0.0005 }, 120).unwrap();
        assert!((lin.values[119] - 0.0595).abs() < 1e-15);

        let zz = make_offset(OffsetSpec::Zigzag { slope: 0.001, half_period: 30 }, 120).unwrap();
        assert!((zz.values[30] - 0.030).abs() < 1e-15);
        assert!(zz.values[60].abs() < 1e-15);
        assert!((zz.values[45] - 0.015).abs() < 1e-15);
    }

    #[test]
    fn random_walk_is_seeded_and_bounded() {
        let spec = OffsetSpec::Random { bound: 0.01, seed: 7 };
        let a = make_offset(spec, 200).unwrap();
        let b = make_offset(spec, 200).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs() <= 0.01);
        assert_eq!(a.values[0], 0.0);
        let other = make_offset(OffsetSpec::Random { bound: 0.01, seed: 8 }, 200).unwrap();
        assert_ne!(a.values, other.values);
    }

    #[test]
    fn invalid_offsets() {
        assert!(make_offset(OffsetSpec::Static { value: 0.0 }, 1).is_err());
        assert!(make_offset(OffsetSpec::Linear { slope: 0.01 }, 120).is_err());
        assert!(make_offset(OffsetSpec::Zigzag { slope: 0.01, half_period: 0 }, 20).is_err());
    }

    #[test]
    fn zero_offset_source_is_pure_tone() {
        let off = make_offset(OffsetSpec::Static { value: 0.0 }, 64).unwrap();
        let spec = SourceSpec::new(10.0, 0.23, off).unwrap();
        let s = synthesize_source(&spec, 64, PhaseConvention::Cumulative).unwrap();
        let a = linalg::exp_vector(0.23, 64);
        for (x, y) in s.iter().zip(&a) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn static_offset_shifts_the_tone() {
        let off = make_offset(OffsetSpec::Static { value: 0.004 }, 64).unwrap();
        let spec = SourceSpec::new(0.0, 0.2, off).unwrap();
        let s = synthesize_source(&spec, 64, PhaseConvention::Cumulative).unwrap();
        let a = linalg::exp_vector(0.204, 64);
        let ratio = s[0] / a[0];
        assert!((ratio.norm() - 1.0).abs() < 1e-12);
        for (x, y) in s.iter().zip(&a) {
            assert!((x / y - ratio).norm() < 1e-10);
        }
    }

    #[test]
    fn instantaneous_convention_differs_for_drift() {
        let off = make_offset(OffsetSpec::Linear { slope: 1e-4 }, 50).unwrap();
        let spec = SourceSpec::new(0.0, 0.1, off).unwrap();
        let a = synthesize_source(&spec, 50, PhaseConvention::Cumulative).unwrap();
        let b = synthesize_source(&spec, 50, PhaseConvention::Instantaneous).unwrap();
        assert_eq!(a[0], b[0]);
        assert!((a[49] - b[49]).norm() > 1e-3);
        let m = 49.0;
        let want = C64::from_polar(1.0, TAU * (0.1 * m + 1e-4 * m * (m - 1.0) / 2.0));
        assert!((a[49] - want).norm() < 1e-10);
    }

    #[test]
    fn experiment_scene_has_rank_three() {
        let cfg = ArrayConfig::half_wavelength(4).unwrap();
        let specs: Vec<_> = [(-20.0, 0.1), (-60.0, 0.3), (20.0, 0.5)]
            .iter()
            .map(|&(th, f)| {
                SourceSpec::new(th, f, make_offset(OffsetSpec::Static { value: 0.003 }, 120).unwrap()).unwrap()
            })
            .collect();
        let (x, _) = build_data_matrix(&specs, &cfg, 120, PhaseConvention::Cumulative).unwrap();
        assert_eq!(x.numerical_rank(1e-8).unwrap(), 3);
    }

    #[test]
    fn single_broadside_source_gives_rank_one_copies() {
        let cfg = ArrayConfig::half_wavelength(3).unwrap();
        let spec = SourceSpec::new(0.0, 0.3, make_offset(OffsetSpec::Linear { slope: 1e-4 }, 20).unwrap()).unwrap();
        let (x, s) = build_data_matrix(std::slice::from_ref(&spec), &cfg, 20, PhaseConvention::Cumulative).unwrap();
        for n in 0..3 {
            assert_eq!(x.column(n), s[0]);
        }
        assert_eq!(x.numerical_rank(1e-8).unwrap(), 1);
        let twice = [spec.clone(), spec];
        let (x2, _) = build_data_matrix(&twice, &cfg, 20, PhaseConvention::Cumulative).unwrap();
        assert_eq!(x2.numerical_rank(1e-8).unwrap(), 1);
    }

    #[test]
    fn empty_source_list_is_rejected() {
        let cfg = ArrayConfig::half_wavelength(3).unwrap();
        assert!(build_data_matrix(&[], &cfg, 10, PhaseConvention::Cumulative).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let t = make_offset(OffsetSpec::Linear { slope: 0.5e-3 }, 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "m,delta");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1,5.0"));
    }

    #[test]
    fn uniform_spacing_detection() {
        assert_eq!(ArrayConfig::half_wavelength(4).unwrap().uniform_spacing(), Some(0.5));
        let irregular = ArrayConfig::new(vec![0.0, 0.5, 1.2], TAU).unwrap();
        assert_eq!(irregular.uniform_spacing(), None);
        assert!(ArrayConfig::new(vec![0.0, 0.0], TAU).is_err());
    }

    #[test]
    fn trial_offsets_use_integer_multiples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            for spec in random_trial_offsets(OffsetKind::Linear, OffsetSpec::Linear { slope: 0.0 }, &mut rng) {
                let OffsetSpec::Linear { slope } = spec else { panic!() };
                let k = (slope.abs() / 0.001).round();
                assert!((1.0..=6.0).contains(&k));
                assert!((slope.abs() - k * 0.001).abs() < 1e-15);
            }
        }
    }

    fn small_scene() -> impl Strategy<Value = (usize, usize, Vec<(f64, f64, f64)>)> {
        (8usize..=32, 2usize..=4).prop_flat_map(|(m, n)| {
            let k = 1usize..=3.min(n);
            (Just(m), Just(n), k.prop_flat_map(|k| {
                prop::collection::vec((-80.0f64..80.0, 0.0f64..1.0, -2e-3f64..2e-3), k)
            }))
        })
    }

    proptest! {
        #[test]
        fn steering_entries_have_unit_modulus(theta in -90.0f64..=90.0, n in 2usize..12) {
            let cfg = ArrayConfig::half_wavelength(n).unwrap();
            for z in steering_vector(theta, &cfg).unwrap() {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn data_matrix_is_linear_in_amplitude((m, n, srcs) in small_scene(), gain in 0.5f64..3.0) {
            let cfg = ArrayConfig::half_wavelength(n).unwrap();
            let specs: Vec<_> = srcs.iter().map(|&(th, f, slope)| {
                SourceSpec::new(th, f, make_offset(OffsetSpec::Linear { slope }, m).unwrap()).unwrap()
            }).collect();
            let (x, _) = build_data_matrix(&specs, &cfg, m, PhaseConvention::Cumulative).unwrap();
            let mut scaled = specs.clone();
            scaled[0].amplitude *= gain;
            let (y, _) = build_data_matrix(&scaled, &cfg, m, PhaseConvention::Cumulative).unwrap();
            let (first, _) = build_data_matrix(&specs[..1], &cfg, m, PhaseConvention::Cumulative).unwrap();
            let expect = x.entries() + first.entries() * faer::Scale(C64::new(gain - 1.0, 0.0));
            prop_assert!((y.entries() - &expect).norm_l2() < 1e-10 * x.frobenius().max(1.0));
        }

        #[test]
        fn rank_counts_distinct_sources((m, n, srcs) in small_scene()) {
            // Keep carriers and angles separated so the sources are well
            // conditioned at the 1e-8 rank tolerance.
            let k = srcs.len();
            let cfg = ArrayConfig::half_wavelength(n).unwrap();
            let specs: Vec<_> = srcs.iter().enumerate().map(|(i, &(_, f, slope))| {
                let theta = -60.0 + 50.0 * i as f64;
                let carrier = (f * 0.2 + 0.3 * i as f64) % 1.0;
                SourceSpec::new(theta, carrier, make_offset(OffsetSpec::Linear { slope }, m).unwrap()).unwrap()
            }).collect();
            let (x, _) = build_data_matrix(&specs, &cfg, m, PhaseConvention::Cumulative).unwrap();
            prop_assert_eq!(x.numerical_rank(1e-8).unwrap(), k);
        }
    }
}
