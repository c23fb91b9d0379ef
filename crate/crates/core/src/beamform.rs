//! From a dual tensor to nulling weights: dual-polynomial scan, frequency
//! clustering, DPSS sign estimate, pilot reconstruction and SMI weights.

use std::f64::consts::TAU;
use std::io::Write;

use faer::Mat;
use log::warn;
use rayon::prelude::*;

use crate::array_model::{self, ArrayConfig, DataMatrix};
use crate::dpss::DpssBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};
use crate::tensor_ops::Tensor3;

/// Default scan size on `[0, 1)`.
pub const DEFAULT_GRID: usize = 8192;

pub fn uniform_grid(size: usize) -> Vec<f64> {
    (0..size).map(|k| k as f64 / size as f64).collect()
}

/// `q(f) = ‖[Q_1ᴴ a(f), …, Q_Nᴴ a(f)]‖_F` at arbitrary frequencies.
pub fn dual_polynomial_1d(q: &Tensor3, grid: &[f64]) -> Vec<f64> {
    let (m, l, _) = q.dims();
    grid.par_iter()
        .map(|&f| {
            let a = linalg::exp_vector(f, m);
            q.slices()
                .iter()
                .map(|s| {
                    (0..l)
                        .map(|j| (0..m).map(|i| s[(i, j)].conj() * a[i]).sum::<C64>().norm_sqr())
                        .sum::<f64>()
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// `q` on the grid `k/size`, using an exact phasor table.
pub fn dual_polynomial_uniform(q: &Tensor3, size: usize) -> Vec<f64> {
    let (m, l, _) = q.dims();
    let table: Vec<C64> = (0..size)
        .map(|t| C64::from_polar(1.0, TAU * t as f64 / size as f64))
        .collect();
    // Conjugated columns laid out contiguously.
    let cols: Vec<Vec<C64>> = q
        .slices()
        .iter()
        .flat_map(|s| (0..l).map(move |j| (0..m).map(|i| s[(i, j)].conj()).collect::<Vec<_>>()))
        .collect();
    (0..size)
        .into_par_iter()
        .map(|k| {
            cols.iter()
                .map(|c| {
                    let mut acc = ZERO;
                    let mut idx = 0usize;
                    for &v in c {
                        acc += v * table[idx];
                        idx += k;
                        if idx >= size {
                            idx -= size;
                        }
                    }
                    acc.norm_sqr()
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Writes `f,q`.
pub fn write_dual_csv<W: Write>(grid: &[f64], q: &[f64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "f,q")?;
    for (f, v) in grid.iter().zip(q) {
        writeln!(out, "{f:.10},{v:.12e}")?;
    }
    Ok(())
}

/// Signed distance from `b` to `a` on the unit circle, in `[-½, ½)`.
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_diff(a, b).abs()
}

/// K-means on the circle `[0, 1)` over the grid points with `q ≥ threshold`.
///
/// Fails when fewer than `k` above-threshold points lie `min_separation`
/// apart. Returns the centers sorted ascending.
pub fn cluster_frequencies(
    grid: &[f64],
    q: &[f64],
    threshold: f64,
    k: usize,
    min_separation: f64,
) -> Result<Vec<f64>> {
    assert_eq!(grid.len(), q.len());
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one cluster".into()));
    }
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]).then(q[a].total_cmp(&q[b])));
    let f: Vec<f64> = order.iter().map(|&i| grid[i].rem_euclid(1.0)).collect();
    let v: Vec<f64> = order.iter().map(|&i| q[i]).collect();
    let n = f.len();
    let above: Vec<usize> = (0..n).filter(|&i| v[i] >= threshold).collect();
    if above.len() < k {
        return Err(Error::ThresholdTooHigh { found: above.len(), needed: k, gamma0: threshold });
    }

    // Maximin seeding: the global peak, then repeatedly the above-threshold
    // point farthest from every chosen center. Plateaus spanning a whole
    // DPSS band then still get one seed each.
    let top = above
        .iter()
        .copied()
        .max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a)))
        .expect("non-empty");
    let mut centers: Vec<f64> = vec![f[top]];
    while centers.len() < k {
        let gap = |i: usize| centers.iter().map(|&c| circular_distance(c, f[i])).fold(f64::INFINITY, f64::min);
        let far = above
            .iter()
            .copied()
            .max_by(|&a, &b| gap(a).total_cmp(&gap(b)).then(v[a].total_cmp(&v[b])).then(b.cmp(&a)))
            .expect("non-empty");
        if gap(far) < min_separation {
            break;
        }
        centers.push(f[far]);
    }
    if centers.len() < k {
        return Err(Error::ThresholdTooHigh { found: centers.len(), needed: k, gamma0: threshold });
    }

    let mut assign = vec![usize::MAX; above.len()];
    for _ in 0..200 {
        let mut changed = false;
        for (slot, &i) in assign.iter_mut().zip(&above) {
            let best = (0..k)
                .min_by(|&a, &b| {
                    circular_distance(centers[a], f[i])
                        .total_cmp(&circular_distance(centers[b], f[i]))
                        .then(a.cmp(&b))
                })
                .expect("k > 0");
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<f64> = assign
                .iter()
                .zip(&above)
                .filter(|(a, _)| **a == c)
                .map(|(_, &i)| wrap_diff(f[i], *center))
                .collect();
            if !members.is_empty() {
                let shift = members.iter().sum::<f64>() / members.len() as f64;
                *center = (*center + shift).rem_euclid(1.0);
            }
        }
        if !changed {
            break;
        }
    }
    centers.sort_by(f64::total_cmp);
    Ok(centers)
}

/// Index of the center nearest `hint` (circularly), or of the smallest
/// frequency when no hint is given.
pub fn select_desired(centers: &[f64], hint: Option<f64>) -> usize {
    match hint {
        Some(h) => (0..centers.len())
            .min_by(|&a, &b| {
                circular_distance(centers[a], h)
                    .total_cmp(&circular_distance(centers[b], h))
                    .then(a.cmp(&b))
            })
            .unwrap_or(0),
        None => (0..centers.len())
            .min_by(|&a, &b| centers[a].total_cmp(&centers[b]))
            .unwrap_or(0),
    }
}

/// Vandermonde-like `[a(f_1) ⋯ a(f_K)]`.
pub fn tone_matrix(freqs: &[f64], m: usize) -> CMat {
    let cols: Vec<Vec<C64>> = freqs.iter().map(|&f| linalg::exp_vector(f, m)).collect();
    Mat::from_fn(m, freqs.len(), |i, k| cols[k][i])
}

/// Relative singular-value cutoff below which two carriers are treated as
/// the same frequency.
pub const DISTINCT_TOL: f64 = 1e-6;

/// Unit-norm DPSS coefficient direction of the `desired` source: row
/// `desired` of `A_f† X_slice`, normalized.
pub fn estimate_sign_alpha1(x_slice: &CMat, freqs: &[f64], desired: usize) -> Result<Vec<C64>> {
    if desired >= freqs.len() {
        return Err(Error::InvalidParameter(format!(
            "desired index {desired} out of range for {} frequencies",
            freqs.len()
        )));
    }
    let m = x_slice.nrows();
    let af = tone_matrix(freqs, m);
    if linalg::numerical_rank(af.as_ref(), DISTINCT_TOL)? < freqs.len() {
        return Err(Error::DuplicateFrequencies);
    }
    let (pinv, _) = linalg::pinv(af.as_ref())?;
    let coef = &pinv * x_slice;
    let row: Vec<C64> = (0..coef.ncols()).map(|j| coef[(desired, j)]).collect();
    let nrm = linalg::vec_norm(&row);
    if nrm == 0.0 {
        return Err(Error::Domain("the data carry no energy at the desired frequency".into()));
    }
    Ok(row.into_iter().map(|z| z / nrm).collect())
}

/// `s̃₁ = a(f₁) ⊙ (S · sign)`.
pub fn reconstruct_s1(f1: f64, sign_alpha1: &[C64], basis: &DpssBasis) -> Vec<C64> {
    let env = basis.synthesize(sign_alpha1);
    linalg::exp_vector(f1, basis.len())
        .into_iter()
        .zip(env)
        .map(|(a, e)| a * e)
        .collect()
}

/// Least-squares weights `w = X† s`. Rank-deficient data fall back to the
/// minimum-norm solution with a warning.
pub fn smi_weights(x: &DataMatrix, s: &[C64]) -> Result<Vec<C64>> {
    if s.len() != x.snapshots() {
        return Err(Error::DimensionMismatch(format!(
            "pilot has {} samples, data have {}",
            s.len(),
            x.snapshots()
        )));
    }
    let (pinv, rank) = linalg::pinv(x.entries().as_ref())?;
    if rank < x.elements() {
        warn!(
            "data matrix has rank {rank} < {} elements; using the minimum-norm least-squares weights",
            x.elements()
        );
    }
    Ok(linalg::mat_vec(pinv.as_ref(), s))
}

/// Classical SMI with the uncorrected pilot `a(f₁)`.
pub fn smi_baseline_weights(x: &DataMatrix, f1: f64) -> Result<Vec<C64>> {
    smi_weights(x, &linalg::exp_vector(f1, x.snapshots()))
}

/// `|asv(θ)·w|`.
pub fn array_gain(w: &[C64], cfg: &ArrayConfig, theta_deg: f64) -> Result<f64> {
    let a = array_model::steering_vector(theta_deg, cfg)?;
    if a.len() != w.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} elements", w.len(), a.len())));
    }
    Ok(a.iter().zip(w).map(|(x, y)| x * y).sum::<C64>().norm())
}

/// Gain at each `theta` relative to the gain at `reference`, in dB.
pub fn relative_gain_db(w: &[C64], cfg: &ArrayConfig, reference: f64, thetas: &[f64]) -> Result<Vec<f64>> {
    let g0 = array_gain(w, cfg, reference)?;
    thetas
        .iter()
        .map(|&t| Ok(20.0 * (array_gain(w, cfg, t)? / g0).log10()))
        .collect()
}

/// `(θ, gain dB)` pairs normalized to a 0 dB peak over the grid.
pub fn radiation_pattern(w: &[C64], cfg: &ArrayConfig, thetas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if w.iter().all(|z| *z == ZERO) {
        return Err(Error::ZeroWeights);
    }
    let gains: Vec<f64> = thetas.iter().map(|&t| array_gain(w, cfg, t)).collect::<Result<_>>()?;
    let peak = gains.iter().copied().fold(0.0, f64::max);
    Ok(thetas
        .iter()
        .zip(gains)
        .map(|(&t, g)| (t, 20.0 * (g / peak).log10()))
        .collect())
}

/// `-90°, …, 90°` in `step` increments.
pub fn angle_grid(step: f64) -> Vec<f64> {
    let n = (180.0 / step).round() as usize;
    (0..=n).map(|i| -90.0 + 180.0 * i as f64 / n as f64).collect()
}

/// Writes `theta_deg,gain_db`.
pub fn write_pattern_csv<W: Write>(pattern: &[(f64, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta_deg,gain_db")?;
    for (t, g) in pattern {
        writeln!(out, "{t:.6},{g:.10}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformResult {
    pub f_tilde: Vec<f64>,
    pub desired: usize,
    pub sign_alpha1: Vec<C64>,
    pub s1_tilde: Vec<C64>,
    pub w: Vec<C64>,
    pub pattern: Vec<(f64, f64)>,
}

/// Everything after the solver: cluster the dual polynomial, estimate the
/// desired source's DPSS direction from `x_slice`, rebuild its pilot and
/// form the SMI weights.
#[allow(clippy::too_many_arguments)]
pub fn beamform_from_dual(
    grid: &[f64],
    q_vals: &[f64],
    gamma0: f64,
    k: usize,
    x_slice: &CMat,
    data: &DataMatrix,
    basis: &DpssBasis,
    cfg: &ArrayConfig,
    hint: Option<f64>,
    thetas: &[f64],
) -> Result<BeamformResult> {
    let m = basis.len();
    let f_tilde = cluster_frequencies(grid, q_vals, gamma0, k, 1.0 / (2.0 * m as f64))?;
    let desired = select_desired(&f_tilde, hint);
    let sign_alpha1 = estimate_sign_alpha1(x_slice, &f_tilde, desired)?;
    let s1_tilde = reconstruct_s1(f_tilde[desired], &sign_alpha1, basis);
    let w = smi_weights(data, &s1_tilde)?;
    let pattern = radiation_pattern(&w, cfg, thetas)?;
    Ok(BeamformResult { f_tilde, desired, sign_alpha1, s1_tilde, w, pattern })
}
