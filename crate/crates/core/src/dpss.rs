//! Discrete prolate spheroidal (Slepian) sequences.
//!
//! The basis comes from the symmetric tridiagonal matrix that commutes with
//! the time-bandlimiting operator; its eigenvectors are the Slepian vectors
//! and share their ordering. The concentration of each vector in `[-W, W]` is
//! then measured against the sinc kernel.

use std::f64::consts::PI;
use std::io::Write;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::linalg::{self, RMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct DpssBasis {
    /// M×L, orthonormal columns.
    pub vectors: RMat,
    /// Fraction of each column's energy inside `[-W, W]`, decreasing.
    pub concentrations: Vec<f64>,
    pub half_bandwidth: f64,
}

impl DpssBasis {
    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn order(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    /// `‖Σ_l S[m,l]²‖` per row; the diagonal of `L L*`.
    pub fn row_energies(&self) -> Vec<f64> {
        let s = &self.vectors;
        (0..s.nrows())
            .map(|m| (0..s.ncols()).map(|l| s[(m, l)] * s[(m, l)]).sum())
            .collect()
    }

    /// `S·c` for complex coefficients `c`.
    pub fn synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        assert_eq!(coeffs.len(), self.order());
        let s = &self.vectors;
        (0..s.nrows())
            .map(|m| (0..s.ncols()).map(|l| coeffs[l] * s[(m, l)]).sum())
            .collect()
    }

    /// `Sᵀ·v` for a complex signal `v`.
    pub fn analyze(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.len());
        let s = &self.vectors;
        (0..s.ncols())
            .map(|l| (0..s.nrows()).map(|m| v[m] * s[(m, l)]).sum())
            .collect()
    }

    /// CSV with header `m,s0,…,s{L-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let l = self.order();
        let header: Vec<String> = std::iter::once("m".to_string())
            .chain((0..l).map(|i| format!("s{i}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for m in 0..self.len() {
            write!(out, "{m}")?;
            for c in 0..l {
                write!(out, ",{:.17e}", self.vectors[(m, c)])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Default half-bandwidth when only the basis size is given: `W = L/(2M)`.
pub fn half_bandwidth_for(m: usize, l: usize) -> f64 {
    l as f64 / (2.0 * m as f64)
}

/// Sinc-kernel entry `sin(2πW(i−j)) / (π(i−j))`, `2W` on the diagonal.
pub fn sinc_kernel(w: f64, i: usize, j: usize) -> f64 {
    if i == j {
        2.0 * w
    } else {
        let d = i as f64 - j as f64;
        (2.0 * PI * w * d).sin() / (PI * d)
    }
}

fn concentration(v: &[f64], w: f64) -> f64 {
    let m = v.len();
    // The kernel is Toeplitz: accumulate by lag.
    let mut acc = 0.0;
    for lag in 0..m {
        let k = sinc_kernel(w, lag, 0);
        let corr: f64 = (0..m - lag).map(|i| v[i] * v[i + lag]).sum();
        acc += if lag == 0 { k * corr } else { 2.0 * k * corr };
    }
    acc
}

/// First `l` Slepian vectors of length `m` and half-bandwidth `w`.
pub fn dpss_basis(m: usize, w: f64, l: usize) -> Result<DpssBasis> {
    if !(w > 0.0 && w < 0.5) {
        return Err(Error::InvalidParameter(format!("half-bandwidth {w} outside (0, 1/2)")));
    }
    if l == 0 || l > m {
        return Err(Error::InvalidParameter(format!("basis size {l} outside [1, {m}]")));
    }
    let cw = (2.0 * PI * w).cos();
    let tri = Mat::from_fn(m, m, |i, j| {
        if i == j {
            let c = (m as f64 - 1.0 - 2.0 * i as f64) / 2.0;
            c * c * cw
        } else if i == j + 1 {
            (i * (m - i)) as f64 / 2.0
        } else if j == i + 1 {
            (j * (m - j)) as f64 / 2.0
        } else {
            0.0
        }
    });
    let evd = tri
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let u = evd.U();
    // Eigenvalues come back ascending; the most concentrated vectors are last.
    let mut cols: Vec<(Vec<f64>, f64)> = (0..l)
        .map(|k| {
            let c = m - 1 - k;
            let mut v: Vec<f64> = (0..m).map(|i| u[(i, c)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let lead = v.iter().copied().find(|x| x.abs() > 1e-10 * peak).unwrap_or(1.0);
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            v.iter_mut().for_each(|x| *x *= sign / norm);
            let lam = concentration(&v, w);
            (v, lam)
        })
        .collect();
    cols.sort_by(|a, b| b.1.total_cmp(&a.1));
    let vectors = Mat::from_fn(m, l, |i, k| cols[k].0[i]);
    Ok(DpssBasis {
        vectors,
        concentrations: cols.iter().map(|c| c.1).collect(),
        half_bandwidth: w,
    })
}

/// Basis with `W = L/(2M)`.
pub fn dpss_basis_for_order(m: usize, l: usize) -> Result<DpssBasis> {
    dpss_basis(m, half_bandwidth_for(m, l), l)
}

/// `‖(I − SSᵀ) a(f)‖₂`: how much of the tone at `f` the basis misses.
pub fn residual_projection(basis: &DpssBasis, f: f64) -> f64 {
    let a = linalg::exp_vector(f, basis.len());
    let fit = basis.synthesize(&basis.analyze(&a));
    a.iter()
        .zip(&fit)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
