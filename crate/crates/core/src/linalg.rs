//! Small dense linear-algebra helpers shared by the solvers.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Mat<C64>;
pub type RMat = Mat<f64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Unit-modulus sampled complex exponential `[1, e^{j2πf}, …, e^{j2πf(M-1)}]`.
pub fn exp_vector(f: f64, len: usize) -> Vec<C64> {
    (0..len)
        .map(|m| C64::from_polar(1.0, std::f64::consts::TAU * (f * m as f64)))
        .collect()
}

pub fn frobenius(a: MatRef<'_, C64>) -> f64 {
    a.norm_l2()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Σ conj(a_i) b_i`
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Real inner product `Re tr(Aᴴ B)`.
pub fn re_inner(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            acc += x.re * y.re + x.im * y.im;
        }
    }
    acc
}

pub fn hermitian_part(a: MatRef<'_, C64>) -> CMat {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Projection of a Hermitian matrix onto the PSD cone, obtained by zeroing
/// negative eigenvalues. Returns the projection and the smallest eigenvalue of
/// the input.
pub fn psd_project(a: MatRef<'_, C64>) -> Result<(CMat, f64)> {
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let n = h.nrows();
    let mut min_eig = f64::INFINITY;
    let mut keep = Vec::with_capacity(n);
    for k in 0..n {
        let lam = s[k].re;
        min_eig = min_eig.min(lam);
        if lam > 0.0 {
            keep.push((k, lam));
        }
    }
    // V·diag(λ₊)·Vᴴ using only the retained columns.
    let r = keep.len();
    let scaled = Mat::from_fn(n, r, |i, c| u[(i, keep[c].0)] * keep[c].1);
    let kept = Mat::from_fn(n, r, |i, c| u[(i, keep[c].0)]);
    let out = &scaled * kept.adjoint();
    Ok((out, min_eig))
}

pub fn min_eigenvalue(a: MatRef<'_, C64>) -> Result<f64> {
    let h = hermitian_part(a);
    let vals = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Moore–Penrose pseudo-inverse with the usual `max(m,n)·ε·σ_max` cutoff.
/// Also returns the numerical rank.
pub fn pinv(a: MatRef<'_, C64>) -> Result<(CMat, usize)> {
    let (m, n) = (a.nrows(), a.ncols());
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Eigen(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    let k = s.nrows();
    let smax = (0..k).map(|i| s[i].re).fold(0.0, f64::max);
    let cutoff = smax * f64::EPSILON * m.max(n) as f64;
    let u = svd.U();
    let v = svd.V();
    let mut rank = 0;
    let mut out = CMat::zeros(n, m);
    for c in 0..k {
        let sigma = s[c].re;
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        rank += 1;
        let inv = 1.0 / sigma;
        for j in 0..m {
            let uc = u[(j, c)].conj() * inv;
            for i in 0..n {
                out[(i, j)] += v[(i, c)] * uc;
            }
        }
    }
    Ok((out, rank))
}

/// Singular values in descending order.
pub fn singular_values(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let mut s = a
        .singular_values()
        .map_err(|e| Error::Eigen(format!("svd: {e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Numerical rank: number of singular values above `tol · σ_max`.
pub fn numerical_rank(a: MatRef<'_, C64>, tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > tol * smax).count())
}

pub fn mat_vec(a: MatRef<'_, C64>, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![ZERO; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

pub fn col_to_vec(a: MatRef<'_, C64>, j: usize) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

pub fn real_to_complex(a: MatRef<'_, f64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut rnd = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = Mat::from_fn(n, n, |_, _| C64::new(rnd(), rnd()));
        hermitian_part(a.as_ref())
    }

    #[test]
    fn psd_projection_is_idempotent_and_psd() {
        let a = herm(9, 3);
        let (p, lam) = psd_project(a.as_ref()).unwrap();
        assert!(lam < 0.0, "random Hermitian should be indefinite");
        assert!(min_eigenvalue(p.as_ref()).unwrap() > -1e-12);
        let (pp, _) = psd_project(p.as_ref()).unwrap();
        assert!((&pp - &p).norm_l2() < 1e-12);
    }

    #[test]
    fn pinv_of_full_column_rank_is_left_inverse() {
        let a = Mat::from_fn(7, 3, |i, j| C64::new((i as f64 + 1.0).powi(j as i32), 0.3 * (i * j) as f64));
        let (p, rank) = pinv(a.as_ref()).unwrap();
        assert_eq!(rank, 3);
        let id = &p * &a;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn exp_vector_is_unit_modulus() {
        for z in exp_vector(0.37, 50) {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
    }
}
