//! Accelerated proximal gradient on the dual SDP
//!
//! ```text
//! max Re⟨X*, L(Q)⟩
//! s.t. [[H_n, −Q_n], [−Q_nᴴ, I]] ⪰ 0,
//!      Σ_m H_n[m, m+j] = 0 (j ≥ 1),  Σ_n Tr H_n = 1
//! ```
//!
//! Each iteration extrapolates `(Q, H)` with a FISTA momentum term, steps `Q`
//! along `L*(X*)`, re-imposes the linear constraints on `H` and truncates the
//! negative spectrum of every block. The truncation slightly breaks the
//! linear constraints again; that drift is reported, not corrected.

use std::io::Write;

use faer::Mat;
use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dpss::DpssBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};
use crate::tensor_ops::{self, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvdstParams {
    pub eta: f64,
    /// Step size is multiplied by `decay` after every `decay_every` iterations.
    pub decay: f64,
    pub decay_every: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for IvdstParams {
    fn default() -> Self {
        Self { eta: 4.0, decay: 0.99, decay_every: 50, iters: 200, seed: 0 }
    }
}

impl IvdstParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {}", self.eta)));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidParameter(format!("decay must lie in (0, 1], got {}", self.decay)));
        }
        if self.iters == 0 || self.decay_every == 0 {
            return Err(Error::InvalidParameter("iteration budget and decay interval must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Step size used at 1-based iteration `i`.
    pub fn step_at(&self, i: usize) -> f64 {
        self.eta * self.decay.powi(((i.max(1) - 1) / self.decay_every) as i32)
    }
}

#[derive(Debug, Clone)]
pub struct IvdstState {
    pub q: Tensor3,
    pub q_prev: Tensor3,
    pub h: Vec<CMat>,
    pub h_prev: Vec<CMat>,
    /// Momentum scalar of the previous iteration, `t_{i−1}`.
    pub t: f64,
    pub iter: usize,
}

/// `t_i = (1 + √(4 t_{i−1}² + 1)) / 2`.
pub fn next_momentum(t: f64) -> f64 {
    0.5 * (1.0 + (4.0 * t * t + 1.0).sqrt())
}

fn gram(q: &CMat) -> CMat {
    q * q.adjoint()
}

/// Standard complex Gaussian `Q₀` (unit variance per entry) and `H₀ = Q₀Q₀ᴴ`
/// slice-wise.
pub fn ivdst_init(m: usize, l: usize, n: usize, seed: u64) -> Result<IvdstState> {
    if m == 0 || l == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("dimensions must be positive, got {m}×{l}×{n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let q = Tensor3::from_fn(m, l, n, |_, _, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * scale, im * scale)
    });
    let h: Vec<CMat> = q.slices().iter().map(gram).collect();
    Ok(IvdstState { q_prev: q.clone(), q, h_prev: h.clone(), h, t: 1.0, iter: 1 })
}

/// Imposes `Σ Tr = 1` by rescaling all diagonals and zero-mean on every
/// super-diagonal (mirrored onto the sub-diagonal to stay Hermitian).
pub fn reproject_h(hg: &[CMat]) -> Result<Vec<CMat>> {
    let total: f64 = hg.iter().map(|h| (0..h.nrows()).map(|i| h[(i, i)].re).sum::<f64>()).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Domain(format!("diagonal mass {total} cannot be renormalized to 1")));
    }
    Ok(hg
        .iter()
        .map(|h| {
            let m = h.nrows();
            let mut out = CMat::zeros(m, m);
            for i in 0..m {
                out[(i, i)] = C64::new(h[(i, i)].re / total, 0.0);
            }
            for j in 1..m {
                let mean = (0..m - j).map(|i| h[(i, i + j)]).sum::<C64>() / (m - j) as f64;
                for i in 0..m - j {
                    let v = h[(i, i + j)] - mean;
                    out[(i, i + j)] = v;
                    out[(i + j, i)] = v.conj();
                }
            }
            out
        })
        .collect())
}

/// Largest violation of the linear constraints on `H`: the diagonal mass
/// error and every super-diagonal sum.
pub fn constraint_drift(h: &[CMat]) -> f64 {
    let total: f64 = h.iter().map(|s| (0..s.nrows()).map(|i| s[(i, i)].re).sum::<f64>()).sum();
    let mut worst = (total - 1.0).abs();
    for s in h {
        let m = s.nrows();
        for j in 1..m {
            let sum: C64 = (0..m - j).map(|i| s[(i, i + j)]).sum();
            worst = worst.max(sum.norm());
        }
    }
    worst
}

fn extrapolate(cur: &CMat, prev: &CMat, beta: f64) -> CMat {
    cur + (cur - prev) * faer::Scale(C64::new(beta, 0.0))
}

/// One smoothing / gradient / proximal step with step size `eta`.
pub fn ivdst_iterate(state: &IvdstState, xstar_adj: &Tensor3, eta: f64) -> Result<IvdstState> {
    let (m, l, n) = state.q.dims();
    if xstar_adj.dims() != (m, l, n) {
        return Err(Error::DimensionMismatch(format!(
            "L*(X*) is {:?} but the state is {:?}",
            xstar_adj.dims(),
            (m, l, n)
        )));
    }
    let t = next_momentum(state.t);
    let beta = (state.t - 1.0) / t;
    let hg: Vec<CMat> = state.h.iter().zip(&state.h_prev).map(|(c, p)| extrapolate(c, p, beta)).collect();
    let h_tilde = reproject_h(&hg)?;
    let blocks: Vec<(CMat, CMat)> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<(CMat, CMat)> {
            let qbar = extrapolate(state.q.slice(k), state.q_prev.slice(k), beta);
            let qg = &qbar + xstar_adj.slice(k) * faer::Scale(C64::new(eta, 0.0));
            let ht = &h_tilde[k];
            let z = Mat::from_fn(m + l, m + l, |i, j| match (i < m, j < m) {
                (true, true) => ht[(i, j)],
                (true, false) => -qg[(i, j - m)],
                (false, true) => -qg[(j, i - m)].conj(),
                (false, false) => {
                    if i == j {
                        C64::new(1.0, 0.0)
                    } else {
                        ZERO
                    }
                }
            });
            let (zt, _) = linalg::psd_project(z.as_ref())?;
            let h_next = Mat::from_fn(m, m, |i, j| zt[(i, j)]);
            let q_next = Mat::from_fn(m, l, |i, j| -zt[(i, m + j)]);
            Ok((q_next, h_next))
        })
        .collect::<Result<_>>()?;
    let (qs, hs): (Vec<CMat>, Vec<CMat>) = blocks.into_iter().unzip();
    Ok(IvdstState {
        q_prev: state.q.clone(),
        q: Tensor3::from_slices(qs)?,
        h_prev: state.h.clone(),
        h: hs,
        t,
        iter: state.iter + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvdstRecord {
    pub iter: usize,
    /// `Re⟨X*, L(Q_i)⟩`.
    pub objective: f64,
    pub constraint_drift: f64,
}

#[derive(Debug, Clone)]
pub struct IvdstSolution {
    pub q: Tensor3,
    pub h: Vec<CMat>,
    pub trace: Vec<IvdstRecord>,
}

impl IvdstSolution {
    /// Writes `iter,objective,constraint_drift`.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,objective,constraint_drift")?;
        for r in &self.trace {
            writeln!(out, "{},{:.15e},{:.10e}", r.iter, r.objective, r.constraint_drift)?;
        }
        Ok(())
    }

    /// Relative peak-to-peak spread of the objective over the last `window`
    /// iterations.
    pub fn objective_oscillation(&self, window: usize) -> f64 {
        let tail = &self.trace[self.trace.len().saturating_sub(window)..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.objective), hi.max(r.objective)));
        let mean = tail.iter().map(|r| r.objective).sum::<f64>() / tail.len().max(1) as f64;
        if mean == 0.0 {
            hi - lo
        } else {
            (hi - lo) / mean.abs()
        }
    }
}

/// Runs the full iteration budget and returns the final dual tensor.
pub fn ivdst_solve(xstar: &CMat, basis: &DpssBasis, params: &IvdstParams) -> Result<IvdstSolution> {
    params.validate()?;
    let (m, n) = (xstar.nrows(), xstar.ncols());
    if m != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "data has {m} snapshots but the DPSS basis has length {}",
            basis.len()
        )));
    }
    let adj = tensor_ops::apply_l_adjoint(xstar, basis)?;
    let mut state = ivdst_init(m, basis.order(), n, params.seed)?;
    let mut trace = Vec::with_capacity(params.iters);
    for i in 1..=params.iters {
        state = ivdst_iterate(&state, &adj, params.step_at(i))?;
        let objective = linalg::re_inner(xstar.as_ref(), tensor_ops::apply_l(&state.q, basis)?.as_ref());
        let drift = constraint_drift(&state.h);
        trace.push(IvdstRecord { iter: i, objective, constraint_drift: drift });
        if i % 50 == 0 {
            debug!("ivdst it={i} obj={objective:.6} drift={drift:.3e}");
        }
    }
    Ok(IvdstSolution { q: state.q, h: state.h, trace })
}
