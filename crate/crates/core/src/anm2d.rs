//! Joint (frequency, angle) atomic-norm SDP
//!
//! ```text
//! min (1/2MN) Σ_n Tr S(T_n) + (1/2N) Σ_n t_n
//! s.t. [[S(T_n), x_n], [x_nᴴ, t_n]] ⪰ 0,  x_n = vec(X_nᵀ),
//!      ‖X* − L(X)‖_F ≤ ε
//! ```
//!
//! `S(T_n)` is block Toeplitz in the time index with unstructured L×L blocks:
//! block (i, k) is `T_{i−k}` and `T_{−d} = T_dᴴ`. `x_n` stacks `X_n` row by
//! row, so entry `m·L + l` is `X_n[m, l]`.

use std::io::Write;

use faer::Mat;
use rayon::prelude::*;

use crate::admm;
use crate::anm1d::{self, project_fidelity, AdmmParams, IterRecord};
use crate::array_model::{self, ArrayConfig};
use crate::beamform::{circular_distance, DISTINCT_TOL};
use crate::dpss::DpssBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::tensor_ops::{self, Tensor3};

#[derive(Debug, Clone)]
pub struct Sdp2dSolution {
    pub x_hat: Tensor3,
    pub q: Tensor3,
    /// Per slice, the blocks `T_0, …, T_{M−1}` of `S(T_n)`.
    pub blocks: Vec<Vec<CMat>>,
    pub t: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub fidelity: f64,
    pub min_block_eigenvalue: f64,
    /// Largest diagonal lift applied after the last iteration to make the
    /// blocks PSD; already included in `objective`.
    pub psd_shift: f64,
    pub converged: bool,
    pub iterations: usize,
    pub rho: f64,
    pub history: Vec<IterRecord>,
}

impl Sdp2dSolution {
    pub fn structured_matrix(&self, n: usize) -> CMat {
        tensor_ops::block_toeplitz_from_blocks(&self.blocks[n])
    }
}

/// `vec(Xᵀ)`: rows of `x` laid end to end.
pub fn vec_rows(x: &CMat) -> Vec<C64> {
    (0..x.nrows()).flat_map(|i| (0..x.ncols()).map(move |j| x[(i, j)])).collect()
}

fn assemble(blocks: &[CMat], x: &CMat, t: f64) -> CMat {
    let s = tensor_ops::block_toeplitz_from_blocks(blocks);
    let v = vec_rows(x);
    let p = v.len();
    Mat::from_fn(p + 1, p + 1, |i, k| match (i < p, k < p) {
        (true, true) => s[(i, k)],
        (true, false) => v[i],
        (false, true) => v[k].conj(),
        (false, false) => C64::new(t, 0.0),
    })
}

/// Block-Toeplitz projection of the top-left `ML×ML` part of `b`: block `d`
/// is the mean of every block on the `d`-th block sub-diagonal together with
/// the adjoints of its mirror.
fn block_toeplitz_average(b: &CMat, m: usize, l: usize) -> Vec<CMat> {
    (0..m)
        .map(|d| {
            let mut acc = CMat::zeros(l, l);
            for i in 0..m - d {
                for a in 0..l {
                    for c in 0..l {
                        acc[(a, c)] += b[((i + d) * l + a, i * l + c)] + b[(i * l + c, (i + d) * l + a)].conj();
                    }
                }
            }
            acc * faer::Scale(C64::new(0.5 / (m - d) as f64, 0.0))
        })
        .collect()
}

/// ADMM on the 2D SDP. Requires an equispaced array, as the block-Toeplitz
/// certificate only describes uniform spatial sampling.
pub fn solve_sdp_2d(xstar: &CMat, basis: &DpssBasis, cfg: &ArrayConfig, params: &AdmmParams) -> Result<Sdp2dSolution> {
    params.validate()?;
    if cfg.uniform_spacing().is_none() {
        return Err(Error::NonEquispaced);
    }
    let (m, n) = (xstar.nrows(), xstar.ncols());
    let l = basis.order();
    if m != basis.len() || n != cfg.len() {
        return Err(Error::DimensionMismatch(format!(
            "data is {m}×{n}, basis length {}, array of {} elements",
            basis.len(),
            cfg.len()
        )));
    }
    let p = m * l;
    let mut x = Tensor3::zeros(m, l, n);
    let mut blocks: Vec<Vec<CMat>> = vec![vec![CMat::zeros(l, l); m]; n];
    let mut ts = vec![0.0; n];
    let mut objective = 0.0;
    let nf = n as f64;

    let run = admm::run(n, p + 1, params, "admm2d", |b, rho| {
        let parts: Vec<(Vec<CMat>, f64, CMat)> = b
            .par_iter()
            .map(|b| {
                let mut tb = block_toeplitz_average(b, m, l);
                for a in 0..l {
                    tb[0][(a, a)] -= C64::new(1.0 / (2.0 * nf * rho * m as f64), 0.0);
                }
                let t = b[(p, p)].re - 1.0 / (2.0 * nf * rho);
                let c = Mat::from_fn(m, l, |i, k| (b[(i * l + k, p)] + b[(p, i * l + k)].conj()) * 0.5);
                (tb, t, c)
            })
            .collect();
        let mut cs = Vec::with_capacity(n);
        for (k, (tb, t, c)) in parts.into_iter().enumerate() {
            blocks[k] = tb;
            ts[k] = t;
            cs.push(c);
        }
        x = project_fidelity(&Tensor3::from_slices(cs)?, xstar, basis, params.eps)?;
        let trace: f64 = blocks.iter().map(|bl| (0..l).map(|a| bl[0][(a, a)].re).sum::<f64>()).sum();
        objective = (trace + ts.iter().sum::<f64>()) / (2.0 * nf);
        let g = (0..n).map(|k| assemble(&blocks[k], x.slice(k), ts[k])).collect();
        Ok((g, objective))
    })?;

    let q = Tensor3::from_slices(
        run.lam
            .iter()
            .map(|lam| Mat::from_fn(m, l, |i, k| lam[(i * l + k, p)] * (2.0 * run.rho)))
            .collect(),
    )?;
    // Feasibility restoration per slice: T_0 and t_n absorb the negative
    // part of the spectrum left by the finite stopping tolerance.
    let mins: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| linalg::min_eigenvalue(assemble(&blocks[k], x.slice(k), ts[k]).as_ref()))
        .collect::<Result<_>>()?;
    let mut psd_shift: f64 = 0.0;
    for (k, lo) in mins.into_iter().enumerate() {
        let d = (-lo).max(0.0);
        if d > 0.0 {
            for a in 0..l {
                blocks[k][0][(a, a)] += d;
            }
            ts[k] += d;
            objective += d * (l + 1) as f64 / (2.0 * nf);
            psd_shift = psd_shift.max(d);
        }
    }
    let min_block_eigenvalue = (0..n)
        .into_par_iter()
        .map(|k| linalg::min_eigenvalue(assemble(&blocks[k], x.slice(k), ts[k]).as_ref()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let fidelity = (xstar - tensor_ops::apply_l(&x, basis)?).norm_l2();
    let dual_objective = anm1d::dual_objective(&q, xstar, basis, params.eps)?;
    Ok(Sdp2dSolution {
        x_hat: x,
        q,
        blocks,
        t: ts,
        objective,
        dual_objective,
        fidelity,
        min_block_eigenvalue,
        psd_shift,
        converged: run.converged,
        iterations: run.iterations,
        rho: run.rho,
        history: run.history,
    })
}

/// Angles (degrees, ascending) whose sines are `count` uniform points on
/// `[−1, 1]`.
pub fn sine_uniform_angles(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| (-1.0 + 2.0 * i as f64 / (count - 1) as f64).clamp(-1.0, 1.0).asin().to_degrees())
            .collect(),
    }
}

/// `q₂D(f, θ) = ‖Σ_n Q_nᴴ a(f) e^{j k₀ sinθ q_n}‖₂`, indexed `[f][θ]`.
pub fn dual_polynomial_2d(q: &Tensor3, f_grid: &[f64], theta_grid: &[f64], cfg: &ArrayConfig) -> Result<Vec<Vec<f64>>> {
    let (m, l, n) = q.dims();
    if n != cfg.len() {
        return Err(Error::DimensionMismatch(format!("tensor has {n} slices, array has {} elements", cfg.len())));
    }
    let steer: Vec<Vec<C64>> = theta_grid
        .iter()
        .map(|&th| array_model::steering_vector(th, cfg))
        .collect::<Result<_>>()?;
    Ok(f_grid
        .par_iter()
        .map(|&f| {
            let a = linalg::exp_vector(f, m);
            // proj[k][j] = (Q_kᴴ a)_j
            let proj: Vec<Vec<C64>> = q
                .slices()
                .iter()
                .map(|s| (0..l).map(|j| (0..m).map(|i| s[(i, j)].conj() * a[i]).sum()).collect())
                .collect();
            steer
                .iter()
                .map(|g| {
                    (0..l)
                        .map(|j| (0..n).map(|k| proj[k][j] * g[k]).sum::<C64>().norm_sqr())
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect())
}

/// Writes `f,theta_deg,value`, one row per grid point.
pub fn write_dual2d_csv<W: Write>(f_grid: &[f64], theta_grid: &[f64], values: &[Vec<f64>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "f,theta_deg,value")?;
    for (f, row) in f_grid.iter().zip(values) {
        for (th, v) in theta_grid.iter().zip(row) {
            writeln!(out, "{f:.10},{th:.10},{v:.12e}")?;
        }
    }
    Ok(())
}

/// Grid points that are maxima of their 8-neighbourhood (wrapping in `f`,
/// not in θ), as `(f index, θ index)`.
pub fn local_maxima_2d(values: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let nf = values.len();
    let nt = values.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for i in 0..nf {
        for j in 0..nt {
            let v = values[i][j];
            let mut is_max = true;
            for di in [nf - 1, 0, 1] {
                for dj in [-1isize, 0, 1] {
                    let ii = (i + di) % nf;
                    let jj = j as isize + dj;
                    if (ii == i && dj == 0) || jj < 0 || jj >= nt as isize {
                        continue;
                    }
                    if values[ii][jj as usize] > v {
                        is_max = false;
                    }
                }
            }
            if is_max {
                out.push((i, j));
            }
        }
    }
    out
}

/// Distance in resolution cells: `M·|Δf|` (circular) and `(N/2)·|Δ sinθ|`.
fn cell_distance(a: (f64, f64), b: (f64, f64), m: usize, n: usize) -> f64 {
    let df = circular_distance(a.0, b.0) * m as f64;
    let ds = (a.1 - b.1).abs() * n as f64 / 2.0;
    df.hypot(ds)
}

/// Connected regions (8-neighbourhood, wrapping in `f`) of the marked grid
/// points, each listed from its highest point.
fn regions(values: &[Vec<f64>], marked: &[Vec<bool>]) -> Vec<Vec<(usize, usize)>> {
    let nf = values.len();
    let nt = values.first().map_or(0, Vec::len);
    let mut seen = vec![vec![false; nt]; nf];
    let mut out = Vec::new();
    for i in 0..nf {
        for j in 0..nt {
            if !marked[i][j] || seen[i][j] {
                continue;
            }
            seen[i][j] = true;
            let mut stack = vec![(i, j)];
            let mut members = Vec::new();
            while let Some((a, b)) = stack.pop() {
                members.push((a, b));
                for da in [nf - 1, 0, 1] {
                    for db in [-1isize, 0, 1] {
                        let aa = (a + da) % nf;
                        let bb = b as isize + db;
                        if bb < 0 || bb >= nt as isize {
                            continue;
                        }
                        let bb = bb as usize;
                        if marked[aa][bb] && !seen[aa][bb] {
                            seen[aa][bb] = true;
                            stack.push((aa, bb));
                        }
                    }
                }
            }
            members.sort_by(|p, q| values[q.0][q.1].total_cmp(&values[p.0][p.1]).then(p.cmp(q)));
            out.push(members);
        }
    }
    out
}

/// Clusters the grid points with `q ≥ threshold` in `(f, sin θ)`.
///
/// When the above-threshold set splits into at least `k` connected regions,
/// the `k` regions with the highest peaks are the clusters. Otherwise k-means
/// (distance in resolution cells) refines seeds placed at each region's peak
/// and then at the points farthest from the seeds so far. Centers are member
/// means; returns `(f, θ_deg)` sorted by frequency then angle.
pub fn cluster_2d(
    f_grid: &[f64],
    theta_grid: &[f64],
    values: &[Vec<f64>],
    threshold: f64,
    k: usize,
    m: usize,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one cluster".into()));
    }
    let sines: Vec<f64> = theta_grid.iter().map(|t| t.to_radians().sin()).collect();
    let pt = |i: usize, j: usize| (f_grid[i].rem_euclid(1.0), sines[j]);
    let marked: Vec<Vec<bool>> = values.iter().map(|row| row.iter().map(|&v| v >= threshold).collect()).collect();
    let above: Vec<(usize, usize)> = (0..f_grid.len())
        .flat_map(|i| (0..theta_grid.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| marked[i][j])
        .collect();
    if above.len() < k {
        return Err(Error::ThresholdTooHigh { found: above.len(), needed: k, gamma0: threshold });
    }
    let mean_of = |anchor: (f64, f64), members: &[(f64, f64)]| {
        let cnt = members.len() as f64;
        let df = members.iter().map(|p| crate::beamform::wrap_diff(p.0, anchor.0)).sum::<f64>() / cnt;
        let s = members.iter().map(|p| p.1).sum::<f64>() / cnt;
        ((anchor.0 + df).rem_euclid(1.0), s)
    };
    let finish = |centers: Vec<(f64, f64)>| {
        let mut out: Vec<(f64, f64)> =
            centers.into_iter().map(|(f, s)| (f, s.clamp(-1.0, 1.0).asin().to_degrees())).collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        out
    };

    let mut regs = regions(values, &marked);
    regs.sort_by(|a, b| {
        let (pa, pb) = (a[0], b[0]);
        values[pb.0][pb.1].total_cmp(&values[pa.0][pa.1]).then(pa.cmp(&pb))
    });
    if regs.len() >= k {
        let centers = regs[..k]
            .iter()
            .map(|r| {
                let pts: Vec<(f64, f64)> = r.iter().map(|&(i, j)| pt(i, j)).collect();
                mean_of(pts[0], &pts)
            })
            .collect();
        return Ok(finish(centers));
    }

    let mut centers: Vec<(f64, f64)> = regs.iter().map(|r| pt(r[0].0, r[0].1)).collect();
    while centers.len() < k {
        let far = above
            .iter()
            .map(|&(i, j)| pt(i, j))
            .max_by(|&a, &b| {
                let da = centers.iter().map(|&c| cell_distance(c, a, m, n)).fold(f64::INFINITY, f64::min);
                let db = centers.iter().map(|&c| cell_distance(c, b, m, n)).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db)
            })
            .expect("non-empty");
        centers.push(far);
    }

    let pts: Vec<(f64, f64)> = above.iter().map(|&(i, j)| pt(i, j)).collect();
    let mut assign = vec![usize::MAX; pts.len()];
    for _ in 0..200 {
        let mut changed = false;
        for (slot, &p) in assign.iter_mut().zip(&pts) {
            let best = (0..k)
                .min_by(|&a, &b| {
                    cell_distance(centers[a], p, m, n)
                        .total_cmp(&cell_distance(centers[b], p, m, n))
                        .then(a.cmp(&b))
                })
                .expect("k > 0");
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<(f64, f64)> = assign.iter().zip(&pts).filter(|(a, _)| **a == c).map(|(_, &p)| p).collect();
            if !members.is_empty() {
                *center = mean_of(*center, &members);
            }
        }
        if !changed {
            break;
        }
    }
    Ok(finish(centers))
}

/// Unit-norm DPSS direction of atom `desired`, from a joint least-squares
/// fit of `x_hat` by the atoms `a(f_k) ⊗ asv(θ_k)` over all slices. Unlike
/// the per-slice frequency fit this separates sources sharing a carrier, as
/// long as their angles differ.
pub fn estimate_sign_alpha1_2d(x_hat: &Tensor3, atoms: &[(f64, f64)], desired: usize, cfg: &ArrayConfig) -> Result<Vec<C64>> {
    let (m, l, n) = x_hat.dims();
    if desired >= atoms.len() {
        return Err(Error::InvalidParameter(format!("desired index {desired} out of range for {} atoms", atoms.len())));
    }
    let cols: Vec<(Vec<C64>, Vec<C64>)> = atoms
        .iter()
        .map(|&(f, th)| Ok((linalg::exp_vector(f, m), array_model::steering_vector(th, cfg)?)))
        .collect::<Result<_>>()?;
    let design = Mat::from_fn(m * n, atoms.len(), |r, k| cols[k].0[r % m] * cols[k].1[r / m]);
    if linalg::numerical_rank(design.as_ref(), DISTINCT_TOL)? < atoms.len() {
        return Err(Error::DuplicateFrequencies);
    }
    let rhs = Mat::from_fn(m * n, l, |r, j| x_hat.get(r % m, j, r / m));
    let (pinv, _) = linalg::pinv(design.as_ref())?;
    let coef = &pinv * &rhs;
    let row: Vec<C64> = (0..l).map(|j| coef[(desired, j)]).collect();
    let nrm = linalg::vec_norm(&row);
    if nrm == 0.0 {
        return Err(Error::Domain("the primal tensor carries no energy on the desired atom".into()));
    }
    Ok(row.into_iter().map(|z| z / nrm).collect())
}

/// One term `c · A(f) ⊛ (α̃ asv(θ))` of an atomic decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom2d {
    pub weight: f64,
    pub freq: f64,
    pub alpha: Vec<C64>,
    pub theta_deg: f64,
}

/// The point `(S(T_n), t_n, X)` built from an atomic decomposition.
#[derive(Debug, Clone)]
pub struct Sdp2dFeasiblePoint {
    pub structured: Vec<CMat>,
    pub t: Vec<f64>,
    pub x: Tensor3,
}

impl Sdp2dFeasiblePoint {
    pub fn objective(&self) -> f64 {
        let n = self.t.len() as f64;
        let m = self.x.dims().0 as f64;
        let tr: f64 = self.structured.iter().map(|s| (0..s.nrows()).map(|i| s[(i, i)].re).sum::<f64>()).sum();
        tr / (2.0 * m * n) + self.t.iter().sum::<f64>() / (2.0 * n)
    }

    pub fn block(&self, n: usize) -> CMat {
        let v = vec_rows(self.x.slice(n));
        let s = &self.structured[n];
        let p = v.len();
        Mat::from_fn(p + 1, p + 1, |i, k| match (i < p, k < p) {
            (true, true) => s[(i, k)],
            (true, false) => v[i],
            (false, true) => v[k].conj(),
            (false, false) => C64::new(self.t[n], 0.0),
        })
    }
}

/// `S(T_n) = Σ c_k v_{k,n} v_{k,n}ᴴ` with `v_{k,n} = a(f_k) ⊗ α̃_k asv_n(θ_k)`
/// and `t_n = Σ c_k`: feasible for the SDP with objective `Σ c_k`, which is
/// returned alongside.
pub fn atomic_decomposition_cost(atoms: &[Atom2d], cfg: &ArrayConfig, m: usize, l: usize) -> Result<(f64, Sdp2dFeasiblePoint)> {
    let n = cfg.len();
    let mut x = Tensor3::zeros(m, l, n);
    let mut structured = vec![CMat::zeros(m * l, m * l); n];
    for atom in atoms {
        if atom.weight < 0.0 {
            return Err(Error::InvalidParameter(format!("atom weight {} is negative", atom.weight)));
        }
        if atom.alpha.len() != l {
            return Err(Error::DimensionMismatch(format!("α̃ has length {}, expected {l}", atom.alpha.len())));
        }
        if (linalg::vec_norm(&atom.alpha) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("atom coefficient vector must have unit norm".into()));
        }
        let g = array_model::steering_vector(atom.theta_deg, cfg)?;
        let a = linalg::exp_vector(atom.freq, m);
        let term = tensor_ops::atom_tensor(atom.freq, &atom.alpha, &g, m);
        x.axpy(C64::new(atom.weight, 0.0), &term);
        for (k, s) in structured.iter_mut().enumerate() {
            let v: Vec<C64> = (0..m * l).map(|r| a[r / l] * atom.alpha[r % l] * g[k]).collect();
            *s += Mat::from_fn(m * l, m * l, |i, j| v[i] * v[j].conj() * atom.weight);
        }
    }
    let cost: f64 = atoms.iter().map(|a| a.weight).sum();
    Ok((cost, Sdp2dFeasiblePoint { structured, t: vec![cost; n], x }))
}
