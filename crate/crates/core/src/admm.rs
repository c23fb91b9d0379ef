//! Shared ADMM loop for SDPs of the form
//! `min f(G₁, …, G_N)  s.t.  G_n ⪰ 0`, split as `G_n = Z_n`, `Z_n ⪰ 0`.
//!
//! The caller supplies the structured step `G = argmin f(G) + ρ/2 Σ‖G_n − B_n‖²`
//! with `B_n = Z_n − Λ_n`; the driver does the PSD projections, scaled
//! multiplier updates, residual bookkeeping and ρ balancing.

use log::debug;
use rayon::prelude::*;

use crate::anm1d::{AdmmParams, IterRecord};
use crate::error::Result;
use crate::linalg::{self, CMat, C64};

pub(crate) struct AdmmOutcome {
    /// Scaled multipliers `Λ_n`.
    pub lam: Vec<CMat>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<IterRecord>,
}

pub(crate) fn run<F>(blocks: usize, size: usize, params: &AdmmParams, label: &str, mut structured: F) -> Result<AdmmOutcome>
where
    F: FnMut(&[CMat], f64) -> Result<(Vec<CMat>, f64)>,
{
    let mut z: Vec<CMat> = vec![CMat::zeros(size, size); blocks];
    let mut lam: Vec<CMat> = vec![CMat::zeros(size, size); blocks];
    let mut rho = params.rho;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let alpha = params.relaxation;

    for it in 0..params.max_iters {
        iterations = it + 1;
        let b: Vec<CMat> = z.par_iter().zip(&lam).map(|(z, l)| z - l).collect();
        let (g, objective) = structured(&b, rho)?;

        let norms: Vec<[f64; 5]> = z
            .par_iter_mut()
            .zip(lam.par_iter_mut())
            .zip(g.par_iter())
            .map(|((z, lam), g)| -> Result<[f64; 5]> {
                let relaxed = if alpha == 1.0 {
                    g.clone()
                } else {
                    g * faer::Scale(C64::new(alpha, 0.0)) + &*z * faer::Scale(C64::new(1.0 - alpha, 0.0))
                };
                let (z_new, _) = linalg::psd_project((&relaxed + &*lam).as_ref())?;
                let gap = g - &z_new;
                let dz = (&z_new - &*z).squared_norm_l2();
                *lam += &relaxed - &z_new;
                let out = [
                    gap.squared_norm_l2(),
                    dz,
                    g.squared_norm_l2(),
                    z_new.squared_norm_l2(),
                    lam.squared_norm_l2(),
                ];
                *z = z_new;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let sum = |j: usize| norms.iter().map(|v| v[j]).sum::<f64>().sqrt();
        let (rp, rd) = (sum(0), rho * sum(1));
        let scale_p = sum(2).max(sum(3)).max(1.0);
        let scale_d = (rho * sum(4)).max(1.0);
        history.push(IterRecord { iter: it, primal_res: rp, dual_res: rd, objective });
        if it % 500 == 0 {
            debug!("{label} it={it} rp={rp:.3e} rd={rd:.3e} obj={objective:.8} rho={rho}");
        }
        if rp < params.tol_primal * scale_p && rd < params.tol_dual * scale_d {
            converged = true;
            break;
        }
        if let Some(ratio) = params
            .balance_ratio
            .filter(|_| it < params.balance_until && (it + 1) % params.balance_every.max(1) == 0) {
            let factor = if rp > ratio * rd {
                2.0
            } else if rd > ratio * rp {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                // Λ = Y/ρ: rescale so the unscaled multiplier Y is unchanged.
                for l in lam.iter_mut() {
                    *l *= faer::Scale(C64::new(1.0 / factor, 0.0));
                }
            }
        }
    }
    if !converged {
        debug!("{label} stopped at max_iters={} without meeting tolerances", params.max_iters);
    }
    Ok(AdmmOutcome { lam, rho, converged, iterations, history })
}
