//! Direct-summation evaluations of the kernel equations, used as oracles
//! for the FFT path. Cost grows as sites^(rank+1); small grids only.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::spectrum::TurbulenceModel;

use super::MomentKernel;

fn weights(model: &TurbulenceModel, grid: &FrequencyGrid) -> Result<(Vec<f64>, f64)> {
    model.require_finite_lambda()?;
    let mut w = Vec::with_capacity(grid.sites());
    for s in 0..grid.sites() {
        let a = grid.frequency(s);
        w.push(model.psd_transverse(&a[..grid.dim])? * grid.weight());
    }
    let lambda = w.iter().sum();
    Ok((w, lambda))
}

/// Quadruple loop over (a, a′, o) for the (1,1) equation.
pub fn h11_rhs_loop(h: &MomentKernel, model: &TurbulenceModel) -> Result<MomentKernel> {
    if (h.m, h.n) != (1, 1) {
        return Err(Error::Shape("h11_rhs_loop needs an order (1,1) kernel".into()));
    }
    let g = h.grid;
    let (w, lambda) = weights(model, &g)?;
    let k2 = g.wavenumber().powi(2);
    let n = g.sites();
    let mut out = MomentKernel::zeros(1, 1, g);
    out.z = h.z;
    for a in 0..n {
        for b in 0..n {
            let drift = PI * g.wavelength * (g.freq_sq(a) - g.freq_sq(b));
            let mut acc = h.values[a * n + b] * Complex64::new(-k2 * lambda, drift);
            for (o, &wo) in w.iter().enumerate() {
                let i = g.shifted(a, o, 1);
                let j = g.shifted(b, o, 1);
                acc += h.values[i * n + j] * (k2 * wo);
            }
            out.values[a * n + b] = acc;
        }
    }
    Ok(out)
}

/// Term-by-term evaluation of the bi-photon equation in its natural
/// argument order F(a1, a2, a3, a4).
pub fn biphoton_rhs_loop(f: &MomentKernel, model: &TurbulenceModel) -> Result<MomentKernel> {
    if (f.m, f.n) != (2, 2) || f.grid.dim != 1 {
        return Err(Error::Shape("biphoton_rhs_loop needs a 1-D order (2,2) kernel".into()));
    }
    let g = f.grid;
    let (w, lambda) = weights(model, &g)?;
    let k2 = g.wavenumber().powi(2);
    let n = g.sites();
    let at = |a1: usize, a2: usize, a3: usize, a4: usize| f.values[((a1 * n + a3) * n + a2) * n + a4];
    let sh = |s: usize, u: usize, sign: i8| g.shifted(s, u, sign);
    let mut out = MomentKernel::zeros(2, 2, g);
    out.z = f.z;
    for a1 in 0..n {
        for a2 in 0..n {
            for a3 in 0..n {
                for a4 in 0..n {
                    let drift = PI
                        * g.wavelength
                        * (g.freq_sq(a1) - g.freq_sq(a2) + g.freq_sq(a3) - g.freq_sq(a4));
                    let here = at(a1, a2, a3, a4);
                    let mut bracket = here * (2.0 * lambda);
                    for (u, &wu) in w.iter().enumerate() {
                        let t = -at(sh(a1, u, -1), sh(a2, u, -1), a3, a4)
                            - at(a1, a2, sh(a3, u, -1), sh(a4, u, -1))
                            - at(sh(a1, u, -1), a2, a3, sh(a4, u, -1))
                            - at(a1, sh(a2, u, -1), sh(a3, u, -1), a4)
                            + at(sh(a1, u, -1), a2, sh(a3, u, 1), a4)
                            + at(a1, sh(a2, u, -1), a3, sh(a4, u, 1));
                        bracket += t * wu;
                    }
                    out.values[((a1 * n + a3) * n + a2) * n + a4] =
                        here * Complex64::new(0.0, drift) - bracket * k2;
                }
            }
        }
    }
    Ok(out)
}

/// Direct evaluation of the order-(m,n) equation for any rank.
pub fn hierarchy_rhs_loop(h: &MomentKernel, model: &TurbulenceModel) -> Result<MomentKernel> {
    let g = h.grid;
    let (w, lambda) = weights(model, &g)?;
    let k2 = g.wavenumber().powi(2);
    let sites = g.sites();
    let rank = h.rank();
    let mut out = MomentKernel::zeros(h.m, h.n, g);
    out.z = h.z;
    if rank == 0 {
        return Ok(out);
    }
    let mut idx = vec![0usize; rank];
    let flat_of = |ix: &[usize]| ix.iter().fold(0, |acc, &x| acc * sites + x);
    for flat in 0..h.values.len() {
        let mut k = flat;
        for ax in (0..rank).rev() {
            idx[ax] = k % sites;
            k /= sites;
        }
        let mut drift = 0.0;
        for (ax, &s) in idx.iter().enumerate() {
            drift += if ax < h.m { g.freq_sq(s) } else { -g.freq_sq(s) };
        }
        let v = h.values[flat];
        let mut acc = v * Complex64::new(-0.5 * k2 * lambda * rank as f64, PI * g.wavelength * drift);
        for p in 0..rank {
            for q in p + 1..rank {
                let cross = (p < h.m) != (q < h.m);
                let (sq, c) = if cross { (1, k2) } else { (-1, -k2) };
                for (o, &wo) in w.iter().enumerate() {
                    let mut j = idx.clone();
                    j[p] = g.shifted(idx[p], o, 1);
                    j[q] = g.shifted(idx[q], o, sq);
                    acc += h.values[flat_of(&j)] * (c * wo);
                }
            }
        }
        out.values[flat] = acc;
    }
    Ok(out)
}
