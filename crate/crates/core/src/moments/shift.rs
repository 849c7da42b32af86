//! Paired-index shift sums over the turbulence weights.
//!
//! For a tensor `T` and two of its axes `p`, `q` with signs `s_p`, `s_q`,
//!
//! ```text
//! S[.., i_p, .., i_q, ..] = Σ_o w(o) T[.., i_p + s_p·o, .., i_q + s_q·o, ..]
//! ```
//!
//! with periodic index arithmetic and `w(o) = Φ_n(a_o, 0)·Δa^D`. Along a
//! line `i_q = σ·i_p + c` (σ = s_p·s_q) the sum is a circular convolution
//! with the even weight `w`, evaluated with FFTs.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::exec::Execution;
use crate::grid::FrequencyGrid;

#[derive(Clone)]
pub struct ShiftEngine {
    grid: FrequencyGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// DFT of w in natural (offset 0 first) ordering, including the 1/n^D
    /// inverse-transform normalisation.
    weight_hat: Vec<Complex64>,
}

impl std::fmt::Debug for ShiftEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftEngine").field("grid", &self.grid).finish()
    }
}

/// Adds per-axis offsets with sign and periodic wrap, in natural index space.
#[inline]
fn add_axis(i: usize, o: usize, sign: i8, n: usize) -> usize {
    if sign >= 0 {
        (i + o) % n
    } else {
        (i + n - o) % n
    }
}

impl ShiftEngine {
    /// `weights[site]` is w at the offset `grid.frequency(site)` (centred layout).
    pub fn new(grid: FrequencyGrid, weights: &[f64]) -> Self {
        let n = grid.n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let sites = grid.sites();
        let h = n / 2;
        // Re-index to natural ordering: offset vector o' lives at o' mod n.
        let mut w = vec![Complex64::new(0.0, 0.0); sites];
        for (s, &ws) in weights.iter().enumerate() {
            let [i, j] = grid.axis_indices(s);
            let nat = grid.site_of([(i + h) % n, (j + h) % n]);
            w[nat] = Complex64::new(ws, 0.0);
        }
        let mut engine = ShiftEngine {
            grid,
            forward,
            inverse,
            weight_hat: Vec::new(),
        };
        engine.fft(&mut w, true);
        let norm = 1.0 / sites as f64;
        engine.weight_hat = w.into_iter().map(|v| v * norm).collect();
        engine
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn fft(&self, buf: &mut [Complex64], forward: bool) {
        let n = self.grid.n;
        let plan = if forward { &self.forward } else { &self.inverse };
        if self.grid.dim == 1 {
            plan.process(buf);
        } else {
            for row in buf.chunks_exact_mut(n) {
                plan.process(row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = buf[r * n + c];
                }
                plan.process(&mut col);
                for r in 0..n {
                    buf[r * n + c] = col[r];
                }
            }
        }
    }

    /// In place: f ← w ∗ f (circular).
    fn convolve(&self, buf: &mut [Complex64]) {
        self.fft(buf, true);
        for (v, w) in buf.iter_mut().zip(&self.weight_hat) {
            *v *= w;
        }
        self.fft(buf, false);
    }

    /// Site `σ·i + c` per axis (natural index space).
    #[inline]
    fn line_partner(&self, i: usize, c: usize, sigma: i8) -> usize {
        let n = self.grid.n;
        let [ix, iy] = self.grid.axis_indices(i);
        let [cx, cy] = self.grid.axis_indices(c);
        let px = add_axis(if sigma >= 0 { ix } else { (n - ix) % n }, cx, 1, n);
        let py = add_axis(if sigma >= 0 { iy } else { (n - iy) % n }, cy, 1, n);
        self.grid.site_of([px, py])
    }

    /// Computes the paired shift sum of `t` (rank `rank`, every axis of
    /// length `sites`) over axes `p != q` with signs `sp`, `sq`.
    pub fn pair_shift(
        &self,
        t: &[Complex64],
        rank: usize,
        (p, sp): (usize, i8),
        (q, sq): (usize, i8),
        exec: Execution,
    ) -> Vec<Complex64> {
        assert!(p != q && p < rank && q < rank);
        let sites = self.grid.sites();
        debug_assert_eq!(t.len(), sites.pow(rank as u32));
        let sigma = sp * sq;
        let stride = |axis: usize| sites.pow((rank - 1 - axis) as u32);
        let (stp, stq) = (stride(p), stride(q));
        let others: Vec<usize> = (0..rank).filter(|&a| a != p && a != q).collect();
        let n_other = sites.pow(others.len() as u32);
        let base_of = |mut k: usize| {
            let mut off = 0;
            for &ax in others.iter().rev() {
                off += (k % sites) * stride(ax);
                k /= sites;
            }
            off
        };
        // Convolution direction: out(i) = Σ_o w(o) f(i + s_p·o); w even, so
        // both signs reduce to the same circular convolution.
        let lines = exec.map(n_other * sites, |job| {
            let base = base_of(job / sites);
            let c = job % sites;
            let mut buf: Vec<Complex64> = (0..sites)
                .map(|i| t[base + i * stp + self.line_partner(i, c, sigma) * stq])
                .collect();
            self.convolve(&mut buf);
            buf
        });
        let mut out = vec![Complex64::new(0.0, 0.0); t.len()];
        for (job, buf) in lines.into_iter().enumerate() {
            let base = base_of(job / sites);
            let c = job % sites;
            for (i, v) in buf.into_iter().enumerate() {
                out[base + i * stp + self.line_partner(i, c, sigma) * stq] = v;
            }
        }
        out
    }
}

/// Direct evaluation of the same sum, O(sites^(rank+1)). Reference path.
pub fn pair_shift_naive(
    grid: &FrequencyGrid,
    weights: &[f64],
    t: &[Complex64],
    rank: usize,
    (p, sp): (usize, i8),
    (q, sq): (usize, i8),
) -> Vec<Complex64> {
    let sites = grid.sites();
    let mut out = vec![Complex64::new(0.0, 0.0); t.len()];
    let mut idx = vec![0usize; rank];
    for (flat, o_val) in out.iter_mut().enumerate() {
        let mut k = flat;
        for ax in (0..rank).rev() {
            idx[ax] = k % sites;
            k /= sites;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (off, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut j = 0;
            for ax in 0..rank {
                let v = if ax == p {
                    grid.shifted(idx[ax], off, sp)
                } else if ax == q {
                    grid.shifted(idx[ax], off, sq)
                } else {
                    idx[ax]
                };
                j = j * sites + v;
            }
            acc += t[j] * w;
        }
        *o_val = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weights(grid: &FrequencyGrid) -> Vec<f64> {
        (0..grid.sites())
            .map(|s| {
                let a2 = grid.freq_sq(s);
                1.0 / (1.0 + a2).powf(11.0 / 6.0)
            })
            .collect()
    }

    fn random(len: usize, seed: u64) -> Vec<Complex64> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn fft_path_matches_naive_all_sign_pairs() {
        for (dim, n, rank) in [(1, 8, 2), (1, 8, 3), (2, 4, 2), (1, 16, 2)] {
            let g = FrequencyGrid::new(dim, n, 0.5, 1e-6).unwrap();
            let w = weights(&g);
            let eng = ShiftEngine::new(g, &w);
            let t = random(g.sites().pow(rank as u32), 5 + rank as u64);
            for (p, q) in [(0, 1), (1, 0), (0, rank - 1)] {
                for (sp, sq) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let a = eng.pair_shift(&t, rank, (p, sp), (q, sq), Execution::Sequential);
                    let b = pair_shift_naive(&g, &w, &t, rank, (p, sp), (q, sq));
                    let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    assert!(err < 1e-12, "dim {dim} rank {rank} ({p},{q}) ({sp},{sq}): {err}");
                }
            }
        }
    }
}
