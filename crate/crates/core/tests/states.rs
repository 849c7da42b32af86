use std::f64::consts::PI;

use ipfe_core::moments::Medium;
use ipfe_core::states::{
    characteristic_of_gaussian, delta_matrix, fock_generating, fock_wigner, free_space_gaussian,
    gaussian_drift, laguerre, shift_decay, wigner_linear_process, FockSpec, GaussianState,
    LinearProcess,
};
use ipfe_core::validate::{fock_taylor_fd, stationarity_table};
use ipfe_core::{Complex64, FrequencyGrid, Spectrum, TurbulenceModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> FrequencyGrid {
    FrequencyGrid::new(1, n, 5.0, 1e-6).unwrap()
}

fn model() -> TurbulenceModel {
    TurbulenceModel::von_karman(2e-11, 0.05, 0.0).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_spectrum(g: FrequencyGrid, rng: &mut ChaCha8Rng, scale: f64) -> Spectrum {
    let values = (0..g.sites())
        .map(|_| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect();
    Spectrum::from_values(g, values).unwrap()
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng, scale: f64) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&m + m.adjoint()) * c(0.5 * scale, 0.0)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn vacuum_and_thermal_have_zero_drift() {
    let g = grid(32);
    let med = Medium::new(&model(), g).unwrap();
    for s in [
        GaussianState::vacuum(g),
        GaussianState::thermal(g, 0.3).unwrap(),
        GaussianState::thermal(g, 7.0).unwrap(),
    ] {
        let r = gaussian_drift(&s, &med).unwrap();
        assert!(max_abs(&r.second_order_rhs) < 1e-12 * med.scattering_rate() * max_abs(&s.a));
        assert!(r.second_order_residual < 1e-12);
        assert!(r.fourth_order_residual < 1e-12);
    }
}

#[test]
fn second_order_rhs_matches_loop() {
    let g = grid(8);
    let m = model();
    let med = Medium::new(&m, g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = delta_matrix(&g, 2.0) + random_hermitian(8, &mut rng, g.delta_weight());
    let r = gaussian_drift(&GaussianState::from_a(g, a.clone()).unwrap(), &med).unwrap();

    // ∂zA(a1,a2) = iπλ(|a1|²−|a2|²)A − k²Λ A + k² Σ_o w(o) A(a1+o, a2+o), periodic shifts.
    let k2 = g.wavenumber().powi(2);
    let n = g.n as i64;
    let weights: Vec<f64> = (0..8)
        .map(|o| m.psd_transverse(&[g.frequency(o)[0]]).unwrap() * g.delta_a)
        .collect();
    let lambda: f64 = weights.iter().sum();
    let dc = 4i64;
    let wrap = |i: i64| (((i % n) + n) % n) as usize;
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            let ai = g.frequency(i)[0];
            let aj = g.frequency(j)[0];
            let mut v = a[(i, j)] * c(-k2 * lambda, PI * g.wavelength * (ai * ai - aj * aj));
            for (o, w) in weights.iter().enumerate() {
                let sh = o as i64 - dc;
                v += a[(wrap(i as i64 + sh), wrap(j as i64 + sh))] * (k2 * w);
            }
            worst = worst.max((v - r.second_order_rhs[(i, j)]).norm());
        }
    }
    assert!(worst < 1e-12 * max_abs(&r.second_order_rhs), "{worst:e}");
}

#[test]
fn perturbed_residuals() {
    let g = grid(32);
    let med = Medium::new(&model(), g).unwrap();
    let rows = stationarity_table(&med, &[1.0], &[1e-4, 1e-3, 1e-2]).unwrap();
    assert_eq!(rows.len(), 5);
    let p: Vec<_> = rows.iter().filter(|r| r.epsilon > 0.0).collect();
    for w in p.windows(2) {
        let second = w[1].second_order_residual / w[0].second_order_residual;
        let fourth = w[1].fourth_order_residual / w[0].fourth_order_residual;
        assert!((second / 10.0 - 1.0).abs() < 0.05, "second-order ratio {second}");
        assert!((fourth / 100.0 - 1.0).abs() < 0.05, "fourth-order ratio {fourth}");
    }
}

#[test]
fn drift_needs_centred_hermitian_state() {
    let g = grid(8);
    let med = Medium::new(&model(), g).unwrap();
    let mut s = GaussianState::vacuum(g);
    s.b[(0, 1)] = c(1.0, 0.0);
    assert!(gaussian_drift(&s, &med).is_err());
    let mut t = GaussianState::vacuum(g);
    t.a[(0, 1)] = c(1.0, 0.0);
    assert!(gaussian_drift(&t, &med).is_err());
}

fn general_state(g: FrequencyGrid, seed: u64) -> GaussianState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.sites();
    let mut s = GaussianState::from_a(g, random_hermitian(n, &mut rng, 1.0)).unwrap();
    let b = random_hermitian(n, &mut rng, 1.0);
    s.b = (&b + b.transpose()) * c(0.5, 0.0);
    let cc = random_hermitian(n, &mut rng, 1.0);
    s.c = (&cc + cc.transpose()) * c(0.5, 0.0);
    s.beta = random_spectrum(g, &mut rng, 1.0);
    s.eta = random_spectrum(g, &mut rng, 1.0);
    s
}

#[test]
fn free_space_gaussian_phases() {
    let g = grid(16);
    let s = general_state(g, 3);
    assert_eq!(free_space_gaussian(&s, 0.0), s);

    let d = GaussianState::thermal(g, 1.5).unwrap();
    assert_eq!(free_space_gaussian(&d, 250.0).a, d.a);

    let z = 37.0;
    let out = free_space_gaussian(&s, z);
    for i in 0..16 {
        for j in 0..16 {
            let p = -PI * g.wavelength * z * (g.freq_sq(i) + g.freq_sq(j));
            let expect = s.b[(i, j)] * Complex64::from_polar(1.0, p);
            assert!((out.b[(i, j)] - expect).norm() < 1e-14);
        }
    }
    assert_eq!(out.z, z);
}

#[test]
fn free_space_gaussian_composes() {
    let g = grid(16);
    let s = general_state(g, 4);
    let two = free_space_gaussian(&free_space_gaussian(&s, 13.0), 29.0);
    let one = free_space_gaussian(&s, 42.0);
    for (x, y) in [(&two.a, &one.a), (&two.b, &one.b), (&two.c, &one.c)] {
        assert!(max_abs(&(x - y)) < 1e-14);
    }
    for (x, y) in [(&two.beta, &one.beta), (&two.eta, &one.eta)] {
        let d = x.values.iter().zip(&y.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-14);
    }
}

#[test]
fn shift_decay_rates() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b0 = random_spectrum(g, &mut rng, 1.0);
    let e0 = random_spectrum(g, &mut rng, 1.0);
    let m = model();
    let (b, e) = shift_decay(&b0, &e0, &m, 0.0).unwrap();
    assert_eq!((b, e), (b0.clone(), e0.clone()));

    let kol = TurbulenceModel::kolmogorov(1e-14).unwrap();
    let (b, e) = shift_decay(&b0, &e0, &kol, 1e-9).unwrap();
    assert!(b.values.iter().chain(&e.values).all(|v| v.norm() == 0.0));

    let rate = Medium::new(&m, g).unwrap().scattering_rate();
    let z = 1.0 / rate;
    let (b, e) = shift_decay(&b0, &e0, &m, z).unwrap();
    for i in 0..16 {
        assert!((b.values[i].norm() / b0.values[i].norm() - (-1f64).exp()).abs() < 1e-14);
        assert!((e.values[i].norm() / e0.values[i].norm() - (-1f64).exp()).abs() < 1e-14);
    }
}

#[test]
fn characteristic_transform() {
    let g = grid(16);
    let vac = GaussianState::vacuum(g);
    let cv = characteristic_of_gaussian(&vac).unwrap();
    assert!(max_abs(&(&cv.a_tilde - &vac.a)) < 1e-10 * max_abs(&vac.a));

    let th = GaussianState::thermal(g, 0.5).unwrap();
    let ct = characteristic_of_gaussian(&th).unwrap();
    assert!(max_abs(&(&ct.a_tilde - &delta_matrix(&g, 8.0))) < 1e-10 * max_abs(&ct.a_tilde));
    assert!(max_abs(&(&ct.a_tilde - &th.a)) > 0.1 * max_abs(&th.a));

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = delta_matrix(&g, 1.5) + random_hermitian(16, &mut rng, 0.2 * g.delta_weight());
    let s = GaussianState::from_a(g, a.clone()).unwrap();
    let back = characteristic_of_gaussian(&characteristic_of_gaussian(&s).unwrap().as_state()).unwrap();
    assert!(max_abs(&(&back.a_tilde - &a)) < 1e-10 * max_abs(&a));

    let not_pd = GaussianState::from_a(g, delta_matrix(&g, -1.0)).unwrap();
    assert!(characteristic_of_gaussian(&not_pd).is_err());
}

#[test]
fn characteristic_matches_gaussian_integral_on_two_sites() {
    // Direct quadrature of ∫ W[α] exp(2ξ*⋄α − 2α*⋄ξ) dα over C² (two sites).
    let g = FrequencyGrid::new(1, 2, 1.0, 1e-6).unwrap();
    let a = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.5, 0.0)]);
    let s = GaussianState::from_a(g, a).unwrap();
    let ch = characteristic_of_gaussian(&s).unwrap();
    let xi = [c(0.2, -0.1), c(-0.15, 0.05)];

    let w = |al: [Complex64; 2]| {
        let mut e = c(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                e -= al[i].conj() * s.a[(i, j)] * al[j];
            }
        }
        e.exp()
    };
    let probe = [c(0.3, -0.2), c(0.1, 0.4)];
    let direct = s.evaluate(&Spectrum::from_values(g, probe.to_vec()).unwrap()).unwrap();
    assert!((w(probe) - direct).norm() < 1e-14);

    let (nodes, weights) = gauss_legendre(16, 4.5);
    let mut total = c(0.0, 0.0);
    for (x0, w0) in nodes.iter().zip(&weights) {
        for (y0, v0) in nodes.iter().zip(&weights) {
            for (x1, w1) in nodes.iter().zip(&weights) {
                for (y1, v1) in nodes.iter().zip(&weights) {
                    let al = [c(*x0, *y0), c(*x1, *y1)];
                    let mut e = c(0.0, 0.0);
                    for i in 0..2 {
                        e += 2.0 * xi[i].conj() * al[i] - 2.0 * al[i].conj() * xi[i];
                    }
                    total += w(al) * e.exp() * (w0 * v0 * w1 * v1);
                }
            }
        }
    }
    let xv = DVector::from_column_slice(&xi);
    let expect = (ch.log_norm - (xv.adjoint() * &ch.a_tilde * &xv)[(0, 0)]).exp();
    assert!((total - expect).norm() < 1e-9 * expect.norm(), "{total} vs {expect}");
}

/// Composite five-point Gauss–Legendre nodes on [−half, half] (the
/// integrand is negligible outside).
fn gauss_legendre(panels: usize, half: f64) -> (Vec<f64>, Vec<f64>) {
    let gl = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let h = 2.0 * half / panels as f64;
    let mut x = Vec::new();
    let mut w = Vec::new();
    for p in 0..panels {
        let mid = -half + (p as f64 + 0.5) * h;
        for (t, wt) in gl {
            x.push(mid + 0.5 * h * t);
            w.push(0.5 * h * wt);
        }
    }
    (x, w)
}

#[test]
fn linear_process_special_cases() {
    let g = grid(8);
    let zero = wigner_linear_process(&LinearProcess::new(g, DMatrix::zeros(8, 8)).unwrap()).unwrap();
    assert!(zero.log_norm.norm() < 1e-15);
    assert!(max_abs(&(&zero.b_lin - &delta_matrix(&g, 2.0))) < 1e-12 * g.delta_weight());

    let th = 0.7;
    let t = DMatrix::from_diagonal_element(8, 8, Complex64::from_polar(g.delta_weight(), th));
    let w = wigner_linear_process(&LinearProcess::new(g, t).unwrap()).unwrap();
    let expect = c(0.0, -2.0 * (th / 2.0).tan()) * g.delta_weight();
    for i in 0..8 {
        assert!((w.b_lin[(i, i)] - expect).norm() < 1e-12 * expect.norm());
        for j in 0..8 {
            if i != j {
                assert!(w.b_lin[(i, j)].norm() < 1e-12 * expect.norm());
            }
        }
    }

    let singular = DMatrix::from_diagonal_element(8, 8, c(-g.delta_weight(), 0.0));
    assert!(wigner_linear_process(&LinearProcess::new(g, singular).unwrap()).is_err());
}

#[test]
fn linear_process_matches_dense_solve() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let t = random_hermitian(8, &mut rng, 0.3 * g.delta_weight());
    let lw = wigner_linear_process(&LinearProcess::new(g, t.clone()).unwrap()).unwrap();
    let op = &t * c(g.delta_a, 0.0);
    let id = DMatrix::<Complex64>::identity(8, 8);
    let plus = (&id + &op).full_piv_lu();
    let det = plus.determinant();
    for _ in 0..10 {
        let al = random_spectrum(g, &mut rng, 0.5);
        let v = DVector::from_column_slice(&al.values);
        let y = plus.solve(&v).unwrap();
        let q = (v.adjoint() * ((&id - &op) * y))[(0, 0)] * (2.0 * g.delta_a);
        let expect = (-q).exp() / det;
        let got = lw.evaluate(&al).unwrap();
        assert!((got - expect).norm() < 1e-10 * expect.norm(), "{got} vs {expect}");
    }
}

#[test]
fn fock_values() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = FockSpec::normalized(&random_spectrum(g, &mut rng, 1.0), 1).unwrap();
    let alpha = random_spectrum(g, &mut rng, 0.1);
    let vac = (-2.0 * alpha.norm_sq()).exp();

    assert!((fock_generating(0.0, &f, &alpha).unwrap().re - vac).abs() < 1e-15);
    assert!((fock_wigner(0, &f, &alpha).unwrap().re - vac).abs() < 1e-15);
    let zero = Spectrum::zeros(g);
    assert!((fock_generating(0.4, &f, &zero).unwrap().re - 1.0 / 1.4).abs() < 1e-15);
    assert_eq!(fock_wigner(1, &f, &zero).unwrap().re, -1.0);
    let f3 = f.clone().with_n0(3.0);
    assert_eq!(fock_wigner(1, &f3, &zero).unwrap().re, -3.0);

    let mut root = f.f.clone();
    root.scale(c(0.5, 0.0));
    assert!((f.overlap_sq(&root).unwrap() - 0.25).abs() < 1e-15);
    assert!((root.norm_sq() - 0.25).abs() < 1e-15);
    assert!(fock_wigner(1, &f, &root).unwrap().re.abs() < 1e-15);

    assert!(fock_generating(-1.0, &f, &alpha).is_err());
    assert!(FockSpec::new(random_spectrum(g, &mut rng, 3.0), 1).is_err());
}

#[test]
fn laguerre_closed_forms() {
    for x in [0.0, 0.3, 1.0, 2.5, 7.0] {
        assert_eq!(laguerre(0, x), 1.0);
        assert!((laguerre(1, x) - (1.0 - x)).abs() < 1e-15);
        assert!((laguerre(2, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-13);
        let l3 = (-x * x * x + 9.0 * x * x - 18.0 * x + 6.0) / 6.0;
        assert!((laguerre(3, x) - l3).abs() < 1e-13);
    }
}

#[test]
fn generating_function_taylor_coefficients() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = FockSpec::normalized(&random_spectrum(g, &mut rng, 1.0), 0).unwrap();
    for scale in [0.1, 0.3, 0.7] {
        let mut alpha = random_spectrum(g, &mut rng, 0.05);
        for (a, b) in alpha.values.iter_mut().zip(&f.f.values) {
            *a += b * scale;
        }
        let fd = fock_taylor_fd(&f, &alpha).unwrap();
        for (n, coeff) in fd.iter().enumerate() {
            let exact = fock_wigner(n, &f, &alpha).unwrap().re;
            assert!((coeff - exact).abs() < 1e-6 * exact.abs(), "n = {n}: {coeff} vs {exact}");
        }
    }
}
