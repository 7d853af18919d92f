mod common;

use common::{integrate, model, named_jumps, rel_err};
use levy_scale::levy_model::{PhaseType, Regime, SnLevyModel};
use levy_scale::linalg::Matrix;
use levy_scale::models::weibull_fit_jumps;
use levy_scale::roots::{cramer_lundberg_polynomial, decompose, find_zeta, max_residual};
use levy_scale::scale::build_all;
use levy_scale::wiener_hopf::{partial_fraction_coefficients, wh_factor_minus};
use levy_scale::Cplx;

const Q: f64 = 0.05;

fn erlang(n: usize, rate: f64) -> PhaseType<f64> {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][i] = -rate;
        if i + 1 < n {
            rows[i][i + 1] = rate;
        }
    }
    let mut alpha = vec![0.0; n];
    alpha[0] = 1.0;
    PhaseType::new(alpha, Matrix::from_rows(&rows)).unwrap()
}

fn poly_eval(coeffs: &[f64], s: Cplx<f64>) -> Cplx<f64> {
    // ascending powers
    coeffs.iter().rev().fold(Cplx::new(0.0, 0.0), |acc, &c| acc * s + c)
}

#[test]
fn weibull_fit_roots_interlace_rates() {
    let m = model(5.0, 1.0, 5.0, weibull_fit_jumps());
    let d = decompose(&m, Q).unwrap();
    assert_eq!(d.neg_roots.len(), 7);
    assert!(d.all_real() && d.all_simple() && d.is_interlaced());
    let rates = weibull_fit_jumps().rates().to_vec();
    for (i, eta) in rates.iter().enumerate() {
        assert!(d.neg_roots[i].xi.re < *eta && *eta < d.neg_roots[i + 1].xi.re);
    }
    for r in &d.neg_roots {
        let xi = r.xi.re;
        let f = |s: f64| m.laplace_exponent(s).unwrap() - Q;
        // psi - q changes sign across a 1e-12 relative bracket around the root
        let (lo, hi) = (-xi * (1.0 + 1e-12), -xi * (1.0 - 1e-12));
        assert!(f(lo) * f(hi) <= 0.0, "xi = {xi}");
        // residual bound: absolute floor plus the conditioning of psi at the root
        let slope = m.laplace_exponent_derivative(-xi).unwrap().abs();
        assert!(f(-xi).abs() <= 1e-8 + 4.0 * f64::EPSILON * xi * slope, "xi = {xi}");
    }
}

#[test]
fn residuals_away_from_poles() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let m = model(5.0, sigma, 5.0, jumps.clone());
            let d = decompose(&m, Q).unwrap();
            if name != "weibull-fit" {
                assert!(max_residual(&m, &d).unwrap() <= 1e-8 * Q.max(1.0), "{name} sigma={sigma}");
            }
            assert!((m.laplace_exponent(d.zeta).unwrap() - Q).abs() <= 1e-10);
        }
    }
}

#[test]
fn zeta_is_increasing_in_q() {
    for (_, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let m = model(5.0, sigma, 5.0, jumps.clone());
            let zs: Vec<f64> = [0.001, 0.01, 0.05, 0.2, 1.0, 5.0].iter().map(|&q| find_zeta(&m, q).unwrap()).collect();
            assert!(zs.windows(2).all(|w| w[0] < w[1]), "{zs:?}");
        }
    }
}

#[test]
fn polynomial_value_at_origin() {
    let ph = erlang(2, 1.5);
    let m = SnLevyModel::phase_type(2.0, 0.8, 3.0, ph).unwrap();
    let p = cramer_lundberg_polynomial(&m, Q).unwrap();
    // det(-T) = 1.5^2
    assert!(rel_err(p[0], -Q * 2.25) < 1e-12, "P(0) = {}", p[0]);
    let zeta = find_zeta(&m, Q).unwrap();
    let scale: f64 = p.iter().map(|c| c.abs() * zeta.max(1.0).powi(p.len() as i32)).fold(0.0, f64::max);
    assert!(poly_eval(&p, Cplx::new(zeta, 0.0)).norm() <= 1e-8 * scale);
}

#[test]
fn erlang_jumps_roots_solve_the_equation() {
    for sigma in [0.0, 1.0] {
        let m = SnLevyModel::phase_type(2.0, sigma, 3.0, erlang(2, 1.5)).unwrap();
        let d = decompose(&m, Q).unwrap();
        let expected = if sigma > 0.0 { 3 } else { 2 };
        assert_eq!(d.neg_roots.iter().map(|r| r.multiplicity).sum::<usize>(), expected);
        for r in &d.neg_roots {
            let v = m.laplace_exponent_complex(-r.xi).unwrap();
            assert!((v - Q).norm() < 1e-8, "psi(-xi) = {v}");
        }
    }
}

#[test]
fn complex_roots_give_real_density_and_scale_function() {
    // Erlang(3) jumps produce a conjugate pair of negative roots.
    let m = SnLevyModel::phase_type(1.0, 0.5, 4.0, erlang(3, 2.0)).unwrap();
    let (d, wh, sc) = build_all(&m, Q).unwrap();
    assert!(!d.all_real(), "expected a complex pair: {:?}", d.neg_roots);
    for i in 1..=40 {
        let x = 0.1 * i as f64;
        assert!(wh.running_min_density_imag(x).abs() < 1e-10);
        assert!(sc.tilted_imaginary_residue(x).abs() < 1e-10);
        assert!(wh.running_min_density(x) >= 0.0);
    }
    // Laplace identity survives the complex arithmetic
    for s in [d.zeta + 0.5, d.zeta + 3.0] {
        let want = 1.0 / (m.laplace_exponent(s).unwrap() - Q);
        assert!(rel_err(sc.laplace_transform(Cplx::new(s, 0.0)).re, want) < 1e-8);
    }
}

#[test]
fn partial_fractions_reconstruct_the_factor() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let m = model(5.0, sigma, 5.0, jumps.clone());
            let d = decompose(&m, Q).unwrap();
            let wh = partial_fraction_coefficients(&d).unwrap();
            let xi_max = d.neg_roots.iter().map(|r| r.xi.re).fold(0.0, f64::max);
            for i in 1..=50 {
                let s = Cplx::new(10.0 * xi_max * i as f64 / 50.0, 0.0);
                let direct = wh_factor_minus(&d, s).unwrap();
                let pf = wh.laplace_from_partial_fractions(s);
                assert!((direct - pf).norm() / direct.norm() < 1e-8, "{name} sigma={sigma} s={s}");
            }
            assert!((wh_factor_minus(&d, Cplx::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-10);
        }
    }
}

#[test]
fn atom_and_total_mass() {
    for (name, jumps) in named_jumps() {
        let m = model(5.0, 0.0, 5.0, jumps.clone());
        let d = decompose(&m, Q).unwrap();
        assert_eq!(d.regime, Regime::CompoundPoisson);
        let wh = partial_fraction_coefficients(&d).unwrap();
        let at_infinity = wh_factor_minus(&d, Cplx::new(1e8, 0.0)).unwrap().re;
        assert!(rel_err(at_infinity, wh.atom_mass) < 1e-6, "{name}");
        assert!(wh.atom_mass > 0.0 && wh.atom_mass < 1.0);
        assert!((wh.total_coefficient().re - (1.0 - wh.atom_mass)).abs() < 1e-10, "{name}");
    }
}

#[test]
fn running_min_density_is_a_probability_density() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let m = model(5.0, sigma, 5.0, jumps.clone());
            let d = decompose(&m, Q).unwrap();
            let wh = partial_fraction_coefficients(&d).unwrap();
            let xi_min = d.neg_roots[0].xi.re;
            let upper = 60.0 / xi_min;
            // dense breakpoints near zero where the fast exponentials live
            let mut pts = vec![0.0];
            let mut t = 1e-4;
            while t < upper {
                pts.push(t);
                t *= 2.0;
            }
            pts.push(upper);
            let mass = common::integrate_pieces(&|x| wh.running_min_density(x), &pts, 1e-12);
            assert!((mass + wh.atom_mass - 1.0).abs() < 1e-8, "{name} sigma={sigma}: {mass} + {}", wh.atom_mass);
        }
    }
    let m = model(5.0, 1.0, 5.0, weibull_fit_jumps());
    let wh = partial_fraction_coefficients(&decompose(&m, Q).unwrap()).unwrap();
    for i in 1..=2000 {
        assert!(wh.running_min_density(0.01 * i as f64) >= 0.0);
    }
}

#[test]
fn single_exponential_density_integrates_to_its_coefficient() {
    let m = model(5.0, 0.0, 5.0, levy_scale::models::exp1_jumps());
    let wh = partial_fraction_coefficients(&decompose(&m, Q).unwrap()).unwrap();
    assert_eq!(wh.terms.len(), 1);
    let a = wh.terms[0].a.re;
    let xi = wh.terms[0].xi.re;
    let mass = integrate(&|x| wh.running_min_density(x), 0.0, 80.0 / xi, 1e-13);
    assert!(rel_err(mass, a) < 1e-9);
}
