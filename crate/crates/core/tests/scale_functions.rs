mod common;

use common::{integrate_pieces, model, named_jumps, rel_err};
use levy_scale::fluctuation::{down_exit, down_exit_one_sided, up_exit};
use levy_scale::models::{exp1_jumps, weibull_fit_jumps};
use levy_scale::scale::{boundary_identities, build_all, build_scale};
use levy_scale::Cplx;

const Q: f64 = 0.05;

#[test]
fn negative_arguments_vanish_and_origin_matches_closed_form_values() {
    for (_, jumps) in named_jumps() {
        let bv = build_scale(&model(5.0, 0.0, 5.0, jumps.clone()), Q).unwrap();
        assert_eq!(bv.eval_w(-0.5), 0.0);
        assert!((bv.eval_w(0.0) - 0.2).abs() < 1e-12);
        assert!((bv.eval_z(0.0) - 1.0).abs() < 1e-12);
        let uv = build_scale(&model(5.0, 1.0, 5.0, jumps), Q).unwrap();
        assert!(uv.eval_w(0.0).abs() < 1e-12);
    }
}

#[test]
fn derivative_tends_to_its_value_at_zero() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let sc = build_scale(&model(5.0, sigma, 5.0, jumps.clone()), Q).unwrap();
            let near = sc.eval_w_prime(1e-9);
            assert!(rel_err(near, sc.wp0) < 1e-6, "{name} sigma={sigma}: {near} vs {}", sc.wp0);
        }
    }
}

#[test]
fn finite_differences_of_w_and_z() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let sc = build_scale(&model(5.0, sigma, 5.0, jumps.clone()), Q).unwrap();
            for i in 1..=50 {
                let x = 0.1 * i as f64;
                let h = 1e-5;
                let fd_w = (sc.eval_w(x + h) - sc.eval_w(x - h)) / (2.0 * h);
                assert!(rel_err(fd_w, sc.eval_w_prime(x)) < 1e-6, "{name} sigma={sigma} x={x}");
                let fd_z = (sc.eval_z(x + h) - sc.eval_z(x - h)) / (2.0 * h);
                assert!(rel_err(fd_z, Q * sc.eval_w(x)) < 1e-6, "{name} sigma={sigma} x={x}");
            }
        }
    }
}

#[test]
fn z_matches_quadrature_of_w() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let sc = build_scale(&model(5.0, sigma, 5.0, jumps.clone()), Q).unwrap();
            let pts: Vec<f64> = (0..=30).map(|i| 3.0 * (i as f64 / 30.0).powi(2)).collect();
            let quad = 1.0 + Q * integrate_pieces(&|y| sc.eval_w(y), &pts, 1e-14);
            assert!(rel_err(sc.eval_z(3.0), quad) < 1e-8, "{name} sigma={sigma}");
        }
    }
}

#[test]
fn w_prime_is_convex() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let sc = build_scale(&model(5.0, sigma, 5.0, jumps.clone()), Q).unwrap();
            let h = 0.02;
            for i in 1..500 {
                let x = h * i as f64;
                let d2 = sc.eval_w_prime(x + h) - 2.0 * sc.eval_w_prime(x) + sc.eval_w_prime(x - h);
                assert!(d2 >= -1e-12 * sc.eval_w_prime(x), "{name} sigma={sigma} x={x}: {d2}");
            }
        }
    }
}

#[test]
fn tilted_function_is_monotone_bounded_and_converges() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let m = model(5.0, sigma, 5.0, jumps.clone());
            let sc = build_scale(&m, Q).unwrap();
            let limit = 1.0 / m.laplace_exponent_derivative(sc.zeta).unwrap();
            let mut prev = sc.eval_w_tilted(0.0);
            for i in 1..=1000 {
                let v = sc.eval_w_tilted(0.05 * i as f64);
                assert!(v >= prev - 1e-15 && v <= limit * (1.0 + 1e-12), "{name} sigma={sigma}");
                prev = v;
            }
            if name == "exp1" {
                // the remaining gap at x = 50 is the explicit exponential tail
                let c = sc.c.as_ref().unwrap();
                let tail: f64 = c.iter().map(|(xi, ci)| ci.re * (-(sc.zeta + xi.re) * 50.0).exp()).sum();
                assert!(((limit - sc.eval_w_tilted(50.0)) - tail).abs() < 1e-12);
                // slowest rate zeta + xi_1 is about 0.2, so the 1e-6 level is reached by x = 100
                assert!((sc.eval_w_tilted(100.0) - limit).abs() < 1e-6);
                let ratio = sc.eval_w(100.0) * (-sc.zeta * 100.0).exp() / limit;
                assert!((ratio - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn tilted_derivative_is_a_positive_mixture() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let sc = build_scale(&model(5.0, sigma, 5.0, jumps.clone()), Q).unwrap();
            let w = sc.tilted_derivative_mixture_weights().unwrap();
            assert!(w.iter().all(|c| c.re >= 0.0 && c.im.abs() < 1e-12), "{name} sigma={sigma}: {w:?}");
        }
    }
}

#[test]
fn laplace_transform_identity() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let m = model(5.0, sigma, 5.0, jumps.clone());
            let sc = build_scale(&m, Q).unwrap();
            for k in 1..=20 {
                let s = sc.zeta + 0.5 * k as f64;
                let want = 1.0 / (m.laplace_exponent(s).unwrap() - Q);
                let got = sc.laplace_transform(Cplx::new(s, 0.0)).re;
                assert!(rel_err(got, want) < 1e-8, "{name} sigma={sigma} s={s}");
            }
        }
    }
}

#[test]
fn identities_without_jumps() {
    let m = model(0.7, 1.0, 0.0, exp1_jumps());
    let (_, wh, sc) = build_all(&m, Q).unwrap();
    assert!((sc.theta - 2.0).abs() < 1e-14);
    let ids = boundary_identities(&sc, &wh);
    assert!(ids.zeta_theta_rel_err < 1e-8 && ids.coefficient_sum_rel_err < 1e-8);
    // W for Brownian motion with drift: (e^{zeta x} - e^{-xi x}) / (sigma^2/2 (zeta + xi))
    let xi = wh.terms[0].xi.re;
    for x in [0.3, 1.0, 4.0] {
        let want = ((sc.zeta * x).exp() - (-xi * x).exp()) / (0.5 * (sc.zeta + xi));
        assert!(rel_err(sc.eval_w(x), want) < 1e-12);
    }
}

#[test]
fn bounded_variation_theta_uses_the_drift_formula() {
    let m = model(5.0, 0.0, 5.0, exp1_jumps());
    let (_, wh, sc) = build_all(&m, Q).unwrap();
    let expected = -sc.zeta / 5.0 + (Q + 5.0) / 25.0;
    assert!(rel_err(sc.theta, expected) < 1e-14);
    assert!(boundary_identities(&sc, &wh).zeta_theta_rel_err < 1e-8);
}

#[test]
fn exit_probabilities_are_consistent() {
    for (name, jumps) in named_jumps() {
        for sigma in [0.0, 1.0] {
            let sc = build_scale(&model(5.0, sigma, 5.0, jumps.clone()), Q).unwrap();
            assert_eq!(up_exit(&sc, 5.0, 5.0).unwrap(), 1.0);
            assert!(down_exit(&sc, 5.0, 5.0).unwrap().abs() < 1e-12);
            for i in 0..=50 {
                let x = 0.1 * i as f64;
                let (u, d) = (up_exit(&sc, x, 5.0).unwrap(), down_exit(&sc, x, 5.0).unwrap());
                assert!(u >= 0.0 && d >= 0.0 && u + d <= 1.0 + 1e-12, "{name} sigma={sigma} x={x}");
            }
            for x in [0.5, 2.0, 5.0] {
                let far = down_exit(&sc, x, x + 40.0 / sc.zeta).unwrap();
                assert!((far - down_exit_one_sided(&sc, x)).abs() < 1e-8, "{name} sigma={sigma} x={x}");
            }
        }
    }
}

#[test]
fn large_arguments_stay_finite() {
    let sc = build_scale(&model(5.0, 1.0, 5.0, weibull_fit_jumps()), Q).unwrap();
    let x = 2.0 * 700.0 / sc.zeta;
    let scaled = sc.eval_w_scaled(x);
    assert!(scaled.log_scale.is_finite() && scaled.mantissa.is_finite() && scaled.mantissa > 0.0);
    let p = up_exit(&sc, x - 1.0, x).unwrap();
    assert!(p > 0.0 && p < 1.0);
}
