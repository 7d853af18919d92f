use anyhow::Result;
use serde_json::{json, Value};

use levy_scale::fluctuation::{down_exit, down_exit_one_sided, up_exit, Fluctuation, IntervalPair};
use levy_scale::levy_model::{JumpDistribution, SnLevyModel};
use levy_scale::mc_oracle::{
    simulate_joint_window, simulate_overshoot_undershoot_with, simulate_two_sided_exit_with, Crossing, JumpLaw,
    SimOptions, SimProcess, SimulationEstimate,
};
use levy_scale::meromorphic::{
    beta_psi, cgmy_levy_density, cgmy_limit_study, truncated_coefficients, BetaFamilyParams,
};
use levy_scale::models::{self, LoadedModel, BETA_REFERENCE_Q, PARETO_LAW, WEIBULL_LAW};
use levy_scale::scale::{boundary_identities, build_all, build_scale, ScaleCoefficients};
use levy_scale::wiener_hopf::wh_factor_minus;
use levy_scale::{Cplx, Error};

use crate::args::*;
use crate::table::{Cell, Table};

const JUMP_DEFAULT_Q: f64 = 0.05;
/// Pass threshold for every gated identity residual.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Runs one command; also returns the discount rate in effect.
pub fn run(command: &Command) -> Result<(Table, f64)> {
    let (model, q) = resolve(command.model())?;
    let table = match command {
        Command::ScaleEval(a) => scale_eval(a, levy(model, a)?, q),
        Command::ExitProb(a) => exit_prob(a, levy(model, a)?, q),
        Command::Overshoot(a) => density(a, levy(model, a)?, q, true),
        Command::Undershoot(a) => density(a, levy(model, a)?, q, false),
        Command::Joint(a) => joint(a, levy(model, a)?, q),
        Command::MeroBounds(a) => mero_bounds(a, beta(model, a)?, q),
        Command::CgmyLimit(a) => cgmy_limit(a, beta(model, a)?, q),
        Command::Simulate(a) => simulate(a, levy(model, a)?, q),
        Command::Identities(a) => identities(a, model, q),
    }?;
    Ok((table, q))
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidParameter(msg.into()).into()
}

/// Loads the model and applies command-line overrides; returns it with the
/// discount rate in effect.
pub fn resolve(a: &ModelArgs) -> Result<(LoadedModel, f64)> {
    let model = match models::load(&a.model)? {
        LoadedModel::Levy(m) => LoadedModel::Levy(SnLevyModel::new(
            a.mu.unwrap_or(m.mu()),
            a.sigma.unwrap_or(m.sigma()),
            a.lambda.unwrap_or(m.lambda()),
            m.jumps().clone(),
        )?),
        LoadedModel::Beta(p) => {
            if a.lambda.is_some() {
                return Err(invalid("--lambda does not apply to beta-family models"));
            }
            LoadedModel::Beta(BetaFamilyParams::new(
                a.mu.unwrap_or(p.mu_hat),
                a.sigma.unwrap_or(p.sigma),
                p.alpha_b,
                p.beta_b,
                p.c,
                p.lam,
            )?)
        }
    };
    let q = a.q.unwrap_or(match model {
        LoadedModel::Levy(_) => JUMP_DEFAULT_Q,
        LoadedModel::Beta(_) => BETA_REFERENCE_Q,
    });
    if !(q > 0.0) || !q.is_finite() {
        return Err(invalid(format!("q must be positive, got {q}")));
    }
    Ok((model, q))
}

fn levy(model: LoadedModel, a: &impl HasModel) -> Result<SnLevyModel<f64>> {
    match model {
        LoadedModel::Levy(m) => Ok(m),
        LoadedModel::Beta(_) => Err(invalid(format!(
            "model '{}' is a beta-family model; use mero-bounds or cgmy-limit",
            a.model_args().model
        ))),
    }
}

fn beta(model: LoadedModel, a: &impl HasModel) -> Result<BetaFamilyParams<f64>> {
    match model {
        LoadedModel::Beta(p) => Ok(p),
        LoadedModel::Levy(_) => Err(invalid(format!("model '{}' is not a beta-family model", a.model_args().model))),
    }
}

fn points(x: Option<f64>, grid: Option<Grid>) -> Vec<f64> {
    match (x, grid) {
        (Some(x), _) => vec![x],
        (None, Some(g)) => g.points(),
        (None, None) => unreachable!("clap requires --x or --grid"),
    }
}

fn scale_diagnostics(t: &mut Table, sc: &ScaleCoefficients<f64>) {
    t.diag("zeta", sc.zeta);
    t.diag("psi_prime_zeta", sc.leading.recip());
    t.diag("w0", sc.w0);
    t.diag("w_prime0", sc.wp0);
    t.diag("regime", format!("{:?}", sc.regime));
    t.diag("exponential_terms", sc.terms.len());
}

fn scale_eval(a: &ScaleEvalArgs, m: SnLevyModel<f64>, q: f64) -> Result<Table> {
    let sc = build_scale(&m, q)?;
    let mut t = Table::new(&["x", "W", "W_prime", "Z"]);
    for x in a.grid.points() {
        t.push(vec![x.into(), sc.eval_w(x).into(), sc.eval_w_prime(x).into(), sc.eval_z(x).into()]);
    }
    scale_diagnostics(&mut t, &sc);
    Ok(t)
}

fn exit_prob(a: &ExitProbArgs, m: SnLevyModel<f64>, q: f64) -> Result<Table> {
    let sc = build_scale(&m, q)?;
    let mut t = Table::new(&["x", "up", "down"]);
    for x in points(a.x, a.grid) {
        t.push(vec![x.into(), up_exit(&sc, x, a.b)?.into(), down_exit(&sc, x, a.b)?.into()]);
    }
    scale_diagnostics(&mut t, &sc);
    Ok(t)
}

fn density(a: &DensityArgs, m: SnLevyModel<f64>, q: f64, overshoot: bool) -> Result<Table> {
    let sc = build_scale(&m, q)?;
    let f = Fluctuation::new(&m, &sc)?;
    let x = a.x;
    if !(x > 0.0) {
        return Err(invalid(format!("x must be positive, got {x}")));
    }
    let mut t = Table::new(if overshoot { &["a", "density"] } else { &["b", "density"] });
    for v in a.grid.points() {
        let d = if overshoot { f.overshoot_density(x, v)? } else { f.undershoot_density(x, v)? };
        t.push(vec![v.into(), d.into()]);
    }
    let jump = f.joint(x, &IntervalPair::everything())?;
    t.diag("zeta", sc.zeta);
    t.diag("jump_mass", jump);
    t.diag("creep_mass", down_exit_one_sided(&sc, x) - jump);
    if !overshoot {
        let (left, right) = f.undershoot_limits_at_start(x)?;
        t.diag("density_left_of_x", left);
        t.diag("density_right_of_x", right);
    }
    Ok(t)
}

fn joint(a: &JointArgs, m: SnLevyModel<f64>, q: f64) -> Result<Table> {
    let sc = build_scale(&m, q)?;
    let f = Fluctuation::new(&m, &sc)?;
    let pair = IntervalPair::new(a.a_window.lo, a.a_window.hi, a.b_window.lo, a.b_window.hi)?;
    let mut t = Table::new(&["x", "probability"]);
    for x in points(a.x, a.grid) {
        t.push(vec![x.into(), f.joint(x, &pair)?.into()]);
    }
    t.diag("zeta", sc.zeta);
    Ok(t)
}

fn mero_bounds(a: &MeroArgs, p: BetaFamilyParams<f64>, q: f64) -> Result<Table> {
    let tm = truncated_coefficients(&p, q, a.m)?;
    let mut t = Table::new(&["x", "lower", "upper"]);
    let mut max_gap = 0.0f64;
    for x in a.grid.points() {
        let (lo, hi) = match a.quantity {
            Quantity::W => tm.w_bounds(x),
            Quantity::Z => tm.z_bounds(x),
            Quantity::WPrime if x > 0.0 => tm.w_prime_bounds(x)?,
            Quantity::WPrime => (f64::NAN, f64::NAN),
        };
        if hi.is_finite() && lo.is_finite() {
            max_gap = max_gap.max(hi - lo);
        }
        t.push(vec![x.into(), lo.into(), hi.into()]);
    }
    t.diag("m", tm.m);
    t.diag("zeta", tm.zeta);
    t.diag("delta", tm.delta);
    t.diag("two_delta", 2.0 * tm.delta);
    t.diag("max_gap", max_gap);
    t.diag("gamma", tm.gamma);
    t.diag("theta", if tm.theta.is_finite() { json!(tm.theta) } else { json!("inf") });
    t.diag("epsilon", tm.epsilon.map_or(Value::Null, Value::from));
    Ok(t)
}

fn cgmy_limit(a: &CgmyArgs, base: BetaFamilyParams<f64>, q: f64) -> Result<Table> {
    let grid = a.grid.points();
    let study = cgmy_limit_study(&base, a.tilde_alpha, a.tilde_c, &a.betas, q, a.m, &grid)?;
    let mut columns = vec!["x".to_string()];
    for c in &study.curves {
        columns.push(format!("lower_beta_{}", c.beta));
        columns.push(format!("upper_beta_{}", c.beta));
    }
    let mut t = Table::with_columns(columns);
    for (i, &x) in grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![x.into()];
        for c in &study.curves {
            row.push(c.lower[i].into());
            row.push(c.upper[i].into());
        }
        t.push(row);
    }
    t.diag("successive_sup_diffs", study.successive_sup_diffs.clone());
    t.diag("deltas", study.curves.iter().map(|c| c.delta).collect::<Vec<_>>());
    if let Some(last) = study.curves.last() {
        let target = cgmy_levy_density(a.tilde_c, a.tilde_alpha, base.lam, -1.0);
        t.diag("levy_density_rel_err_at_minus_1", (last.params.levy_density(-1.0) - target).abs() / target);
    }
    Ok(t)
}

fn estimate_cells(e: &SimulationEstimate) -> [Cell; 4] {
    [e.value.into(), e.stderr.into(), e.ci95.0.into(), e.ci95.1.into()]
}

fn simulate(a: &SimulateArgs, m: SnLevyModel<f64>, q: f64) -> Result<Table> {
    let base = SimProcess::from_model(&m);
    let process = match a.jump_law {
        JumpLawArg::Model => base,
        JumpLawArg::Weibull => base.with_jumps(JumpLaw::Weibull { shape: WEIBULL_LAW.0, scale: WEIBULL_LAW.1 }),
        JumpLawArg::Pareto => base.with_jumps(JumpLaw::Pareto { a: PARETO_LAW.0, b: PARETO_LAW.1 }),
    };
    if a.substeps == 0 {
        return Err(invalid("--substeps must be positive"));
    }
    let opts = SimOptions {
        substeps: a.substeps,
        crossing: match a.crossing {
            CrossingArg::Grid => Crossing::Grid,
            CrossingArg::Bridge => Crossing::Bridge,
        },
    };
    let mut t = match a.kind {
        SimKind::Exit => {
            let b = a.b.ok_or_else(|| invalid("--b is required for exit simulations"))?;
            let mut t = Table::new(&[
                "x",
                "up",
                "up_stderr",
                "up_ci_lo",
                "up_ci_hi",
                "down",
                "down_stderr",
                "down_ci_lo",
                "down_ci_hi",
            ]);
            for x in points(a.x, a.grid) {
                let (up, down) = simulate_two_sided_exit_with(&process, q, x, b, a.n_paths, a.seed, opts)?;
                let mut row = vec![x.into()];
                row.extend(estimate_cells(&up));
                row.extend(estimate_cells(&down));
                t.push(row);
            }
            t
        }
        SimKind::Histogram => {
            let x = a.x.ok_or_else(|| invalid("histogram simulations take a single --x"))?;
            if !(a.width > 0.0) {
                return Err(invalid("--width must be positive"));
            }
            let bins = a.bins.unwrap_or(((x + 5.0) / a.width).ceil() as usize);
            let h = simulate_overshoot_undershoot_with(&process, q, x, a.width, bins, a.n_paths, a.seed, opts)?;
            let mut t =
                Table::new(&["bin_lo", "bin_hi", "overshoot", "overshoot_stderr", "undershoot", "undershoot_stderr"]);
            for (k, (o, u)) in h.overshoot.iter().zip(&h.undershoot).enumerate() {
                let lo = k as f64 * a.width;
                t.push(vec![
                    lo.into(),
                    (lo + a.width).into(),
                    o.value.into(),
                    o.stderr.into(),
                    u.value.into(),
                    u.stderr.into(),
                ]);
            }
            t.diag("jump_mass", h.jump_mass.value);
            t.diag("jump_mass_stderr", h.jump_mass.stderr);
            t.diag("creep_mass", h.creep_mass.value);
            t.diag("creep_mass_stderr", h.creep_mass.stderr);
            t
        }
        SimKind::Joint => {
            let pair = IntervalPair::new(a.a_window.lo, a.a_window.hi, a.b_window.lo, a.b_window.hi)?;
            let mut t = Table::new(&["x", "probability", "stderr", "ci_lo", "ci_hi"]);
            for x in points(a.x, a.grid) {
                let e = simulate_joint_window(&process, q, x, &pair, a.n_paths, a.seed, opts)?;
                let mut row = vec![x.into()];
                row.extend(estimate_cells(&e));
                t.push(row);
            }
            t
        }
    };
    t.diag("jump_mean", process.jumps.mean());
    Ok(t)
}

fn identity_row(t: &mut Table, name: &str, residual: f64, tol: Option<f64>) {
    let (tol_cell, status) = match tol {
        Some(tol) if residual < tol => (tol.into(), "pass"),
        Some(tol) => (tol.into(), "fail"),
        None => (Cell::Num(f64::NAN), "info"),
    };
    t.push(vec![name.into(), residual.into(), tol_cell, status.into()]);
}

fn identities(a: &IdentitiesArgs, model: LoadedModel, q: f64) -> Result<Table> {
    let mut t = Table::new(&["identity", "residual", "tolerance", "status"]);
    match model {
        LoadedModel::Levy(m) => levy_identities(&mut t, &m, q)?,
        LoadedModel::Beta(p) => beta_identities(&mut t, &p, q, a.m)?,
    }
    let failed = t.rows.iter().filter(|r| r[3] == Cell::from("fail")).count();
    t.diag("failed", failed);
    Ok(t)
}

fn levy_identities(t: &mut Table, m: &SnLevyModel<f64>, q: f64) -> Result<()> {
    let (decomp, wh, sc) = build_all(m, q)?;
    let tol = Some(IDENTITY_TOL);
    identity_row(t, "psi_zeta_minus_q", (m.laplace_exponent(decomp.zeta)? - q).abs(), tol);
    // |psi(-xi) - q| relative to the rounding floor of the evaluation
    let mut roots = 0.0f64;
    for r in &decomp.neg_roots {
        let s = -r.xi;
        let res = (m.laplace_exponent_complex(s)? - q).norm();
        let slope = m.laplace_exponent_derivative_complex(s)?.norm();
        roots = roots.max(res / (q.max(1.0) + s.norm() * slope));
    }
    identity_row(t, "negative_roots_scaled", roots, tol);
    if matches!(m.jumps(), JumpDistribution::HyperExponential(_)) {
        let ok = decomp.is_interlaced() && decomp.all_simple() && decomp.all_real();
        identity_row(t, "roots_interlace_poles", if ok { 0.0 } else { 1.0 }, Some(0.5));
    }
    let ids = boundary_identities(&sc, &wh);
    identity_row(t, "sum_c_vs_inverse_psi_prime", ids.coefficient_sum_rel_err, tol);
    identity_row(t, "zeta_over_q_vs_theta", ids.zeta_theta_rel_err, tol);
    identity_row(t, "wh_factor_at_zero", (wh_factor_minus(&decomp, Cplx::new(0.0, 0.0))? - 1.0).norm(), tol);
    let w0_expected = if m.sigma() > 0.0 { 0.0 } else { m.mu().recip() };
    identity_row(t, "w_at_zero", (sc.eval_w(0.0) - w0_expected).abs(), tol);
    identity_row(t, "w_prime_at_zero", (sc.w_prime_at_zero_from_terms() - sc.wp0).abs() / sc.wp0, tol);
    let mut lt = 0.0f64;
    for k in 1..=20 {
        let s = sc.zeta + 0.5 * k as f64;
        let want = 1.0 / (m.laplace_exponent(s)? - q);
        let got = sc.laplace_transform(Cplx::new(s, 0.0));
        lt = lt.max((got.re - want).abs() / want.abs()).max(got.im.abs() / want.abs());
    }
    identity_row(t, "laplace_transform", lt, tol);
    let imag = [0.5, 1.0, 2.0, 5.0].iter().map(|&x| sc.tilted_imaginary_residue(x).abs()).fold(0.0, f64::max);
    identity_row(t, "imaginary_residue", imag, tol);
    if let Ok(f) = Fluctuation::new(m, &sc) {
        let conj = f.conjecture_residuals().into_iter().fold(0.0, f64::max);
        identity_row(t, "conjecture", conj, None);
    }
    t.diag("zeta", sc.zeta);
    Ok(())
}

fn beta_identities(t: &mut Table, p: &BetaFamilyParams<f64>, q: f64, m: usize) -> Result<()> {
    let tm = truncated_coefficients(p, q, m)?;
    let tol = Some(IDENTITY_TOL);
    identity_row(t, "psi_zeta_minus_q", (beta_psi(p, tm.zeta)? - q).abs(), tol);
    identity_row(t, "roots_interlace_poles", if tm.is_interlaced() { 0.0 } else { 1.0 }, Some(0.5));
    identity_row(t, "delta_nonnegative", (-tm.delta).max(0.0), tol);
    let (lo, hi) = tm.w_bounds(0.0);
    identity_row(t, "gap_at_zero_is_two_delta", ((hi - lo) - 2.0 * tm.delta).abs(), tol);
    if let Some(eps) = tm.epsilon {
        identity_row(t, "epsilon", eps, None);
    }
    t.diag("zeta", tm.zeta);
    t.diag("delta", tm.delta);
    Ok(())
}
