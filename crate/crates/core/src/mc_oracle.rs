//! Monte Carlo first-passage simulator used as an independent check of the
//! closed-form identities.
//!
//! Between jumps the Brownian part is advanced on a grid of `substeps`
//! Gaussian increments per inter-arrival period. By default barriers are
//! tested at grid points only, which misses excursions between grid points
//! and so under-detects diffusive crossings; [`Crossing::Bridge`] adds the
//! exact Brownian-bridge crossing probability per step. Every path draws from its own
//! ChaCha stream keyed by `(seed, path index)` and chunk results are merged
//! in a fixed order, so estimates do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluctuation::IntervalPair;
use crate::levy_model::{JumpDistribution, SnLevyModel};

/// Substeps per inter-arrival period.
pub const DEFAULT_SUBSTEPS: usize = 100;
/// Paths are stopped once the discount factor falls below this value.
pub const HORIZON_DISCOUNT: f64 = 1e-8;
/// Period length used in place of inter-arrival times when there are no jumps.
pub const NO_JUMP_SEGMENT: f64 = 0.1;
const CHUNK: usize = 4096;

/// Barrier test for the diffusive part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Crossing {
    /// Test the barriers at grid points only.
    #[default]
    Grid,
    /// Also test for a crossing between grid points, with the conditional
    /// probability `exp(-2 d_0 d_1 / (sigma^2 dt))` of a Brownian bridge.
    Bridge,
}

/// Discretisation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub substeps: usize,
    pub crossing: Crossing,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { substeps: DEFAULT_SUBSTEPS, crossing: Crossing::Grid }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_paths: usize,
    pub seed: u64,
}

impl SimulationEstimate {
    fn from_moments(mean: f64, m2: f64, n: usize, seed: u64) -> Self {
        let var = if n > 1 { (m2 / (n - 1) as f64).max(0.0) } else { 0.0 };
        let stderr = (var / n as f64).sqrt();
        Self { value: mean, stderr, ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr), n_paths: n, seed }
    }

    fn from_sums(sum: f64, sum_sq: f64, n: usize, seed: u64) -> Self {
        let mean = sum / n as f64;
        Self::from_moments(mean, sum_sq - n as f64 * mean * mean, n, seed)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.ci95.0 <= v && v <= self.ci95.1
    }

    /// Whether `v` is within `k` standard errors of the estimate.
    pub fn within_stderr(&self, v: f64, k: f64) -> bool {
        (self.value - v).abs() <= k * self.stderr
    }
}

/// Law of the (positive) jump sizes used by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpLaw {
    HyperExponential {
        weights: Vec<f64>,
        rates: Vec<f64>,
    },
    /// Initial law `alpha` and sub-generator rows.
    PhaseType {
        alpha: Vec<f64>,
        generator: Vec<Vec<f64>>,
    },
    /// `F(t) = 1 - exp(-(t/scale)^shape)`.
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// `F(t) = 1 - (1 + b t)^{-a}`.
    Pareto {
        a: f64,
        b: f64,
    },
}

impl JumpLaw {
    pub fn from_model(model: &SnLevyModel<f64>) -> Self {
        match model.jumps() {
            JumpDistribution::HyperExponential(h) => {
                JumpLaw::HyperExponential { weights: h.weights().to_vec(), rates: h.rates().to_vec() }
            }
            JumpDistribution::PhaseType(ph) => {
                JumpLaw::PhaseType { alpha: ph.alpha().to_vec(), generator: ph.generator().to_rows() }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            JumpLaw::HyperExponential { weights, rates } => {
                let total: f64 = weights.iter().sum();
                weights.iter().zip(rates).map(|(p, e)| p / e).sum::<f64>() / total
            }
            JumpLaw::PhaseType { .. } => f64::NAN,
            JumpLaw::Weibull { shape, scale } => scale * libm::tgamma(1.0 + 1.0 / shape),
            JumpLaw::Pareto { a, b } => {
                if *a > 1.0 {
                    1.0 / (b * (a - 1.0))
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            JumpLaw::HyperExponential { weights, rates } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.gen::<f64>() * total;
                let mut idx = weights.len() - 1;
                for (i, p) in weights.iter().enumerate() {
                    if u < *p {
                        idx = i;
                        break;
                    }
                    u -= p;
                }
                let e: f64 = Exp1.sample(rng);
                e / rates[idx]
            }
            JumpLaw::PhaseType { alpha, generator } => {
                let n = alpha.len();
                let mut state = pick(alpha, rng);
                let mut time = 0.0;
                loop {
                    let rate = -generator[state][state];
                    let e: f64 = Exp1.sample(rng);
                    time += e / rate;
                    // next state proportional to off-diagonal rates; the rest absorbs
                    let mut u = rng.gen::<f64>() * rate;
                    let mut next = None;
                    for j in 0..n {
                        if j == state {
                            continue;
                        }
                        let r = generator[state][j];
                        if u < r {
                            next = Some(j);
                            break;
                        }
                        u -= r;
                    }
                    match next {
                        Some(j) => state = j,
                        None => return time,
                    }
                }
            }
            JumpLaw::Weibull { shape, scale } => {
                let e: f64 = Exp1.sample(rng);
                scale * e.powf(1.0 / shape)
            }
            JumpLaw::Pareto { a, b } => {
                let u: f64 = rng.gen();
                ((1.0 - u).powf(-1.0 / a) - 1.0) / b
            }
        }
    }
}

fn pick(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Process description for the simulator: drift, volatility, jump rate and
/// jump-size law.
#[derive(Debug, Clone, PartialEq)]
pub struct SimProcess {
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub jumps: JumpLaw,
}

impl SimProcess {
    pub fn from_model(model: &SnLevyModel<f64>) -> Self {
        Self { mu: model.mu(), sigma: model.sigma(), lambda: model.lambda(), jumps: JumpLaw::from_model(model) }
    }

    /// Same drift, volatility and rate with a different jump-size law.
    pub fn with_jumps(&self, jumps: JumpLaw) -> Self {
        Self { jumps, ..self.clone() }
    }
}

/// How a simulated path left the region.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Exit {
    Up {
        t: f64,
    },
    /// Diffusive crossing of zero.
    Creep {
        t: f64,
    },
    /// Crossing of zero by a jump from `pre` to `post < 0`.
    Jump {
        t: f64,
        pre: f64,
        post: f64,
    },
    /// Discount factor dropped below the horizon threshold.
    Horizon,
}

struct PathRunner<'a> {
    p: &'a SimProcess,
    q: f64,
    substeps: usize,
    bridge: bool,
    t_max: f64,
}

impl<'a> PathRunner<'a> {
    fn new(p: &'a SimProcess, q: f64, opts: SimOptions) -> Self {
        Self {
            p,
            q,
            substeps: opts.substeps.max(1),
            bridge: opts.crossing == Crossing::Bridge,
            t_max: -HORIZON_DISCOUNT.ln() / q,
        }
    }
}

impl PathRunner<'_> {
    fn run(&self, mut x: f64, b: f64, rng: &mut ChaCha8Rng) -> Exit {
        let p = self.p;
        let mut t = 0.0;
        loop {
            let period = if p.lambda > 0.0 {
                let e: f64 = Exp1.sample(rng);
                e / p.lambda
            } else {
                NO_JUMP_SEGMENT
            };
            if p.sigma > 0.0 {
                let dt = period / self.substeps as f64;
                let sd = p.sigma * dt.sqrt();
                let two_over_var = 2.0 / (p.sigma * p.sigma * dt);
                for _ in 0..self.substeps {
                    let z: f64 = StandardNormal.sample(rng);
                    let prev = x;
                    x += p.mu * dt + sd * z;
                    t += dt;
                    if x <= 0.0 {
                        return Exit::Creep { t };
                    }
                    if x >= b {
                        return Exit::Up { t };
                    }
                    if self.bridge {
                        if rng.gen::<f64>() < (-two_over_var * prev * x).exp() {
                            return Exit::Creep { t };
                        }
                        if b.is_finite() && rng.gen::<f64>() < (-two_over_var * (b - prev) * (b - x)).exp() {
                            return Exit::Up { t };
                        }
                    }
                }
            } else if p.mu > 0.0 && x + p.mu * period >= b {
                return Exit::Up { t: t + (b - x) / p.mu };
            } else {
                x += p.mu * period;
                t += period;
                if x <= 0.0 {
                    return Exit::Creep { t: t - x / p.mu };
                }
            }
            if t > self.t_max {
                return Exit::Horizon;
            }
            if p.lambda > 0.0 {
                let pre = x;
                x -= p.jumps.sample(rng);
                if x < 0.0 {
                    return Exit::Jump { t, pre, post: x };
                }
            }
        }
    }
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn validate(p: &SimProcess, q: f64, n_paths: usize) -> Result<()> {
    if !(q > 0.0) {
        return Err(Error::DomainError(format!("q = {q} must be positive")));
    }
    if n_paths == 0 {
        return Err(Error::DomainError("n_paths must be at least 1".into()));
    }
    if !(p.sigma >= 0.0) || !(p.lambda >= 0.0) || !p.mu.is_finite() {
        return Err(Error::InvalidParameter("simulator needs sigma >= 0, lambda >= 0 and finite drift".into()));
    }
    Ok(())
}

/// Welford accumulator with ordered merging.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64,
        }
    }
}

fn chunks(n_paths: usize) -> Vec<(usize, usize)> {
    (0..n_paths).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(n_paths))).collect()
}

/// Discounted probabilities of leaving `[0, b]` upwards and downwards, using
/// the model's own jump law.
pub fn simulate_two_sided_exit(
    model: &SnLevyModel<f64>,
    q: f64,
    x: f64,
    b: f64,
    n_paths: usize,
    seed: u64,
) -> Result<(SimulationEstimate, SimulationEstimate)> {
    simulate_two_sided_exit_with(&SimProcess::from_model(model), q, x, b, n_paths, seed, SimOptions::default())
}

/// [`simulate_two_sided_exit`] for an arbitrary process and grid resolution.
pub fn simulate_two_sided_exit_with(
    process: &SimProcess,
    q: f64,
    x: f64,
    b: f64,
    n_paths: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<(SimulationEstimate, SimulationEstimate)> {
    validate(process, q, n_paths)?;
    if !(b > 0.0) || !(x >= 0.0) || x > b {
        return Err(Error::DomainError(format!("need 0 <= x <= b and b > 0; got x = {x}, b = {b}")));
    }
    let runner = PathRunner::new(process, q, opts);
    let parts: Vec<(Moments, Moments)> = chunks(n_paths)
        .into_par_iter()
        .map(|(start, end)| {
            let (mut up, mut down) = (Moments::default(), Moments::default());
            for path in start..end {
                let mut rng = path_rng(seed, path);
                let (u, d) = if x >= b {
                    (1.0, 0.0)
                } else if x <= 0.0 && process.sigma > 0.0 {
                    (0.0, 1.0)
                } else {
                    match runner.run(x, b, &mut rng) {
                        Exit::Up { t } => ((-runner.q * t).exp(), 0.0),
                        Exit::Creep { t } | Exit::Jump { t, .. } => (0.0, (-runner.q * t).exp()),
                        Exit::Horizon => (0.0, 0.0),
                    }
                };
                up.push(u);
                down.push(d);
            }
            (up, down)
        })
        .collect();
    let (up, down) =
        parts.into_iter().fold((Moments::default(), Moments::default()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));
    Ok((
        SimulationEstimate::from_moments(up.mean, up.m2, n_paths, seed),
        SimulationEstimate::from_moments(down.mean, down.m2, n_paths, seed),
    ))
}

/// Per-bin discounted densities of overshoot `-X_{tau_0^-}` and undershoot
/// `X_{tau_0^- -}` on the event of a down-crossing by a jump.
#[derive(Debug, Clone, PartialEq)]
pub struct OvershootUndershootHistograms {
    /// Bin `k` covers `(k w, (k + 1) w)`.
    pub width: f64,
    pub overshoot: Vec<SimulationEstimate>,
    pub undershoot: Vec<SimulationEstimate>,
    /// `E[e^{-q tau} ; down-crossing by a jump]`.
    pub jump_mass: SimulationEstimate,
    /// `E[e^{-q tau} ; diffusive down-crossing]`.
    pub creep_mass: SimulationEstimate,
}

impl OvershootUndershootHistograms {
    pub fn bin_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.width
    }

    /// Index of the bin containing `v`.
    pub fn bin_of(&self, v: f64) -> usize {
        (v / self.width).floor() as usize
    }
}

/// Histograms with the default bin range `(0, x + 5)`.
pub fn simulate_overshoot_undershoot(
    model: &SnLevyModel<f64>,
    q: f64,
    x: f64,
    window_width: f64,
    n_paths: usize,
    seed: u64,
) -> Result<OvershootUndershootHistograms> {
    let n_bins = ((x + 5.0) / window_width).ceil() as usize;
    simulate_overshoot_undershoot_with(
        &SimProcess::from_model(model),
        q,
        x,
        window_width,
        n_bins,
        n_paths,
        seed,
        SimOptions::default(),
    )
}

#[derive(Clone)]
struct HistSums {
    over: Vec<(f64, f64)>,
    under: Vec<(f64, f64)>,
    jump: (f64, f64),
    creep: (f64, f64),
}

impl HistSums {
    fn new(n_bins: usize) -> Self {
        Self { over: vec![(0.0, 0.0); n_bins], under: vec![(0.0, 0.0); n_bins], jump: (0.0, 0.0), creep: (0.0, 0.0) }
    }

    fn merge(mut self, o: &Self) -> Self {
        let add = |a: &mut (f64, f64), b: &(f64, f64)| {
            a.0 += b.0;
            a.1 += b.1;
        };
        for (a, b) in self.over.iter_mut().zip(&o.over) {
            add(a, b);
        }
        for (a, b) in self.under.iter_mut().zip(&o.under) {
            add(a, b);
        }
        add(&mut self.jump, &o.jump);
        add(&mut self.creep, &o.creep);
        self
    }
}

/// [`simulate_overshoot_undershoot`] for an arbitrary process, bin count and
/// grid resolution.
#[allow(clippy::too_many_arguments)]
pub fn simulate_overshoot_undershoot_with(
    process: &SimProcess,
    q: f64,
    x: f64,
    window_width: f64,
    n_bins: usize,
    n_paths: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<OvershootUndershootHistograms> {
    validate(process, q, n_paths)?;
    if !(x > 0.0) || !(window_width > 0.0) || n_bins == 0 {
        return Err(Error::DomainError("need x > 0, window_width > 0 and at least one bin".into()));
    }
    let runner = PathRunner::new(process, q, opts);
    let parts: Vec<HistSums> = chunks(n_paths)
        .into_par_iter()
        .map(|(start, end)| {
            let mut s = HistSums::new(n_bins);
            for path in start..end {
                let mut rng = path_rng(seed, path);
                match runner.run(x, f64::INFINITY, &mut rng) {
                    Exit::Jump { t, pre, post } => {
                        let v = (-q * t).exp();
                        s.jump.0 += v;
                        s.jump.1 += v * v;
                        let w = v / window_width;
                        let ko = (-post / window_width).floor() as usize;
                        if ko < n_bins {
                            s.over[ko].0 += w;
                            s.over[ko].1 += w * w;
                        }
                        let ku = (pre / window_width).floor() as usize;
                        if ku < n_bins {
                            s.under[ku].0 += w;
                            s.under[ku].1 += w * w;
                        }
                    }
                    Exit::Creep { t } => {
                        let v = (-q * t).exp();
                        s.creep.0 += v;
                        s.creep.1 += v * v;
                    }
                    Exit::Up { .. } | Exit::Horizon => {}
                }
            }
            s
        })
        .collect();
    let total = parts.iter().fold(HistSums::new(n_bins), |acc, p| acc.merge(p));
    let est = |(s, ss): (f64, f64)| SimulationEstimate::from_sums(s, ss, n_paths, seed);
    Ok(OvershootUndershootHistograms {
        width: window_width,
        overshoot: total.over.iter().map(|&v| est(v)).collect(),
        undershoot: total.under.iter().map(|&v| est(v)).collect(),
        jump_mass: est(total.jump),
        creep_mass: est(total.creep),
    })
}

/// `E[e^{-q tau}; overshoot in (a_lo, a_hi), undershoot in (b_lo, b_hi)]`
/// for the first down-crossing by a jump, started at `x`.
pub fn simulate_joint_window(
    process: &SimProcess,
    q: f64,
    x: f64,
    window: &IntervalPair<f64>,
    n_paths: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<SimulationEstimate> {
    validate(process, q, n_paths)?;
    if !(x > 0.0) {
        return Err(Error::DomainError(format!("starting level x = {x} must be positive")));
    }
    let runner = PathRunner::new(process, q, opts);
    let parts: Vec<Moments> = chunks(n_paths)
        .into_par_iter()
        .map(|(start, end)| {
            let mut m = Moments::default();
            for path in start..end {
                let mut rng = path_rng(seed, path);
                let v = match runner.run(x, f64::INFINITY, &mut rng) {
                    Exit::Jump { t, pre, post }
                        if -post > window.a_lo && -post < window.a_hi && pre > window.b_lo && pre < window.b_hi =>
                    {
                        (-q * t).exp()
                    }
                    _ => 0.0,
                };
                m.push(v);
            }
            m
        })
        .collect();
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(SimulationEstimate::from_moments(m.mean, m.m2, n_paths, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::HyperExponential;

    #[test]
    fn pure_drift_is_exact() {
        let p = SimProcess { mu: 2.0, sigma: 0.0, lambda: 0.0, jumps: JumpLaw::Weibull { shape: 1.0, scale: 1.0 } };
        let (up, down) = simulate_two_sided_exit_with(&p, 0.05, 1.0, 5.0, 1000, 7, SimOptions::default()).unwrap();
        assert!((up.value - (-0.05f64 * 4.0 / 2.0).exp()).abs() < 4.0 * f64::EPSILON);
        assert_eq!(up.stderr, 0.0);
        assert_eq!(down.value, 0.0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = SnLevyModel::hyperexponential(5.0, 1.0, 5.0, HyperExponential::exponential(1.0).unwrap()).unwrap();
        let a = simulate_two_sided_exit(&m, 0.05, 2.0, 5.0, 5000, 3).unwrap();
        let b = simulate_two_sided_exit(&m, 0.05, 2.0, 5.0, 5000, 3).unwrap();
        assert_eq!(a, b);
        let c = simulate_two_sided_exit(&m, 0.05, 2.0, 5.0, 5000, 4).unwrap();
        assert_ne!(a.0.value, c.0.value);
    }

    #[test]
    fn samplers_have_the_right_mean() {
        let laws = [
            JumpLaw::Weibull { shape: 0.6, scale: 0.665 },
            JumpLaw::Pareto { a: 3.0, b: 2.0 },
            JumpLaw::HyperExponential { weights: vec![0.3, 0.7], rates: vec![0.5, 4.0] },
        ];
        for law in laws {
            let mut rng = path_rng(11, 0);
            let n = 200_000;
            let s: f64 = (0..n).map(|_| law.sample(&mut rng)).sum();
            let mean = law.mean();
            assert!((s / n as f64 - mean).abs() < 0.03 * mean, "{law:?}");
        }
        // Erlang(2, 3) as a phase-type law
        let ph = JumpLaw::PhaseType { alpha: vec![1.0, 0.0], generator: vec![vec![-3.0, 3.0], vec![0.0, -3.0]] };
        let mut rng = path_rng(12, 0);
        let s: f64 = (0..100_000).map(|_| ph.sample(&mut rng)).sum();
        assert!((s / 100_000.0 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn overshoot_is_positive() {
        let m = SnLevyModel::hyperexponential(1.0, 0.0, 10.0, HyperExponential::exponential(1.0).unwrap()).unwrap();
        let h = simulate_overshoot_undershoot(&m, 0.05, 5.0, 0.1, 2000, 1).unwrap();
        let total: f64 = h.overshoot.iter().map(|e| e.value).sum::<f64>() * h.width;
        assert!(total <= h.jump_mass.value + 1e-12);
        assert_eq!(h.creep_mass.value, 0.0);
    }
}
