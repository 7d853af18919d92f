//! Built-in models (fitted hyperexponential laws and the numerical
//! scenarios) and the model-file format.
//!
//! A model file is TOML (or JSON with the same structure):
//!
//! ```toml
//! drift = 5.0
//! sigma = 1.0
//! lambda = 5.0
//!
//! [jump]
//! type = "hyperexponential"   # or "phase-type", "beta-family"
//! p = [0.4, 0.6]
//! eta = [1.0, 3.0]
//! ```
//!
//! Phase-type jumps use `alpha = [...]` and `T = [[...], ...]`. Beta-family
//! processes use `type = "beta-family"` with `alpha_b`, `beta_b`, `c` and
//! `lam`; `drift` is then the drift `mu_hat` and `lambda` is ignored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{HyperExponential, PhaseType, SnLevyModel};
use crate::linalg::Matrix;
use crate::meromorphic::BetaFamilyParams;

/// Weibull(0.6, 0.665) fit: `(weight, rate)` pairs.
pub const WEIBULL_FIT: [(f64, f64); 6] = [
    (0.029931, 676.178),
    (0.093283, 38.7090),
    (0.332195, 4.27400),
    (0.476233, 0.76100),
    (0.068340, 0.24800),
    (0.000018, 0.09700),
];

/// Pareto(1.2, 5) fit: `(weight, rate)` pairs.
pub const PARETO_FIT: [(f64, f64); 14] = [
    (8.37e-11, 8.3e-9),
    (7.18e-10, 6.8e-8),
    (5.56e-9, 3.9e-7),
    (4.27e-8, 2.2e-6),
    (3.27e-7, 1.2e-5),
    (2.50e-6, 6.5e-5),
    (1.92e-5, 3.5e-4),
    (0.000147, 0.0020),
    (0.001122, 0.0100),
    (0.008462, 0.0570),
    (0.059768, 0.3060),
    (0.307218, 1.5460),
    (0.533823, 6.5160),
    (0.089437, 23.304),
];

/// Weibull law that [`WEIBULL_FIT`] approximates: `(shape, scale)`.
pub const WEIBULL_LAW: (f64, f64) = (0.6, 0.665);
/// Pareto law that [`PARETO_FIT`] approximates: `F(t) = 1 - (1 + b t)^{-a}` with `(a, b)`.
pub const PARETO_LAW: (f64, f64) = (1.2, 5.0);

/// Exit-probability scenario: drift, jump rate, discount rate, upper barrier.
pub const EXIT_SCENARIO: Scenario = Scenario { mu: 5.0, lambda: 5.0, q: 0.05, x: 1.0, b: 5.0 };
/// Overshoot/undershoot scenario.
pub const DENSITY_SCENARIO: Scenario = Scenario { mu: 1.0, lambda: 10.0, q: 0.05, x: 5.0, b: f64::INFINITY };
/// Discount rate of the beta-family example.
pub const BETA_REFERENCE_Q: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub mu: f64,
    pub lambda: f64,
    pub q: f64,
    pub x: f64,
    pub b: f64,
}

pub fn exp1_jumps() -> HyperExponential<f64> {
    HyperExponential::exponential(1.0).expect("valid")
}

pub fn weibull_fit_jumps() -> HyperExponential<f64> {
    HyperExponential::from_unsorted(&WEIBULL_FIT).expect("valid")
}

pub fn pareto_fit_jumps() -> HyperExponential<f64> {
    HyperExponential::from_unsorted(&PARETO_FIT).expect("valid")
}

/// A model loaded from a built-in name or a file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedModel {
    Levy(SnLevyModel<f64>),
    Beta(BetaFamilyParams<f64>),
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["exp1", "weibull-fit", "pareto-fit", "beta-paper"];

/// Built-in model by name. Jump models use the exit scenario
/// (`mu = 5`, `lambda = 5`) with `sigma = 1`.
pub fn builtin(name: &str) -> Option<LoadedModel> {
    let levy = |jumps| {
        LoadedModel::Levy(
            SnLevyModel::hyperexponential(EXIT_SCENARIO.mu, 1.0, EXIT_SCENARIO.lambda, jumps).expect("valid"),
        )
    };
    match name {
        "exp1" => Some(levy(exp1_jumps())),
        "weibull-fit" => Some(levy(weibull_fit_jumps())),
        "pareto-fit" => Some(levy(pareto_fit_jumps())),
        "beta-paper" => Some(LoadedModel::Beta(BetaFamilyParams::reference_example())),
        _ => None,
    }
}

/// Serialized model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub drift: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub lambda: f64,
    pub jump: JumpSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JumpSpec {
    Hyperexponential {
        p: Vec<f64>,
        eta: Vec<f64>,
    },
    PhaseType {
        alpha: Vec<f64>,
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
    },
    BetaFamily {
        alpha_b: f64,
        beta_b: f64,
        c: f64,
        lam: f64,
    },
}

impl ModelSpec {
    /// Parses TOML, falling back to JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))
        }
    }

    pub fn build(&self) -> Result<LoadedModel> {
        match &self.jump {
            JumpSpec::Hyperexponential { p, eta } => {
                if p.len() != eta.len() {
                    return Err(Error::ModelFile(format!("p has {} entries but eta has {}", p.len(), eta.len())));
                }
                let pairs: Vec<(f64, f64)> = p.iter().copied().zip(eta.iter().copied()).collect();
                let h = HyperExponential::from_unsorted(&pairs)?;
                Ok(LoadedModel::Levy(SnLevyModel::hyperexponential(self.drift, self.sigma, self.lambda, h)?))
            }
            JumpSpec::PhaseType { alpha, t } => {
                if t.len() != alpha.len() || t.iter().any(|row| row.len() != alpha.len()) {
                    return Err(Error::ModelFile("T must be square with the dimension of alpha".into()));
                }
                let ph = PhaseType::new(alpha.clone(), Matrix::from_rows(t))?;
                Ok(LoadedModel::Levy(SnLevyModel::phase_type(self.drift, self.sigma, self.lambda, ph)?))
            }
            JumpSpec::BetaFamily { alpha_b, beta_b, c, lam } => {
                Ok(LoadedModel::Beta(BetaFamilyParams::new(self.drift, self.sigma, *alpha_b, *beta_b, *c, *lam)?))
            }
        }
    }
}

/// Resolves a built-in name or reads and parses a model file.
pub fn load(name_or_path: &str) -> Result<LoadedModel> {
    if let Some(m) = builtin(name_or_path) {
        return Ok(m);
    }
    let text = std::fs::read_to_string(name_or_path)
        .map_err(|e| Error::ModelFile(format!("'{name_or_path}' is not a built-in model and cannot be read: {e}")))?;
    ModelSpec::parse(&text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_are_sorted_and_normalised() {
        let w = weibull_fit_jumps();
        assert!(w.rates().windows(2).all(|r| r[0] < r[1]));
        assert_eq!(w.rates()[0], 0.097);
        assert_eq!(w.weights()[0], 0.000018);
        let p = pareto_fit_jumps();
        assert_eq!(p.len(), 14);
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn parse_toml_and_json() {
        let toml =
            "drift = 5.0\nsigma = 1.0\nlambda = 5.0\n[jump]\ntype = \"hyperexponential\"\np = [1.0]\neta = [1.0]\n";
        let json = r#"{"drift": 5.0, "sigma": 1.0, "lambda": 5.0, "jump": {"type": "hyperexponential", "p": [1.0], "eta": [1.0]}}"#;
        let a = ModelSpec::parse(toml).unwrap().build().unwrap();
        let b = ModelSpec::parse(json).unwrap().build().unwrap();
        assert_eq!(a, b);
        assert_eq!(a, builtin("exp1").unwrap());
        let ph = "drift = 1.0\nlambda = 2.0\n[jump]\ntype = \"phase-type\"\nalpha = [1.0, 0.0]\nT = [[-2.0, 2.0], [0.0, -2.0]]\n";
        assert!(matches!(ModelSpec::parse(ph).unwrap().build().unwrap(), LoadedModel::Levy(_)));
        let beta = "drift = 0.1\nsigma = 0.2\n[jump]\ntype = \"beta-family\"\nalpha_b = 3.0\nbeta_b = 1.0\nc = 0.1\nlam = 1.5\n";
        assert_eq!(ModelSpec::parse(beta).unwrap().build().unwrap(), builtin("beta-paper").unwrap());
    }

    #[test]
    fn invalid_files_are_rejected() {
        assert!(matches!(ModelSpec::parse("drift = 1.0"), Err(Error::ModelFile(_))));
        let bad = "drift = 1.0\nlambda = 1.0\n[jump]\ntype = \"hyperexponential\"\np = [0.5]\neta = [1.0]\n";
        assert!(matches!(ModelSpec::parse(bad).unwrap().build(), Err(Error::SimplexViolation(_))));
        assert!(load("/nonexistent/model.toml").is_err());
    }
}
