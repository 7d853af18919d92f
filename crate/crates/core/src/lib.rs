//! Scale functions and fluctuation identities for spectrally negative Lévy
//! processes.
//!
//! * Jump-diffusions with phase-type (in particular hyperexponential) jumps:
//!   the scale functions `W^{(q)}` and `Z^{(q)}` are exact finite sums of
//!   exponentials built from the roots of the Cramér–Lundberg equation and the
//!   partial fractions of the Wiener–Hopf factor ([`roots`], [`wiener_hopf`],
//!   [`scale`]), giving closed-form exit probabilities and overshoot /
//!   undershoot laws ([`fluctuation`]).
//! * Beta-family meromorphic processes: truncated sums with explicit upper
//!   and lower bounds, and the CGMY limit ([`meromorphic`]).
//! * A Monte Carlo first-passage simulator used as an independent oracle
//!   ([`mc_oracle`]).
//!
//! The analytic core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`. The simulator and the model presets work in `f64`.
//!
//! ```
//! use levy_scale::{fluctuation::up_exit, models, scale::build_scale};
//!
//! let model = models::builtin("exp1").unwrap();
//! let models::LoadedModel::Levy(model) = model else { unreachable!() };
//! let sc = build_scale(&model, 0.05).unwrap();
//! let p = up_exit(&sc, 1.0, 5.0).unwrap();
//! assert!((p - 0.30312).abs() < 5e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fluctuation;
pub mod levy_model;
pub mod linalg;
pub mod mc_oracle;
pub mod meromorphic;
pub mod models;
pub mod poly;
pub mod roots;
pub mod scalar;
pub mod scale;
pub mod special;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type SnLevyModel = levy_model::SnLevyModel<f64>;
pub type HyperExponential = levy_model::HyperExponential<f64>;
pub type PhaseType = levy_model::PhaseType<f64>;
pub type RootDecomposition = roots::RootDecomposition<f64>;
pub type WhCoefficients = wiener_hopf::WhCoefficients<f64>;
pub type ScaleCoefficients = scale::ScaleCoefficients<f64>;
pub type IntervalPair = fluctuation::IntervalPair<f64>;
pub type BetaFamilyParams = meromorphic::BetaFamilyParams<f64>;
pub type TruncatedMero = meromorphic::TruncatedMero<f64>;
