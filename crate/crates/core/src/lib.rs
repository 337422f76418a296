//! # infobound
//!
//! Numerical toolkit for information-theoretic generalization bounds.
//!
//! The crate simulates learning problems (Gaussian mean estimation, ball-constrained
//! logistic regression, regularized ERM), estimates the quantities the bounds consume
//! (per-sample mutual information `I(W;Z_i)`, cumulant generating functions of the
//! excess loss, empirical risks), fits the fast-rate conditions from samples, and
//! evaluates slow, fast, and intermediate rate bounds.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`risk`] | learning-problem trait, excess loss, Monte Carlo risk estimates |
//! | [`problems`] | Gaussian mean, logistic regression, regularized ERM |
//! | [`montecarlo`] | replicate engine with joint and product couplings |
//! | [`mi`] | KSG, mixed continuous-discrete, and chain-rule MI estimators |
//! | [`conditions`] | empirical CGF, sub-Gaussian / central / Bernstein / witness checks |
//! | [`bounds`] | bound evaluators returning [`bounds::BoundReport`] |
//! | [`oracle`] | closed forms for the Gaussian mean-estimation problem |
//!
//! Information is measured in nats throughout.
//!
//! The closed-form and condition-fitting code is generic over [`Real`] (`f32` or
//! `f64`); the aliases at the crate root fix the scalar to `f64`, which is what the
//! simulation and estimation layers use.

// NaN must fail every range check, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod conditions;
pub mod error;
pub mod mi;
pub mod montecarlo;
pub mod oracle;
pub mod problems;
pub mod risk;
pub mod stats;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Floating-point scalar accepted by the generic numerical code.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every finite `f64` is representable (possibly rounded)
    /// in the implementing types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type GaussianOracle = oracle::GaussianOracle<f64>;
pub type CgfProfile = conditions::CgfProfile<f64>;
pub type ConditionCertificate = conditions::ConditionCertificate<f64>;
pub type BoundReport = bounds::BoundReport<f64>;
pub type Ingredients = bounds::Ingredients<f64>;
