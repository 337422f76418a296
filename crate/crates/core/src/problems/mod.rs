//! Concrete learning tuples: Gaussian mean estimation, ball-constrained logistic
//! regression, and a regularized-ERM wrapper over either.

mod gaussian;
mod logistic;
pub mod optim;
mod rerm;

pub use gaussian::{gaussian_erm, GaussianMeanProblem};
pub use logistic::{logistic_erm, logistic_loss, sigmoid, softplus, LabeledPoint, LogisticProblem};
pub use rerm::{rerm, RegularizedFit, RegularizedProblem, Regularizer, RermConfig};
