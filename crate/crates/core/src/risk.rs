//! Problem formulation shared by every other module: learning tuples, excess losses,
//! and the Monte Carlo estimators of generalization error, excess risk and empirical
//! excess risk.

use std::fmt::Debug;

use rand::Rng;

use crate::montecarlo::ReplicateSet;
use crate::stats::mean_se;
use crate::{Error, Result};

/// Which law a `(w, z)` pair is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coupling {
    /// `P_{W Z_i}`: the hypothesis was trained on a sample containing `z`.
    Joint,
    /// `P_W ⊗ μ`: `z` is independent of the hypothesis.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcessLossSample {
    /// `ℓ(w, z) − ℓ(w*, z)`.
    pub r_value: f64,
    pub coupling: Coupling,
}

/// Algorithm output together with its convergence status.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit<H> {
    pub hypothesis: H,
    /// `false` when an iterative solver stopped with the gradient norm above tolerance;
    /// the best iterate is still returned.
    pub converged: bool,
}

impl<H> Fit<H> {
    pub fn exact(hypothesis: H) -> Self {
        Self {
            hypothesis,
            converged: true,
        }
    }
}

/// A learning tuple: data sampler, loss, optimal hypothesis and algorithm.
///
/// Hypotheses and data points also expose flat real coordinates (plus an optional
/// discrete label for points) so the replicate engine and the MI estimators can work
/// without knowing the concrete problem.
pub trait LearningProblem: Send + Sync {
    type Hypothesis: Clone + Debug + Send + Sync;
    type Point: Clone + Debug + Send + Sync;

    fn id(&self) -> String;

    /// Draws `n` i.i.d. points. Identical generator state gives an identical sequence.
    fn sample_z<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Self::Point>;

    fn loss(&self, w: &Self::Hypothesis, z: &Self::Point) -> f64;

    /// `None` while the population minimizer has not been resolved.
    fn optimal_hypothesis(&self) -> Option<&Self::Hypothesis>;

    fn run_algorithm(&self, sample: &[Self::Point]) -> Result<Fit<Self::Hypothesis>>;

    fn hypothesis_dim(&self) -> usize;
    fn hypothesis_coords(&self, w: &Self::Hypothesis, out: &mut Vec<f64>);

    fn point_dim(&self) -> usize;
    /// Appends the continuous coordinates of `z` and returns its label, if any.
    fn point_coords(&self, z: &Self::Point, out: &mut Vec<f64>) -> Option<u32>;
    fn is_labelled(&self) -> bool;
}

/// The resolved optimal hypothesis, or a configuration error.
pub fn resolved_optimum<P: LearningProblem>(problem: &P) -> Result<&P::Hypothesis> {
    problem.optimal_hypothesis().ok_or_else(|| {
        Error::Config(format!(
            "optimal hypothesis of problem `{}` is not resolved",
            problem.id()
        ))
    })
}

/// `r(w, z) = ℓ(w, z) − ℓ(w*, z)`.
pub fn excess_loss<P: LearningProblem>(
    problem: &P,
    w: &P::Hypothesis,
    z: &P::Point,
) -> Result<f64> {
    let w_star = resolved_optimum(problem)?;
    Ok(problem.loss(w, z) - problem.loss(w_star, z))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskStdErrors {
    pub gen_error: f64,
    pub excess_risk: f64,
    pub empirical_excess: f64,
}

/// Monte Carlo estimates of `E[E(W,S_n)]`, `E[R(W)]` and `E[R̂(W,S_n)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskEstimates {
    pub gen_error: f64,
    pub excess_risk: f64,
    pub empirical_excess: f64,
    pub std_errors: RiskStdErrors,
    pub m_replicates: usize,
}

/// Replicate-level risk estimates.
///
/// For replicate `j` the excess risk is the mean of the product-coupled excess losses,
/// the empirical excess risk is the mean of the in-sample excess losses, and the
/// generalization error is their difference. This equals the product-minus-in-sample
/// difference of raw losses up to the zero-mean term
/// `mean ℓ(w*, Z') − mean ℓ(w*, Z)`, which is subtracted as a control variate; the
/// identity `gen_error = excess_risk − empirical_excess` then holds on every replicate.
pub fn estimate_risks(replicates: &ReplicateSet) -> Result<RiskEstimates> {
    let m = replicates.m();
    if m < 2 {
        return Err(Error::InsufficientData {
            what: "replicates",
            needed: 2,
            got: m,
        });
    }
    let mut excess = Vec::with_capacity(m);
    let mut empirical = Vec::with_capacity(m);
    let mut gen = Vec::with_capacity(m);
    for j in 0..m {
        let prod = row_mean(replicates.product_r_row(j));
        let joint = row_mean(replicates.joint_r_row(j));
        excess.push(prod);
        empirical.push(joint);
        gen.push(prod - joint);
    }
    let gen = mean_se(&gen)?;
    let excess = mean_se(&excess)?;
    let empirical = mean_se(&empirical)?;
    Ok(RiskEstimates {
        gen_error: gen.mean,
        excess_risk: excess.mean,
        empirical_excess: empirical.mean,
        std_errors: RiskStdErrors {
            gen_error: gen.se,
            excess_risk: excess.se,
            empirical_excess: empirical.se,
        },
        m_replicates: m,
    })
}

/// Same estimator built from raw losses only (no `w*` control variate). Unbiased for
/// the generalization error but noisier; kept for comparison.
pub fn raw_loss_gen_error(replicates: &ReplicateSet) -> Result<crate::stats::MeanSe<f64>> {
    let gen: Vec<f64> = (0..replicates.m())
        .map(|j| row_mean(replicates.product_loss_row(j)) - row_mean(replicates.joint_loss_row(j)))
        .collect();
    mean_se(&gen)
}

fn row_mean(row: &[f64]) -> f64 {
    row.iter().sum::<f64>() / row.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{run_replicates, ReplicateOptions};
    use crate::problems::{GaussianMeanProblem, LogisticProblem};

    #[test]
    fn excess_loss_at_optimum_is_zero() {
        let p = GaussianMeanProblem::new(0.3, 1.0).unwrap();
        for z in [-2.0, 0.0, 0.3, 5.0] {
            assert_eq!(excess_loss(&p, &0.3, &z).unwrap(), 0.0);
        }
    }

    #[test]
    fn excess_loss_direct_arithmetic() {
        let p = GaussianMeanProblem::new(0.0, 1.0).unwrap();
        // (0.5 − 1)² − (0 − 1)²
        assert_eq!(excess_loss(&p, &0.5, &1.0).unwrap(), -0.75);
    }

    #[test]
    fn unresolved_optimum_is_a_config_error() {
        let p = LogisticProblem::paper_default();
        let z = crate::problems::LabeledPoint {
            x: [1.0, 0.0],
            y: 1,
        };
        assert!(matches!(
            excess_loss(&p, &[0.0, 0.0], &z),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn product_coupling_mean_matches_excess_risk() {
        // E over P_W ⊗ μ of r equals σ²/n.
        let p = GaussianMeanProblem::new(0.0, 1.0).unwrap();
        let rs = run_replicates(&p, 20, 20_000, 5, &ReplicateOptions::default()).unwrap();
        let est = estimate_risks(&rs).unwrap();
        assert!((est.excess_risk - 0.05).abs() < 3.0 * est.std_errors.excess_risk);
    }

    #[test]
    fn identity_holds_on_shared_replicates() {
        let p = GaussianMeanProblem::new(1.0, 2.0).unwrap();
        let rs = run_replicates(&p, 7, 300, 11, &ReplicateOptions::default()).unwrap();
        let est = estimate_risks(&rs).unwrap();
        let diff = est.gen_error - (est.excess_risk - est.empirical_excess);
        assert!(diff.abs() < 1e-12, "identity off by {diff}");
    }

    #[test]
    fn degenerate_data_has_zero_risks() {
        let p = GaussianMeanProblem::new(2.0, 0.0).unwrap();
        let rs = run_replicates(&p, 10, 50, 1, &ReplicateOptions::default()).unwrap();
        let est = estimate_risks(&rs).unwrap();
        assert_eq!(est.gen_error, 0.0);
        assert_eq!(est.excess_risk, 0.0);
        assert_eq!(est.empirical_excess, 0.0);
    }

    #[test]
    fn raw_loss_estimator_agrees_in_expectation() {
        let p = GaussianMeanProblem::new(0.0, 1.0).unwrap();
        let rs = run_replicates(&p, 10, 20_000, 3, &ReplicateOptions::default()).unwrap();
        let cv = estimate_risks(&rs).unwrap();
        let raw = raw_loss_gen_error(&rs).unwrap();
        assert!(raw.se > cv.std_errors.gen_error);
        assert!((raw.mean - 0.2).abs() < 3.0 * raw.se);
        assert!((cv.gen_error - 0.2).abs() < 3.0 * cv.std_errors.gen_error);
    }

    #[test]
    fn standard_errors_follow_inverse_sqrt_law() {
        // Quadrupling the replicate count halves the standard error.
        let p = GaussianMeanProblem::new(0.0, 1.0).unwrap();
        let opts = ReplicateOptions::default();
        let small = estimate_risks(&run_replicates(&p, 50, 5_000, 21, &opts).unwrap()).unwrap();
        let large = estimate_risks(&run_replicates(&p, 50, 20_000, 22, &opts).unwrap()).unwrap();
        for (a, b) in [
            (small.std_errors.gen_error, large.std_errors.gen_error),
            (small.std_errors.excess_risk, large.std_errors.excess_risk),
            (
                small.std_errors.empirical_excess,
                large.std_errors.empirical_excess,
            ),
        ] {
            let ratio = a / b;
            assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
        }
    }

    #[test]
    fn too_few_replicates() {
        let p = GaussianMeanProblem::new(0.0, 1.0).unwrap();
        let rs = run_replicates(&p, 5, 2, 1, &ReplicateOptions::default()).unwrap();
        let single = rs.retain_rows(&[0]);
        assert!(matches!(
            estimate_risks(&single),
            Err(Error::InsufficientData { .. })
        ));
    }
}
