use rand::Rng;

use crate::error::invalid;
use crate::risk::{Fit, LearningProblem};
use crate::Result;

/// Regularizer `g` over hypothesis coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularizer {
    /// `g(w) = ‖w‖₂²`.
    SquaredNorm,
}

impl Regularizer {
    pub fn value(&self, w: &[f64]) -> f64 {
        match self {
            Regularizer::SquaredNorm => w.iter().map(|v| v * v).sum(),
        }
    }

    pub fn add_gradient(&self, w: &[f64], scale: f64, grad: &mut [f64]) {
        match self {
            Regularizer::SquaredNorm => {
                for (g, v) in grad.iter_mut().zip(w) {
                    *g += scale * 2.0 * v;
                }
            }
        }
    }
}

/// Regularized ERM: `argmin L̂(w, S_n) + (λ/n) g(w)` with `|g(w₁) − g(w₂)| ≤ B` on the
/// hypothesis space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RermConfig {
    lambda: f64,
    regularizer: Regularizer,
    range_bound: f64,
}

impl RermConfig {
    pub fn new(lambda: f64, regularizer: Regularizer, range_bound: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", lambda, "must be finite and nonnegative"));
        }
        if !(range_bound > 0.0 && range_bound.is_finite()) {
            return Err(invalid("range_bound", range_bound, "must be positive"));
        }
        Ok(Self {
            lambda,
            regularizer,
            range_bound,
        })
    }

    /// Squared-norm regularizer on a ball of the given radius, where the range of `g`
    /// is exactly `radius²`.
    pub fn squared_norm_on_ball(lambda: f64, radius: f64) -> Result<Self> {
        Self::new(lambda, Regularizer::SquaredNorm, radius * radius)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn regularizer(&self) -> Regularizer {
        self.regularizer
    }

    pub fn range_bound(&self) -> f64 {
        self.range_bound
    }

    /// Largest observed `|g(w₁) − g(w₂)|` over the given hypotheses.
    pub fn observed_range(&self, hypotheses: impl IntoIterator<Item = Vec<f64>>) -> f64 {
        let (lo, hi) = hypotheses
            .into_iter()
            .map(|w| self.regularizer.value(&w))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
                (lo.min(g), hi.max(g))
            });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }
}

/// Problems whose algorithm can be run with an added `(λ/n) g(w)` penalty.
pub trait RegularizedFit: LearningProblem {
    /// With `λ = 0` the result coincides with [`LearningProblem::run_algorithm`].
    fn fit_regularized(
        &self,
        sample: &[Self::Point],
        config: &RermConfig,
    ) -> Result<Fit<Self::Hypothesis>>;
}

/// Runs regularized ERM of `base` on `sample`.
pub fn rerm<P: RegularizedFit>(
    sample: &[P::Point],
    config: &RermConfig,
    base: &P,
) -> Result<Fit<P::Hypothesis>> {
    base.fit_regularized(sample, config)
}

/// A base problem whose algorithm is replaced by regularized ERM. The loss and the
/// optimal hypothesis are those of the base problem.
#[derive(Clone, Debug)]
pub struct RegularizedProblem<P> {
    base: P,
    config: RermConfig,
}

impl<P: RegularizedFit> RegularizedProblem<P> {
    pub fn new(base: P, config: RermConfig) -> Self {
        Self { base, config }
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn config(&self) -> &RermConfig {
        &self.config
    }
}

impl<P: RegularizedFit> LearningProblem for RegularizedProblem<P> {
    type Hypothesis = P::Hypothesis;
    type Point = P::Point;

    fn id(&self) -> String {
        format!("{}+rerm(lambda={})", self.base.id(), self.config.lambda)
    }

    fn sample_z<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Self::Point> {
        self.base.sample_z(n, rng)
    }

    fn loss(&self, w: &Self::Hypothesis, z: &Self::Point) -> f64 {
        self.base.loss(w, z)
    }

    fn optimal_hypothesis(&self) -> Option<&Self::Hypothesis> {
        self.base.optimal_hypothesis()
    }

    fn run_algorithm(&self, sample: &[Self::Point]) -> Result<Fit<Self::Hypothesis>> {
        self.base.fit_regularized(sample, &self.config)
    }

    fn hypothesis_dim(&self) -> usize {
        self.base.hypothesis_dim()
    }

    fn hypothesis_coords(&self, w: &Self::Hypothesis, out: &mut Vec<f64>) {
        self.base.hypothesis_coords(w, out)
    }

    fn point_dim(&self) -> usize {
        self.base.point_dim()
    }

    fn point_coords(&self, z: &Self::Point, out: &mut Vec<f64>) -> Option<u32> {
        self.base.point_coords(z, out)
    }

    fn is_labelled(&self) -> bool {
        self.base.is_labelled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{GaussianMeanProblem, LabeledPoint, LogisticProblem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empirical_reg_objective(
        p: &LogisticProblem,
        s: &[LabeledPoint],
        lambda: f64,
        w: &[f64; 2],
    ) -> f64 {
        let n = s.len() as f64;
        s.iter().map(|z| p.loss(w, z)).sum::<f64>() / n
            + lambda / n * Regularizer::SquaredNorm.value(w)
    }

    #[test]
    fn zero_lambda_is_plain_erm() {
        let g = GaussianMeanProblem::new(0.0, 1.0).unwrap();
        let s = g.sample_z(25, &mut ChaCha8Rng::seed_from_u64(4));
        let cfg = RermConfig::new(0.0, Regularizer::SquaredNorm, 1.0).unwrap();
        assert_eq!(rerm(&s, &cfg, &g).unwrap(), g.run_algorithm(&s).unwrap());

        let l = LogisticProblem::paper_default();
        let s = l.sample_z(100, &mut ChaCha8Rng::seed_from_u64(4));
        let cfg = RermConfig::squared_norm_on_ball(0.0, 3.0).unwrap();
        assert_eq!(rerm(&s, &cfg, &l).unwrap(), l.run_algorithm(&s).unwrap());
    }

    #[test]
    fn gaussian_closed_form_agreement() {
        // argmin (1/n)Σ(w − z)² + (λ/n)w² = Σz / (n + λ).
        let g = GaussianMeanProblem::new(0.5, 1.0).unwrap();
        let s = g.sample_z(10, &mut ChaCha8Rng::seed_from_u64(8));
        let cfg = RermConfig::new(1.0, Regularizer::SquaredNorm, 1.0).unwrap();
        let fit = rerm(&s, &cfg, &g).unwrap();
        let closed = s.iter().sum::<f64>() / (10.0 + 1.0);
        assert!(fit.converged);
        assert!((fit.hypothesis - closed).abs() < 1e-8);
    }

    #[test]
    fn huge_lambda_drives_hypothesis_to_origin() {
        let l = LogisticProblem::paper_default();
        let s = l.sample_z(200, &mut ChaCha8Rng::seed_from_u64(3));
        let cfg = RermConfig::squared_norm_on_ball(1e9, 3.0).unwrap();
        let fit = rerm(&s, &cfg, &l).unwrap();
        let norm = fit.hypothesis.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "norm {norm}");
    }

    #[test]
    fn rerm_minimizes_regularized_objective_against_optimum() {
        let l = LogisticProblem::paper_default().with_optimum([-0.5, -0.5]);
        let lambda = 5.0;
        let cfg = RermConfig::squared_norm_on_ball(lambda, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let s = l.sample_z(100, &mut rng);
            let w = rerm(&s, &cfg, &l).unwrap().hypothesis;
            let at_w = empirical_reg_objective(&l, &s, lambda, &w);
            let at_opt = empirical_reg_objective(&l, &s, lambda, l.optimal_hypothesis().unwrap());
            assert!(at_w <= at_opt + 1e-12);
        }
    }

    #[test]
    fn range_bound_holds_on_ball() {
        let cfg = RermConfig::squared_norm_on_ball(1.0, 3.0).unwrap();
        assert_eq!(cfg.range_bound(), 9.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ws = (0..2000).map(|_| {
            let r = 3.0 * rand::Rng::random::<f64>(&mut rng).sqrt();
            let t = std::f64::consts::TAU * rand::Rng::random::<f64>(&mut rng);
            vec![r * t.cos(), r * t.sin()]
        });
        assert!(cfg.observed_range(ws) <= cfg.range_bound());
    }

    #[test]
    fn wrapper_reports_base_optimum() {
        let g = GaussianMeanProblem::new(2.0, 1.0).unwrap();
        let cfg = RermConfig::new(3.0, Regularizer::SquaredNorm, 4.0).unwrap();
        let p = RegularizedProblem::new(g, cfg);
        assert_eq!(p.optimal_hypothesis(), Some(&2.0));
        assert!(p.id().contains("rerm"));
    }
}
