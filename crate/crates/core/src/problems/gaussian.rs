use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::optim::{projected_gradient_descent, GdSettings};
use super::rerm::{RegularizedFit, RermConfig};
use crate::error::invalid;
use crate::risk::{Fit, LearningProblem};
use crate::{Error, Result};

/// Mean estimation with squared loss `ℓ(w, z) = (w − z)²`, data `Z ~ N(μ, σ_N²)`,
/// and ERM (the sample mean).
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMeanProblem {
    mu: f64,
    sigma_n: f64,
}

impl GaussianMeanProblem {
    pub fn new(mu: f64, sigma_n: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", mu, "must be finite"));
        }
        if !(sigma_n >= 0.0 && sigma_n.is_finite()) {
            return Err(invalid(
                "sigma_n",
                sigma_n,
                "must be finite and nonnegative",
            ));
        }
        Ok(Self { mu, sigma_n })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }
}

/// ERM for the squared loss: the sample mean.
pub fn gaussian_erm(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Empty("training sample"));
    }
    Ok(sample.iter().sum::<f64>() / sample.len() as f64)
}

/// Minimizes `(1/n) Σ (w − z_i)² + (λ/n) w²` by gradient descent.
pub(crate) fn gaussian_gd(sample: &[f64], lambda: f64, tolerance: f64) -> Result<Fit<f64>> {
    if sample.is_empty() {
        return Err(Error::Empty("training sample"));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let mean_sq = sample.iter().map(|z| z * z).sum::<f64>() / n;
    let curvature = 2.0 * (1.0 + lambda / n);
    let settings = GdSettings {
        steps: 10_000,
        rate: 0.75 / curvature,
        tolerance,
        radius: None,
    };
    let out = projected_gradient_descent(
        |w: &[f64; 1], g: &mut [f64; 1]| {
            let w = w[0];
            g[0] = 2.0 * (w - mean) + 2.0 * lambda / n * w;
            w * w - 2.0 * w * mean + mean_sq + lambda / n * w * w
        },
        [mean],
        &settings,
    );
    Ok(Fit {
        hypothesis: out.w[0],
        converged: out.converged,
    })
}

impl LearningProblem for GaussianMeanProblem {
    type Hypothesis = f64;
    type Point = f64;

    fn id(&self) -> String {
        format!("gaussian(mu={},sigma_n={})", self.mu, self.sigma_n)
    }

    fn sample_z<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(rng);
                self.mu + self.sigma_n * e
            })
            .collect()
    }

    #[inline]
    fn loss(&self, w: &f64, z: &f64) -> f64 {
        (w - z) * (w - z)
    }

    fn optimal_hypothesis(&self) -> Option<&f64> {
        Some(&self.mu)
    }

    fn run_algorithm(&self, sample: &[f64]) -> Result<Fit<f64>> {
        gaussian_erm(sample).map(Fit::exact)
    }

    fn hypothesis_dim(&self) -> usize {
        1
    }

    fn hypothesis_coords(&self, w: &f64, out: &mut Vec<f64>) {
        out.push(*w);
    }

    fn point_dim(&self) -> usize {
        1
    }

    fn point_coords(&self, z: &f64, out: &mut Vec<f64>) -> Option<u32> {
        out.push(*z);
        None
    }

    fn is_labelled(&self) -> bool {
        false
    }
}

impl RegularizedFit for GaussianMeanProblem {
    fn fit_regularized(&self, sample: &[f64], config: &RermConfig) -> Result<Fit<f64>> {
        if config.lambda() == 0.0 {
            return self.run_algorithm(sample);
        }
        // The gradient step below assumes the squared-norm regularizer.
        gaussian_gd(sample, config.lambda(), 1e-12)
    }
}
