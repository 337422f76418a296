use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::optim::{projected_gradient_descent, GdSettings};
use super::rerm::{RegularizedFit, RermConfig};
use crate::error::invalid;
use crate::risk::{Fit, LearningProblem};
use crate::{Error, Result};

/// Gap kept between emitted hypotheses and the boundary of the open ball.
const BOUNDARY_GAP: f64 = 1e-6;
const TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPoint {
    pub x: [f64; 2],
    pub y: u8,
}

/// `ln(1 + e^t)` without overflow.
#[inline]
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Cross-entropy `−(y ln σ(wᵀx) + (1−y) ln(1 − σ(wᵀx)))`.
#[inline]
pub fn logistic_loss(w: &[f64; 2], z: &LabeledPoint) -> f64 {
    let t = w[0] * z.x[0] + w[1] * z.x[1];
    softplus(t) - f64::from(z.y) * t
}

/// Mean loss over `sample`, writing its gradient into `grad`.
fn empirical_risk(w: &[f64; 2], sample: &[LabeledPoint], grad: &mut [f64; 2]) -> f64 {
    let mut f = 0.0;
    *grad = [0.0; 2];
    for z in sample {
        let t = w[0] * z.x[0] + w[1] * z.x[1];
        let y = f64::from(z.y);
        f += softplus(t) - y * t;
        let s = sigmoid(t) - y;
        grad[0] += s * z.x[0];
        grad[1] += s * z.x[1];
    }
    let n = sample.len() as f64;
    grad[0] /= n;
    grad[1] /= n;
    f / n
}

/// Unconstrained minimizer of the mean log-loss by Newton's method from the origin.
/// `None` if the Hessian degenerates or the iteration fails to settle.
fn newton_minimizer(sample: &[LabeledPoint]) -> Option<[f64; 2]> {
    let n = sample.len() as f64;
    let mut w = [0.0f64; 2];
    for _ in 0..100 {
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for z in sample {
            let s = sigmoid(w[0] * z.x[0] + w[1] * z.x[1]);
            let e = s - f64::from(z.y);
            let v = s * (1.0 - s);
            g[0] += e * z.x[0];
            g[1] += e * z.x[1];
            h[0] += v * z.x[0] * z.x[0];
            h[1] += v * z.x[0] * z.x[1];
            h[2] += v * z.x[1] * z.x[1];
        }
        let det = h[0] * h[2] - h[1] * h[1];
        if !(det > 0.0 && det.is_finite()) {
            return None;
        }
        let step = [
            (h[2] * g[0] - h[1] * g[1]) / det,
            (h[0] * g[1] - h[1] * g[0]) / det,
        ];
        w = [w[0] - step[0], w[1] - step[1]];
        if !(w[0].is_finite() && w[1].is_finite()) {
            return None;
        }
        if step[0].hypot(step[1]) <= 1e-13 * (1.0 + w[0].hypot(w[1]))
            || g[0].hypot(g[1]) / n < 1e-14
        {
            return Some(w);
        }
    }
    None
}

/// 2-D logistic regression over the ball `‖w‖₂ < radius`.
///
/// Data: `x ~ N(0, I₂)` and `P(y = 1 | x) = σ(−xᵀ w_gen)`. Under this generator the
/// population minimizer of the log-loss is `−w_gen`; `w*` is resolved numerically
/// rather than assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticProblem {
    w_gen: [f64; 2],
    radius: f64,
    gd_steps: usize,
    gd_rate: f64,
    w_star: Option<[f64; 2]>,
}

impl LogisticProblem {
    pub fn new(w_gen: [f64; 2], radius: f64, gd_steps: usize, gd_rate: f64) -> Result<Self> {
        if !w_gen.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("w_gen"));
        }
        if !(radius > BOUNDARY_GAP && radius.is_finite()) {
            return Err(invalid("radius", radius, "must be positive"));
        }
        if gd_steps == 0 {
            return Err(invalid("gd_steps", 0.0, "must be at least 1"));
        }
        if !(gd_rate > 0.0 && gd_rate.is_finite()) {
            return Err(invalid("gd_rate", gd_rate, "must be positive"));
        }
        Ok(Self {
            w_gen,
            radius,
            gd_steps,
            gd_rate,
            w_star: None,
        })
    }

    /// `w_gen = (0.5, 0.5)`, radius 3, 500 steps of size 0.5.
    pub fn paper_default() -> Self {
        Self::new([0.5, 0.5], 3.0, 500, 0.5).expect("valid defaults")
    }

    pub fn w_gen(&self) -> [f64; 2] {
        self.w_gen
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gd_steps(&self) -> usize {
        self.gd_steps
    }

    pub fn gd_rate(&self) -> f64 {
        self.gd_rate
    }

    /// Sets `w*` explicitly, e.g. from a cached earlier resolution.
    pub fn with_optimum(mut self, w_star: [f64; 2]) -> Self {
        self.w_star = Some(w_star);
        self
    }

    /// Resolves `w*` by minimizing the empirical risk on a held-out pool of
    /// `pool_size` points drawn from its own seeded stream.
    pub fn with_resolved_optimum(self, pool_size: usize, seed: u64) -> Result<Self> {
        if pool_size == 0 {
            return Err(Error::Empty("optimum pool"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = self.sample_z(pool_size, &mut rng);
        let inside = self.radius - BOUNDARY_GAP;
        if let Some(w) = newton_minimizer(&pool).filter(|w| w[0].hypot(w[1]) < inside) {
            return Ok(self.with_optimum(w));
        }
        // Constrained optimum: fall back to projected descent.
        let settings = GdSettings {
            steps: 5_000,
            rate: self.gd_rate,
            tolerance: 1e-10,
            radius: Some(inside),
        };
        let out = projected_gradient_descent(
            |w: &[f64; 2], g: &mut [f64; 2]| empirical_risk(w, &pool, g),
            [0.0, 0.0],
            &settings,
        );
        if !out.converged {
            return Err(Error::Degenerate(format!(
                "optimum resolution stopped with gradient norm {:.3e}",
                out.grad_norm
            )));
        }
        Ok(self.with_optimum(out.w))
    }

    fn settings(&self) -> GdSettings {
        GdSettings {
            steps: self.gd_steps,
            rate: self.gd_rate,
            tolerance: TOLERANCE,
            radius: Some(self.radius - BOUNDARY_GAP),
        }
    }
}

/// Projected gradient descent on the empirical log-loss from the origin.
pub fn logistic_erm(problem: &LogisticProblem, sample: &[LabeledPoint]) -> Result<Fit<[f64; 2]>> {
    if sample.is_empty() {
        return Err(Error::Empty("training sample"));
    }
    let out = projected_gradient_descent(
        |w: &[f64; 2], g: &mut [f64; 2]| empirical_risk(w, sample, g),
        [0.0, 0.0],
        &problem.settings(),
    );
    Ok(Fit {
        hypothesis: out.w,
        converged: out.converged,
    })
}

impl LearningProblem for LogisticProblem {
    type Hypothesis = [f64; 2];
    type Point = LabeledPoint;

    fn id(&self) -> String {
        format!(
            "logistic(w_gen=({},{}),radius={})",
            self.w_gen[0], self.w_gen[1], self.radius
        )
    }

    fn sample_z<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<LabeledPoint> {
        (0..n)
            .map(|_| {
                let x: [f64; 2] = [StandardNormal.sample(rng), StandardNormal.sample(rng)];
                let p = sigmoid(-(x[0] * self.w_gen[0] + x[1] * self.w_gen[1]));
                let y = u8::from(rng.random::<f64>() < p);
                LabeledPoint { x, y }
            })
            .collect()
    }

    #[inline]
    fn loss(&self, w: &[f64; 2], z: &LabeledPoint) -> f64 {
        logistic_loss(w, z)
    }

    fn optimal_hypothesis(&self) -> Option<&[f64; 2]> {
        self.w_star.as_ref()
    }

    fn run_algorithm(&self, sample: &[LabeledPoint]) -> Result<Fit<[f64; 2]>> {
        logistic_erm(self, sample)
    }

    fn hypothesis_dim(&self) -> usize {
        2
    }

    fn hypothesis_coords(&self, w: &[f64; 2], out: &mut Vec<f64>) {
        out.extend_from_slice(w);
    }

    fn point_dim(&self) -> usize {
        2
    }

    fn point_coords(&self, z: &LabeledPoint, out: &mut Vec<f64>) -> Option<u32> {
        out.extend_from_slice(&z.x);
        Some(u32::from(z.y))
    }

    fn is_labelled(&self) -> bool {
        true
    }
}

impl RegularizedFit for LogisticProblem {
    fn fit_regularized(
        &self,
        sample: &[LabeledPoint],
        config: &RermConfig,
    ) -> Result<Fit<[f64; 2]>> {
        if config.lambda() == 0.0 {
            return self.run_algorithm(sample);
        }
        if sample.is_empty() {
            return Err(Error::Empty("training sample"));
        }
        let scale = config.lambda() / sample.len() as f64;
        let reg = config.regularizer();
        let out = projected_gradient_descent(
            |w: &[f64; 2], g: &mut [f64; 2]| {
                let f = empirical_risk(w, sample, g);
                reg.add_gradient(w, scale, g);
                f + scale * reg.value(w)
            },
            [0.0, 0.0],
            &self.settings(),
        );
        Ok(Fit {
            hypothesis: out.w,
            converged: out.converged,
        })
    }
}
