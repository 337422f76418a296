//! Deterministic full-batch projected gradient descent for small fixed dimensions.

/// Optimizer settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdSettings {
    pub steps: usize,
    /// Initial step size; each iteration starts here and halves until the
    /// sufficient-decrease test passes.
    pub rate: f64,
    /// Convergence threshold on the norm of the projected-gradient mapping.
    pub tolerance: f64,
    /// Project iterates onto the Euclidean ball of this radius.
    pub radius: Option<f64>,
}

impl Default for GdSettings {
    fn default() -> Self {
        Self {
            steps: 500,
            rate: 0.5,
            tolerance: 1e-8,
            radius: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdOutcome<const D: usize> {
    /// Best iterate seen.
    pub w: [f64; D],
    pub objective: f64,
    /// Norm of the projected-gradient mapping at the last iterate.
    pub grad_norm: f64,
    pub steps: usize,
    pub converged: bool,
}

const MAX_HALVINGS: usize = 40;

pub(crate) fn project<const D: usize>(w: &mut [f64; D], radius: Option<f64>) {
    if let Some(r) = radius {
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > r {
            let s = r / norm;
            w.iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// Minimizes a smooth objective. `eval(w, grad)` returns the objective at `w` and
/// writes its gradient into `grad`.
pub fn projected_gradient_descent<const D: usize, F>(
    mut eval: F,
    start: [f64; D],
    settings: &GdSettings,
) -> GdOutcome<D>
where
    F: FnMut(&[f64; D], &mut [f64; D]) -> f64,
{
    let mut w = start;
    project(&mut w, settings.radius);
    let mut grad = [0.0; D];
    let mut f = eval(&w, &mut grad);
    let mut best = (w, f);
    let mut grad_norm = f64::INFINITY;
    let mut steps = 0;
    let mut converged = false;

    let mut cand_grad = [0.0; D];
    while steps < settings.steps {
        let mut rate = settings.rate;
        let mut accepted = false;
        for halving in 0..MAX_HALVINGS {
            let mut cand = w;
            for d in 0..D {
                cand[d] -= rate * grad[d];
            }
            project(&mut cand, settings.radius);
            let mut step_sq = 0.0;
            let mut lin = 0.0;
            for d in 0..D {
                let delta = cand[d] - w[d];
                step_sq += delta * delta;
                lin += grad[d] * delta;
            }
            if halving == 0 {
                grad_norm = step_sq.sqrt() / rate;
                if grad_norm < settings.tolerance {
                    converged = true;
                    break;
                }
            }
            let f_cand = eval(&cand, &mut cand_grad);
            // A few ulps of slack keep the test meaningful once objective
            // differences fall below rounding.
            let slack = 8.0 * f64::EPSILON * f.abs().max(1.0);
            if f_cand.is_finite() && f_cand <= f + lin + step_sq / (2.0 * rate) + slack {
                w = cand;
                f = f_cand;
                grad = cand_grad;
                accepted = true;
                break;
            }
            rate *= 0.5;
        }
        if converged || !accepted {
            break;
        }
        steps += 1;
        if f < best.1 {
            best = (w, f);
        }
    }
    if !converged && steps == settings.steps {
        // Final check on the last iterate.
        let mut cand = w;
        for d in 0..D {
            cand[d] -= settings.rate * grad[d];
        }
        project(&mut cand, settings.radius);
        let step_sq: f64 = (0..D).map(|d| (cand[d] - w[d]).powi(2)).sum();
        grad_norm = step_sq.sqrt() / settings.rate;
        converged = grad_norm < settings.tolerance;
    }
    GdOutcome {
        w: best.0,
        objective: best.1,
        grad_norm,
        steps,
        converged,
    }
}
