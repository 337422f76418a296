//! Bound evaluators. Each one applies a single formula to already-fitted ingredients
//! and returns a [`BoundReport`]; fitting lives in [`crate::conditions`].
//!
//! `mi` is always the per-index sequence `I(W; Z_1), …, I(W; Z_n)`, so `n = mi.len()`.

use std::fmt;

use crate::error::invalid;
use crate::stats::linear_fit;
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Slow rate, sub-Gaussian loss: `(1/n) Σ √(2σ² I_i)`.
    Thm1Slow,
    /// Sub-Gaussian excess loss.
    Thm2ExcessSg,
    /// Fast rate under the sub-Gaussian condition.
    Thm3FastSg,
    /// Fast rate under the `(η, c)`-central condition.
    Thm5EtaC,
    /// Regularized ERM.
    RermLemma,
    /// Intermediate rate under the `v`-central condition.
    Thm7Intermediate,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::Thm1Slow,
        BoundKind::Thm2ExcessSg,
        BoundKind::Thm3FastSg,
        BoundKind::Thm5EtaC,
        BoundKind::RermLemma,
        BoundKind::Thm7Intermediate,
    ];

    /// Short name used in CSV columns and config files.
    pub fn short_name(&self) -> &'static str {
        match self {
            BoundKind::Thm1Slow => "thm1",
            BoundKind::Thm2ExcessSg => "thm2",
            BoundKind::Thm3FastSg => "thm3",
            BoundKind::Thm5EtaC => "thm5",
            BoundKind::RermLemma => "rerm",
            BoundKind::Thm7Intermediate => "thm7",
        }
    }

    pub fn from_short_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.short_name() == name)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Everything a bound consumed. Unused parameters stay `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ingredients<T> {
    pub mi: Vec<T>,
    pub n: usize,
    pub sigma: Option<T>,
    pub mean_r: Option<T>,
    pub eta: Option<T>,
    pub c: Option<T>,
    pub a_eta: Option<T>,
    pub beta: Option<T>,
    pub lambda: Option<T>,
    pub reg_range_bound: Option<T>,
    pub empirical_excess: Option<T>,
    /// Serialized certificate the parameters came from, if any.
    pub certificate: Option<String>,
}

impl<T: Real> Ingredients<T> {
    fn new(mi: &[T]) -> Self {
        Self {
            mi: mi.to_vec(),
            n: mi.len(),
            sigma: None,
            mean_r: None,
            eta: None,
            c: None,
            a_eta: None,
            beta: None,
            lambda: None,
            reg_range_bound: None,
            empirical_excess: None,
            certificate: None,
        }
    }

    pub fn mi_sum(&self) -> T {
        self.mi.iter().fold(T::zero(), |a, &b| a + b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport<T> {
    pub kind: BoundKind,
    pub gen_bound: T,
    pub excess_bound: Option<T>,
    pub ingredients: Ingredients<T>,
    pub valid: bool,
    pub validity_notes: String,
}

impl<T: Real> BoundReport<T> {
    fn valid(
        kind: BoundKind,
        gen_bound: T,
        excess_bound: Option<T>,
        ingredients: Ingredients<T>,
    ) -> Self {
        Self {
            kind,
            gen_bound,
            excess_bound,
            ingredients,
            valid: true,
            validity_notes: String::new(),
        }
    }

    /// Attaches the certificate record the parameters were fitted from.
    pub fn with_certificate(mut self, record: impl Into<String>) -> Self {
        self.ingredients.certificate = Some(record.into());
        self
    }

    /// Marks the report invalid, appending a note.
    pub fn invalidate(mut self, note: &str) -> Self {
        self.valid = false;
        if !self.validity_notes.is_empty() {
            self.validity_notes.push_str("; ");
        }
        self.validity_notes.push_str(note);
        self
    }
}

fn check_mi<T: Real>(mi: &[T]) -> Result<T> {
    if mi.is_empty() {
        return Err(Error::Empty("mutual information sequence"));
    }
    let mut sum = T::zero();
    for &v in mi {
        if !v.is_finite() {
            return Err(Error::NonFinite("mutual information"));
        }
        if v < T::zero() {
            return Err(invalid(
                "mi",
                v.as_f64(),
                "mutual information must be nonnegative",
            ));
        }
        sum = sum + v;
    }
    Ok(sum)
}

fn check_finite<T: Real>(v: T, what: &'static str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn sqrt_mean<T: Real>(sigma: T, mi: &[T]) -> T {
    let s2 = sigma * sigma;
    let total = mi
        .iter()
        .fold(T::zero(), |a, &i| a + (T::lit(2.0) * s2 * i).sqrt());
    total / T::from_usize_lossy(mi.len())
}

/// `(1/n) Σ √(2σ² I_i)` with `σ` the sub-Gaussian parameter of the loss.
pub fn bound_thm1<T: Real>(sigma: T, mi: &[T]) -> Result<BoundReport<T>> {
    check_mi(mi)?;
    if !(sigma >= T::zero() && sigma.is_finite()) {
        return Err(invalid(
            "sigma",
            sigma.as_f64(),
            "must be finite and nonnegative",
        ));
    }
    let mut ing = Ingredients::new(mi);
    ing.sigma = Some(sigma);
    Ok(BoundReport::valid(
        BoundKind::Thm1Slow,
        sqrt_mean(sigma, mi),
        None,
        ing,
    ))
}

/// Same form with `σ_r` fitted on the excess loss; the excess-risk bound adds the
/// empirical excess risk.
pub fn bound_thm2<T: Real>(sigma_r: T, mi: &[T], empirical_excess: T) -> Result<BoundReport<T>> {
    check_mi(mi)?;
    if !(sigma_r >= T::zero() && sigma_r.is_finite()) {
        return Err(invalid(
            "sigma_r",
            sigma_r.as_f64(),
            "must be finite and nonnegative",
        ));
    }
    check_finite(empirical_excess, "empirical excess risk")?;
    let mut ing = Ingredients::new(mi);
    ing.sigma = Some(sigma_r);
    ing.empirical_excess = Some(empirical_excess);
    let gen = sqrt_mean(sigma_r, mi);
    Ok(BoundReport::valid(
        BoundKind::Thm2ExcessSg,
        gen,
        Some(empirical_excess + gen),
        ing,
    ))
}

/// Fast rate under the sub-Gaussian condition, with
/// `a_η = 1 − ησ_r²/(2 E[r])`. Outside `0 < η < 2E[r]/σ_r²` the report is
/// returned with `valid = false` and infinite bounds.
pub fn bound_thm3<T: Real>(
    sigma_r: T,
    mean_r_product: T,
    mi: &[T],
    empirical_excess: T,
    eta: T,
) -> Result<BoundReport<T>> {
    let sum = check_mi(mi)?;
    check_finite(sigma_r, "sigma_r")?;
    check_finite(mean_r_product, "mean excess loss")?;
    check_finite(empirical_excess, "empirical excess risk")?;
    check_finite(eta, "eta")?;
    let mut ing = Ingredients::new(mi);
    ing.sigma = Some(sigma_r);
    ing.mean_r = Some(mean_r_product);
    ing.empirical_excess = Some(empirical_excess);
    ing.eta = Some(eta);
    let inf = T::infinity();
    if !(mean_r_product > T::zero()) {
        return Ok(
            BoundReport::valid(BoundKind::Thm3FastSg, inf, Some(inf), ing)
                .invalidate("expected excess loss is not positive"),
        );
    }
    let a = T::one() - eta * sigma_r * sigma_r / (T::lit(2.0) * mean_r_product);
    ing.a_eta = Some(a);
    if !(eta > T::zero()) || !(a > T::zero()) {
        return Ok(
            BoundReport::valid(BoundKind::Thm3FastSg, inf, Some(inf), ing)
                .invalidate("eta outside (0, 2 E[r] / sigma_r^2)"),
        );
    }
    let n = T::from_usize_lossy(mi.len());
    let mi_term = sum / (n * eta * a);
    let gen = (T::one() - a) / a * empirical_excess + mi_term;
    let excess = empirical_excess / a + mi_term;
    Ok(BoundReport::valid(
        BoundKind::Thm3FastSg,
        gen,
        Some(excess),
        ing,
    ))
}

fn check_c_closed<T: Real>(c: T) -> Result<()> {
    if c > T::zero() && c <= T::one() {
        Ok(())
    } else {
        Err(invalid("c", c.as_f64(), "must lie in (0, 1]"))
    }
}

fn check_eta<T: Real>(eta: T, name: &'static str) -> Result<()> {
    if eta > T::zero() && eta.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, eta.as_f64(), "must be positive and finite"))
    }
}

/// Fast rate under the `(η, c)`-central condition, evaluated at `η' ≤ η`.
pub fn bound_thm5<T: Real>(
    c: T,
    eta_prime: T,
    mi: &[T],
    empirical_excess: T,
) -> Result<BoundReport<T>> {
    let sum = check_mi(mi)?;
    check_c_closed(c)?;
    check_eta(eta_prime, "eta_prime")?;
    check_finite(empirical_excess, "empirical excess risk")?;
    let n = T::from_usize_lossy(mi.len());
    let mi_term = sum / (c * eta_prime * n);
    let gen = (T::one() - c) / c * empirical_excess + mi_term;
    let excess = empirical_excess / c + mi_term;
    let mut ing = Ingredients::new(mi);
    ing.c = Some(c);
    ing.eta = Some(eta_prime);
    ing.empirical_excess = Some(empirical_excess);
    Ok(BoundReport::valid(
        BoundKind::Thm5EtaC,
        gen,
        Some(excess),
        ing,
    ))
}

/// Excess-risk bound for regularized ERM:
/// `(1/c) R̂_reg + λB/(cn) + (1/(cη'n)) Σ I_i`.
///
/// `empirical_excess_reg` is the empirical excess risk of the regularized output. The
/// reported `gen_bound` is `excess_bound − empirical_excess_reg`.
pub fn bound_rerm<T: Real>(
    c: T,
    eta_prime: T,
    mi: &[T],
    empirical_excess_reg: T,
    lambda: T,
    reg_range_bound: T,
) -> Result<BoundReport<T>> {
    let sum = check_mi(mi)?;
    check_c_closed(c)?;
    check_eta(eta_prime, "eta_prime")?;
    check_finite(empirical_excess_reg, "empirical excess risk")?;
    if !(lambda >= T::zero() && lambda.is_finite()) {
        return Err(invalid(
            "lambda",
            lambda.as_f64(),
            "must be finite and nonnegative",
        ));
    }
    if !(reg_range_bound > T::zero() && reg_range_bound.is_finite()) {
        return Err(invalid(
            "reg_range_bound",
            reg_range_bound.as_f64(),
            "must be positive",
        ));
    }
    let n = T::from_usize_lossy(mi.len());
    let excess =
        empirical_excess_reg / c + lambda * reg_range_bound / (c * n) + sum / (c * eta_prime * n);
    let mut ing = Ingredients::new(mi);
    ing.c = Some(c);
    ing.eta = Some(eta_prime);
    ing.lambda = Some(lambda);
    ing.reg_range_bound = Some(reg_range_bound);
    ing.empirical_excess = Some(empirical_excess_reg);
    Ok(BoundReport::valid(
        BoundKind::RermLemma,
        excess - empirical_excess_reg,
        Some(excess),
        ing,
    ))
}

/// Intermediate rate under the `v`-central condition with `v(ε) ≍ ε^{1−β}`:
/// `((1−c)/c) R̂ + (2/(nc)) Σ I_i^{1/(2−β)}`.
pub fn bound_thm7<T: Real>(c: T, beta: T, mi: &[T], empirical_excess: T) -> Result<BoundReport<T>> {
    check_mi(mi)?;
    if !(c > T::zero() && c < T::one()) {
        return Err(invalid("c", c.as_f64(), "must lie in (0, 1)"));
    }
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(invalid("beta", beta.as_f64(), "must lie in [0, 1]"));
    }
    check_finite(empirical_excess, "empirical excess risk")?;
    let n = T::from_usize_lossy(mi.len());
    let exponent = T::one() / (T::lit(2.0) - beta);
    let powered = mi.iter().fold(T::zero(), |a, &i| {
        a + if exponent == T::one() {
            i
        } else {
            i.powf(exponent)
        }
    });
    let mi_term = T::lit(2.0) / (n * c) * powered;
    let gen = (T::one() - c) / c * empirical_excess + mi_term;
    let excess = empirical_excess / c + mi_term;
    let mut ing = Ingredients::new(mi);
    ing.c = Some(c);
    ing.beta = Some(beta);
    ing.empirical_excess = Some(empirical_excess);
    Ok(BoundReport::valid(
        BoundKind::Thm7Intermediate,
        gen,
        Some(excess),
        ing,
    ))
}

/// Least-squares slope of `ln(value)` against `ln(n)`.
pub fn rate_slope<T: Real>(points: &[(T, T)]) -> Result<T> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            what: "(n, value) points",
            needed: 3,
            got: points.len(),
        });
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(n, v) in points {
        if !(v > T::zero() && v.is_finite()) {
            return Err(invalid(
                "value",
                v.as_f64(),
                "rate fit needs positive finite values",
            ));
        }
        if !(n > T::zero()) {
            return Err(invalid("n", n.as_f64(), "must be positive"));
        }
        xs.push(n.ln());
        ys.push(v.ln());
    }
    Ok(linear_fit(&xs, &ys)?.slope)
}
