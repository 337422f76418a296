use super::{ConditionCertificate, ConditionKind, ConditionParams, MIN_SAMPLES};
use crate::error::invalid;
use crate::stats::mean;
use crate::{Error, Real, Result};

fn check_samples<T: Real>(r: &[T]) -> Result<()> {
    if r.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            what: "excess-loss samples",
            needed: MIN_SAMPLES,
            got: r.len(),
        });
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("excess loss"));
    }
    Ok(())
}

/// `B̂(β) = Ê[r²] / (Ê[r])^β` over a grid of `β`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinProfile<T> {
    /// `(β, B̂(β))`; `None` where `Ê[r] ≤ 0` and `β > 0`.
    pub rows: Vec<(T, Option<T>)>,
    pub mean_r: T,
    pub second_moment: T,
    /// `−min r`.
    pub lower: T,
    /// Certificate at `β = 1`.
    pub certificate: ConditionCertificate<T>,
}

pub fn check_bernstein<T: Real>(product_r: &[T], beta_grid: &[T]) -> Result<BernsteinProfile<T>> {
    check_samples(product_r)?;
    if let Some(&bad) = beta_grid
        .iter()
        .find(|&&b| !(b >= T::zero() && b <= T::one()))
    {
        return Err(invalid("beta", bad.as_f64(), "must lie in [0, 1]"));
    }
    let mean_r = mean(product_r).expect("non-empty");
    let sq: Vec<T> = product_r.iter().map(|&r| r * r).collect();
    let second_moment = mean(&sq).expect("non-empty");
    let lower = -product_r.iter().copied().fold(T::infinity(), T::min);
    let b_at = |beta: T| -> Option<T> {
        if beta == T::zero() {
            Some(second_moment)
        } else if mean_r > T::zero() {
            Some(second_moment / mean_r.powf(beta))
        } else {
            None
        }
    };
    let rows = beta_grid.iter().map(|&b| (b, b_at(b))).collect();
    let b1 = b_at(T::one());
    let certificate = ConditionCertificate {
        kind: ConditionKind::Bernstein,
        params: ConditionParams::Bernstein {
            beta: T::one(),
            b: b1.unwrap_or(T::infinity()),
            lower,
        },
        feasible: b1.is_some(),
        margin: if b1.is_some() {
            T::zero()
        } else {
            T::neg_infinity()
        },
        m: product_r.len(),
        seed: None,
    };
    Ok(BernsteinProfile {
        rows,
        mean_r,
        second_moment,
        lower,
        certificate,
    })
}

/// Upper limits on `η'` under which the Bernstein condition with `β = 1` yields a
/// central condition. The statement and the derivation use different constants; both
/// are reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinLimits<T> {
    /// `min(1/(2B(e−2)), 1/b)`.
    pub stated: T,
    /// `min(1/(2B(e−1)), 1/b)`.
    pub derived: T,
}

pub fn bernstein_eta_limits<T: Real>(b_const: T, lower: T) -> Result<BernsteinLimits<T>> {
    if !(b_const > T::zero()) {
        return Err(invalid("B", b_const.as_f64(), "must be positive"));
    }
    let inv_lower = if lower > T::zero() {
        T::one() / lower
    } else {
        T::infinity()
    };
    let e = T::one().exp();
    Ok(BernsteinLimits {
        stated: (T::one() / (T::lit(2.0) * b_const * (e - T::lit(2.0)))).min(inv_lower),
        derived: (T::one() / (T::lit(2.0) * b_const * (e - T::one()))).min(inv_lower),
    })
}

/// `ĉ(u) = Ê[r·1{r ≤ u}] / Ê[r]`; feasible when `ĉ ∈ (0, 1]`.
pub fn check_witness<T: Real>(product_r: &[T], u: T) -> Result<ConditionCertificate<T>> {
    check_samples(product_r)?;
    if !(u > T::zero() && u.is_finite()) {
        return Err(invalid("u", u.as_f64(), "must be positive and finite"));
    }
    let mean_r = mean(product_r).expect("non-empty");
    if !(mean_r > T::zero()) {
        return Err(Error::Degenerate(format!(
            "expected excess loss {mean_r} is not positive"
        )));
    }
    let m = T::from_usize_lossy(product_r.len());
    let truncated = product_r
        .iter()
        .fold(T::zero(), |a, &r| if r <= u { a + r } else { a })
        / m;
    let c = truncated / mean_r;
    let feasible = c > T::zero() && c <= T::one();
    Ok(ConditionCertificate {
        kind: ConditionKind::Witness,
        params: ConditionParams::Witness { u, c },
        feasible,
        margin: if feasible {
            T::zero()
        } else {
            c.min(T::one() - c)
        },
        m: product_r.len(),
        seed: None,
    })
}

/// Combines the `η`-central and `(u, c)`-witness conditions into an `(η', c')`-central
/// condition with `c' = (c − cη'/η) / (η'u + 1)`.
pub fn central_witness_to_eta_c<T: Real>(eta: T, u: T, c: T, eta_prime: T) -> Result<(T, T)> {
    if !(eta > T::zero() && eta.is_finite()) {
        return Err(invalid("eta", eta.as_f64(), "must be positive and finite"));
    }
    if !(eta_prime > T::zero() && eta_prime < eta) {
        return Err(invalid(
            "eta_prime",
            eta_prime.as_f64(),
            "must lie in (0, eta)",
        ));
    }
    if !(u > T::zero() && u.is_finite()) {
        return Err(invalid("u", u.as_f64(), "must be positive and finite"));
    }
    if !(c > T::zero() && c <= T::one()) {
        return Err(invalid("c", c.as_f64(), "must lie in (0, 1]"));
    }
    Ok((
        eta_prime,
        (c - c * eta_prime / eta) / (eta_prime * u + T::one()),
    ))
}

/// `κ(x) = (eˣ − x − 1)/x²`, with the series `½ + x/6 + x²/24` for `|x| < 10⁻⁴`.
pub fn kappa<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::lit(0.5) + x / T::lit(6.0) + x * x / T::lit(24.0)
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedBernsteinRow<T> {
    pub eta: T,
    /// `log Ê[e^{η(Ê[U] − U)}]`.
    pub lhs: T,
    /// `η² κ(ηb) Ê[U²]`.
    pub rhs: T,
    /// `3/√m` times the sample standard deviation of `e^{η(Ê[U] − U)}`.
    pub slack: T,
    /// `rhs + slack − lhs`.
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedBernsteinReport<T> {
    pub rows: Vec<ExpectedBernsteinRow<T>>,
    pub worst_margin: T,
    pub holds: bool,
}

/// Checks `log Ê[e^{η(Ê[U]−U)}] ≤ η² κ(ηb) Ê[U²] + slack(m)` on every grid point, for
/// samples bounded below by `−b`.
pub fn expected_bernstein_check<T: Real>(
    u_samples: &[T],
    b: T,
    eta_grid: &[T],
) -> Result<ExpectedBernsteinReport<T>> {
    if u_samples.len() < 2 {
        return Err(Error::InsufficientData {
            what: "samples",
            needed: 2,
            got: u_samples.len(),
        });
    }
    if u_samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("samples"));
    }
    if !(b > T::zero() && b.is_finite()) {
        return Err(invalid("b", b.as_f64(), "must be positive and finite"));
    }
    if eta_grid.is_empty() {
        return Err(Error::Empty("eta grid"));
    }
    if let Some(&bad) = eta_grid
        .iter()
        .find(|&&e| !(e > T::zero() && e.is_finite()))
    {
        return Err(invalid(
            "eta",
            bad.as_f64(),
            "grid points must be positive and finite",
        ));
    }
    let min = u_samples.iter().copied().fold(T::infinity(), T::min);
    if min < -b {
        return Err(Error::Precondition(format!(
            "sample {min} lies below the lower bound {}",
            -b
        )));
    }
    let m = T::from_usize_lossy(u_samples.len());
    let mu = mean(u_samples).expect("non-empty");
    let second = u_samples.iter().fold(T::zero(), |a, &u| a + u * u) / m;
    let rows: Vec<_> = eta_grid
        .iter()
        .map(|&eta| {
            let vals: Vec<T> = u_samples.iter().map(|&u| (eta * (mu - u)).exp()).collect();
            let mean_e = vals.iter().fold(T::zero(), |a, &v| a + v) / m;
            let var_e = vals
                .iter()
                .fold(T::zero(), |a, &v| a + (v - mean_e) * (v - mean_e))
                / (m - T::one());
            let lhs = mean_e.ln();
            let rhs = eta * eta * kappa(eta * b) * second;
            let slack = T::lit(3.0) / m.sqrt() * var_e.sqrt();
            ExpectedBernsteinRow {
                eta,
                lhs,
                rhs,
                slack,
                margin: rhs + slack - lhs,
            }
        })
        .collect();
    let worst_margin = rows.iter().map(|r| r.margin).fold(T::infinity(), T::min);
    Ok(ExpectedBernsteinReport {
        holds: worst_margin >= T::zero(),
        rows,
        worst_margin,
    })
}
