//! Closed forms for Gaussian mean estimation with squared loss and ERM.
//!
//! With `Z ~ N(μ, σ_N²)` and `W = mean(S_n)`, the excess loss is
//! `r(W, Z) = (W − μ)² − 2(W − μ)(Z − μ)` and every quantity below has an exact
//! expression in `σ_N` and `n`. Large-`n` approximations are exposed separately under
//! `asymptotic_*` names.

use crate::error::invalid;
use crate::{Error, Real, Result};

/// Which side of the moment generating function: `plus` is `E[e^{ηr}]`, `minus` is
/// `E[e^{−ηr}]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleQuantity {
    GenError,
    ExcessRisk,
    EmpiricalExcess,
    Mi,
    SecondMomentR,
    ExpectedLoss,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianOracle<T> {
    mu: T,
    sigma_n: T,
    n: usize,
}

/// Analytic verdicts on each fast-rate condition for this problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionVerdicts<T> {
    /// Largest `η` for which the central condition holds, both for `W_ERM` and for
    /// every fixed `w`: `1/(2σ_N²)`.
    pub central_eta_max: T,
    pub central_holds_for_erm: bool,
    pub central_holds_for_all_w: bool,
    /// `(β, B) = (1, 7σ_N²)`.
    pub bernstein_beta: T,
    pub bernstein_b: T,
    pub bernstein_holds_for_erm: bool,
    pub bernstein_holds_for_all_w: bool,
    pub witness_holds_for_erm: bool,
    pub witness_holds_for_all_w: bool,
    /// `σ'² = 4σ_N⁴/n`.
    pub subgaussian_r_sigma_sq: T,
    pub subgaussian_holds_for_erm: bool,
    pub subgaussian_holds_for_all_w: bool,
    /// The loss CGF bound `σ_W⁴η²` is established for `η ≤ 0` only.
    pub loss_cgf_positive_side_verified: bool,
}

impl<T: Real> GaussianOracle<T> {
    pub fn new(mu: T, sigma_n: T, n: usize) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", mu.as_f64(), "must be finite"));
        }
        if !(sigma_n >= T::zero() && sigma_n.is_finite()) {
            return Err(invalid(
                "sigma_n",
                sigma_n.as_f64(),
                "must be finite and nonnegative",
            ));
        }
        if n < 2 {
            return Err(Error::InsufficientData {
                what: "sample size",
                needed: 2,
                got: n,
            });
        }
        Ok(Self { mu, sigma_n, n })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma_n(&self) -> T {
        self.sigma_n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn nf(&self) -> T {
        T::from_usize_lossy(self.n)
    }

    fn var(&self) -> T {
        self.sigma_n * self.sigma_n
    }

    pub fn quantity(&self, which: OracleQuantity) -> T {
        match which {
            OracleQuantity::GenError => self.gen_error(),
            OracleQuantity::ExcessRisk => self.excess_risk(),
            OracleQuantity::EmpiricalExcess => self.empirical_excess(),
            OracleQuantity::Mi => self.mi(),
            OracleQuantity::SecondMomentR => self.second_moment_r(),
            OracleQuantity::ExpectedLoss => self.expected_loss(),
        }
    }

    /// `2σ_N²/n`.
    pub fn gen_error(&self) -> T {
        T::lit(2.0) * self.var() / self.nf()
    }

    /// `σ_N²/n`.
    pub fn excess_risk(&self) -> T {
        self.var() / self.nf()
    }

    /// `−σ_N²/n`.
    pub fn empirical_excess(&self) -> T {
        -self.var() / self.nf()
    }

    /// `I(W; Z_i) = ½ ln(n/(n−1))`, independent of `σ_N`.
    pub fn mi(&self) -> T {
        let n = self.nf();
        T::lit(0.5) * (n / (n - T::one())).ln()
    }

    /// `E[r²] = 3σ_N⁴/n² + 4σ_N⁴/n` under the product coupling.
    pub fn second_moment_r(&self) -> T {
        let s4 = self.var() * self.var();
        let n = self.nf();
        T::lit(3.0) * s4 / (n * n) + T::lit(4.0) * s4 / n
    }

    /// `E[ℓ(W, Z)] = (n+1)σ_N²/n` for fresh `Z`; also the variance `σ_W²` of `W − Z`.
    pub fn expected_loss(&self) -> T {
        let n = self.nf();
        (n + T::one()) * self.var() / n
    }

    /// Sub-Gaussian parameter `σ² = 2σ_W⁴` of the loss.
    pub fn loss_subgaussian_sigma_sq(&self) -> T {
        let sw2 = self.expected_loss();
        T::lit(2.0) * sw2 * sw2
    }

    /// Sub-Gaussian parameter `σ'² = 4σ_N⁴/n` of the excess loss.
    pub fn excess_subgaussian_sigma_sq(&self) -> T {
        T::lit(4.0) * self.var() * self.var() / self.nf()
    }

    fn mgf_arg(&self, eta: T, sign: Sign) -> T {
        let s2 = self.var();
        T::lit(4.0) * eta * eta * s2 * s2 + sign.factor::<T>() * T::lit(2.0) * eta * s2
    }

    /// Positive edge of the MGF validity region.
    pub fn mgf_boundary(&self, sign: Sign) -> T {
        let s2 = self.var();
        if s2 == T::zero() {
            return T::infinity();
        }
        let root = (T::one() + T::lit(4.0) * self.nf()).sqrt();
        match sign {
            Sign::Plus => (root - T::one()) / (T::lit(4.0) * s2),
            Sign::Minus => (root + T::one()) / (T::lit(4.0) * s2),
        }
    }

    /// `E[e^{±ηr}] = √(n / (n − (4η²σ_N⁴ ± 2ησ_N²)))` under the product coupling.
    pub fn mgf_r(&self, eta: T, sign: Sign) -> Result<T> {
        let n = self.nf();
        let denom = n - self.mgf_arg(eta, sign);
        if !(denom > T::zero()) {
            return Err(Error::Domain {
                what: "Gaussian excess-loss MGF",
                boundary: self.mgf_boundary(sign).as_f64(),
            });
        }
        Ok((n / denom).sqrt())
    }

    /// `log E[e^{±ηr}]`.
    pub fn log_mgf_r(&self, eta: T, sign: Sign) -> Result<T> {
        let n = self.nf();
        let denom = n - self.mgf_arg(eta, sign);
        if !(denom > T::zero()) {
            return Err(Error::Domain {
                what: "Gaussian excess-loss MGF",
                boundary: self.mgf_boundary(sign).as_f64(),
            });
        }
        Ok(-T::lit(0.5) * (-self.mgf_arg(eta, sign) / n).ln_1p())
    }

    /// `E_Z[e^{±ηr(w, Z)}] = exp((2η²σ_N² ± η)(w − μ)²)` for a fixed hypothesis.
    pub fn per_w_mgf(&self, w: T, eta: T, sign: Sign) -> T {
        let d = w - self.mu;
        ((T::lit(2.0) * eta * eta * self.var() + sign.factor::<T>() * eta) * d * d).exp()
    }

    /// Large-`n` form `log E[e^{−ηr}] ≈ (2η²σ_N⁴ − ησ_N²)/n`.
    pub fn asymptotic_log_mgf_minus(&self, eta: T) -> T {
        let s2 = self.var();
        (T::lit(2.0) * eta * eta * s2 * s2 - eta * s2) / self.nf()
    }

    /// Large-`n` form `log E[e^{ηr}] ≈ (2η²σ_N⁴ + ησ_N²)/n`.
    pub fn asymptotic_log_mgf_plus(&self, eta: T) -> T {
        let s2 = self.var();
        (T::lit(2.0) * eta * eta * s2 * s2 + eta * s2) / self.nf()
    }

    /// `c = 1 − 2ησ_N²`, the central-condition coefficient of the large-`n` CGF.
    pub fn asymptotic_central_c(&self, eta: T) -> T {
        T::one() - T::lit(2.0) * eta * self.var()
    }

    /// Largest `c` with `log E[e^{−ηr}] ≤ −cη E[r]` under the exact MGF.
    pub fn exact_central_c(&self, eta: T) -> Result<T> {
        let lam = self.log_mgf_r(eta, Sign::Minus)?;
        let excess = self.excess_risk();
        if excess == T::zero() || eta == T::zero() {
            return Err(Error::Degenerate("zero excess risk or zero eta".into()));
        }
        Ok(-lam / (eta * excess))
    }

    pub fn verdicts(&self) -> ConditionVerdicts<T> {
        let s2 = self.var();
        ConditionVerdicts {
            central_eta_max: if s2 == T::zero() {
                T::infinity()
            } else {
                T::one() / (T::lit(2.0) * s2)
            },
            central_holds_for_erm: true,
            central_holds_for_all_w: true,
            bernstein_beta: T::one(),
            bernstein_b: T::lit(7.0) * s2,
            bernstein_holds_for_erm: true,
            bernstein_holds_for_all_w: false,
            witness_holds_for_erm: true,
            witness_holds_for_all_w: false,
            subgaussian_r_sigma_sq: self.excess_subgaussian_sigma_sq(),
            subgaussian_holds_for_erm: true,
            subgaussian_holds_for_all_w: false,
            loss_cgf_positive_side_verified: false,
        }
    }

    /// Slow-rate bound with oracle ingredients:
    /// `σ_N² √(2 (n+1)²/n² · ln(n/(n−1)))`.
    pub fn thm1_closed_form(&self) -> T {
        let n = self.nf();
        let ratio = (n + T::one()) / n;
        self.var() * (T::lit(2.0) * ratio * ratio * (n / (n - T::one())).ln()).sqrt()
    }

    /// Sub-Gaussian excess-loss bound with oracle ingredients:
    /// `σ_N² √((4/n) ln(n/(n−1)))`.
    pub fn thm2_closed_form(&self) -> T {
        let n = self.nf();
        self.var() * (T::lit(4.0) / n * (n / (n - T::one())).ln()).sqrt()
    }

    /// `3σ_N²/n`, the fast-rate value at `η = 1/(4σ_N²)`, `c = ½` (leading order).
    pub fn fast_rate_value(&self) -> T {
        T::lit(3.0) * self.var() / self.nf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(n: usize) -> GaussianOracle<f64> {
        GaussianOracle::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn table_values_at_n_100() {
        let o = unit(100);
        assert!((o.gen_error() - 0.02).abs() < 1e-15);
        assert!((o.excess_risk() - 0.01).abs() < 1e-15);
        assert!((o.empirical_excess() + 0.01).abs() < 1e-15);
        assert!((o.second_moment_r() - 0.0403).abs() < 1e-15);
        assert!((o.expected_loss() - 1.01).abs() < 1e-15);
        assert!((o.mi() - 0.005025167926750725).abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let o = GaussianOracle::<f32>::new(0.0, 1.0, 100).unwrap();
        assert!((o.gen_error() - 0.02).abs() < 1e-7);
        assert!((o.mgf_r(0.25, Sign::Minus).unwrap() - 0.998_752).abs() < 1e-5);
    }

    #[test]
    fn identity_between_risks() {
        for n in [2, 7, 100, 1600] {
            let o = GaussianOracle::new(0.3, 1.7, n).unwrap();
            assert_relative_eq!(
                o.gen_error(),
                o.excess_risk() - o.empirical_excess(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn degenerate_noise() {
        let o = GaussianOracle::new(1.0, 0.0, 10).unwrap();
        for q in [
            OracleQuantity::GenError,
            OracleQuantity::ExcessRisk,
            OracleQuantity::EmpiricalExcess,
            OracleQuantity::SecondMomentR,
            OracleQuantity::ExpectedLoss,
        ] {
            assert_eq!(o.quantity(q), 0.0);
        }
        assert!((o.quantity(OracleQuantity::Mi) - 0.5 * (10.0f64 / 9.0).ln()).abs() < 1e-15);
        assert_eq!(o.mgf_r(100.0, Sign::Plus).unwrap(), 1.0);
    }

    #[test]
    fn mgf_values() {
        let o = unit(100);
        assert_eq!(o.mgf_r(0.0, Sign::Plus).unwrap(), 1.0);
        assert_eq!(o.mgf_r(0.0, Sign::Minus).unwrap(), 1.0);
        let v = o.mgf_r(0.25, Sign::Minus).unwrap();
        assert!((v - (100.0f64 / 100.25).sqrt()).abs() < 1e-15);
        assert!((v - 0.99875).abs() < 1e-5);
        assert!((o.log_mgf_r(0.25, Sign::Minus).unwrap() - v.ln()).abs() < 1e-15);
    }

    #[test]
    fn mgf_domain_boundary() {
        let o = unit(100);
        let b = o.mgf_boundary(Sign::Plus);
        assert!(o.mgf_r(b * 0.999, Sign::Plus).is_ok());
        match o.mgf_r(b * 1.001, Sign::Plus) {
            Err(Error::Domain { boundary, .. }) => assert!((boundary - b).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        // The denominator vanishes exactly at the boundary.
        let s = 4.0 * b * b + 2.0 * b;
        assert!((s - 100.0).abs() < 1e-9);
        let bm = o.mgf_boundary(Sign::Minus);
        assert!((4.0 * bm * bm - 2.0 * bm - 100.0).abs() < 1e-9);
    }

    #[test]
    fn per_w_mgf_values() {
        let o = unit(10);
        assert_eq!(o.per_w_mgf(0.0, 3.0, Sign::Plus), 1.0);
        assert!((o.per_w_mgf(1.0, 0.5, Sign::Plus) - std::f64::consts::E).abs() < 1e-15);
        for w in [-3.0, 0.5, 10.0] {
            assert!((o.per_w_mgf(w, 0.5, Sign::Minus) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn central_condition_region() {
        // Leading order: log E[e^{−ηr}] = −cη E[r] with c = 1 − 2ησ_N² exactly.
        let o = unit(200);
        for k in 1..50 {
            let eta = 0.5 * k as f64 / 50.0;
            let c = o.asymptotic_central_c(eta);
            let lhs = o.asymptotic_log_mgf_minus(eta);
            assert!(lhs <= -c * eta * o.excess_risk() + 1e-15);
            // The exact coefficient falls short of the asymptotic one by O(1/n).
            let exact = o.exact_central_c(eta).unwrap();
            assert!(
                exact <= c && c - exact < 2.0 * c * c * eta / 200.0 + 1e-15,
                "{eta}"
            );
        }
        assert_eq!(o.verdicts().central_eta_max, 0.5);
    }

    #[test]
    fn asymptotic_plus_side() {
        let n = 100_000;
        let o = unit(n);
        for eta in [0.1, 0.5, 1.0] {
            let nf = n as f64;
            let lhs = nf * (o.log_mgf_r(eta, Sign::Plus).unwrap() - eta * o.excess_risk());
            assert!((lhs / (2.0 * eta * eta) - 1.0).abs() < 0.01, "{eta}: {lhs}");
        }
    }

    #[test]
    fn verdicts() {
        let v = unit(100).verdicts();
        assert!(!v.bernstein_holds_for_all_w);
        assert!((v.subgaussian_r_sigma_sq - 0.04).abs() < 1e-15);
        assert_eq!(v.bernstein_b, 7.0);
        assert!(!v.loss_cgf_positive_side_verified);
    }

    #[test]
    fn closed_form_bounds() {
        let o = unit(100);
        let direct = (2.0 * 2.0 * 1.01f64.powi(2) * o.mi()).sqrt();
        assert!((o.thm1_closed_form() - direct).abs() < 1e-15);
        assert!((o.thm1_closed_form() - 0.143195).abs() < 1e-6);
        let direct2 = (2.0 * 0.04 * o.mi()).sqrt();
        assert!((o.thm2_closed_form() - direct2).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_n() {
        assert!(GaussianOracle::<f64>::new(0.0, 1.0, 1).is_err());
        assert!(GaussianOracle::<f64>::new(0.0, -1.0, 5).is_err());
    }
}
