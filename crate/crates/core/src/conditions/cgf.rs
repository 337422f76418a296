use super::{ConditionCertificate, ConditionKind, ConditionParams, MIN_SAMPLES};
use crate::error::invalid;
use crate::stats::{mean, population_std};
use crate::{Error, Real, Result};

/// Which tail of `r` a one-sided fit looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSide {
    /// `log E[e^{−η(r − E r)}]`, the lower tail.
    Lower,
    /// `log E[e^{η(r − E r)}]`, the upper tail.
    Upper,
}

/// Empirical CGF of the excess loss on a grid of positive `η`.
///
/// A grid point is admissible when the exponential weights are not dominated by a
/// handful of samples: the nine largest weights hold less than 90% of the total and
/// the Kish effective sample size is at least `m/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CgfProfile<T> {
    pub eta_grid: Vec<T>,
    /// `Λ̂(η) = log (1/m) Σ e^{−η r_j}`.
    pub lambda_vals: Vec<T>,
    /// `log (1/m) Σ e^{η r_j}`.
    pub lambda_plus: Vec<T>,
    /// Centered lower-tail CGF `log (1/m) Σ e^{−η(r_j − r̄)}`.
    pub centered_lower: Vec<T>,
    /// Centered upper-tail CGF `log (1/m) Σ e^{η(r_j − r̄)}`.
    pub centered_upper: Vec<T>,
    /// Delta-method standard errors of `lambda_vals`.
    pub se_minus: Vec<T>,
    pub se_plus: Vec<T>,
    pub admissible_minus: Vec<bool>,
    pub admissible_plus: Vec<bool>,
    pub mean_r: T,
    pub std_r: T,
    pub m: usize,
}

struct Side<T> {
    log_mean: T,
    se: T,
    admissible: bool,
}

const TOP_WEIGHTS: usize = 9;
const TOP_SHARE: f64 = 0.9;
const MIN_ESS_FRACTION: f64 = 0.5;

/// `log (1/m) Σ e^{s·η·x_j}` by log-sum-exp, with its standard error and the
/// weight-concentration guard.
fn log_mean_exp<T: Real>(xs: &[T], eta: T, sign: T, weights: &mut Vec<T>) -> Side<T> {
    let m = T::from_usize_lossy(xs.len());
    let max = xs
        .iter()
        .map(|&x| sign * eta * x)
        .fold(T::neg_infinity(), T::max);
    weights.clear();
    weights.extend(xs.iter().map(|&x| (sign * eta * x - max).exp()));
    let (s, q) = weights
        .iter()
        .fold((T::zero(), T::zero()), |(s, q), &w| (s + w, q + w * w));
    let mean_w = s / m;
    let var_w = ((q - s * s / m) / (m - T::one())).max(T::zero());
    let se = (var_w / m).sqrt() / mean_w;
    let ess = s * s / q;
    let k = TOP_WEIGHTS.min(weights.len());
    let top = if k == weights.len() {
        s
    } else {
        let at = weights.len() - k;
        weights.select_nth_unstable_by(at, |a, b| a.partial_cmp(b).expect("finite weights"));
        weights[at..].iter().fold(T::zero(), |a, &w| a + w)
    };
    Side {
        log_mean: max + mean_w.ln(),
        se,
        admissible: top < T::lit(TOP_SHARE) * s && ess >= T::lit(MIN_ESS_FRACTION) * m,
    }
}

/// 40 log-spaced points over `[10⁻³, 10] / std(r)`; unit scale when `std(r) = 0`.
pub fn default_eta_grid<T: Real>(product_r: &[T]) -> Vec<T> {
    let std = population_std(product_r).unwrap_or(T::zero());
    let scale = if std > T::zero() && std.is_finite() {
        std
    } else {
        T::one()
    };
    let (lo, hi) = (T::lit(1e-3).ln(), T::lit(10.0).ln());
    let count = 40;
    (0..count)
        .map(|i| {
            let t = T::from_usize_lossy(i) / T::from_usize_lossy(count - 1);
            (lo + (hi - lo) * t).exp() / scale
        })
        .collect()
}

pub fn estimate_cgf<T: Real>(product_r: &[T], eta_grid: &[T]) -> Result<CgfProfile<T>> {
    let m = product_r.len();
    if m < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            what: "excess-loss samples",
            needed: MIN_SAMPLES,
            got: m,
        });
    }
    if product_r.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("excess loss"));
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
    let mean_r = mean(product_r).expect("non-empty");
    let std_r = population_std(product_r).expect("non-empty");
    let centered: Vec<T> = product_r.iter().map(|&r| r - mean_r).collect();

    let g = eta_grid.len();
    let mut p = CgfProfile {
        eta_grid: eta_grid.to_vec(),
        lambda_vals: Vec::with_capacity(g),
        lambda_plus: Vec::with_capacity(g),
        centered_lower: Vec::with_capacity(g),
        centered_upper: Vec::with_capacity(g),
        se_minus: Vec::with_capacity(g),
        se_plus: Vec::with_capacity(g),
        admissible_minus: Vec::with_capacity(g),
        admissible_plus: Vec::with_capacity(g),
        mean_r,
        std_r,
        m,
    };
    let mut buf = Vec::with_capacity(m);
    for &eta in eta_grid {
        let lo = log_mean_exp(product_r, eta, -T::one(), &mut buf);
        let hi = log_mean_exp(product_r, eta, T::one(), &mut buf);
        p.lambda_vals.push(lo.log_mean);
        p.se_minus.push(lo.se);
        p.admissible_minus.push(lo.admissible);
        p.lambda_plus.push(hi.log_mean);
        p.se_plus.push(hi.se);
        p.admissible_plus.push(hi.admissible);
        p.centered_lower
            .push(log_mean_exp(&centered, eta, -T::one(), &mut buf).log_mean);
        p.centered_upper
            .push(log_mean_exp(&centered, eta, T::one(), &mut buf).log_mean);
    }
    Ok(p)
}

impl<T: Real> CgfProfile<T> {
    /// Grid indices admissible on the lower tail.
    fn admissible(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.eta_grid.len()).filter(|&i| self.admissible_minus[i])
    }
}

/// `σ² = max_η 2 Λ̂_centered(η)/η²` over admissible grid points.
///
/// One-sided fits use the lower tail, where the CGF bound of the excess loss is
/// established analytically for the Gaussian problem; `two_sided` also scans the
/// upper tail.
pub fn fit_subgaussian<T: Real>(
    profile: &CgfProfile<T>,
    two_sided: bool,
) -> Result<ConditionCertificate<T>> {
    if profile.eta_grid.is_empty() {
        return Err(Error::Empty("eta grid"));
    }
    let mut best: Option<(T, T)> = None;
    let mut consider = |eta: T, lam: T| {
        let v = (T::lit(2.0) * lam / (eta * eta)).max(T::zero());
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, eta));
        }
    };
    for i in 0..profile.eta_grid.len() {
        let eta = profile.eta_grid[i];
        if profile.admissible_minus[i] {
            consider(eta, profile.centered_lower[i]);
        }
        if two_sided && profile.admissible_plus[i] {
            consider(eta, profile.centered_upper[i]);
        }
    }
    let (sigma_sq, eta, feasible) = match best {
        Some((v, eta)) => (v, eta, true),
        None => (T::infinity(), profile.eta_grid[0], false),
    };
    Ok(ConditionCertificate {
        kind: ConditionKind::Subgaussian,
        params: ConditionParams::Subgaussian {
            sigma_sq,
            eta,
            two_sided,
        },
        feasible,
        margin: if feasible {
            T::zero()
        } else {
            T::neg_infinity()
        },
        m: profile.m,
        seed: None,
    })
}

/// How [`fit_central_condition`] chooses among feasible grid points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CentralSelection<T> {
    /// Minimize `((1−c)/c) R̂ + Σ I / (cηn)`.
    Tightest {
        mi_sum: T,
        n: usize,
        empirical_excess: T,
    },
    /// Maximize `c·η`, which minimizes the MI term for any MI value.
    LargestProduct,
}

/// `(η, c(η))` with `c(η) = −Λ̂(η)/(η E[r])` clipped to `(0, 1]`; `None` where the
/// grid point is inadmissible or `c(η) ≤ 0`.
pub fn central_c_curve<T: Real>(profile: &CgfProfile<T>) -> Vec<(T, Option<T>)> {
    profile
        .eta_grid
        .iter()
        .enumerate()
        .map(|(i, &eta)| {
            let raw = -profile.lambda_vals[i] / (eta * profile.mean_r);
            let ok = profile.admissible_minus[i] && raw > T::zero() && profile.mean_r > T::zero();
            (eta, ok.then(|| raw.min(T::one())))
        })
        .collect()
}

/// Fits the `(η, c)`-central condition `Λ̂(η) ≤ −cη E[r]`.
pub fn fit_central_condition<T: Real>(
    profile: &CgfProfile<T>,
    selection: CentralSelection<T>,
) -> Result<ConditionCertificate<T>> {
    if !(profile.mean_r > T::zero()) {
        return Err(Error::Degenerate(format!(
            "expected excess loss {} is not positive",
            profile.mean_r
        )));
    }
    if profile.eta_grid.is_empty() {
        return Err(Error::Empty("eta grid"));
    }
    let mut best: Option<(T, usize, T)> = None;
    for i in profile.admissible() {
        let eta = profile.eta_grid[i];
        let raw = -profile.lambda_vals[i] / (eta * profile.mean_r);
        if !(raw > T::zero()) {
            continue;
        }
        let c = raw.min(T::one());
        let score = match selection {
            CentralSelection::Tightest {
                mi_sum,
                n,
                empirical_excess,
            } => {
                (T::one() - c) / c * empirical_excess + mi_sum / (c * eta * T::from_usize_lossy(n))
            }
            CentralSelection::LargestProduct => -(c * eta),
        };
        if best.is_none_or(|(s, _, _)| score < s) {
            best = Some((score, i, c));
        }
    }
    Ok(match best {
        Some((_, i, c)) => {
            let eta = profile.eta_grid[i];
            let raw = -profile.lambda_vals[i] / (eta * profile.mean_r);
            ConditionCertificate {
                kind: ConditionKind::EtaCCentral,
                params: ConditionParams::EtaC { eta, c },
                feasible: true,
                // −Λ̂ − cη E[r], written so clipping can only increase it.
                margin: (raw - c) * eta * profile.mean_r,
                m: profile.m,
                seed: None,
            }
        }
        None => {
            let margin = (0..profile.eta_grid.len())
                .map(|i| -profile.lambda_vals[i])
                .fold(T::neg_infinity(), T::max);
            ConditionCertificate {
                kind: ConditionKind::EtaCCentral,
                params: ConditionParams::EtaC {
                    eta: profile.eta_grid[0],
                    c: T::zero(),
                },
                feasible: false,
                margin,
                m: profile.m,
                seed: None,
            }
        }
    })
}

/// Plain `η`-central condition `Λ̂(η) ≤ 0`, at the largest admissible grid point
/// satisfying it.
pub fn check_central_plain<T: Real>(profile: &CgfProfile<T>) -> Result<ConditionCertificate<T>> {
    if profile.eta_grid.is_empty() {
        return Err(Error::Empty("eta grid"));
    }
    let found = profile
        .admissible()
        .filter(|&i| profile.lambda_vals[i] <= T::zero())
        .max_by(|&a, &b| {
            profile.eta_grid[a]
                .partial_cmp(&profile.eta_grid[b])
                .expect("finite grid")
        });
    Ok(match found {
        Some(i) => ConditionCertificate {
            kind: ConditionKind::CentralPlain,
            params: ConditionParams::CentralPlain {
                eta: profile.eta_grid[i],
            },
            feasible: true,
            margin: -profile.lambda_vals[i],
            m: profile.m,
            seed: None,
        },
        None => ConditionCertificate {
            kind: ConditionKind::CentralPlain,
            params: ConditionParams::CentralPlain {
                eta: profile.eta_grid[0],
            },
            feasible: false,
            margin: -profile.lambda_vals[0],
            m: profile.m,
            seed: None,
        },
    })
}

/// Largest admissible grid `η` with `Λ̂(η) ≤ ηε`.
fn v_hat<T: Real>(profile: &CgfProfile<T>, eps: T) -> Option<(T, T)> {
    profile
        .admissible()
        .filter_map(|i| {
            let eta = profile.eta_grid[i];
            let slack = eta * eps - profile.lambda_vals[i];
            (slack >= T::zero()).then_some((eta, slack))
        })
        .max_by(|a, b| a.0.partial_cmp(&b.0).expect("finite grid"))
}

/// `v`-central condition: for each `ε` in the schedule, the largest `η = v̂(ε)` with
/// `log E[e^{−η r}] ≤ ηε`.
pub fn fit_v_central<T: Real>(
    profile: &CgfProfile<T>,
    eps_schedule: &[T],
) -> Result<ConditionCertificate<T>> {
    if eps_schedule.is_empty() {
        return Err(Error::Empty("epsilon schedule"));
    }
    if let Some(&bad) = eps_schedule
        .iter()
        .find(|&&e| !(e >= T::zero() && e.is_finite()))
    {
        return Err(invalid(
            "epsilon",
            bad.as_f64(),
            "must be finite and nonnegative",
        ));
    }
    let mut schedule = Vec::with_capacity(eps_schedule.len());
    let mut margin = T::infinity();
    let mut feasible = true;
    for &eps in eps_schedule {
        match v_hat(profile, eps) {
            Some((eta, slack)) => {
                schedule.push((eps, eta));
                margin = margin.min(slack);
            }
            None => {
                schedule.push((eps, T::zero()));
                feasible = false;
            }
        }
    }
    if !feasible {
        margin = T::neg_infinity();
    }
    Ok(ConditionCertificate {
        kind: ConditionKind::VCCentral,
        params: ConditionParams::VCentral { schedule },
        feasible,
        margin,
        m: profile.m,
        seed: None,
    })
}

/// Largest `β` in `betas` with `v̂(ε*) ≥ ε*^{1−β}` at `ε* = Ī^{1/(2−β)}`, where `Ī`
/// is the mean per-index MI. This is the point where the intermediate-rate bound
/// evaluates its optimized `ε`.
pub fn select_beta<T: Real>(profile: &CgfProfile<T>, mi_mean: T, betas: &[T]) -> Option<T> {
    let mi_mean = mi_mean.max(T::zero());
    let mut sorted = betas.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite betas"));
    sorted.into_iter().find(|&beta| {
        if !(beta >= T::zero() && beta <= T::one()) {
            return false;
        }
        let eps = mi_mean.powf(T::one() / (T::lit(2.0) - beta));
        let need = if beta == T::one() {
            T::one()
        } else {
            eps.powf(T::one() - beta)
        };
        v_hat(profile, eps).is_some_and(|(eta, _)| eta >= need)
    })
}

/// Largest `c` for which the `(v, c)`-central condition holds at `ε* = Ī^{1/(2−β)}`
/// and `η = v(ε*) = ε*^{1−β}`, i.e. `Λ̂(η) ≤ −cη r̄ + ηε*`.
///
/// `Λ̂(η)/η` is nondecreasing, so the smallest admissible grid point at or above
/// `ε*^{1−β}` gives the largest certified `c`. `None` if no grid point reaches it or
/// `r̄ ≤ 0`.
pub fn intermediate_c<T: Real>(profile: &CgfProfile<T>, mi_mean: T, beta: T) -> Option<T> {
    if !(beta >= T::zero() && beta <= T::one()) || !(profile.mean_r > T::zero()) {
        return None;
    }
    let eps = mi_mean.max(T::zero()).powf(T::one() / (T::lit(2.0) - beta));
    let need = if beta == T::one() {
        T::one()
    } else {
        eps.powf(T::one() - beta)
    };
    profile
        .admissible()
        .filter(|&i| profile.eta_grid[i] >= need && profile.eta_grid[i] > T::zero())
        .min_by(|&a, &b| {
            profile.eta_grid[a]
                .partial_cmp(&profile.eta_grid[b])
                .expect("finite grid")
        })
        .map(|i| {
            let eta = profile.eta_grid[i];
            (eps - profile.lambda_vals[i] / eta) / profile.mean_r
        })
}
