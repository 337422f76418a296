//! Empirical cumulant generating functions of the excess loss and the fast-rate
//! conditions fitted from them: sub-Gaussian, `(η, c)`-central, plain `η`-central,
//! `v`-central, Bernstein, witness, and the expected Bernstein inequality.
//!
//! All inputs are excess losses `r` under the product coupling `P_W ⊗ μ`.

mod cgf;
mod moments;

pub use cgf::{
    central_c_curve, check_central_plain, default_eta_grid, estimate_cgf, fit_central_condition,
    fit_subgaussian, fit_v_central, intermediate_c, select_beta, CentralSelection, CgfProfile,
    TailSide,
};
pub use moments::{
    bernstein_eta_limits, central_witness_to_eta_c, check_bernstein, check_witness,
    expected_bernstein_check, kappa, BernsteinLimits, BernsteinProfile, ExpectedBernsteinReport,
    ExpectedBernsteinRow,
};

use std::fmt::Write as _;

use crate::Real;

/// Minimum number of samples accepted by the estimators in this module.
pub const MIN_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConditionKind {
    Subgaussian,
    EtaCCentral,
    Bernstein,
    Witness,
    CentralPlain,
    VCCentral,
}

impl ConditionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConditionKind::Subgaussian => "subgaussian",
            ConditionKind::EtaCCentral => "eta_c_central",
            ConditionKind::Bernstein => "bernstein",
            ConditionKind::Witness => "witness",
            ConditionKind::CentralPlain => "central_plain",
            ConditionKind::VCCentral => "v_c_central",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConditionParams<T> {
    Subgaussian {
        sigma_sq: T,
        /// Grid point attaining the maximum.
        eta: T,
        two_sided: bool,
    },
    EtaC {
        eta: T,
        c: T,
    },
    Bernstein {
        beta: T,
        b: T,
        /// `−min r`, an empirical lower bound on the excess loss.
        lower: T,
    },
    Witness {
        u: T,
        c: T,
    },
    CentralPlain {
        eta: T,
    },
    VCentral {
        /// `(ε, v̂(ε))` pairs; `v̂(ε)` is the largest admissible grid `η` with
        /// `Λ̂(η) ≤ ηε`.
        schedule: Vec<(T, T)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCertificate<T> {
    pub kind: ConditionKind,
    pub params: ConditionParams<T>,
    pub feasible: bool,
    /// Slack in the defining inequality at the reported parameters.
    pub margin: T,
    pub m: usize,
    pub seed: Option<u64>,
}

impl<T: Real> ConditionCertificate<T> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Single-line `key=value` record separated by `;`.
    pub fn to_record(&self) -> String {
        let mut s = format!("kind={}", self.kind.name());
        match &self.params {
            ConditionParams::Subgaussian {
                sigma_sq,
                eta,
                two_sided,
            } => {
                let _ = write!(s, ";sigma_sq={sigma_sq};eta={eta};two_sided={two_sided}");
            }
            ConditionParams::EtaC { eta, c } => {
                let _ = write!(s, ";eta={eta};c={c}");
            }
            ConditionParams::Bernstein { beta, b, lower } => {
                let _ = write!(s, ";beta={beta};B={b};lower={lower}");
            }
            ConditionParams::Witness { u, c } => {
                let _ = write!(s, ";u={u};c={c}");
            }
            ConditionParams::CentralPlain { eta } => {
                let _ = write!(s, ";eta={eta}");
            }
            ConditionParams::VCentral { schedule } => {
                let pairs: Vec<String> = schedule.iter().map(|(e, v)| format!("{e}:{v}")).collect();
                let _ = write!(s, ";schedule={}", pairs.join(","));
            }
        }
        let _ = write!(
            s,
            ";feasible={};margin={};m={}",
            self.feasible, self.margin, self.m
        );
        match self.seed {
            Some(seed) => {
                let _ = write!(s, ";seed={seed}");
            }
            None => s.push_str(";seed=none"),
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_format() {
        let c = ConditionCertificate {
            kind: ConditionKind::EtaCCentral,
            params: ConditionParams::EtaC { eta: 0.25, c: 0.5 },
            feasible: true,
            margin: 0.0,
            m: 1000,
            seed: None,
        }
        .with_seed(7);
        assert_eq!(
            c.to_record(),
            "kind=eta_c_central;eta=0.25;c=0.5;feasible=true;margin=0;m=1000;seed=7"
        );
    }
}
