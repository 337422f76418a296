//! `analyze`: risk estimates, MI, fitted conditions and bounds for every sweep point.

use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use infobound::bounds::{
    bound_rerm, bound_thm1, bound_thm2, bound_thm3, bound_thm5, bound_thm7, BoundKind,
};
use infobound::conditions::{
    default_eta_grid, estimate_cgf, fit_central_condition, fit_subgaussian, intermediate_c,
    CentralSelection, ConditionParams,
};
use infobound::mi::{estimate_mi_profile, MiProfile, MiSettings};
use infobound::montecarlo::ReplicateSet;
use infobound::problems::Regularizer;
use infobound::risk::{estimate_risks, RiskEstimates};
use infobound::{BoundReport, ConditionCertificate, Ingredients};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ProblemSpec};
use crate::sweep::{dump_path, pool, read_manifest, MANIFEST};

pub const RESULTS: &str = "results.csv";
pub const CERTIFICATES: &str = "certificates.txt";

/// `β` candidates for the intermediate-rate bound, tried from fastest to slowest.
const BETAS: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.0];
/// Keeps `c` strictly below 1 where the bound needs an open interval.
const C_CAP: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug)]
pub struct AnalysisRow {
    pub n: usize,
    pub risks: RiskEstimates,
    pub mi: MiProfile,
    /// Sub-Gaussian parameter of the excess loss, one-sided lower tail.
    pub sigma_fit: f64,
    /// Sub-Gaussian parameter of the loss itself (used by the slow-rate bound).
    pub sigma_loss: f64,
    pub eta_fit: f64,
    pub c_fit: f64,
    pub bounds: Vec<BoundReport>,
    pub certificates: Vec<ConditionCertificate>,
}

impl AnalysisRow {
    pub fn bound(&self, kind: BoundKind) -> Option<&BoundReport> {
        self.bounds.iter().find(|b| b.kind == kind)
    }
}

/// Placeholder report for a bound whose ingredients could not be fitted.
fn unavailable(kind: BoundKind, mi: &[f64], note: &str) -> BoundReport {
    BoundReport {
        kind,
        gen_bound: f64::INFINITY,
        excess_bound: None,
        ingredients: Ingredients {
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
        },
        valid: false,
        validity_notes: note.to_string(),
    }
}

fn sigma_of(cert: &ConditionCertificate) -> Option<f64> {
    match cert.params {
        ConditionParams::Subgaussian { sigma_sq, .. } if cert.feasible => Some(sigma_sq.sqrt()),
        _ => None,
    }
}

/// Empirical excess risk of the regularized objective,
/// `R̂(W) + (λ/n)(g(W) − g(w*))` averaged over replicates.
fn regularized_empirical_excess(rs: &ReplicateSet, empirical: f64, lambda: f64) -> f64 {
    let g = Regularizer::SquaredNorm;
    let g_star = g.value(rs.w_star());
    let mean_diff = (0..rs.m())
        .map(|j| g.value(rs.hypothesis(j)) - g_star)
        .sum::<f64>()
        / rs.m() as f64;
    empirical + lambda / rs.n() as f64 * mean_diff
}

pub fn analyze_set(rs: &ReplicateSet, cfg: &ExperimentConfig) -> Result<AnalysisRow> {
    let n = rs.n();
    let risks = estimate_risks(rs)?;
    let mi = estimate_mi_profile(
        rs,
        &MiSettings {
            k: cfg.mi_k,
            jitter: cfg.mi_jitter,
            seed: rs.seed(),
            max_indices: cfg.mi_max_indices,
        },
    )?;
    let mi_vec = mi.per_index(n);
    let emp = risks.empirical_excess;

    let r = rs.product_r();
    let profile = estimate_cgf(r, &default_eta_grid(r))?;
    let sg = fit_subgaussian(&profile, false)?.with_seed(rs.seed());
    let loss = rs.product_loss();
    let loss_sg =
        fit_subgaussian(&estimate_cgf(loss, &default_eta_grid(loss))?, false)?.with_seed(rs.seed());

    let rerm = match &cfg.problem {
        ProblemSpec::Rerm {
            lambda,
            reg_range_bound,
            ..
        } => Some((*lambda, *reg_range_bound)),
        _ => None,
    };
    let emp_fit = match rerm {
        Some((lambda, _)) => regularized_empirical_excess(rs, emp, lambda),
        None => emp,
    };
    let central = fit_central_condition(
        &profile,
        CentralSelection::Tightest {
            mi_sum: mi.sum,
            n,
            empirical_excess: emp_fit,
        },
    )
    .ok()
    .map(|c| c.with_seed(rs.seed()));
    let (eta_fit, c_fit) = match &central {
        Some(cert) if cert.feasible => match cert.params {
            ConditionParams::EtaC { eta, c } => (eta, c),
            _ => unreachable!("central fit returns (eta, c)"),
        },
        _ => (f64::NAN, f64::NAN),
    };

    let sigma_fit = sigma_of(&sg).unwrap_or(f64::NAN);
    let sigma_loss = sigma_of(&loss_sg).unwrap_or(f64::NAN);
    let central_ok = eta_fit.is_finite();
    let central_record = central.as_ref().map(|c| c.to_record()).unwrap_or_default();

    let mut bounds = Vec::with_capacity(cfg.bounds.len());
    for &kind in &cfg.bounds {
        let report = match kind {
            BoundKind::Thm1Slow => match sigma_of(&loss_sg) {
                Some(s) => bound_thm1(s, &mi_vec)?.with_certificate(loss_sg.to_record()),
                None => unavailable(kind, &mi_vec, "loss sub-Gaussian fit infeasible"),
            },
            BoundKind::Thm2ExcessSg => match sigma_of(&sg) {
                Some(s) => bound_thm2(s, &mi_vec, emp)?.with_certificate(sg.to_record()),
                None => unavailable(kind, &mi_vec, "excess-loss sub-Gaussian fit infeasible"),
            },
            BoundKind::Thm3FastSg => match sigma_of(&sg) {
                Some(s) if s > 0.0 && profile.mean_r > 0.0 => {
                    // a_η = 1/2.
                    let eta = profile.mean_r / (s * s);
                    bound_thm3(s, profile.mean_r, &mi_vec, emp, eta)?
                        .with_certificate(sg.to_record())
                }
                _ => unavailable(kind, &mi_vec, "needs sigma_r > 0 and E[r] > 0"),
            },
            BoundKind::Thm5EtaC => {
                if central_ok {
                    bound_thm5(c_fit, eta_fit, &mi_vec, emp)?
                        .with_certificate(central_record.clone())
                } else {
                    unavailable(kind, &mi_vec, "central condition infeasible")
                }
            }
            BoundKind::Thm7Intermediate => {
                let mut best: Option<BoundReport> = None;
                for beta in BETAS {
                    let Some(c) =
                        intermediate_c(&profile, mi.mean_raw.max(0.0), beta).filter(|&c| c > 0.0)
                    else {
                        continue;
                    };
                    let rep = bound_thm7(c.min(C_CAP), beta, &mi_vec, emp)?
                        .with_certificate(format!("v-central beta={beta} c={}", c.min(C_CAP)));
                    if best.as_ref().is_none_or(|b| rep.gen_bound < b.gen_bound) {
                        best = Some(rep);
                    }
                }
                best.unwrap_or_else(|| {
                    unavailable(kind, &mi_vec, "no (v, c)-central pair certified")
                })
            }
            BoundKind::RermLemma => {
                let (lambda, b) = rerm.context("rerm bound without a regularized problem")?;
                if central_ok {
                    let report = bound_rerm(c_fit, eta_fit, &mi_vec, emp_fit, lambda, b)?
                        .with_certificate(central_record.clone());
                    let g = Regularizer::SquaredNorm;
                    let values = (0..rs.m())
                        .map(|j| g.value(rs.hypothesis(j)))
                        .chain(std::iter::once(g.value(rs.w_star())));
                    let (lo, hi) = values
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                            (lo.min(v), hi.max(v))
                        });
                    if hi - lo > b {
                        report.invalidate("observed regularizer range exceeds reg_range_bound")
                    } else {
                        report
                    }
                } else {
                    unavailable(kind, &mi_vec, "central condition infeasible")
                }
            }
        };
        bounds.push(screen(report, &mi, emp));
    }

    let mut certificates = vec![sg, loss_sg];
    certificates.extend(central);
    Ok(AnalysisRow {
        n,
        risks,
        mi,
        sigma_fit,
        sigma_loss,
        eta_fit,
        c_fit,
        bounds,
        certificates,
    })
}

/// Invalidates reports whose ingredients cannot support them: an MI estimate within
/// noise of zero, or an implied excess-risk bound below zero, which no hypothesis can
/// attain since `w*` minimizes the population risk.
fn screen(report: BoundReport, mi: &MiProfile, emp: f64) -> BoundReport {
    if !report.valid {
        return report;
    }
    let report = if mi.resolved() {
        report
    } else {
        report.invalidate("MI estimate within two standard errors of zero")
    };
    let excess = report.excess_bound.unwrap_or(report.gen_bound + emp);
    if excess < 0.0 {
        report.invalidate("implied excess-risk bound is negative")
    } else {
        report
    }
}

/// Loads every dump listed in the manifest and analyzes it.
pub fn analyze(cfg: &ExperimentConfig) -> Result<Vec<AnalysisRow>> {
    let manifest = read_manifest(&cfg.out_dir.join(MANIFEST))?;
    let paths = cfg
        .n_values
        .iter()
        .map(|&n| dump_path(&cfg.out_dir, &manifest, n))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Result<AnalysisRow>> = pool(cfg.workers)?.install(|| {
        paths
            .par_iter()
            .map(|path| {
                let rs = ReplicateSet::open(path)
                    .with_context(|| format!("loading {}", path.display()))?;
                analyze_set(&rs, cfg).with_context(|| format!("analyzing {}", path.display()))
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    write_results(&cfg.out_dir.join(RESULTS), &rows, &cfg.bounds)?;
    write_certificates(&cfg.out_dir.join(CERTIFICATES), &rows)?;
    Ok(rows)
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn header(bounds: &[BoundKind]) -> Vec<String> {
    let mut h: Vec<String> = [
        "n",
        "gen_error",
        "gen_se",
        "excess_risk",
        "empirical_excess",
        "mi_sum",
        "sigma_fit",
        "eta_fit",
        "c_fit",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(bounds.iter().map(|b| format!("bound_{b}")));
    h.extend(bounds.iter().map(|b| format!("valid_{b}")));
    h.extend(
        bounds
            .iter()
            .filter(|b| has_excess_bound(**b))
            .map(|b| format!("excess_bound_{b}")),
    );
    h
}

fn has_excess_bound(kind: BoundKind) -> bool {
    matches!(
        kind,
        BoundKind::Thm2ExcessSg
            | BoundKind::Thm3FastSg
            | BoundKind::Thm5EtaC
            | BoundKind::RermLemma
    )
}

pub fn record(row: &AnalysisRow, bounds: &[BoundKind]) -> Vec<String> {
    let mut rec = vec![
        row.n.to_string(),
        num(row.risks.gen_error),
        num(row.risks.std_errors.gen_error),
        num(row.risks.excess_risk),
        num(row.risks.empirical_excess),
        num(row.mi.sum),
        num(row.sigma_fit),
        num(row.eta_fit),
        num(row.c_fit),
    ];
    let report = |k: BoundKind| row.bound(k).expect("row holds every configured bound");
    rec.extend(bounds.iter().map(|&k| num(report(k).gen_bound)));
    rec.extend(bounds.iter().map(|&k| report(k).valid.to_string()));
    rec.extend(
        bounds
            .iter()
            .filter(|b| has_excess_bound(**b))
            .map(|&k| num(report(k).excess_bound.unwrap_or(f64::INFINITY))),
    );
    rec
}

pub fn write_results(path: &Path, rows: &[AnalysisRow], bounds: &[BoundKind]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header(bounds))?;
    for row in rows {
        w.write_record(record(row, bounds))?;
    }
    w.flush()?;
    Ok(())
}

fn write_certificates(path: &Path, rows: &[AnalysisRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?,
    );
    for row in rows {
        for cert in &row.certificates {
            writeln!(f, "n={};{}", row.n, cert.to_record())?;
        }
        for b in &row.bounds {
            if !b.valid {
                writeln!(
                    f,
                    "n={};bound={};invalid={}",
                    row.n, b.kind, b.validity_notes
                )?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use infobound::bounds::bound_thm5;
    use infobound::montecarlo::{run_replicates, ReplicateOptions};
    use infobound::problems::GaussianMeanProblem;

    fn profile(mean_raw: f64, se: f64) -> MiProfile {
        MiProfile {
            indices: vec![0],
            estimates: Vec::new(),
            mean_raw,
            se,
            sum: 10.0 * mean_raw.max(0.0),
        }
    }

    #[test]
    fn screen_flags_unresolved_mi() {
        let b = bound_thm5(0.5, 0.25, &[0.01; 10], -0.01).unwrap();
        assert!(screen(b.clone(), &profile(0.01, 0.001), -0.01).valid);
        let flagged = screen(b, &profile(0.01, 0.006), -0.01);
        assert!(!flagged.valid && flagged.validity_notes.contains("two standard errors"));
    }

    #[test]
    fn screen_flags_negative_excess_bound() {
        // Too little MI for the empirical term: the implied excess bound is negative.
        let b = bound_thm5(0.1, 0.25, &[1e-4; 10], -0.05).unwrap();
        assert!(b.excess_bound.unwrap() < 0.0);
        let flagged = screen(b, &profile(1e-4, 1e-6), -0.05);
        assert!(!flagged.valid && flagged.validity_notes.contains("negative"));
    }

    #[test]
    fn gaussian_row_has_every_configured_bound() {
        let cfg = ExperimentConfig::from_toml(
            "[problem]\nname = \"gaussian\"\n[sweep]\nn_values = [10]\nm = 4000\nseed = 5\n",
        )
        .unwrap();
        let p = GaussianMeanProblem::new(0.0, 1.0).unwrap();
        let rs = run_replicates(&p, 10, 4000, 5, &ReplicateOptions::default()).unwrap();
        let row = analyze_set(&rs, &cfg).unwrap();
        assert_eq!(row.bounds.len(), cfg.bounds.len());
        assert!(row.mi.resolved(), "{} ± {}", row.mi.mean_raw, row.mi.se);
        let gen = row.risks.gen_error;
        for b in row.bounds.iter().filter(|b| b.valid) {
            assert!(
                b.gen_bound >= gen - 3.0 * row.risks.std_errors.gen_error,
                "{:?}",
                b.kind
            );
        }
        let t7 = row.bound(BoundKind::Thm7Intermediate).unwrap();
        assert!(t7.valid, "{}", t7.validity_notes);
    }

    #[test]
    fn rerm_gen_bound_uses_regularized_empirical_excess() {
        let cfg = ExperimentConfig::from_toml(
            "[problem]\nname = \"rerm\"\nlambda = 0.5\n[sweep]\nn_values = [10]\nm = 2000\n",
        )
        .unwrap();
        let crate::sweep::Problem::RermGaussian(p) =
            crate::sweep::Problem::build(&cfg.problem).unwrap()
        else {
            unreachable!()
        };
        let rs = run_replicates(&p, 10, 2000, 0, &ReplicateOptions::default()).unwrap();
        let row = analyze_set(&rs, &cfg).unwrap();
        let r = row.bound(BoundKind::RermLemma).unwrap();
        assert!(r.gen_bound.is_finite(), "{}", r.validity_notes);
        let emp_reg = regularized_empirical_excess(&rs, row.risks.empirical_excess, 0.5);
        assert!((r.excess_bound.unwrap() - r.gen_bound - emp_reg).abs() < 1e-12);
    }
}
