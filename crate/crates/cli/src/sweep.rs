//! `simulate`: one replicate dump per sweep point plus a manifest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use infobound::montecarlo::{run_replicates, ReplicateOptions, ReplicateSet};
use infobound::problems::{GaussianMeanProblem, LogisticProblem, RegularizedProblem, RermConfig};
use infobound::risk::LearningProblem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ProblemSpec};

pub const MANIFEST: &str = "manifest.csv";

/// Concrete problem built from a [`ProblemSpec`].
pub enum Problem {
    Gaussian(GaussianMeanProblem),
    Logistic(LogisticProblem),
    RermGaussian(RegularizedProblem<GaussianMeanProblem>),
    RermLogistic(RegularizedProblem<LogisticProblem>),
}

fn logistic(spec: &ProblemSpec) -> Result<LogisticProblem> {
    let ProblemSpec::Logistic {
        w_gen,
        radius,
        gd_steps,
        gd_rate,
        optimum_pool,
        optimum_seed,
    } = *spec
    else {
        unreachable!("caller matched a logistic spec");
    };
    let p = LogisticProblem::new(w_gen, radius, gd_steps, gd_rate)?;
    p.with_resolved_optimum(optimum_pool, optimum_seed)
        .context("resolving the population optimum")
}

impl Problem {
    /// Builds the problem. For logistic regression this resolves `w*` numerically.
    pub fn build(spec: &ProblemSpec) -> Result<Self> {
        Ok(match spec {
            ProblemSpec::Gaussian { mu, sigma_n } => {
                Problem::Gaussian(GaussianMeanProblem::new(*mu, *sigma_n)?)
            }
            ProblemSpec::Logistic { .. } => Problem::Logistic(logistic(spec)?),
            ProblemSpec::Rerm {
                base,
                lambda,
                reg_range_bound,
            } => {
                let cfg = RermConfig::new(
                    *lambda,
                    infobound::problems::Regularizer::SquaredNorm,
                    *reg_range_bound,
                )?;
                match base.as_ref() {
                    ProblemSpec::Gaussian { mu, sigma_n } => Problem::RermGaussian(
                        RegularizedProblem::new(GaussianMeanProblem::new(*mu, *sigma_n)?, cfg),
                    ),
                    b @ ProblemSpec::Logistic { .. } => {
                        Problem::RermLogistic(RegularizedProblem::new(logistic(b)?, cfg))
                    }
                    ProblemSpec::Rerm { .. } => bail!("nested regularized problems"),
                }
            }
        })
    }

    pub fn id(&self) -> String {
        match self {
            Problem::Gaussian(p) => p.id(),
            Problem::Logistic(p) => p.id(),
            Problem::RermGaussian(p) => p.id(),
            Problem::RermLogistic(p) => p.id(),
        }
    }

    pub fn replicates(&self, n: usize, m: usize, seed: u64) -> infobound::Result<ReplicateSet> {
        let opts = ReplicateOptions::default();
        match self {
            Problem::Gaussian(p) => run_replicates(p, n, m, seed, &opts),
            Problem::Logistic(p) => run_replicates(p, n, m, seed, &opts),
            Problem::RermGaussian(p) => run_replicates(p, n, m, seed, &opts),
            Problem::RermLogistic(p) => run_replicates(p, n, m, seed, &opts),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub n: usize,
    /// Retained replicates.
    pub m: usize,
    pub seed: u64,
    pub file: String,
    pub failed: usize,
    pub nonconverged: usize,
    pub problem: String,
}

pub fn dump_name(n: usize) -> String {
    format!("replicates_n{n}.bin")
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building the sweep thread pool")
}

/// Runs every sweep point and writes its dump and the manifest into `cfg.out_dir`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<ManifestRow>> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating output directory {}", cfg.out_dir.display()))?;
    let problem = Problem::build(&cfg.problem)?;
    let rows: Vec<Result<ManifestRow>> = pool(cfg.workers)?.install(|| {
        cfg.n_values
            .par_iter()
            .enumerate()
            .map(|(idx, &n)| {
                let seed = cfg.point_seed(idx);
                let rs = problem.replicates(n, cfg.m, seed)?;
                if rs.m() < 2 {
                    bail!("n = {n}: only {} replicates succeeded", rs.m());
                }
                let file = dump_name(n);
                let path = cfg.out_dir.join(&file);
                rs.save(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
                Ok(ManifestRow {
                    n,
                    m: rs.m(),
                    seed,
                    file,
                    failed: rs.failed().len(),
                    nonconverged: rs.nonconverged(),
                    problem: rs.problem_id().to_string(),
                })
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    write_manifest(&cfg.out_dir.join(MANIFEST), &rows)?;
    Ok(rows)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<ManifestRow>, _>>()
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(rows)
}

/// Dump path for `n`, as recorded in the manifest.
pub fn dump_path(dir: &Path, manifest: &[ManifestRow], n: usize) -> Result<PathBuf> {
    let row = manifest
        .iter()
        .find(|r| r.n == n)
        .with_context(|| format!("no dump listed for n = {n}"))?;
    let path = dir.join(&row.file);
    if !path.exists() {
        bail!("missing dump {}", path.display());
    }
    Ok(path)
}
