//! Experiment configuration: one TOML table per section (`problem`, `sweep`, `mi`,
//! `bounds`, `output`).

use std::fmt;
use std::path::{Path, PathBuf};

use infobound::bounds::BoundKind;
use serde::Deserialize;

/// Replicate count used by `--fast`.
pub const FAST_M: usize = 2000;

/// A configuration problem. The binary maps it to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Gaussian {
        mu: f64,
        sigma_n: f64,
    },
    Logistic {
        w_gen: [f64; 2],
        radius: f64,
        gd_steps: usize,
        gd_rate: f64,
        /// Pool size for the numerically resolved population optimum.
        optimum_pool: usize,
        optimum_seed: u64,
    },
    /// Squared-norm regularized ERM on top of a base problem.
    Rerm {
        base: Box<ProblemSpec>,
        lambda: f64,
        reg_range_bound: f64,
    },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Gaussian { .. } => "gaussian",
            ProblemSpec::Logistic { .. } => "logistic",
            ProblemSpec::Rerm { .. } => "rerm",
        }
    }

    pub fn default_bounds(&self) -> Vec<BoundKind> {
        let mut out = vec![
            BoundKind::Thm1Slow,
            BoundKind::Thm2ExcessSg,
            BoundKind::Thm3FastSg,
            BoundKind::Thm5EtaC,
            BoundKind::Thm7Intermediate,
        ];
        if matches!(self, ProblemSpec::Rerm { .. }) {
            out.push(BoundKind::RermLemma);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub n_values: Vec<usize>,
    pub m: usize,
    pub seed: u64,
    /// Sweep points run concurrently. Each point already spreads its replicates
    /// over all cores, so the default is 1; 0 means one per core.
    pub workers: usize,
    pub mi_k: usize,
    pub mi_jitter: f64,
    pub mi_max_indices: usize,
    pub bounds: Vec<BoundKind>,
    pub out_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    sweep: RawSweep,
    #[serde(default)]
    mi: RawMi,
    #[serde(default)]
    bounds: RawBounds,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    name: String,
    mu: Option<f64>,
    sigma_n: Option<f64>,
    w_gen: Option<[f64; 2]>,
    radius: Option<f64>,
    gd_steps: Option<usize>,
    gd_rate: Option<f64>,
    optimum_pool: Option<usize>,
    optimum_seed: Option<u64>,
    base: Option<String>,
    lambda: Option<f64>,
    reg_range_bound: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_values: Vec<usize>,
    #[serde(default = "default_m")]
    m: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_workers")]
    workers: usize,
}

fn default_workers() -> usize {
    1
}

fn default_m() -> usize {
    10_000
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMi {
    #[serde(default = "default_k")]
    k: usize,
    #[serde(default = "default_jitter")]
    jitter: f64,
    #[serde(default = "default_max_indices")]
    max_indices: usize,
}

fn default_k() -> usize {
    3
}

fn default_jitter() -> f64 {
    1e-10
}

/// Every sample index.
fn default_max_indices() -> usize {
    usize::MAX
}

impl Default for RawMi {
    fn default() -> Self {
        Self {
            k: default_k(),
            jitter: default_jitter(),
            max_indices: default_max_indices(),
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    list: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_dir")]
    dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        err(format!("{name} must be positive and finite, got {v}"))
    }
}

fn base_problem(name: &str, p: &RawProblem) -> Result<ProblemSpec, ConfigError> {
    match name {
        "gaussian" => {
            let sigma_n = p.sigma_n.unwrap_or(1.0);
            if !(sigma_n >= 0.0 && sigma_n.is_finite()) {
                return err(format!(
                    "sigma_n must be finite and nonnegative, got {sigma_n}"
                ));
            }
            let mu = p.mu.unwrap_or(0.0);
            if !mu.is_finite() {
                return err("mu must be finite");
            }
            Ok(ProblemSpec::Gaussian { mu, sigma_n })
        }
        "logistic" => {
            let w_gen = p.w_gen.unwrap_or([0.5, 0.5]);
            if w_gen.iter().any(|v| !v.is_finite()) {
                return err("w_gen must be finite");
            }
            let gd_steps = p.gd_steps.unwrap_or(500);
            if gd_steps == 0 {
                return err("gd_steps must be at least 1");
            }
            let optimum_pool = p.optimum_pool.unwrap_or(1_000_000);
            if optimum_pool < 1000 {
                return err(format!(
                    "optimum_pool must be at least 1000, got {optimum_pool}"
                ));
            }
            Ok(ProblemSpec::Logistic {
                w_gen,
                radius: positive("radius", p.radius.unwrap_or(3.0))?,
                gd_steps,
                gd_rate: positive("gd_rate", p.gd_rate.unwrap_or(0.5))?,
                optimum_pool,
                optimum_seed: p.optimum_seed.unwrap_or(0),
            })
        }
        other => err(format!("unknown problem '{other}'")),
    }
}

fn problem(p: &RawProblem) -> Result<ProblemSpec, ConfigError> {
    if p.name != "rerm" {
        if p.base.is_some() || p.lambda.is_some() || p.reg_range_bound.is_some() {
            return err("base, lambda and reg_range_bound only apply to name = \"rerm\"");
        }
        return base_problem(&p.name, p);
    }
    let base_name = p.base.as_deref().unwrap_or("gaussian");
    if base_name == "rerm" {
        return err("rerm base must be gaussian or logistic");
    }
    let base = base_problem(base_name, p)?;
    let lambda = p.lambda.unwrap_or(1.0);
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return err(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        ));
    }
    // Squared norm on the radius ball has range radius².
    let radius = p.radius.unwrap_or(3.0);
    let reg_range_bound = positive(
        "reg_range_bound",
        p.reg_range_bound.unwrap_or(radius * radius),
    )?;
    Ok(ProblemSpec::Rerm {
        base: Box::new(base),
        lambda,
        reg_range_bound,
    })
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        let problem = problem(&raw.problem)?;

        let n_values = raw.sweep.n_values;
        if n_values.is_empty() {
            return err("sweep.n_values is empty");
        }
        if let Some(&n) = n_values.iter().find(|&&n| n < 2) {
            return err(format!("every n must be at least 2, got {n}"));
        }
        if n_values.windows(2).any(|w| w[0] >= w[1]) {
            return err("sweep.n_values must be strictly increasing");
        }
        if raw.sweep.m < 2 {
            return err(format!(
                "insufficient data: m = {} replicates, need at least 2",
                raw.sweep.m
            ));
        }

        if raw.mi.k == 0 {
            return err("mi.k must be at least 1");
        }
        if !(raw.mi.jitter >= 0.0 && raw.mi.jitter.is_finite()) {
            return err("mi.jitter must be finite and nonnegative");
        }
        if raw.mi.max_indices == 0 {
            return err("mi.max_indices must be at least 1");
        }

        let bounds = match raw.bounds.list {
            None => problem.default_bounds(),
            Some(names) => {
                let mut out = Vec::with_capacity(names.len());
                for name in &names {
                    let kind = BoundKind::from_short_name(name)
                        .ok_or_else(|| ConfigError(format!("unknown bound '{name}'")))?;
                    if kind == BoundKind::RermLemma && !matches!(problem, ProblemSpec::Rerm { .. })
                    {
                        return err("bound 'rerm' needs problem name = \"rerm\"");
                    }
                    if out.contains(&kind) {
                        return err(format!("bound '{name}' listed twice"));
                    }
                    out.push(kind);
                }
                out
            }
        };

        Ok(Self {
            problem,
            n_values,
            m: raw.sweep.m,
            seed: raw.sweep.seed,
            workers: raw.sweep.workers,
            mi_k: raw.mi.k,
            mi_jitter: raw.mi.jitter,
            mi_max_indices: raw.mi.max_indices,
            bounds,
            out_dir: raw.output.dir,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Gaussian problem over the default sweep.
    pub fn gaussian_default() -> Self {
        Self::from_toml(
            "[problem]\nname = \"gaussian\"\n[sweep]\nn_values = [200, 400, 800, 1600]\n",
        )
        .expect("valid default config")
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>, fast: bool) -> Self {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(out) = out {
            self.out_dir = out;
        }
        if fast {
            self.m = FAST_M;
        }
        self
    }

    /// Seed of the `idx`-th sweep point.
    pub fn point_seed(&self, idx: usize) -> u64 {
        self.seed.wrapping_add(idx as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::gaussian_default();
        assert_eq!(
            c.problem,
            ProblemSpec::Gaussian {
                mu: 0.0,
                sigma_n: 1.0
            }
        );
        assert_eq!(c.m, 10_000);
        assert_eq!(c.mi_k, 3);
        assert_eq!(c.mi_jitter, 1e-10);
        assert_eq!(c.bounds.len(), 5);
        assert_eq!(c.out_dir, PathBuf::from("out"));
    }

    #[test]
    fn full_logistic_config() {
        let c = ExperimentConfig::from_toml(
            r#"
            [problem]
            name = "logistic"
            w_gen = [0.5, 0.5]
            radius = 3.0
            gd_steps = 400
            gd_rate = 0.25
            optimum_pool = 5000
            [sweep]
            n_values = [200, 400]
            m = 100
            seed = 9
            workers = 2
            [mi]
            k = 4
            jitter = 0.0
            max_indices = 16
            [bounds]
            list = ["thm5", "thm1"]
            [output]
            dir = "results"
            "#,
        )
        .unwrap();
        assert!(matches!(
            c.problem,
            ProblemSpec::Logistic { gd_steps: 400, .. }
        ));
        assert_eq!(c.bounds, vec![BoundKind::Thm5EtaC, BoundKind::Thm1Slow]);
        assert_eq!((c.m, c.seed, c.workers, c.mi_k), (100, 9, 2, 4));
    }

    #[test]
    fn rerm_defaults_range_bound_to_radius_squared() {
        let c = ExperimentConfig::from_toml(
            "[problem]\nname = \"rerm\"\nlambda = 2.0\n[sweep]\nn_values = [10]\n",
        )
        .unwrap();
        match c.problem {
            ProblemSpec::Rerm {
                base,
                lambda,
                reg_range_bound,
            } => {
                assert_eq!(
                    *base,
                    ProblemSpec::Gaussian {
                        mu: 0.0,
                        sigma_n: 1.0
                    }
                );
                assert_eq!((lambda, reg_range_bound), (2.0, 9.0));
            }
            other => panic!("{other:?}"),
        }
        assert!(c.bounds.contains(&BoundKind::RermLemma));
    }

    #[test]
    fn invalid_sweeps_are_rejected() {
        let bad = [
            "n_values = []",
            "n_values = [1, 5]",
            "n_values = [200, 200]",
            "n_values = [400, 200]",
            "n_values = [100]\nm = 1",
        ];
        for sweep in bad {
            let text = format!("[problem]\nname = \"gaussian\"\n[sweep]\n{sweep}\n");
            assert!(ExperimentConfig::from_toml(&text).is_err(), "{sweep}");
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        for text in [
            "[problem]\nname = \"svm\"\n[sweep]\nn_values = [10]\n",
            "[problem]\nname = \"gaussian\"\n[sweep]\nn_values = [10]\n[bounds]\nlist = [\"thm9\"]\n",
            "[problem]\nname = \"gaussian\"\n[sweep]\nn_values = [10]\n[bounds]\nlist = [\"rerm\"]\n",
            "[problem]\nname = \"gaussian\"\nlambda = 1.0\n[sweep]\nn_values = [10]\n",
            "[problem]\nname = \"gaussian\"\ncolour = 1\n[sweep]\nn_values = [10]\n",
            "[problem]\nname = \"gaussian\"\n[sweep]\nn_values = [10]\n[mi]\nk = 0\n",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn empty_bound_list_is_allowed() {
        let c = ExperimentConfig::from_toml(
            "[problem]\nname = \"gaussian\"\n[sweep]\nn_values = [10]\n[bounds]\nlist = []\n",
        )
        .unwrap();
        assert!(c.bounds.is_empty());
    }

    #[test]
    fn overrides() {
        let c = ExperimentConfig::gaussian_default().with_overrides(
            Some(5),
            Some(PathBuf::from("x")),
            true,
        );
        assert_eq!((c.seed, c.m), (5, FAST_M));
        assert_eq!(c.out_dir, PathBuf::from("x"));
        assert_eq!(c.point_seed(2), 7);
    }
}
