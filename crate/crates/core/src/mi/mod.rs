//! Mutual-information estimators for `I(W; Z_i)`.
//!
//! * [`ksg_mi`]: Kraskov–Stögbauer–Grassberger estimator (variant 1) for two
//!   continuous variables.
//! * [`mixed_cd_mi`]: continuous/discrete kNN estimator.
//! * [`chain_mi`]: `I(W; X, Y) = I(W; Y) + Σ_y p̂(y) I(W; X | Y = y)`.
//! * [`analytic_gaussian_mi`]: exact value for Gaussian mean estimation.
//!
//! All values are in nats. Inputs are jittered by a seeded uniform perturbation of
//! relative size `jitter` (per-coordinate range) so duplicated samples never produce a
//! zero neighbour distance.

mod knn;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::digamma;

use crate::montecarlo::{hypothesis_data_pairs, ReplicateSet};
use crate::stats::mean_se;
use crate::{Error, Real, Result};
use knn::SweepIndex;

/// `len` points of dimension `dim`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Points {
    data: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition(
                "point dimension must be positive".into(),
            ));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Precondition(format!(
                "{} values do not split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    /// One-dimensional points.
    pub fn scalar(values: Vec<f64>) -> Self {
        Self {
            data: values,
            dim: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn coordinate_range(&self, d: usize) -> f64 {
        let (lo, hi) = (0..self.len())
            .map(|i| self.row(i)[d])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    /// Side-by-side concatenation `(self_i, other_i)`.
    fn concat(&self, other: &Points) -> Points {
        let dim = self.dim + other.dim;
        let mut data = Vec::with_capacity(self.len() * dim);
        for i in 0..self.len() {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Points { data, dim }
    }

    fn select(&self, rows: &[usize]) -> Points {
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Points {
            data,
            dim: self.dim,
        }
    }

    fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    /// Adds `U(−1, 1) · scale · range_d` to coordinate `d`; constant coordinates use
    /// `max(|value|, 1)` in place of the range.
    fn jittered(&self, scale: f64, rng: &mut ChaCha8Rng) -> Points {
        if scale == 0.0 {
            return self.clone();
        }
        let ranges: Vec<f64> = (0..self.dim).map(|d| self.coordinate_range(d)).collect();
        let mut data = self.data.clone();
        for (c, v) in data.iter_mut().enumerate() {
            let r = ranges[c % self.dim];
            let width = if r > 0.0 { r } else { v.abs().max(1.0) };
            *v += scale * width * rng.random_range(-1.0..1.0);
        }
        Points {
            data,
            dim: self.dim,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MiEstimator {
    Ksg,
    MixedCd,
    Chain,
    Analytic,
}

impl MiEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            MiEstimator::Ksg => "ksg",
            MiEstimator::MixedCd => "mixed_cd",
            MiEstimator::Chain => "chain",
            MiEstimator::Analytic => "analytic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiEstimate {
    /// `max(raw, 0)`.
    pub value: f64,
    pub raw: f64,
    pub estimator: MiEstimator,
    pub k: usize,
    pub m: usize,
    pub jitter_scale: f64,
    /// Fraction of samples that contributed (below 1 when small label classes are
    /// skipped).
    pub coverage: f64,
    pub warnings: Vec<String>,
}

impl MiEstimate {
    fn new(raw: f64, estimator: MiEstimator, k: usize, m: usize, jitter: f64) -> Self {
        Self {
            value: raw.max(0.0),
            raw,
            estimator,
            k,
            m,
            jitter_scale: jitter,
            coverage: 1.0,
            warnings: Vec::new(),
        }
    }
}

/// Estimation settings. Defaults: `k = 3`, jitter `1e-10`, seed 0, every sample index.
/// The per-index signal is `O(1/n)` while the noise of a single estimate is not, so
/// capping `max_indices` trades accuracy for time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiSettings {
    pub k: usize,
    pub jitter: f64,
    pub seed: u64,
    pub max_indices: usize,
}

impl Default for MiSettings {
    fn default() -> Self {
        Self {
            k: 3,
            jitter: 1e-10,
            seed: 0,
            max_indices: usize::MAX,
        }
    }
}

fn jitter_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if m < k + 2 {
        return Err(Error::InsufficientData {
            what: "samples",
            needed: k + 2,
            got: m,
        });
    }
    Ok(())
}

fn check_jitter(jitter: f64) -> Result<()> {
    if jitter >= 0.0 && jitter.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "jitter",
            value: jitter,
            reason: "must be finite and nonnegative",
        })
    }
}

/// KSG on already-jittered inputs.
fn ksg_raw(x: &Points, y: &Points, k: usize) -> Result<f64> {
    let m = x.len();
    let joint = x.concat(y);
    let (ij, ix, iy) = (
        SweepIndex::new(&joint),
        SweepIndex::new(x),
        SweepIndex::new(y),
    );
    let per_point: Vec<Result<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let eps = ij.kth_distance(i, k);
            if eps <= 0.0 {
                return Err(Error::Degenerate(
                    "zero k-th neighbour distance after jitter".into(),
                ));
            }
            let nx = ix.count_within(i, eps);
            let ny = iy.count_within(i, eps);
            Ok(digamma((nx + 1) as f64) + digamma((ny + 1) as f64))
        })
        .collect();
    let mut acc = 0.0;
    for v in per_point {
        acc += v?;
    }
    Ok(digamma(k as f64) + digamma(m as f64) - acc / m as f64)
}

/// KSG variant-1 estimate of `I(X; Y)`.
pub fn ksg_mi(x: &Points, y: &Points, k: usize, jitter: f64, seed: u64) -> Result<MiEstimate> {
    if x.len() != y.len() {
        return Err(Error::Precondition(format!(
            "sample lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    check_k(k, x.len())?;
    check_jitter(jitter)?;
    x.check_finite("x")?;
    y.check_finite("y")?;
    let xj = x.jittered(jitter, &mut jitter_rng(seed, 0));
    let yj = y.jittered(jitter, &mut jitter_rng(seed, 1));
    let raw = ksg_raw(&xj, &yj, k)?;
    Ok(MiEstimate::new(raw, MiEstimator::Ksg, k, x.len(), jitter))
}

fn class_members(labels: &[u32]) -> Vec<(u32, Vec<usize>)> {
    let mut classes: Vec<(u32, Vec<usize>)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match classes.iter_mut().find(|(c, _)| *c == l) {
            Some((_, v)) => v.push(i),
            None => classes.push((l, vec![i])),
        }
    }
    classes.sort_by_key(|(c, _)| *c);
    classes
}

/// Mixed estimate on already-jittered inputs.
fn mixed_raw(x: &Points, labels: &[u32], k: usize) -> Result<MiEstimate> {
    let m = x.len();
    let classes = class_members(labels);
    let mut est = MiEstimate::new(0.0, MiEstimator::MixedCd, k, m, 0.0);
    if classes.len() <= 1 {
        // A constant label carries no information.
        return Ok(est);
    }
    let full = SweepIndex::new(x);
    let mut acc = 0.0;
    let mut used = 0usize;
    for (label, members) in &classes {
        if members.len() <= k {
            est.warnings.push(format!(
                "label {label}: {} samples, need more than k = {k}; skipped",
                members.len()
            ));
            continue;
        }
        let sub = x.select(members);
        let idx = SweepIndex::new(&sub);
        let psi_class = digamma(members.len() as f64);
        let terms: Vec<Result<f64>> = (0..members.len())
            .into_par_iter()
            .map(|a| {
                let eps = idx.kth_distance(a, k);
                if eps <= 0.0 {
                    return Err(Error::Degenerate(
                        "zero k-th neighbour distance after jitter".into(),
                    ));
                }
                let nx = full.count_within(members[a], eps);
                Ok(psi_class + digamma((nx + 1) as f64))
            })
            .collect();
        for t in terms {
            acc += t?;
        }
        used += members.len();
    }
    if used == 0 {
        return Err(Error::InsufficientData {
            what: "samples per label class",
            needed: k + 1,
            got: classes.iter().map(|(_, v)| v.len()).max().unwrap_or(0),
        });
    }
    est.raw = digamma(m as f64) + digamma(k as f64) - acc / used as f64;
    est.value = est.raw.max(0.0);
    est.coverage = used as f64 / m as f64;
    Ok(est)
}

/// Estimate of `I(X; Y)` for continuous `X` and discrete `Y`. Label classes with at
/// most `k` members are skipped with a warning.
pub fn mixed_cd_mi(
    x: &Points,
    labels: &[u32],
    k: usize,
    jitter: f64,
    seed: u64,
) -> Result<MiEstimate> {
    if x.len() != labels.len() {
        return Err(Error::Precondition(format!(
            "sample lengths differ ({} vs {})",
            x.len(),
            labels.len()
        )));
    }
    check_k(k, x.len())?;
    check_jitter(jitter)?;
    x.check_finite("x")?;
    let xj = x.jittered(jitter, &mut jitter_rng(seed, 0));
    let mut est = mixed_raw(&xj, labels, k)?;
    est.jitter_scale = jitter;
    Ok(est)
}

/// `I(W; X, Y)` via the chain rule over the label `Y`.
///
/// `W` and `X` are jittered exactly as in [`ksg_mi`] with the same seed, so a constant
/// label reproduces `ksg_mi(w, x)` bit for bit.
pub fn chain_mi(
    w: &Points,
    x: &Points,
    labels: &[u32],
    k: usize,
    jitter: f64,
    seed: u64,
) -> Result<MiEstimate> {
    let m = w.len();
    if x.len() != m || labels.len() != m {
        return Err(Error::Precondition(format!(
            "sample lengths differ ({m}, {}, {})",
            x.len(),
            labels.len()
        )));
    }
    check_k(k, m)?;
    check_jitter(jitter)?;
    w.check_finite("w")?;
    x.check_finite("x")?;
    let wj = w.jittered(jitter, &mut jitter_rng(seed, 0));
    let xj = x.jittered(jitter, &mut jitter_rng(seed, 1));

    let label_term = mixed_raw(&wj, labels, k)?;
    let mut raw = label_term.raw;
    let mut warnings = label_term.warnings;
    let mut used = 0usize;
    for (label, members) in class_members(labels) {
        if members.len() < k + 2 {
            warnings.push(format!(
                "label {label}: {} samples, too few for the conditional term; skipped",
                members.len()
            ));
            continue;
        }
        let p = members.len() as f64 / m as f64;
        let slice = ksg_raw(&wj.select(&members), &xj.select(&members), k)?;
        raw += p * slice;
        used += members.len();
    }
    let mut est = MiEstimate::new(raw, MiEstimator::Chain, k, m, jitter);
    est.coverage = used as f64 / m as f64;
    est.warnings = warnings;
    Ok(est)
}

/// `I(W; Z_i) = ½ ln(n / (n − 1))` for Gaussian mean estimation with ERM.
pub fn analytic_gaussian_mi<T: Real>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "sample size",
            needed: 2,
            got: n,
        });
    }
    let n = T::from_usize_lossy(n);
    Ok(T::lit(0.5) * (n / (n - T::one())).ln())
}

/// Per-index MI estimates over a replicate set.
#[derive(Clone, Debug, PartialEq)]
pub struct MiProfile {
    pub indices: Vec<usize>,
    pub estimates: Vec<MiEstimate>,
    /// Mean of the raw per-index estimates.
    pub mean_raw: f64,
    /// Standard error of `mean_raw` from the spread across indices; infinite with a
    /// single index. Indices share the hypotheses, so this understates the error.
    pub se: f64,
    /// `n · max(mean_raw, 0)`, the estimate of `Σ_i I(W; Z_i)`.
    pub sum: f64,
}

impl MiProfile {
    /// Per-index values expanded to all `n` indices (equal by exchangeability).
    pub fn per_index(&self, n: usize) -> Vec<f64> {
        vec![self.sum / n as f64; n]
    }

    /// Whether `mean_raw` sits more than two standard errors above zero.
    pub fn resolved(&self) -> bool {
        self.mean_raw > 2.0 * self.se
    }
}

/// `min(max_indices, n)` evenly spaced indices in `0..n`.
pub fn profile_indices(n: usize, max_indices: usize) -> Vec<usize> {
    let count = max_indices.clamp(1, n.max(1));
    let mut out: Vec<usize> = (0..count).map(|t| t * n / count).collect();
    out.dedup();
    out
}

/// Estimates `I(W; Z_i)` on evenly spaced indices and averages. The data are i.i.d.,
/// so every index has the same true value and averaging only removes estimator noise.
pub fn estimate_mi_profile(rs: &ReplicateSet, settings: &MiSettings) -> Result<MiProfile> {
    let indices = profile_indices(rs.n(), settings.max_indices);
    let estimates = indices
        .iter()
        .map(|&i| {
            let pairs = hypothesis_data_pairs(rs, i)?;
            let seed = settings.seed.wrapping_add(i as u64);
            match &pairs.labels {
                Some(labels) => chain_mi(
                    &pairs.w,
                    &pairs.z,
                    labels,
                    settings.k,
                    settings.jitter,
                    seed,
                ),
                None => ksg_mi(&pairs.w, &pairs.z, settings.k, settings.jitter, seed),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = estimates.iter().map(|e| e.raw).collect();
    let (mean_raw, se) = match mean_se(&raw) {
        Ok(ms) => (ms.mean, ms.se),
        Err(_) => (raw[0], f64::INFINITY),
    };
    Ok(MiProfile {
        sum: rs.n() as f64 * mean_raw.max(0.0),
        indices,
        estimates,
        mean_raw,
        se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(m: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn correlated(m: usize, rho: f64, seed: u64) -> (Points, Points) {
        let a = normals(m, seed);
        let b = normals(m, seed + 1000);
        let y = a
            .iter()
            .zip(&b)
            .map(|(u, v)| rho * u + (1.0 - rho * rho).sqrt() * v)
            .collect();
        (Points::scalar(a), Points::scalar(y))
    }

    #[test]
    fn independent_normals() {
        let raw: Vec<f64> = (0..10)
            .map(|s| {
                let x = Points::scalar(normals(2000, 100 + s));
                let y = Points::scalar(normals(2000, 200 + s));
                let e = ksg_mi(&x, &y, 3, 1e-10, s).unwrap();
                assert!(e.value >= 0.0);
                e.raw
            })
            .collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        assert!(mean.abs() <= 0.02, "{mean}");
    }

    #[test]
    fn correlated_normals() {
        let (x, y) = correlated(2000, 0.6, 5);
        let e = ksg_mi(&x, &y, 3, 1e-10, 0).unwrap();
        let truth = -0.5 * (1.0f64 - 0.36).ln();
        assert!((e.value - truth).abs() < 0.03, "{} vs {truth}", e.value);
    }

    #[test]
    fn identical_variables_are_highly_dependent() {
        let x = Points::scalar(normals(2000, 7));
        let e = ksg_mi(&x, &x.clone(), 3, 1e-10, 0).unwrap();
        assert!(e.value > 1.0, "{}", e.value);
    }

    #[test]
    fn duplicated_samples_resolved_by_jitter() {
        let x = Points::scalar(vec![1.0; 50]);
        let y = Points::scalar((0..50).map(|i| (i % 5) as f64).collect());
        assert!(ksg_mi(&x, &y, 3, 1e-10, 0).is_ok());
        assert!(matches!(
            ksg_mi(&x, &y, 3, 0.0, 0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn ksg_preconditions() {
        let x = Points::scalar(vec![0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            ksg_mi(&x, &x, 3, 1e-10, 0),
            Err(Error::InsufficientData { .. })
        ));
        assert!(ksg_mi(&x, &x, 0, 1e-10, 0).is_err());
        let y = Points::scalar(vec![0.0; 3]);
        assert!(ksg_mi(&x, &y, 1, 1e-10, 0).is_err());
        let nan = Points::scalar(vec![0.0, f64::NAN, 1.0, 2.0, 3.0]);
        assert!(matches!(
            ksg_mi(&nan, &nan, 1, 1e-10, 0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn rescaling_one_coordinate() {
        let (mut sa, mut sb) = (0.0, 0.0);
        let seeds = 10;
        for s in 0..seeds {
            let (x, y) = correlated(2000, 0.6, 11 + 2 * s);
            let z = Points::scalar(normals(2000, 500 + s));
            let xz = x.concat(&z);
            let scaled = Points::new(
                xz.data()
                    .chunks(2)
                    .flat_map(|c| [c[0] * 10.0, c[1]])
                    .collect(),
                2,
            )
            .unwrap();
            sa += ksg_mi(&xz, &y, 3, 1e-10, s).unwrap().raw;
            sb += ksg_mi(&scaled, &y, 3, 1e-10, s).unwrap().raw;
        }
        let (a, b) = (sa / seeds as f64, sb / seeds as f64);
        assert!((a - b).abs() <= 0.02, "{a} vs {b}");
        let truth = -0.5 * (1.0f64 - 0.36).ln();
        assert!((b - truth).abs() < 0.03);
    }

    #[test]
    fn permutation_invariance() {
        let (x, y) = correlated(500, 0.5, 3);
        let perm: Vec<usize> = (0..500).rev().collect();
        let a = ksg_mi(&x, &y, 3, 0.0, 0).unwrap();
        let b = ksg_mi(&x.select(&perm), &y.select(&perm), 3, 0.0, 0).unwrap();
        assert!((a.raw - b.raw).abs() < 1e-12);
    }

    #[test]
    fn mixed_independent_labels() {
        let x = Points::scalar(normals(2000, 21));
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let labels: Vec<u32> = (0..2000).map(|_| rng.random_range(0..2)).collect();
        let e = mixed_cd_mi(&x, &labels, 3, 1e-10, 0).unwrap();
        assert!(e.raw.abs() <= 0.02, "{}", e.raw);
    }

    /// `I(X; Y)` for `X | Y = ±1 ~ N(±1, s²)`, `Y` balanced, by trapezoidal quadrature of
    /// `H(X) − H(X | Y)`.
    fn mixture_mi(s: f64) -> f64 {
        let pdf = |x: f64, mu: f64| {
            (-(x - mu).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
        };
        let (lo, hi, steps) = (-1.0 - 12.0 * s, 1.0 + 12.0 * s, 200_000);
        let h = (hi - lo) / steps as f64;
        let mut hx = 0.0;
        for t in 0..=steps {
            let x = lo + t as f64 * h;
            let f = 0.5 * pdf(x, -1.0) + 0.5 * pdf(x, 1.0);
            let w = if t == 0 || t == steps { 0.5 } else { 1.0 };
            if f > 0.0 {
                hx -= w * h * f * f.ln();
            }
        }
        let h_cond = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * s * s).ln();
        hx - h_cond
    }

    #[test]
    fn mixed_matches_mixture_quadrature() {
        let s = 0.5;
        let noise = normals(2000, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let labels: Vec<u32> = (0..2000).map(|_| rng.random_range(0..2)).collect();
        let x: Vec<f64> = labels
            .iter()
            .zip(&noise)
            .map(|(&l, e)| if l == 1 { 1.0 } else { -1.0 } + s * e)
            .collect();
        let e = mixed_cd_mi(&Points::scalar(x), &labels, 3, 1e-10, 0).unwrap();
        let truth = mixture_mi(s);
        assert!((e.value - truth).abs() < 0.05, "{} vs {truth}", e.value);
    }

    #[test]
    fn mixed_constant_label_is_zero() {
        let x = Points::scalar(normals(100, 1));
        let e = mixed_cd_mi(&x, &[4; 100], 3, 1e-10, 0).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.raw, 0.0);
    }

    #[test]
    fn mixed_skips_small_classes() {
        let x = Points::scalar(normals(200, 2));
        let mut labels = vec![0u32; 200];
        labels[10] = 1;
        labels[20] = 1;
        let e = mixed_cd_mi(&x, &labels, 3, 1e-10, 0).unwrap();
        assert_eq!(e.warnings.len(), 1);
        assert!((e.coverage - 198.0 / 200.0).abs() < 1e-12);
    }

    #[test]
    fn chain_with_constant_label_equals_ksg_exactly() {
        let (w, x) = correlated(800, 0.4, 8);
        let a = chain_mi(&w, &x, &[1; 800], 3, 1e-10, 17).unwrap();
        let b = ksg_mi(&w, &x, 3, 1e-10, 17).unwrap();
        assert_eq!(a.raw, b.raw);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn chain_independent_inputs() {
        let w = Points::scalar(normals(2000, 41));
        let x = Points::scalar(normals(2000, 42));
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let labels: Vec<u32> = (0..2000).map(|_| rng.random_range(0..2)).collect();
        let e = chain_mi(&w, &x, &labels, 3, 1e-10, 0).unwrap();
        assert!(e.raw.abs() < 0.04, "{}", e.raw);
    }

    #[test]
    fn analytic_values() {
        let v: f64 = analytic_gaussian_mi(2).unwrap();
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-15);
        let v: f64 = analytic_gaussian_mi(100).unwrap();
        assert!((v - 0.0050251).abs() < 1e-7);
        let v: f64 = analytic_gaussian_mi(1_000_000).unwrap();
        assert!((1e6 * v - 0.5).abs() < 1e-4);
        let v32: f32 = analytic_gaussian_mi(10).unwrap();
        assert!((f64::from(v32) - 0.5 * (10.0f64 / 9.0).ln()).abs() < 1e-6);
        assert!(analytic_gaussian_mi::<f64>(1).is_err());
    }

    #[test]
    fn profile_index_spacing() {
        assert_eq!(profile_indices(10, 128), (0..10).collect::<Vec<_>>());
        let idx = profile_indices(1600, 4);
        assert_eq!(idx, vec![0, 400, 800, 1200]);
    }
}
