//! Small descriptive-statistics helpers shared by the estimators.

use crate::{Error, Real, Result};

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + x);
    Some(sum / T::from_usize_lossy(xs.len()))
}

/// Unbiased sample variance (divides by `len - 1`); `None` below two samples.
pub fn sample_variance<T: Real>(xs: &[T]) -> Option<T> {
    if xs.len() < 2 {
        return None;
    }
    let mu = mean(xs)?;
    let ss = xs
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - mu) * (x - mu));
    Some(ss / T::from_usize_lossy(xs.len() - 1))
}

/// Population standard deviation (divides by `len`).
pub fn population_std<T: Real>(xs: &[T]) -> Option<T> {
    let mu = mean(xs)?;
    let ss = xs
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - mu) * (x - mu));
    Some((ss / T::from_usize_lossy(xs.len())).sqrt())
}

/// Mean together with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSe<T> {
    pub mean: T,
    pub se: T,
}

/// Mean and standard error `s / sqrt(len)` from replicate-level values.
pub fn mean_se<T: Real>(xs: &[T]) -> Result<MeanSe<T>> {
    let var = sample_variance(xs).ok_or(Error::InsufficientData {
        what: "replicates",
        needed: 2,
        got: xs.len(),
    })?;
    let mean = mean(xs).expect("non-empty");
    Ok(MeanSe {
        mean,
        se: (var / T::from_usize_lossy(xs.len())).sqrt(),
    })
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination; 1 when the residuals vanish.
    pub r_squared: T,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::Precondition(format!(
            "x and y lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            what: "points",
            needed: 2,
            got: xs.len(),
        });
    }
    let mx = mean(xs).expect("non-empty");
    let my = mean(ys).expect("non-empty");
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    if sxx <= T::zero() {
        return Err(Error::Degenerate("all x values identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= T::zero() {
        T::one()
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}
