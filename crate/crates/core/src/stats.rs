//! Goodness-of-fit helpers for the Monte Carlo checks.

use serde::Serialize;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// `(observed, expected)` per pooled bin.
    pub bins: Vec<(usize, f64)>,
}

impl ChiSquareTest {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// Pearson chi-square test of `samples` (each in `0..=n`) against
/// Binomial(n, p). Adjacent outcomes are pooled until every bin expects at
/// least five samples.
pub fn binomial_chi_square(samples: &[usize], n: u64, p: f64) -> Result<ChiSquareTest> {
    if samples.is_empty() {
        return Err(Error::param("samples", "need at least one sample"));
    }
    if let Some(&bad) = samples.iter().find(|&&k| k as u64 > n) {
        return Err(Error::param("samples", format!("outcome {bad} exceeds n = {n}")));
    }
    let dist = Binomial::new(p, n).map_err(|e| Error::param("p", e.to_string()))?;
    let total = samples.len() as f64;
    let mut observed = vec![0usize; n as usize + 1];
    for &k in samples {
        observed[k] += 1;
    }

    let mut bins: Vec<(usize, f64)> = Vec::new();
    let (mut obs, mut exp) = (0usize, 0.0);
    for k in 0..=n {
        obs += observed[k as usize];
        exp += total * dist.pmf(k);
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0;
            exp = 0.0;
        }
    }
    match bins.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => bins.push((obs, exp)),
    }
    if bins.len() < 2 {
        return Err(Error::param("samples", "too few samples for a chi-square test"));
    }

    let statistic: f64 = bins.iter().map(|&(o, e)| (o as f64 - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::param("dof", e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: 1.0 - chi.cdf(statistic),
        bins,
    })
}
