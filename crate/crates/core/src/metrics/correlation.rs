//! Pearson and Spearman correlation with two-sided t-test p-values.
//!
//! This is the one corner of the codebase that runs on floats; everything
//! feeding it (profits, rates) is computed exactly and converted at the
//! boundary.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pearson,
    Spearman,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Pearson => "pearson",
            Method::Spearman => "spearman",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: Method,
}

fn validate(x: &[f64], y: &[f64]) -> Result<(), MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::DegenerateInput {
            reason: format!("length mismatch: {} vs {}", x.len(), y.len()),
        });
    }
    if x.len() < 3 {
        return Err(MetricsError::DegenerateInput {
            reason: format!("need at least 3 points, got {}", x.len()),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MetricsError::DegenerateInput { reason: "non-finite value".into() });
    }
    Ok(())
}

/// Sample Pearson correlation. p-value from t = rho·√((n−2)/(1−rho²))
/// against Student-t with n−2 degrees of freedom, two-sided.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, MetricsError> {
    validate(x, y)?;
    let n = x.len();
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mean_x, b - mean_y);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::DegenerateInput { reason: "zero variance".into() });
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult { rho, p_value: two_sided_p(rho, n), n, method: Method::Pearson })
}

/// Pearson over mid-ranks (ties get their average rank).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, MetricsError> {
    validate(x, y)?;
    let r = pearson(&mid_ranks(x), &mid_ranks(y))?;
    Ok(CorrelationResult { method: Method::Spearman, ..r })
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 collapse to their midpoint
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            ranks[order[k]] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn two_sided_p(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}
