//! Variance-normalised histogram of a return sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Density estimate on symmetric bins `k·w`, `k = −K..=K`, in units of the
/// sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPdf {
    pub bin_centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<u64>,
    pub total_n: u64,
    pub bin_width: f64,
    /// Mean and standard deviation used to standardise the raw values.
    pub raw_mean: f64,
    pub raw_std: f64,
}

impl EmpiricalPdf {
    /// `Σ density·width`; one by construction.
    pub fn total_probability(&self) -> f64 {
        compensated_sum(self.densities.iter().map(|d| d * self.bin_width))
    }

    /// Second moment of the binned distribution about zero.
    pub fn binned_variance(&self) -> f64 {
        compensated_sum(
            self.bin_centers
                .iter()
                .zip(&self.densities)
                .map(|(c, d)| c * c * d * self.bin_width),
        )
    }
}

/// Standardise `values` to zero mean and unit variance and bin them.
pub fn histogram_pdf(values: &[f64], bin_width_sigma: f64) -> Result<EmpiricalPdf> {
    if !(bin_width_sigma > 0.0 && bin_width_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bin width must be > 0, got {bin_width_sigma}"
        )));
    }
    if values.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 values".into()));
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
    let std = var.sqrt();
    if std.is_nan() || std <= 0.0 {
        return Err(Error::InvalidParameter("sample has zero variance".into()));
    }
    let index = |v: f64| ((v - mean) / std / bin_width_sigma).round() as i64;
    let k_max = values.iter().map(|&v| index(v).abs()).max().unwrap_or(0);
    let mut counts = vec![0u64; (2 * k_max + 1) as usize];
    for &v in values {
        counts[(index(v) + k_max) as usize] += 1;
    }
    let bin_centers: Vec<f64> = (-k_max..=k_max)
        .map(|k| k as f64 * bin_width_sigma)
        .collect();
    let densities = counts
        .iter()
        .map(|&c| c as f64 / (n * bin_width_sigma))
        .collect();
    Ok(EmpiricalPdf {
        bin_centers,
        densities,
        counts,
        total_n: values.len() as u64,
        bin_width: bin_width_sigma,
        raw_mean: mean,
        raw_std: std,
    })
}
