//! χ² between empirical and model log-densities over a tail window.
//!
//! Bins are folded onto `|u|`: the data density at `c` is the average of
//! the bins at `±c`, and the model is folded the same way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitlab::histogram::EmpiricalPdf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRange {
    pub lo: f64,
    pub hi: f64,
}

impl Default for FitRange {
    fn default() -> Self {
        FitRange { lo: 1.5, hi: 10.0 }
    }
}

impl FitRange {
    pub fn contains(&self, u: f64) -> bool {
        u >= self.lo && u <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `Σ (ln d − ln m)²`
    #[default]
    Unweighted,
    /// Each term weighted by the folded bin count, the inverse Poisson
    /// variance of `ln d`.
    Poisson,
}

/// Non-empty folded bins with `|u|` inside a fit range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedBins {
    pub centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<u64>,
    /// Indices of the `+c` and `−c` bins in the source histogram.
    pub source_pairs: Vec<(usize, usize)>,
}

impl FoldedBins {
    pub fn from_empirical(emp: &EmpiricalPdf, range: FitRange) -> Result<Self> {
        let k = emp.bin_centers.len();
        let mid = k / 2;
        let mut out = FoldedBins {
            centers: Vec::new(),
            densities: Vec::new(),
            counts: Vec::new(),
            source_pairs: Vec::new(),
        };
        for pos in mid..k {
            let c = emp.bin_centers[pos];
            if !range.contains(c) {
                continue;
            }
            let neg = k - 1 - pos;
            let count = if pos == neg {
                emp.counts[pos]
            } else {
                emp.counts[pos] + emp.counts[neg]
            };
            if count == 0 {
                continue;
            }
            let sides = if pos == neg { 1.0 } else { 2.0 };
            out.centers.push(c);
            out.counts.push(count);
            out.densities
                .push(count as f64 / (sides * emp.total_n as f64 * emp.bin_width));
            out.source_pairs.push((pos, neg));
        }
        if out.centers.len() < 3 {
            return Err(Error::InsufficientBins {
                found: out.centers.len(),
            });
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// χ² against model densities evaluated at [`Self::centers`].
    pub fn chi2(&self, model: &[f64], weighting: Weighting) -> f64 {
        self.densities
            .iter()
            .zip(model)
            .zip(&self.counts)
            .map(|((d, m), &n)| {
                let r = d.ln() - m.ln();
                match weighting {
                    Weighting::Unweighted => r * r,
                    Weighting::Poisson => n as f64 * r * r,
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2 {
    pub value: f64,
    pub n_bins: usize,
}

/// χ² of log densities with `model_densities` aligned to
/// `empirical.bin_centers`.
pub fn chi2_logpdf(
    empirical: &EmpiricalPdf,
    model_densities: &[f64],
    range: FitRange,
) -> Result<Chi2> {
    chi2_logpdf_weighted(empirical, model_densities, range, Weighting::Unweighted)
}

pub fn chi2_logpdf_weighted(
    empirical: &EmpiricalPdf,
    model_densities: &[f64],
    range: FitRange,
    weighting: Weighting,
) -> Result<Chi2> {
    if model_densities.len() != empirical.bin_centers.len() {
        return Err(Error::InvalidParameter(format!(
            "model has {} densities for {} bins",
            model_densities.len(),
            empirical.bin_centers.len()
        )));
    }
    let bins = FoldedBins::from_empirical(empirical, range)?;
    let folded_model: Vec<f64> = bins
        .source_pairs
        .iter()
        .map(|&(p, n)| 0.5 * (model_densities[p] + model_densities[n]))
        .collect();
    Ok(Chi2 {
        value: bins.chi2(&folded_model, weighting),
        n_bins: bins.len(),
    })
}
