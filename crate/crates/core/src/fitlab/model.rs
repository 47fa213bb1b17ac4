//! Continuum density of the regime-switching walk in units of its own
//! standard deviation.
//!
//! The well width is given in σ units (`delta_sigma`) while the lattice
//! needs it in steps, `δ_lattice = delta_sigma · σ_model`, and `σ_model`
//! itself depends on `δ_lattice`. [`ModelCurve::build`] solves for the
//! self-consistent `σ` starting from the uncoupled `σ = √N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, CouplingProfile, LatticePdf, ValidityReport};

const MAX_NORMALIZATION_ITERS: usize = 20;
const NORMALIZATION_RTOL: f64 = 1e-10;
/// Log-density floor; keeps χ² finite where the lattice underflows.
const LOG_FLOOR: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub b: f64,
    /// Well width in units of the model's standard deviation.
    pub delta_sigma: f64,
    /// Renormalised coupling; the lattice uses `ε = κ/N`.
    pub kappa: f64,
}

#[derive(Debug, Clone)]
pub struct ModelCurve {
    pub params: RegimeParams,
    pub n_model: usize,
    pub sigma: f64,
    pub delta_lattice: f64,
    pub validity: ValidityReport,
    pub normalization_iterations: usize,
    pdf: LatticePdf,
    /// `ln p(u)` at the non-negative lattice points, increasing `u`.
    abs_u: Vec<f64>,
    log_density: Vec<f64>,
}

impl ModelCurve {
    pub fn build(params: RegimeParams, n_model: usize) -> Result<Self> {
        if n_model < 2 {
            return Err(Error::InvalidParameter(format!(
                "model resolution must be >= 2, got {n_model}"
            )));
        }
        let epsilon = params.kappa / n_model as f64;
        let mut iterations = 0;
        // σ ↦ σ_model(σ) is decreasing (a wider well pulls harder toward the
        // centre), so g(σ) = σ_model(σ) − σ has one root and a plain
        // fixed-point step from any σ lands on the other side of it.
        let mut solve = |sigma: f64| -> Result<(f64, LatticePdf, ValidityReport)> {
            iterations += 1;
            let delta_lattice = params.delta_sigma * sigma;
            let profile = CouplingProfile::regime(epsilon, params.b, delta_lattice)?;
            let (pdf, validity) = lattice::evolve(n_model, &profile)?;
            let model_sigma = lattice::moments(&pdf, 2)?.variance.sqrt();
            if !model_sigma.is_finite() || model_sigma == 0.0 {
                return Err(Error::NonConvergentNormalization {
                    iterations,
                    sigma: model_sigma,
                });
            }
            Ok((model_sigma, pdf, validity))
        };
        let converged = |sigma: f64, model_sigma: f64| {
            (model_sigma - sigma).abs() <= NORMALIZATION_RTOL * sigma
        };

        let mut lo = (n_model as f64).sqrt();
        let (f_lo, pdf, validity) = solve(lo)?;
        if converged(lo, f_lo) {
            return Ok(Self::assemble(
                params,
                n_model,
                f_lo,
                params.delta_sigma * lo,
                pdf,
                validity,
                1,
            ));
        }
        let mut hi = f_lo;
        let mut g_lo = f_lo - lo;
        let (f_hi, pdf, validity) = solve(hi)?;
        if converged(hi, f_hi) {
            return Ok(Self::assemble(
                params,
                n_model,
                f_hi,
                params.delta_sigma * hi,
                pdf,
                validity,
                2,
            ));
        }
        let mut g_hi = f_hi - hi;
        if g_lo.signum() == g_hi.signum() {
            return Err(Error::NonConvergentNormalization {
                iterations: 2,
                sigma: f_hi,
            });
        }
        // Illinois variant of regula falsi.
        let mut side = 0i8;
        for iteration in 3..=MAX_NORMALIZATION_ITERS {
            let mut sigma = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
            if !(sigma > lo.min(hi) && sigma < lo.max(hi)) {
                sigma = 0.5 * (lo + hi);
            }
            let (model_sigma, pdf, validity) = solve(sigma)?;
            if converged(sigma, model_sigma) {
                return Ok(Self::assemble(
                    params,
                    n_model,
                    model_sigma,
                    params.delta_sigma * sigma,
                    pdf,
                    validity,
                    iteration,
                ));
            }
            let g = model_sigma - sigma;
            if g.signum() == g_hi.signum() {
                hi = sigma;
                g_hi = g;
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            } else {
                lo = sigma;
                g_lo = g;
                if side == -1 {
                    g_hi *= 0.5;
                }
                side = -1;
            }
        }
        Err(Error::NonConvergentNormalization {
            iterations: MAX_NORMALIZATION_ITERS,
            sigma: 0.5 * (lo + hi),
        })
    }

    fn assemble(
        params: RegimeParams,
        n_model: usize,
        sigma: f64,
        delta_lattice: f64,
        pdf: LatticePdf,
        validity: ValidityReport,
        normalization_iterations: usize,
    ) -> Self {
        let (abs_u, log_density): (Vec<f64>, Vec<f64>) = pdf
            .iter()
            .filter(|&(x, _)| x >= 0)
            .map(|(x, p)| {
                let density = p * sigma / 2.0;
                let ln = if density > 0.0 {
                    density.ln().max(LOG_FLOOR)
                } else {
                    LOG_FLOOR
                };
                (x as f64 / sigma, ln)
            })
            .unzip();
        ModelCurve {
            params,
            n_model,
            sigma,
            delta_lattice,
            validity,
            normalization_iterations,
            pdf,
            abs_u,
            log_density,
        }
    }

    pub fn lattice(&self) -> &LatticePdf {
        &self.pdf
    }

    /// Average share of probability mass per step that went through a
    /// clamped transfer probability.
    pub fn validity_fraction(&self) -> f64 {
        self.validity.clamped_mass / self.n_model as f64
    }

    /// `ln p(u)`, linear in `u` between lattice points. Even in `u`.
    pub fn log_density(&self, u: f64) -> f64 {
        let a = u.abs();
        let xs = &self.abs_u;
        let ys = &self.log_density;
        // For odd N the innermost points are ±1/σ with equal density.
        if a <= xs[0] {
            return ys[0];
        }
        let last = xs.len() - 1;
        if a >= xs[last] {
            return if a == xs[last] { ys[last] } else { LOG_FLOOR };
        }
        let j = xs.partition_point(|&v| v <= a);
        let (x0, x1) = (xs[j - 1], xs[j]);
        let t = (a - x0) / (x1 - x0);
        ys[j - 1] + t * (ys[j] - ys[j - 1])
    }

    pub fn density(&self, u: f64) -> f64 {
        self.log_density(u).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDensities {
    pub densities: Vec<f64>,
    pub sigma_model: f64,
    pub delta_lattice: f64,
    pub validity_fraction: f64,
    pub valid: bool,
}

/// Model density at `points` (σ = 1 units).
pub fn model_pdf_continuum(
    params: RegimeParams,
    n_model: usize,
    points: &[f64],
) -> Result<ModelDensities> {
    if n_model < 100 {
        return Err(Error::InvalidParameter(format!(
            "model resolution must be >= 100, got {n_model}"
        )));
    }
    let curve = ModelCurve::build(params, n_model)?;
    Ok(ModelDensities {
        densities: points.iter().map(|&u| curve.density(u)).collect(),
        sigma_model: curve.sigma,
        delta_lattice: curve.delta_lattice,
        validity_fraction: curve.validity_fraction(),
        valid: curve.validity.valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }

    fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
        xs.windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    #[test]
    fn uncoupled_model_is_standard_normal() {
        let params = RegimeParams {
            b: 0.5,
            delta_sigma: 3.0,
            kappa: 0.0,
        };
        let d = model_pdf_continuum(params, 1000, &[0.0, 1.0]).unwrap();
        let phi0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((d.densities[0] / phi0 - 1.0).abs() < 0.01);
        assert!((d.densities[1] / (phi0 * (-0.5f64).exp()) - 1.0).abs() < 0.01);
        assert!((d.sigma_model - 1000f64.sqrt()).abs() < 1e-9);
        assert!(d.valid);
    }

    #[test]
    fn density_is_even_and_normalised() {
        let params = RegimeParams {
            b: 0.38,
            delta_sigma: 13.8,
            kappa: 3.0,
        };
        let xs = grid(-20.0, 20.0, 0.01);
        let mut errors = Vec::new();
        for n in [400, 1600] {
            let curve = ModelCurve::build(params, n).unwrap();
            for u in [0.0, 0.3, 1.7, 4.2, 9.9] {
                assert_eq!(curve.density(u), curve.density(-u));
            }
            let ys: Vec<f64> = xs.iter().map(|&u| curve.density(u)).collect();
            errors.push((trapezoid(&xs, &ys) - 1.0).abs());
        }
        // Log-linear interpolation error shrinks like the squared lattice
        // spacing in u, i.e. like 1/N.
        assert!(errors[0] < 1e-2, "{errors:?}");
        assert!(errors[1] < errors[0] / 3.0, "{errors:?}");
    }

    #[test]
    fn djia_scale_parameters_give_heavy_tails() {
        let params = RegimeParams {
            b: 0.38,
            delta_sigma: 13.8,
            kappa: 3.0,
        };
        let pts = [0.0, 3.0, 4.0, 5.0];
        let d = model_pdf_continuum(params, 1000, &pts).unwrap();
        let normal = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
        // Sharper peak and heavier tails than the unit Gaussian.
        assert!(d.densities[0] > normal(0.0));
        for (u, p) in pts.iter().zip(&d.densities).skip(1) {
            assert!(*p > normal(*u), "u={u}: {p} vs {}", normal(*u));
        }
    }

    #[test]
    fn normalisation_fixed_point_is_self_consistent() {
        let params = RegimeParams {
            b: 0.4,
            delta_sigma: 10.0,
            kappa: 2.5,
        };
        let curve = ModelCurve::build(params, 500).unwrap();
        let var = lattice::moments(curve.lattice(), 2).unwrap().variance;
        assert!((var.sqrt() / curve.sigma - 1.0).abs() < 1e-9);
        assert!((curve.delta_lattice / (params.delta_sigma * curve.sigma) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_coarse_models() {
        let params = RegimeParams {
            b: 0.4,
            delta_sigma: 10.0,
            kappa: 2.5,
        };
        assert!(model_pdf_continuum(params, 50, &[0.0]).is_err());
    }
}
