//! χ² fit of the regime-switching walk to a variance-normalised histogram.
//!
//! The search runs in `(ln b, ln δ, κ)` with a multi-start grid and
//! Nelder–Mead from each grid point. All three parameters are confined to
//! their bounds (the objective is `+∞` outside); `κ` may take either sign.
//! A start at `κ = 0` is always included, so the uncoupled
//! (binomial/Gaussian) slice is reachable.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitlab::chi2::{FitRange, FoldedBins, Weighting};
use crate::fitlab::histogram::EmpiricalPdf;
use crate::fitlab::model::{ModelCurve, RegimeParams};
use crate::fitlab::optimize::{nelder_mead, Minimum, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitBounds {
    pub b: (f64, f64),
    pub delta_sigma: (f64, f64),
    pub kappa: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        FitBounds {
            b: (0.05, 2.0),
            delta_sigma: (1.0, 40.0),
            kappa: (-1.0, 8.0),
        }
    }
}

impl FitBounds {
    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64), positive: bool| {
            lo.is_finite() && hi.is_finite() && lo < hi && (!positive || lo > 0.0)
        };
        if !ok(self.b, true) || !ok(self.delta_sigma, true) || !ok(self.kappa, false) {
            return Err(Error::InvalidParameter(format!(
                "bounds must be finite, ordered, and positive for b and delta: {self:?}"
            )));
        }
        Ok(())
    }

    /// A held κ is exempt from its bounds.
    fn contains(&self, p: RegimeParams, kappa_held: bool) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(p.b, self.b)
            && inside(p.delta_sigma, self.delta_sigma)
            && (kappa_held || inside(p.kappa, self.kappa))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_model: usize,
    pub range: FitRange,
    pub weighting: Weighting,
    /// Grid points per parameter for the multi-start.
    pub grid: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Refit locally at `2·n_model` and warn if χ² moves by more than 1%.
    pub doubling_check: bool,
    /// Hold κ fixed (e.g. 0 for the uncoupled slice).
    pub fixed_kappa: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_model: 1000,
            range: FitRange::default(),
            weighting: Weighting::Unweighted,
            grid: 3,
            max_iter: 400,
            tol: 1e-6,
            doubling_check: true,
            fixed_kappa: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub starts: usize,
    pub converged_starts: usize,
    pub evaluations: usize,
    pub best_start: usize,
    pub best_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub n_model: usize,
    pub chi2: f64,
    pub relative_shift: f64,
    pub b: f64,
    pub delta_sigma: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub b: f64,
    pub delta_sigma: f64,
    pub delta_lattice: f64,
    pub kappa: f64,
    pub chi2: f64,
    pub n_model: usize,
    pub fit_range: FitRange,
    pub validity_fraction: f64,
    pub n_bins_used: usize,
    pub sigma_model: f64,
    pub trace: OptimizerTrace,
    pub doubling: Option<DoublingCheck>,
}

struct Objective<'a> {
    bins: &'a FoldedBins,
    bounds: FitBounds,
    n_model: usize,
    weighting: Weighting,
    fixed_kappa: Option<f64>,
}

impl Objective<'_> {
    fn params(&self, p: &[f64]) -> RegimeParams {
        RegimeParams {
            b: p[0].exp(),
            delta_sigma: p[1].exp(),
            kappa: self.fixed_kappa.unwrap_or_else(|| p[2]),
        }
    }

    fn eval_params(&self, params: RegimeParams, n_model: usize) -> f64 {
        if !self.bounds.contains(params, self.fixed_kappa.is_some()) {
            return f64::INFINITY;
        }
        match ModelCurve::build(params, n_model) {
            Ok(curve) => {
                let model: Vec<f64> = self
                    .bins
                    .centers
                    .iter()
                    .map(|&u| curve.density(u))
                    .collect();
                self.bins.chi2(&model, self.weighting)
            }
            Err(_) => f64::INFINITY,
        }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.eval_params(self.params(p), self.n_model)
    }
}

fn grid_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
        .collect()
}

fn lexicographic(a: &(Minimum, usize), b: &(Minimum, usize)) -> std::cmp::Ordering {
    a.0.f.total_cmp(&b.0.f).then_with(|| {
        a.0.x
            .iter()
            .zip(&b.0.x)
            .fold(std::cmp::Ordering::Equal, |o, (x, y)| {
                o.then_with(|| x.total_cmp(y))
            })
    })
}

pub fn fit_regime_model(
    empirical: &EmpiricalPdf,
    bounds: FitBounds,
    options: FitOptions,
) -> Result<FitResult> {
    bounds.validate()?;
    if options.grid == 0 || options.n_model < 2 {
        return Err(Error::InvalidParameter(
            "grid must be >= 1 and n_model >= 2".into(),
        ));
    }
    let bins = FoldedBins::from_empirical(empirical, options.range)?;
    let objective = Objective {
        bins: &bins,
        bounds,
        n_model: options.n_model,
        weighting: options.weighting,
        fixed_kappa: options.fixed_kappa,
    };
    let (lb0, lb1) = (bounds.b.0.ln(), bounds.b.1.ln());
    let (ld0, ld1) = (bounds.delta_sigma.0.ln(), bounds.delta_sigma.1.ln());
    let g = options.grid;

    let mut starts: Vec<Vec<f64>> = Vec::new();
    let kappa_grid = match options.fixed_kappa {
        Some(_) => vec![f64::NAN],
        None => {
            let mut k = grid_points(bounds.kappa.0, bounds.kappa.1, g);
            k.push(0.0);
            k
        }
    };
    for (ki, &kappa) in kappa_grid.iter().enumerate() {
        let is_zero_start = options.fixed_kappa.is_none() && ki == kappa_grid.len() - 1;
        let bs = if is_zero_start {
            vec![0.5 * (lb0 + lb1)]
        } else {
            grid_points(lb0, lb1, g)
        };
        let ds = if is_zero_start {
            vec![0.5 * (ld0 + ld1)]
        } else {
            grid_points(ld0, ld1, g)
        };
        for &lb in &bs {
            for &ld in &ds {
                let mut p = vec![lb, ld];
                if options.fixed_kappa.is_none() {
                    p.push(kappa);
                }
                starts.push(p);
            }
        }
    }
    let mut step = vec![
        (lb1 - lb0) / (2.0 * g as f64),
        (ld1 - ld0) / (2.0 * g as f64),
    ];
    if options.fixed_kappa.is_none() {
        step.push((bounds.kappa.1 - bounds.kappa.0) / (2.0 * g as f64));
    }
    // Converged on the spread of χ² across the simplex alone: κ is
    // unbounded and the valley is flat along it.
    let nm = NelderMeadOptions {
        max_iter: options.max_iter,
        f_tol: options.tol,
        x_tol: f64::INFINITY,
    };

    let runs: Vec<(Minimum, usize)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| (nelder_mead(|p| objective.eval(p), x0, &step, nm), i))
        .collect();
    let converged_starts = runs.iter().filter(|r| r.0.converged).count();
    let evaluations = runs.iter().map(|r| r.0.evaluations).sum();
    if converged_starts == 0 {
        return Err(Error::OptimizerStalled {
            max_iter: options.max_iter,
        });
    }
    let (best, best_start) = runs
        .into_iter()
        .filter(|r| r.0.f.is_finite())
        .min_by(lexicographic)
        .ok_or(Error::OptimizerStalled {
            max_iter: options.max_iter,
        })?;
    let params = objective.params(&best.x);
    let curve = ModelCurve::build(params, options.n_model)?;

    let doubling = if options.doubling_check {
        let doubled = Objective {
            n_model: 2 * options.n_model,
            ..objective
        };
        let local = nelder_mead(
            |p| doubled.eval(p),
            &best.x,
            &step.iter().map(|s| s / 8.0).collect::<Vec<_>>(),
            NelderMeadOptions {
                max_iter: options.max_iter / 4,
                ..nm
            },
        );
        let p2 = doubled.params(&local.x);
        let shift = (local.f - best.f).abs() / best.f.max(f64::MIN_POSITIVE);
        if shift > 0.01 {
            warn!(
                "chi2 moved by {:.2}% when refitting at n_model = {}",
                100.0 * shift,
                2 * options.n_model
            );
        }
        Some(DoublingCheck {
            n_model: 2 * options.n_model,
            chi2: local.f,
            relative_shift: shift,
            b: p2.b,
            delta_sigma: p2.delta_sigma,
            kappa: p2.kappa,
        })
    } else {
        None
    };

    Ok(FitResult {
        b: params.b,
        delta_sigma: params.delta_sigma,
        delta_lattice: curve.delta_lattice,
        kappa: params.kappa,
        chi2: best.f,
        n_model: options.n_model,
        fit_range: options.range,
        validity_fraction: curve.validity_fraction(),
        n_bins_used: bins.len(),
        sigma_model: curve.sigma,
        trace: OptimizerTrace {
            starts: starts.len(),
            converged_starts,
            evaluations,
            best_start,
            best_iterations: best.iterations,
        },
        doubling,
    })
}

/// χ² of the unit Gaussian on the same folded bins.
pub fn gaussian_chi2(
    empirical: &EmpiricalPdf,
    range: FitRange,
    weighting: Weighting,
) -> Result<f64> {
    let bins = FoldedBins::from_empirical(empirical, range)?;
    let model = crate::fitlab::baseline::gaussian_pdf(&bins.centers);
    Ok(bins.chi2(&model, weighting))
}
