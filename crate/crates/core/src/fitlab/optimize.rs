//! Nelder–Mead simplex minimiser.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Converged once `f_worst − f_best ≤ f_tol·(1 + |f_best|)` …
    pub f_tol: f64,
    /// … and every vertex is within `x_tol` of the best one (max-norm).
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 500,
            f_tol: 1e-6,
            x_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimise `f` from `x0` with an axis-aligned initial simplex of sizes
/// `step`. NaN objective values count as `+∞`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], opts: NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(step.len(), dim, "step must match dimension");
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
    };
    let converged = |s: &[(Vec<f64>, f64)]| {
        let best = s[0].1;
        let worst = s[dim].1;
        let f_ok = worst.is_finite() && worst - best <= opts.f_tol * (1.0 + best.abs());
        let x_ok = s[1..].iter().all(|(x, _)| {
            x.iter()
                .zip(&s[0].0)
                .all(|(a, b)| (a - b).abs() <= opts.x_tol)
        });
        f_ok && x_ok
    };

    let mut iterations = 0;
    order(&mut simplex);
    while iterations < opts.max_iter && !converged(&simplex) {
        iterations += 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(CONTRACT * REFLECT);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&vertex.0)
                        .map(|(b, v)| b + SHRINK * (v - b))
                        .collect();
                    let fx = eval(&x);
                    *vertex = (x, fx);
                }
            }
        }
        order(&mut simplex);
    }
    let done = converged(&simplex);
    let (x, fx) = simplex.swap_remove(0);
    Minimum {
        x,
        f: fx,
        iterations,
        evaluations,
        converged: done,
    }
}
