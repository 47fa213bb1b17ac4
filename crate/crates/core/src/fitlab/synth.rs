//! Synthetic returns drawn from the model's own distribution.

use crate::error::{Error, Result};
use crate::fitlab::data::ReturnSeries;
use crate::fitlab::model::{ModelCurve, RegimeParams};
use crate::rng;

/// Draw `m` values from the lattice distribution of the model by inverse
/// CDF, spreading each lattice point uniformly over its cell `[x−1, x+1)`,
/// and express them in units of the model's σ.
pub fn synthesize_returns(
    params: RegimeParams,
    n_model: usize,
    m: usize,
    seed: u64,
) -> Result<ReturnSeries> {
    if m < 1 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let curve = ModelCurve::build(params, n_model)?;
    let pdf = curve.lattice();
    let mut acc = 0.0;
    let cdf: Vec<f64> = pdf
        .probs()
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let total = acc;
    let mut stream = rng::substream(seed, 0);
    let values = (0..m)
        .map(|_| {
            let target = rng::uniform(&mut stream) * total;
            let idx = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
            let x = pdf.displacement(idx) as f64 + 2.0 * rng::uniform(&mut stream) - 1.0;
            x / curve.sigma
        })
        .collect();
    ReturnSeries::new(
        values,
        format!(
            "synthetic b={} delta_sigma={} kappa={} n_model={} seed={}",
            params.b, params.delta_sigma, params.kappa, n_model, seed
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice;
    use crate::numeric::mean_and_se;

    #[test]
    fn reproducible_under_seed() {
        let p = RegimeParams {
            b: 0.4,
            delta_sigma: 10.0,
            kappa: 2.5,
        };
        let a = synthesize_returns(p, 200, 1000, 5).unwrap();
        let b = synthesize_returns(p, 200, 1000, 5).unwrap();
        let c = synthesize_returns(p, 200, 1000, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn moments_match_lattice() {
        let p = RegimeParams {
            b: 0.4,
            delta_sigma: 10.0,
            kappa: 2.5,
        };
        let curve = ModelCurve::build(p, 300).unwrap();
        let s = synthesize_returns(p, 300, 200_000, 1).unwrap();
        let sq: Vec<f64> = s.values.iter().map(|v| v * v).collect();
        let (m2, se) = mean_and_se(&sq);
        // Cell jitter adds 1/3 lattice units² to the variance.
        let expected = 1.0 + 1.0 / (3.0 * curve.sigma * curve.sigma);
        assert!(
            (m2 - expected).abs() < 4.0 * se,
            "{m2} vs {expected} ± {se}"
        );
        let fourth: Vec<f64> = s.values.iter().map(|v| v.powi(4)).collect();
        let (m4, se4) = mean_and_se(&fourth);
        let lattice_m4 = lattice::moments(curve.lattice(), 4)
            .unwrap()
            .fourth
            .unwrap()
            / curve.sigma.powi(4);
        assert!(
            (m4 - lattice_m4).abs() < 4.0 * se4 + 1e-3,
            "{m4} vs {lattice_m4}"
        );
    }

    #[test]
    fn uncoupled_samples_look_gaussian() {
        let p = RegimeParams {
            b: 1.0,
            delta_sigma: 1.0,
            kappa: 0.0,
        };
        let s = synthesize_returns(p, 1000, 100_000, 2).unwrap();
        let within_one = s.values.iter().filter(|v| v.abs() < 1.0).count() as f64 / 1e5;
        assert!((within_one - 0.6827).abs() < 0.006, "{within_one}");
    }
}
