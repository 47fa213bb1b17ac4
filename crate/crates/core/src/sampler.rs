//! Monte Carlo trajectories of the walk and ensemble estimators.
//!
//! Trajectory `i` of an ensemble always draws from [`rng::substream`]`(seed, i)`,
//! and every reduction runs over per-trajectory values in index order (or
//! over exact integer sums), so results do not depend on how the work is
//! split across threads.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{transfer_probabilities, ClampPolicy, CouplingProfile};
use crate::numeric::{mean_and_se, pairwise_sum};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `ΔS_1 … ΔS_N`, each `±1`.
    pub increments: Vec<i8>,
    /// `x_0 = 0, x_1, …, x_N`.
    pub displacements: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Probability of a `+1` step from every state with `|x| ≤ n`.
#[derive(Debug, Clone)]
struct StepTable {
    offset: i64,
    up: Vec<f64>,
    clamped: Vec<bool>,
}

impl StepTable {
    fn build(n: usize, profile: &CouplingProfile) -> Result<Self> {
        let offset = n as i64;
        let mut up = Vec::with_capacity(2 * n + 1);
        let mut clamped = Vec::with_capacity(2 * n + 1);
        for x in -offset..=offset {
            let t = transfer_probabilities(x, profile, ClampPolicy::Clamp)?;
            up.push(t.up);
            clamped.push(t.clamped);
        }
        Ok(StepTable {
            offset,
            up,
            clamped,
        })
    }
}

/// A reproducible set of `m` trajectories of length `n`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    n: usize,
    m: usize,
    seed: u64,
    profile: CouplingProfile,
    policy: ClampPolicy,
    table: StepTable,
}

impl Ensemble {
    pub fn new(n: usize, profile: CouplingProfile, m: usize, seed: u64) -> Result<Self> {
        Self::with_policy(n, profile, m, seed, ClampPolicy::Clamp)
    }

    pub fn with_policy(
        n: usize,
        profile: CouplingProfile,
        m: usize,
        seed: u64,
        policy: ClampPolicy,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "ensemble needs M >= 2 trajectories, got {m}"
            )));
        }
        Ok(Ensemble {
            n,
            m,
            seed,
            profile,
            policy,
            table: StepTable::build(n, &profile)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn profile(&self) -> &CouplingProfile {
        &self.profile
    }

    /// Run trajectory `index`, calling `visit(step, increment)` for
    /// `step = 0..n` (the increment is `ΔS_{step+1}`). Returns `x_n`.
    fn walk<F: FnMut(usize, i8)>(&self, index: u64, mut visit: F) -> Result<i64> {
        let mut rng: StreamRng = rng::substream(self.seed, index);
        let mut x: i64 = 0;
        for step in 0..self.n {
            let slot = (x + self.table.offset) as usize;
            if self.policy == ClampPolicy::Strict && self.table.clamped[slot] {
                return Err(Error::CouplingOutOfRange {
                    x,
                    p_up: 0.5 + self.profile.drift(x),
                });
            }
            let inc: i8 = if rng::uniform(&mut rng) < self.table.up[slot] {
                1
            } else {
                -1
            };
            visit(step, inc);
            x += inc as i64;
        }
        Ok(x)
    }

    pub fn path(&self, index: u64) -> Result<Trajectory> {
        let mut increments = Vec::with_capacity(self.n);
        let mut displacements = Vec::with_capacity(self.n + 1);
        displacements.push(0);
        let mut x = 0;
        self.walk(index, |_, inc| {
            increments.push(inc);
            x += inc as i64;
            displacements.push(x);
        })?;
        Ok(Trajectory {
            increments,
            displacements,
        })
    }

    /// Terminal displacements `x_n` of trajectories in `range`, in order.
    pub fn terminal_displacements_in(&self, range: Range<usize>) -> Result<Vec<i64>> {
        range
            .into_par_iter()
            .map(|i| self.walk(i as u64, |_, _| {}))
            .collect()
    }

    pub fn terminal_displacements(&self) -> Result<Vec<i64>> {
        self.terminal_displacements_in(0..self.m)
    }

    pub fn stats(&self) -> Result<EnsembleStats> {
        let terminal = self.terminal_displacements()?;
        Ok(EnsembleStats::from_terminal(self.n, self.seed, &terminal))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub mean: Estimate,
    pub variance: Estimate,
    pub fourth: Estimate,
    pub kurtosis: Estimate,
    /// `⟨|x_N|⟩`
    pub mean_abs: Estimate,
}

impl EnsembleStats {
    /// Estimators over terminal displacements given in trajectory order.
    pub fn from_terminal(n: usize, seed: u64, terminal: &[i64]) -> Self {
        let m = terminal.len();
        let mf = m as f64;
        let xs: Vec<f64> = terminal.iter().map(|&x| x as f64).collect();
        let (mean, mean_se) = mean_and_se(&xs);
        let y2: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
        let y4: Vec<f64> = xs.iter().map(|x| (x - mean).powi(4)).collect();
        let abs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let (m2, m2_se) = mean_and_se(&y2);
        let (m4, m4_se) = mean_and_se(&y4);
        let (mean_abs, mean_abs_se) = mean_and_se(&abs);

        let kurt = m4 / (m2 * m2);
        // Delta method on k = m4 / m2².
        let cov: Vec<f64> = y2
            .iter()
            .zip(&y4)
            .map(|(a, b)| (a - m2) * (b - m4))
            .collect();
        let cov24 = pairwise_sum(&cov) / (mf - 1.0) / mf;
        let g4 = 1.0 / (m2 * m2);
        let g2 = -2.0 * m4 / (m2 * m2 * m2);
        let kurt_var = g4 * g4 * m4_se * m4_se + g2 * g2 * m2_se * m2_se + 2.0 * g2 * g4 * cov24;

        EnsembleStats {
            n,
            m,
            seed,
            mean: Estimate {
                value: mean,
                se: mean_se,
            },
            variance: Estimate {
                value: m2,
                se: m2_se,
            },
            fourth: Estimate {
                value: m4,
                se: m4_se,
            },
            kurtosis: Estimate {
                value: kurt,
                se: kurt_var.max(0.0).sqrt(),
            },
            mean_abs: Estimate {
                value: mean_abs,
                se: mean_abs_se,
            },
        }
    }
}

/// One trajectory of `n` steps; the same stream as trajectory 0 of an
/// ensemble with this seed.
pub fn sample_path(n: usize, profile: &CouplingProfile, seed: u64) -> Result<Trajectory> {
    sample_path_with(n, profile, seed, ClampPolicy::Clamp)
}

pub fn sample_path_with(
    n: usize,
    profile: &CouplingProfile,
    seed: u64,
    policy: ClampPolicy,
) -> Result<Trajectory> {
    let table = StepTable::build(n, profile)?;
    let ensemble = Ensemble {
        n,
        m: 1,
        seed,
        profile: *profile,
        policy,
        table,
    };
    ensemble.path(0)
}

pub fn sample_ensemble(
    n: usize,
    profile: &CouplingProfile,
    m: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    Ensemble::new(n, *profile, m, seed)?.stats()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrEstimate {
    /// `L`; the lag between the two increments is `L − 1`.
    pub lag_l: usize,
    /// `ΔS_{n+1}ΔS_{n+L}` averaged over trajectories and over
    /// `n = 0..=N−L`; the standard error comes from per-trajectory means.
    pub pooled: Estimate,
    /// Average over trajectories at each start time `n = 0..=N−L`.
    pub per_n: Vec<Estimate>,
}

/// Increment autocorrelation `E[ΔS_{n+1} ΔS_{n+L}]` from an ensemble.
pub fn estimate_autocorr(ensemble: &Ensemble, lag_l: usize) -> Result<AutocorrEstimate> {
    let n = ensemble.n;
    if lag_l < 2 {
        return Err(Error::InvalidParameter(format!(
            "L must be >= 2, got {lag_l}"
        )));
    }
    if n < lag_l {
        return Err(Error::InvalidParameter(format!(
            "need N >= L, got N={n}, L={lag_l}"
        )));
    }
    let pairs = n - lag_l + 1;
    let shift = lag_l - 1;

    // Per-trajectory: product row (as ±1) and its mean.
    let per_traj: Vec<(Vec<i8>, f64)> = (0..ensemble.m)
        .into_par_iter()
        .map(|i| {
            let mut incs = Vec::with_capacity(n);
            ensemble.walk(i as u64, |_, inc| incs.push(inc))?;
            let products: Vec<i8> = (0..pairs).map(|k| incs[k] * incs[k + shift]).collect();
            let sum: i64 = products.iter().map(|&p| p as i64).sum();
            Ok((products, sum as f64 / pairs as f64))
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![0i64; pairs];
    for (products, _) in &per_traj {
        for (s, &p) in sums.iter_mut().zip(products) {
            *s += p as i64;
        }
    }
    let mf = ensemble.m as f64;
    let per_n = sums
        .iter()
        .map(|&s| {
            let mean = s as f64 / mf;
            // Products are ±1, so the sample variance is m/(m-1)·(1 − mean²).
            let var = (1.0 - mean * mean) * mf / (mf - 1.0);
            Estimate {
                value: mean,
                se: (var / mf).sqrt(),
            }
        })
        .collect();
    let means: Vec<f64> = per_traj.iter().map(|(_, m)| *m).collect();
    let (value, se) = mean_and_se(&means);
    Ok(AutocorrEstimate {
        lag_l,
        pooled: Estimate { value, se },
        per_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendTest {
    pub slope: f64,
    pub slope_se: f64,
    /// `slope / slope_se`
    pub z: f64,
}

/// Weighted least-squares slope of `values[i] − baseline[i]` against `i`.
/// A stationary series has `|z|` of order one.
pub fn trend_test(values: &[Estimate], baseline: &[f64]) -> Result<TrendTest> {
    if values.len() != baseline.len() || values.len() < 3 {
        return Err(Error::InvalidParameter(
            "trend test needs >= 3 points and a baseline of the same length".into(),
        ));
    }
    let points: Vec<(f64, f64, f64)> = values
        .iter()
        .zip(baseline)
        .enumerate()
        .map(|(i, (e, b))| {
            (
                i as f64,
                e.value - b,
                1.0 / (e.se * e.se).max(f64::MIN_POSITIVE),
            )
        })
        .collect();
    let (slope, slope_se, _) = weighted_line(&points);
    Ok(TrendTest {
        slope,
        slope_se,
        z: slope / slope_se,
    })
}

/// Weighted straight-line fit of `(x, y, w)`; returns slope, its standard
/// error and the intercept.
fn weighted_line(points: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    let sw: f64 = pairwise_sum(&points.iter().map(|p| p.2).collect::<Vec<_>>());
    let xbar = pairwise_sum(&points.iter().map(|p| p.2 * p.0).collect::<Vec<_>>()) / sw;
    let ybar = pairwise_sum(&points.iter().map(|p| p.2 * p.1).collect::<Vec<_>>()) / sw;
    let sxx = pairwise_sum(
        &points
            .iter()
            .map(|p| p.2 * (p.0 - xbar).powi(2))
            .collect::<Vec<_>>(),
    );
    let sxy = pairwise_sum(
        &points
            .iter()
            .map(|p| p.2 * (p.0 - xbar) * (p.1 - ybar))
            .collect::<Vec<_>>(),
    );
    let slope = sxy / sxx;
    (slope, (1.0 / sxx).sqrt(), ybar - slope * xbar)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstPoint {
    pub n: usize,
    pub mean_abs: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub kappa: f64,
    pub h: f64,
    pub h_se: f64,
    pub points: Vec<HurstPoint>,
}

/// Slope of `ln⟨|x_N|⟩` against `ln N` under `ε = κ/N`, one independent
/// ensemble of `m` paths per `N`.
pub fn estimate_hurst(kappa: f64, n_list: &[usize], m: usize, seed: u64) -> Result<HurstEstimate> {
    let mut distinct: Vec<usize> = n_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let spans_decade = match (distinct.first(), distinct.last()) {
        (Some(&lo), Some(&hi)) => lo > 0 && hi >= 10 * lo,
        _ => false,
    };
    if distinct.len() < 3 || !spans_decade {
        return Err(Error::InsufficientScales(n_list.to_vec()));
    }
    let mut points = Vec::with_capacity(distinct.len());
    for &n in &distinct {
        let ens = Ensemble::new(
            n,
            CouplingProfile::renormalized(kappa, n),
            m,
            seed ^ rng::splitmix64(n as u64),
        )?;
        let stats = ens.stats()?;
        points.push(HurstPoint {
            n,
            mean_abs: stats.mean_abs,
        });
    }
    let xyw: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let rel = p.mean_abs.se / p.mean_abs.value;
            ((p.n as f64).ln(), p.mean_abs.value.ln(), 1.0 / (rel * rel))
        })
        .collect();
    let (h, h_se, _) = weighted_line(&xyw);
    Ok(HurstEstimate {
        kappa,
        h,
        h_se,
        points,
    })
}
