//! Exact propagation of the walk's distribution on the parity lattice.
//!
//! After `n` steps the walker sits on `x ∈ {-n, -n+2, …, n}`. From state
//! `x` the next increment is `+1` with probability `1/2 + x·ε(x)` and `-1`
//! otherwise, so the distribution after `n + 1` steps is
//!
//! ```text
//! P[n+1](x) = P[n](x-1)·(1/2 + (x-1)ε(x-1)) + P[n](x+1)·(1/2 - (x+1)ε(x+1))
//! ```
//!
//! [`evolve`] iterates this with two dense buffers. A rational-arithmetic
//! twin, [`evolve_exact`], exists for the generating-function checks in
//! [`crate::closed_form`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Rule giving the local coupling `ε(x)` at lattice displacement `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingProfile {
    /// `ε(x) = ε`.
    Constant { epsilon: f64 },
    /// `ε(x) = ε·(b − exp(−x²/(2δ²)))`: anti-correlated near the origin,
    /// correlated once `exp(−x²/(2δ²)) < b`. `δ` is in lattice units.
    RegimeGaussianWell { epsilon: f64, b: f64, delta: f64 },
}

impl CouplingProfile {
    pub fn constant(epsilon: f64) -> Self {
        CouplingProfile::Constant { epsilon }
    }

    /// Constant profile with the renormalised coupling `ε = κ/N`.
    pub fn renormalized(kappa: f64, n: usize) -> Self {
        CouplingProfile::Constant {
            epsilon: kappa / n as f64,
        }
    }

    pub fn regime(epsilon: f64, b: f64, delta: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("b must be > 0, got {b}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {delta}"
            )));
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite, got {epsilon}"
            )));
        }
        Ok(CouplingProfile::RegimeGaussianWell { epsilon, b, delta })
    }

    pub fn epsilon(&self) -> f64 {
        match *self {
            CouplingProfile::Constant { epsilon } => epsilon,
            CouplingProfile::RegimeGaussianWell { epsilon, .. } => epsilon,
        }
    }

    /// Effective coupling at `x`. Even in `x` for every variant.
    pub fn coupling_at(&self, x: i64) -> f64 {
        match *self {
            CouplingProfile::Constant { epsilon } => epsilon,
            CouplingProfile::RegimeGaussianWell { epsilon, b, delta } => {
                let xf = x.unsigned_abs() as f64;
                epsilon * (b - (-(xf * xf) / (2.0 * delta * delta)).exp())
            }
        }
    }

    /// Drift term `x·ε(x)`; odd in `x`.
    pub fn drift(&self, x: i64) -> f64 {
        x as f64 * self.coupling_at(x)
    }
}

/// What to do with a transfer probability that leaves `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampPolicy {
    /// Clamp to the nearest boundary and account for the mass involved.
    #[default]
    Clamp,
    /// Fail with [`Error::CouplingOutOfRange`].
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferProbabilities {
    pub up: f64,
    pub down: f64,
    /// `min(up, down)` before clamping; negative when the raw value was
    /// outside `[0, 1]`.
    pub margin: f64,
    pub clamped: bool,
}

/// Transfer probabilities out of state `x`.
///
/// The pair is built from `|x|` and then mirrored, so
/// `transfer(-x).up == transfer(x).down` bit for bit, and `up + down == 1`.
pub fn transfer_probabilities(
    x: i64,
    profile: &CouplingProfile,
    policy: ClampPolicy,
) -> Result<TransferProbabilities> {
    let ax = x.unsigned_abs() as i64;
    let d = profile.drift(ax);
    let raw_outward = 0.5 + d;
    let margin = 0.5 - d.abs();
    let clamped = margin < 0.0;
    if clamped && policy == ClampPolicy::Strict {
        let p_up = if x >= 0 { raw_outward } else { 0.5 - d };
        return Err(Error::CouplingOutOfRange { x, p_up });
    }
    let outward = raw_outward.clamp(0.0, 1.0);
    let inward = 1.0 - outward;
    let (up, down) = if x >= 0 {
        (outward, inward)
    } else {
        (inward, outward)
    };
    Ok(TransferProbabilities {
        up,
        down,
        margin,
        clamped,
    })
}

/// Distribution after `n` steps; `probs[i]` is the mass at `x = -n + 2i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePdf {
    n: usize,
    probs: Vec<f64>,
}

impl LatticePdf {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn displacement(&self, index: usize) -> i64 {
        2 * index as i64 - self.n as i64
    }

    /// `P(x)`; zero off the lattice or outside `[-n, n]`.
    pub fn prob(&self, x: i64) -> f64 {
        let shifted = x + self.n as i64;
        if shifted < 0 || shifted % 2 != 0 {
            return 0.0;
        }
        self.probs
            .get((shifted / 2) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.displacement(i), p))
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    /// Raw moment `Σ xᵐ P(x)`.
    pub fn raw_moment(&self, order: u32) -> f64 {
        compensated_sum(self.iter().map(|(x, p)| (x as f64).powi(order as i32) * p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    /// Smallest raw `min(p_up, p_down)` over states that carried mass.
    pub worst_margin: f64,
    /// Smallest `|x| > 0` whose raw transfer probability left `[0, 1]`.
    pub first_violation_x: Option<i64>,
    /// Mass that passed through a clamped transition, summed over steps.
    pub clamped_mass: f64,
}

/// Per-state transfer probabilities for `|x| <= n`, indexed by `x + n`.
struct TransferTable {
    offset: i64,
    entries: Vec<TransferProbabilities>,
    /// `up`, `down` and `margin` split by the parity of `x + n`, so the
    /// states reachable at one step are contiguous.
    up: [Vec<f64>; 2],
    down: [Vec<f64>; 2],
    margin: [Vec<f64>; 2],
    /// Smallest clamped `|x|`, if any.
    clamped_from: Option<i64>,
}

impl TransferTable {
    fn build(n: usize, profile: &CouplingProfile) -> Result<Self> {
        let offset = n as i64;
        let entries = (-offset..=offset)
            .map(|x| transfer_probabilities(x, profile, ClampPolicy::Clamp))
            .collect::<Result<Vec<_>>>()?;
        let split = |f: fn(&TransferProbabilities) -> f64| {
            [0, 1].map(|par| entries.iter().skip(par).step_by(2).map(f).collect())
        };
        Ok(TransferTable {
            offset,
            up: split(|t| t.up),
            down: split(|t| t.down),
            margin: split(|t| t.margin),
            clamped_from: (0..=offset).find(|&x| entries[(x + offset) as usize].clamped),
            entries,
        })
    }

    #[inline]
    fn get(&self, x: i64) -> &TransferProbabilities {
        &self.entries[(x + self.offset) as usize]
    }
}

/// Propagate `P[0](0) = 1` through `n` steps, clamping out-of-range
/// transfer probabilities.
pub fn evolve(n: usize, profile: &CouplingProfile) -> Result<(LatticePdf, ValidityReport)> {
    evolve_with(n, profile, ClampPolicy::Clamp)
}

pub fn evolve_with(
    n: usize,
    profile: &CouplingProfile,
    policy: ClampPolicy,
) -> Result<(LatticePdf, ValidityReport)> {
    evolve_observed(n, profile, policy, |_, _| {})
}

/// Like [`evolve_with`], calling `observe(step, probs)` on every
/// intermediate distribution including step 0.
pub fn evolve_observed<F>(
    n: usize,
    profile: &CouplingProfile,
    policy: ClampPolicy,
    mut observe: F,
) -> Result<(LatticePdf, ValidityReport)>
where
    F: FnMut(usize, &[f64]),
{
    let table = TransferTable::build(n.max(1), profile)?;
    let mut cur = Vec::with_capacity(n + 1);
    let mut next = Vec::with_capacity(n + 1);
    cur.push(1.0);

    let mut worst_margin = f64::INFINITY;
    let mut first_violation: Option<i64> = None;
    let mut clamped_mass = 0.0;

    observe(0, &cur);
    for step in 0..n {
        // Validity bookkeeping over states that actually carry mass.
        let shift = table.offset as usize - step;
        let (par, first) = (shift % 2, shift / 2);
        let ups = &table.up[par][first..first + step + 1];
        let downs = &table.down[par][first..first + step + 1];
        let margins = &table.margin[par][first..first + step + 1];
        for (&p, &m) in cur.iter().zip(margins) {
            worst_margin = worst_margin.min(if p != 0.0 { m } else { f64::INFINITY });
        }
        if let Some(from) = table.clamped_from {
            // Only |x| >= from can be clamped: the two ends of the row.
            let from = from as usize;
            if from <= step {
                let left = (step - from) / 2;
                let right = (step + from).div_ceil(2);
                for k in (0..=left).chain(right..=step) {
                    let x = 2 * k as i64 - step as i64;
                    let p = cur[k];
                    if p == 0.0 || !table.get(x).clamped {
                        continue;
                    }
                    if policy == ClampPolicy::Strict {
                        let p_up = 0.5 + profile.drift(x);
                        return Err(Error::CouplingOutOfRange { x, p_up });
                    }
                    clamped_mass += p;
                    let ax = x.abs();
                    if first_violation.is_none_or(|v| ax < v) {
                        first_violation = Some(ax);
                    }
                }
            }
        }

        next.clear();
        next.resize(step + 2, 0.0);
        // next[j] at x' = -(step+1) + 2j receives up-moves from cur[j-1]
        // and down-moves from cur[j]. Subnormal tails are flushed to zero:
        // they carry nothing and slow every later step down.
        let flush = |v: f64| if v < f64::MIN_POSITIVE { 0.0 } else { v };
        next[0] = flush(cur[0] * downs[0]);
        next[step + 1] = flush(cur[step] * ups[step]);
        for ((slot, w), (&u, &d)) in next[1..=step]
            .iter_mut()
            .zip(cur.windows(2))
            .zip(ups.iter().zip(&downs[1..]))
        {
            *slot = flush(w[0] * u + w[1] * d);
        }
        std::mem::swap(&mut cur, &mut next);
        observe(step + 1, &cur);
    }

    if worst_margin == f64::INFINITY {
        worst_margin = 0.5;
    }
    let report = ValidityReport {
        valid: clamped_mass == 0.0 && worst_margin >= 0.0,
        worst_margin,
        first_violation_x: first_violation,
        clamped_mass,
    };
    Ok((LatticePdf { n, probs: cur }, report))
}

/// `⟨x_k²⟩` for every step `k = 0..=n`.
pub fn second_moments_by_step(n: usize, profile: &CouplingProfile) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    evolve_observed(n, profile, ClampPolicy::Clamp, |step, probs| {
        let m2 = compensated_sum(probs.iter().enumerate().map(|(i, &p)| {
            let x = (2 * i as i64 - step as i64) as f64;
            x * x * p
        }));
        out.push(m2);
    })?;
    Ok(out)
}

/// Exact distribution after `n` steps for a constant rational coupling.
///
/// Transfer probabilities outside `[0, 1]` are carried through unchanged;
/// the result is the formal solution of the recurrence.
pub fn evolve_exact(n: usize, epsilon: &BigRational) -> Vec<BigRational> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut cur = vec![BigRational::one()];
    for step in 0..n {
        let mut next = vec![BigRational::zero(); step + 2];
        for (i, p) in cur.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let x = BigRational::from_integer(BigInt::from(2 * i as i64 - step as i64));
            let drift = &x * epsilon;
            let up = &half + &drift;
            let down = &half - &drift;
            next[i + 1] += p * up;
            next[i] += p * down;
        }
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub mean: f64,
    /// Central moments of order 2..=max_order; `central[k-2]` is order `k`.
    pub central: Vec<f64>,
    pub variance: f64,
    pub fourth: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl MomentReport {
    pub fn central_moment(&self, order: usize) -> Option<f64> {
        order
            .checked_sub(2)
            .and_then(|k| self.central.get(k).copied())
    }
}

/// Central moments of a lattice distribution up to `max_order`.
pub fn moments(pdf: &LatticePdf, max_order: usize) -> Result<MomentReport> {
    if max_order < 2 {
        return Err(Error::InvalidParameter(format!(
            "max_order must be >= 2, got {max_order}"
        )));
    }
    let mean = pdf.raw_moment(1);
    let central: Vec<f64> = (2..=max_order)
        .map(|k| {
            compensated_sum(
                pdf.iter()
                    .map(|(x, p)| (x as f64 - mean).powi(k as i32) * p),
            )
        })
        .collect();
    let variance = central[0];
    let fourth = central.get(2).copied();
    let kurtosis = match fourth {
        Some(m4) => {
            if variance == 0.0 {
                return Err(Error::DegeneratePdf);
            }
            Some(m4 / (variance * variance))
        }
        None => None,
    };
    Ok(MomentReport {
        n: pdf.n,
        mean,
        central,
        variance,
        fourth,
        kurtosis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub variance_over_n: f64,
    pub kurtosis: f64,
}

/// Variance/N and kurtosis under `ε = κ/N` for each `N`. Rows come back in
/// input order.
pub fn kurtosis_study(n_values: &[usize], kappa: f64) -> Result<Vec<ConvergenceRow>> {
    if let Some(&bad) = n_values.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidParameter(format!(
            "step counts must be >= 2, got {bad}"
        )));
    }
    n_values
        .par_iter()
        .map(|&n| {
            let (pdf, _) = evolve(n, &CouplingProfile::renormalized(kappa, n))?;
            let m = moments(&pdf, 4)?;
            Ok(ConvergenceRow {
                n,
                variance_over_n: m.variance / n as f64,
                kurtosis: m.kurtosis.expect("order 4 requested"),
            })
        })
        .collect()
}
