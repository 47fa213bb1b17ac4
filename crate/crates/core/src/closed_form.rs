//! Closed-form generating function and cumulant formulas for the constant
//! coupling walk, evaluated in exact rational arithmetic.
//!
//! The generating function is `Z_N(q) = Σ P_N(x) qˣ`. Its closed form
//! contains the alternating sum `Σ (−1)^{i+k} C(k,i) (2i−k)^N`, which cancels
//! catastrophically in floating point, so everything here works on
//! [`BigRational`] and only converts at the very end. The lattice DP remains
//! the production path; this module exists to check it.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, CouplingProfile};

pub type Rational = BigRational;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn big_binomial(n: u32, k: u32) -> BigInt {
    binomial(BigInt::from(n), BigInt::from(k))
}

/// Exact rational from an `f64`, keeping every bit of its binary value.
pub fn rational_from_f64(v: f64) -> Result<BigRational> {
    BigRational::from_float(v)
        .ok_or_else(|| Error::InvalidParameter(format!("value is not finite: {v}")))
}

/// Parameters of `Z_N(q)` with a non-zero rational coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct GenFuncSpec {
    n: u32,
    epsilon: BigRational,
    /// `1/(2ε)`
    inv_two_eps: BigRational,
}

impl GenFuncSpec {
    pub fn new(n: u32, epsilon: BigRational) -> Result<Self> {
        if epsilon.is_zero() {
            return Err(Error::InvalidParameter(
                "epsilon = 0 has no closed form; use the Gaussian limit".into(),
            ));
        }
        let inv_two_eps = (int(2) * &epsilon).recip();
        Ok(GenFuncSpec {
            n,
            epsilon,
            inv_two_eps,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.epsilon
    }

    /// `(2ε)^{N−1} C(1/(2ε)+N, N) / (1/(2ε)+k)` for `k = 1..=N`.
    ///
    /// The generalised binomial is `Π_{j=1..N} (1/(2ε)+j) / N!`, so the
    /// `k`-th denominator cancels against one of its factors. Computing the
    /// product with that factor left out keeps the expression finite where
    /// `1/(2ε) + k = 0`; there the singularity is removable.
    fn term_weights(&self) -> Vec<BigRational> {
        let n = self.n as usize;
        let factors: Vec<BigRational> =
            (1..=n as i64).map(|j| &self.inv_two_eps + int(j)).collect();
        let mut prefix = vec![BigRational::one(); n + 1];
        for j in 0..n {
            prefix[j + 1] = &prefix[j] * &factors[j];
        }
        let mut suffix = vec![BigRational::one(); n + 1];
        for j in (0..n).rev() {
            suffix[j] = &suffix[j + 1] * &factors[j];
        }
        let scale = pow_signed(&(int(2) * &self.epsilon), n as i64 - 1)
            / BigRational::from_integer((1..=n).map(BigInt::from).product());
        (0..n)
            .map(|k| &scale * &prefix[k] * &suffix[k + 1])
            .collect()
    }

    /// The same weights over one common denominator. With `1/(2ε) = A/D`
    /// the `k`-th weight is `Π_{j≠k}(A + jD) / (A^{N−1} N!)`, so the moment
    /// sums can run in integers and reduce once at the end.
    fn integer_weights(&self) -> (Vec<BigInt>, BigInt) {
        let n = self.n as usize;
        let (a, d) = (self.inv_two_eps.numer(), self.inv_two_eps.denom());
        let factors: Vec<BigInt> = (1..=n as i64).map(|j| a + d * BigInt::from(j)).collect();
        let mut prefix = vec![BigInt::one(); n + 1];
        for j in 0..n {
            prefix[j + 1] = &prefix[j] * &factors[j];
        }
        let mut suffix = vec![BigInt::one(); n + 1];
        for j in (0..n).rev() {
            suffix[j] = &suffix[j + 1] * &factors[j];
        }
        let factorial: BigInt = (1..=n).map(BigInt::from).product();
        let denom = num_traits::pow(a.clone(), n - 1) * factorial;
        ((0..n).map(|k| &prefix[k] * &suffix[k + 1]).collect(), denom)
    }
}

fn pow_signed(base: &BigRational, exp: i64) -> BigRational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

fn check_q(q: &BigRational) -> Result<()> {
    if q.is_zero() || q.abs().is_one() {
        return Err(Error::SingularEvaluationPoint(q.to_string()));
    }
    Ok(())
}

/// Closed-form `Z_N(q)`:
///
/// ```text
/// (2ε)^{N−1} C(1/(2ε)+N, N) Σ_{k=1..N} (1/4)^k C(N,k)
///     Σ_{i=0..k} (−1)^{i+k} C(k,i) (2i−k)^N ((1−q)/(1+q))^{2i} (q + 1/q + 2)^k
///     / (1/(2ε) + k)
/// ```
pub fn z_closed_eval(spec: &GenFuncSpec, q: &BigRational) -> Result<BigRational> {
    check_q(q)?;
    if spec.n == 0 {
        return Ok(BigRational::one());
    }
    let n = spec.n;
    let ratio_sq = {
        let r = (int(1) - q) / (int(1) + q);
        &r * &r
    };
    let outer = q + q.recip() + int(2);
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));

    let weights = spec.term_weights();
    let mut total = BigRational::zero();
    let mut quarter_pow = BigRational::one();
    let mut outer_pow = BigRational::one();
    for k in 1..=n {
        quarter_pow *= &quarter;
        outer_pow *= &outer;
        let mut inner = BigRational::zero();
        let mut ratio_pow = BigRational::one();
        for i in 0..=k {
            let sign = if (i + k) % 2 == 0 { 1 } else { -1 };
            let base = BigInt::from(2 * i as i64 - k as i64);
            let term = BigInt::from(sign) * big_binomial(k, i) * num_traits::pow(base, n as usize);
            inner += BigRational::from_integer(term) * &ratio_pow;
            ratio_pow *= &ratio_sq;
        }
        let numer =
            &quarter_pow * BigRational::from_integer(big_binomial(n, k)) * inner * &outer_pow;
        total += numer * &weights[k as usize - 1];
    }
    Ok(total)
}

/// Laurent polynomial `Σ P(x) qˣ` of an exact lattice distribution.
pub fn z_dp_eval(probs: &[BigRational], q: &BigRational) -> Result<BigRational> {
    if q.is_zero() {
        return Err(Error::SingularEvaluationPoint(q.to_string()));
    }
    let n = probs.len() as i64 - 1;
    let q_sq = q * q;
    let mut power = pow_signed(q, -n);
    let mut total = BigRational::zero();
    for p in probs {
        total += p * &power;
        power *= &q_sq;
    }
    Ok(total)
}

/// `Z_N(q)` through the exact rational DP.
pub fn z_dp_eval_spec(spec: &GenFuncSpec, q: &BigRational) -> Result<BigRational> {
    let probs = lattice::evolve_exact(spec.n as usize, &spec.epsilon);
    z_dp_eval(&probs, q)
}

/// `⟨x²⟩` from the closed-form finite sum, exactly.
pub fn variance_exact_rational(n: u32, epsilon: &BigRational) -> Result<BigRational> {
    if epsilon.is_zero() {
        return Ok(int(n as i64));
    }
    let spec = GenFuncSpec::new(n, epsilon.clone())?;
    let (weights, denom) = spec.integer_weights();
    let nn = n as usize;
    let mut sum = BigInt::zero();
    for k in 1..=n as i64 {
        let bracket =
            -num_traits::pow(BigInt::from(2 - k), nn) + num_traits::pow(BigInt::from(-k), nn);
        let sign = if k % 2 == 0 { 1 } else { -1 };
        sum +=
            BigInt::from(sign * k) * big_binomial(n, k as u32) * bracket * &weights[k as usize - 1];
    }
    Ok(BigRational::new(sum, denom * BigInt::from(2)))
}

/// `⟨x⁴⟩` from the closed-form finite sum, exactly.
pub fn fourth_exact_rational(n: u32, epsilon: &BigRational) -> Result<BigRational> {
    if epsilon.is_zero() {
        let nn = n as i64;
        return Ok(int(nn * (3 * nn - 2)));
    }
    let spec = GenFuncSpec::new(n, epsilon.clone())?;
    let (weights, denom) = spec.integer_weights();
    let nn = n as usize;
    let p = |base: i64| num_traits::pow(BigInt::from(base), nn);
    let mut sum = BigInt::zero();
    for k in 1..=n as i64 {
        let (a, b, c) = (p(2 - k), p(4 - k), p(-k));
        let bracket = BigInt::from(-4) * &a
            + BigInt::from(3) * &b
            + &c
            + BigInt::from(3 * k) * (BigInt::from(2) * &a - &b - &c);
        let sign = if k % 2 == 0 { -1 } else { 1 };
        // ε / (2 + 4kε) = 1 / (4 (1/(2ε) + k))
        sum +=
            BigInt::from(sign * k) * big_binomial(n, k as u32) * bracket * &weights[k as usize - 1];
    }
    Ok(BigRational::new(sum, denom * BigInt::from(4)))
}

pub fn variance_exact(n: u32, epsilon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    let v = variance_exact_rational(n, &rational_from_f64(epsilon)?)?;
    Ok(v.to_f64().unwrap_or(f64::NAN))
}

pub fn fourth_exact(n: u32, epsilon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    let v = fourth_exact_rational(n, &rational_from_f64(epsilon)?)?;
    Ok(v.to_f64().unwrap_or(f64::NAN))
}

/// `⟨x²⟩ ≈ N + 2N(N−1)ε + (8/3)N(N−1)(N−2)ε²`. Meaningful while `|ε|N ≪ 1`.
pub fn variance_series(n: u32, epsilon: f64) -> f64 {
    let n = n as f64;
    n + 4.0 * n * (n - 1.0) / 2.0 * epsilon
        + 16.0 * n * (n - 1.0) * (n - 2.0) / 6.0 * epsilon * epsilon
}

/// `⟨x⁴⟩ ≈ N(3N−2) + 4N(N−1)(3N−4)ε + (28/3)N(N−1)(N−2)(3N − 43/7)ε²`.
pub fn fourth_series(n: u32, epsilon: f64) -> f64 {
    let n = n as f64;
    n * (3.0 * n - 2.0)
        + 8.0 * n * (n - 1.0) / 2.0 * (3.0 * n - 4.0) * epsilon
        + 56.0 * n * (n - 1.0) * (n - 2.0) / 6.0 * (3.0 * n - 43.0 / 7.0) * epsilon * epsilon
}

/// Large-`N` coefficients of the kurtosis in powers of `κ` (with `ε = κ/N`),
/// obtained by dividing the leading-order series of `⟨x⁴⟩/N²` by the square
/// of `⟨x²⟩/N`, truncated at `κ²`.
pub fn kurtosis_limit_coefficients() -> [Rational64; 3] {
    // ⟨x²⟩/N → 1 + 2κ + (8/3)κ²;  ⟨x⁴⟩/N² → 3 + 12κ + 28κ².
    let var = [
        Rational64::from_integer(1),
        Rational64::from_integer(2),
        Rational64::new(8, 3),
    ];
    let fourth = [
        Rational64::from_integer(3),
        Rational64::from_integer(12),
        Rational64::from_integer(28),
    ];
    let denom = [
        var[0] * var[0],
        var[0] * var[1] * 2,
        var[1] * var[1] + var[0] * var[2] * 2,
    ];
    let mut out = [Rational64::zero(); 3];
    for k in 0..3 {
        let mut acc = fourth[k];
        for j in 0..k {
            acc -= out[j] * denom[k - j];
        }
        out[k] = acc / denom[0];
    }
    out
}

/// Large-`N` kurtosis through second order in `κ`.
pub fn kurtosis_limit(kappa: f64) -> f64 {
    let c = kurtosis_limit_coefficients();
    let f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
    f(c[0]) + f(c[1]) * kappa + f(c[2]) * kappa * kappa
}

/// `H = 1 + 2κ + (8/3)κ²`, the large-`N` limit of `⟨x²⟩/N` through `κ²`.
pub fn hurst_amplitude(kappa: f64) -> f64 {
    1.0 + 2.0 * kappa + 8.0 / 3.0 * kappa * kappa
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_nan() || kappa.abs() > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "|kappa| must be <= 1/2, got {kappa}"
        )));
    }
    Ok(())
}

/// Growth exponent `h` in `⟨|x|⟩ ~ N^h` implied by `⟨x²⟩ ≈ N·H`.
///
/// `H` does not depend on `N`, so `d ln √(N·H) / d ln N = 1/2` for every
/// admissible `κ`; the coupling only shifts the amplitude. The sampler's
/// regression estimate is the empirical counterpart.
pub fn hurst_h(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    // ln √(N·H) = ½ ln N + ½ ln H
    Ok(0.5)
}

/// `E[ΔS_{n+1} ΔS_{n+L}] = 2ε (1+2ε)^{L−2} (1 + 2ε ⟨x_n²⟩)` for a constant
/// coupling, given the second moment at the earlier time.
pub fn increment_autocorrelation(epsilon: f64, lag_l: usize, second_moment: f64) -> f64 {
    2.0 * epsilon
        * (1.0 + 2.0 * epsilon).powi(lag_l as i32 - 2)
        * (1.0 + 2.0 * epsilon * second_moment)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocorrResult {
    /// `L − 1`.
    pub lag: usize,
    /// With `⟨x²⟩` the exact variance after `N` steps.
    pub value_exact: f64,
    /// `(2κ/N)(1 + 2Hκ)`.
    pub value_leading: f64,
    pub h_factor: f64,
}

/// Increment autocorrelation at lag `L − 1` under `ε = κ/N`.
pub fn autocorrelation(n: usize, kappa: f64, lag_l: usize) -> Result<AutocorrResult> {
    if lag_l < 2 {
        return Err(Error::InvalidParameter(format!(
            "L must be >= 2, got {lag_l}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    check_kappa(kappa)?;
    let epsilon = kappa / n as f64;
    let (pdf, _) = lattice::evolve(n, &CouplingProfile::constant(epsilon))?;
    let second = lattice::moments(&pdf, 2)?.variance;
    let h = hurst_amplitude(kappa);
    Ok(AutocorrResult {
        lag: lag_l - 1,
        value_exact: increment_autocorrelation(epsilon, lag_l, second),
        value_leading: 2.0 * kappa / n as f64 * (1.0 + 2.0 * h * kappa),
        h_factor: h,
    })
}

/// Parse `"a/b"`, an integer or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    Ok(BigRational::from_integer(numer) * pow_signed(&ten, scale as i64))
}

/// Convenience for tests and the CLI: `i64` ratio.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_step_generating_function() {
        let spec = GenFuncSpec::new(1, ratio(3, 7)).unwrap();
        assert_eq!(z_closed_eval(&spec, &int(2)).unwrap(), ratio(5, 4));
        assert_eq!(z_dp_eval_spec(&spec, &int(2)).unwrap(), ratio(5, 4));
    }

    #[test]
    fn two_step_generating_function_by_hand() {
        let eps = ratio(1, 100);
        let spec = GenFuncSpec::new(2, eps.clone()).unwrap();
        let expected = ratio(25, 16) + ratio(9, 800);
        assert_eq!(z_closed_eval(&spec, &int(2)).unwrap(), expected);
        // (1/4 + ε/2)(q² + q⁻²) + (1/2 − ε) at q = 2.
        let by_hand = (ratio(1, 4) + &eps / int(2)) * ratio(17, 4) + ratio(1, 2) - eps;
        assert_eq!(by_hand, expected);
    }

    #[test]
    fn gaussian_limit_polynomial() {
        let probs = lattice::evolve_exact(4, &BigRational::zero());
        let z = z_dp_eval(&probs, &int(3)).unwrap();
        assert_eq!(z, num_traits::pow(ratio(5, 3), 4));
    }

    #[test]
    fn dp_polynomial_is_normalised_at_one() {
        for n in 0..8 {
            let probs = lattice::evolve_exact(n, &ratio(1, 20));
            assert_eq!(z_dp_eval(&probs, &int(1)).unwrap(), BigRational::one());
        }
    }

    #[test]
    fn closed_form_matches_dp_at_six_steps() {
        let spec = GenFuncSpec::new(6, ratio(1, 20)).unwrap();
        let q = ratio(3, 2);
        assert_eq!(
            z_closed_eval(&spec, &q).unwrap(),
            z_dp_eval_spec(&spec, &q).unwrap()
        );
    }

    #[test]
    fn singular_points_rejected() {
        let spec = GenFuncSpec::new(3, ratio(1, 10)).unwrap();
        for q in [int(0), int(1), int(-1)] {
            assert!(matches!(
                z_closed_eval(&spec, &q),
                Err(Error::SingularEvaluationPoint(_))
            ));
        }
    }

    #[test]
    fn removable_denominator_matches_dp() {
        // 1/(2ε) = −3 hits k = 3; the prefactor cancels it.
        let eps = ratio(-1, 6);
        let spec = GenFuncSpec::new(5, eps.clone()).unwrap();
        let q = ratio(3, 2);
        assert_eq!(
            z_closed_eval(&spec, &q).unwrap(),
            z_dp_eval_spec(&spec, &q).unwrap()
        );
        let probs = lattice::evolve_exact(5, &eps);
        let second: BigRational = probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * int((2 * i as i64 - 5).pow(2)))
            .sum();
        assert_eq!(variance_exact_rational(5, &eps).unwrap(), second);
        assert!(GenFuncSpec::new(2, BigRational::zero()).is_err());
    }

    #[test]
    fn exact_moments_small_cases() {
        for eps in [0.1, -0.04, 0.25] {
            assert_relative_eq!(
                variance_exact(2, eps).unwrap(),
                2.0 + 4.0 * eps,
                max_relative = 1e-15
            );
            assert_eq!(fourth_exact(1, eps).unwrap(), 1.0);
        }
        assert_eq!(variance_exact(40, 0.0).unwrap(), 40.0);
        assert_eq!(fourth_exact(40, 0.0).unwrap(), 40.0 * 118.0);
    }

    #[test]
    fn exact_moments_match_rational_dp() {
        for n in [3u32, 7, 11] {
            let eps = ratio(-1, 25);
            let probs = lattice::evolve_exact(n as usize, &eps);
            let mut m2 = BigRational::zero();
            let mut m4 = BigRational::zero();
            for (i, p) in probs.iter().enumerate() {
                let x = int(2 * i as i64 - n as i64);
                let x2 = &x * &x;
                m2 += p * &x2;
                m4 += p * &x2 * &x2;
            }
            assert_eq!(variance_exact_rational(n, &eps).unwrap(), m2);
            assert_eq!(fourth_exact_rational(n, &eps).unwrap(), m4);
        }
    }

    /// Second moment as a polynomial in ε, by propagating the recurrence
    /// with polynomial-valued probabilities truncated at `degree`.
    fn variance_polynomial(n: usize, degree: usize) -> Vec<BigRational> {
        let half = ratio(1, 2);
        let mut cur = vec![vec![BigRational::one()]];
        for step in 0..n {
            let mut next = vec![vec![BigRational::zero(); degree + 1]; step + 2];
            for (i, poly) in cur.iter().enumerate() {
                let x = int(2 * i as i64 - step as i64);
                for (d, c) in poly.iter().enumerate() {
                    next[i + 1][d] += c * &half;
                    next[i][d] += c * &half;
                    if d < degree {
                        next[i + 1][d + 1] += c * &x;
                        next[i][d + 1] -= c * &x;
                    }
                }
            }
            cur = next;
        }
        let mut out = vec![BigRational::zero(); degree + 1];
        for (i, poly) in cur.iter().enumerate() {
            let x = int(2 * i as i64 - n as i64);
            for (d, c) in poly.iter().enumerate() {
                out[d] += c * &x * &x;
            }
        }
        out
    }

    #[test]
    fn variance_series_matches_polynomial_oracle() {
        let coeffs = variance_polynomial(12, 3);
        let n = 12.0;
        assert_eq!(coeffs[0], int(12));
        assert_eq!(coeffs[1].to_f64().unwrap(), 2.0 * n * (n - 1.0));
        assert_eq!(
            coeffs[2].to_f64().unwrap(),
            8.0 / 3.0 * n * (n - 1.0) * (n - 2.0)
        );
    }

    #[test]
    fn series_truncation_error_is_cubic() {
        let (n, eps) = (40u32, 0.001);
        let exact = variance_exact(n, eps).unwrap();
        let series = variance_series(n, eps);
        let cubic = variance_polynomial(40, 3)[3].to_f64().unwrap() * eps.powi(3);
        let err = exact - series;
        assert!(err > 0.9 * cubic && err < 1.1 * cubic, "{err} vs {cubic}");
        assert_eq!(variance_series(17, 0.0), 17.0);
    }

    #[test]
    fn fourth_series_agrees_to_cubic_order() {
        let (n, eps) = (30u32, 1e-4);
        let exact = fourth_exact(n, eps).unwrap();
        let series = fourth_series(n, eps);
        let scale = fourth_series(n, 0.0);
        assert!((exact - series).abs() / scale < 1e-6, "{exact} vs {series}");
    }

    #[test]
    fn kurtosis_series_cancels() {
        let c = kurtosis_limit_coefficients();
        assert_eq!(c[0], Rational64::from_integer(3));
        assert_eq!(c[1], Rational64::zero());
        assert_eq!(c[2], Rational64::zero());
        assert_eq!(kurtosis_limit(0.1), 3.0);
        assert_eq!(kurtosis_limit(-0.37), 3.0);
    }

    #[test]
    fn hurst_values() {
        assert_eq!(hurst_h(0.0).unwrap(), 0.5);
        assert_eq!(hurst_h(0.4).unwrap(), 0.5);
        assert!(hurst_h(0.7).is_err());
        assert_relative_eq!(
            hurst_amplitude(0.4),
            2.226_666_666_666_667,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            hurst_amplitude(-0.4),
            0.626_666_666_666_666_7,
            max_relative = 1e-12
        );
    }

    #[test]
    fn autocorrelation_forms() {
        for lag in 2..6 {
            let r = autocorrelation(50, 0.0, lag).unwrap();
            assert_eq!(r.value_exact, 0.0);
            assert_eq!(r.value_leading, 0.0);
            assert_eq!(r.lag, lag - 1);
        }
        let (n, kappa) = (30usize, 0.3);
        let r = autocorrelation(n, kappa, 2).unwrap();
        let eps = kappa / n as f64;
        let var = variance_exact(n as u32, eps).unwrap();
        assert_relative_eq!(
            r.value_exact,
            2.0 * eps * (1.0 + 2.0 * eps * var),
            max_relative = 1e-12
        );
        assert!(autocorrelation(30, 0.3, 1).is_err());
        let neg = autocorrelation(30, -0.3, 3).unwrap();
        assert!(neg.value_exact < 0.0);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-1/3").unwrap(), ratio(-1, 3));
        assert_eq!(parse_rational("0.04").unwrap(), ratio(1, 25));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("2.5e-1").unwrap(), ratio(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }
}
