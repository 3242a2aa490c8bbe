//! `E[q_min]` by two exact routes, the pair sum `S(t)`, and the asymptotic
//! `E[q_min] ~ (16/π²) δ^(-1/2)`.
//!
//! The PMF route sums `q · p(q)` over the full table. The Möbius route uses
//! `E = 3δ + Σ_d μ(d)/d · S(δd²)`, where
//! `S(t) = Σ_{a ≠ b} Π(1/a, 1/b; t(a+b))` is a finite sum over `ab < 1/t`.
//! Both end in one exact rational, and they must agree.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numtheory::sieve;
use crate::pmf::{check_delta, pmf_with_cap, DEFAULT_Q_CAP};
use crate::quadrature::adaptive_simpson;
use crate::rational::Rational;
use crate::sum::harmonic_sum;

/// `16/π²`.
pub const ASYMPTOTIC_CONSTANT: f64 = 16.0 / (PI * PI);

/// `E[q_min]` as `Σ q p(q)`, with the default PMF cap.
pub fn expected_value_pmf(delta: &Rational) -> Result<Rational> {
    expected_value_pmf_with_cap(delta, DEFAULT_Q_CAP)
}

pub fn expected_value_pmf_with_cap(delta: &Rational, cap: u64) -> Result<Rational> {
    Ok(pmf_with_cap(delta, cap)?.expected_value())
}

/// `⌊1/t⌋` for positive `t`.
fn floor_recip(t: &Rational) -> Result<u64> {
    t.denom().div_floor(t.numer()).to_u64().ok_or(Error::Overflow)
}

/// `S(t)/2 = t·A + Σ c[n-1]/n`, summed over pairs `a < b`.
struct PairTerms {
    weight: i128,
    coeffs: Vec<i64>,
}

/// With `G = ⌊1/t⌋` and `T = t(a+b)`, the pair `a < b` contributes `T` if
/// `b(a+b) <= G`, `1/b` if `a(a+b) <= G`, `1/a + 1/b - T` if `ab <= G`,
/// and nothing otherwise.
fn pair_terms(g: u64) -> PairTerms {
    let mut weight = 0i128;
    let mut coeffs = vec![0i64; g as usize];
    let mut a = 1u64;
    while a * (a + 1) <= g {
        let mut b = a + 1;
        while a * b <= g {
            let s = a + b;
            if b * s <= g {
                weight += s as i128;
            } else if a * s <= g {
                coeffs[(b - 1) as usize] += 1;
            } else {
                coeffs[(a - 1) as usize] += 1;
                coeffs[(b - 1) as usize] += 1;
                weight -= s as i128;
            }
            b += 1;
        }
        a += 1;
    }
    PairTerms { weight, coeffs }
}

/// `S(t)`, exactly. Zero for `t >= 1/2`.
pub fn s_function(t: &Rational) -> Result<Rational> {
    if !t.is_positive() {
        return Err(invalid(format!("S(t) needs t > 0, got {t}")));
    }
    let g = floor_recip(t)?;
    if g < 2 {
        return Ok(Rational::zero());
    }
    let terms = pair_terms(g);
    let harmonic = harmonic_sum(&terms.coeffs, &sieve(g)?);
    let half = t.mul_int(&BigInt::from(terms.weight)) + harmonic;
    Ok(half.mul_int(&BigInt::from(2)))
}

/// Largest `d` with `δd² < 1/2`; larger `d` give `S(δd²) = 0`.
pub fn mobius_range(delta: &Rational) -> u64 {
    // δd² < 1/2  <=>  2·num·d² < den
    let (num, den) = (delta.numer(), delta.denom());
    let mut d = (1.0 / (2.0 * delta.to_f64())).sqrt() as u64 + 2;
    while d > 0 && BigInt::from(2u32) * num * BigInt::from(d) * BigInt::from(d) >= *den {
        d -= 1;
    }
    d
}

/// `E[q_min] = 3δ + Σ_d μ(d)/d · S(δd²)`, exactly, for `δ < 1/2`.
///
/// Each `S(δd²)` is `2(δd² A_d + Σ_n c_d[n]/n)`, so after dividing by `d`
/// all terms share the form `δ K + Σ_m C[m]/m` with `m = dn <= ⌊1/δ⌋`. The
/// integer coefficients are accumulated across every `d` first and the unit
/// fraction sum is taken once.
pub fn expected_value_mobius(delta: &Rational) -> Result<Rational> {
    check_delta(delta)?;
    if *delta >= Rational::new(1, 2)? {
        return Err(invalid(format!("the Möbius route needs δ < 1/2, got {delta}")));
    }
    let f = floor_recip(delta)?;
    let table = sieve(f)?;
    let mut weight = 3i128;
    let mut coeffs = vec![0i64; f as usize];
    for d in 1..=mobius_range(delta) {
        let mu = table.mu(d) as i64;
        if mu == 0 {
            continue;
        }
        let t = delta.mul_int(&BigInt::from(d * d));
        let terms = pair_terms(floor_recip(&t)?);
        weight += 2 * mu as i128 * d as i128 * terms.weight;
        for (i, &c) in terms.coeffs.iter().enumerate().filter(|(_, &c)| c != 0) {
            coeffs[(i as u64 + 1) as usize * d as usize - 1] += 2 * mu * c;
        }
    }
    Ok(delta.mul_int(&BigInt::from(weight)) + harmonic_sum(&coeffs, &table))
}

/// `(16/π²) δ^(-1/2)`.
pub fn asymptotic_estimate(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("asymptotic estimate needs 0 < δ <= 1, got {delta}")));
    }
    Ok(ASYMPTOTIC_CONSTANT / delta.sqrt())
}

/// Exact expectation next to its asymptotic approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub delta: Rational,
    pub exact_value: Rational,
    pub asymptotic: f64,
    pub deficit: f64,
    pub normalized_deficit: f64,
}

impl ExpectationReport {
    pub fn new(delta: Rational, exact_value: Rational) -> Result<Self> {
        let d = delta.to_f64();
        let asymptotic = asymptotic_estimate(d)?;
        let deficit = exact_value.to_f64() - asymptotic;
        let log = d.ln();
        Ok(ExpectationReport {
            delta,
            exact_value,
            asymptotic,
            deficit,
            normalized_deficit: deficit / (log * log),
        })
    }

    /// `E √δ π²/16`, which tends to 1.
    pub fn ratio(&self) -> f64 {
        self.exact_value.to_f64() / self.asymptotic
    }

    pub fn row(&self) -> ExpectationRow {
        ExpectationRow {
            delta: self.delta.to_string(),
            exact_num: self.exact_value.numer().to_string(),
            exact_den: self.exact_value.denom().to_string(),
            exact_float: self.exact_value.to_f64(),
            asymptotic: self.asymptotic,
            deficit: self.deficit,
            normalized_deficit: self.normalized_deficit,
            ratio: self.ratio(),
        }
    }
}

/// Flat CSV/JSON row of an [`ExpectationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ExpectationRow {
    pub delta: String,
    pub exact_num: String,
    pub exact_den: String,
    pub exact_float: f64,
    pub asymptotic: f64,
    pub deficit: f64,
    pub normalized_deficit: f64,
    pub ratio: f64,
}

/// One report per δ, each computed by the Möbius route.
pub fn asymptotic_diagnostics(deltas: &[Rational]) -> Result<Vec<ExpectationReport>> {
    deltas
        .iter()
        .map(|d| ExpectationReport::new(d.clone(), expected_value_mobius(d)?))
        .collect()
}

/// Outcome of the numerical check of `D = 4 - 2√2` and `C = 8/3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub tolerance: f64,
    pub d_numeric: f64,
    pub d_exact: f64,
    pub d_error: f64,
    pub c_numeric: f64,
    pub c_exact: f64,
    pub c_error: f64,
    /// Estimated quadrature error of `d_numeric`, tail included.
    pub d_uncertainty: f64,
    pub tail_cutoff: f64,
    pub passed: bool,
}

/// Evaluates `D` as the sum of four integrals,
///
/// ```text
/// ∫_1^√2 log σ² + ∫_√2^∞ log(σ²/(σ²-1)) + ∫_0^{1/√2} -log(1-σ²) + ∫_{1/√2}^1 -log σ²,
/// ```
///
/// and `C = 4√2 - 16/3 + 2D`. The infinite integral is cut at `X = √(10/tol)`,
/// where the integrand is below `tol/10`; beyond `X` it lies between `1/σ²`
/// and `1/(σ²-1)`, so the tail lies in `[1/X, ½ log((X+1)/(X-1))]` and the
/// midpoint is used with half the bracket as its error.
pub fn verify_constants(tolerance: f64) -> Result<ConstantsReport> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let budget = tolerance / 100.0;
    let root2 = 2f64.sqrt();
    let cutoff = (10.0 / tolerance).sqrt().max(2.0);
    let pieces = [
        adaptive_simpson(|s| (s * s).ln(), 1.0, root2, budget)?,
        adaptive_simpson(|s| -(-1.0 / (s * s)).ln_1p(), root2, cutoff, budget)?,
        adaptive_simpson(|s| -(-s * s).ln_1p(), 0.0, root2 / 2.0, budget)?,
        adaptive_simpson(|s| -(s * s).ln(), root2 / 2.0, 1.0, budget)?,
    ];
    let tail_lo = 1.0 / cutoff;
    let tail_hi = 0.5 * (2.0 / (cutoff - 1.0)).ln_1p();
    let tail = 0.5 * (tail_lo + tail_hi);
    let d_numeric = pieces.iter().map(|p| p.value).sum::<f64>() + tail;
    let d_uncertainty = pieces.iter().map(|p| p.error).sum::<f64>() + 0.5 * (tail_hi - tail_lo);
    if d_uncertainty >= budget * 10.0 {
        return Err(Error::QuadratureFailure(format!(
            "error estimate {d_uncertainty:e} exceeds the budget for tolerance {tolerance:e}"
        )));
    }
    let d_exact = 4.0 - 2.0 * root2;
    let c_exact = 8.0 / 3.0;
    let c_numeric = 4.0 * root2 - 16.0 / 3.0 + 2.0 * d_numeric;
    let d_error = (d_numeric - d_exact).abs();
    let c_error = (c_numeric - c_exact).abs();
    Ok(ConstantsReport {
        tolerance,
        d_numeric,
        d_exact,
        d_error,
        c_numeric,
        c_exact,
        c_error,
        d_uncertainty,
        tail_cutoff: cutoff,
        passed: d_error < tolerance && c_error < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::pi_kernel;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    // Ordered pairs a != b with ab < 1/t, each through the rational kernel.
    fn s_by_kernel(t: &Rational) -> Rational {
        let g = t.recip().unwrap().floor().to_i64().unwrap();
        let mut total = Rational::zero();
        for a in 1..=g {
            for b in (1..=g).filter(|&b| b != a && a * b <= g) {
                let (alpha, beta) = (Rational::unit(a).unwrap(), Rational::unit(b).unwrap());
                total += pi_kernel(&alpha, &beta, &t.mul_int(&BigInt::from(a + b))).unwrap();
            }
        }
        total
    }

    #[test]
    fn s_examples() {
        assert_eq!(s_function(&r("1/4")).unwrap(), r("5/3"));
        for t in ["1/2", "3/4", "1", "7/13", "5", "1/2"] {
            assert_eq!(s_function(&r(t)).unwrap(), Rational::zero(), "t={t}");
        }
        assert!(s_function(&r("0")).is_err());
        assert!(s_function(&r("-1/3")).is_err());
    }

    #[test]
    fn s_matches_kernel_enumeration() {
        for t in ["1/3", "2/5", "1/7", "1/10", "3/100", "1/64", "2/201"] {
            let t = r(t);
            assert_eq!(s_function(&t).unwrap(), s_by_kernel(&t), "t={t}");
        }
    }

    #[test]
    fn s_times_root_t_approaches_eight_thirds() {
        let gaps: Vec<f64> = ["1/100", "1/1000", "1/10000"]
            .iter()
            .map(|t| {
                let t = r(t);
                (s_function(&t).unwrap().to_f64() * t.to_f64().sqrt() - 8.0 / 3.0).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[2] < 0.15);
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(expected_value_mobius(&r("1/4")).unwrap(), r("29/12"));
        assert_eq!(expected_value_pmf(&r("1/4")).unwrap(), r("29/12"));
        assert_eq!(expected_value_pmf(&r("1/2")).unwrap(), r("3/2"));
        assert_eq!(mobius_range(&r("1/1000")), 22);
        assert_eq!(mobius_range(&r("1/4")), 1);
        // δd² = 1/2 exactly at d = 1 for δ = 1/2; at d = 2 for δ = 1/8
        assert_eq!(mobius_range(&r("1/8")), 1);
        assert_eq!(mobius_range(&r("1/9")), 2);
        assert!(expected_value_mobius(&r("1/2")).is_err());
        assert!(expected_value_mobius(&r("0")).is_err());
    }

    #[test]
    fn routes_agree() {
        for d in ["1/3", "1/10", "2/7", "3/100", "1/100", "13/1000", "1/1000"] {
            let d = r(d);
            assert_eq!(
                expected_value_pmf(&d).unwrap(),
                expected_value_mobius(&d).unwrap(),
                "δ={d}"
            );
        }
    }

    #[test]
    fn lower_bound_and_monotone() {
        let tenth = expected_value_pmf(&r("1/10")).unwrap();
        assert!(tenth >= r("3/10"));
        let grid: Vec<Rational> = (3..60).map(|n| Rational::new(1, n).unwrap()).collect();
        let values: Vec<Rational> = grid.iter().map(|d| expected_value_pmf(d).unwrap()).collect();
        assert!(values.iter().all(|v| *v >= Rational::one()));
        assert!(values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn asymptotic_examples() {
        assert!((asymptotic_estimate(1.0).unwrap() - 1.6211389).abs() < 1e-7);
        assert!((asymptotic_estimate(0.25).unwrap() - 3.2422778).abs() < 1e-7);
        assert!((asymptotic_estimate(1e-4).unwrap() - 162.11389).abs() < 1e-5);
        assert!(asymptotic_estimate(0.0).is_err());
        assert!(asymptotic_estimate(f64::NAN).is_err());
        assert!(asymptotic_estimate(1.5).is_err());
    }

    #[test]
    fn diagnostics_trend() {
        let deltas: Vec<Rational> = ["1/100", "1/1000", "1/10000"].iter().map(|d| r(d)).collect();
        let reports = asymptotic_diagnostics(&deltas).unwrap();
        let gaps: Vec<f64> = reports.iter().map(|x| (x.ratio() - 1.0).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
        for x in &reports {
            assert!(x.ratio().is_finite() && x.ratio() > 0.0);
            assert!(x.asymptotic > 0.0);
            assert!(x.normalized_deficit.abs() <= 2.0 * reports[0].normalized_deficit.abs());
        }
    }

    #[test]
    fn constants() {
        for tol in [1e-8, 1e-2, 1e-12] {
            let c = verify_constants(tol).unwrap();
            assert!(c.passed, "{c:?}");
            assert!(c.d_error < tol && c.c_error < tol);
        }
        assert!(verify_constants(0.0).is_err());
        assert!(verify_constants(-1.0).is_err());
        // below double precision nothing can be certified
        assert!(matches!(verify_constants(1e-18), Err(Error::QuadratureFailure(_))));
    }

    proptest! {
        #[test]
        fn routes_agree_on_random_delta(num in 1i64..20, den in 41i64..600) {
            let d = Rational::new(num, den).unwrap();
            prop_assert_eq!(expected_value_pmf(&d).unwrap(), expected_value_mobius(&d).unwrap());
        }

        #[test]
        fn s_matches_kernel_on_random_t(num in 1i64..10, den in 1i64..150) {
            let t = Rational::new(num, den).unwrap();
            prop_assert_eq!(s_function(&t).unwrap(), s_by_kernel(&t));
        }
    }
}
