//! The trapezoid kernel Π, the exact probability mass function of `q_min`,
//! and the partition of `[0, 1)` into the sets `I_{a/q}` of centres whose
//! least-denominator witness is `a/q`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::farey::{farey_neighbors, FareyIter};
use crate::numtheory::{gcd, sieve};
use crate::rational::{Fraction, Rational};
use crate::sum::LcmPlan;

/// Largest support bound `⌊1/δ⌋ + 1` the PMF route accepts by default.
pub const DEFAULT_Q_CAP: u64 = 20_000;

/// Largest support bound for the explicit interval decomposition, which
/// materialises one record per element of `F_Q`.
pub const DEFAULT_DECOMPOSITION_CAP: u64 = 2_000;

/// Π(α, β; t): rises with slope 1 up to `min(α, β)`, stays flat up to
/// `max(α, β)`, falls back to zero at `α + β`.
pub fn pi_kernel(alpha: &Rational, beta: &Rational, t: &Rational) -> Result<Rational> {
    if !alpha.is_positive() || !beta.is_positive() {
        return Err(invalid("Π needs positive α and β"));
    }
    if t.is_negative() {
        return Err(invalid("Π needs t >= 0"));
    }
    let (lo, hi) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
    let total = alpha + beta;
    Ok(if t <= lo {
        t.clone()
    } else if t <= hi {
        lo.clone()
    } else if *t <= total {
        total - t
    } else {
        Rational::zero()
    })
}

/// Which of the closed-form shapes `I_{a/q}` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseTag {
    I,
    IIa,
    IIb,
    III,
    IV,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub(crate) fn check_delta(delta: &Rational) -> Result<()> {
    if !delta.is_positive() || *delta >= Rational::one() {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// `⌊1/δ⌋ + 1`.
pub fn support_bound(delta: &Rational) -> Result<u64> {
    check_delta(delta)?;
    let f = delta.denom().div_floor(delta.numer());
    (f + 1u32).to_u64().ok_or(Error::Overflow)
}

/// Case of `I_{a/q}` from the neighbour denominators `q'`, `q''` of `a/q`.
///
/// The cases overlap where one of `1/(qq')`, `1/(qq'')`, `1/(q'q'')` equals
/// δ exactly; the earliest listed case wins there. All competing formulas
/// give the same set on such a tie, so only the tag is affected.
pub fn classify_case(qp: u64, qpp: u64, delta: &Rational) -> Result<CaseTag> {
    check_delta(delta)?;
    if qp == 0 || qpp == 0 {
        return Err(invalid("neighbour denominators must be positive"));
    }
    let q = qp + qpp;
    let unit = |n: u64| Rational::new(1, BigInt::from(n)).expect("nonzero");
    let left = unit(q * qp).cmp(delta);
    let right = unit(q * qpp).cmp(delta);
    let outer = unit(qp * qpp).cmp(delta);
    use std::cmp::Ordering::*;
    Ok(match (left, right) {
        (Greater | Equal, Greater | Equal) => CaseTag::I,
        (Less, Greater | Equal) => CaseTag::IIa,
        (Greater | Equal, Less) => CaseTag::IIb,
        _ if outer != Less => CaseTag::III,
        _ => CaseTag::IV,
    })
}

/// One set `I_{a/q}`: the centres `x` for which `a/q` is the least
/// denominator fraction in `(x - δ/2, x + δ/2)`, as a closed interval.
///
/// The `q = 1` set wraps around the circle: it is stored with `wraps` set
/// and `lo = -δ/2`, `hi = δ/2`. Empty sets keep the endpoints of their
/// formula, so `hi <= lo` there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalRecord {
    pub fraction: Fraction,
    pub case_tag: CaseTag,
    pub lo: Rational,
    pub hi: Rational,
    pub length: Rational,
    pub wraps: bool,
}

pub fn interval_decomposition(delta: &Rational) -> Result<Vec<IntervalRecord>> {
    interval_decomposition_with_cap(delta, DEFAULT_DECOMPOSITION_CAP)
}

pub fn interval_decomposition_with_cap(delta: &Rational, cap: u64) -> Result<Vec<IntervalRecord>> {
    let order = support_bound(delta)?;
    if order > cap {
        return Err(Error::ResourceLimit {
            what: "interval decomposition support bound",
            requested: order,
            cap,
        });
    }
    let half = delta.div_int(&BigInt::from(2))?;
    let mut out = vec![IntervalRecord {
        fraction: Fraction::integer(0),
        case_tag: CaseTag::I,
        lo: -&half,
        hi: half.clone(),
        length: delta.clone(),
        wraps: true,
    }];
    for f in FareyIter::new(order)?.skip(1) {
        let nb = farey_neighbors(f)?;
        let (qp, qpp) = (nb.left_den() as u64, nb.right_den() as u64);
        let tag = classify_case(qp, qpp, delta)?;
        let center = f.to_rational();
        let (lo, hi) = match tag {
            CaseTag::I => (&center - &half, &center + &half),
            CaseTag::IIa => (nb.left.to_rational() + &half, &center + &half),
            CaseTag::IIb => (&center - &half, nb.right.to_rational() - &half),
            CaseTag::III | CaseTag::IV => {
                (nb.left.to_rational() + &half, nb.right.to_rational() - &half)
            }
        };
        let length = if hi > lo { &hi - &lo } else { Rational::zero() };
        out.push(IntervalRecord {
            fraction: f,
            case_tag: tag,
            lo,
            hi,
            length,
            wraps: false,
        });
    }
    Ok(out)
}

/// Checks that the records tile the circle `[0, 1)`: positive-length
/// pieces overlap at most at endpoints and their lengths add up to 1.
pub fn is_circle_partition(records: &[IntervalRecord]) -> bool {
    let total: Rational = records.iter().map(|r| &r.length).sum();
    if total != Rational::one() {
        return false;
    }
    let mut pieces: Vec<(&Rational, &Rational)> = Vec::new();
    let (mut start, mut end) = (Rational::zero(), Rational::one());
    let mut seen_wrap = false;
    for r in records.iter().filter(|r| r.length.is_positive()) {
        if r.wraps {
            if seen_wrap {
                return false;
            }
            seen_wrap = true;
            start = r.hi.clone();
            end = &r.lo + &Rational::one();
        } else {
            pieces.push((&r.lo, &r.hi));
        }
    }
    pieces.sort();
    let mut cursor = start;
    for (lo, hi) in pieces {
        if *lo < cursor {
            return false;
        }
        cursor = hi.clone();
    }
    cursor <= end
}

/// Exact PMF of `q_min` for one δ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmfTable {
    delta: Rational,
    support_bound: u64,
    masses: Vec<Rational>,
}

impl PmfTable {
    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    /// `⌊1/δ⌋ + 1`; no mass lies above it.
    pub fn support_bound(&self) -> u64 {
        self.support_bound
    }

    /// Masses for `q = 1..=support_bound`.
    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    /// `p(q)`, zero outside the support.
    pub fn mass(&self, q: u64) -> Rational {
        if q == 0 || q > self.support_bound {
            return Rational::zero();
        }
        self.masses[(q - 1) as usize].clone()
    }

    pub fn total(&self) -> Rational {
        self.masses.iter().sum()
    }

    /// `Σ q p(q)`.
    pub fn expected_value(&self) -> Rational {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, m)| m.mul_int(&BigInt::from(i as u64 + 1)))
            .sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = PmfRow> + '_ {
        self.masses.iter().enumerate().map(|(i, m)| PmfRow {
            q: i as u64 + 1,
            mass_num: m.numer().to_string(),
            mass_den: m.denom().to_string(),
            mass_float: m.to_f64(),
        })
    }
}

/// Flat CSV/JSON row of a [`PmfTable`].
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct PmfRow {
    pub q: u64,
    pub mass_num: String,
    pub mass_den: String,
    pub mass_float: f64,
}

pub fn pmf(delta: &Rational) -> Result<PmfTable> {
    pmf_with_cap(delta, DEFAULT_Q_CAP)
}

/// `p(1) = δ` and, for `q >= 2`, `p(q) = Σ Π(1/(qa), 1/(qb); δ)` over
/// `a + b = q` with `gcd(a, q) = 1`.
///
/// With `F = ⌊1/δ⌋` each kernel value is one of `δ`, `1/(q·max(a,b))`,
/// `(1/a + 1/b)/q - δ` or 0, decided by integer comparisons against `F`.
/// So `p(q) = k δ + (1/q) Σ c[n]/n` for integers `k`, `c[n]`, and the unit
/// fraction part is summed exactly by a shared [`LcmPlan`].
pub fn pmf_with_cap(delta: &Rational, cap: u64) -> Result<PmfTable> {
    let order = support_bound(delta)?;
    if order > cap {
        return Err(Error::ResourceLimit {
            what: "PMF support bound",
            requested: order,
            cap,
        });
    }
    let floor_inv = order - 1;
    let limit = (order - 1).max(1) as usize;
    let plan = LcmPlan::new(limit, &sieve(limit as u64)?);
    let mut masses = Vec::with_capacity(order as usize);
    masses.push(delta.clone());
    let rest: Vec<Rational> = (2..=order)
        .into_par_iter()
        .map(|q| {
            let (k, coeffs) = mass_terms(q, floor_inv);
            let harmonic = plan
                .evaluate(&coeffs)
                .div_int(&BigInt::from(q))
                .expect("q >= 2");
            harmonic + delta.mul_int(&BigInt::from(k))
        })
        .collect();
    masses.extend(rest);
    Ok(PmfTable {
        delta: delta.clone(),
        support_bound: order,
        masses,
    })
}

/// `(k, c)` with `p(q) = k δ + (1/q) Σ c[n-1]/n`, for `F = ⌊1/δ⌋`.
pub(crate) fn mass_terms(q: u64, floor_inv: u64) -> (i64, Vec<i64>) {
    let mut k = 0i64;
    let mut coeffs = vec![0i64; (q - 1) as usize];
    for a in (1..q).filter(|&a| gcd(a as i64, q as i64) == 1) {
        let b = q - a;
        let (small, large) = if a < b { (a, b) } else { (b, a) };
        if q * large <= floor_inv {
            k += 1;
        } else if q * small <= floor_inv {
            coeffs[(large - 1) as usize] += 1;
        } else if a * b <= floor_inv {
            coeffs[(a - 1) as usize] += 1;
            coeffs[(b - 1) as usize] += 1;
            k -= 1;
        }
    }
    (k, coeffs)
}

/// The same table assembled from the interval decomposition: `p(q)` is the
/// total length of the sets `I_{a/q}` with denominator `q`.
pub fn pmf_by_decomposition(delta: &Rational) -> Result<PmfTable> {
    let records = interval_decomposition(delta)?;
    pmf_from_records(delta, &records)
}

pub fn pmf_from_records(delta: &Rational, records: &[IntervalRecord]) -> Result<PmfTable> {
    let order = support_bound(delta)?;
    let mut masses = vec![Rational::zero(); order as usize];
    for r in records {
        let q = r.fraction.den() as u64;
        if q > order {
            return Err(invalid(format!("record {} beyond the support", r.fraction)));
        }
        masses[(q - 1) as usize] += &r.length;
    }
    Ok(PmfTable {
        delta: delta.clone(),
        support_bound: order,
        masses,
    })
}
