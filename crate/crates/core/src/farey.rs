//! Farey sequences, Farey neighbours, the bijection between `F_Q` and
//! coprime pairs, and the smallest-denominator search in an open interval.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{invalid, Error, Result};
use crate::numtheory::mod_inverse;
use crate::rational::Rational;

pub use crate::rational::{mediant, Fraction};

/// Largest order `farey_sequence` materialises by default; `|F_Q| ≈ 0.3 Q²`.
pub const DEFAULT_FAREY_CAP: u64 = 10_000;

/// Lazy walk through `F_Q` in increasing order using the next-term
/// recurrence `k = ⌊(Q + b) / d⌋`, `(a, b), (c, d) -> (c, d), (kc - a, kd - b)`.
#[derive(Debug, Clone)]
pub struct FareyIter {
    order: i64,
    prev: (i64, i64),
    next: Option<(i64, i64)>,
}

impl FareyIter {
    pub fn new(order: u64) -> Result<Self> {
        if order == 0 {
            return Err(invalid("Farey order must be at least 1"));
        }
        Ok(FareyIter {
            order: order as i64,
            prev: (0, 1),
            next: Some((0, 1)),
        })
    }
}

impl Iterator for FareyIter {
    type Item = Fraction;

    fn next(&mut self) -> Option<Fraction> {
        let cur = self.next?;
        let following = if cur == (0, 1) {
            (1, self.order)
        } else {
            let (a, b) = self.prev;
            let (c, d) = cur;
            let k = (self.order + b) / d;
            (k * c - a, k * d - b)
        };
        self.prev = cur;
        // the walk ends just before 1/1, which is not in F_Q
        self.next = (following.0 < following.1).then_some(following);
        Some(Fraction::new(cur.0, cur.1).expect("positive denominator"))
    }
}

/// All of `F_Q = {a/q : 0 <= a < q <= Q, gcd(a, q) = 1}` in increasing order.
pub fn farey_sequence(order: u64) -> Result<Vec<Fraction>> {
    farey_sequence_with_cap(order, DEFAULT_FAREY_CAP)
}

pub fn farey_sequence_with_cap(order: u64, cap: u64) -> Result<Vec<Fraction>> {
    if order > cap {
        return Err(Error::ResourceLimit {
            what: "Farey sequence order",
            requested: order,
            cap,
        });
    }
    Ok(FareyIter::new(order)?.collect())
}

/// `a'/q' < a/q < a''/q''`, consecutive in `F_q ∪ {1/1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FareyNeighbors {
    pub center: Fraction,
    pub left: Fraction,
    pub right: Fraction,
}

impl FareyNeighbors {
    /// `q'`, the left neighbour's denominator.
    pub fn left_den(&self) -> i64 {
        self.left.den()
    }

    /// `q'' = q - q'`.
    pub fn right_den(&self) -> i64 {
        self.right.den()
    }
}

/// Neighbours of `a/q` from `q' = a⁻¹ mod q` (in `[1, q]`) and `q'' = q - q'`.
pub fn farey_neighbors(f: Fraction) -> Result<FareyNeighbors> {
    let (a, q) = (f.num(), f.den());
    if q < 2 || a < 0 || a >= q {
        return Err(invalid(format!(
            "Farey neighbours need 0 <= a < q with q >= 2, got {f}"
        )));
    }
    let qp = mod_inverse(a, q as u64)? as i64;
    let qpp = q - qp;
    let ap = (a as i128 * qp as i128 - 1) / q as i128;
    let app = (a as i128 * qpp as i128 + 1) / q as i128;
    Ok(FareyNeighbors {
        center: f,
        left: Fraction::new(ap as i64, qp)?,
        right: Fraction::new(app as i64, qpp)?,
    })
}

/// Graph of `φ_Q`: `0/1 ↦ (1, 1)` and `a/q ↦ (q', q)` for `q >= 2`.
pub fn phi_q_map(order: u64) -> Result<Vec<((u64, u64), Fraction)>> {
    farey_sequence(order)?
        .into_iter()
        .map(|f| {
            if f.den() == 1 {
                Ok(((1, 1), f))
            } else {
                let n = farey_neighbors(f)?;
                Ok(((n.left_den() as u64, f.den() as u64), f))
            }
        })
        .collect()
}

/// The fraction of least denominator in the open interval `(lo, hi)`.
///
/// Continued-fraction descent: if `⌊lo⌋ + 1 < hi` that integer is returned;
/// otherwise the integer part is peeled off and the search continues on the
/// reciprocal interval. Each step costs one big-integer division, so the
/// work is proportional to the number of partial quotients of the endpoints.
pub fn smallest_denominator(lo: &Rational, hi: &Rational) -> Result<Fraction> {
    if lo >= hi {
        return Err(Error::InvalidInterval {
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }
    let (num, den) = simplest_between(
        lo.numer().clone(),
        lo.denom().clone(),
        hi.numer().clone(),
        hi.denom().clone(),
    );
    let (a, q) = (
        num.to_i64().ok_or(Error::Overflow)?,
        den.to_i64().ok_or(Error::Overflow)?,
    );
    let found = Fraction::new(a, q)?;
    debug_assert!(q == 1 || count_with_denominator(lo, hi, q) == 1);
    Ok(found)
}

/// Number of integers `a` with `lo < a/q < hi`.
pub fn count_with_denominator(lo: &Rational, hi: &Rational, q: i64) -> u64 {
    let q = BigInt::from(q);
    // a > lo*q  <=>  a >= ⌊lo*q⌋ + 1 ;  a < hi*q  <=>  a <= ⌈hi*q⌉ - 1
    let first: BigInt = (lo.numer() * &q).div_floor(lo.denom()) + 1;
    let last: BigInt = (hi.numer() * &q).div_ceil(hi.denom()) - 1;
    if last < first {
        0
    } else {
        (last - first + BigInt::one()).to_u64().unwrap_or(u64::MAX)
    }
}

/// Simplest fraction strictly between `lo_num/lo_den` and `hi_num/hi_den`.
///
/// Works for any signed integer type; denominators must be positive and the
/// interval nonempty. Inputs need not be reduced. Intermediate values never
/// exceed the magnitudes of the inputs (plus one), so `i128` is safe for
/// endpoints below `2^125`.
pub(crate) fn simplest_between<T>(mut a: T, mut b: T, mut c: T, mut d: T) -> (T, T)
where
    T: Integer + Signed + Clone,
{
    debug_assert!(b.is_positive() && d.is_positive());
    // value = (p1 * x + p0) / (q1 * x + q0), x the still-unknown tail
    let (mut p1, mut p0, mut q1, mut q0) = (T::one(), T::zero(), T::zero(), T::one());
    loop {
        let n = a.div_floor(&b);
        let n1 = n.clone() + T::one();
        // d == 0 encodes an upper endpoint at +infinity
        if d.is_zero() || n1.clone() * d.clone() < c {
            return (
                p1.clone() * n1.clone() + p0,
                q1.clone() * n1 + q0,
            );
        }
        // lo - n in [0, 1), hi - n in (0, 1]; recurse on the reciprocals
        let new_b = c - n.clone() * d.clone();
        let new_d = a - n.clone() * b.clone();
        let (new_a, new_c) = (d, b);
        a = new_a;
        b = new_b;
        c = new_c;
        d = new_d;
        let np1 = p1.clone() * n.clone() + p0;
        let nq1 = q1.clone() * n + q0;
        p0 = std::mem::replace(&mut p1, np1);
        q0 = std::mem::replace(&mut q1, nq1);
    }
}

/// Brute-force reference: scans `q = 1, 2, ...` up to `max_den`.
pub fn smallest_denominator_by_scan(lo: &Rational, hi: &Rational, max_den: i64) -> Option<Fraction> {
    (1..=max_den).find_map(|q| {
        if count_with_denominator(lo, hi, q) == 0 {
            return None;
        }
        let a = (lo.numer() * BigInt::from(q)).div_floor(lo.denom()) + BigInt::one();
        Fraction::new(a.to_i64()?, q).ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::gcd;
    use proptest::prelude::*;

    fn f(a: i64, q: i64) -> Fraction {
        Fraction::new(a, q).unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    // Oracle: enumerate every reduced a/q and sort.
    fn farey_by_sorting(order: i64) -> Vec<Fraction> {
        let mut v: Vec<Fraction> = (1..=order)
            .flat_map(|q| (0..q).filter(move |&a| gcd(a, q) == 1).map(move |a| f(a, q)))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn sequence_examples() {
        assert_eq!(farey_sequence(1).unwrap(), vec![f(0, 1)]);
        assert_eq!(
            farey_sequence(3).unwrap(),
            vec![f(0, 1), f(1, 3), f(1, 2), f(2, 3)]
        );
        assert_eq!(farey_sequence(5).unwrap().len(), 10);
        assert!(farey_sequence(0).is_err());
        assert!(matches!(
            farey_sequence_with_cap(50, 10),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn sequence_matches_sorting_oracle() {
        for order in 1..=60 {
            assert_eq!(farey_sequence(order as u64).unwrap(), farey_by_sorting(order));
        }
    }

    #[test]
    fn neighbor_examples() {
        let n = farey_neighbors(f(2, 5)).unwrap();
        assert_eq!((n.left, n.right), (f(1, 3), f(1, 2)));
        assert_eq!((n.left_den(), n.right_den()), (3, 2));
        let n = farey_neighbors(f(1, 2)).unwrap();
        assert_eq!((n.left, n.right), (f(0, 1), f(1, 1)));
        let n = farey_neighbors(f(1, 4)).unwrap();
        assert_eq!((n.left, n.right), (f(0, 1), f(1, 3)));
        assert!(farey_neighbors(f(0, 1)).is_err());
        assert!(farey_neighbors(f(5, 3)).is_err());
    }

    #[test]
    fn neighbor_identities() {
        for q in 2..=80i64 {
            for a in (1..q).filter(|&a| gcd(a, q) == 1) {
                let n = farey_neighbors(f(a, q)).unwrap();
                let (ap, qp) = (n.left.num(), n.left.den());
                let (app, qpp) = (n.right.num(), n.right.den());
                assert_eq!(q, qp + qpp);
                assert_eq!(a * qp - ap * q, 1);
                assert_eq!(app * q - a * qpp, 1);
                assert_eq!(app * qp - ap * qpp, 1);
                let c = n.center.to_rational();
                let (lf, rf) = (n.left.to_rational(), n.right.to_rational());
                assert_eq!(&c - &lf, Rational::new(1, q * qp).unwrap());
                assert_eq!(&rf - &c, Rational::new(1, q * qpp).unwrap());
                assert_eq!(&rf - &lf, Rational::new(1, qp * qpp).unwrap());
            }
        }
    }

    #[test]
    fn phi_map_examples() {
        assert_eq!(phi_q_map(1).unwrap(), vec![((1, 1), f(0, 1))]);
        let mut img: Vec<_> = phi_q_map(3).unwrap().into_iter().map(|(p, _)| p).collect();
        img.sort();
        assert_eq!(img, vec![(1, 1), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(phi_q_map(5).unwrap().len(), 10);
    }

    #[test]
    fn search_examples() {
        assert_eq!(smallest_denominator(&r("-1/20"), &r("1/20")).unwrap(), f(0, 1));
        assert_eq!(smallest_denominator(&r("8/25"), &r("21/50")).unwrap(), f(1, 3));
        assert_eq!(smallest_denominator(&r("1/4"), &r("3/4")).unwrap(), f(1, 2));
        // several integers inside: the first one above lo
        assert_eq!(smallest_denominator(&r("-5/2"), &r("7/2")).unwrap(), f(-2, 1));
        assert_eq!(smallest_denominator(&r("2"), &r("4")).unwrap(), f(3, 1));
        // open interval: endpoints never count
        assert_eq!(smallest_denominator(&r("0"), &r("1")).unwrap(), f(1, 2));
        assert_eq!(smallest_denominator(&r("1/3"), &r("1/2")).unwrap(), f(2, 5));
        assert_eq!(smallest_denominator(&r("-1/2"), &r("-1/3")).unwrap(), f(-2, 5));
        assert!(matches!(
            smallest_denominator(&r("1/2"), &r("1/2")),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(smallest_denominator(&r("3/4"), &r("1/2")).is_err());
    }

    #[test]
    fn search_overflow_is_reported() {
        let big = BigInt::from(10).pow(40);
        let lo = Rational::new(3, big.clone()).unwrap();
        let hi = &lo + &Rational::new(1, &big * &big * 10).unwrap();
        assert_eq!(smallest_denominator(&lo, &hi), Err(Error::Overflow));
    }

    #[test]
    fn generic_search_on_machine_integers() {
        assert_eq!(simplest_between(8i128, 25, 21, 50), (1, 3));
        assert_eq!(simplest_between(-1i128, 20, 1, 20), (0, 1));
        // unreduced endpoints
        assert_eq!(simplest_between(16i128, 50, 42, 100), (1, 3));
    }

    proptest! {
        #[test]
        fn search_agrees_with_scan(a in -3000i64..3000, b in 1i64..3000, w_num in 1i64..500, w_den in 1i64..5000) {
            let lo = Rational::new(a, b).unwrap();
            let width = Rational::new(w_num, w_den).unwrap();
            let hi = &lo + &width;
            let got = smallest_denominator(&lo, &hi).unwrap();
            let bound = (1.0 / width.to_f64()).floor() as i64 + 1;
            let want = smallest_denominator_by_scan(&lo, &hi, bound.max(1)).unwrap();
            prop_assert_eq!(got.den(), want.den());
            prop_assert_eq!(got, want);
            if got.den() > 1 {
                prop_assert_eq!(count_with_denominator(&lo, &hi, got.den()), 1);
            }
        }

        #[test]
        fn i128_and_bigint_agree(a in any::<i32>(), b in 1i64..=i32::MAX as i64, c in 1i64..=i32::MAX as i64, d in 1i64..=i32::MAX as i64) {
            let lo = Rational::new(a as i64, b).unwrap();
            let hi = &lo + &Rational::new(c, d).unwrap();
            let big = simplest_between(lo.numer().clone(), lo.denom().clone(), hi.numer().clone(), hi.denom().clone());
            let small = simplest_between(
                lo.numer().to_i128().unwrap(),
                lo.denom().to_i128().unwrap(),
                hi.numer().to_i128().unwrap(),
                hi.denom().to_i128().unwrap(),
            );
            prop_assert_eq!((BigInt::from(small.0), BigInt::from(small.1)), big);
        }
    }
}
