//! Exact evaluation of sums `Σ c[n] / n` with integer coefficients.
//!
//! Every expected value and probability mass in this crate reduces to such a
//! sum plus an integer multiple of δ. Adding the terms one by one as
//! rationals costs a gcd per term on numbers that grow to `lcm(1..=M)`
//! (about 1.44·M bits), which is hopeless for M = 10^6. Instead:
//!
//! 1. The terms are combined over a balanced binary tree of index ranges. A
//!    node's partial sum is kept as `N / D` where `D` is the lcm of the
//!    denominators below it, tracked as a prime-exponent list, so parents
//!    scale children by exact cofactors and numbers never grow past the lcm.
//! 2. The root fraction `N / D` is reduced without a big gcd. For each prime
//!    `p^k || D`, `p^(e+1) | N` iff `Σ c[n] p^(k - v) / u ≡ 0 (mod p^(e+1))`
//!    where `n = p^v u`, and only `n` with `v >= k - e` contribute. These
//!    residue sums touch a handful of indices per prime.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::numtheory::SieveTable;
use crate::rational::Rational;

/// Prime-exponent list, sorted by prime.
type Exponents = Vec<(u32, u32)>;

#[derive(Clone, Debug)]
enum Cofactor {
    Small(u64),
    Big(BigUint),
}

impl Cofactor {
    fn from_prime_powers(factors: &[u64]) -> Self {
        let mut acc: u64 = 1;
        for (i, &f) in factors.iter().enumerate() {
            match acc.checked_mul(f) {
                Some(v) => acc = v,
                None => return Cofactor::Big(BigUint::from(acc) * product(&factors[i..])),
            }
        }
        Cofactor::Small(acc)
    }

    fn is_one(&self) -> bool {
        matches!(self, Cofactor::Small(1))
    }
}

/// Balanced product of word-sized factors.
fn product(factors: &[u64]) -> BigUint {
    const LEAF: usize = 16;
    if factors.len() <= LEAF {
        let mut acc = BigUint::one();
        let mut word: u64 = 1;
        for &f in factors {
            match word.checked_mul(f) {
                Some(v) => word = v,
                None => {
                    acc *= word;
                    word = f;
                }
            }
        }
        return acc * word;
    }
    let (l, r) = factors.split_at(factors.len() / 2);
    product(l) * product(r)
}

/// Partial numerator; stays in an `i128` until it overflows.
#[derive(Clone, Debug)]
enum Numerator {
    Small(i128),
    Big(BigInt),
}

impl Numerator {
    fn is_zero(&self) -> bool {
        match self {
            Numerator::Small(v) => *v == 0,
            Numerator::Big(v) => v.is_zero(),
        }
    }

    fn into_big(self) -> BigInt {
        match self {
            Numerator::Small(v) => BigInt::from(v),
            Numerator::Big(v) => v,
        }
    }

    fn scaled(self, cof: &Cofactor) -> Numerator {
        if cof.is_one() {
            return self;
        }
        if let (Numerator::Small(v), Cofactor::Small(c)) = (&self, cof) {
            if let Some(p) = v.checked_mul(*c as i128) {
                return Numerator::Small(p);
            }
        }
        let c = match cof {
            Cofactor::Small(c) => BigInt::from(*c),
            Cofactor::Big(c) => BigInt::from(c.clone()),
        };
        Numerator::Big(self.into_big() * c)
    }

    fn plus(self, other: Numerator) -> Numerator {
        if let (Numerator::Small(a), Numerator::Small(b)) = (&self, &other) {
            if let Some(s) = a.checked_add(*b) {
                return Numerator::Small(s);
            }
        }
        Numerator::Big(self.into_big() + other.into_big())
    }
}

/// `(cofactor for left, cofactor for right, merged exponents)`.
fn merge_exponents(left: &Exponents, right: &Exponents) -> (Cofactor, Cofactor, Exponents) {
    let mut merged = Vec::with_capacity(left.len() + right.len());
    let mut to_left = Vec::new();
    let mut to_right = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < left.len() || j < right.len() {
        let take_left = j == right.len() || (i < left.len() && left[i].0 < right[j].0);
        let take_right = i == left.len() || (j < right.len() && right[j].0 < left[i].0);
        if take_left {
            merged.push(left[i]);
            // prime only on the left: the right side must absorb it
            to_right.push((left[i].0 as u64).pow(left[i].1));
            i += 1;
        } else if take_right {
            merged.push(right[j]);
            to_left.push((right[j].0 as u64).pow(right[j].1));
            j += 1;
        } else {
            let (p, el) = left[i];
            let er = right[j].1;
            merged.push((p, el.max(er)));
            if el > er {
                to_right.push((p as u64).pow(el - er));
            } else if er > el {
                to_left.push((p as u64).pow(er - el));
            }
            i += 1;
            j += 1;
        }
    }
    (
        Cofactor::from_prime_powers(&to_left),
        Cofactor::from_prime_powers(&to_right),
        merged,
    )
}

fn factor_exponents(sieve: &SieveTable, n: u64) -> Exponents {
    sieve.factorize(n)
}

/// Sum of `coeffs[i] / (i + 1)`, exactly, in lowest terms.
///
/// The sieve must cover `coeffs.len()`.
pub fn harmonic_sum(coeffs: &[i64], sieve: &SieveTable) -> Rational {
    assert!(sieve.limit() >= coeffs.len() as u64, "sieve too small");
    if coeffs.is_empty() {
        return Rational::zero();
    }
    let (num, exps) = combine_support(coeffs, 1, sieve);
    finish(num, &exps, coeffs)
}

/// Tree combination over `coeffs`, whose first entry is the coefficient of
/// `1/first`. Denominators track the lcm of indices with nonzero weight.
fn combine_support(coeffs: &[i64], first: u64, sieve: &SieveTable) -> (Numerator, Exponents) {
    if coeffs.len() == 1 {
        return if coeffs[0] == 0 {
            (Numerator::Small(0), Vec::new())
        } else {
            (
                Numerator::Small(coeffs[0] as i128),
                factor_exponents(sieve, first),
            )
        };
    }
    let mid = coeffs.len() / 2;
    let (nl, el) = combine_support(&coeffs[..mid], first, sieve);
    let (nr, er) = combine_support(&coeffs[mid..], first + mid as u64, sieve);
    if nl.is_zero() && el.is_empty() {
        return (nr, er);
    }
    if nr.is_zero() && er.is_empty() {
        return (nl, el);
    }
    let (cl, cr, merged) = merge_exponents(&el, &er);
    (nl.scaled(&cl).plus(nr.scaled(&cr)), merged)
}

/// Reduces `num / ∏ p^k` using the residue test described in the module
/// docs, then packages it as a canonical rational.
fn finish(num: Numerator, exps: &Exponents, coeffs: &[i64]) -> Rational {
    let num = num.into_big();
    if num.is_zero() {
        return Rational::zero();
    }
    let mut cancel: Vec<u64> = Vec::new();
    let mut den_factors: Vec<u64> = Vec::with_capacity(exps.len());
    for &(p, k) in exps {
        let e = cancelled_power(p as u64, k, coeffs);
        if e > 0 {
            cancel.push((p as u64).pow(e));
        }
        if k > e {
            den_factors.push((p as u64).pow(k - e));
        }
    }
    let den = BigInt::from(product(&den_factors));
    let num = if cancel.is_empty() {
        num
    } else {
        let g = BigInt::from(product(&cancel));
        let (q, r) = num.div_rem(&g);
        debug_assert!(r.is_zero(), "cancelled factor must divide the numerator");
        q
    };
    Rational::from_canonical(num, den)
}

/// Largest `e <= k` with `p^e` dividing `Σ c[n] · D / n`, where `p^k || D`.
/// Indices past the end of `coeffs` have zero weight.
fn cancelled_power(p: u64, k: u32, coeffs: &[i64]) -> u32 {
    let limit = coeffs.len() as u64;
    let mut e = 0;
    while e < k {
        let modulus = p.pow(e + 1) as u128;
        let step = p.pow(k - e);
        let (mut num, mut den) = (0u128, 1u128);
        let mut n = step;
        while n <= limit {
            let c = coeffs[(n - 1) as usize];
            if c != 0 {
                let (mut v, mut u) = (0u32, n);
                while u % p == 0 {
                    u /= p;
                    v += 1;
                }
                let w = (c as i128).rem_euclid(modulus as i128) as u128 * (p as u128).pow(k - v)
                    % modulus;
                let u = u as u128 % modulus;
                num = (num * u + w * den) % modulus;
                den = den * u % modulus;
            }
            n += step;
        }
        if num != 0 {
            break;
        }
        e += 1;
    }
    e
}

/// Precomputed combination tree for repeated sums over `1..=limit`.
///
/// Every node's denominator is the lcm of its whole index range, so the
/// cofactors depend only on `limit` and are shared by all evaluations.
#[derive(Debug, Clone)]
pub struct LcmPlan {
    limit: usize,
    // preorder, one entry per internal node
    cofactors: Vec<(Cofactor, Cofactor)>,
    exponents: Exponents,
}

impl LcmPlan {
    pub fn new(limit: usize, sieve: &SieveTable) -> Self {
        assert!(limit >= 1 && sieve.limit() >= limit as u64, "sieve too small");
        let mut cofactors = Vec::with_capacity(limit);
        let exponents = Self::build(1, limit as u64, sieve, &mut cofactors);
        LcmPlan {
            limit,
            cofactors,
            exponents,
        }
    }

    fn build(lo: u64, hi: u64, sieve: &SieveTable, out: &mut Vec<(Cofactor, Cofactor)>) -> Exponents {
        if lo == hi {
            return factor_exponents(sieve, lo);
        }
        let slot = out.len();
        out.push((Cofactor::Small(1), Cofactor::Small(1)));
        let mid = lo + (hi - lo).div_ceil(2);
        let el = Self::build(lo, mid - 1, sieve, out);
        let er = Self::build(mid, hi, sieve, out);
        let (cl, cr, merged) = merge_exponents(&el, &er);
        out[slot] = (cl, cr);
        merged
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// `lcm(1..=limit)`.
    pub fn lcm(&self) -> BigUint {
        let f: Vec<u64> = self
            .exponents
            .iter()
            .map(|&(p, k)| (p as u64).pow(k))
            .collect();
        product(&f)
    }

    /// Sum of `coeffs[i] / (i + 1)`; missing trailing coefficients are zero.
    pub fn evaluate(&self, coeffs: &[i64]) -> Rational {
        assert!(coeffs.len() <= self.limit, "more coefficients than the plan covers");
        let mut idx = 0;
        let num = self.eval_node(1, self.limit as u64, coeffs, &mut idx);
        finish(num, &self.exponents, coeffs)
    }

    fn eval_node(&self, lo: u64, hi: u64, coeffs: &[i64], idx: &mut usize) -> Numerator {
        if lo == hi {
            let c = coeffs.get((lo - 1) as usize).copied().unwrap_or(0);
            return Numerator::Small(c as i128);
        }
        if lo as usize > coeffs.len() {
            // an all-zero subtree owns `hi - lo` internal nodes
            *idx += (hi - lo) as usize;
            return Numerator::Small(0);
        }
        let (cl, cr) = &self.cofactors[*idx];
        *idx += 1;
        let mid = lo + (hi - lo).div_ceil(2);
        let nl = self.eval_node(lo, mid - 1, coeffs, idx);
        let nr = self.eval_node(mid, hi, coeffs, idx);
        let nl = if nl.is_zero() { nl } else { nl.scaled(cl) };
        let nr = if nr.is_zero() { nr } else { nr.scaled(cr) };
        nl.plus(nr)
    }
}

/// Number of bits in `lcm(1..=limit)`, for sizing diagnostics.
pub fn lcm_bits(plan: &LcmPlan) -> u64 {
    plan.exponents
        .iter()
        .map(|&(p, k)| k as f64 * (p as f64).log2())
        .sum::<f64>()
        .ceil()
        .to_u64()
        .unwrap_or(0)
}
