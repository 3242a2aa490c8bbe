//! Monte Carlo sampling of `q_min` for uniformly random centres, and
//! comparison of the resulting histogram against the exact PMF.
//!
//! Centres are dyadic, `x = k / 2^64` with `k` a uniform 64-bit word, so every
//! interval has exact rational endpoints. Samples are drawn in fixed blocks
//! of [`BLOCK_SIZE`]; block `i` reads ChaCha8 stream `i` under the user seed,
//! which makes a histogram depend only on `(δ, n, seed)` and never on how
//! many threads drew it.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::farey::simplest_between;
use crate::pmf::{check_delta, PmfTable};
use crate::rational::Rational;

pub const BLOCK_SIZE: u64 = 1 << 16;

/// Whether the interval around `x` has radius `δ/2` (width δ) or `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Radius {
    #[default]
    HalfDelta,
    FullDelta,
}

impl Radius {
    /// Width of the sampled interval.
    pub fn width(self, delta: &Rational) -> Rational {
        match self {
            Radius::HalfDelta => delta.clone(),
            Radius::FullDelta => delta.mul_int(&BigInt::from(2)),
        }
    }
}

/// `⌊1/w⌋ + 1`: every open interval of width `w` holds a fraction with a
/// denominator at most this.
fn bound_for_width(width: &Rational) -> u64 {
    width.denom().div_floor(width.numer()).to_u64().map_or(u64::MAX, |f| f.saturating_add(1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalHistogram {
    pub delta: Rational,
    pub radius: Radius,
    pub sample_count: u64,
    pub seed: u64,
    pub counts: BTreeMap<u64, u64>,
}

/// One CSV row of a histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub q: u64,
    pub count: u64,
    pub frequency: f64,
}

impl EmpiricalHistogram {
    /// Builds a histogram from given counts; `sample_count` is their total.
    pub fn from_counts(
        delta: Rational,
        radius: Radius,
        seed: u64,
        counts: BTreeMap<u64, u64>,
    ) -> Result<Self> {
        check_delta(&delta)?;
        let sample_count = counts.values().sum();
        if sample_count == 0 {
            return Err(invalid("a histogram needs at least one sample"));
        }
        Ok(EmpiricalHistogram {
            delta,
            radius,
            sample_count,
            seed,
            counts,
        })
    }

    pub fn width(&self) -> Rational {
        self.radius.width(&self.delta)
    }

    pub fn support_bound(&self) -> u64 {
        bound_for_width(&self.width())
    }

    pub fn count(&self, q: u64) -> u64 {
        self.counts.get(&q).copied().unwrap_or(0)
    }

    pub fn frequency(&self, q: u64) -> f64 {
        self.count(q) as f64 / self.sample_count as f64
    }

    pub fn rows(&self) -> impl Iterator<Item = HistogramRow> + '_ {
        self.counts.iter().map(|(&q, &count)| HistogramRow {
            q,
            count,
            frequency: count as f64 / self.sample_count as f64,
        })
    }
}

/// Exact interval search for dyadic centres, in `i128` when the endpoint
/// numerators fit and in `BigInt` otherwise.
struct Searcher {
    // half-width p/s
    p: BigInt,
    s: BigInt,
    small: Option<(i128, i128)>,
}

impl Searcher {
    fn new(half: &Rational) -> Self {
        let small = match (half.numer().to_i128(), half.denom().to_i128()) {
            (Some(p), Some(s)) if p < 1 << 60 && s < 1 << 60 => Some((p, s)),
            _ => None,
        };
        Searcher {
            p: half.numer().clone(),
            s: half.denom().clone(),
            small,
        }
    }

    /// Least denominator in `(k/2^64 - p/s, k/2^64 + p/s)`.
    fn qmin(&self, k: u64) -> u64 {
        // endpoints (k s ∓ p 2^64) / (s 2^64)
        if let Some((p, s)) = self.small {
            let (ks, shifted, den) = (k as i128 * s, p << 64, s << 64);
            let (_, q) = simplest_between(ks - shifted, den, ks + shifted, den);
            return q as u64;
        }
        self.qmin_big(k)
    }

    fn qmin_big(&self, k: u64) -> u64 {
        let ks = BigInt::from(k) * &self.s;
        let shifted: BigInt = &self.p << 64;
        let den: BigInt = &self.s << 64;
        let (_, q) = simplest_between(&ks - &shifted, den.clone(), ks + shifted, den);
        q.to_u64().expect("denominator bounded by the support")
    }
}

pub fn sample_qmin(delta: &Rational, n: u64, seed: u64) -> Result<EmpiricalHistogram> {
    sample_qmin_with_radius(delta, n, seed, Radius::HalfDelta)
}

/// Draws `n` dyadic centres and tallies `q_min` of the surrounding interval.
///
/// # Panics
///
/// If a sample falls outside `1..=⌊1/w⌋+1` for the interval width `w`; that
/// can only be a bug in the search.
pub fn sample_qmin_with_radius(
    delta: &Rational,
    n: u64,
    seed: u64,
    radius: Radius,
) -> Result<EmpiricalHistogram> {
    check_delta(delta)?;
    if n == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let width = radius.width(delta);
    let bound = bound_for_width(&width);
    let searcher = Searcher::new(&width.div_int(&BigInt::from(2))?);
    let blocks = n.div_ceil(BLOCK_SIZE);
    let partial: Vec<BTreeMap<u64, u64>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block);
            let len = BLOCK_SIZE.min(n - block * BLOCK_SIZE);
            let mut counts = BTreeMap::new();
            for _ in 0..len {
                let q = searcher.qmin(rng.next_u64());
                assert!(
                    (1..=bound).contains(&q),
                    "q_min = {q} outside the support 1..={bound}"
                );
                *counts.entry(q).or_insert(0u64) += 1;
            }
            counts
        })
        .collect();
    let mut counts = BTreeMap::new();
    for part in partial {
        for (q, c) in part {
            *counts.entry(q).or_insert(0) += c;
        }
    }
    Ok(EmpiricalHistogram {
        delta: delta.clone(),
        radius,
        sample_count: n,
        seed,
        counts,
    })
}

/// Histogram against exact PMF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub delta: Rational,
    pub sample_count: u64,
    /// `max_q |count(q)/N - p(q)|`.
    pub sup_norm: f64,
    pub sup_norm_at: u64,
    pub empirical_mean: f64,
    pub standard_error: f64,
    pub exact_mean: Rational,
    pub exact_mean_float: f64,
    /// `(empirical_mean - exact_mean) / standard_error`.
    pub z_score: f64,
}

/// Compares a histogram with the PMF for the same interval width. A
/// full-radius histogram at δ pairs with the table at 2δ.
pub fn compare_empirical(hist: &EmpiricalHistogram, table: &PmfTable) -> Result<Comparison> {
    let width = hist.width();
    if width != *table.delta() {
        return Err(Error::DeltaMismatch {
            histogram: width.to_string(),
            table: table.delta().to_string(),
        });
    }
    let n = hist.sample_count as f64;
    let last = table
        .support_bound()
        .max(hist.counts.keys().next_back().copied().unwrap_or(1));
    let (mut sup_norm, mut sup_norm_at) = (0.0f64, 1u64);
    for q in 1..=last {
        let gap = (hist.frequency(q) - table.mass(q).to_f64()).abs();
        if gap > sup_norm {
            (sup_norm, sup_norm_at) = (gap, q);
        }
    }
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for (&q, &c) in &hist.counts {
        let q = q as f64;
        first += q * c as f64;
        second += q * q * c as f64;
    }
    let mean = first / n;
    let variance = if hist.sample_count > 1 {
        ((second - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let standard_error = (variance / n).sqrt();
    let exact_mean = table.expected_value();
    let exact_mean_float = exact_mean.to_f64();
    let diff = mean - exact_mean_float;
    let z_score = if standard_error > 0.0 {
        diff / standard_error
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(Comparison {
        delta: table.delta().clone(),
        sample_count: hist.sample_count,
        sup_norm,
        sup_norm_at,
        empirical_mean: mean,
        standard_error,
        exact_mean,
        exact_mean_float,
        z_score,
    })
}

/// Counts that a perfect sampler of `N` draws would produce: `p(q) N`
/// rounded by largest remainder so they add up to `N` exactly.
pub fn ideal_counts(table: &PmfTable, n: u64) -> BTreeMap<u64, u64> {
    let big_n = BigInt::from(n);
    let mut floors = Vec::new();
    let mut assigned = BigInt::from(0);
    for (i, m) in table.masses().iter().enumerate() {
        let scaled = m.mul_int(&big_n);
        let floor = scaled.floor();
        let rem = scaled - Rational::from(floor.clone());
        assigned += &floor;
        floors.push((i as u64 + 1, floor, rem));
    }
    let mut order: Vec<usize> = (0..floors.len()).collect();
    order.sort_by(|&a, &b| floors[b].2.cmp(&floors[a].2));
    let mut left = big_n - assigned;
    for i in order {
        if left <= BigInt::from(0) {
            break;
        }
        floors[i].1 += BigInt::one();
        left -= 1;
    }
    floors
        .into_iter()
        .filter_map(|(q, c, _)| c.to_u64().filter(|&c| c > 0).map(|c| (q, c)))
        .collect()
}
