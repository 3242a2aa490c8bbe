//! Acceptance suite. Each test prints one `PASS`/`FAIL` line, written to the
//! process stdout directly so it shows up even when the harness captures
//! test output.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use qmin_core::expectation::{
    asymptotic_diagnostics, expected_value_mobius, expected_value_pmf, s_function,
    verify_constants,
};
use qmin_core::farey::{
    count_with_denominator, farey_neighbors, farey_sequence, phi_q_map, smallest_denominator,
    smallest_denominator_by_scan,
};
use qmin_core::montecarlo::{compare_empirical, sample_qmin};
use qmin_core::numtheory::gcd;
use qmin_core::pmf::{interval_decomposition, is_circle_partition, pmf, pmf_from_records};
use qmin_core::{Fraction, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const D_TARGET: f64 = 1.1715728753;
const C_TARGET: f64 = 8.0 / 3.0;
const CONSTANTS_TOLERANCE: f64 = 1e-8;
const S_GAP_LIMIT: f64 = 0.15;
const MC_SAMPLES: u64 = 1_000_000;
const MC_SEED: u64 = 20_240_601;
const MC_ALTERNATE_SEED: u64 = 977;
const MC_MAX_Z: f64 = 4.0;

type Outcome = Result<String, String>;

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(id: u32, name: &str, limit: Duration, body: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let mut outcome = body();
    let elapsed = start.elapsed();
    if outcome.is_ok() && elapsed > limit {
        outcome = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
    }
    let line = match &outcome {
        Ok(detail) => format!("acceptance {id:02} {name}: PASS [{elapsed:.2?}] {detail}"),
        Err(why) => format!("acceptance {id:02} {name}: FAIL [{elapsed:.2?}] {why}"),
    };
    writeln!(std::io::stdout().lock(), "{line}").unwrap();
    if let Err(why) = outcome {
        panic!("{name}: {why}");
    }
}

#[test]
fn a01_exact_normalization() {
    run(1, "exact normalization", Duration::from_secs(5), || {
        for d in ["1/2", "1/3", "1/10", "1/97", "1/1000", "7/1000"] {
            let total = pmf(&r(d)).map_err(|e| e.to_string())?.total();
            ensure(total == Rational::one(), || format!("δ={d}: Σ p = {total}"))?;
        }
        Ok("Σ p(q) = 1 for 6 values of δ".into())
    });
}

#[test]
fn a02_pmf_anchors() {
    run(2, "p(1) = p(2) = δ", Duration::from_secs(5), || {
        let deltas = ["1/2", "1/3", "2/5", "1/10", "1/97", "1/1000", "7/1000", "13/37"];
        for d in deltas {
            let delta = r(d);
            let t = pmf(&delta).map_err(|e| e.to_string())?;
            ensure(t.mass(1) == delta, || format!("δ={d}: p(1) = {}", t.mass(1)))?;
            if delta < r("1/2") {
                ensure(t.mass(2) == delta, || format!("δ={d}: p(2) = {}", t.mass(2)))?;
            }
        }
        Ok(format!("{} values of δ", deltas.len()))
    });
}

#[test]
fn a03_decomposition_oracle() {
    run(3, "interval decomposition", Duration::from_secs(10), || {
        for d in ["1/2", "1/10", "1/50"] {
            let delta = r(d);
            let records = interval_decomposition(&delta).map_err(|e| e.to_string())?;
            let by_records = pmf_from_records(&delta, &records).map_err(|e| e.to_string())?;
            let direct = pmf(&delta).map_err(|e| e.to_string())?;
            ensure(by_records == direct, || format!("δ={d}: per-q lengths differ from p(q)"))?;
            let total: Rational = records.iter().map(|x| &x.length).sum();
            ensure(total == Rational::one(), || format!("δ={d}: lengths sum to {total}"))?;
            ensure(is_circle_partition(&records), || format!("δ={d}: not a partition"))?;
            // pairwise, on the circle
            let one = Rational::one();
            let live: Vec<_> = records.iter().filter(|x| x.length.is_positive()).collect();
            for (i, x) in live.iter().enumerate() {
                for y in &live[i + 1..] {
                    let apart = if x.wraps || y.wraps {
                        let (w, o) = if x.wraps { (x, y) } else { (y, x) };
                        o.lo >= w.hi && o.hi <= &w.lo + &one
                    } else {
                        x.hi <= y.lo || y.hi <= x.lo
                    };
                    ensure(apart, || {
                        format!("δ={d}: I_{} and I_{} overlap", x.fraction, y.fraction)
                    })?;
                }
            }
        }
        Ok("δ ∈ {1/2, 1/10, 1/50}".into())
    });
}

#[test]
fn a04_route_equality() {
    run(4, "PMF route = Möbius route", Duration::from_secs(60), || {
        for d in ["1/10", "1/100", "1/1000", "1/5000"] {
            let delta = r(d);
            let a = expected_value_pmf(&delta).map_err(|e| e.to_string())?;
            let b = expected_value_mobius(&delta).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("δ={d}: {} vs {}", a.to_f64(), b.to_f64()))?;
        }
        Ok("δ ∈ {1/10, 1/100, 1/1000, 1/5000}".into())
    });
}

#[test]
fn a05_closed_cases() {
    run(5, "closed-form values", Duration::from_secs(5), || {
        let e = expected_value_pmf(&r("1/2")).map_err(|e| e.to_string())?;
        ensure(e == r("3/2"), || format!("E at δ=1/2 is {e}"))?;
        let s = s_function(&r("1/4")).map_err(|e| e.to_string())?;
        ensure(s == r("5/3"), || format!("S(1/4) = {s}"))?;
        for t in ["1/2", "3/4", "1"] {
            let s = s_function(&r(t)).map_err(|e| e.to_string())?;
            ensure(s.is_zero(), || format!("S({t}) = {s}"))?;
        }
        Ok("E(1/2) = 3/2, S(1/4) = 5/3, S = 0 on {1/2, 3/4, 1}".into())
    });
}

#[test]
fn a06_asymptotic_trend() {
    run(6, "E √δ π²/16 -> 1", Duration::from_secs(300), || {
        let deltas: Vec<Rational> =
            (2..=6).map(|k| Rational::new(1, 10i64.pow(k)).unwrap()).collect();
        let reports = asymptotic_diagnostics(&deltas).map_err(|e| e.to_string())?;
        let ratios: Vec<f64> = reports.iter().map(|x| x.ratio()).collect();
        ensure((0.5..=1.5).contains(&ratios[0]), || format!("ratio at 1e-2 is {}", ratios[0]))?;
        ensure((0.9..=1.1).contains(&ratios[4]), || format!("ratio at 1e-6 is {}", ratios[4]))?;
        let gaps: Vec<f64> = ratios.iter().map(|x| (x - 1.0).abs()).collect();
        ensure(gaps.windows(2).all(|w| w[1] <= w[0]), || format!("|ratio - 1|: {gaps:?}"))?;
        let first = reports[0].normalized_deficit.abs();
        for x in &reports {
            ensure(x.normalized_deficit.abs() <= 2.0 * first, || {
                format!("δ={}: normalized deficit {}", x.delta, x.normalized_deficit)
            })?;
        }
        Ok(format!("ratios {ratios:.5?}"))
    });
}

#[test]
fn a07_constants() {
    run(7, "D = 4 - 2√2 and C = 8/3", Duration::from_secs(1), || {
        let c = verify_constants(CONSTANTS_TOLERANCE).map_err(|e| e.to_string())?;
        let d_gap = (c.d_numeric - D_TARGET).abs();
        let c_gap = (c.c_numeric - C_TARGET).abs();
        ensure(d_gap < CONSTANTS_TOLERANCE, || format!("|D - target| = {d_gap:e}"))?;
        ensure(c_gap < CONSTANTS_TOLERANCE, || format!("|C - 8/3| = {c_gap:e}"))?;
        ensure(c.passed, || format!("{c:?}"))?;
        Ok(format!("D = {:.12}, C = {:.12}", c.d_numeric, c.c_numeric))
    });
}

#[test]
fn a08_s_asymptotic() {
    run(8, "S(t) √t -> 8/3", Duration::from_secs(30), || {
        let mut gaps = Vec::new();
        for t in ["1/100", "1/1000", "1/10000"] {
            let t = r(t);
            let s = s_function(&t).map_err(|e| e.to_string())?;
            gaps.push((s.to_f64() * t.to_f64().sqrt() - C_TARGET).abs());
        }
        ensure(gaps.windows(2).all(|w| w[1] < w[0]), || format!("gaps {gaps:?}"))?;
        ensure(gaps[2] < S_GAP_LIMIT, || format!("gap at 1e-4 is {}", gaps[2]))?;
        Ok(format!("|S√t - 8/3| = {gaps:.4?}"))
    });
}

#[test]
fn a09_search_oracle() {
    run(9, "least-denominator search", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let scale = 1_000_000_000i64;
        for _ in 0..10_000 {
            let b = rng.gen_range(1..1_000_000i64);
            let lo = Rational::new(rng.gen_range(-3 * b..3 * b), b).unwrap();
            let width = 10f64.powf(rng.gen_range(-4.0..0.5f64.log10()));
            let w = Rational::new((width * scale as f64).round() as i64, scale).unwrap();
            let w = w.max(Rational::new(1, 10_000).unwrap()).min(r("1/2"));
            let hi = &lo + &w;
            let bound = w.recip().unwrap().floor() + BigInt::from(1);
            let bound = i64::try_from(bound).unwrap();
            let got = smallest_denominator(&lo, &hi).map_err(|e| e.to_string())?;
            let want = smallest_denominator_by_scan(&lo, &hi, bound)
                .ok_or_else(|| format!("scan found nothing in ({lo}, {hi})"))?;
            ensure(got == want, || format!("({lo}, {hi}): {got} vs {want}"))?;
            let n = count_with_denominator(&lo, &hi, got.den());
            ensure(n == 1, || format!("({lo}, {hi}): {n} fractions with denominator {}", got.den()))?;
        }
        Ok("10^4 random intervals".into())
    });
}

#[test]
fn a10_farey_structure() {
    run(10, "Farey structure", Duration::from_secs(10), || {
        for order in 1..=100u64 {
            let seq = farey_sequence(order).map_err(|e| e.to_string())?;
            let mut closed = seq.clone();
            closed.push(Fraction::integer(1));
            for w in closed.windows(2) {
                let det = w[0].den() * w[1].num() - w[0].num() * w[1].den();
                ensure(det == 1, || format!("Q={order}: {} {} det {det}", w[0], w[1]))?;
            }
            for i in (1..seq.len()).filter(|&i| seq[i].den() as u64 == order) {
                let nb = farey_neighbors(seq[i]).map_err(|e| e.to_string())?;
                ensure(nb.left == closed[i - 1] && nb.right == closed[i + 1], || {
                    format!("Q={order}: neighbours of {}", seq[i])
                })?;
            }
            let map = phi_q_map(order).map_err(|e| e.to_string())?;
            let keys: BTreeSet<(u64, u64)> = map.iter().map(|(k, _)| *k).collect();
            let pairs: BTreeSet<(u64, u64)> = (1..=order)
                .flat_map(|n| (1..=n).map(move |m| (m, n)))
                .filter(|&(m, n)| gcd(m as i64, n as i64) == 1)
                .collect();
            ensure(keys.len() == map.len() && keys == pairs, || {
                format!("Q={order}: φ is not a bijection onto coprime pairs")
            })?;
        }
        Ok("Q = 1..=100".into())
    });
}

fn monte_carlo_once(delta: &Rational, seed: u64) -> Result<String, String> {
    let hist = sample_qmin(delta, MC_SAMPLES, seed).map_err(|e| e.to_string())?;
    let bound = hist.support_bound();
    assert!(hist.counts.keys().all(|&q| (1..=bound).contains(&q)));
    let table = pmf(delta).map_err(|e| e.to_string())?;
    let c = compare_empirical(&hist, &table).map_err(|e| e.to_string())?;
    let sup_limit = 4.0 * (1.0 / (4.0 * MC_SAMPLES as f64)).sqrt() + 1e-3;
    ensure(c.z_score.abs() <= MC_MAX_Z, || format!("δ={delta}: z = {}", c.z_score))?;
    ensure(c.sup_norm < sup_limit, || format!("δ={delta}: sup-norm {}", c.sup_norm))?;
    Ok(format!("δ={delta}: z={:.2}, sup={:.2e}", c.z_score, c.sup_norm))
}

#[test]
fn a11_monte_carlo() {
    run(11, "Monte Carlo vs exact PMF", Duration::from_secs(120), || {
        let mut details = Vec::new();
        for d in ["1/10", "1/100", "1/10000"] {
            let delta = r(d);
            let line = match monte_carlo_once(&delta, MC_SEED) {
                Ok(line) => line,
                Err(first) => monte_carlo_once(&delta, MC_ALTERNATE_SEED)
                    .map(|line| format!("{line} (retry after: {first})"))?,
            };
            details.push(line);
        }
        Ok(details.join("; "))
    });
}
