use qmin_core::expectation::{
    asymptotic_diagnostics, expected_value_mobius, expected_value_pmf_with_cap, s_function,
    verify_constants, ExpectationRow,
};
use qmin_core::farey::smallest_denominator;
use qmin_core::montecarlo::{compare_empirical, sample_qmin_with_radius, Radius};
use qmin_core::pmf::{
    interval_decomposition_with_cap, is_circle_partition, pmf_with_cap, support_bound,
    DEFAULT_DECOMPOSITION_CAP, DEFAULT_Q_CAP,
};
use qmin_core::Error;
use serde::Serialize;

use crate::render::Rendered;
use crate::{Command, Method};

/// Failure of a command: a library error or a problem writing output.
pub enum Failure {
    Core(Error),
    Output(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Output(e)
    }
}

#[derive(Serialize)]
struct QminRecord {
    x: String,
    delta: String,
    lo: String,
    hi: String,
    fraction: String,
    q_min: i64,
}

#[derive(Serialize)]
struct PmfHeader {
    delta: String,
    support_bound: u64,
}

#[derive(Serialize)]
struct DecompositionRow {
    fraction: String,
    case: String,
    lo: String,
    hi: String,
    length: String,
    wraps: bool,
}

#[derive(Serialize)]
struct DecompositionHeader {
    delta: String,
    records: usize,
    partition: bool,
}

#[derive(Serialize)]
struct ExpectRow {
    delta: String,
    method: &'static str,
    exact: String,
    exact_num: String,
    exact_den: String,
    exact_float: f64,
}

#[derive(Serialize)]
struct ExpectHeader {
    delta: String,
    routes_agree: Option<bool>,
}

#[derive(Serialize)]
struct SRecord {
    t: String,
    value: String,
    value_num: String,
    value_den: String,
    value_float: f64,
    value_times_sqrt_t: f64,
}

#[derive(Serialize)]
struct DiagnosticsHeader {
    max_normalized_deficit_ratio: f64,
    ratio_gap_non_increasing: bool,
}

#[derive(Serialize)]
struct SampleHeader {
    delta: String,
    radius: Radius,
    sample_count: u64,
    seed: u64,
    support_bound: u64,
}

#[derive(Serialize)]
struct CompareRecord {
    delta: String,
    radius: Radius,
    sample_count: u64,
    seed: u64,
    sup_norm: f64,
    sup_norm_at: u64,
    empirical_mean: f64,
    standard_error: f64,
    exact_mean: String,
    exact_mean_float: f64,
    z_score: f64,
}

pub fn run(command: &Command, q_cap: Option<u64>, radius: Radius) -> Result<Rendered, Failure> {
    match command {
        Command::Qmin { x, delta } => {
            let half = radius.width(delta).div_int(&2.into())?;
            let (lo, hi) = (x - &half, x + &half);
            let f = smallest_denominator(&lo, &hi)?;
            Ok(Rendered::record(&QminRecord {
                x: x.to_string(),
                delta: delta.to_string(),
                lo: lo.to_string(),
                hi: hi.to_string(),
                fraction: f.to_string(),
                q_min: f.den(),
            })?)
        }
        Command::Pmf { delta } => {
            let table = pmf_with_cap(delta, q_cap.unwrap_or(DEFAULT_Q_CAP))?;
            let header = PmfHeader {
                delta: delta.to_string(),
                support_bound: table.support_bound(),
            };
            Ok(Rendered::table(&header, &table.rows().collect::<Vec<_>>())?)
        }
        Command::Decompose { delta } => {
            let cap = q_cap.unwrap_or(DEFAULT_DECOMPOSITION_CAP);
            let records = interval_decomposition_with_cap(delta, cap)?;
            let rows: Vec<DecompositionRow> = records
                .iter()
                .map(|r| DecompositionRow {
                    fraction: r.fraction.to_string(),
                    case: r.case_tag.to_string(),
                    lo: r.lo.to_string(),
                    hi: r.hi.to_string(),
                    length: r.length.to_string(),
                    wraps: r.wraps,
                })
                .collect();
            let partition = is_circle_partition(&records);
            let header = DecompositionHeader {
                delta: delta.to_string(),
                records: rows.len(),
                partition,
            };
            Ok(Rendered::table(&header, &rows)?.with_passed(partition))
        }
        Command::Expect { delta, method } => {
            let cap = q_cap.unwrap_or(DEFAULT_Q_CAP);
            let routes: &[&'static str] = match method {
                Method::Pmf => &["pmf"],
                Method::Mobius => &["mobius"],
                Method::Both => &["pmf", "mobius"],
                Method::Auto if support_bound(delta)? <= cap => &["pmf"],
                Method::Auto => &["mobius"],
            };
            let mut rows = Vec::new();
            for &route in routes {
                let value = match route {
                    "pmf" => expected_value_pmf_with_cap(delta, cap)?,
                    _ => expected_value_mobius(delta)?,
                };
                rows.push(ExpectRow {
                    delta: delta.to_string(),
                    method: route,
                    exact: value.to_string(),
                    exact_num: value.numer().to_string(),
                    exact_den: value.denom().to_string(),
                    exact_float: value.to_f64(),
                });
            }
            let agree = (rows.len() == 2).then(|| rows[0].exact == rows[1].exact);
            let header = ExpectHeader {
                delta: delta.to_string(),
                routes_agree: agree,
            };
            Ok(Rendered::table(&header, &rows)?.with_passed(agree != Some(false)))
        }
        Command::Sfunc { t } => {
            let s = s_function(t)?;
            Ok(Rendered::record(&SRecord {
                t: t.to_string(),
                value: s.to_string(),
                value_num: s.numer().to_string(),
                value_den: s.denom().to_string(),
                value_float: s.to_f64(),
                value_times_sqrt_t: s.to_f64() * t.to_f64().sqrt(),
            })?)
        }
        Command::VerifyConstants { tolerance } => {
            let report = verify_constants(*tolerance)?;
            let passed = report.passed;
            Ok(Rendered::record(&report)?.with_passed(passed))
        }
        Command::Diagnostics { deltas } => {
            let reports = asymptotic_diagnostics(deltas)?;
            let rows: Vec<ExpectationRow> = reports.iter().map(|r| r.row()).collect();
            let gaps: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
            let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
            let first = rows.first().map_or(0.0, |r| r.normalized_deficit.abs());
            let worst = rows
                .iter()
                .map(|r| r.normalized_deficit.abs() / first)
                .fold(0.0, f64::max);
            let finite = rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
            let header = DiagnosticsHeader {
                max_normalized_deficit_ratio: worst,
                ratio_gap_non_increasing: monotone,
            };
            let passed = finite && monotone && worst <= 2.0;
            Ok(Rendered::table(&header, &rows)?.with_passed(passed))
        }
        Command::Sample { delta, n, seed } => {
            let hist = sample_qmin_with_radius(delta, *n, *seed, radius)?;
            let header = SampleHeader {
                delta: delta.to_string(),
                radius,
                sample_count: hist.sample_count,
                seed: hist.seed,
                support_bound: hist.support_bound(),
            };
            Ok(Rendered::table(&header, &hist.rows().collect::<Vec<_>>())?)
        }
        Command::Compare { delta, n, seed } => {
            let hist = sample_qmin_with_radius(delta, *n, *seed, radius)?;
            let table = pmf_with_cap(&hist.width(), q_cap.unwrap_or(DEFAULT_Q_CAP))?;
            let c = compare_empirical(&hist, &table)?;
            Ok(Rendered::record(&CompareRecord {
                delta: delta.to_string(),
                radius,
                sample_count: c.sample_count,
                seed: *seed,
                sup_norm: c.sup_norm,
                sup_norm_at: c.sup_norm_at,
                empirical_mean: c.empirical_mean,
                standard_error: c.standard_error,
                exact_mean: c.exact_mean.to_string(),
                exact_mean_float: c.exact_mean_float,
                z_score: c.z_score,
            })?)
        }
    }
}
