//! Smallest denominators of fractions in random intervals.
//!
//! For a fixed width δ and a centre `x` drawn uniformly from `[0, 1)`, let
//! `q_min(x)` be the least denominator of a fraction in the open interval
//! `(x - δ/2, x + δ/2)`. This crate computes `q_min` for any rational
//! interval, its exact probability mass function, and its exact expected
//! value by two independent routes, and checks both against Monte Carlo
//! sampling and against the asymptotic `E[q_min] ~ (16/π²) δ^(-1/2)`.
//!
//! All probabilities and expectations are exact [`Rational`]s; conversion to
//! floating point happens only when a report is produced.

pub mod error;
pub mod expectation;
pub mod farey;
pub mod montecarlo;
pub mod numtheory;
pub mod pmf;
pub mod quadrature;
pub mod rational;
pub mod sum;

pub use error::{Error, Result};
pub use expectation::{
    asymptotic_diagnostics, asymptotic_estimate, expected_value_mobius, expected_value_pmf,
    s_function, verify_constants, ExpectationReport,
};
pub use farey::{farey_neighbors, farey_sequence, phi_q_map, smallest_denominator, FareyNeighbors};
pub use montecarlo::{compare_empirical, sample_qmin, EmpiricalHistogram, Radius};
pub use numtheory::{gcd, mod_inverse, sieve, SieveTable};
pub use pmf::{classify_case, interval_decomposition, pi_kernel, pmf, CaseTag, IntervalRecord, PmfTable};
pub use rational::{arith, compare, mediant, ArithOp, Fraction, Rational};
