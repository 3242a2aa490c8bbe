//! Adaptive Simpson quadrature with a running error estimate.

use crate::error::{Error, Result};

/// Result of a quadrature: the value and an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 48;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each panel is split in two until the halves agree with the whole to
/// within `15 · tol_panel`; the Richardson-corrected value is kept and
/// `|halves - whole| / 15` is added to the reported error. Panels stop
/// splitting once the difference is at rounding level. Fails if a panel
/// would need more than 48 bisections or the integrand is not finite.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if tol.is_nan() || tol <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(Error::QuadratureFailure(format!(
            "bad quadrature request on [{a}, {b}] with tolerance {tol}"
        )));
    }
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::QuadratureFailure(format!("integrand is {y} at {x}")))
        }
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    let mut evaluations = 3;
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        tol,
        depth: 0,
    }];
    let (mut value, mut error) = (0.0, 0.0);
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
        let (flm, frm) = (eval(lm)?, eval(rm)?);
        evaluations += 2;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let diff = left + right - p.whole;
        let roundoff = 8.0 * f64::EPSILON * (left.abs() + right.abs());
        if diff.abs() <= (15.0 * p.tol).max(roundoff) {
            value += left + right + diff / 15.0;
            error += diff.abs() / 15.0;
            continue;
        }
        if p.depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure(format!(
                "no convergence on [{}, {}] at tolerance {}",
                p.a, p.b, p.tol
            )));
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}
