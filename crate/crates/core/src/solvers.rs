//! Scalar root bracketing (bisection) and unimodal maximization
//! (golden-section search).
//!
//! Both are deterministic and allocation-free; ballistics uses bisection to
//! place the final integration step on the ground and golden-section search
//! to maximize range over the launch elevation.

use thiserror::Error;

/// Golden ratio conjugate (√5 − 1)/2: the bracket shrink factor per
/// golden-section iteration.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Default relative tolerance for [`golden_max`]: the double-precision unit
/// roundoff, 2⁻⁵³. The final bracket is then shorter than the initial width
/// times u, the tightest meaningful request.
pub const DEFAULT_GOLDEN_TOL: f64 = f64::EPSILON / 2.0;

/// Default iteration cap for [`bisect`].
pub const DEFAULT_BISECT_MAX_ITER: u32 = 200;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid bracket: lo {lo} must be strictly below hi {hi}")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("no sign change on bracket: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    NoBracket { g_lo: f64, g_hi: f64 },
    #[error("no convergence after {iterations} iterations (bracket width {width})")]
    MaxIterations { iterations: u32, width: f64 },
    #[error("non-finite function value at x = {x}")]
    NonFiniteEvaluation { x: f64 },
}

/// A search interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SolverError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SolverError::InvalidBracket { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn check_finite(x: f64, value: f64) -> Result<f64, SolverError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(SolverError::NonFiniteEvaluation { x })
    }
}

/// Bisection root finding on a sign-changing bracket.
///
/// Returns the bracket midpoint once the width is at most `2·tol_abs`, so the
/// result is within `tol_abs` of a root. An exact zero of `g` encountered on
/// the way is returned immediately.
pub fn bisect<G: FnMut(f64) -> f64>(
    mut g: G,
    bracket: Bracket,
    tol_abs: f64,
    max_iter: u32,
) -> Result<f64, SolverError> {
    assert!(tol_abs > 0.0, "tol_abs must be positive");
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let g_lo = check_finite(lo, g(lo))?;
    let g_hi = check_finite(hi, g(hi))?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(SolverError::NoBracket { g_lo, g_hi });
    }
    let lo_sign = g_lo.signum();
    let mut iterations = 0;
    while hi - lo > 2.0 * tol_abs {
        if iterations >= max_iter {
            return Err(SolverError::MaxIterations { iterations, width: hi - lo });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket already at floating-point resolution
        }
        let g_mid = check_finite(mid, g(mid))?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal function.
///
/// The bracket shrinks by the factor (√5 − 1)/2 per iteration, reusing one
/// interior evaluation so `phi` is called exactly once per iteration after
/// the two initial probes. Ties between the interior values shrink the high
/// side, deterministically. Stops when the width falls to
/// `tol_rel · initial width`; returns the final bracket midpoint and `phi`
/// evaluated there.
pub fn golden_max<F: FnMut(f64) -> f64>(
    mut phi: F,
    bracket: Bracket,
    tol_rel: f64,
) -> Result<(f64, f64), SolverError> {
    assert!(tol_rel > 0.0, "tol_rel must be positive");
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let target = tol_rel * (hi - lo);

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = check_finite(x1, phi(x1))?;
    let mut f2 = check_finite(x2, phi(x2))?;

    let mut width = hi - lo;
    while width > target {
        if f1 > f2 {
            // maximum is in [lo, x2]
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = check_finite(x1, phi(x1))?;
        } else {
            // f2 >= f1 (ties shrink the high side too): maximum in [x1, hi]
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = check_finite(x2, phi(x2))?;
        }
        let new_width = hi - lo;
        if new_width >= width {
            break; // floating-point resolution reached
        }
        width = new_width;
    }
    let mid = 0.5 * (lo + hi);
    let value = check_finite(mid, phi(mid))?;
    Ok((mid, value))
}
