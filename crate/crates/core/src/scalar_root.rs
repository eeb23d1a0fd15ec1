//! Internal scalar root finding: geometric bracket expansion around a seed
//! followed by safeguarded bisection with secant acceleration.
//!
//! All callers deal with functions known to be negative far left and
//! positive far right (shooting maps, monotone operator inversions), so the
//! expansion keeps that orientation.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

/// Widen `[seed - w, seed + w]` geometrically until `f` is negative at the
/// left end and positive at the right end. `w` starts at `half_width` and
/// multiplies by `factor` after every failed attempt.
pub(crate) fn expand_bracket<T: Real>(
    mut f: impl FnMut(T) -> Result<T>,
    seed: T,
    half_width: T,
    factor: T,
    max_expansions: usize,
    context: &'static str,
) -> Result<Bracket<T>> {
    let mut w = half_width;
    let mut lo = seed - w;
    let mut hi = seed + w;
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    for _ in 0..max_expansions {
        if f_lo < T::zero() && f_hi >= T::zero() {
            return Ok(Bracket { lo, hi, f_lo, f_hi });
        }
        if f_lo == T::zero() {
            return Ok(Bracket { lo, hi: lo, f_lo, f_hi: f_lo });
        }
        w = w * factor;
        if f_lo > T::zero() {
            lo = seed - w;
            f_lo = f(lo)?;
        }
        if f_hi < T::zero() {
            hi = seed + w;
            f_hi = f(hi)?;
        }
    }
    if f_lo < T::zero() && f_hi >= T::zero() {
        return Ok(Bracket { lo, hi, f_lo, f_hi });
    }
    Err(Error::BracketNotFound { context, attempts: max_expansions })
}

pub(crate) struct RootOutcome<T> {
    pub root: T,
    pub f_root: T,
    pub iterations: usize,
}

/// Bisection on a sign-change bracket, with a secant candidate tried first
/// at every step. Stops as soon as `accept(x, f(x))` holds or the bracket
/// width drops below `x_tol(x)`.
pub(crate) fn refine_root<T: Real>(
    mut f: impl FnMut(T) -> Result<T>,
    bracket: Bracket<T>,
    x_tol: impl Fn(T) -> T,
    accept: impl Fn(T, T) -> bool,
    max_iterations: usize,
    context: &'static str,
) -> Result<RootOutcome<T>> {
    let Bracket { mut lo, mut hi, mut f_lo, mut f_hi } = bracket;
    if accept(lo, f_lo) || lo == hi {
        return Ok(RootOutcome { root: lo, f_root: f_lo, iterations: 0 });
    }
    if accept(hi, f_hi) {
        return Ok(RootOutcome { root: hi, f_root: f_hi, iterations: 0 });
    }
    debug_assert!(f_lo < T::zero() && f_hi >= T::zero());

    let mut best = if f_lo.abs() < f_hi.abs() {
        RootOutcome { root: lo, f_root: f_lo, iterations: 0 }
    } else {
        RootOutcome { root: hi, f_root: f_hi, iterations: 0 }
    };

    for it in 1..=max_iterations {
        let width = hi - lo;
        let mid = lo + width * T::c(0.5);
        // Secant candidate; fall back to the midpoint unless it lands
        // strictly inside the bracket.
        let mut x = mid;
        if f_hi != f_lo {
            let secant = hi - f_hi * width / (f_hi - f_lo);
            let margin = width * T::c(0.01);
            if secant > lo + margin && secant < hi - margin {
                x = secant;
            }
        }
        let fx = f(x)?;
        if fx.abs() < best.f_root.abs() {
            best = RootOutcome { root: x, f_root: fx, iterations: it };
        }
        if accept(x, fx) {
            return Ok(RootOutcome { root: x, f_root: fx, iterations: it });
        }
        if fx < T::zero() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if hi - lo <= x_tol(x) {
            best.iterations = it;
            return Ok(best);
        }
    }
    Err(Error::NonConvergence { method: context, iterations: max_iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let br = expand_bracket(f, 0.0, 0.5, 4.0, 60, "cubic").unwrap();
        let out = refine_root(
            f,
            br,
            |x: f64| 1e-14 * (1.0 + x.abs()),
            |_, fx| fx.abs() < 1e-13,
            200,
            "cubic",
        )
        .unwrap();
        assert!((out.root - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn bracket_failure_is_reported() {
        let f = |_x: f64| Ok(1.0);
        let err = expand_bracket(f, 0.0, 1.0, 4.0, 8, "flat").unwrap_err();
        assert!(matches!(err, Error::BracketNotFound { attempts: 8, .. }));
    }
}
