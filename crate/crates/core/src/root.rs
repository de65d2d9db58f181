//! Bracketed inversion of strictly increasing scalar functions.
//!
//! The bracket is first shrunk by bisection (geometric once the lower end is
//! positive, so roots spanning many decades are located quickly), then the
//! iteration switches to Newton. Newton iterates that leave the current
//! bracket are replaced by a bisection step, so convergence never depends on
//! the quality of the derivative near a singular endpoint.

use crate::error::{Error, Result};

/// Maximum number of bisection steps before switching to Newton.
pub const MAX_BISECTIONS: usize = 60;
/// Relative bracket width below which Newton takes over.
pub const NEWTON_SWITCH_WIDTH: f64 = 1e-3;
const MAX_NEWTON: usize = 60;

fn midpoint(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        (lo * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}

/// Solves `f(x) = target` for a strictly increasing `f` with
/// `f(lo) <= target <= f(hi)`.
///
/// `tol` is the accepted residual relative to `max(1, |target|)`.
pub fn invert_increasing<F, D>(f: F, df: D, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    if !(lo <= hi) || !target.is_finite() {
        return Err(Error::Inversion { target, lo, hi, iterations: 0 });
    }
    let scale = target.abs().max(1.0);
    let mut iterations = 0;

    while iterations < MAX_BISECTIONS && hi - lo > NEWTON_SWITCH_WIDTH * hi.abs() {
        let mid = midpoint(lo, hi);
        let fm = f(mid) - target;
        iterations += 1;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut x = midpoint(lo, hi);
    for _ in 0..MAX_NEWTON {
        iterations += 1;
        let fx = f(x) - target;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let mut next = x - fx / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = midpoint(lo, hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs() || hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            x = next;
            break;
        }
        x = next;
    }

    if (f(x) - target).abs() <= tol * scale {
        Ok(x)
    } else {
        Err(Error::Inversion { target, lo, hi, iterations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_square() {
        let x = invert_increasing(|x| x * x, |x| 2.0 * x, 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn handles_infinite_slope_at_origin() {
        // x^0.2 has an infinite derivative at zero.
        let target = 1e-6;
        let x = invert_increasing(|x: f64| x.powf(0.2), |x: f64| 0.2 * x.powf(-0.8), target, 1e-40, 1.0, 1e-14)
            .unwrap();
        assert!((x.powf(0.2) - target).abs() <= 1e-14);
        assert!((x / 1e-30 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_inverted_bracket() {
        assert!(invert_increasing(|x| x, |_| 1.0, 0.5, 1.0, 0.0, 1e-12).is_err());
    }
}
