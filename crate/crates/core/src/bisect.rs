//! Bracketing root finder used for every monotone map in the crate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    /// Absolute tolerance on the unknown. Zero means "until the bracket
    /// cannot shrink further".
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Bisection {
    fn default() -> Self {
        Bisection { tol: 1e-12, max_iter: 200 }
    }
}

impl Bisection {
    pub const FULL: Bisection = Bisection { tol: 0.0, max_iter: 200 };

    /// Root of `f` in `[lo, hi]` given the signs of `f` at the ends.
    ///
    /// The end values are passed in rather than evaluated so that callers can
    /// supply one-sided limits at points where `f` is undefined.
    pub fn solve_with_signs<F>(&self, mut f: F, mut lo: f64, mut hi: f64, f_lo: f64, f_hi: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
            return Err(Error::NoRoot(format!(
                "f({lo:.6e}) = {f_lo:.3e}, f({hi:.6e}) = {f_hi:.3e}"
            )));
        }
        let lo_positive = f_lo > 0.0;
        for _ in 0..self.max_iter {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= self.tol || mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid)?;
            if fm == 0.0 {
                return Ok(mid);
            }
            if (fm > 0.0) == lo_positive {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn solve<F>(&self, mut f: F, lo: f64, hi: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let f_lo = f(lo)?;
        let f_hi = f(hi)?;
        self.solve_with_signs(f, lo, hi, f_lo, f_hi)
    }
}

/// Grow `hi` geometrically from `start` (relative to `base`) until
/// `f(hi)` has the wanted sign. Returns `(hi, f(hi))`.
pub fn expand_upper<F>(mut f: F, base: f64, start: f64, want_positive: bool, what: &str) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut step = start;
    for _ in 0..200 {
        let x = base + step;
        let v = f(x)?;
        if (v > 0.0) == want_positive && v != 0.0 {
            return Ok((x, v));
        }
        step *= 2.0;
    }
    Err(Error::NoRoot(format!("{what}: upper bracket expansion failed")))
}

/// Shrink toward `base` from `base + start` until `f` has the wanted sign.
pub fn shrink_lower<F>(mut f: F, base: f64, start: f64, want_positive: bool, what: &str) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut step = start;
    for _ in 0..1000 {
        let x = base + step;
        if x <= base {
            break;
        }
        let v = f(x)?;
        if (v > 0.0) == want_positive && v != 0.0 {
            return Ok((x, v));
        }
        step *= 0.5;
    }
    Err(Error::NoRoot(format!("{what}: lower bracket search failed")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = Bisection::default().solve(|x| Ok(x * x - 2.0), 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let r = Bisection::FULL.solve(|x| Ok(x * x - 2.0), 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 4e-16);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let e = Bisection::default().solve(|x| Ok(x * x + 1.0), -1.0, 1.0);
        assert!(matches!(e, Err(Error::NoRoot(_))));
    }

    #[test]
    fn expansion() {
        let (hi, v) = expand_upper(|x| Ok(100.0 - x), 0.0, 1.0, false, "t").unwrap();
        assert!(hi > 100.0 && v < 0.0);
        let (lo, v) = shrink_lower(|x| Ok(1.0 / x - 1e6), 0.0, 1.0, true, "t").unwrap();
        assert!(lo < 1e-6 && v > 0.0);
    }
}
