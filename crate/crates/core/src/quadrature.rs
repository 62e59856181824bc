//! Adaptive Simpson quadrature.

const MAX_DEPTH: u32 = 50;

/// `∫_a^b f` to absolute tolerance `tol` (signed; `b < a` allowed).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a.min(b) || m >= a.max(b) {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Signed integrals `∫_{z0}^{grid[k]} f` for every grid point, accumulated
/// cell by cell outward from `z0`. The grid must be sorted.
pub fn cumulative_from(grid: &[f64], z0: f64, f: impl Fn(f64) -> f64, tol: f64) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    let split = grid.partition_point(|&z| z < z0);
    let mut acc = 0.0;
    let mut prev = z0;
    for k in split..n {
        acc += adaptive_simpson(&f, prev, grid[k], tol);
        out[k] = acc;
        prev = grid[k];
    }
    acc = 0.0;
    prev = z0;
    for k in (0..split).rev() {
        acc += adaptive_simpson(&f, prev, grid[k], tol);
        out[k] = acc;
        prev = grid[k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_kinks() {
        let v = adaptive_simpson(&|x: f64| x.powi(4), 0.0, 2.0, 1e-12);
        assert!((v - 6.4).abs() < 1e-11);
        let v = adaptive_simpson(&|x: f64| x.abs(), -1.0, 2.0, 1e-12);
        assert!((v - 2.5).abs() < 1e-11);
        let v = adaptive_simpson(&|x: f64| x.sin(), std::f64::consts::PI, 0.0, 1e-12);
        assert!((v + 2.0).abs() < 1e-11);
    }

    #[test]
    fn cumulative() {
        let grid: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let c = cumulative_from(&grid, 0.05, |x| 2.0 * x, 1e-13);
        for (z, v) in grid.iter().zip(&c) {
            assert!((v - (z * z - 0.0025)).abs() < 1e-12);
        }
    }
}
