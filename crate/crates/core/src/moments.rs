//! Moment approximations to first order in ε around a monomorphic ESS.

use serde::{Deserialize, Serialize};

use crate::correctors::CorrectorSet;
use crate::error::{Error, Result};
use crate::hj::UTaylor;

/// `k`-th central moment of a centred Gaussian with variance `var`.
pub fn gaussian_central_moment(k: u32, var: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let double_factorial: f64 = (1..k).step_by(2).map(f64::from).product();
    var.powi(k as i32 / 2) * double_factorial
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub eps: f64,
    pub n_eps: [f64; 2],
    pub mean: [f64; 2],
    pub variance: [f64; 2],
    pub skewness: [f64; 2],
}

pub fn moment_summary(t: &UTaylor, cs: &CorrectorSet, eps: f64) -> Result<MomentSummary> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let (a, b, c) = (t.a, t.b, t.c);
    let n = [cs.n_star.n1, cs.n_star.n2];
    let per = |i: usize| {
        let (d, e, f) = (cs.d[i], cs.e[i], cs.f[i]);
        let size = n[i] * (1.0 + eps * (f + (e + 0.5 * d * d) / a + 3.0 * (c + b * d) / (a * a) + 7.5 * b * b / a.powi(3)));
        let mean = t.z_star + eps * (3.0 * b / (a * a) + d / a);
        (size, mean)
    };
    let (s1, m1) = per(0);
    let (s2, m2) = per(1);
    let var = eps / a;
    let skew = 6.0 * b * eps.sqrt() / a.powf(1.5);
    Ok(MomentSummary { eps, n_eps: [s1, s2], mean: [m1, m2], variance: [var, var], skewness: [skew, skew] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_central_moment(0, 3.0), 1.0);
        assert_eq!(gaussian_central_moment(2, 0.7), 0.7);
        assert_eq!(gaussian_central_moment(3, 0.7), 0.0);
        assert_eq!(gaussian_central_moment(4, 2.0), 12.0);
        assert_eq!(gaussian_central_moment(8, 1.0), 105.0);
    }
}
