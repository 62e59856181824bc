//! Truncated power series in one variable, used to differentiate the closed
//! form of `W` exactly up to fourth order.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 5;

/// `c[0] + c[1] s + ... + c[4] s⁴ + O(s⁵)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series(pub [f64; ORDER]);

impl Series {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; ORDER];
        a[0] = c;
        Series(a)
    }

    /// `c0 + c1 s + c2 s²`.
    pub fn quadratic(c0: f64, c1: f64, c2: f64) -> Self {
        Series([c0, c1, c2, 0.0, 0.0])
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn scale(self, k: f64) -> Self {
        Series(self.0.map(|x| k * x))
    }

    pub fn sqrt(self) -> Self {
        let a = self.0;
        let mut c = [0.0; ORDER];
        c[0] = a[0].sqrt();
        for k in 1..ORDER {
            let cross: f64 = (1..k).map(|j| c[j] * c[k - j]).sum();
            c[k] = (a[k] - cross) / (2.0 * c[0]);
        }
        Series(c)
    }

    pub fn exp(self) -> Self {
        // e' = a' e
        let a = self.0;
        let mut e = [0.0; ORDER];
        e[0] = a[0].exp();
        for k in 1..ORDER {
            e[k] = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum::<f64>() / k as f64;
        }
        Series(e)
    }

    pub fn ln(self) -> Self {
        // l' = a' / a
        let a = self.0;
        let mut l = [0.0; ORDER];
        l[0] = a[0].ln();
        for k in 1..ORDER {
            let inner: f64 = (1..k).map(|j| j as f64 * l[j] * a[k - j]).sum();
            l[k] = (k as f64 * a[k] - inner) / (k as f64 * a[0]);
        }
        Series(l)
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, o: Series) -> Series {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(o.0) {
            *x += y;
        }
        Series(c)
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, o: Series) -> Series {
        self + (-o)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, o: Series) -> Series {
        let mut c = [0.0; ORDER];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate().take(ORDER - i) {
                c[i + j] += a * b;
            }
        }
        Series(c)
    }
}

impl Div for Series {
    type Output = Series;
    fn div(self, o: Series) -> Series {
        let (a, b) = (self.0, o.0);
        let mut c = [0.0; ORDER];
        for k in 0..ORDER {
            let cross: f64 = (0..k).map(|j| c[j] * b[k - j]).sum();
            c[k] = (a[k] - cross) / b[0];
        }
        Series(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Series, b: [f64; ORDER]) {
        for (x, y) in a.0.iter().zip(b) {
            assert!((x - y).abs() < 1e-13, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn elementary() {
        let x = Series([0.0, 1.0, 0.0, 0.0, 0.0]);
        let one = Series::constant(1.0);
        close((one + x).sqrt(), [1.0, 0.5, -0.125, 0.0625, -0.0390625]);
        close(one / (one - x), [1.0; ORDER]);
        close(x.exp(), [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]);
        close((one + x).ln(), [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25]);
        let q = Series::quadratic(2.0, -1.0, 3.0);
        close((q * q).sqrt(), q.0);
        close((q * q) / q, q.0);
        close(q.ln().exp(), q.0);
    }
}
