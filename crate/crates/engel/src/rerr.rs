//! Floating-point values carrying a running bound on their accumulated
//! rounding error. Used to decide whether a kernel value is distinguishable
//! from zero.

use std::ops::{Add, Mul, Neg, Sub};

const U: f64 = f64::EPSILON * 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Rv {
    pub v: f64,
    pub e: f64,
}

impl Rv {
    /// A computed input with relative error `rel`.
    pub fn input(v: f64, rel: f64) -> Rv {
        Rv { v, e: rel * v.abs() }
    }

    /// A correctly rounded elementary function value.
    pub fn rounded(v: f64) -> Rv {
        Rv::input(v, 2.0 * U)
    }

    pub fn sqrt(self) -> Rv {
        let v = self.v.max(0.0).sqrt();
        let e = if v > 0.0 { 0.5 * self.e / v + U * v } else { self.e.sqrt() };
        Rv { v, e }
    }

    pub fn powi(self, n: u32) -> Rv {
        let mut out = Rv { v: 1.0, e: 0.0 };
        for _ in 0..n {
            out = out * self;
        }
        out
    }

    pub fn sq(self) -> Rv {
        self * self
    }
}

impl Add for Rv {
    type Output = Rv;
    fn add(self, o: Rv) -> Rv {
        let v = self.v + o.v;
        Rv { v, e: self.e + o.e + U * v.abs() }
    }
}

impl Sub for Rv {
    type Output = Rv;
    fn sub(self, o: Rv) -> Rv {
        let v = self.v - o.v;
        Rv { v, e: self.e + o.e + U * v.abs() }
    }
}

impl Mul for Rv {
    type Output = Rv;
    fn mul(self, o: Rv) -> Rv {
        let v = self.v * o.v;
        Rv {
            v,
            e: self.v.abs() * o.e + o.v.abs() * self.e + self.e * o.e + U * v.abs(),
        }
    }
}

impl Neg for Rv {
    type Output = Rv;
    fn neg(self) -> Rv {
        Rv { v: -self.v, e: self.e }
    }
}

impl Add<f64> for Rv {
    type Output = Rv;
    fn add(self, o: f64) -> Rv {
        self + Rv { v: o, e: 0.0 }
    }
}

impl Sub<f64> for Rv {
    type Output = Rv;
    fn sub(self, o: f64) -> Rv {
        self - Rv { v: o, e: 0.0 }
    }
}

impl Mul<f64> for Rv {
    type Output = Rv;
    fn mul(self, o: f64) -> Rv {
        let v = self.v * o;
        Rv { v, e: self.e * o.abs() + U * v.abs() }
    }
}

impl Add<Rv> for f64 {
    type Output = Rv;
    fn add(self, o: Rv) -> Rv {
        o + self
    }
}

impl Sub<Rv> for f64 {
    type Output = Rv;
    fn sub(self, o: Rv) -> Rv {
        Rv { v: self, e: 0.0 } - o
    }
}

impl Mul<Rv> for f64 {
    type Output = Rv;
    fn mul(self, o: Rv) -> Rv {
        o * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_tracked() {
        let a = Rv::rounded(1.0 + 1e-10);
        let b = Rv::rounded(1.0);
        let d = a - b;
        assert!(d.e > 1e-16 && d.e < 1e-15);
        assert!(d.e / d.v.abs() > 1e-7);
    }

    #[test]
    fn products_bound_true_error() {
        let x = 0.1f64;
        let r = Rv::rounded(x) * Rv::rounded(x) * 3.0;
        assert!((r.v - 0.03).abs() <= r.e);
    }
}
