//! Jacobi elliptic functions and Legendre integrals in plain `f64`.
//!
//! Complete integrals come from the arithmetic-geometric mean. The amplitude
//! and the incomplete integrals use the descending Landen (Gauss) chain built
//! from the same AGM sequence. The modulus `k` is used throughout, never the
//! parameter `m = k²`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{EngelError, Result};

const AGM_CAP: usize = 40;
const AGM_TOL: f64 = 1e-16;
const REDUCE_AT: f64 = 1e6;

/// Complementary modulus `√(1−k²)` without cancellation near `k = 1`.
#[inline]
pub fn kprime(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).max(0.0).sqrt()
}

/// AGM ladder started at `(1, k')`. Entry `n` holds `(a_n, b_n, c_n)` with
/// `c_0 = k` and `c_n = (a_{n-1} − b_{n-1})/2`.
#[derive(Debug, Clone)]
struct Ladder {
    a: [f64; AGM_CAP + 1],
    c: [f64; AGM_CAP + 1],
    b: [f64; AGM_CAP + 1],
    n: usize,
}

impl Ladder {
    fn new(k: f64) -> Ladder {
        let mut l = Ladder {
            a: [0.0; AGM_CAP + 1],
            b: [0.0; AGM_CAP + 1],
            c: [0.0; AGM_CAP + 1],
            n: 0,
        };
        l.a[0] = 1.0;
        l.b[0] = kprime(k);
        l.c[0] = k.abs();
        let mut n = 0;
        while n < AGM_CAP && (l.a[n] - l.b[n]).abs() > AGM_TOL * l.a[n] {
            let (a, b) = (l.a[n], l.b[n]);
            l.a[n + 1] = 0.5 * (a + b);
            l.b[n + 1] = (a * b).sqrt();
            l.c[n + 1] = 0.5 * (a - b);
            n += 1;
        }
        l.n = n;
        l
    }

    fn k(&self) -> f64 {
        FRAC_PI_2 / self.a[self.n]
    }

    fn e_over_k(&self) -> f64 {
        let mut s = 0.5 * self.c[0] * self.c[0];
        let mut p = 0.5;
        for i in 1..=self.n {
            p *= 2.0;
            s += p * self.c[i] * self.c[i];
        }
        1.0 - s
    }
}

fn check_modulus(k: f64, allow_one: bool) -> Result<()> {
    let ok = if allow_one {
        (0.0..=1.0).contains(&k)
    } else {
        (0.0..1.0).contains(&k)
    };
    if ok {
        Ok(())
    } else {
        Err(EngelError::Domain(format!("modulus k = {k} outside admissible range")))
    }
}

/// `K(k)` and `E(k)` together from one AGM run. Requires `0 ≤ k < 1`.
pub fn complete_ke(k: f64) -> Result<(f64, f64)> {
    check_modulus(k, false)?;
    Ok(ke_unchecked(k))
}

pub(crate) fn ke_unchecked(k: f64) -> (f64, f64) {
    let l = Ladder::new(k);
    let kk = l.k();
    (kk, kk * l.e_over_k())
}

/// Complete elliptic integral of the first kind.
pub fn complete_k(k: f64) -> Result<f64> {
    check_modulus(k, false)?;
    Ok(Ladder::new(k).k())
}

/// Complete elliptic integral of the second kind, `E(1) = 1`.
pub fn complete_e(k: f64) -> Result<f64> {
    check_modulus(k, true)?;
    if k == 1.0 {
        return Ok(1.0);
    }
    Ok(ke_unchecked(k).1)
}

/// Splits `u = mπ + r` with `r ∈ [−π/2, π/2]`.
fn split_half_turns(u: f64) -> (f64, f64) {
    let m = (u / PI).round();
    (m, u - m * PI)
}

fn wrap_pi(x: f64) -> f64 {
    let r = x - (2.0 * PI) * (x / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Landen phase chain for `|r| ≤ π/2`. Returns `F(r)` and `Σ c_n sin φ_n`.
fn landen_phase(l: &Ladder, r: f64) -> (f64, f64) {
    let mut phi = r;
    let mut sum = 0.0;
    let mut scale = 1.0;
    for i in 0..l.n {
        let psi = phi + wrap_pi((l.b[i] * phi.sin()).atan2(l.a[i] * phi.cos()) - phi);
        phi += psi;
        scale *= 2.0;
        sum += l.c[i + 1] * phi.sin();
    }
    (phi / (scale * l.a[l.n]), sum)
}

fn check_incomplete(u: f64, k: f64) -> Result<()> {
    check_modulus(k, true)?;
    if k == 1.0 && u.abs() >= FRAC_PI_2 {
        return Err(EngelError::Domain(format!(
            "F(u, 1) diverges for |u| = {} >= pi/2",
            u.abs()
        )));
    }
    Ok(())
}

/// Incomplete integral of the first kind `F(u, k)`, extended to all real `u`
/// by `F(u + π) = F(u) + 2K`.
pub fn incomplete_f(u: f64, k: f64) -> Result<f64> {
    check_incomplete(u, k)?;
    Ok(f_unchecked(u, k))
}

pub(crate) fn f_unchecked(u: f64, k: f64) -> f64 {
    if k == 1.0 {
        return u.sin().atanh();
    }
    if k == 0.0 {
        return u;
    }
    let l = Ladder::new(k);
    let (m, r) = split_half_turns(u);
    let (fr, _) = landen_phase(&l, r);
    2.0 * m * l.k() + fr
}

/// Incomplete integral of the second kind `E(u, k)`, with
/// `E(u + π) = E(u) + 2E(k)`.
pub fn incomplete_e(u: f64, k: f64) -> Result<f64> {
    check_modulus(k, true)?;
    Ok(e_unchecked(u, k))
}

pub(crate) fn e_unchecked(u: f64, k: f64) -> f64 {
    fe_unchecked(u, k).1
}

/// `(F(u,k), E(u,k))` sharing a single Landen chain.
pub(crate) fn fe_unchecked(u: f64, k: f64) -> (f64, f64) {
    if k == 0.0 {
        return (u, u);
    }
    let (m, r) = split_half_turns(u);
    if k == 1.0 {
        return (u.sin().atanh(), 2.0 * m + r.sin());
    }
    let l = Ladder::new(k);
    let kk = l.k();
    let eok = l.e_over_k();
    let (fr, sum) = landen_phase(&l, r);
    let er = fr * eok + sum;
    (2.0 * m * kk + fr, 2.0 * m * kk * eok + er)
}

/// Both incomplete integrals, validated.
pub fn incomplete_fe(u: f64, k: f64) -> Result<(f64, f64)> {
    check_incomplete(u, k)?;
    Ok(fe_unchecked(u, k))
}

/// Jacobi amplitude. Total on the reals for `0 ≤ k ≤ 1`.
pub fn am(p: f64, k: f64) -> f64 {
    let k = k.abs();
    if k == 0.0 {
        return p;
    }
    if k >= 1.0 {
        return p.sinh().atan();
    }
    let l = Ladder::new(k);
    am_ladder(&l, p)
}

fn am_ladder(l: &Ladder, p: f64) -> f64 {
    let quarter = l.k();
    let (shift, p) = if p.abs() > REDUCE_AT * quarter {
        let period = 4.0 * quarter;
        let m = (p / period).round();
        (2.0 * PI * m, p - m * period)
    } else {
        (0.0, p)
    };
    let n = l.n;
    let mut phi = 2f64.powi(n as i32) * l.a[n] * p;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (l.c[i] / l.a[i] * phi.sin()).asin());
    }
    phi + shift
}

/// `(sn, cn, dn)` at `(p, k)`.
pub fn sncndn(p: f64, k: f64) -> (f64, f64, f64) {
    let k = k.abs();
    if k >= 1.0 {
        let s = 1.0 / p.cosh();
        return (p.tanh(), s, s);
    }
    let phi = am(p, k);
    let (s, c) = phi.sin_cos();
    let kp = kprime(k);
    (s, c, (c * c + kp * kp * s * s).sqrt())
}

pub fn sn(p: f64, k: f64) -> f64 {
    sncndn(p, k).0
}

pub fn cn(p: f64, k: f64) -> f64 {
    sncndn(p, k).1
}

pub fn dn(p: f64, k: f64) -> f64 {
    sncndn(p, k).2
}

/// `E(p) = ∫₀ᵖ dn² t dt`, i.e. the second-kind integral at the amplitude.
pub fn eps_e(p: f64, k: f64) -> f64 {
    let k = k.abs().min(1.0);
    if k == 1.0 {
        return p.tanh();
    }
    e_unchecked(am(p, k), k)
}

/// Precomputed AGM ladder for repeated evaluation at fixed modulus.
#[derive(Debug, Clone)]
pub struct Jacobi {
    ladder: Ladder,
    k: f64,
    big_k: f64,
    big_e: f64,
}

impl Jacobi {
    /// Requires `0 ≤ k < 1`.
    pub fn new(k: f64) -> Result<Jacobi> {
        check_modulus(k, false)?;
        let ladder = Ladder::new(k);
        let big_k = ladder.k();
        let big_e = big_k * ladder.e_over_k();
        Ok(Jacobi { ladder, k, big_k, big_e })
    }

    pub fn modulus(&self) -> f64 {
        self.k
    }

    pub fn big_k(&self) -> f64 {
        self.big_k
    }

    pub fn big_e(&self) -> f64 {
        self.big_e
    }

    pub fn am(&self, p: f64) -> f64 {
        if self.k == 0.0 {
            return p;
        }
        am_ladder(&self.ladder, p)
    }

    pub fn sncndn(&self, p: f64) -> (f64, f64, f64) {
        let (s, c) = self.am(p).sin_cos();
        let kp = self.ladder.b[0];
        (s, c, (c * c + kp * kp * s * s).sqrt())
    }

    /// `(F(u), E(u))`.
    pub fn fe(&self, u: f64) -> (f64, f64) {
        if self.k == 0.0 {
            return (u, u);
        }
        let (m, r) = split_half_turns(u);
        let eok = self.big_e / self.big_k;
        let (fr, sum) = landen_phase(&self.ladder, r);
        (
            2.0 * m * self.big_k + fr,
            2.0 * m * self.big_e + fr * eok + sum,
        )
    }

    pub fn eps_e(&self, p: f64) -> f64 {
        self.fe(self.am(p)).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_terminates_quickly() {
        for &k in &[0.0, 0.3, 0.9, 0.999_999, 1.0 - 1e-15] {
            let l = Ladder::new(k);
            assert!(l.n < 10, "k={k} took {} steps", l.n);
        }
    }

    #[test]
    fn k_zero_values() {
        assert_eq!(complete_k(0.0).unwrap(), FRAC_PI_2);
        assert!((complete_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(complete_e(1.0).unwrap(), 1.0);
        assert!(complete_k(1.0).is_err());
        assert!(complete_e(1.5).is_err());
        assert!(complete_k(-0.1).is_err());
    }

    #[test]
    fn wrap_keeps_principal_range() {
        for i in -20..20 {
            let x = 0.37 * i as f64;
            let w = wrap_pi(x);
            assert!(w > -PI && w <= PI);
            assert!(((x - w) / (2.0 * PI) - ((x - w) / (2.0 * PI)).round()).abs() < 1e-12);
        }
    }

    #[test]
    fn reduction_branch_matches_direct() {
        let k = 0.6;
        let jk = complete_k(k).unwrap();
        let p = 3.0e6 * jk + 0.4;
        let direct = am(0.4, k) + 2.0 * PI * (p / (4.0 * jk)).round();
        assert!((am(p, k) - direct).abs() < 1e-6 * direct.abs());
    }

    #[test]
    fn jacobi_struct_matches_free_functions() {
        let j = Jacobi::new(0.8).unwrap();
        for i in 0..30 {
            let p = -7.0 + 0.5 * i as f64;
            assert!((j.am(p) - am(p, 0.8)).abs() < 1e-15);
            let (f, e) = j.fe(p);
            let (f2, e2) = fe_unchecked(p, 0.8);
            assert!((f - f2).abs() < 1e-13 && (e - e2).abs() < 1e-13);
        }
    }
}
