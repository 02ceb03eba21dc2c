//! Closed-form Jacobian kernels on the oscillating (C1) and rotating (C2)
//! strata at `α = 1`, with the auxiliary functions used to certify their
//! signs.
//!
//! On both strata the Jacobian determinant factors as `R·J1` with
//! `J1 = d0 + d2·x + d4·x²`, `x = sin²u₂`. Coefficients are evaluated with a
//! running rounding-error bound so that callers can tell a genuine sign from
//! cancellation noise.

use crate::elliptic::{self, Jacobi};
use crate::error::{EngelError, Result};
use crate::pendulum::Stratum;
use crate::rerr::Rv;

const U: f64 = f64::EPSILON * 0.5;
/// Relative error assumed for the incomplete integrals from the Landen chain.
const LANDEN_REL: f64 = 16.0 * U;
/// A kernel value is determinate when it exceeds this multiple of its bound.
const NOISE_FACTOR: f64 = 2.0;

/// Arguments of a kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelInput {
    pub u1: f64,
    pub x: f64,
    pub k: f64,
    pub stratum: Stratum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub d0: f64,
    pub d2: f64,
    pub d4: f64,
    pub j1: f64,
    pub r: f64,
    /// Bound on the rounding error in `j1`.
    pub j1_err: f64,
}

impl KernelValue {
    pub fn determinate(&self) -> bool {
        self.j1.abs() > NOISE_FACTOR * self.j1_err
    }

    /// Sign of `R·J1`, or `0` inside the noise band.
    pub fn sign(&self) -> i8 {
        if !self.determinate() {
            0
        } else if self.r * self.j1 > 0.0 {
            1
        } else {
            -1
        }
    }

    /// The determinant-like product `R·J1`.
    pub fn rj1(&self) -> f64 {
        self.r * self.j1
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(EngelError::Domain(format!("kernel modulus k = {k} must lie in (0,1)")))
    }
}

fn check_x(x: f64) -> Result<()> {
    if (-1e-12..=1.0 + 1e-12).contains(&x) {
        Ok(())
    } else {
        Err(EngelError::Domain(format!("x = {x} must lie in [0,1]")))
    }
}

/// Trigonometric and elliptic building blocks at `(u1, k)`.
#[derive(Debug, Clone, Copy)]
struct Parts {
    s: Rv,
    c: Rv,
    k2: Rv,
    kc2: Rv,
    w: Rv,
    d: Rv,
    f: Rv,
    e: Rv,
    s2: Rv,
    c2: Rv,
}

impl Parts {
    fn new(jac: &Jacobi, u: f64) -> Parts {
        let k = jac.modulus();
        let (fv, ev) = jac.fe(u);
        Parts::from_fe(k, u, fv, ev)
    }

    fn from_fe(k: f64, u: f64, fv: f64, ev: f64) -> Parts {
        let (sv, cv) = u.sin_cos();
        let s = Rv::rounded(sv);
        let c = Rv::rounded(cv);
        let k2 = Rv::rounded(k * k);
        let kc2 = Rv::rounded((1.0 - k) * (1.0 + k));
        let w = 1.0 - k2 * s.sq();
        Parts {
            s,
            c,
            k2,
            kc2,
            w,
            d: w.sqrt(),
            f: Rv::input(fv, LANDEN_REL),
            e: Rv::input(ev, LANDEN_REL),
            s2: Rv::rounded((2.0 * u).sin()),
            c2: Rv::rounded((2.0 * u).cos()),
        }
    }

    fn f_zu(&self) -> Rv {
        self.s * self.d + (self.f - 2.0 * self.e) * self.c
    }

    fn a1(&self) -> Rv {
        let Parts { s, c, k2, kc2, w, d, f, e, c2, .. } = *self;
        let k4 = k2 * k2;
        let q = 1.0 - 2.0 * k2 * s.sq();
        let w32 = w * d;
        let t1 = 4.0 * kc2 * c * q * d * f.sq();
        let t2 = 4.0 * k2 * c * s.sq() * w32;
        let t3 = 4.0 * s * w * e.powi(3);
        let t4 = -2.0 * kc2 * s * w * f.powi(3);
        let t5 = 2.0 * f * (s - 2.0 * k2 * (3.0 - 2.0 * k2) * s.powi(3) + k4 * (5.0 - 4.0 * k2) * s.powi(5));
        let t6 = e.sq() * (2.0 * (4.0 * k2 - 5.0) * w * s * f + 6.0 * c * q * d);
        let t7 = e
            * (2.0 * (4.0 * k2 - 5.0) * c * q * d * f + 8.0 * kc2 * w * s * f.sq()
                - 2.0 * (1.0 + k2 + 3.0 * k2 * c2) * s * w);
        0.5 * (t1 + t2 + t3 + t4 + t5 + t6 + t7)
    }

    fn a2(&self) -> Rv {
        let Parts { s, c, k2, kc2, d, f, e, .. } = *self;
        -(c * ((e - f).sq() + k2 * f * (2.0 * e - f))) + s * d * (e - kc2 * f)
    }

    fn c1_coeffs(&self) -> (Rv, Rv, Rv) {
        let a2 = self.a2();
        let fz = self.f_zu();
        let d0 = self.a1() * self.s;
        let d4 = self.k2 * a2 * fz;
        let d2 = -(a2 * fz) - d0;
        (d0, d2, d4)
    }

    fn c2_coeffs(&self) -> (Rv, Rv, Rv) {
        let Parts { s, c, k2, kc2, w, d, f, e, s2, c2 } = *self;
        let k4 = k2 * k2;
        let two_k = 2.0 - k2;
        let poly = 8.0 - 8.0 * k2 + k4 + k2 * two_k * c2;
        let cubic = 2.0 - 3.0 * k2 + k4;

        let d0 = 0.25
            * s
            * c
            * (4.0 * e.powi(3) * s2 - 4.0 * kc2 * c2 * d * f.sq()
                + poly * s2 * f
                + 2.0 * cubic * s2 * f.powi(3)
                + 2.0 * k2 * d * s2.sq()
                + 2.0 * e.sq() * (6.0 * c2 * d - two_k * s2 * f)
                - e * (4.0 * two_k * c2 * d * f
                    + 2.0 * (4.0 - 2.0 * k2 + 3.0 * k2 * c2) * s2
                    + 4.0 * kc2 * s2 * f.sq()));

        let q = 1.0 - k2 * s.powi(4);
        let s3 = s.powi(3);
        let d2 = -2.0 * k2 * kc2 * c * s3 * d * f.sq() - 2.0 * k4 * c.powi(3) * s3 * d
            - 2.0 * q * e.powi(3)
            - cubic * q * f.powi(3)
            + e.sq() * (6.0 * k2 * c * s3 * d + two_k * q * f)
            + e * (k2 * c.sq() * s.sq() * (4.0 - 3.0 * k2 + 3.0 * k2 * c2)
                - 2.0 * k2 * two_k * c * s3 * d * f
                + 2.0 * kc2 * q * f.sq())
            - 0.125 * k2 * poly * s2.sq() * f;

        let d4 = 2.0 * w * e.powi(3) - e.sq() * (3.0 * k2 * c * s * d + two_k * w * f)
            + 0.25 * kc2 * f.sq() * (2.0 * two_k * (2.0 - k2 + k2 * c2) * f + 2.0 * k2 * d * s2)
            + 0.25 * e * (4.0 * k4 * c.sq() * s.sq() - 8.0 * kc2 * w * f.sq() + 2.0 * k2 * two_k * s2 * d * f);
        (d0, d2, d4)
    }
}

fn assemble(k: f64, s: f64, x: f64, (d0, d2, d4): (Rv, Rv, Rv)) -> KernelValue {
    let xr = Rv::rounded(x);
    let j1 = d0 + d2 * xr + d4 * xr.sq();
    let k2 = k * k;
    let den = 1.0 - k2 * s * s * x;
    KernelValue {
        d0: d0.v,
        d2: d2.v,
        d4: d4.v,
        j1: j1.v,
        r: -32.0 / (k * (1.0 - k2) * den * den),
        j1_err: j1.e,
    }
}

/// Kernel evaluator with the elliptic ladder cached for one modulus.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub stratum: Stratum,
    jac: Jacobi,
}

impl Kernel {
    pub fn new(stratum: Stratum, k: f64) -> Result<Kernel> {
        check_k(k)?;
        if !stratum.is_elliptic() {
            return Err(EngelError::Stratum(format!("no closed-form kernel on {stratum}")));
        }
        Ok(Kernel {
            stratum,
            jac: Jacobi::new(k)?,
        })
    }

    pub fn k(&self) -> f64 {
        self.jac.modulus()
    }

    pub fn jacobi(&self) -> &Jacobi {
        &self.jac
    }

    pub fn eval(&self, u1: f64, x: f64) -> KernelValue {
        let p = Parts::new(&self.jac, u1);
        let coeffs = match self.stratum {
            Stratum::C1 => p.c1_coeffs(),
            _ => p.c2_coeffs(),
        };
        assemble(self.k(), p.s.v, x, coeffs)
    }

    /// `(u1, x)` along the extremal with phase `φ` at time `t`, for `α = 1`.
    pub fn arguments(&self, phi: f64, t: f64) -> (f64, f64) {
        let (p, tau) = match self.stratum {
            Stratum::C1 => (0.5 * t, phi + 0.5 * t),
            _ => {
                let k = self.k();
                (t / (2.0 * k), (2.0 * phi + t) / (2.0 * k))
            }
        };
        let u1 = self.jac.am(p);
        let s2 = self.jac.am(tau).sin();
        (u1, s2 * s2)
    }

    pub fn eval_at(&self, phi: f64, t: f64) -> KernelValue {
        let (u1, x) = self.arguments(phi, t);
        self.eval(u1, x)
    }
}

pub fn kernel(inp: &KernelInput) -> Result<KernelValue> {
    check_x(inp.x)?;
    Ok(Kernel::new(inp.stratum, inp.k)?.eval(inp.u1, inp.x))
}

pub fn kernel_c1(inp: &KernelInput) -> Result<KernelValue> {
    if inp.stratum != Stratum::C1 {
        return Err(EngelError::Stratum(format!("kernel_c1 called with {}", inp.stratum)));
    }
    kernel(inp)
}

pub fn kernel_c2(inp: &KernelInput) -> Result<KernelValue> {
    if inp.stratum != Stratum::C2 {
        return Err(EngelError::Stratum(format!("kernel_c2 called with {}", inp.stratum)));
    }
    kernel(inp)
}

fn parts(u1: f64, k: f64) -> Result<Parts> {
    check_k(k)?;
    let (f, e) = elliptic::fe_unchecked(u1, k);
    Ok(Parts::from_fe(k, u1, f, e))
}

pub fn f_zu(u1: f64, k: f64) -> Result<f64> {
    Ok(parts(u1, k)?.f_zu().v)
}

pub fn a1(u1: f64, k: f64) -> Result<f64> {
    Ok(parts(u1, k)?.a1().v)
}

pub fn a2(u1: f64, k: f64) -> Result<f64> {
    Ok(parts(u1, k)?.a2().v)
}

/// Quadratic form of `a1` in `F(u1)` valid where `f_zu(u1, k) = 0`:
/// `4cos³u1·a1 = e0·F² + e1·F + e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A1Quadratic {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub f: f64,
    pub cos_u: f64,
}

impl A1Quadratic {
    pub fn discriminant(&self) -> f64 {
        self.e1 * self.e1 - 4.0 * self.e0 * self.e2
    }

    /// Value of `a1`; `None` where `|cos u1| < 1e-6`.
    pub fn a1(&self) -> Option<f64> {
        if self.cos_u.abs() < 1e-6 {
            return None;
        }
        Some((self.e0 * self.f * self.f + self.e1 * self.f + self.e2) / (4.0 * self.cos_u.powi(3)))
    }
}

pub fn a1_quadratic(u1: f64, k: f64) -> Result<A1Quadratic> {
    check_k(k)?;
    let (s, c) = u1.sin_cos();
    let k2 = k * k;
    let w = 1.0 - k2 * s * s;
    let common = 1.0 - k2 * (1.0 - c.powi(4));
    Ok(A1Quadratic {
        e0: c * c * w.sqrt() * common,
        e1: -2.0 * s * c * w * (1.0 - 2.0 * k2 * s * s + (2.0 * k2 * k2 - k2) * s.powi(4)),
        e2: s * s * w * w.sqrt() * common,
        f: elliptic::f_unchecked(u1, k),
        cos_u: c,
    })
}

/// `a1` at a zero of `f_zu`, through the quadratic form away from
/// `cos u1 = 0` and directly otherwise.
pub fn a1_at_fzu_zero(u1: f64, k: f64) -> Result<f64> {
    match a1_quadratic(u1, k)?.a1() {
        Some(v) => Ok(v),
        None => a1(u1, k),
    }
}

/// The closed-form discriminant `−16k²(1−k²) sin⁶u cos²u (1−k² sin²u)⁴`.
pub fn a1_discriminant_closed(u1: f64, k: f64) -> f64 {
    let (s, c) = u1.sin_cos();
    let w = 1.0 - k * k * s * s;
    -16.0 * k * k * (1.0 - k * k) * s.powi(6) * c * c * w.powi(4)
}

/// `((k²−2)p + 2E(p))·dn p − k²·sn p·cn p`.
pub fn g_z(p: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    let j = Jacobi::new(k)?;
    let (sn, cn, dn) = j.sncndn(p);
    Ok(((k * k - 2.0) * p + 2.0 * j.eps_e(p)) * dn - k * k * sn * cn)
}

/// `E² + 2(k²−1)EK − (k²−1)K²`.
pub fn f3(k: f64) -> Result<f64> {
    check_k(k)?;
    let (kk, ee) = elliptic::ke_unchecked(k);
    let m1 = k * k - 1.0;
    Ok(ee * ee + 2.0 * m1 * ee * kk - m1 * kk * kk)
}

/// `E² − (1−k²)K²`.
pub fn f4(k: f64) -> Result<f64> {
    check_k(k)?;
    let (kk, ee) = elliptic::ke_unchecked(k);
    Ok(ee * ee - (1.0 - k) * (1.0 + k) * kk * kk)
}

/// Switch point between Taylor series and the trigonometric forms.
const SERIES_BELOW: f64 = 0.5;

type Series = (i32, [f64; 14]);

#[rustfmt::skip]
mod series {
    use super::Series;
    pub(super) const C1_D0: Series = (11, [-0.0008465608465608466, 0.0002821869488536155, -4.202264519724837e-05, 3.852702265400678e-06, -2.4849407565456947e-07, 1.2123174474534771e-08, -4.680302885000323e-10, 1.4745730386821722e-11, -3.8775894401189465e-13, 8.65911766912407e-15, -1.66499384470164e-16, 2.788262357106351e-18, -4.105962602153404e-20, 5.360963648464845e-22]);
    pub(super) const C1_D0_PLUS_D2: Series = (9, [-0.02962962962962963, 0.009312169312169312, -0.0014109347442680777, 0.00013779518541423303, -9.735120846231958e-06, 5.283109339546729e-07, -2.284837601680388e-08, 8.079030295749697e-10, -2.38157203347438e-11, 5.945332069553645e-13, -1.2733811990886075e-14, 2.3660342460906934e-16, -3.850453155439738e-18, 5.534121753932419e-20]);
    pub(super) const C2_D0: Series = (11, [0.8668783068783069, -1.155837742504409, 0.6884990189117173, -0.25249069566529886, 0.06514123096839146, -0.012712069797809773, 0.0019630613111768394, -0.0002473923037774716, 2.6022062238477853e-05, -2.324414200068977e-06, 1.7877735277587116e-07, -1.197549563643965e-08, 7.053990037939172e-10, -3.684026167232216e-11]);
    pub(super) const F1: Series = (5, [17.066666666666666, -13.003174603174603, 4.334391534391535, -0.840609267275934, 0.10777041888153, -0.009853295440597027, 0.0006762065498448941, -3.61547361654747e-05, 1.5494886928060588e-06, -5.44396554345563e-08, 1.5968965594136515e-09, -3.970527575853679e-11, 8.475674628259085e-13, -1.5703483182217e-14]);
    pub(super) const F2: Series = (6, [2.8444444444444446, -1.6253968253968254, 0.43343915343915346, -0.0700507722729945, 0.007697887062966428, -0.0006158309650373142, 3.756703054693856e-05, -1.8077368082737352e-06, 7.043130421845722e-08, -2.268318976439846e-09, 6.14190984389866e-11, -1.4180455628048854e-12, 2.8252248760863615e-14, -4.907338494442812e-16]);
    pub(super) const SIN4U_MINUS_4U: Series = (3, [-10.666666666666666, 8.533333333333333, -3.250793650793651, 0.7223985890652558, -0.10507615840949175, 0.010777041888152998, -0.0008211079533830857, 4.830046784606386e-05, -2.259671010342169e-06, 8.608270515589216e-08, -2.721982771727815e-09, 7.258620724607507e-11, -1.6543864899390329e-12, 3.2598748570227246e-14]);
}

fn eval_series(s: &Series, u: f64) -> f64 {
    let u2 = u * u;
    let mut acc = 0.0;
    for c in s.1.iter().rev() {
        acc = acc * u2 + c;
    }
    acc * u.powi(s.0)
}

fn c1_d00_trig(u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    0.5 * s * (2.0 * u.powi(3) * s + 3.0 * u * u * c + u * s.powi(3) - 6.0 * u * s + 3.0 * c * s * s)
}

fn c1_d20_trig(u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    -u * s.powi(4) - 2.0 * c * s.powi(3) + 3.0 * u * s * s - u.powi(3)
}

/// Leading small-`k` coefficient `d0⁰` on C1.
pub fn c1_d00(u: f64) -> f64 {
    if u.abs() < SERIES_BELOW {
        eval_series(&series::C1_D0, u)
    } else {
        c1_d00_trig(u)
    }
}

pub fn c1_d20(u: f64) -> f64 {
    if u.abs() < SERIES_BELOW {
        c1_d00_plus_d20(u) - c1_d00(u)
    } else {
        c1_d20_trig(u)
    }
}

pub fn c1_d00_plus_d20(u: f64) -> f64 {
    if u.abs() < SERIES_BELOW {
        eval_series(&series::C1_D0_PLUS_D2, u)
    } else {
        c1_d00_trig(u) + c1_d20_trig(u)
    }
}

/// `J1⁰(u1, x) = d0⁰ + d2⁰·x`; the small-`k` limit of `J1/k²` on C1.
pub fn kernel_c1_asymptotic(u1: f64, x: f64) -> f64 {
    (1.0 - x) * c1_d00(u1) + x * c1_d00_plus_d20(u1)
}

fn sin4u_minus_4u(u: f64) -> f64 {
    if u.abs() < SERIES_BELOW {
        eval_series(&series::SIN4U_MINUS_4U, u)
    } else {
        (4.0 * u).sin() - 4.0 * u
    }
}

/// Leading small-`k` coefficient `d0⁰` on C2.
pub fn c2_d00(u: f64) -> f64 {
    if u.abs() < SERIES_BELOW {
        return eval_series(&series::C2_D0, u);
    }
    let (s, c) = u.sin_cos();
    0.125
        * c
        * s
        * ((-48.0 * u * u - 3.0) * (2.0 * u).cos()
            + 3.0 * (6.0 * u).cos()
            + (42.0 * u - 64.0 * u.powi(3)) * (2.0 * u).sin()
            + 2.0 * u * (6.0 * u).sin())
}

/// `d2⁰ = −d4⁰ = −(sin 4u − 4u)·f2(u)` on C2.
pub fn c2_d20(u: f64) -> f64 {
    -sin4u_minus_4u(u) * f2(u)
}

/// `J1⁰(u1, x) = d0⁰ + d2⁰·x + d4⁰·x²`; `J1 ≈ (k⁸/1024)·J1⁰` on C2.
pub fn kernel_c2_asymptotic(u1: f64, x: f64) -> f64 {
    c2_d00(u1) + c2_d20(u1) * x * (1.0 - x)
}

/// `8u + 4u·cos 4u − 3·sin 4u`.
pub fn f1(u: f64) -> f64 {
    if u.abs() < SERIES_BELOW {
        eval_series(&series::F1, u)
    } else {
        8.0 * u + 4.0 * u * (4.0 * u).cos() - 3.0 * (4.0 * u).sin()
    }
}

/// The alternative reading `8u + 4u·cos 4u − 3·sin u`.
pub fn f1_alt(u: f64) -> f64 {
    8.0 * u + 4.0 * u * (4.0 * u).cos() - 3.0 * u.sin()
}

/// `−1 + 4u² + cos 4u + u·sin 4u`.
pub fn f2(u: f64) -> f64 {
    if u.abs() < SERIES_BELOW {
        eval_series(&series::F2, u)
    } else {
        -1.0 + 4.0 * u * u + (4.0 * u).cos() + u * (4.0 * u).sin()
    }
}

pub mod certify;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_trig_agree_at_switch() {
        for &u in &[0.45, 0.5, 0.55] {
            assert!((eval_series(&series::C1_D0, u) - c1_d00_trig(u)).abs() < 1e-14);
            assert!(
                (eval_series(&series::C1_D0_PLUS_D2, u) - c1_d00_trig(u) - c1_d20_trig(u)).abs() < 1e-14
            );
            let (s, c) = u.sin_cos();
            let direct = 0.125
                * c
                * s
                * ((-48.0 * u * u - 3.0) * (2.0 * u).cos()
                    + 3.0 * (6.0 * u).cos()
                    + (42.0 * u - 64.0 * u.powi(3)) * (2.0 * u).sin()
                    + 2.0 * u * (6.0 * u).sin());
            assert!((eval_series(&series::C2_D0, u) - direct).abs() < 1e-14);
            let f1d = 8.0 * u + 4.0 * u * (4.0 * u).cos() - 3.0 * (4.0 * u).sin();
            assert!((eval_series(&series::F1, u) - f1d).abs() < 1e-13);
            let f2d = -1.0 + 4.0 * u * u + (4.0 * u).cos() + u * (4.0 * u).sin();
            assert!((eval_series(&series::F2, u) - f2d).abs() < 1e-13);
            assert!((eval_series(&series::SIN4U_MINUS_4U, u) - ((4.0 * u).sin() - 4.0 * u)).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_rejects_bad_domain() {
        assert!(Kernel::new(Stratum::C1, 1.0).is_err());
        assert!(Kernel::new(Stratum::C3, 0.5).is_err());
        let inp = KernelInput { u1: 0.3, x: 1.5, k: 0.5, stratum: Stratum::C1 };
        assert!(kernel(&inp).is_err());
        let inp = KernelInput { u1: 0.3, x: 0.5, k: 0.5, stratum: Stratum::C2 };
        assert!(kernel_c1(&inp).is_err());
    }
}
