//! Exponential map by ODE integration, its Jacobian by forward sensitivity
//! equations, and the coordinate projections.
//!
//! The extremal control is `u = (−sin θ, cos θ)`: with the frame below the
//! Hamiltonian lift gives `ċ = h₁h₄`, so the pendulum `ċ = −α sin θ` forces
//! `h₁ = −sin θ`, `h₂ = cos θ`.

use std::io::{self, Write};

use nalgebra::{Matrix4, Vector4};

use crate::error::{EngelError, Result};
use crate::ode::{Integrator, Point};
use crate::pendulum::{classify, energy, Covector, Stratum, CLASSIFY_TOL};

/// Default integration tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Relative threshold below which a determinant counts as degenerate.
pub const DEGENERATE_REL: f64 = 1e-9;

/// Point `(x, y, z, v)` of the Engel group.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v: f64,
}

impl State {
    pub fn new(x: f64, y: f64, z: f64, v: f64) -> State {
        State { x, y, z, v }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.v]
    }

    pub fn from_slice(s: &[f64]) -> State {
        State::new(s[0], s[1], s[2], s[3])
    }

    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dist(&self, o: &State) -> f64 {
        State::new(self.x - o.x, self.y - o.y, self.z - o.z, self.v - o.v).norm()
    }
}

pub fn vector_field_x1(q: &State) -> [f64; 4] {
    [1.0, 0.0, -0.5 * q.y, 0.0]
}

pub fn vector_field_x2(q: &State) -> [f64; 4] {
    [0.0, 1.0, 0.5 * q.x, 0.5 * (q.x * q.x + q.y * q.y)]
}

/// Control along the extremal with pendulum angle `θ`.
#[inline]
pub fn control(theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (-s, c)
}

/// `u₁X₁(q) + u₂X₂(q)`.
#[inline]
pub fn velocity(q: &State, theta: f64) -> [f64; 4] {
    let (u1, u2) = control(theta);
    [
        u1,
        u2,
        -0.5 * q.y * u1 + 0.5 * q.x * u2,
        0.5 * (q.x * q.x + q.y * q.y) * u2,
    ]
}

/// Pendulum equilibria with `α ≠ 0` sit at `sin θ = 0` exactly; the stored
/// angle `π` does not, and the upper equilibrium amplifies that residue.
fn equilibrium(lam: &Covector) -> bool {
    matches!(classify(lam, CLASSIFY_TOL), Stratum::C4 | Stratum::C5)
}

fn trig(theta: f64, snap: bool) -> (f64, f64) {
    if snap {
        (0.0, theta.cos().signum())
    } else {
        theta.sin_cos()
    }
}

fn rhs6(alpha: f64, snap: bool) -> impl Fn(f64, &[f64; 6]) -> [f64; 6] {
    move |_t, y| {
        let (s, c) = trig(y[0], snap);
        let (u1, u2) = (-s, c);
        let (x, yy) = (y[2], y[3]);
        [
            y[1],
            -alpha * s,
            u1,
            u2,
            -0.5 * yy * u1 + 0.5 * x * u2,
            0.5 * (x * x + yy * yy) * u2,
        ]
    }
}

/// Flow plus sensitivities with respect to `θ₀`, `c₀`, `α`; blocks of six
/// `(δθ, δc, δx, δy, δz, δv)` follow the base state.
fn rhs24(alpha: f64, snap: bool) -> impl Fn(f64, &[f64; 24]) -> [f64; 24] {
    move |_t, y| {
        let (s, c) = trig(y[0], snap);
        let (u1, u2) = (-s, c);
        let (du1, du2) = (-c, -s);
        let (x, yy) = (y[2], y[3]);
        let r2 = 0.5 * (x * x + yy * yy);
        let mut out = [0.0; 24];
        out[0] = y[1];
        out[1] = -alpha * s;
        out[2] = u1;
        out[3] = u2;
        out[4] = -0.5 * yy * u1 + 0.5 * x * u2;
        out[5] = r2 * u2;
        for j in 0..3 {
            let b = 6 + 6 * j;
            let (dth, dc, dx, dy) = (y[b], y[b + 1], y[b + 2], y[b + 3]);
            out[b] = dc;
            out[b + 1] = -alpha * c * dth - if j == 2 { s } else { 0.0 };
            out[b + 2] = du1 * dth;
            out[b + 3] = du2 * dth;
            out[b + 4] = -0.5 * dy * u1 - 0.5 * yy * du1 * dth + 0.5 * dx * u2 + 0.5 * x * du2 * dth;
            out[b + 5] = (x * dx + yy * dy) * u2 + r2 * du2 * dth;
        }
        out
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(EngelError::Domain(format!("time must be finite and non-negative, got {t}")))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(EngelError::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// One sampled point of an extremal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q: State,
    pub theta: f64,
    pub c: f64,
}

impl TrajectoryPoint {
    /// `|ẋ² + ẏ² − 1|` at this point.
    pub fn speed_residual(&self) -> f64 {
        let v = velocity(&self.q, self.theta);
        (v[0] * v[0] + v[1] * v[1] - 1.0).abs()
    }
}

/// `Exp(λ, t)` with the integration tolerance `tol`.
pub fn exp(lam: &Covector, t: f64, tol: f64) -> Result<State> {
    check_time(t)?;
    check_tol(tol)?;
    let f = rhs6(lam.alpha, equilibrium(lam));
    let p = Integrator::with_tol(tol).advance(&f, &Point::start(0.0, init6(lam)), t)?;
    Ok(State::from_slice(&p.y[2..6]))
}

fn init6(lam: &Covector) -> [f64; 6] {
    [lam.theta, lam.c, 0.0, 0.0, 0.0, 0.0]
}

/// Samples the extremal at the non-decreasing `times`.
pub fn trajectory(lam: &Covector, times: &[f64], tol: f64) -> Result<Vec<TrajectoryPoint>> {
    check_tol(tol)?;
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        check_time(t)?;
    }
    let f = rhs6(lam.alpha, equilibrium(lam));
    let pts = Integrator::with_tol(tol).sample(&f, init6(lam), times)?;
    Ok(pts
        .iter()
        .map(|p| TrajectoryPoint {
            t: p.t,
            q: State::from_slice(&p.y[2..6]),
            theta: p.y[0],
            c: p.y[1],
        })
        .collect())
}

/// Largest energy deviation from the initial value along sampled points.
pub fn energy_drift(lam: &Covector, pts: &[TrajectoryPoint]) -> f64 {
    let e0 = energy(lam);
    pts.iter()
        .map(|p| (energy(&Covector { theta: p.theta, c: p.c, alpha: lam.alpha }) - e0).abs())
        .fold(0.0, f64::max)
}

/// Writes `t,x,y,z,v,theta,c` rows with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(mut w: W, pts: &[TrajectoryPoint]) -> io::Result<()> {
    writeln!(w, "t,x,y,z,v,theta,c")?;
    for p in pts {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.t, p.q.x, p.q.y, p.q.z, p.q.v, p.theta, p.c
        )?;
    }
    Ok(())
}

/// `∂(x,y,z,v)/∂(θ,c,α,t)`; rows `x,y,z,v`, columns `θ,c,α,t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianMatrix {
    pub m: Matrix4<f64>,
    pub q: State,
    pub theta: f64,
    pub t: f64,
}

impl JacobianMatrix {
    pub fn column(&self, j: usize) -> Vector4<f64> {
        self.m.column(j).into_owned()
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        self.m.lu().determinant()
    }

    pub fn column_norm_product(&self) -> f64 {
        (0..4).map(|j| self.m.column(j).norm()).product()
    }

    /// Scale-aware classification of the determinant.
    pub fn det_sample(&self) -> DetSample {
        let det = self.det();
        let scale = self.column_norm_product();
        DetSample {
            t: self.t,
            det,
            scale,
            sign: classify_sign(det, DEGENERATE_REL * scale),
        }
    }

    /// `(det A, det B)` with `det B = ½·det(∂θ q, ∂c q, ∂t q, (x, y, 2z, 3v))/α`.
    pub fn column_transform(&self, alpha: f64) -> (f64, f64) {
        let q = &self.q;
        let mut b = self.m;
        b.set_column(2, &self.column(3));
        b.set_column(3, &Vector4::new(q.x, q.y, 2.0 * q.z, 3.0 * q.v));
        (self.det(), 0.5 * b.lu().determinant() / alpha)
    }
}

/// Sign of a quantity relative to its noise band: `0` when `|v| ≤ band`.
pub fn classify_sign(v: f64, band: f64) -> i8 {
    if !(v.abs() > band) {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetSample {
    pub t: f64,
    pub det: f64,
    pub scale: f64,
    /// `+1`, `−1`, or `0` for degenerate.
    pub sign: i8,
}

/// Joint integration of the flow and its sensitivities.
#[derive(Debug, Clone, Copy)]
pub struct Variational {
    pub lam: Covector,
    pub integrator: Integrator,
}

/// Stored point of the variational system, usable as a restart.
pub type VarPoint = Point<24>;

impl Variational {
    pub fn new(lam: &Covector, tol: f64) -> Result<Variational> {
        check_tol(tol)?;
        Ok(Variational {
            lam: *lam,
            integrator: Integrator::with_tol(tol),
        })
    }

    pub fn start(&self) -> VarPoint {
        let mut y = [0.0; 24];
        y[0] = self.lam.theta;
        y[1] = self.lam.c;
        y[6] = 1.0;
        y[13] = 1.0;
        Point::start(0.0, y)
    }

    pub fn advance(&self, from: &VarPoint, t: f64) -> Result<VarPoint> {
        check_time(t)?;
        self.integrator.advance(&rhs24(self.lam.alpha, equilibrium(&self.lam)), from, t)
    }

    pub fn sample(&self, times: &[f64]) -> Result<Vec<VarPoint>> {
        let y0 = self.start().y;
        self.integrator.sample(&rhs24(self.lam.alpha, equilibrium(&self.lam)), y0, times)
    }

    pub fn jacobian(&self, p: &VarPoint) -> JacobianMatrix {
        let y = &p.y;
        let q = State::from_slice(&y[2..6]);
        let vel = velocity(&q, y[0]);
        let mut m = Matrix4::zeros();
        for j in 0..3 {
            let b = 6 + 6 * j + 2;
            for i in 0..4 {
                m[(i, j)] = y[b + i];
            }
        }
        for i in 0..4 {
            m[(i, 3)] = vel[i];
        }
        JacobianMatrix {
            m,
            q,
            theta: y[0],
            t: p.t,
        }
    }
}

pub fn exp_jacobian(lam: &Covector, t: f64) -> Result<JacobianMatrix> {
    exp_jacobian_tol(lam, t, DEFAULT_TOL)
}

pub fn exp_jacobian_tol(lam: &Covector, t: f64, tol: f64) -> Result<JacobianMatrix> {
    if !(t > 0.0) {
        return Err(EngelError::Domain(format!("Jacobian needs t > 0, got {t}")));
    }
    let var = Variational::new(lam, tol)?;
    let p = var.advance(&var.start(), t)?;
    Ok(var.jacobian(&p))
}

pub fn jacobian_det(lam: &Covector, t: f64) -> Result<f64> {
    Ok(exp_jacobian(lam, t)?.det())
}

/// Determinant samples on a grid of increasing positive times.
pub fn det_scan(lam: &Covector, times: &[f64], tol: f64) -> Result<Vec<DetSample>> {
    let var = Variational::new(lam, tol)?;
    Ok(var
        .sample(times)?
        .iter()
        .map(|p| var.jacobian(p).det_sample())
        .collect())
}

/// Pendulum part of the variational system along a separatrix started at the
/// bottom of the well, in closed form: `(θ, δθ_θ₀, δθ_c₀, δθ_α′)` where the
/// last direction is `∂α + a·s·∂c` (`a = sign α`, `s = sign c₀`).
fn separatrix_pendulum(t: f64, a: f64, s: f64, base: f64) -> (f64, [f64; 3]) {
    let sech = 1.0 / t.cosh();
    let theta = base + s * 2.0 * t.sinh().atan();
    (theta, [sech, 0.5 * (t.sinh() + t * sech), a * s * t * sech])
}

fn separatrix_signs(lam: &Covector) -> Result<(f64, f64, f64)> {
    let a = lam.alpha.signum();
    let base = if a > 0.0 { 0.0 } else { std::f64::consts::PI };
    let ok = (lam.alpha.abs() - 1.0).abs() <= 1e-12
        && (lam.c.abs() - 2.0).abs() <= 1e-12
        && crate::pendulum::normalize_angle(lam.theta - base).abs() <= 1e-12;
    if !ok {
        return Err(EngelError::Stratum(format!(
            "separatrix scan needs |alpha| = 1, |c| = 2 and theta at the bottom of the well, got {lam:?}"
        )));
    }
    Ok((a, lam.c.signum(), base))
}

/// Jacobians along a separatrix extremal with the pendulum part taken in
/// closed form, so the unstable equilibrium at the top is never integrated.
/// Column 2 holds `∂α + sign(α)·sign(c₀)·∂c`, which leaves the determinant
/// unchanged and keeps only the `c` column exponentially growing.
pub fn separatrix_jacobians(lam: &Covector, times: &[f64], tol: f64) -> Result<Vec<JacobianMatrix>> {
    check_tol(tol)?;
    let (a, s, base) = separatrix_signs(lam)?;
    let f = move |t: f64, y: &[f64; 16]| {
        let (theta, dth) = separatrix_pendulum(t, a, s, base);
        let (sn, cs) = theta.sin_cos();
        let (u1, u2) = (-sn, cs);
        let (du1, du2) = (-cs, -sn);
        let (x, yy) = (y[0], y[1]);
        let r2 = 0.5 * (x * x + yy * yy);
        let mut out = [0.0; 16];
        out[0] = u1;
        out[1] = u2;
        out[2] = -0.5 * yy * u1 + 0.5 * x * u2;
        out[3] = r2 * u2;
        for (j, &d) in dth.iter().enumerate() {
            let b = 4 + 4 * j;
            let (dx, dy) = (y[b], y[b + 1]);
            out[b] = du1 * d;
            out[b + 1] = du2 * d;
            out[b + 2] = -0.5 * dy * u1 - 0.5 * yy * du1 * d + 0.5 * dx * u2 + 0.5 * x * du2 * d;
            out[b + 3] = (x * dx + yy * dy) * u2 + r2 * du2 * d;
        }
        out
    };
    let pts = Integrator::with_tol(tol).sample(&f, [0.0; 16], times)?;
    Ok(pts
        .iter()
        .map(|p| {
            let q = State::from_slice(&p.y[0..4]);
            let theta = separatrix_pendulum(p.t, a, s, base).0;
            let vel = velocity(&q, theta);
            let mut m = Matrix4::zeros();
            for j in 0..3 {
                for i in 0..4 {
                    m[(i, j)] = p.y[4 + 4 * j + i];
                }
            }
            for i in 0..4 {
                m[(i, 3)] = vel[i];
            }
            JacobianMatrix { m, q, theta, t: p.t }
        })
        .collect())
}

pub fn separatrix_det_scan(lam: &Covector, times: &[f64], tol: f64) -> Result<Vec<DetSample>> {
    Ok(separatrix_jacobians(lam, times, tol)?
        .iter()
        .map(JacobianMatrix::det_sample)
        .collect())
}

/// `(det A, det B)` of the column identity; `α` must be nonzero.
pub fn column_transform_check(lam: &Covector, t: f64) -> Result<(f64, f64)> {
    if lam.alpha == 0.0 {
        return Err(EngelError::Domain("column identity needs alpha != 0".into()));
    }
    Ok(exp_jacobian(lam, t)?.column_transform(lam.alpha))
}

pub fn project_plane(q: &State) -> (f64, f64) {
    (q.x, q.y)
}

pub fn project_heisenberg(q: &State) -> (f64, f64, f64) {
    (q.x, q.y, q.z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_fields() {
        assert_eq!(vector_field_x1(&State::default()), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(vector_field_x2(&State::default()), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(vector_field_x2(&State::new(1.0, 1.0, 0.0, 0.0)), [0.0, 1.0, 0.5, 1.0]);
    }

    #[test]
    fn zero_time_is_identity() {
        let lam = Covector::new(0.3, 0.7, -1.2);
        assert_eq!(exp(&lam, 0.0, 1e-12).unwrap(), State::default());
        assert!(exp(&lam, -1.0, 1e-12).is_err());
        assert!(exp(&lam, 1.0, 0.0).is_err());
        assert!(exp_jacobian(&lam, 0.0).is_err());
    }

    #[test]
    fn sign_classification() {
        assert_eq!(classify_sign(1.0, 0.5), 1);
        assert_eq!(classify_sign(-1.0, 0.5), -1);
        assert_eq!(classify_sign(0.1, 0.5), 0);
        assert_eq!(classify_sign(f64::NAN, 0.5), 0);
    }
}
