//! The covector cylinder, its stratification by pendulum energy, the
//! rectifying elliptic coordinates on the oscillating and rotating strata,
//! and the reflection and dilation symmetries.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::elliptic::{self, Jacobi};
use crate::error::{EngelError, Result};
use crate::expmap::State;

/// Default relative tolerance for the measure-zero boundaries between strata.
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Maps an angle into `(−π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Point `(θ, c, α)` of the cylinder; indexes one normal geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covector {
    pub theta: f64,
    pub c: f64,
    pub alpha: f64,
}

impl Covector {
    /// Builds a covector with `θ` normalized into `(−π, π]`.
    pub fn new(theta: f64, c: f64, alpha: f64) -> Covector {
        Covector {
            theta: normalize_angle(theta),
            c,
            alpha,
        }
    }

    pub fn energy(&self) -> f64 {
        energy(self)
    }

    pub fn stratum(&self) -> Stratum {
        classify(self, CLASSIFY_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
}

impl Stratum {
    pub const ALL: [Stratum; 7] = [
        Stratum::C1,
        Stratum::C2,
        Stratum::C3,
        Stratum::C4,
        Stratum::C5,
        Stratum::C6,
        Stratum::C7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stratum::C1 => "C1",
            Stratum::C2 => "C2",
            Stratum::C3 => "C3",
            Stratum::C4 => "C4",
            Stratum::C5 => "C5",
            Stratum::C6 => "C6",
            Stratum::C7 => "C7",
        }
    }

    /// Strata carrying elliptic coordinates and closed-form kernels.
    pub fn is_elliptic(self) -> bool {
        matches!(self, Stratum::C1 | Stratum::C2)
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stratum {
    type Err = EngelError;

    fn from_str(s: &str) -> Result<Stratum> {
        Stratum::ALL
            .iter()
            .copied()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| EngelError::Domain(format!("unknown stratum '{s}'")))
    }
}

/// Pendulum energy `c²/2 − α cos θ`.
pub fn energy(lam: &Covector) -> f64 {
    0.5 * lam.c * lam.c - lam.alpha * lam.theta.cos()
}

/// Assigns the unique stratum. Boundary comparisons use `tol` relative to
/// `max(1, |α|)` for `E = |α|` and relative to `|α|` for `E = −|α|`; the
/// conditions `α = 0` and `c = 0` are tested as `|·| ≤ tol`.
pub fn classify(lam: &Covector, tol: f64) -> Stratum {
    let a = lam.alpha.abs();
    let c_zero = lam.c.abs() <= tol;
    if a <= tol {
        return if c_zero { Stratum::C7 } else { Stratum::C6 };
    }
    let e = energy(lam);
    if (e - a).abs() <= tol * a.max(1.0) {
        return if c_zero { Stratum::C5 } else { Stratum::C3 };
    }
    if (e + a).abs() <= tol * a {
        return Stratum::C4;
    }
    if e > a {
        Stratum::C2
    } else {
        Stratum::C1
    }
}

/// Rectifying coordinates `(φ, k, α)` on C1 ∪ C2; `sign` is the branch
/// `sign(c)` on C2 and `+1` on C1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoords {
    pub phi: f64,
    pub k: f64,
    pub alpha: f64,
    pub stratum: Stratum,
    pub sign: f64,
}

impl EllipticCoords {
    pub fn c1(phi: f64, k: f64, alpha: f64) -> EllipticCoords {
        EllipticCoords {
            phi,
            k,
            alpha,
            stratum: Stratum::C1,
            sign: 1.0,
        }
    }

    pub fn c2(phi: f64, k: f64, alpha: f64, sign: f64) -> EllipticCoords {
        EllipticCoords {
            phi,
            k,
            alpha,
            stratum: Stratum::C2,
            sign: if sign < 0.0 { -1.0 } else { 1.0 },
        }
    }

    /// Shift along the flow; the rectified flow is `φ ↦ φ + t`.
    pub fn advanced(&self, t: f64) -> EllipticCoords {
        EllipticCoords {
            phi: self.phi + t,
            ..*self
        }
    }

    /// Period of the pendulum motion in `φ`.
    pub fn period(&self) -> f64 {
        let kk = elliptic::ke_unchecked(self.k).0;
        let s = self.alpha.sqrt();
        match self.stratum {
            Stratum::C2 => 2.0 * kk * self.k / s,
            _ => 4.0 * kk / s,
        }
    }
}

fn require_positive_alpha(lam: &Covector) -> Result<()> {
    if lam.alpha > 0.0 {
        Ok(())
    } else {
        Err(EngelError::Domain(format!(
            "elliptic coordinates need alpha > 0, got {}",
            lam.alpha
        )))
    }
}

pub fn to_elliptic(lam: &Covector) -> Result<EllipticCoords> {
    require_positive_alpha(lam)?;
    let st = classify(lam, CLASSIFY_TOL);
    let alpha = lam.alpha;
    let sa = alpha.sqrt();
    let e = energy(lam);
    match st {
        Stratum::C1 => {
            let k = ((e + alpha) / (2.0 * alpha)).sqrt();
            let half = 0.5 * lam.theta;
            let amp = (half.sin() / k).atan2(lam.c / (2.0 * k * sa));
            let phi = elliptic::f_unchecked(amp, k) / sa;
            Ok(EllipticCoords::c1(phi, k, alpha))
        }
        Stratum::C2 => {
            let k = (2.0 * alpha / (e + alpha)).sqrt();
            let s = lam.c.signum();
            let psi = elliptic::f_unchecked(s * 0.5 * lam.theta, k);
            Ok(EllipticCoords::c2(k * psi / sa, k, alpha, s))
        }
        other => Err(EngelError::Stratum(format!(
            "elliptic coordinates exist on C1 and C2 only, covector is in {other}"
        ))),
    }
}

pub fn from_elliptic(ec: &EllipticCoords) -> Result<Covector> {
    if !(ec.k > 0.0 && ec.k < 1.0) {
        return Err(EngelError::Domain(format!("modulus {} outside (0,1)", ec.k)));
    }
    if !(ec.alpha > 0.0) {
        return Err(EngelError::Domain(format!("alpha {} must be positive", ec.alpha)));
    }
    let sa = ec.alpha.sqrt();
    let j = Jacobi::new(ec.k)?;
    match ec.stratum {
        Stratum::C1 => {
            let (sn, cn, dn) = j.sncndn(sa * ec.phi);
            let theta = 2.0 * (ec.k * sn).atan2(dn);
            Ok(Covector::new(theta, 2.0 * ec.k * sa * cn, ec.alpha))
        }
        Stratum::C2 => {
            let psi = sa * ec.phi / ec.k;
            let amp = j.am(psi);
            let (_, _, dn) = j.sncndn(psi);
            Ok(Covector::new(
                2.0 * ec.sign * amp,
                2.0 * ec.sign * sa / ec.k * dn,
                ec.alpha,
            ))
        }
        other => Err(EngelError::Stratum(format!(
            "elliptic coordinates exist on C1 and C2 only, got {other}"
        ))),
    }
}

/// Reflection of the covector part: `(θ − π, c, −α)`.
pub fn reflect(lam: &Covector) -> Covector {
    Covector::new(lam.theta - PI, lam.c, -lam.alpha)
}

/// Reflection of the state part: `(−x, −y, z, −v)`.
pub fn reflect_state(q: &State) -> State {
    State::new(-q.x, -q.y, q.z, -q.v)
}

/// Dilation by `γ > 0`: covector `(θ, c/√γ, α/γ)`, time `√γ·t`.
pub fn dilate(lam: &Covector, t: f64, gamma: f64) -> Result<(Covector, f64)> {
    check_gamma(gamma)?;
    let s = gamma.sqrt();
    Ok((
        Covector {
            theta: lam.theta,
            c: lam.c / s,
            alpha: lam.alpha / gamma,
        },
        s * t,
    ))
}

/// Dilation of the state: `(√γ x, √γ y, γ z, γ^{3/2} v)`.
pub fn dilate_state(q: &State, gamma: f64) -> Result<State> {
    check_gamma(gamma)?;
    let s = gamma.sqrt();
    Ok(State::new(s * q.x, s * q.y, gamma * q.z, gamma * s * q.v))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(EngelError::Domain(format!("dilation factor {gamma} must be positive")))
    }
}

/// Brings `α` to a non-negative value by reflection; reports whether it did.
pub fn with_nonnegative_alpha(lam: &Covector) -> (Covector, bool) {
    if lam.alpha < 0.0 {
        (reflect(lam), true)
    } else {
        (*lam, false)
    }
}

/// Closed-form solution of `θ' = c, c' = −α sin θ` at time `t`.
pub fn pendulum_flow(lam: &Covector, t: f64) -> Covector {
    let (base, flipped) = with_nonnegative_alpha(lam);
    let out = flow_nonnegative(&base, t);
    if flipped {
        reflect(&out)
    } else {
        out
    }
}

fn flow_nonnegative(lam: &Covector, t: f64) -> Covector {
    match classify(lam, CLASSIFY_TOL) {
        Stratum::C1 | Stratum::C2 => {
            let ec = to_elliptic(lam).expect("C1/C2 with alpha > 0");
            from_elliptic(&ec.advanced(t)).expect("valid coordinates")
        }
        Stratum::C3 => {
            let sa = lam.alpha.sqrt();
            let s = lam.c.signum();
            let psi = s * (0.5 * lam.theta).tan().asinh() + sa * t;
            Covector::new(
                2.0 * s * psi.sinh().atan(),
                2.0 * s * sa / psi.cosh(),
                lam.alpha,
            )
        }
        Stratum::C6 => Covector::new(lam.theta + lam.c * t, lam.c, lam.alpha),
        Stratum::C4 | Stratum::C5 | Stratum::C7 => *lam,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_normalization_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stratum_names_round_trip() {
        for s in Stratum::ALL {
            assert_eq!(s.name().parse::<Stratum>().unwrap(), s);
        }
        assert!("C9".parse::<Stratum>().is_err());
    }

    #[test]
    fn separatrix_flow_keeps_energy() {
        let lam = Covector::new(0.4, 2.0 * (0.2f64).cos(), 1.0);
        assert_eq!(lam.stratum(), Stratum::C3);
        for i in 0..20 {
            let m = pendulum_flow(&lam, 0.5 * i as f64);
            assert!((m.energy() - 1.0).abs() < 1e-12);
        }
    }
}
