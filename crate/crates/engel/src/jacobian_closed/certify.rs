//! Grid certificates for the sign lemmas and their comparison functions.
//!
//! A comparison certificate for `f` with positive `g` checks on a grid that
//! the closed form of `(f/g)'` has one sign, that it matches a central
//! difference of `f/g`, and that `f/g` starts on the expected side of zero.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::batch;
use crate::elliptic;

use super::{
    c1_d00, c1_d00_plus_d20, c2_d00, f1, f1_alt, f2, f3, f4, kernel_c1_asymptotic,
    kernel_c2_asymptotic,
};

pub const DEFAULT_GRID: usize = 2000;
/// Relative agreement required between `(f/g)'` and its central difference.
const FD_TOL: f64 = 1e-4;

/// Outcome of one grid check. `min_margin` is the smallest value of
/// `expected_sign·f` over the grid; the check passes when it is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCertificate {
    pub name: String,
    pub grid: usize,
    pub min_margin: f64,
    pub pass: bool,
}

fn sign_grid(name: &str, pts: &[f64], sign: f64, f: impl Fn(f64) -> f64 + Sync + Send) -> GridCertificate {
    let vals = batch::map(pts, |&u| sign * f(u));
    let min_margin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    GridCertificate {
        name: name.to_string(),
        grid: pts.len(),
        min_margin,
        pass: min_margin > 0.0,
    }
}

fn sign_grid_2d(
    name: &str,
    us: &[f64],
    nx: usize,
    sign: f64,
    f: impl Fn(f64, f64) -> f64 + Sync + Send,
) -> GridCertificate {
    let rows = batch::map(us, |&u| {
        (0..nx)
            .map(|j| sign * f(u, j as f64 / (nx - 1) as f64))
            .fold(f64::INFINITY, f64::min)
    });
    let min_margin = rows.iter().copied().fold(f64::INFINITY, f64::min);
    GridCertificate {
        name: name.to_string(),
        grid: us.len() * nx,
        min_margin,
        pass: min_margin > 0.0,
    }
}

fn k_f3(k: f64) -> f64 {
    f3(k).unwrap_or(f64::NAN)
}

fn k_f4(k: f64) -> f64 {
    f4(k).unwrap_or(f64::NAN)
}

/// The sign lemmas: f1, f2, f3, f4, the small-`k` coefficients and the
/// asymptotic kernels, each on `n` interior points (2-D grids use 51 values
/// of `x` including both ends).
pub fn sign_lemmas(n: usize) -> Vec<GridCertificate> {
    let half = batch::interior_grid(0.0, FRAC_PI_2, n);
    let full = batch::interior_grid(0.0, PI, n);
    let ks = batch::interior_grid(0.0, 1.0, n);
    vec![
        sign_grid("f1 > 0 on (0, pi/2)", &half, 1.0, f1),
        sign_grid("f2 > 0 on (0, pi/2)", &half, 1.0, f2),
        sign_grid("f3 > 0 on (0, 1)", &ks, 1.0, k_f3),
        sign_grid("f4 > 0 on (0, 1)", &ks, 1.0, k_f4),
        sign_grid("C1 d0^0 < 0 on (0, pi)", &full, -1.0, c1_d00),
        sign_grid("C1 d0^0 + d2^0 < 0 on (0, pi)", &full, -1.0, c1_d00_plus_d20),
        sign_grid_2d("C1 J1^0 < 0 on (0, pi) x [0, 1]", &full, 51, -1.0, kernel_c1_asymptotic),
        sign_grid("C2 d0^0 > 0 on (0, pi/2)", &half, 1.0, c2_d00),
        sign_grid_2d("C2 J1^0 > 0 on (0, pi/2) x [0, 1]", &half, 51, 1.0, kernel_c2_asymptotic),
    ]
}

/// A comparison-function identity `(f/g)' = h` with `h` of one sign.
pub struct Comparison {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub f: fn(f64) -> f64,
    pub g: fn(f64) -> f64,
    pub h: fn(f64) -> f64,
    /// Expected sign of `f`, which is also the sign of `h`.
    pub sign: f64,
}

fn g_sin(u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    s * (s - u * c)
}

fn h_c1_d0(u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    let n = 2.0 * (-1.0 + u * u + (2.0 * u).cos()) + u * (2.0 * u).sin();
    -(n * n) / (4.0 * (s - u * c).powi(2))
}

fn h_c1_d0_d2(u: f64) -> f64 {
    let n = -2.0 * u + (2.0 * u).sin();
    -(n * n) / (4.0 * u.sin().powi(2))
}

fn g_f1(u: f64) -> f64 {
    2.0 + (4.0 * u).cos()
}

fn h_f1(u: f64) -> f64 {
    16.0 * (2.0 * u).sin().powi(4) / g_f1(u).powi(2)
}

fn g_f2(u: f64) -> f64 {
    4.0 * u + (4.0 * u).sin()
}

fn h_f2(u: f64) -> f64 {
    ((4.0 * u).sin() - 4.0 * u).powi(2) / g_f2(u).powi(2)
}

fn g_k(k: f64) -> f64 {
    1.0 - k * k
}

fn h_f3(k: f64) -> f64 {
    let e = elliptic::ke_unchecked(k).1;
    2.0 * k * e * e / (k * k - 1.0).powi(2)
}

fn h_f4(k: f64) -> f64 {
    let (kk, e) = elliptic::ke_unchecked(k);
    2.0 * (e + (k * k - 1.0) * kk).powi(2) / (k * (k * k - 1.0).powi(2))
}

pub fn comparisons() -> Vec<Comparison> {
    vec![
        Comparison { name: "C1 d0^0 / sin u (sin u - u cos u)", lo: 0.0, hi: PI, f: c1_d00, g: g_sin, h: h_c1_d0, sign: -1.0 },
        Comparison { name: "C1 (d0^0 + d2^0) / sin u (sin u - u cos u)", lo: 0.0, hi: PI, f: c1_d00_plus_d20, g: g_sin, h: h_c1_d0_d2, sign: -1.0 },
        Comparison { name: "f1 / (2 + cos 4u)", lo: 0.0, hi: FRAC_PI_2, f: f1, g: g_f1, h: h_f1, sign: 1.0 },
        Comparison { name: "f2 / (4u + sin 4u)", lo: 0.0, hi: FRAC_PI_2, f: f2, g: g_f2, h: h_f2, sign: 1.0 },
        Comparison { name: "f3 / (1 - k^2)", lo: 0.0, hi: 1.0, f: k_f3, g: g_k, h: h_f3, sign: 1.0 },
        Comparison { name: "f4 / (1 - k^2)", lo: 0.0, hi: 1.0, f: k_f4, g: g_k, h: h_f4, sign: 1.0 },
    ]
}

/// Certifies one comparison identity on `n` interior points. The margin is
/// the smallest of: `sign·h` on the grid, the agreement slack
/// `1e-4 − |fd − h|/scale` of the central difference, and `sign·f/g` at the
/// first grid point.
pub fn certify_comparison(cmp: &Comparison, n: usize) -> GridCertificate {
    let pts = batch::interior_grid(cmp.lo, cmp.hi, n);
    let ratio = |u: f64| (cmp.f)(u) / (cmp.g)(u);
    let hs = batch::map(&pts, |&u| (cmp.h)(u));
    let hmax = hs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut margin = f64::INFINITY;
    for (i, &u) in pts.iter().enumerate() {
        let h = hs[i];
        let step = 1e-3 * (u - cmp.lo).min(cmp.hi - u);
        let fd = (ratio(u + step) - ratio(u - step)) / (2.0 * step);
        let slack = FD_TOL - (fd - h).abs() / (h.abs() + 1e-6 * hmax);
        margin = margin.min(slack);
        if h != 0.0 {
            margin = margin.min(cmp.sign * h.signum());
        }
    }
    let first = cmp.sign * ratio(pts[0]);
    margin = margin.min(if first > 0.0 { 1.0 } else { first });
    GridCertificate {
        name: format!("comparison {}", cmp.name),
        grid: n,
        min_margin: margin,
        pass: margin > 0.0,
    }
}

pub fn comparison_certificates(n: usize) -> Vec<GridCertificate> {
    comparisons().iter().map(|c| certify_comparison(c, n)).collect()
}

/// Evidence deciding between the two printed readings of `f1`.
#[derive(Debug, Clone, PartialEq)]
pub struct F1VariantReport {
    pub variant: &'static str,
    /// `f1(u)/(256u⁵/15)` at `u = 1e-2`.
    pub expansion_ratio: f64,
    /// Whether `(f1/(2+cos 4u))' = 16 sin⁴2u/(2+cos 4u)²` holds on the grid.
    pub comparison_holds: bool,
    /// Largest relative residual of `(d0⁰/(4u+sin 4u))' = f1·f2/(8u³cos²u sin²u)`.
    pub d0_identity_residual: f64,
}

fn d0_identity_residual(f1v: fn(f64) -> f64) -> f64 {
    let g = |u: f64| 4.0 * u + (4.0 * u).sin();
    let ratio = |u: f64| c2_d00(u) / g(u);
    let h = 1e-6;
    batch::interior_grid(0.1, 1.4, 50)
        .iter()
        .map(|&u| {
            let fd = (ratio(u + h) - ratio(u - h)) / (2.0 * h);
            let (s, c) = u.sin_cos();
            let claim = f1v(u) * f2(u) / (8.0 * u.powi(3) * c * c * s * s);
            (fd - claim).abs() / fd.abs().max(claim.abs())
        })
        .fold(0.0, f64::max)
}

pub fn f1_variants() -> Vec<F1VariantReport> {
    let u: f64 = 1e-2;
    let lead = 256.0 / 15.0 * u.powi(5);
    let variants: [(&'static str, fn(f64) -> f64); 2] = [
        ("8u + 4u cos 4u - 3 sin 4u", f1),
        ("8u + 4u cos 4u - 3 sin u", f1_alt),
    ];
    variants
        .iter()
        .map(|&(name, f)| {
            let cmp = Comparison { name, lo: 0.0, hi: FRAC_PI_2, f, g: g_f1, h: h_f1, sign: 1.0 };
            F1VariantReport {
                variant: name,
                expansion_ratio: f(u) / lead,
                comparison_holds: certify_comparison(&cmp, 400).pass,
                d0_identity_residual: d0_identity_residual(f),
            }
        })
        .collect()
}

/// All lemma certificates: sign grids followed by comparison identities.
pub fn lemma_suite(n: usize) -> Vec<GridCertificate> {
    let mut out = sign_lemmas(n);
    out.extend(comparison_certificates(n));
    out
}
