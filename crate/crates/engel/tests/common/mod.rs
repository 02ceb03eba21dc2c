#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.gen_range(lo..hi)
}

// 15-point Gauss-Kronrod nodes and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature, independent of the library.
/// `tol` is an absolute tolerance spread uniformly over `[a, b]`.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, density: f64, depth: u32) -> f64 {
        let (v, e) = gk15(f, a, b);
        let allowed = (density * (b - a).abs()).max(4.0 * f64::EPSILON * v.abs());
        if e <= allowed || depth > 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, density, depth + 1) + rec(f, m, b, density, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    rec(&f, a, b, tol / (b - a).abs(), 0)
}

pub fn legendre_k(k: f64) -> f64 {
    quad(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-15)
}

pub fn legendre_e(k: f64) -> f64 {
    quad(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-15)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Central difference with step h.
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

use engel::pendulum::{from_elliptic, EllipticCoords};
use engel::Covector;

/// Random C1 covector at α = 1, `k ∈ (0.05, 0.95)`, φ uniform over a period.
pub fn random_c1(r: &mut ChaCha8Rng) -> (Covector, EllipticCoords) {
    let k = uniform(r, 0.05, 0.95);
    let period = EllipticCoords::c1(0.0, k, 1.0).period();
    let ec = EllipticCoords::c1(uniform(r, 0.0, period), k, 1.0);
    (from_elliptic(&ec).unwrap(), ec)
}

/// Random C2 covector at α = 1, `k ∈ (0.1, 0.95)`, random rotation sense.
pub fn random_c2(r: &mut ChaCha8Rng) -> (Covector, EllipticCoords) {
    let k = uniform(r, 0.1, 0.95);
    let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    let period = EllipticCoords::c2(0.0, k, 1.0, sign).period();
    let ec = EllipticCoords::c2(uniform(r, 0.0, period), k, 1.0, sign);
    (from_elliptic(&ec).unwrap(), ec)
}

/// Generic covector with `|c| ≤ 3`, `|α| ≤ 2`.
pub fn random_covector(r: &mut ChaCha8Rng) -> Covector {
    Covector::new(
        uniform(r, -std::f64::consts::PI, std::f64::consts::PI),
        uniform(r, -3.0, 3.0),
        uniform(r, -2.0, 2.0),
    )
}
