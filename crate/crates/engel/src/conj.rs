//! Maxwell-time bounds, the roots `k0` and `p_z¹(k)`, and the search for
//! conjugate times by sign changes of the Jacobian (closed-form kernel on
//! C1 ∪ C2, integrated determinant elsewhere).

use std::f64::consts::PI;
use std::sync::OnceLock;

use log::debug;

use crate::batch;
use crate::elliptic::{self, Jacobi};
use crate::error::{EngelError, Result};
use crate::expmap::{self, Variational, DEFAULT_TOL};
use crate::jacobian_closed::Kernel;
use crate::pendulum::{self, classify, Covector, EllipticCoords, Stratum, CLASSIFY_TOL};

/// Grid density of the conjugate-time scan.
pub const DEFAULT_GRID: usize = 2000;
/// Bisection width for conjugate-time brackets.
pub const BRACKET_TOL: f64 = 1e-10;
/// Relative level below which a same-sign local minimum is flagged as a
/// possible zero of even multiplicity.
pub const TOUCH_REL: f64 = 1e-9;
/// Oracle ratios use only kernel samples whose rounding-error bound is at
/// most this fraction of `|J1|`.
pub const XVAL_KERNEL_REL: f64 = 1e-3;
/// Relative slack when counting times in `[t¹MAX, t²MAX]`. Near `φ = 0` the
/// roots next to the endpoints sit outside by `O(φ²)`, so the count uses
/// root accuracy rather than the bound tolerance.
pub const SEGMENT_REL: f64 = 1e-9;

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(EngelError::Domain(format!("modulus k = {k} must lie in (0,1)")))
    }
}

/// `dn p·sn p + (p − 2E(p))·cn p`.
pub fn f_z(p: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(f_z_with(&Jacobi::new(k)?, p))
}

fn f_z_with(j: &Jacobi, p: f64) -> f64 {
    let (sn, cn, dn) = j.sncndn(p);
    dn * sn + (p - 2.0 * j.eps_e(p)) * cn
}

/// Bisection on a sign change of `f` in `[a, b]` down to width `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(EngelError::RootNotFound(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn k0_residual(k: f64) -> f64 {
    let (kk, ee) = elliptic::ke_unchecked(k);
    2.0 * ee - kk
}

/// Root of `2E(k) − K(k)` in `(0.5, 0.99)`, computed once.
pub fn k0() -> f64 {
    static K0: OnceLock<f64> = OnceLock::new();
    *K0.get_or_init(|| compute_k0(1e-16))
}

/// Uncached root of `2E − K` with bisection width `tol`.
pub fn compute_k0(tol: f64) -> f64 {
    bisect(k0_residual, 0.5, 0.99, tol).expect("2E - K changes sign on (0.5, 0.99)")
}

// Ten-point Gauss-Legendre rule on [-1, 1], positive half.
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// `f_z(h)` for small `|h|`, where the literal form cancels down to `h³/3`.
/// Uses `f_z′(p) = (2E(p) − p)·sn p·dn p`.
fn f_z_small(j: &Jacobi, h: f64) -> f64 {
    let d = |s: f64| {
        let (sn, _, dn) = j.sncndn(s);
        (2.0 * j.eps_e(s) - s) * sn * dn
    };
    let m = 0.5 * h;
    GL_X.iter()
        .zip(GL_W)
        .map(|(&x, w)| w * (d(m - m * x) + d(m + m * x)))
        .sum::<f64>()
        * m
}

/// `f_z(2K + h) = 2(2E − K)·cn h − f_z(h)`. The point `2K` is a critical
/// point of `f_z` for every `k`, and a triple root at `k0`; this form keeps
/// the root near `2K` well conditioned.
fn f_z_shifted(j: &Jacobi, h: f64) -> f64 {
    let fz = if h.abs() < 0.5 { f_z_small(j, h) } else { f_z_with(j, h) };
    2.0 * (2.0 * j.big_e() - j.big_k()) * j.sncndn(h).1 - fz
}

/// First positive root of `f_z(·, k)`; it lies in `(K, 3K)`.
pub fn p_z1(k: f64) -> Result<f64> {
    check_k(k)?;
    let j = Jacobi::new(k)?;
    let kk = j.big_k();
    let n = 64;
    let mut a = -kk;
    let mut fa = f_z_shifted(&j, a);
    for i in 1..=n {
        let b = -kk + 2.0 * kk * i as f64 / n as f64;
        let fb = f_z_shifted(&j, b);
        if fb == 0.0 {
            return Ok(2.0 * kk + b);
        }
        if fa.signum() != fb.signum() {
            let h = bisect(|h| f_z_shifted(&j, h), a, b, 1e-13 * kk)?;
            return Ok(2.0 * kk + h);
        }
        a = b;
        fa = fb;
    }
    Err(EngelError::RootNotFound(format!("f_z has no sign change in (K, 3K) at k = {k}")))
}

/// `am(p_z¹(k), k)`, in `(π/2, 3π/2)`.
pub fn u_z1(k: f64) -> Result<f64> {
    Ok(elliptic::am(p_z1(k)?, k))
}

/// Maxwell-time pair; `+∞` where no finite bound applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBounds {
    pub t_max1: f64,
    pub t_max2: f64,
}

fn elliptic_coords(lam: &Covector) -> Result<EllipticCoords> {
    let (base, _) = pendulum::with_nonnegative_alpha(lam);
    pendulum::to_elliptic(&base)
}

pub fn time_bounds(lam: &Covector) -> Result<TimeBounds> {
    let st = classify(lam, CLASSIFY_TOL);
    let sigma = lam.alpha.abs().sqrt();
    Ok(match st {
        Stratum::C1 => {
            let ec = elliptic_coords(lam)?;
            let kk = elliptic::ke_unchecked(ec.k).0;
            let p = 2.0 * p_z1(ec.k)?;
            let q = 4.0 * kk;
            TimeBounds {
                t_max1: p.min(q) / sigma,
                t_max2: p.max(q) / sigma,
            }
        }
        Stratum::C2 => {
            let ec = elliptic_coords(lam)?;
            let kk = elliptic::ke_unchecked(ec.k).0;
            TimeBounds {
                t_max1: 2.0 * kk * ec.k / sigma,
                t_max2: 4.0 * kk * ec.k / sigma,
            }
        }
        Stratum::C6 => TimeBounds {
            t_max1: 2.0 * PI / lam.c.abs(),
            t_max2: f64::INFINITY,
        },
        _ => TimeBounds {
            t_max1: f64::INFINITY,
            t_max2: f64::INFINITY,
        },
    })
}

pub fn t_max1(lam: &Covector) -> Result<f64> {
    Ok(time_bounds(lam)?.t_max1)
}

pub fn t_max2(lam: &Covector) -> Result<f64> {
    Ok(time_bounds(lam)?.t_max2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    ClosedKernel,
    /// Separatrix started at the bottom of the well, pendulum part in closed form.
    Separatrix,
    NumericalDeterminant,
}

/// Detected conjugate times in `(0, ceiling]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateSearchResult {
    pub times: Vec<f64>,
    pub brackets: Vec<(f64, f64)>,
    /// Same-sign local minima close to zero: possible tangential zeros.
    pub flagged: Vec<(f64, f64)>,
    pub ceiling: f64,
    pub method: SearchMethod,
    /// Every sample fell inside the degeneracy band.
    pub identically_degenerate: bool,
    pub samples: usize,
    pub degenerate_samples: usize,
}

impl ConjugateSearchResult {
    pub fn first(&self) -> Option<f64> {
        self.times.first().copied()
    }
}

/// Options of the scan.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub grid: usize,
    pub tol: f64,
    pub force_numerical: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid: DEFAULT_GRID,
            tol: DEFAULT_TOL,
            force_numerical: false,
        }
    }
}

/// One sample of the scanned function.
#[derive(Debug, Clone, Copy)]
struct Sample {
    t: f64,
    value: f64,
    sign: i8,
}

/// Sign changes between determinate samples plus flagged touch points.
fn brackets_of(samples: &[Sample]) -> (Vec<(usize, usize)>, Vec<(f64, f64)>) {
    let det: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].sign != 0).collect();
    let mut changes = Vec::new();
    for w in det.windows(2) {
        if samples[w[0]].sign != samples[w[1]].sign {
            changes.push((w[0], w[1]));
        }
    }
    let scale = samples.iter().fold(0.0f64, |m, s| m.max(s.value.abs()));
    let mut flagged = Vec::new();
    for w in det.windows(3) {
        let (a, b, c) = (&samples[w[0]], &samples[w[1]], &samples[w[2]]);
        if a.sign == b.sign
            && b.sign == c.sign
            && b.value.abs() < a.value.abs()
            && b.value.abs() < c.value.abs()
            && b.value.abs() < TOUCH_REL * scale
        {
            flagged.push((a.t, c.t));
        }
    }
    (changes, flagged)
}

/// Refines a bracket on which `sign` goes from `sa` to `−sa`.
fn refine(sign: impl Fn(f64) -> i8, mut a: f64, mut b: f64, sa: i8) -> f64 {
    while b - a > BRACKET_TOL {
        let m = 0.5 * (a + b);
        match sign(m) {
            0 => return m,
            s if s == sa => a = m,
            _ => b = m,
        }
    }
    0.5 * (a + b)
}

fn scan_grid(ceiling: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| ceiling * i as f64 / n as f64).collect()
}

/// Relative width below which a kernel root is taken as final.
const KERNEL_ROOT_REL: f64 = 1e-9;

/// Bisects the raw determinant sign on `[lo, hi]`, integrating once to `lo`.
/// `None` when the determinant does not change sign there.
fn det_bisect(lam: &Covector, lo: f64, hi: f64, tol: f64) -> Result<Option<f64>> {
    let var = Variational::new(lam, tol)?;
    let start = var.sample(&[lo])?[0];
    let sign = |t: f64| match var.advance(&start, t) {
        Ok(p) => expmap::classify_sign(var.jacobian(&p).det(), 0.0),
        Err(_) => 0,
    };
    let (sl, sh) = (expmap::classify_sign(var.jacobian(&start).det(), 0.0), sign(hi));
    if sl == 0 || sh == 0 || sl == sh {
        return Ok(None);
    }
    Ok(Some(refine(sign, lo, hi, sl)))
}

/// Where rounding in the kernel leaves its sign undetermined over more than
/// `KERNEL_ROOT_REL·t` around the root `t`, the root is re-bisected on the
/// integrated determinant of `lam` inside that band. `[a, b]` is the grid
/// bracket, whose ends carry determinate, opposite kernel signs.
fn polish_root(kern: &Kernel, phi: f64, lam: &Covector, t: f64, (a, b): (f64, f64), tol: f64) -> Result<f64> {
    let sign = |s: f64| kern.eval_at(phi, s).sign();
    let w0 = KERNEL_ROOT_REL * t.max(1.0);
    let mut w = w0;
    loop {
        let (lo, hi) = ((t - w).max(a), (t + w).min(b));
        let (sl, sh) = (sign(lo), sign(hi));
        let determinate = sl != 0 && sh != 0 && sl != sh;
        if determinate && w == w0 {
            return Ok(t);
        }
        if determinate || (lo == a && hi == b) {
            debug!("kernel root {t} lies in a rounding band [{lo}, {hi}]; polishing on the determinant");
            return Ok(det_bisect(lam, lo, hi, tol)?.unwrap_or(t));
        }
        w *= 2.0;
    }
}

fn search_closed(ec: &EllipticCoords, ceiling: f64, opts: &SearchOptions, polish: bool) -> Result<ConjugateSearchResult> {
    let sa = ec.alpha.sqrt();
    let phi = sa * ec.phi;
    let kern = Kernel::new(ec.stratum, ec.k)?;
    let unit = pendulum::from_elliptic(&EllipticCoords { phi, alpha: 1.0, ..*ec })?;
    let grid = scan_grid(ceiling * sa, opts.grid);
    let samples: Vec<Sample> = grid
        .iter()
        .map(|&t| {
            let kv = kern.eval_at(phi, t);
            Sample { t, value: kv.rj1(), sign: kv.sign() }
        })
        .collect();
    let (changes, flagged) = brackets_of(&samples);
    let mut times = Vec::new();
    let mut brackets = Vec::new();
    for (i, j) in changes {
        let (a, b) = (samples[i].t, samples[j].t);
        let mut t = refine(|t| expmap::classify_sign(kern.eval_at(phi, t).rj1(), 0.0), a, b, samples[i].sign);
        if polish {
            t = polish_root(&kern, phi, &unit, t, (a, b), opts.tol)?;
        }
        times.push(t / sa);
        brackets.push((a / sa, b / sa));
    }
    let degenerate = samples.iter().filter(|s| s.sign == 0).count();
    Ok(ConjugateSearchResult {
        times,
        brackets,
        flagged: flagged.iter().map(|&(a, b)| (a / sa, b / sa)).collect(),
        ceiling,
        method: SearchMethod::ClosedKernel,
        identically_degenerate: degenerate == samples.len(),
        samples: samples.len(),
        degenerate_samples: degenerate,
    })
}

fn search_numerical(lam: &Covector, ceiling: f64, opts: &SearchOptions) -> Result<ConjugateSearchResult> {
    let var = Variational::new(lam, opts.tol)?;
    let grid = scan_grid(ceiling, opts.grid);
    let pts = var.sample(&grid)?;
    let samples: Vec<Sample> = pts
        .iter()
        .map(|p| {
            let ds = var.jacobian(p).det_sample();
            Sample { t: p.t, value: ds.det, sign: ds.sign }
        })
        .collect();
    let (changes, flagged) = brackets_of(&samples);
    let mut times = Vec::new();
    let mut brackets = Vec::new();
    for (i, j) in changes {
        let start = pts[i];
        let sign = |t: f64| match var.advance(&start, t) {
            Ok(p) => expmap::classify_sign(var.jacobian(&p).det(), 0.0),
            Err(_) => 0,
        };
        times.push(refine(sign, samples[i].t, samples[j].t, samples[i].sign));
        brackets.push((samples[i].t, samples[j].t));
    }
    let degenerate = samples.iter().filter(|s| s.sign == 0).count();
    Ok(ConjugateSearchResult {
        times,
        brackets,
        flagged,
        ceiling,
        method: SearchMethod::NumericalDeterminant,
        identically_degenerate: degenerate == samples.len(),
        samples: samples.len(),
        degenerate_samples: degenerate,
    })
}

/// Separatrix covector rescaled to `|α| = 1` with its time factor `σ`, when
/// it starts at the bottom of the well.
fn separatrix_base(lam: &Covector) -> Option<(Covector, f64)> {
    let sigma = lam.alpha.abs().sqrt();
    let base = Covector { theta: lam.theta, c: lam.c / sigma, alpha: lam.alpha.signum() };
    expmap::separatrix_det_scan(&base, &[], DEFAULT_TOL).ok().map(|_| (base, sigma))
}

fn search_separatrix(base: &Covector, sigma: f64, ceiling: f64, opts: &SearchOptions) -> Result<ConjugateSearchResult> {
    let grid = scan_grid(ceiling * sigma, opts.grid);
    let dets = expmap::separatrix_det_scan(base, &grid, opts.tol)?;
    let samples: Vec<Sample> = dets.iter().map(|d| Sample { t: d.t, value: d.det, sign: d.sign }).collect();
    let (changes, flagged) = brackets_of(&samples);
    let mut times = Vec::new();
    let mut brackets = Vec::new();
    for (i, j) in changes {
        let sign = |t: f64| match expmap::separatrix_det_scan(base, &[t], opts.tol) {
            Ok(d) => expmap::classify_sign(d[0].det, 0.0),
            Err(_) => 0,
        };
        let (a, b) = (samples[i].t, samples[j].t);
        times.push(refine(sign, a, b, samples[i].sign) / sigma);
        brackets.push((a / sigma, b / sigma));
    }
    let degenerate = samples.iter().filter(|s| s.sign == 0).count();
    Ok(ConjugateSearchResult {
        times,
        brackets,
        flagged: flagged.iter().map(|&(a, b)| (a / sigma, b / sigma)).collect(),
        ceiling,
        method: SearchMethod::Separatrix,
        identically_degenerate: degenerate == samples.len(),
        samples: samples.len(),
        degenerate_samples: degenerate,
    })
}

/// Conjugate times of `λ` on `(0, ceiling]` with default options.
pub fn first_conjugate_time(lam: &Covector, ceiling: f64) -> Result<ConjugateSearchResult> {
    conjugate_times(lam, ceiling, &SearchOptions::default())
}

pub fn conjugate_times(lam: &Covector, ceiling: f64, opts: &SearchOptions) -> Result<ConjugateSearchResult> {
    if !(ceiling > 0.0 && ceiling.is_finite()) {
        return Err(EngelError::Domain(format!("search ceiling must be positive and finite, got {ceiling}")));
    }
    if opts.grid < 16 {
        return Err(EngelError::Domain(format!("grid must have at least 16 points, got {}", opts.grid)));
    }
    let st = classify(lam, CLASSIFY_TOL);
    debug!("conjugate search for {lam:?} in {st} up to {ceiling}");
    if opts.force_numerical {
        return search_numerical(lam, ceiling, opts);
    }
    if st.is_elliptic() {
        search_closed(&elliptic_coords(lam)?, ceiling, opts, true)
    } else if let Some((base, sigma)) = separatrix_base(lam).filter(|_| st == Stratum::C3) {
        search_separatrix(&base, sigma, ceiling, opts)
    } else {
        search_numerical(lam, ceiling, opts)
    }
}

/// Horizon used when the caller gives none: a margin past `t²MAX` on
/// C1 ∪ C2, three circle periods on C6, and a fixed window elsewhere.
pub fn default_ceiling(lam: &Covector) -> Result<f64> {
    let b = time_bounds(lam)?;
    Ok(match classify(lam, CLASSIFY_TOL) {
        Stratum::C1 | Stratum::C2 => 1.05 * b.t_max2,
        Stratum::C6 => 3.0 * b.t_max1,
        Stratum::C3 => 50.0,
        _ => 100.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// Check of `t¹MAX ≤ t¹conj ≤ t²MAX` for one covector.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub lambda: Covector,
    pub stratum: Stratum,
    pub bounds: TimeBounds,
    pub conj_times: Vec<f64>,
    /// Conjugate times inside `[t¹MAX − tol, t²MAX + tol]`.
    pub in_segment: usize,
    pub status: Status,
    pub reason: Option<String>,
}

pub fn verify_sandwich(lam: &Covector) -> Result<SandwichReport> {
    verify_sandwich_with(lam, &SearchOptions::default())
}

pub fn verify_sandwich_with(lam: &Covector, opts: &SearchOptions) -> Result<SandwichReport> {
    let st = classify(lam, CLASSIFY_TOL);
    if !st.is_elliptic() {
        return Err(EngelError::Stratum(format!("sandwich needs C1 or C2, got {st}")));
    }
    let bounds = time_bounds(lam)?;
    let res = conjugate_times(lam, 1.05 * bounds.t_max2, opts)?;
    let tol = 1e-6 * bounds.t_max1;
    let eps = SEGMENT_REL * bounds.t_max1;
    let in_segment = res
        .times
        .iter()
        .filter(|&&t| t >= bounds.t_max1 - eps && t <= bounds.t_max2 + eps)
        .count();
    let reason = match res.first() {
        None => Some("no conjugate time up to 1.05 t_max2".to_string()),
        Some(t) if t < bounds.t_max1 - tol => Some(format!("first conjugate time {t} < t_max1 {}", bounds.t_max1)),
        Some(t) if t > bounds.t_max2 + tol => Some(format!("first conjugate time {t} > t_max2 {}", bounds.t_max2)),
        Some(_) => None,
    };
    Ok(SandwichReport {
        lambda: *lam,
        stratum: st,
        bounds,
        conj_times: res.times,
        in_segment,
        status: if reason.is_none() { Status::Pass } else { Status::Fail },
        reason,
    })
}

/// Sandwich check over many covectors, in parallel when enabled.
pub fn verify_sandwich_batch(lams: &[Covector]) -> Vec<Result<SandwichReport>> {
    batch::map(lams, verify_sandwich)
}

pub fn verify_sandwich_batch_seq(lams: &[Covector]) -> Vec<Result<SandwichReport>> {
    batch::map_seq(lams, verify_sandwich)
}

/// Separatrix covector `(0, 2·sign, 1)`.
pub fn c3_covector(theta_sign: f64) -> Covector {
    Covector::new(0.0, 2.0 * if theta_sign < 0.0 { -1.0 } else { 1.0 }, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct C3Report {
    pub lambda: Covector,
    pub horizon: f64,
    pub samples: usize,
    pub sign_changes: usize,
    pub degenerate_samples: usize,
    /// Whether `|det|` grew monotonically over the samples beyond `t = 10`.
    pub growth_monotone_beyond_10: bool,
    pub status: Status,
}

/// Scans the determinant along a separatrix extremal on `(0, T]` at 5000
/// points; `reflected` uses the mirror covector with `α = −1`. The pendulum
/// part is taken in closed form (see [`expmap::separatrix_jacobians`]).
pub fn c3_no_conjugate_check(theta_sign: f64, horizon: f64, reflected: bool) -> Result<C3Report> {
    let base = c3_covector(theta_sign);
    let lam = if reflected { pendulum::reflect(&base) } else { base };
    let grid = scan_grid(horizon, 5000);
    let dets = expmap::separatrix_det_scan(&lam, &grid, DEFAULT_TOL)?;
    let samples: Vec<Sample> = dets.iter().map(|d| Sample { t: d.t, value: d.det, sign: d.sign }).collect();
    let (changes, _) = brackets_of(&samples);
    let tail: Vec<f64> = dets.iter().filter(|d| d.t > 10.0).map(|d| d.det.abs()).collect();
    let monotone = tail.windows(2).all(|w| w[1] >= w[0]);
    debug!("C3 scan: determinant growth beyond t = 10 monotone: {monotone}");
    Ok(C3Report {
        lambda: lam,
        horizon,
        samples: samples.len(),
        sign_changes: changes.len(),
        degenerate_samples: samples.iter().filter(|s| s.sign == 0).count(),
        growth_monotone_beyond_10: monotone,
        status: if changes.is_empty() { Status::Pass } else { Status::Fail },
    })
}

/// One row of a modulus sweep at `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub t_max1: f64,
    pub t_max2: f64,
    pub t_conj1: f64,
}

pub fn sweep(stratum: Stratum, ks: &[f64], phi: f64, opts: &SearchOptions) -> Vec<Result<SweepRow>> {
    batch::map(ks, |&k| {
        let ec = match stratum {
            Stratum::C1 => EllipticCoords::c1(phi, k, 1.0),
            Stratum::C2 => EllipticCoords::c2(phi, k, 1.0, 1.0),
            other => return Err(EngelError::Stratum(format!("sweep needs C1 or C2, got {other}"))),
        };
        let lam = pendulum::from_elliptic(&ec)?;
        let b = time_bounds(&lam)?;
        let res = conjugate_times(&lam, 1.05 * b.t_max2, opts)?;
        Ok(SweepRow {
            k,
            t_max1: b.t_max1,
            t_max2: b.t_max2,
            t_conj1: res.first().unwrap_or(f64::INFINITY),
        })
    })
}

/// One time of the oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XvalRow {
    pub t: f64,
    pub det: f64,
    pub rj1: f64,
    pub ratio: f64,
    /// Whether this row entered the spread statistic.
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XvalReport {
    pub lambda: Covector,
    pub coords: EllipticCoords,
    pub rows: Vec<XvalRow>,
    /// `(max − min)/|mean|` of the used ratios.
    pub spread: f64,
    pub kernel_roots: Vec<f64>,
    pub det_roots: Vec<f64>,
    /// Every root has a partner in the other list within `match_tol`.
    pub zero_sets_match: bool,
    pub skipped: usize,
}

/// Compares the integrated determinant with the closed kernel `R·J1` at
/// `times`, and the zero sets of both on `(0, horizon]`. Requires `α = 1`.
pub fn cross_validate(lam: &Covector, times: &[f64], horizon: f64, match_tol: f64) -> Result<XvalReport> {
    if (lam.alpha - 1.0).abs() > 1e-12 {
        return Err(EngelError::Domain(format!("oracle comparison needs alpha = 1, got {}", lam.alpha)));
    }
    let ec = pendulum::to_elliptic(lam)?;
    let kern = Kernel::new(ec.stratum, ec.k)?;
    let var = Variational::new(lam, DEFAULT_TOL)?;
    let pts = var.sample(times)?;
    let mut rows = Vec::with_capacity(times.len());
    for p in &pts {
        let js = var.jacobian(p).det_sample();
        let kv = kern.eval_at(ec.phi, p.t);
        rows.push(XvalRow {
            t: p.t,
            det: js.det,
            rj1: kv.rj1(),
            ratio: js.det / kv.rj1(),
            used: js.sign != 0 && kv.sign() != 0 && kv.j1_err <= XVAL_KERNEL_REL * kv.j1.abs(),
        });
    }
    let dmax = rows.iter().fold(0.0f64, |m, r| m.max(r.det.abs()));
    let kmax = rows.iter().fold(0.0f64, |m, r| m.max(r.rj1.abs()));
    for r in rows.iter_mut() {
        if r.det.abs() < 1e-6 * dmax || r.rj1.abs() < 1e-6 * kmax {
            r.used = false;
        }
    }
    let used: Vec<f64> = rows.iter().filter(|r| r.used).map(|r| r.ratio).collect();
    let spread = if used.is_empty() {
        f64::INFINITY
    } else {
        let mean = used.iter().sum::<f64>() / used.len() as f64;
        let (lo, hi) = used.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        (hi - lo) / mean.abs()
    };
    let opts = SearchOptions::default();
    let kernel_roots = search_closed(&ec, horizon, &opts, false)?.times;
    let det_roots = search_numerical(lam, horizon, &opts)?.times;
    let near = |a: &[f64], b: &[f64]| a.iter().all(|x| b.iter().any(|y| (x - y).abs() <= match_tol));
    Ok(XvalReport {
        lambda: *lam,
        coords: ec,
        skipped: rows.iter().filter(|r| !r.used).count(),
        rows,
        spread,
        zero_sets_match: near(&kernel_roots, &det_roots) && near(&det_roots, &kernel_roots),
        kernel_roots,
        det_roots,
    })
}
