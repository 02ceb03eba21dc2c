//! Certificate suites behind `verify`.

use std::f64::consts::PI;

use engel::batch;
use engel::conj::{self, default_ceiling, first_conjugate_time, time_bounds};
use engel::elliptic::complete_ke;
use engel::expmap::{self, State, DEFAULT_TOL};
use engel::jacobian_closed::certify::lemma_suite;
use engel::pendulum::{dilate, dilate_state, from_elliptic, reflect, reflect_state, EllipticCoords};
use engel::{Covector, Result};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::Check;
use crate::sample;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn draw(n: usize, r: &mut ChaCha8Rng, f: fn(&mut ChaCha8Rng) -> Result<Covector>) -> Result<Vec<Covector>> {
    (0..n).map(|_| f(r)).collect()
}

fn collect<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

/// Sign lemmas and comparison functions on grids, plus the root
/// certificates for `k₀` and `p_z¹`.
pub fn lemmas(grid: usize) -> Result<Vec<Check>> {
    let mut out: Vec<Check> = lemma_suite(grid)
        .into_iter()
        .map(|c| Check::margin("lemmas", c.name, c.grid, c.min_margin))
        .collect();
    let k0 = conj::k0();
    let (kk, ee) = complete_ke(k0)?;
    out.push(Check::margin("lemmas", "k0 residual below 1e-12", 1, 1e-12 - (2.0 * ee - kk).abs()));
    out.push(Check::count("lemmas", "k0 in [0.89, 0.92]", 1, usize::from(!(0.89..=0.92).contains(&k0))));
    let ks = batch::interior_grid(0.05, 0.95, 50);
    let bad = collect(batch::map(&ks, |&k| -> Result<bool> {
        let p = conj::p_z1(k)?;
        let kk = complete_ke(k)?.0;
        let (lo, hi) = if k < k0 { (2.0 * kk, 3.0 * kk) } else { (kk, 2.0 * kk) };
        Ok(conj::f_z(p, k)?.abs() > 1e-11 || !(p > lo && p < hi))
    }))?;
    out.push(Check::count(
        "lemmas",
        "p_z1 residual below 1e-11 in its sub-bracket",
        ks.len(),
        bad.iter().filter(|&&b| b).count(),
    ));
    Ok(out)
}

fn state_residual(a: &State, b: &State) -> f64 {
    [(a.x, b.x), (a.y, b.y), (a.z, b.z), (a.v, b.v)]
        .iter()
        .map(|&(p, q)| (p - q).abs() / q.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn worst(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Dilation and reflection equivariance of the exponential map, the
/// Jacobian column identity and the scaling of conjugate times.
pub fn symmetry(seed: u64) -> Result<Vec<Check>> {
    let mut r = rng(seed, 1);
    let cases: Vec<(Covector, f64, f64)> = (0..100)
        .map(|_| (sample::generic(&mut r), r.gen_range(0.1..10.0), r.gen_range(0.25..4.0)))
        .collect();
    let dil = collect(batch::map(&cases, |&(lam, t, g)| {
        let (dl, dt) = dilate(&lam, t, g)?;
        let a = expmap::exp(&dl, dt, DEFAULT_TOL)?;
        let b = dilate_state(&expmap::exp(&lam, t, DEFAULT_TOL)?, g)?;
        Ok(state_residual(&a, &b))
    }))?;
    let refl = collect(batch::map(&cases, |&(lam, t, _)| {
        let a = expmap::exp(&reflect(&lam), t, DEFAULT_TOL)?;
        let b = reflect_state(&expmap::exp(&lam, t, DEFAULT_TOL)?);
        Ok(state_residual(&a, &b))
    }))?;

    let mut elliptic: Vec<(Covector, f64, f64)> = Vec::with_capacity(30);
    for i in 0..30 {
        let lam = if i % 2 == 0 { sample::c1(&mut r)? } else { sample::c2(&mut r)? };
        elliptic.push((lam, r.gen_range(0.1..10.0), r.gen_range(0.25..4.0)));
    }
    let columns = collect(batch::map(&elliptic, |&(lam, t, _)| {
        let (a, b) = expmap::column_transform_check(&lam, t)?;
        Ok((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
    }))?;
    let scaling = collect(batch::map(&elliptic, |&(base, _, alpha)| {
        let ceiling = default_ceiling(&base)?;
        let s = alpha.sqrt();
        let lam = Covector::new(base.theta, base.c * s, alpha);
        let t_base = first_conjugate_time(&base, ceiling)?.first();
        let t_lam = first_conjugate_time(&lam, ceiling / s)?.first();
        let err = match (t_base, t_lam) {
            (Some(a), Some(b)) => (b - a / s).abs() / (a / s),
            _ => f64::INFINITY,
        };
        if err > 1e-8 {
            info!("scaling mismatch for {base:?} at alpha = {alpha}: {t_base:?} vs {t_lam:?}");
        }
        Ok(err)
    }))?;
    Ok(vec![
        Check::margin("symmetry", "dilation commutes with exp to 1e-9", dil.len(), 1e-9 - worst(&dil)),
        Check::margin("symmetry", "reflection commutes with exp to 1e-9", refl.len(), 1e-9 - worst(&refl)),
        Check::margin("symmetry", "column identity det A = det B to 1e-8", columns.len(), 1e-8 - worst(&columns)),
        Check::margin(
            "symmetry",
            "conjugate times scale as alpha^(-1/2) to 1e-8",
            scaling.len(),
            1e-8 - worst(&scaling),
        ),
    ])
}

fn sandwich_checks(name: &str, reports: &[conj::SandwichReport], out: &mut Vec<Check>) {
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for rep in reports {
        let t1 = rep.conj_times.first().copied().unwrap_or(f64::INFINITY);
        let b = rep.bounds;
        lower = lower.min((t1 - b.t_max1) / b.t_max1 + 1e-6);
        upper = upper.min((b.t_max2 - t1) / b.t_max1 + 1e-6);
    }
    out.push(Check::margin("sandwich", format!("{name} t_conj1 >= t_max1"), reports.len(), lower));
    out.push(Check::margin("sandwich", format!("{name} t_conj1 <= t_max2"), reports.len(), upper));
}

/// The two-sided bound on random C1 and C2 covectors, the segment counts,
/// and the lower bound on the remaining strata.
pub fn sandwich(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut r = rng(seed, 2);
    let c1 = draw(samples, &mut r, sample::c1)?;
    let c2 = draw(samples, &mut r, sample::c2)?;
    let rep1 = collect(conj::verify_sandwich_batch(&c1))?;
    let rep2 = collect(conj::verify_sandwich_batch(&c2))?;
    let mut out = Vec::new();
    sandwich_checks("C1", &rep1, &mut out);
    sandwich_checks("C2", &rep2, &mut out);
    for rep in rep2.iter().filter(|r| r.in_segment != 2) {
        info!("{:?}: {} conjugate times in {:?}: {:?}", rep.lambda, rep.in_segment, rep.bounds, rep.conj_times);
    }
    out.push(Check::count(
        "sandwich",
        "C2 holds two conjugate times in [t_max1, t_max2]",
        rep2.len(),
        rep2.iter().filter(|r| r.in_segment != 2).count(),
    ));
    let near_one = conj::verify_sandwich(&from_elliptic(&EllipticCoords::c1(0.0, 0.9995, 1.0))?)?;
    out.push(Check::count(
        "sandwich",
        "C1 k = 0.9995, phi = 0 holds two conjugate times in [t_max1, t_max2]",
        1,
        usize::from(near_one.in_segment != 2),
    ));

    let circles: Vec<Covector> = (0..10)
        .map(|_| {
            let c = r.gen_range(0.5..2.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
            Covector::new(r.gen_range(-PI..PI), c, 0.0)
        })
        .collect();
    let margins = collect(batch::map(&circles, |lam| {
        let b = time_bounds(lam)?;
        let first = first_conjugate_time(lam, default_ceiling(lam)?)?.first().unwrap_or(f64::INFINITY);
        Ok((first - b.t_max1) / b.t_max1 + 1e-9)
    }))?;
    out.push(Check::margin(
        "sandwich",
        "C6 t_conj1 >= 2 pi / |c|",
        margins.len(),
        margins.iter().copied().fold(f64::INFINITY, f64::min),
    ));

    let unbounded = [
        Covector::new(0.0, 0.0, 1.0),
        Covector::new(PI, 0.0, 1.0),
        Covector::new(0.7, 0.0, 0.0),
        conj::c3_covector(1.0),
        conj::c3_covector(-1.0),
    ];
    let found = collect(batch::map(&unbounded, |lam| {
        Ok(first_conjugate_time(lam, default_ceiling(lam)?)?.times.len())
    }))?;
    out.push(Check::count(
        "sandwich",
        "C3, C4, C5, C7 have no conjugate time",
        unbounded.len(),
        found.iter().filter(|&&n| n > 0).count(),
    ));
    Ok(out)
}

/// Ratio of the integrated determinant to the closed kernel on 20 C1 and
/// 10 C2 covectors, and agreement of their zero sets.
pub fn xval(seed: u64) -> Result<Vec<Check>> {
    let mut r = rng(seed, 3);
    let mut out = Vec::new();
    for (name, n, f) in [("C1", 20, sample::c1 as fn(&mut ChaCha8Rng) -> Result<Covector>), ("C2", 10, sample::c2)] {
        let lams = draw(n, &mut r, f)?;
        let reps = collect(batch::map(&lams, |lam| {
            let horizon = 1.05 * time_bounds(lam)?.t_max2;
            conj::cross_validate(lam, &batch::interior_grid(0.0, horizon, 20), horizon, 1e-6)
        }))?;
        let spread = reps.iter().map(|r| r.spread).fold(0.0, f64::max);
        info!("{name} oracle ratios: worst spread {spread:e}");
        for rep in reps.iter().filter(|r| !r.zero_sets_match) {
            info!("zero sets differ for {:?}: kernel {:?}, determinant {:?}", rep.lambda, rep.kernel_roots, rep.det_roots);
        }
        out.push(Check::margin("xval", format!("{name} ratio spread below 1e-4"), n, 1e-4 - spread));
        out.push(Check::count(
            "xval",
            format!("{name} zero sets match within 1e-6"),
            n,
            reps.iter().filter(|r| !r.zero_sets_match).count(),
        ));
    }
    Ok(out)
}
