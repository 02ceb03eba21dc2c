mod common;

use common::*;
use engel::expmap::trajectory;
use engel::pendulum::*;
use engel::{Covector, State, Stratum};
use std::f64::consts::{FRAC_PI_2, PI};

fn close(a: &Covector, b: &Covector, tol: f64) -> bool {
    normalize_angle(a.theta - b.theta).abs() <= tol
        && (a.c - b.c).abs() <= tol * (1.0 + b.c.abs())
        && (a.alpha - b.alpha).abs() <= tol * (1.0 + b.alpha.abs())
}

#[test]
fn energy_examples() {
    assert_eq!(energy(&Covector::new(0.0, 0.0, 1.0)), -1.0);
    assert_eq!(energy(&Covector::new(PI, 0.0, 1.0)), 1.0);
    assert!((energy(&Covector::new(FRAC_PI_2, 2.0, 0.0)) - 2.0).abs() < 1e-15);
}

#[test]
fn classify_examples() {
    assert_eq!(classify(&Covector::new(0.0, 0.0, 1.0), CLASSIFY_TOL), Stratum::C4);
    for th in [-2.0, 0.0, 1.3, PI] {
        assert_eq!(classify(&Covector::new(th, 1.0, 0.0), CLASSIFY_TOL), Stratum::C6);
    }
    assert_eq!(classify(&Covector::new(0.0, 1.0, 1.0), CLASSIFY_TOL), Stratum::C1);
    assert_eq!(Covector::new(0.0, 3.0, 1.0).stratum(), Stratum::C2);
    assert_eq!(Covector::new(0.0, 2.0, 1.0).stratum(), Stratum::C3);
    assert_eq!(Covector::new(PI, 0.0, 1.0).stratum(), Stratum::C5);
    assert_eq!(Covector::new(0.7, 0.0, 0.0).stratum(), Stratum::C7);
    // negative α: the bottom of the well sits at θ = π
    assert_eq!(Covector::new(PI, 0.0, -1.0).stratum(), Stratum::C4);
    assert_eq!(Covector::new(0.0, 0.0, -1.0).stratum(), Stratum::C5);
}

#[test]
fn covector_angle_is_normalized() {
    let lam = Covector::new(3.0 * PI, 1.0, 1.0);
    assert_eq!(lam.theta, PI);
    let lam = Covector::new(-PI / 2.0 - 4.0 * PI, 1.0, 1.0);
    assert!((lam.theta + FRAC_PI_2).abs() < 1e-14);
}

#[test]
fn elliptic_coordinates_at_the_bottom() {
    for c in [0.2, 1.0, 1.7] {
        let ec = to_elliptic(&Covector::new(0.0, c, 1.0)).unwrap();
        assert_eq!(ec.stratum, Stratum::C1);
        assert!(ec.phi.abs() < 1e-15);
        assert!((ec.k - c / 2.0).abs() < 1e-15);
    }
}

#[test]
fn elliptic_coordinates_reject_other_strata() {
    assert!(to_elliptic(&Covector::new(0.0, 2.0, 1.0)).is_err());
    assert!(to_elliptic(&Covector::new(0.0, 1.0, 0.0)).is_err());
    assert!(to_elliptic(&Covector::new(0.0, 1.0, -1.0)).is_err());
}

#[test]
fn elliptic_round_trip() {
    let mut r = rng(1);
    for _ in 0..100 {
        let alpha = uniform(&mut r, 0.1, 5.0);
        let lam = Covector::new(uniform(&mut r, -PI, PI), uniform(&mut r, -3.0, 3.0), alpha);
        let st = lam.stratum();
        assert!(st.is_elliptic());
        let back = from_elliptic(&to_elliptic(&lam).unwrap()).unwrap();
        assert!(close(&back, &lam, 1e-10), "{lam:?} -> {back:?} ({st})");
    }
    for _ in 0..100 {
        let (lam, ec) = random_c1(&mut r);
        let again = to_elliptic(&lam).unwrap();
        assert!((again.k - ec.k).abs() < 1e-12);
        assert!(close(&from_elliptic(&again).unwrap(), &lam, 1e-10));
    }
}

#[test]
fn c1_modulus_consistency() {
    let mut r = rng(2);
    for _ in 0..200 {
        let alpha = uniform(&mut r, 0.2, 4.0);
        let theta = uniform(&mut r, -2.5, 2.5);
        // stay inside the oscillation band E < α
        let cmax = (2.0 * alpha * (1.0 + theta.cos())).sqrt();
        let lam = Covector::new(theta, uniform(&mut r, -0.95, 0.95) * cmax, alpha);
        assert_eq!(lam.stratum(), Stratum::C1);
        let ec = to_elliptic(&lam).unwrap();
        let resid = ec.k * ec.k * 2.0 * alpha - (lam.energy() + alpha);
        assert!(resid.abs() < 1e-12 * (1.0 + alpha), "{resid}");
    }
}

#[test]
fn rectification_matches_integrated_pendulum() {
    let mut r = rng(3);
    let times: Vec<f64> = (1..=40).map(|i| 0.5 * i as f64).collect();
    for i in 0..12 {
        let (lam, ec) = if i % 2 == 0 { random_c1(&mut r) } else { random_c2(&mut r) };
        let pts = trajectory(&lam, &times, 1e-12).unwrap();
        for p in &pts {
            let a = from_elliptic(&ec.advanced(p.t)).unwrap();
            let b = pendulum_flow(&lam, p.t);
            assert!(close(&a, &b, 1e-10), "rectified vs closed-form flow at t = {}", p.t);
            let integrated = Covector::new(p.theta, p.c, lam.alpha);
            assert!(close(&a, &integrated, 1e-9), "rectified vs ODE at t = {}: {a:?} {integrated:?}", p.t);
        }
    }
}

#[test]
fn pendulum_flow_on_degenerate_strata() {
    let c7 = Covector::new(0.4, 0.0, 0.0);
    assert_eq!(pendulum_flow(&c7, 12.0), c7);
    let c6 = Covector::new(0.5, 1.5, 0.0);
    let m = pendulum_flow(&c6, 3.0);
    assert!(normalize_angle(m.theta - (0.5 + 4.5)).abs() < 1e-14);
    assert_eq!((m.c, m.alpha), (1.5, 0.0));
    let c4 = Covector::new(0.0, 0.0, 2.0);
    assert_eq!(pendulum_flow(&c4, 5.0), c4);
}

#[test]
fn pendulum_flow_preserves_energy() {
    let mut r = rng(4);
    for _ in 0..300 {
        let lam = random_covector(&mut r);
        let t = uniform(&mut r, 0.0, 30.0);
        let m = pendulum_flow(&lam, t);
        let e0 = lam.energy();
        assert!((m.energy() - e0).abs() < 1e-11 * (1.0 + e0.abs()), "{lam:?} t={t}");
    }
}

#[test]
fn separatrix_flow_against_ode() {
    let lam = Covector::new(0.0, 2.0, 1.0);
    let times: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
    for p in trajectory(&lam, &times, 1e-12).unwrap() {
        let m = pendulum_flow(&lam, p.t);
        assert!(close(&m, &Covector::new(p.theta, p.c, 1.0), 1e-9));
    }
}

#[test]
fn reflection_examples() {
    let r = reflect(&Covector::new(FRAC_PI_2, 1.0, 1.0));
    assert!((r.theta + FRAC_PI_2).abs() < 1e-15);
    assert_eq!((r.c, r.alpha), (1.0, -1.0));
    assert_eq!(reflect_state(&State::new(1.0, 2.0, 3.0, 4.0)), State::new(-1.0, -2.0, 3.0, -4.0));
    let mut g = rng(5);
    for _ in 0..100 {
        let lam = random_covector(&mut g);
        assert!(close(&reflect(&reflect(&lam)), &lam, 1e-15));
    }
}

#[test]
fn dilation_examples_and_group_law() {
    let (lam, t) = dilate(&Covector::new(0.3, 2.0, 4.0), 1.0, 4.0).unwrap();
    assert_eq!((lam.theta, lam.c, lam.alpha, t), (0.3, 1.0, 1.0, 2.0));
    let (same, t1) = dilate(&Covector::new(0.3, 2.0, 4.0), 1.5, 1.0).unwrap();
    assert_eq!((same, t1), (Covector::new(0.3, 2.0, 4.0), 1.5));
    assert_eq!(
        dilate_state(&State::new(1.0, 1.0, 1.0, 1.0), 4.0).unwrap(),
        State::new(2.0, 2.0, 4.0, 8.0)
    );
    assert!(dilate(&lam, 1.0, 0.0).is_err());
    assert!(dilate(&lam, 1.0, -2.0).is_err());
    assert!(dilate_state(&State::new(1.0, 0.0, 0.0, 0.0), -1.0).is_err());

    let mut r = rng(6);
    for _ in 0..100 {
        let lam = random_covector(&mut r);
        let (g1, g2) = (uniform(&mut r, 0.25, 4.0), uniform(&mut r, 0.25, 4.0));
        let t = uniform(&mut r, 0.0, 5.0);
        let (a, ta) = dilate(&lam, t, g2).unwrap();
        let (a, ta) = dilate(&a, ta, g1).unwrap();
        let (b, tb) = dilate(&lam, t, g1 * g2).unwrap();
        assert!(close(&a, &b, 1e-14) && (ta - tb).abs() < 1e-14 * (1.0 + tb));
    }
}

#[test]
fn strata_invariant_under_symmetries() {
    let mut r = rng(7);
    for _ in 0..1000 {
        let lam = random_covector(&mut r);
        let st = lam.stratum();
        assert_eq!(reflect(&lam).stratum(), st, "{lam:?}");
        let (d, _) = dilate(&lam, 1.0, uniform(&mut r, 0.25, 4.0)).unwrap();
        assert_eq!(d.stratum(), st, "{lam:?}");
    }
    // constructed boundary points keep their strata too
    for lam in [
        Covector::new(0.0, 2.0, 1.0),
        Covector::new(0.0, 0.0, 1.0),
        Covector::new(PI, 0.0, 1.0),
        Covector::new(1.0, 1.0, 0.0),
        Covector::new(1.0, 0.0, 0.0),
    ] {
        let st = lam.stratum();
        assert_eq!(reflect(&lam).stratum(), st);
        assert_eq!(dilate(&lam, 1.0, 4.0).unwrap().0.stratum(), st);
    }
}

#[test]
fn stratum_parsing() {
    assert_eq!("c2".parse::<Stratum>().unwrap(), Stratum::C2);
    assert_eq!(Stratum::C5.to_string(), "C5");
    assert!("".parse::<Stratum>().is_err());
}
