//! Seeded covector samplers for the verification suites.

use std::f64::consts::PI;

use engel::pendulum::{from_elliptic, EllipticCoords};
use engel::{Covector, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// C1 at `α = 1`: `k ∈ (0.05, 0.95)`, `φ` uniform over one period.
pub fn c1(r: &mut ChaCha8Rng) -> Result<Covector> {
    let k = r.gen_range(0.05..0.95);
    let period = EllipticCoords::c1(0.0, k, 1.0).period();
    from_elliptic(&EllipticCoords::c1(r.gen_range(0.0..period), k, 1.0))
}

/// C2 at `α = 1`: `k ∈ (0.1, 0.95)`, random rotation sense.
pub fn c2(r: &mut ChaCha8Rng) -> Result<Covector> {
    let k = r.gen_range(0.1..0.95);
    let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    let period = EllipticCoords::c2(0.0, k, 1.0, sign).period();
    from_elliptic(&EllipticCoords::c2(r.gen_range(0.0..period), k, 1.0, sign))
}

/// Any covector with `|c| ≤ 3`, `|α| ≤ 2`.
pub fn generic(r: &mut ChaCha8Rng) -> Covector {
    Covector::new(r.gen_range(-PI..PI), r.gen_range(-3.0..3.0), r.gen_range(-2.0..2.0))
}
