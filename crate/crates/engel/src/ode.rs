//! Adaptive explicit Runge-Kutta integration with Verner's embedded 9(8)
//! pair on fixed-size states.
//!
//! Steps are clipped so that every requested output time is hit exactly,
//! which lets callers sample a trajectory on a grid and restart from any
//! stored sample without interpolation.

use crate::error::{EngelError, Result};

/// Number of stages.
const S: usize = 16;

#[rustfmt::skip]
mod tableau {
    use super::S;
    pub(super) const C: [f64; S] = [0.0, 0.03571, 0.09906028091267415, 0.1485904213690112, 0.6134, 0.2327359473605627, 0.5538640526394373, 0.6555, 0.491625, 0.06858, 0.253, 0.6620641795412046, 0.8309, 0.8998, 1.0, 1.0];
    pub(super) const A: [[f64; S]; S] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.03571, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [-0.03833735636677017, 0.13739763727944432, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0371476053422528, 0.0, 0.11144281602675842, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [2.674764429871505, 0.0, -9.982382134885293, 7.921017705013789, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.05242104050577351, 0.0, 0.0, 0.17969111891759532, 0.0006237879371938568, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.15924922236476322, 0.0, 0.0, -0.4298429877241087, 0.06665266542726088, 0.757805152571522, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.07283333333333333, 0.0, 0.0, 0.0, 0.0, 0.33593445906651037, 0.2467322076001563, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0729755859375, 0.0, 0.0, 0.0, 0.0, 0.33480097296993333, 0.11841582390506665, -0.0345673828125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.049112136634520964, 0.0, 0.0, 0.0, 0.0, 0.03983857361308652, 0.10696752889393549, -0.021742591654586477, -0.10559564748695649, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [-0.027079888186412805, 0.0, 0.0, 0.0, 0.0, 0.0333, -0.16455260700360572, 0.0342826630649739, 0.1585264064439221, 0.2185234256811225, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.055846577691088625, 0.0, 0.0, 0.0, 0.0, 0.09166533166672539, 0.2392399655523627, 0.01023834712248415, -0.0026793313228595426, 0.042356241814742845, 0.2253970470166604, 0.0, 0.0, 0.0, 0.0, 0.0],
        [-0.4802510512725196, 0.0, 0.0, 0.0, 0.0, -6.3596101625559305, -0.2762313898040841, -6.500796633979847, 0.5734765877040957, 1.3471259948681389, 5.936840409706221, 6.590346245333925, 0.0, 0.0, 0.0, 0.0],
        [0.3307533067671401, 0.0, 0.0, 0.0, 0.0, 5.956207776829962, -0.48683164004815277, 4.462055288206771, 0.7410258231442072, -0.7118192034575913, -5.454619594516665, -4.14080372924471, 0.20383197231903866, 0.0, 0.0, 0.0],
        [-0.5847111122998945, 0.0, 0.0, 0.0, 0.0, -12.41268417116267, 1.360245445660928, -22.426105311118683, -0.8828857055865458, 1.7701551285382304, 12.158096519185339, 22.230375204077607, -0.6634483760201249, 0.45096237872581374, 0.0, 0.0],
        [1.9405755498106487, 0.0, 0.0, 0.0, 0.0, 21.977984081145564, 0.8230747326984729, 68.16441683626354, -3.117097463620267, -4.56884102182244, -18.74190987126265, -66.57711839637832, 1.0989155531654418, 0.0, 0.0, 0.0],
    ];
    pub(super) const B_HIGH: [f64; S] = [0.015006690149797247, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0551809927463813, 0.2384947263782183, 0.12881517742829915, 0.22766231110462157, 1.2295325874375174, 0.04624976662810384, 0.13861963193662938, 0.030800101683194355, 0.0];
    pub(super) const B_LOW: [f64; S] = [0.018972105324811014, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.4081103145494938, 0.1260323883820921, 0.11883750634511497, 0.24910419978386875, -3.2699662199289783, 0.3023798100228883, 0.0, 0.0, 0.04652989552070924];
}
use tableau::{A, B_HIGH, B_LOW, C};

/// Tolerances and limits for [`Integrator`].
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::with_tol(1e-12)
    }
}

/// Integrated state together with its time and the step-size suggestion
/// for continuing from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub h: f64,
}

impl<const N: usize> Point<N> {
    pub fn start(t: f64, y: [f64; N]) -> Self {
        Point { t, y, h: 0.0 }
    }
}

impl Integrator {
    pub fn with_tol(tol: f64) -> Self {
        Integrator {
            rtol: tol,
            atol: tol,
            h_min: 1e-14,
            max_steps: 2_000_000,
        }
    }

    /// One step of size `h`. Returns the 9th-order update and the scaled
    /// error norm of the embedded difference.
    fn step<const N: usize, F>(&self, f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64)
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut k = [[0.0; N]; S];
        for s in 0..S {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut out = *y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..S {
                hi += B_HIGH[s] * k[s][i];
                lo += B_LOW[s] * k[s][i];
            }
            out[i] += h * hi;
            let sc = self.atol + self.rtol * y[i].abs().max(out[i].abs());
            err = err.max((h * (hi - lo)).abs() / sc);
        }
        (out, err)
    }

    fn initial_step<const N: usize, F>(&self, f: &F, t: f64, y: &[f64; N]) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let d = f(t, y);
        let mut n0 = 0.0f64;
        let mut n1 = 0.0f64;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            n0 = n0.max(y[i].abs() / sc);
            n1 = n1.max(d[i].abs() / sc);
        }
        let h = if n0 < 1e-5 || n1 < 1e-5 { 1e-3 } else { 0.01 * n0 / n1 };
        h.clamp(1e-6, 0.1)
    }

    /// Advances `from` to time `t_end >= from.t`.
    pub fn advance<const N: usize, F>(&self, f: &F, from: &Point<N>, t_end: f64) -> Result<Point<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        const ORDER: f64 = 9.0;
        const SAFETY: f64 = 0.9;
        let beta1 = 0.7 / ORDER;
        let beta2 = 0.4 / ORDER;

        let mut t = from.t;
        let mut y = from.y;
        if t_end <= t {
            return Ok(Point { t, y, h: from.h });
        }
        let mut h = if from.h > 0.0 { from.h } else { self.initial_step(f, t, &y) };
        let mut err_prev = 1e-4f64;
        let mut steps = 0usize;
        let mut suggestion = h;
        while t < t_end {
            steps += 1;
            if steps > self.max_steps {
                return Err(EngelError::StepUnderflow { t, h });
            }
            let remaining = t_end - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            let (y_new, err) = self.step(f, t, &y, h_try);
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h_try <= self.h_min * t.abs().max(1.0) {
                    return Err(EngelError::NonFinite { t });
                }
                h = 0.25 * h_try;
                continue;
            }
            if err <= 1.0 {
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (SAFETY * err.powf(-beta1) * err_prev.powf(beta2)).clamp(0.2, 5.0)
                };
                t = if last { t_end } else { t + h_try };
                y = y_new;
                err_prev = err.max(1e-4);
                let next = h_try * fac;
                if last {
                    suggestion = if h_try < h { h } else { next };
                } else {
                    h = next;
                    suggestion = h;
                }
            } else {
                let fac = (SAFETY * err.powf(-1.0 / ORDER)).clamp(0.1, 0.9);
                h = h_try * fac;
                if h < self.h_min * t.abs().max(1.0) {
                    return Err(EngelError::StepUnderflow { t, h });
                }
            }
        }
        Ok(Point { t: t_end, y, h: suggestion })
    }

    /// Integrates from `y0` at `t = 0` and returns the states at the
    /// non-decreasing `times`.
    pub fn sample<const N: usize, F>(&self, f: &F, y0: [f64; N], times: &[f64]) -> Result<Vec<Point<N>>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = Vec::with_capacity(times.len());
        let mut p = Point::start(0.0, y0);
        for &t in times {
            if t < p.t {
                return Err(EngelError::Domain(format!(
                    "sample times must be non-decreasing and non-negative, got {t} after {}",
                    p.t
                )));
            }
            p = self.advance(f, &p, t)?;
            out.push(p);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_row_sums_equal_nodes() {
        for s in 0..S {
            let r: f64 = A[s].iter().sum();
            assert!((r - C[s]).abs() < 2e-14, "row {s}");
        }
    }

    #[test]
    fn quadrature_conditions() {
        for q in 1..=9 {
            let hi: f64 = (0..S).map(|s| B_HIGH[s] * C[s].powi(q - 1)).sum();
            assert!((hi - 1.0 / q as f64).abs() < 1e-15, "high order, q={q}");
            let lo: f64 = (0..S).map(|s| B_LOW[s] * C[s].powi(q - 1)).sum();
            if q <= 8 {
                assert!((lo - 1.0 / q as f64).abs() < 1e-15, "low order, q={q}");
            }
        }
    }

    #[test]
    fn ninth_order_convergence_on_fixed_steps() {
        // y' = y cos t has the solution exp(sin t)
        let f = |t: f64, y: &[f64; 1]| [y[0] * t.cos()];
        let ig = Integrator::default();
        let exact = 2f64.sin().exp();
        let run = |n: usize| {
            let h = 2.0 / n as f64;
            let mut y = [1.0];
            for i in 0..n {
                y = ig.step(&f, i as f64 * h, &y, h).0;
            }
            (y[0] - exact).abs()
        };
        let (e1, e2) = (run(4), run(8));
        let rate = (e1 / e2).log2();
        assert!(rate > 8.3, "observed order {rate}");
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let ig = Integrator::with_tol(1e-12);
        let p = ig.advance(&f, &Point::start(0.0, [1.0, 0.0]), 50.0).unwrap();
        assert!((p.y[0] - 50f64.cos()).abs() < 1e-10);
        assert!((p.y[1] + 50f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn sampling_hits_requested_times_and_restarts() {
        let f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let ig = Integrator::default();
        let times: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
        let pts = ig.sample(&f, [1.0], &times).unwrap();
        for (p, &t) in pts.iter().zip(&times) {
            assert_eq!(p.t, t);
            assert!((p.y[0] - (-t).exp()).abs() < 1e-13);
        }
        let again = ig.advance(&f, &pts[4], 2.5).unwrap();
        assert!((again.y[0] - (-2.5f64).exp()).abs() < 1e-13);
        assert!(ig.sample(&f, [1.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let f = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let ig = Integrator::default();
        assert!(ig.advance(&f, &Point::start(0.0, [1.0]), 2.0).is_err());
    }
}
