//! Geodesics, conjugate times and Maxwell-time bounds for the
//! sub-Riemannian problem on the Engel group.

pub mod batch;
pub mod conj;
pub mod elliptic;
pub mod error;
pub mod expmap;
pub mod jacobian_closed;
pub mod ode;
pub mod pendulum;
mod rerr;

pub use error::{EngelError, Result};
pub use expmap::State;
pub use pendulum::{Covector, EllipticCoords, Stratum};
