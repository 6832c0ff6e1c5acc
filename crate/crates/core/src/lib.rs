//! Numerical laboratory for a compressible isentropic gas inside a ball
//! whose wall is pulled outward at (asymptotically) constant speed.
//!
//! The crate provides:
//!
//! * [`model`] — gas law, wall law, the exact expanding background state,
//!   and the Bernoulli maps between potential data and `(rho, u)`;
//! * [`euler1d`] — moving-mesh finite-volume solver for the spherically
//!   symmetric isentropic Euler system on `r ∈ [0, R(t)]`;
//! * [`potential1d`] — independent finite-difference solver for the
//!   quasilinear velocity-potential equation, used as a cross-check on
//!   smooth irrotational flow;
//! * [`zfield`] — exact rational polynomial calculus for the rotation
//!   fields `Z_i = x_i d_j - x_j d_i` and their algebraic identities;
//! * [`diagnostics`] — the monitored functionals (mass, density ratio
//!   bounds, velocity deviation, weighted energy, sound-speed floor) and
//!   log-log decay fits.

pub mod diagnostics;
pub mod error;
pub mod euler1d;
pub mod model;
pub mod potential1d;
pub mod zfield;

pub use error::{Error, Result};
pub use model::{BackgroundSlice, ExpansionProfile, GasModel, ProfileKind};
