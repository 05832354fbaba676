//! Dynamical zeta approximants for the quadratic family `z ↦ z^2 + c`,
//! `c < -2`.
//!
//! The Julia set of these maps is a Cantor set on the real line coded by
//! two inverse branches `g_±(z) = ±√(z - c)`. This crate enumerates the
//! periodic orbits through that coding, assembles the cycle-expansion
//! approximants `Δ_N(s)` of the dynamical zeta function, and finds their
//! zeros: the largest real zero approximates the Hausdorff dimension of the
//! Julia set, the complex zeros give resonance atlases. It also carries
//! numeric checks of the inequalities governing phase separation of the
//! branch compositions.
//!
//! ```
//! use quadzeta::{dynamics::SystemParams, zeta::ZetaApproximant, zeros};
//!
//! let sys = SystemParams::new(-4.0).unwrap();
//! let zeta = ZetaApproximant::build(&sys, 8).unwrap();
//! let delta = zeros::largest_real_zero(&zeta, 0.01, 1.2).unwrap();
//! assert!(delta.s.re > 0.5 && delta.s.re < 0.6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod parallel;
pub mod quadrature;
pub mod reduce;
pub mod symbolic;
pub mod verify;
pub mod zeros;
pub mod zeta;

pub use dynamics::{Letter, PeriodicOrbit, SystemParams, Word, MAX_ORDER};
pub use error::{Error, Result};
pub use parallel::Execution;
pub use symbolic::Partition;
pub use zeros::{Rectangle, Zero};
pub use zeta::{TraceTable, ZetaApproximant};
