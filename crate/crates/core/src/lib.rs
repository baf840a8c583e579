//! Numerical laboratory for nonholonomically constrained Lagrangian systems.
//!
//! The crate covers mechanical systems (one base dimension, time) and
//! 1+1-dimensional field theories (space and time). It provides
//!
//! * jet-space coordinates, constraint evaluation and Chetaev reaction-force
//!   bases in both the covariant and the time-distinguished (noncovariant)
//!   flavor ([`jet`]),
//! * a multiplier-eliminating RK4 integrator for mechanical systems with the
//!   Benenti system as a builtin ([`mech`]),
//! * a method-of-lines solver for the rolling Cosserat rod ([`rod`]),
//! * nonholonomic momentum maps and momentum-equation residuals ([`momentum`]),
//! * sampling-based discovery of generalized nonholonomic symmetries
//!   ([`symmetry`]).

pub mod error;
pub mod jet;
pub mod linalg;
pub mod mech;
pub mod momentum;
pub mod rod;
pub mod symmetry;

pub use error::{Error, Result};
