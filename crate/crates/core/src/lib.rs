//! PID gain tuning through the `(kp, kd, T)` auxiliary mapping.
//!
//! A PID law with acceleration feedforward,
//!
//! ```text
//! u = KP·e1 + KD·e2 + KI·∫e1 + q̈d
//! ```
//!
//! is parameterised by a nominal PD pair `(kp, kd)` and a single time constant `T`:
//!
//! ```text
//! KP = kp + kd/T,   KD = kd + 1/T,   KI = kp/T
//! ```
//!
//! Under this mapping the same law splits exactly into a nominal PD controller `u0`
//! and an uncertainty/disturbance estimate `d̂`, so all three gains are tuned by
//! shrinking `T`. The crate provides:
//!
//! - [`gainmap`]: the forward mapping, its Jacobian and the inverse through an exact
//!   cubic solver.
//! - [`plant`]: the uncertain double integrator, lumped disturbance, signals and
//!   reference trajectories.
//! - [`control`]: the raw PID law and its PD + estimator decomposition.
//! - [`analysis`]: Routh–Hurwitz test, closed-loop companion matrix, Lyapunov solver,
//!   ultimate bound and stability-threshold search.
//! - [`sim`]: fixed-step RK4 closed-loop simulation in three equivalent forms and
//!   ultimate-bound / O(T) measurements.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use pidmap_core::gainmap::{forward_map, inverse_map, AuxParams};
//!
//! let gains = forward_map(&AuxParams::new(1.0, 2.0, 0.1)).unwrap();
//! assert_eq!((gains.kp, gains.ki, gains.kd), (21.0, 10.0, 12.0));
//!
//! let inverse = inverse_map(&gains).unwrap();
//! assert_eq!(inverse.candidates.len(), 2);
//! ```
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod control;
mod error;
pub mod gainmap;
mod math;
pub mod plant;
pub mod sim;

pub use error::{Error, Result};
pub use gainmap::{AuxParams, PidGains};
pub use plant::{DisturbanceSignal, PlantParams, PlantState, ReferenceTrajectory};
