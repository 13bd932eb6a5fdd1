//! The PID law with acceleration feedforward and its PD + estimator split.
//!
//! With gains from [`forward_map`](crate::gainmap::forward_map),
//!
//! ```text
//! u  = KP·e1 + KD·e2 + KI·qI + q̈d
//!    = u0 − d̂
//! u0 = q̈d + kp·e1 + kd·e2
//! d̂  = −(kd·e1 + e2 + kp·qI) / T
//! ```
//!
//! where `e1 = qd − q`, `e2 = q̇d − q̇` and `qI = ∫ e1`.

use crate::error::Result;
use crate::gainmap::{AuxParams, PidGains};

/// Tracking-error state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorState {
    /// Integral of the position error; zero at `t = 0`.
    pub qi: f64,
    /// Position error `qd − q`.
    pub e1: f64,
    /// Velocity error `q̇d − q̇`.
    pub e2: f64,
}

impl ErrorState {
    pub const fn new(qi: f64, e1: f64, e2: f64) -> Self {
        Self { qi, e1, e2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlDecomposition {
    /// Nominal PD control with feedforward.
    pub u0: f64,
    /// Disturbance estimate.
    pub dhat: f64,
    /// `u0 − dhat`.
    pub u: f64,
}

pub fn pid_raw(gains: &PidGains, err: &ErrorState, qdd_d: f64) -> f64 {
    gains.kp * err.e1 + gains.kd * err.e2 + gains.ki * err.qi + qdd_d
}

pub fn pid_decomposed(aux: &AuxParams, err: &ErrorState, qdd_d: f64) -> Result<ControlDecomposition> {
    aux.validate()?;
    Ok(decompose(aux, err, qdd_d))
}

/// [`pid_decomposed`] without the domain check, for inner loops on validated input.
#[inline]
pub(crate) fn decompose(aux: &AuxParams, err: &ErrorState, qdd_d: f64) -> ControlDecomposition {
    let u0 = qdd_d + aux.kp * err.e1 + aux.kd * err.e2;
    let dhat = -(aux.kd * err.e1 + err.e2 + aux.kp * err.qi) / aux.time_constant;
    ControlDecomposition {
        u0,
        dhat,
        u: u0 - dhat,
    }
}

/// `d̂(0) = −(kd·e1(0) + e2(0)) / T`.
///
/// Grows like `1/T` unless `kd·e1(0) + e2(0) = 0`, which is the source of the
/// initial control peak.
pub fn initial_estimate(aux: &AuxParams, e1_0: f64, e2_0: f64) -> f64 {
    -(aux.kd * e1_0 + e2_0) / aux.time_constant
}
