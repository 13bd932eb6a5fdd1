//! Uncertain double-integrator plant `q̈ = u + d(q, q̇, u, t)` with the lumped
//! disturbance `d = a1·q + a2·q̇ + b·u + w(t)`, plus disturbance and reference
//! signals.
//!
//! Angles are in degrees and time in seconds.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::math;

/// Amplitude of the elevation-channel disturbance in the helicopter scenarios.
pub const ELEVATION_DISTURBANCE: f64 = 0.345;
/// Amplitude of the pitch-channel disturbance in the helicopter scenarios.
pub const PITCH_DISTURBANCE: f64 = 0.015;
/// Initial elevation angle (deg) of the helicopter scenarios.
pub const ELEVATION_INITIAL: f64 = -25.7;

/// `amplitude · sin(frequency·t + phase)`, frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SineTerm {
    pub amplitude: f64,
    pub frequency: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub phase: f64,
}

impl SineTerm {
    pub const fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
        }
    }

    /// `amplitude · cos(frequency·t)`.
    pub const fn cosine(amplitude: f64, frequency: f64) -> Self {
        Self::new(amplitude, frequency, FRAC_PI_2)
    }

    /// Derivative of order `n` (0..=3) at `t`.
    fn derivative(&self, t: f64, n: u8) -> f64 {
        let arg = self.frequency * t + self.phase;
        let w = self.frequency;
        let a = self.amplitude;
        match n {
            0 => a * math::sin(arg),
            1 => a * w * math::cos(arg),
            2 => -a * w * w * math::sin(arg),
            _ => -a * w * w * w * math::cos(arg),
        }
    }

    fn is_finite(&self) -> bool {
        self.amplitude.is_finite() && self.frequency.is_finite() && self.phase.is_finite()
    }
}

/// Natural cubic spline through tabulated samples.
///
/// Outside the tabulated range the value is held at the end sample and the
/// derivative is zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "SplineSamples", into = "SplineSamples")
)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct SplineSamples {
    t: Vec<f64>,
    w: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<SplineSamples> for CubicSpline {
    type Error = Error;
    fn try_from(s: SplineSamples) -> Result<Self> {
        CubicSpline::new(s.t, s.w)
    }
}

#[cfg(feature = "serde")]
impl From<CubicSpline> for SplineSamples {
    fn from(s: CubicSpline) -> Self {
        SplineSamples {
            t: s.knots,
            w: s.values,
        }
    }
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::Signal("tabulated signal needs at least two (t, w) samples"));
        }
        if knots.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Signal("tabulated samples must be finite"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Signal("tabulated times must be strictly increasing"));
        }

        // Tridiagonal system for the second derivatives, natural end conditions.
        let mut second = alloc::vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = alloc::vec![0.0; m];
            let mut upper = alloc::vec![0.0; m];
            let mut rhs = alloc::vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0
                    * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            // Thomas algorithm; sub-diagonal entry i is h_i = upper[i-1].
            for i in 1..m {
                let f = upper[i - 1] / diag[i - 1];
                diag[i] -= f * upper[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    fn segment(&self, t: f64) -> usize {
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.clamp(1, self.knots.len() - 1) - 1
    }

    pub fn value(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return self.values[0];
        }
        if t >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] || t >= self.knots[n - 1] {
            return 0.0;
        }
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        (self.values[i + 1] - self.values[i]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * self.second[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.second[i + 1]
    }

    fn max_abs_value(&self) -> f64 {
        // The interpolant can overshoot the samples; sample it densely.
        let mut m = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for w in self.knots.windows(2) {
            for k in 1..16 {
                let t = w[0] + (w[1] - w[0]) * k as f64 / 16.0;
                m = m.max(self.value(t).abs());
            }
        }
        m
    }

    fn max_abs_derivative(&self) -> f64 {
        let mut m = 0.0f64;
        for w in self.knots.windows(2) {
            for k in 0..16 {
                let t = w[0] + (w[1] - w[0]) * (k as f64 + 0.5) / 16.0;
                m = m.max(self.derivative(t).abs());
            }
        }
        m
    }
}

/// Exogenous disturbance `w(t)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case")
)]
pub enum DisturbanceSignal {
    Constant {
        value: f64,
    },
    Sinusoid {
        #[cfg_attr(feature = "serde", serde(default))]
        offset: f64,
        #[cfg_attr(feature = "serde", serde(flatten))]
        term: SineTerm,
    },
    SumOfSinusoids {
        #[cfg_attr(feature = "serde", serde(default))]
        offset: f64,
        terms: Vec<SineTerm>,
    },
    Tabulated {
        #[cfg_attr(feature = "serde", serde(flatten))]
        spline: CubicSpline,
    },
}

impl Default for DisturbanceSignal {
    fn default() -> Self {
        Self::zero()
    }
}

impl DisturbanceSignal {
    pub const fn zero() -> Self {
        Self::Constant { value: 0.0 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub const fn cosine(amplitude: f64, frequency: f64) -> Self {
        Self::Sinusoid {
            offset: 0.0,
            term: SineTerm::cosine(amplitude, frequency),
        }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated {
            spline: CubicSpline::new(times, values)?,
        })
    }

    /// Named scenario signals: `none`, `d1-elevation`, `d2-elevation`, `d1-pitch`,
    /// `d2-pitch`. `d1` is constant, `d2` is `amplitude·cos(t)`.
    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "none" | "zero" => Self::zero(),
            "d1-elevation" => Self::constant(ELEVATION_DISTURBANCE),
            "d2-elevation" => Self::cosine(ELEVATION_DISTURBANCE, 1.0),
            "d1-pitch" => Self::constant(PITCH_DISTURBANCE),
            "d2-pitch" => Self::cosine(PITCH_DISTURBANCE, 1.0),
            _ => return None,
        })
    }

    pub const PRESET_NAMES: [&'static str; 5] =
        ["none", "d1-elevation", "d2-elevation", "d1-pitch", "d2-pitch"];

    /// The same signal multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Self::Constant { value } => Self::Constant { value: k * value },
            Self::Sinusoid { offset, term } => Self::Sinusoid {
                offset: k * offset,
                term: SineTerm {
                    amplitude: k * term.amplitude,
                    ..*term
                },
            },
            Self::SumOfSinusoids { offset, terms } => Self::SumOfSinusoids {
                offset: k * offset,
                terms: terms
                    .iter()
                    .map(|s| SineTerm {
                        amplitude: k * s.amplitude,
                        ..*s
                    })
                    .collect(),
            },
            Self::Tabulated { spline } => {
                let values = spline.values.iter().map(|v| k * v).collect();
                Self::Tabulated {
                    spline: CubicSpline::new(spline.knots.clone(), values)
                        .expect("scaling preserves a valid table"),
                }
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Sinusoid { offset, term } => offset + term.derivative(t, 0),
            Self::SumOfSinusoids { offset, terms } => {
                offset + terms.iter().map(|s| s.derivative(t, 0)).sum::<f64>()
            }
            Self::Tabulated { spline } => spline.value(t),
        }
    }

    /// `ẇ(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Sinusoid { term, .. } => term.derivative(t, 1),
            Self::SumOfSinusoids { terms, .. } => terms.iter().map(|s| s.derivative(t, 1)).sum(),
            Self::Tabulated { spline } => spline.derivative(t),
        }
    }

    /// Upper bound on `sup |w|`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::Constant { value } => value.abs(),
            Self::Sinusoid { offset, term } => offset.abs() + term.amplitude.abs(),
            Self::SumOfSinusoids { offset, terms } => {
                offset.abs() + terms.iter().map(|s| s.amplitude.abs()).sum::<f64>()
            }
            Self::Tabulated { spline } => spline.max_abs_value(),
        }
    }

    /// Upper bound on `sup |ẇ|`.
    pub fn derivative_bound(&self) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Sinusoid { term, .. } => (term.amplitude * term.frequency).abs(),
            Self::SumOfSinusoids { terms, .. } => {
                terms.iter().map(|s| (s.amplitude * s.frequency).abs()).sum()
            }
            Self::Tabulated { spline } => spline.max_abs_derivative(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Constant { value } => value.is_finite(),
            Self::Sinusoid { offset, term } => offset.is_finite() && term.is_finite(),
            Self::SumOfSinusoids { offset, terms } => {
                offset.is_finite() && terms.iter().all(SineTerm::is_finite)
            }
            Self::Tabulated { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Signal("disturbance parameters must be finite"))
        }
    }
}

/// Ground-truth plant coefficients and disturbance. Never visible to the controller.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantParams {
    #[cfg_attr(feature = "serde", serde(default))]
    pub a1: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub a2: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub b: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub w: DisturbanceSignal,
}

impl PlantParams {
    pub const fn new(a1: f64, a2: f64, b: f64, w: DisturbanceSignal) -> Self {
        Self { a1, a2, b, w }
    }

    /// `a1 = a2 = b = 0`: an exactly feedback-linearised double integrator.
    pub const fn nominal(w: DisturbanceSignal) -> Self {
        Self::new(0.0, 0.0, 0.0, w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > -1.0 && self.b < 1.0) {
            return Err(Error::InputCoefficient { b: self.b });
        }
        if !(self.a1.is_finite() && self.a2.is_finite()) {
            return Err(Error::Config("plant coefficients must be finite"));
        }
        self.w.validate()
    }

    /// `1 + b`, the true input gain.
    pub fn input_gain(&self) -> f64 {
        1.0 + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantState {
    pub q: f64,
    pub qdot: f64,
}

impl PlantState {
    pub const fn new(q: f64, qdot: f64) -> Self {
        Self { q, qdot }
    }
}

/// Lumped uncertainty and disturbance `a1·q + a2·q̇ + b·u + w(t)`.
pub fn lud(params: &PlantParams, q: f64, qdot: f64, u: f64, t: f64) -> f64 {
    params.a1 * q + params.a2 * qdot + params.b * u + params.w.value(t)
}

/// [`lud`] at `t = 0`.
pub fn lud_initial(params: &PlantParams, state0: &PlantState, u0: f64) -> f64 {
    lud(params, state0.q, state0.qdot, u0, 0.0)
}

/// `q̈ = u + d`.
pub fn plant_rhs(params: &PlantParams, state: &PlantState, u: f64, t: f64) -> f64 {
    u + lud(params, state.q, state.qdot, u, t)
}

/// Desired position and its first three derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceSample {
    pub q: f64,
    pub qdot: f64,
    pub qddot: f64,
    pub qdddot: f64,
}

/// `q_d(t) = offset + Σ aₖ·sin(ωₖ·t + φₖ)`, with analytic derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReferenceTrajectory {
    #[cfg_attr(feature = "serde", serde(default))]
    pub offset: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub terms: Vec<SineTerm>,
}

impl ReferenceTrajectory {
    pub fn constant(value: f64) -> Self {
        Self {
            offset: value,
            terms: Vec::new(),
        }
    }

    /// `5.73·(sin(0.25t) + sin(0.5t) − 0.33)` deg.
    pub fn elevation() -> Self {
        Self {
            offset: -5.73 * 0.33,
            terms: alloc::vec![SineTerm::new(5.73, 0.25, 0.0), SineTerm::new(5.73, 0.5, 0.0)],
        }
    }

    /// `15·sin(0.63t)` deg.
    pub fn pitch() -> Self {
        Self {
            offset: 0.0,
            terms: alloc::vec![SineTerm::new(15.0, 0.63, 0.0)],
        }
    }

    /// `heli-elevation`, `heli-pitch` or `zero`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "heli-elevation" => Some(Self::elevation()),
            "heli-pitch" => Some(Self::pitch()),
            "zero" | "none" => Some(Self::constant(0.0)),
            _ => None,
        }
    }

    pub const PRESET_NAMES: [&'static str; 3] = ["heli-elevation", "heli-pitch", "zero"];

    pub fn eval(&self, t: f64) -> ReferenceSample {
        let mut s = ReferenceSample {
            q: self.offset,
            ..Default::default()
        };
        for term in &self.terms {
            s.q += term.derivative(t, 0);
            s.qdot += term.derivative(t, 1);
            s.qddot += term.derivative(t, 2);
            s.qdddot += term.derivative(t, 3);
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.offset.is_finite() && self.terms.iter().all(SineTerm::is_finite) {
            Ok(())
        } else {
            Err(Error::Signal("reference parameters must be finite"))
        }
    }
}

/// Free-function form of [`ReferenceTrajectory::eval`].
pub fn eval_reference(traj: &ReferenceTrajectory, t: f64) -> ReferenceSample {
    traj.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec;

    #[test]
    fn lud_examples() {
        let p = PlantParams::nominal(DisturbanceSignal::constant(0.345));
        assert_eq!(lud(&p, 3.0, -2.0, 7.0, 11.0), 0.345);
        let p = PlantParams::new(1.0, 0.0, 0.0, DisturbanceSignal::zero());
        assert_eq!(lud(&p, 2.0, 0.0, 0.0, 0.0), 2.0);
    }

    #[test]
    fn lud_initial_examples() {
        let p = PlantParams::default();
        assert_eq!(lud_initial(&p, &PlantState::default(), 0.0), 0.0);
        let p = PlantParams::new(0.1, 0.0, 0.0, DisturbanceSignal::constant(0.345));
        let d0 = lud_initial(&p, &PlantState::new(-25.7, 0.0), 0.0);
        assert!((d0 - (-2.225)).abs() < 1e-12);
        let p = PlantParams::nominal(DisturbanceSignal::preset("d1-elevation").unwrap());
        assert_eq!(lud_initial(&p, &PlantState::new(-25.7, 3.0), 5.0), 0.345);
    }

    #[test]
    fn plant_rhs_examples() {
        let zero = PlantParams::default();
        assert_eq!(plant_rhs(&zero, &PlantState::default(), 1.0, 0.0), 1.0);
        let p = PlantParams::nominal(DisturbanceSignal::constant(0.345));
        assert_eq!(plant_rhs(&p, &PlantState::new(1.0, 1.0), 0.0, 2.0), 0.345);
        let p = PlantParams::new(0.0, 0.0, 0.5, DisturbanceSignal::zero());
        assert_eq!(plant_rhs(&p, &PlantState::default(), 2.0, 0.0), 3.0);
    }

    #[test]
    fn plant_validation_enforces_input_gain() {
        for b in [-1.0, 1.0, 1.5, f64::NAN] {
            let p = PlantParams::new(0.0, 0.0, b, DisturbanceSignal::zero());
            assert!(matches!(p.validate(), Err(Error::InputCoefficient { .. })));
        }
        assert!(PlantParams::new(3.0, -2.0, 0.9, DisturbanceSignal::zero()).validate().is_ok());
    }

    #[test]
    fn reference_presets_at_zero() {
        let e = ReferenceTrajectory::elevation().eval(0.0);
        assert!((e.q - (-1.8909)).abs() < 1e-12);
        assert!((e.qdot - 5.73 * 0.75).abs() < 1e-12);
        let p = ReferenceTrajectory::pitch().eval(0.0);
        assert_eq!(p.q, 0.0);
        assert!((p.qdot - 9.45).abs() < 1e-12);
        let c = ReferenceTrajectory::constant(4.0).eval(12.0);
        assert_eq!(c, ReferenceSample { q: 4.0, ..Default::default() });
    }

    #[test]
    fn reference_derivatives_match_central_differences() {
        for traj in [ReferenceTrajectory::elevation(), ReferenceTrajectory::pitch()] {
            let mut errs = vec![];
            for h in [1e-3, 1e-4] {
                let mut worst = [0.0f64; 3];
                for k in 0..200 {
                    let t = 0.3 * k as f64 + 0.1;
                    let (lo, mid, hi) = (traj.eval(t - h), traj.eval(t), traj.eval(t + h));
                    worst[0] = worst[0].max(((hi.q - lo.q) / (2.0 * h) - mid.qdot).abs());
                    worst[1] = worst[1].max(((hi.qdot - lo.qdot) / (2.0 * h) - mid.qddot).abs());
                    worst[2] = worst[2].max(((hi.qddot - lo.qddot) / (2.0 * h) - mid.qdddot).abs());
                }
                errs.push(worst);
            }
            for d in 0..3 {
                // 10x smaller step, ~100x smaller error
                let ratio = errs[0][d] / errs[1][d];
                assert!(ratio > 60.0 && ratio < 140.0, "derivative {d}: ratio {ratio}");
                assert!(errs[0][d] < 1e-4);
            }
        }
    }

    #[test]
    fn disturbance_presets() {
        let d1 = DisturbanceSignal::preset("d1-elevation").unwrap();
        assert_eq!((d1.value(3.0), d1.derivative(3.0)), (0.345, 0.0));
        let d2 = DisturbanceSignal::preset("d2-elevation").unwrap();
        assert!((d2.value(0.0) - 0.345).abs() < 1e-15);
        assert!((d2.value(1.0) - 0.345 * 1f64.cos()).abs() < 1e-15);
        assert!((d2.derivative(1.0) + 0.345 * 1f64.sin()).abs() < 1e-15);
        assert_eq!(DisturbanceSignal::preset("d2-pitch").unwrap().sup_bound(), 0.015);
        assert!(DisturbanceSignal::preset("d3").is_none());
        assert_eq!(d2.scaled(2.0).sup_bound(), 0.69);
    }

    #[test]
    fn sinusoid_bounds_hold_on_grid() {
        let w = DisturbanceSignal::SumOfSinusoids {
            offset: 0.2,
            terms: vec![SineTerm::new(1.5, 0.7, 0.3), SineTerm::new(-0.4, 3.0, 1.0)],
        };
        let (wb, db) = (w.sup_bound(), w.derivative_bound());
        assert_eq!(wb, 2.1);
        for k in 0..10_000 {
            let t = k as f64 * 0.01;
            assert!(w.value(t).abs() <= wb + 1e-12);
            assert!(w.derivative(t).abs() <= db + 1e-12);
        }
    }

    #[test]
    fn spline_interpolates_and_is_differentiable() {
        let ts: std::vec::Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let ws = ts.iter().map(|t| t.sin()).collect();
        let w = DisturbanceSignal::tabulated(ts.clone(), ws).unwrap();
        for &t in &ts {
            assert!((w.value(t) - t.sin()).abs() < 1e-14);
        }
        // interior accuracy and derivative consistency
        let h = 1e-5;
        for k in 1..190 {
            let t = 0.5 + k as f64 * 0.047;
            assert!((w.value(t) - t.sin()).abs() < 2e-3);
            let fd = (w.value(t + h) - w.value(t - h)) / (2.0 * h);
            assert!((fd - w.derivative(t)).abs() < 1e-6);
        }
        // held outside the table
        assert_eq!(w.value(-1.0), 0.0);
        assert_eq!(w.derivative(20.0), 0.0);
        assert!(w.sup_bound() >= 0.99 && w.derivative_bound() > 0.9);
    }

    #[test]
    fn spline_rejects_bad_tables() {
        assert!(CubicSpline::new(vec![0.0], vec![1.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        // two points: straight line
        let s = CubicSpline::new(vec![0.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert_eq!((s.value(1.0), s.derivative(1.0)), (2.0, 1.0));
    }

    proptest! {
        #[test]
        fn lud_is_linear_in_state_and_input(
            a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, b in -0.9f64..0.9,
            x in proptest::array::uniform3(-10.0f64..10.0),
            y in proptest::array::uniform3(-10.0f64..10.0),
            t in 0.0f64..50.0,
        ) {
            let p = PlantParams::new(a1, a2, b, DisturbanceSignal::cosine(0.3, 1.0));
            let w = p.w.value(t);
            let f = |v: [f64; 3]| lud(&p, v[0], v[1], v[2], t) - w;
            let sum = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
            prop_assert!((f(sum) - f(x) - f(y)).abs() <= 1e-12 * (1.0 + f(x).abs() + f(y).abs()));
            // direct four-term formula
            let direct = a1 * x[0] + a2 * x[1] + b * x[2] + w;
            prop_assert!((lud(&p, x[0], x[1], x[2], t) - direct).abs() <= 1e-12);
        }
    }
}
