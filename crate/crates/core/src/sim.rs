//! Fixed-step RK4 simulation of the closed loop.
//!
//! Three equivalent representations are available:
//!
//! - [`run_closed_loop`]: plant plus controller on the augmented state `(qI, q, q̇)`,
//!   with either the raw PID law or the PD + estimator form.
//! - [`run_sp_form`]: the two-time-scale error system on `(e1, e2, d̃)`,
//!   `ė = A1·e + B1·d̃`, `T·d̃' = A2·d̃ + T·B2·e − T·u_d`.
//! - [`run_reduced`] and [`boundary_layer`]: the slow (`T = 0`) and fast
//!   (stretched time `τ = t/T`) approximations.
//!
//! All runs are deterministic: the same configuration gives bit-identical output.

use alloc::vec::Vec;

use crate::control::{decompose, initial_estimate, pid_raw, ErrorState};
use crate::error::{Error, Result};
use crate::gainmap::{inverse_map, AuxParams, PidGains};
use crate::math;
use crate::plant::{lud, lud_initial, plant_rhs, PlantParams, PlantState, ReferenceTrajectory};

/// Any state component above this magnitude aborts the run.
pub const ESCAPE_THRESHOLD: f64 = 1e9;
pub const DEFAULT_T_END: f64 = 60.0;
pub const DEFAULT_TAIL_FRACTION: f64 = 1.0 / 3.0;
pub const DEFAULT_MAX_DT: f64 = 1e-3;
/// Integration steps per estimator time constant `T`.
pub const STEPS_PER_TIME_CONSTANT: f64 = 20.0;
/// Width of the initial layer, in multiples of `T`.
pub const INITIAL_LAYER_WIDTH: f64 = 5.0;
/// Two tail windows agreeing within this fraction count as settled.
pub const SETTLE_REL_TOL: f64 = 0.05;
/// Windows whose maxima differ by less than this fraction of the largest error
/// over the whole run also count as settled, so a tail decaying to zero is not
/// reported as unsettled.
pub const SETTLE_ABS_TOL: f64 = 1e-6;
/// `t_ε` is the time after which `|q̃| ≤ SETTLING_MARGIN · ε` holds permanently.
pub const SETTLING_MARGIN: f64 = 1.05;

/// Uniformly sampled solution of an ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

/// Number of grid points `floor((t_end − t0)/dt) + 1`.
pub fn grid_len(t0: f64, t_end: f64, dt: f64) -> usize {
    // absorb rounding in the quotient, e.g. 60/1e-3 = 59999.999…
    math::floor((t_end - t0) / dt * (1.0 + 1e-12) + 1e-9) as usize + 1
}

/// Classical fourth-order Runge–Kutta with fixed step `dt` on `t0 + k·dt`.
///
/// Aborts with [`Error::InstabilityEscape`] when a state becomes non-finite or
/// exceeds [`ESCAPE_THRESHOLD`] in magnitude.
pub fn integrate<const N: usize, F>(mut rhs: F, state0: [f64; N], t0: f64, t_end: f64, dt: f64) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config("step size must be positive and finite"));
    }
    if !(t0.is_finite() && t_end.is_finite() && t_end >= t0) {
        return Err(Error::Config("integration interval must be finite with t_end >= t0"));
    }
    let n = grid_len(t0, t_end, dt);
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let axpy = |x: &[f64; N], h: f64, k: &[f64; N]| -> [f64; N] { core::array::from_fn(|i| x[i] + h * k[i]) };

    let mut x = state0;
    if escaped(&x) {
        return Err(Error::InstabilityEscape { t: t0 });
    }
    times.push(t0);
    states.push(x);
    for k in 1..n {
        let t = t0 + (k - 1) as f64 * dt;
        let k1 = rhs(t, &x);
        let k2 = rhs(t + 0.5 * dt, &axpy(&x, 0.5 * dt, &k1));
        let k3 = rhs(t + 0.5 * dt, &axpy(&x, 0.5 * dt, &k2));
        let k4 = rhs(t + dt, &axpy(&x, dt, &k3));
        x = core::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let t_next = t0 + k as f64 * dt;
        if escaped(&x) {
            return Err(Error::InstabilityEscape { t: t_next });
        }
        times.push(t_next);
        states.push(x);
    }
    Ok(Trajectory { times, states })
}

fn escaped(x: &[f64]) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > ESCAPE_THRESHOLD)
}

/// Controller representation used in a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Controller {
    /// Raw PID law.
    Pid(PidGains),
    /// `u = u0 − d̂` from the auxiliary parameters.
    Aux(AuxParams),
}

impl Controller {
    #[inline]
    fn control(&self, err: &ErrorState, qdd_d: f64) -> f64 {
        match self {
            Controller::Pid(g) => pid_raw(g, err, qdd_d),
            Controller::Aux(aux) => decompose(aux, err, qdd_d).u,
        }
    }

    /// Auxiliary parameters used to report `u0` and `d̂`: given directly, or the
    /// unique admissible inverse of the PID gains.
    pub fn decomposition(&self) -> Option<AuxParams> {
        match self {
            Controller::Aux(aux) => Some(*aux),
            Controller::Pid(g) => {
                let inv = inverse_map(g).ok()?;
                let mut admissible = inv.admissible();
                let first = admissible.next()?;
                admissible.next().is_none().then_some(first.aux)
            }
        }
    }

    /// `min(1e-3, T/20)`, with `T` taken as `1/KD` for raw gains.
    pub fn default_dt(&self) -> f64 {
        let t = match self {
            Controller::Aux(aux) => aux.time_constant,
            Controller::Pid(g) => 1.0 / g.kd.abs().max(1e-300),
        };
        DEFAULT_MAX_DT.min(t / STEPS_PER_TIME_CONSTANT)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Controller::Aux(aux) => aux.validate(),
            Controller::Pid(g) if g.is_finite() => Ok(()),
            Controller::Pid(_) => Err(Error::Config("non-finite PID gains")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub truth: PlantParams,
    pub controller: Controller,
    pub trajectory: ReferenceTrajectory,
    pub initial_state: PlantState,
    pub t_end: f64,
    pub dt: f64,
    /// Fraction of the run, at the end, over which the ultimate bound is measured.
    pub tail_fraction: f64,
}

impl SimConfig {
    /// Default horizon, tail fraction and `dt = min(1e-3, T/20)`.
    pub fn new(truth: PlantParams, controller: Controller, trajectory: ReferenceTrajectory, initial_state: PlantState) -> Self {
        Self {
            truth,
            controller,
            trajectory,
            initial_state,
            t_end: DEFAULT_T_END,
            dt: controller.default_dt(),
            tail_fraction: DEFAULT_TAIL_FRACTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config("dt must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config("t_end must be positive"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 0.5) {
            return Err(Error::Config("tail fraction must lie in (0, 0.5]"));
        }
        if !(self.initial_state.q.is_finite() && self.initial_state.qdot.is_finite()) {
            return Err(Error::Config("initial state must be finite"));
        }
        self.truth.validate()?;
        self.trajectory.validate()?;
        self.controller.validate()?;
        if let Controller::Aux(aux) = self.controller {
            if self.dt > aux.time_constant / STEPS_PER_TIME_CONSTANT * (1.0 + 1e-12) {
                return Err(Error::Config("dt must not exceed T/20"));
            }
        }
        Ok(())
    }

    /// Initial tracking errors `(e1(0), e2(0))`.
    pub fn initial_error(&self) -> [f64; 2] {
        let r = self.trajectory.eval(0.0);
        [r.q - self.initial_state.q, r.qdot - self.initial_state.qdot]
    }
}

/// Plant state that starts on `kd·e1(0) + e2(0) = 0` with the given initial position,
/// so that `d̂(0)` carries no `1/T` peak.
pub fn peaking_free_state(trajectory: &ReferenceTrajectory, kd: f64, q0: f64) -> PlantState {
    let r = trajectory.eval(0.0);
    let e1 = r.q - q0;
    PlantState::new(q0, r.qdot + kd * e1)
}

/// Measured ultimate bound of `q̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UbMeasurement {
    /// `max |q̃|` over the final tail window.
    pub epsilon: f64,
    /// First time after which `|q̃| ≤ 1.05·ε` permanently.
    pub settling_time: f64,
    /// `max |q̃|` over the window just before the tail.
    pub previous_epsilon: f64,
    pub settled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub qi: Vec<f64>,
    pub u: Vec<f64>,
    /// NaN when the controller has no unique decomposition.
    pub u0: Vec<f64>,
    /// NaN when the controller has no unique decomposition.
    pub dhat: Vec<f64>,
    /// True lumped disturbance.
    pub d: Vec<f64>,
    /// `dhat − d`.
    pub dtilde: Vec<f64>,
    pub ultimate_bound: UbMeasurement,
}

impl SimResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_control(&self) -> f64 {
        max_abs(&self.u)
    }

    /// NaN when `d̂` is not available.
    pub fn max_abs_dhat(&self) -> f64 {
        max_abs(&self.dhat)
    }

    /// `max |d̂|` over `t ≤ t_to`.
    pub fn peak_dhat_until(&self, t_to: f64) -> f64 {
        let n = self.times.partition_point(|&t| t <= t_to);
        max_abs(&self.dhat[..n])
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Integrates plant and controller on `(qI, q, q̇)` and records every signal.
pub fn run_closed_loop(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let SimConfig {
        truth,
        controller,
        trajectory,
        initial_state,
        ..
    } = config;

    let errors = |t: f64, x: &[f64; 3]| {
        let r = trajectory.eval(t);
        (ErrorState::new(x[0], r.q - x[1], r.qdot - x[2]), r.qddot)
    };
    let traj = integrate(
        |t, x| {
            let (err, qdd_d) = errors(t, x);
            let u = controller.control(&err, qdd_d);
            let qdd = plant_rhs(truth, &PlantState::new(x[1], x[2]), u, t);
            [err.e1, x[2], qdd]
        },
        [0.0, initial_state.q, initial_state.qdot],
        0.0,
        config.t_end,
        config.dt,
    )?;

    let aux = controller.decomposition();
    let n = traj.times.len();
    let mut out = SimResult {
        times: traj.times,
        q: Vec::with_capacity(n),
        qdot: Vec::with_capacity(n),
        e1: Vec::with_capacity(n),
        e2: Vec::with_capacity(n),
        qi: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        u0: Vec::with_capacity(n),
        dhat: Vec::with_capacity(n),
        d: Vec::with_capacity(n),
        dtilde: Vec::with_capacity(n),
        ultimate_bound: UbMeasurement {
            epsilon: 0.0,
            settling_time: 0.0,
            previous_epsilon: 0.0,
            settled: false,
        },
    };
    for (&t, x) in out.times.iter().zip(&traj.states) {
        let (err, qdd_d) = errors(t, x);
        let u = controller.control(&err, qdd_d);
        let d = lud(truth, x[1], x[2], u, t);
        let (u0, dhat) = match &aux {
            Some(a) => {
                let c = decompose(a, &err, qdd_d);
                (c.u0, c.dhat)
            }
            None => (f64::NAN, f64::NAN),
        };
        out.q.push(x[1]);
        out.qdot.push(x[2]);
        out.e1.push(err.e1);
        out.e2.push(err.e2);
        out.qi.push(x[0]);
        out.u.push(u);
        out.u0.push(u0);
        out.dhat.push(dhat);
        out.d.push(d);
        out.dtilde.push(dhat - d);
    }
    out.ultimate_bound = assess_ub(&out.times, &out.e1, config.tail_fraction);
    Ok(out)
}

/// Ultimate-bound measurement that reports, rather than rejects, an unsettled tail.
pub fn assess_ub(times: &[f64], e1: &[f64], tail_fraction: f64) -> UbMeasurement {
    let (Some(&t0), Some(&t_end)) = (times.first(), times.last()) else {
        return UbMeasurement {
            epsilon: f64::NAN,
            settling_time: f64::NAN,
            previous_epsilon: f64::NAN,
            settled: false,
        };
    };
    let span = t_end - t0;
    let tail_start = times.partition_point(|&t| t < t_end - tail_fraction * span);
    let prev_start = times.partition_point(|&t| t < t_end - 2.0 * tail_fraction * span);
    let epsilon = max_abs(&e1[tail_start..]);
    let previous_epsilon = max_abs(&e1[prev_start..tail_start.max(prev_start)]);
    let floor = SETTLE_ABS_TOL * max_abs(e1).max(1.0);
    let settled = (epsilon - previous_epsilon).abs() <= SETTLE_REL_TOL * epsilon.max(previous_epsilon) + floor;

    let limit = SETTLING_MARGIN * epsilon;
    let settling_time = match e1.iter().rposition(|x| x.abs() > limit) {
        None => t0,
        Some(i) if i + 1 < times.len() => times[i + 1],
        Some(i) => times[i],
    };
    UbMeasurement {
        epsilon,
        settling_time,
        previous_epsilon,
        settled,
    }
}

/// `ε = max |q̃|` over the final `tail_fraction` of the run and the matching `t_ε`.
///
/// Fails with [`Error::NotSettled`] when the tail window and the window before it
/// disagree by more than 5%; a longer run is needed.
pub fn measure_ub(result: &SimResult, tail_fraction: f64) -> Result<UbMeasurement> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::Config("tail fraction must lie in (0, 0.5]"));
    }
    let m = assess_ub(&result.times, &result.e1, tail_fraction);
    if m.settled {
        Ok(m)
    } else {
        Err(Error::NotSettled {
            last: m.epsilon,
            previous: m.previous_epsilon,
        })
    }
}

/// Matrices of the two-time-scale error system
/// `ė = A1·e + B1·d̃`, `T·d̃' = A2·d̃ + T·B2·e − T·u_d(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpForm {
    /// `A1 = [[0, 1], [−kp, −kd]]`.
    pub slow: [[f64; 2]; 2],
    /// `B1 = (0, 1)`.
    pub slow_input: [f64; 2],
    /// `A2 = a2·T − 1 − b − b·T·kd`.
    pub fast: f64,
    /// `B2 = (b·kd·kp − a2·kp, a1 + b·kd² − a2·kd − b·kp)`.
    pub coupling: [f64; 2],
    pub time_constant: f64,
    a1: f64,
    a2: f64,
    b: f64,
}

impl SpForm {
    pub fn new(aux: &AuxParams, truth: &PlantParams) -> Result<Self> {
        aux.validate()?;
        truth.validate()?;
        let AuxParams {
            kp,
            kd,
            time_constant: t,
        } = *aux;
        let PlantParams { a1, a2, b, .. } = *truth;
        Ok(Self {
            slow: [[0.0, 1.0], [-kp, -kd]],
            slow_input: [0.0, 1.0],
            fast: a2 * t - 1.0 - b - b * t * kd,
            coupling: [b * kd * kp - a2 * kp, a1 + b * kd * kd - a2 * kd - b * kp],
            time_constant: t,
            a1,
            a2,
            b,
        })
    }

    /// `u_d = a1·q̇d + a2·q̈d + b·q⃛d + ẇ`. It enters `d̃'` with a minus sign,
    /// since `d̃' = d̂' − ḋ` and `ḋ` contains `+u_d`.
    pub fn forcing(&self, truth: &PlantParams, trajectory: &ReferenceTrajectory, t: f64) -> f64 {
        let r = trajectory.eval(t);
        self.a1 * r.qdot + self.a2 * r.qddot + self.b * r.qdddot + truth.w.derivative(t)
    }

    fn rhs(&self, truth: &PlantParams, trajectory: &ReferenceTrajectory, t: f64, x: &[f64; 3]) -> [f64; 3] {
        let [e1, e2, dt] = *x;
        let s = &self.slow;
        [
            s[0][0] * e1 + s[0][1] * e2 + self.slow_input[0] * dt,
            s[1][0] * e1 + s[1][1] * e2 + self.slow_input[1] * dt,
            self.fast / self.time_constant * dt + self.coupling[0] * e1 + self.coupling[1] * e2
                - self.forcing(truth, trajectory, t),
        ]
    }
}

/// `(e1, e2, d̃)` series from the two-time-scale form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpResult {
    pub times: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub dtilde: Vec<f64>,
}

/// Integrates the two-time-scale error system from the initial errors of `config`
/// and `d̃(0) = d̂(0) − d(0)`.
pub fn run_sp_form(config: &SimConfig) -> Result<SpResult> {
    config.validate()?;
    let Controller::Aux(aux) = config.controller else {
        return Err(Error::Config("two-time-scale form needs auxiliary parameters"));
    };
    let sp = SpForm::new(&aux, &config.truth)?;
    let [e1_0, e2_0] = config.initial_error();
    let qdd_d0 = config.trajectory.eval(0.0).qddot;
    let u_init = decompose(&aux, &ErrorState::new(0.0, e1_0, e2_0), qdd_d0).u;
    let dtilde0 = initial_estimate(&aux, e1_0, e2_0) - lud_initial(&config.truth, &config.initial_state, u_init);

    let traj = integrate(
        |t, x| sp.rhs(&config.truth, &config.trajectory, t, x),
        [e1_0, e2_0, dtilde0],
        0.0,
        config.t_end,
        config.dt,
    )?;
    let (mut e1, mut e2, mut dtilde) = (Vec::new(), Vec::new(), Vec::new());
    for x in &traj.states {
        e1.push(x[0]);
        e2.push(x[1]);
        dtilde.push(x[2]);
    }
    Ok(SpResult {
        times: traj.times,
        e1,
        e2,
        dtilde,
    })
}

/// `exp(A1·t)` for `A1 = [[0, 1], [−kp, −kd]]`.
pub fn reduced_exponential(kp: f64, kd: f64, t: f64) -> [[f64; 2]; 2] {
    // exp(A t) = e^{s t} (c(t)·I + g(t)·(A − s I)), s = −kd/2, δ² = kd²/4 − kp
    let s = -0.5 * kd;
    let delta2 = 0.25 * kd * kd - kp;
    let (c, g) = if delta2 * t * t > 1e-8 {
        let d = math::sqrt(delta2);
        (math::cosh(d * t), math::sinh(d * t) / d)
    } else if delta2 * t * t < -1e-8 {
        let w = math::sqrt(-delta2);
        (math::cos(w * t), math::sin(w * t) / w)
    } else {
        // series in δ²t², accurate to O(δ⁶t⁶)
        let z = delta2 * t * t;
        (1.0 + z / 2.0 + z * z / 24.0, t * (1.0 + z / 6.0 + z * z / 120.0))
    };
    let es = math::exp(s * t);
    [
        [es * (c + g * (0.0 - s)), es * g],
        [es * g * (-kp), es * (c + g * (-kd - s))],
    ]
}

/// Solution of the reduced model `ė* = A1·e*`, `e*(0) = e0`, at the given times.
pub fn run_reduced(kp: f64, kd: f64, e0: [f64; 2], times: &[f64]) -> Result<Vec<[f64; 2]>> {
    AuxParams::new(kp, kd, 1.0).validate()?;
    Ok(times
        .iter()
        .map(|&t| {
            let m = reduced_exponential(kp, kd, t);
            [m[0][0] * e0[0] + m[0][1] * e0[1], m[1][0] * e0[0] + m[1][1] * e0[1]]
        })
        .collect())
}

/// `y(τ) = d̃0 · exp(−(1 + b)·τ)`.
pub fn boundary_layer_at(b: f64, dtilde0: f64, tau: f64) -> f64 {
    dtilde0 * math::exp(-(1.0 + b) * tau)
}

/// Boundary-layer solution on a grid of stretched times `τ = t/T`.
pub fn boundary_layer(b: f64, dtilde0: f64, taus: &[f64]) -> Result<Vec<f64>> {
    if !(b.is_finite() && b > -1.0 && b < 1.0) {
        return Err(Error::InputCoefficient { b });
    }
    Ok(taus.iter().map(|&tau| boundary_layer_at(b, dtilde0, tau)).collect())
}

/// Least-squares line through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginFit {
    pub slope: f64,
    /// Uncentred coefficient of determination `1 − SSres/Σy²`, the usual
    /// definition for a model without intercept.
    pub r_squared: f64,
    /// `1 − SSres/Σ(y − ȳ)²`.
    pub r_squared_centered: f64,
}

pub fn fit_through_origin(x: &[f64], y: &[f64]) -> OriginFit {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = sxy / sxx;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a) * (b - slope * a)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean) * (b - mean)).sum();
    let ss_raw: f64 = y.iter().map(|b| b * b).sum();
    let ratio = |den: f64| if den > 0.0 { 1.0 - ss_res / den } else { 1.0 };
    OriginFit {
        slope,
        r_squared: ratio(ss_raw),
        r_squared_centered: ratio(ss_tot),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtRow {
    pub time_constant: f64,
    /// `sup_t ‖e(t) − e*(t)‖₂`.
    pub gap_e: f64,
    /// `sup |d̃(t) − y(t/T)|` past the initial layer.
    pub gap_d: f64,
    /// Tail `max |q̃|`.
    pub ub_e: f64,
    /// Tail `max |d̃|`.
    pub ub_d: f64,
    /// `gap_e` relative to the previous row.
    pub ratio_prev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OtStudy {
    pub rows: Vec<OtRow>,
    pub gap_e_fit: OriginFit,
    pub gap_d_fit: OriginFit,
    pub ub_e_fit: OriginFit,
    /// `kd·e1(0) + e2(0)`; the gaps are O(T) only when this is zero, otherwise
    /// `d̃(0)` grows like `1/T` and `e` receives an O(1) kick.
    pub peaking_numerator: f64,
}

/// Compares full, reduced and boundary-layer solutions for each `T` in `t_list`.
///
/// `template` must hold auxiliary parameters; its `T` is replaced and its step is
/// capped at `T/20`.
pub fn o_of_t_study(template: &SimConfig, t_list: &[f64]) -> Result<OtStudy> {
    let Controller::Aux(base) = template.controller else {
        return Err(Error::Config("O(T) study needs auxiliary parameters"));
    };
    if t_list.is_empty() || t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::Config("T list must be non-empty and positive"));
    }
    let [e1_0, e2_0] = template.initial_error();
    let mut rows: Vec<OtRow> = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let aux = base.with_time_constant(t);
        let config = SimConfig {
            controller: Controller::Aux(aux),
            dt: template.dt.min(t / STEPS_PER_TIME_CONSTANT),
            ..template.clone()
        };
        let res = run_closed_loop(&config)?;
        let reduced = run_reduced(aux.kp, aux.kd, [res.e1[0], res.e2[0]], &res.times)?;
        let gap_e = res
            .e1
            .iter()
            .zip(&res.e2)
            .zip(&reduced)
            .map(|((a, b), r)| math::hypot(a - r[0], b - r[1]))
            .fold(0.0, f64::max);

        let layer_end = INITIAL_LAYER_WIDTH * t;
        let dt0 = res.dtilde[0];
        let gap_d = res
            .times
            .iter()
            .zip(&res.dtilde)
            .filter(|(tt, _)| **tt >= layer_end)
            .map(|(tt, d)| (d - boundary_layer_at(config.truth.b, dt0, tt / t)).abs())
            .fold(0.0, f64::max);

        let ub_d = assess_ub(&res.times, &res.dtilde, config.tail_fraction).epsilon;
        rows.push(OtRow {
            time_constant: t,
            gap_e,
            gap_d,
            ub_e: res.ultimate_bound.epsilon,
            ub_d,
            ratio_prev: rows.last().map(|p| gap_e / p.gap_e),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.time_constant).collect();
    let col = |f: fn(&OtRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(OtStudy {
        gap_e_fit: fit_through_origin(&ts, &col(|r| r.gap_e)),
        gap_d_fit: fit_through_origin(&ts, &col(|r| r.gap_d)),
        ub_e_fit: fit_through_origin(&ts, &col(|r| r.ub_e)),
        peaking_numerator: base.kd * e1_0 + e2_0,
        rows,
    })
}
