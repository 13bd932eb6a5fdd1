//! Stability and steady-state analysis of the closed loop.
//!
//! With `qI = ∫ e1` the error dynamics are the third-order companion system
//! `ẋ = A·x + B·v` on `x = (qI, e1, e2)` where
//!
//! ```text
//!     | 0          1                0           |        | 0 |
//! A = | 0          0                1           |,   B = | 0 |
//!     | −(1+b)KI   a1 − (1+b)KP     a2 − (1+b)KD |        | 1 |
//! ```
//!
//! and `v = −a1·qd − a2·q̇d − b·q̈d − w` collects the exogenous terms.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gainmap::{forward_map, solve_cubic, AuxParams, Complex, PidGains};
use crate::math;
use crate::plant::PlantParams;

/// Midpoint of the admissible `θ ∈ (0, 1)` of the ultimate-bound formula.
pub const DEFAULT_THETA: f64 = 0.5;

/// Default `T` search range for [`find_t_bar`].
pub const DEFAULT_T_RANGE: (f64, f64) = (1e-4, 1e3);

/// Relative bracket width at which [`find_t_bar`] stops bisecting.
pub const T_BAR_REL_WIDTH: f64 = 1e-4;

const T_BAR_GRID_POINTS: usize = 241;

/// Companion-form closed-loop matrix and its input column.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClosedLoopMatrix {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
}

impl ClosedLoopMatrix {
    /// Matrix whose characteristic polynomial is `λ³ + c2·λ² + c1·λ + c0`.
    pub fn companion(c2: f64, c1: f64, c0: f64) -> Self {
        Self {
            a: [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-c0, -c1, -c2]],
            b: [0.0, 0.0, 1.0],
        }
    }

    /// `(c2, c1, c0)` of the characteristic polynomial.
    pub fn characteristic(&self) -> [f64; 3] {
        [-self.a[2][2], -self.a[2][1], -self.a[2][0]]
    }

    /// Coefficient test: `c2 > 0`, `c0 > 0`, `c1·c2 > c0`.
    pub fn routh_hurwitz(&self) -> bool {
        let [c2, c1, c0] = self.characteristic();
        c2 > 0.0 && c0 > 0.0 && c1 * c2 > c0
    }

    /// Eigenvalues from the characteristic cubic.
    pub fn eigenvalues(&self) -> Vec<Complex> {
        let [c2, c1, c0] = self.characteristic();
        solve_cubic(1.0, c2, c1, c0)
            .expect("monic cubic is never degenerate")
            .roots()
    }
}

fn checked_truth(truth: &PlantParams) -> Result<()> {
    if !(truth.b.is_finite() && truth.b > -1.0 && truth.b < 1.0) {
        return Err(Error::InputCoefficient { b: truth.b });
    }
    if !(truth.a1.is_finite() && truth.a2.is_finite()) {
        return Err(Error::Config("plant coefficients must be finite"));
    }
    Ok(())
}

/// Necessary and sufficient gain inequalities for exponential stability:
/// `KP > a1/(1+b)`, `KD > a2/(1+b)` and `0 < KI < (KP − a1/(1+b))·((1+b)·KD − a2)`.
pub fn routh_condition(gains: &PidGains, truth: &PlantParams) -> Result<bool> {
    checked_truth(truth)?;
    let g = truth.input_gain();
    let kp_min = truth.a1 / g;
    Ok(gains.kp > kp_min
        && gains.kd > truth.a2 / g
        && gains.ki > 0.0
        && gains.ki < (gains.kp - kp_min) * (g * gains.kd - truth.a2))
}

pub fn closed_loop_matrix(gains: &PidGains, truth: &PlantParams) -> Result<ClosedLoopMatrix> {
    checked_truth(truth)?;
    let g = truth.input_gain();
    Ok(ClosedLoopMatrix {
        a: [
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [-g * gains.ki, truth.a1 - g * gains.kp, truth.a2 - g * gains.kd],
        ],
        b: [0.0, 0.0, 1.0],
    })
}

/// Hurwitz verdict from the eigenvalues (largest real part strictly negative).
///
/// Agrees with [`ClosedLoopMatrix::routh_hurwitz`] away from the stability boundary.
pub fn is_hurwitz(matrix: &ClosedLoopMatrix) -> bool {
    let [c2, c1, c0] = matrix.characteristic();
    match solve_cubic(1.0, c2, c1, c0) {
        Ok(s) => s.max_real_part() < 0.0,
        Err(_) => false,
    }
}

/// Characteristic-polynomial Hurwitz test for a general `N×N` matrix, `N ≤ 3`.
fn general_hurwitz<const N: usize>(a: &[[f64; N]; N]) -> bool {
    match N {
        1 => a[0][0] < 0.0,
        2 => {
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            tr < 0.0 && det > 0.0
        }
        3 => {
            let tr = a[0][0] + a[1][1] + a[2][2];
            let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2]
                - a[0][2] * a[2][0]
                + a[1][1] * a[2][2]
                - a[1][2] * a[2][1];
            let det = det3(a);
            let (c2, c1, c0) = (-tr, minors, -det);
            c2 > 0.0 && c0 > 0.0 && c1 * c2 > c0
        }
        _ => false,
    }
}

fn det3<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Solves `P·A + Aᵀ·P = −I` for symmetric `P`, `N ∈ {1, 2, 3}`.
///
/// The `N(N+1)/2` distinct entries of `P` are found from a dense linear system.
/// Fails with [`Error::NotHurwitz`] when `A` is not Hurwitz or `P` comes out
/// indefinite.
#[allow(clippy::needless_range_loop)]
pub fn solve_lyapunov<const N: usize>(a: &[[f64; N]; N]) -> Result<[[f64; N]; N]> {
    if !(1..=3).contains(&N) {
        return Err(Error::Config("Lyapunov solver supports 1x1 to 3x3 matrices"));
    }
    if a.iter().flatten().any(|x| !x.is_finite()) || !general_hurwitz(a) {
        return Err(Error::NotHurwitz);
    }

    // Unknown k ↔ (i, j) with i ≤ j.
    let mut index = [[0usize; N]; N];
    let mut pairs = [(0usize, 0usize); 6];
    let mut m = 0;
    for i in 0..N {
        for j in i..N {
            index[i][j] = m;
            index[j][i] = m;
            pairs[m] = (i, j);
            m += 1;
        }
    }

    let mut sys = [[0.0f64; 7]; 6];
    for (row, &(i, j)) in pairs[..m].iter().enumerate() {
        // (P·A)_ij + (Aᵀ·P)_ij = Σ_k P_ik·A_kj + Σ_k A_ki·P_kj
        for k in 0..N {
            sys[row][index[i][k]] += a[k][j];
            sys[row][index[k][j]] += a[k][i];
        }
        sys[row][6] = if i == j { -1.0 } else { 0.0 };
    }

    let x = gauss_solve(&mut sys, m).ok_or(Error::NotHurwitz)?;
    let mut p = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            p[i][j] = x[index[i][j]];
        }
    }
    let (lo, _) = symmetric_eigen_extremes(&p);
    if lo > 0.0 {
        Ok(p)
    } else {
        Err(Error::NotHurwitz)
    }
}

/// Gaussian elimination with partial pivoting on the leading `m` rows of an
/// augmented system (rhs in column 6).
#[allow(clippy::needless_range_loop)]
fn gauss_solve(sys: &mut [[f64; 7]; 6], m: usize) -> Option<[f64; 6]> {
    let scale = sys[..m]
        .iter()
        .flat_map(|r| r[..m].iter())
        .fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..m {
        let piv = (col..m).max_by(|&r, &s| sys[r][col].abs().total_cmp(&sys[s][col].abs()))?;
        if sys[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        sys.swap(col, piv);
        for r in col + 1..m {
            let f = sys[r][col] / sys[col][col];
            if f != 0.0 {
                for c in col..m {
                    sys[r][c] -= f * sys[col][c];
                }
                sys[r][6] -= f * sys[col][6];
            }
        }
    }
    let mut x = [0.0; 6];
    for r in (0..m).rev() {
        let mut acc = sys[r][6];
        for c in r + 1..m {
            acc -= sys[r][c] * x[c];
        }
        x[r] = acc / sys[r][r];
    }
    Some(x)
}

/// `(λmin, λmax)` of a symmetric matrix with `N ≤ 3`.
pub fn symmetric_eigen_extremes<const N: usize>(p: &[[f64; N]; N]) -> (f64, f64) {
    match N {
        1 => (p[0][0], p[0][0]),
        2 => {
            let mean = 0.5 * (p[0][0] + p[1][1]);
            let r = math::hypot(0.5 * (p[0][0] - p[1][1]), p[0][1]);
            (mean - r, mean + r)
        }
        3 => {
            // Characteristic cubic; all roots are real up to rounding.
            let tr = p[0][0] + p[1][1] + p[2][2];
            let minors = p[0][0] * p[1][1] - p[0][1] * p[1][0] + p[0][0] * p[2][2]
                - p[0][2] * p[2][0]
                + p[1][1] * p[2][2]
                - p[1][2] * p[2][1];
            let roots = solve_cubic(1.0, -tr, minors, -det3(p))
                .map(|s| s.roots())
                .unwrap_or_default();
            roots.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
                (lo.min(z.re), hi.max(z.re))
            })
        }
        _ => (f64::NAN, f64::NAN),
    }
}

/// Frobenius norm of `P·A + Aᵀ·P + I`.
pub fn lyapunov_residual<const N: usize>(a: &[[f64; N]; N], p: &[[f64; N]; N]) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        for j in 0..N {
            let mut r = if i == j { 1.0 } else { 0.0 };
            for k in 0..N {
                r += p[i][k] * a[k][j] + a[k][i] * p[k][j];
            }
            sum += r * r;
        }
    }
    math::sqrt(sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UltimateBoundReport {
    /// Solution of `P·A + Aᵀ·P = −I`.
    pub p: [[f64; 3]; 3],
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub theta: f64,
    /// Sup-norm of the disturbance input.
    pub u_inf: f64,
    pub b_norm: f64,
    pub residual: f64,
    pub bound: f64,
}

/// Ultimate bound of the state of `ẋ = A·x + B·v` with `|v| ≤ u_inf`:
///
/// ```text
/// ‖x‖₂ ≤ (2·‖B‖₂·u_inf / θ) · sqrt(λmax(P)³ / λmin(P))
/// ```
pub fn ultimate_bound(matrix: &ClosedLoopMatrix, u_inf: f64, theta: f64) -> Result<UltimateBoundReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Theta { theta });
    }
    if !(u_inf.is_finite() && u_inf >= 0.0) {
        return Err(Error::Config("disturbance sup-norm must be finite and non-negative"));
    }
    let p = solve_lyapunov(&matrix.a)?;
    let (lambda_min, lambda_max) = symmetric_eigen_extremes(&p);
    let b_norm = math::sqrt(matrix.b.iter().map(|x| x * x).sum());
    let bound = 2.0 * b_norm * u_inf / theta * math::sqrt(lambda_max * lambda_max * lambda_max / lambda_min);
    Ok(UltimateBoundReport {
        p,
        lambda_max,
        lambda_min,
        theta,
        u_inf,
        b_norm,
        residual: lyapunov_residual(&matrix.a, &p),
        bound,
    })
}

/// Upper end of the stable `T` interval found by [`find_t_bar`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StabilityThreshold {
    /// Stable at every tested `T` in the range.
    Unbounded,
    Finite(f64),
}

impl StabilityThreshold {
    /// `+∞` for [`StabilityThreshold::Unbounded`].
    pub fn value(&self) -> f64 {
        match self {
            Self::Unbounded => f64::INFINITY,
            Self::Finite(t) => *t,
        }
    }
}

/// Whether the loop closed with `forward_map(kp, kd, T)` is Hurwitz for the given truth.
pub fn stable_at(kp: f64, kd: f64, time_constant: f64, truth: &PlantParams) -> Result<bool> {
    let gains = forward_map(&AuxParams::new(kp, kd, time_constant))?;
    Ok(is_hurwitz(&closed_loop_matrix(&gains, truth)?))
}

/// Largest `T` in `range` such that the loop is Hurwitz at every tested `T' ≤ T`.
///
/// Scans a log-spaced grid upward from `range.0` and bisects the first
/// stable/unstable bracket to [`T_BAR_REL_WIDTH`]. This is the exact linear
/// stability threshold for the given truth, which is at least as large as any
/// threshold derived from time-scale separation arguments.
pub fn find_t_bar(kp: f64, kd: f64, truth: &PlantParams, range: (f64, f64)) -> Result<StabilityThreshold> {
    AuxParams::new(kp, kd, 1.0).validate()?;
    checked_truth(truth)?;
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Config("T search range must satisfy 0 < lo < hi < inf"));
    }
    if !stable_at(kp, kd, lo, truth)? {
        return Err(Error::NoStableT { lo, hi });
    }

    let log_span = math::ln(hi / lo);
    let grid = |k: usize| lo * math::exp(log_span * k as f64 / (T_BAR_GRID_POINTS - 1) as f64);
    let mut stable_t = lo;
    for k in 1..T_BAR_GRID_POINTS {
        let t = if k == T_BAR_GRID_POINTS - 1 { hi } else { grid(k) };
        if stable_at(kp, kd, t, truth)? {
            stable_t = t;
            continue;
        }
        let (mut a, mut b) = (stable_t, t);
        while (b - a) > T_BAR_REL_WIDTH * a {
            let mid = 0.5 * (a + b);
            if stable_at(kp, kd, mid, truth)? {
                a = mid;
            } else {
                b = mid;
            }
        }
        return Ok(StabilityThreshold::Finite(a));
    }
    Ok(StabilityThreshold::Unbounded)
}
