//! Forward and inverse gain mapping between PID gains `(KP, KI, KD)` and the
//! auxiliary triple `(kp, kd, T)`.
//!
//! The inverse goes through the cubic `KI·T³ − KP·T² + KD·T − 1 = 0`, solved in
//! closed form by [`solve_cubic`].

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;

/// Classical PID gains.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PidGains {
    #[cfg_attr(feature = "serde", serde(rename = "KP"))]
    pub kp: f64,
    #[cfg_attr(feature = "serde", serde(rename = "KI"))]
    pub ki: f64,
    #[cfg_attr(feature = "serde", serde(rename = "KD"))]
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    pub fn is_finite(&self) -> bool {
        self.kp.is_finite() && self.ki.is_finite() && self.kd.is_finite()
    }
}

/// Auxiliary parameters: nominal PD pair `(kp, kd)` and estimator time constant `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuxParams {
    pub kp: f64,
    pub kd: f64,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub time_constant: f64,
}

impl AuxParams {
    pub const fn new(kp: f64, kd: f64, time_constant: f64) -> Self {
        Self {
            kp,
            kd,
            time_constant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.kp) && ok(self.kd) && ok(self.time_constant) {
            Ok(())
        } else {
            Err(Error::AuxDomain {
                kp: self.kp,
                kd: self.kd,
                time_constant: self.time_constant,
            })
        }
    }

    /// Same `(kp, kd)` with a different time constant.
    pub fn with_time_constant(&self, time_constant: f64) -> Self {
        Self {
            time_constant,
            ..*self
        }
    }
}

/// `KP = kp + kd/T`, `KD = kd + 1/T`, `KI = kp/T`.
pub fn forward_map(aux: &AuxParams) -> Result<PidGains> {
    aux.validate()?;
    let t = aux.time_constant;
    Ok(PidGains {
        kp: aux.kp + aux.kd / t,
        ki: aux.kp / t,
        kd: aux.kd + 1.0 / t,
    })
}

/// Partial derivatives `∂(KP, KD, KI) / ∂(kp, kd, T)`.
///
/// Row order is `KP, KD, KI`; column order is `kp, kd, T`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GainJacobian {
    pub entries: [[f64; 3]; 3],
}

impl GainJacobian {
    /// `(∂KP/∂T, ∂KD/∂T, ∂KI/∂T)`, all strictly negative on the domain.
    pub fn wrt_time_constant(&self) -> [f64; 3] {
        [self.entries[0][2], self.entries[1][2], self.entries[2][2]]
    }
}

pub fn jacobian(aux: &AuxParams) -> Result<GainJacobian> {
    aux.validate()?;
    let t = aux.time_constant;
    let t2 = t * t;
    Ok(GainJacobian {
        entries: [
            [1.0, 1.0 / t, -aux.kd / t2],
            [0.0, 1.0, -1.0 / t2],
            [1.0 / t, 0.0, -aux.kp / t2],
        ],
    })
}

/// Relative threshold on `|D|` below which the cubic is treated as having a repeated root.
pub const REPEATED_ROOT_TOL: f64 = 1e-12;

const NEWTON_POLISH_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        math::hypot(self.re, self.im)
    }
}

/// Sign of the discriminant `D = (p/3)³ + (q/2)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CubicCase {
    /// `D > 0`: one real root and a complex-conjugate pair.
    OneReal,
    /// `D < 0`: three distinct real roots.
    ThreeReal,
    /// `D = 0`: a repeated real root (triple when `p = q = 0`).
    Repeated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubicSolution {
    /// `(a, b, c, d)` of `a·x³ + b·x² + c·x + d`.
    pub coefficients: [f64; 4],
    /// Depressed-cubic coefficients of `y³ + p·y + q` with `x = y − b/(3a)`.
    pub p: f64,
    pub q: f64,
    pub discriminant: f64,
    pub case: CubicCase,
    /// Distinct real roots in ascending order.
    pub real_roots: Vec<RealRoot>,
    /// Upper member `re + i·im` (`im > 0`) of the complex pair, when `case == OneReal`.
    pub complex_pair: Option<Complex>,
}

impl CubicSolution {
    /// All three roots counted with multiplicity; complex pair last.
    pub fn roots(&self) -> Vec<Complex> {
        let mut out = Vec::with_capacity(3);
        for r in &self.real_roots {
            for _ in 0..r.multiplicity {
                out.push(Complex::real(r.value));
            }
        }
        if let Some(z) = self.complex_pair {
            out.push(z);
            out.push(Complex::new(z.re, -z.im));
        }
        out
    }

    /// Largest real part over all three roots.
    pub fn max_real_part(&self) -> f64 {
        let real = self
            .real_roots
            .iter()
            .map(|r| r.value)
            .fold(f64::NEG_INFINITY, f64::max);
        match self.complex_pair {
            Some(z) => real.max(z.re),
            None => real,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.coefficients;
        horner(a, b, c, d, x)
    }

    /// `|f(x)| / (max|coeff| · max(1, |x|)³)`.
    pub fn scaled_residual(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.coefficients;
        let cmax = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
        let s = x.abs().max(1.0);
        horner(a, b, c, d, x).abs() / (cmax * s * s * s)
    }
}

#[inline]
fn horner(a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
    ((a * x + b) * x + c) * x + d
}

fn polish(a: f64, b: f64, c: f64, d: f64, mut x: f64) -> f64 {
    for _ in 0..NEWTON_POLISH_STEPS {
        let f = horner(a, b, c, d, x);
        let df = (3.0 * a * x + 2.0 * b) * x + c;
        if f == 0.0 || df == 0.0 || !df.is_finite() {
            break;
        }
        let next = x - f / df;
        if next.is_finite() && horner(a, b, c, d, next).abs() < f.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Roots of `a·x³ + b·x² + c·x + d = 0`.
///
/// Reduces to the depressed cubic `y³ + p·y + q`, classifies by the sign of
/// `D = (p/3)³ + (q/2)²` and extracts roots with Cardano's radicals (`D > 0`), the
/// trigonometric form (`D < 0`) or the repeated-root closed form (`D = 0`). Each real
/// root is then refined with Newton steps on the original polynomial.
///
/// `D` counts as zero when `|D| ≤ 1e-12 · max(|p/3|³, (q/2)²)`.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> Result<CubicSolution> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
        return Err(Error::Config("non-finite cubic coefficient"));
    }
    if a == 0.0 {
        return Err(Error::DegenerateCubic);
    }

    let (bn, cn, dn) = (b / a, c / a, d / a);
    let shift = -bn / 3.0;
    let p = cn - bn * bn / 3.0;
    let q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;
    let p3 = p / 3.0;
    let q2 = q / 2.0;
    let disc = p3 * p3 * p3 + q2 * q2;
    let scale = (p3 * p3 * p3).abs().max(q2 * q2);

    let case = if disc.abs() <= REPEATED_ROOT_TOL * scale {
        CubicCase::Repeated
    } else if disc > 0.0 {
        CubicCase::OneReal
    } else {
        CubicCase::ThreeReal
    };

    let mut real_roots = Vec::with_capacity(3);
    let mut complex_pair = None;
    let root = |y: f64, multiplicity: u8| RealRoot {
        value: polish(a, b, c, d, y + shift),
        multiplicity,
    };

    match case {
        CubicCase::Repeated => {
            let p_scale = (bn * bn / 3.0).max(cn.abs());
            if p.abs() <= 1e-10 * p_scale || p == 0.0 {
                real_roots.push(RealRoot {
                    value: shift,
                    multiplicity: 3,
                });
            } else {
                real_roots.push(root(3.0 * q / p, 1));
                real_roots.push(root(-1.5 * q / p, 2));
            }
        }
        CubicCase::OneReal => {
            // Pick the radical branch that avoids cancellation.
            let s = math::sqrt(disc);
            let u = -math::cbrt(q2 + s.copysign(q2));
            let v = if u != 0.0 { -p3 / u } else { 0.0 };
            real_roots.push(root(u + v, 1));
            complex_pair = Some(Complex::new(
                shift - 0.5 * (u + v),
                0.5 * math::sqrt(3.0) * (u - v).abs(),
            ));
        }
        CubicCase::ThreeReal => {
            let m = 2.0 * math::sqrt(-p3);
            let arg = (3.0 * q / (2.0 * p) * math::sqrt(-3.0 / p)).clamp(-1.0, 1.0);
            let phi = math::acos(arg) / 3.0;
            for k in 0..3 {
                real_roots.push(root(m * math::cos(phi - 2.0 * PI * k as f64 / 3.0), 1));
            }
        }
    }
    real_roots.sort_by(|x, y| x.value.total_cmp(&y.value));

    Ok(CubicSolution {
        coefficients: [a, b, c, d],
        p,
        q,
        discriminant: disc,
        case,
        real_roots,
        complex_pair,
    })
}

/// One `(kp, kd, T)` triple reproducing a given set of PID gains.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InverseCandidate {
    pub aux: AuxParams,
    /// Multiplicity of `T` as a root of the gain polynomial.
    pub multiplicity: u8,
    pub kp_admissible: bool,
    pub kd_admissible: bool,
}

impl InverseCandidate {
    pub fn is_admissible(&self) -> bool {
        self.kp_admissible && self.kd_admissible
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InverseResult {
    pub gains: PidGains,
    pub cubic: CubicSolution,
    /// One entry per distinct positive real root `T`, ascending in `T`.
    pub candidates: Vec<InverseCandidate>,
}

impl InverseResult {
    pub fn admissible(&self) -> impl Iterator<Item = &InverseCandidate> + '_ {
        self.candidates.iter().filter(|c| c.is_admissible())
    }
}

/// All `(kp, kd, T)` with `T > 0` that [`forward_map`] sends to `gains`.
///
/// Every positive root of `KI·T³ − KP·T² + KD·T − 1` yields `kp = KI·T` and
/// `kd = KD − 1/T`. Candidates with `kd ≤ 0` are returned but flagged.
pub fn inverse_map(gains: &PidGains) -> Result<InverseResult> {
    if !gains.is_finite() {
        return Err(Error::Config("non-finite PID gains"));
    }
    if gains.ki <= 0.0 {
        return Err(Error::NonPositiveIntegralGain { ki: gains.ki });
    }
    let cubic = solve_cubic(gains.ki, -gains.kp, gains.kd, -1.0)?;
    let candidates = cubic
        .real_roots
        .iter()
        .filter(|r| r.value > 0.0)
        .map(|r| {
            let t = r.value;
            let aux = AuxParams::new(gains.ki * t, gains.kd - 1.0 / t, t);
            InverseCandidate {
                aux,
                multiplicity: r.multiplicity,
                kp_admissible: aux.kp > 0.0,
                kd_admissible: aux.kd > 0.0,
            }
        })
        .collect();
    Ok(InverseResult {
        gains: *gains,
        cubic,
        candidates,
    })
}
