use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context};
use pidmap_core::analysis::{
    closed_loop_matrix, find_t_bar, is_hurwitz, routh_condition, stable_at, ultimate_bound, StabilityThreshold,
};
use pidmap_core::gainmap::{forward_map, inverse_map, jacobian, Complex};
use pidmap_core::sim::{o_of_t_study, run_closed_loop, OtStudy};
use pidmap_core::{AuxParams, DisturbanceSignal, PidGains, PlantParams};
use serde::Serialize;

use crate::config::{resolve, ExperimentFile};
use crate::output::{series_rows, write_csv, write_json, Summary};
use crate::{presets, AuxArgs, Command, TruthArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_INSTABILITY: u8 = 3;

/// Malformed request: unknown names, unreadable experiment files, conflicting options.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        EXIT_USAGE
    } else if let Some(pidmap_core::Error::InstabilityEscape { .. }) = e.downcast_ref() {
        EXIT_INSTABILITY
    } else {
        EXIT_PRECONDITION
    }
}

impl From<AuxArgs> for AuxParams {
    fn from(a: AuxArgs) -> Self {
        AuxParams::new(a.kp, a.kd, a.t)
    }
}

impl From<TruthArgs> for PlantParams {
    fn from(t: TruthArgs) -> Self {
        PlantParams::new(t.a1, t.a2, t.b, DisturbanceSignal::zero())
    }
}

pub fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Map { aux, json } => map(aux.into(), json),
        Command::Invert { kp, ki, kd, json } => invert(PidGains::new(kp, ki, kd), json),
        Command::Jacobian { aux, json } => jac(aux.into(), json),
        Command::Stability {
            aux,
            truth,
            t_min,
            t_max,
            json,
        } => stability(aux.into(), truth.into(), (t_min, t_max), json),
        Command::LyapunovBound {
            aux,
            truth,
            u_inf,
            theta,
            json,
        } => lyapunov_bound(aux.into(), truth.into(), u_inf, theta, json),
        Command::Simulate {
            list_presets: true, ..
        } => {
            for name in presets::NAMES {
                println!("{name}");
            }
            Ok(())
        }
        Command::Simulate {
            preset,
            config,
            overrides,
            out_csv,
            out_json,
            ..
        } => {
            let file = config.as_deref().map(ExperimentFile::load).transpose()?;
            let spec = resolve(preset.as_deref(), file, overrides, out_csv, out_json)?;
            let result = run_closed_loop(&spec.config)?;
            if let Some(path) = &spec.out_csv {
                write_csv(Some(path), series_rows(&result))?;
            }
            write_json(spec.out_json.as_deref(), &Summary::of(&result))
        }
        Command::Table1 {
            disturbance,
            json,
            out_json,
        } => table1(disturbance, json, out_json),
        Command::SpStudy { t_list, kp, kd, out_csv } => sp_study(&t_list, kp, kd, out_csv),
        Command::SweepT {
            kp,
            kd,
            t_min,
            t_max,
            points,
            truth,
            disturbance,
            t_end,
            out_csv,
        } => sweep_t(kp, kd, (t_min, t_max), points, truth, &disturbance, t_end, out_csv),
    }
}

fn map(aux: AuxParams, json: bool) -> anyhow::Result<()> {
    let g = forward_map(&aux)?;
    if json {
        return write_json(None, &g);
    }
    println!("KP = {}\nKI = {}\nKD = {}", g.kp, g.ki, g.kd);
    Ok(())
}

fn invert(gains: PidGains, json: bool) -> anyhow::Result<()> {
    let inv = inverse_map(&gains)?;
    if json {
        return write_json(None, &inv);
    }
    let [a, b, c, d] = inv.cubic.coefficients;
    println!("gain polynomial: {a}·T³ + ({b})·T² + {c}·T + ({d}), {:?}", inv.cubic.case);
    if inv.candidates.is_empty() {
        println!("no positive root: no decomposition exists");
    }
    for (i, cand) in inv.candidates.iter().enumerate() {
        let verdict = match (cand.kp_admissible, cand.kd_admissible) {
            (true, true) => "admissible",
            (false, _) => "not admissible (kp <= 0)",
            (true, false) => "not admissible (kd <= 0)",
        };
        println!(
            "candidate {}: T = {}, kp = {}, kd = {}, multiplicity {}, {verdict}",
            i + 1,
            cand.aux.time_constant,
            cand.aux.kp,
            cand.aux.kd,
            cand.multiplicity
        );
    }
    Ok(())
}

fn jac(aux: AuxParams, json: bool) -> anyhow::Result<()> {
    let j = jacobian(&aux)?;
    if json {
        return write_json(None, &j);
    }
    println!("{:>4} {:>24} {:>24} {:>24}", "", "d/dkp", "d/dkd", "d/dT");
    for (name, row) in ["KP", "KD", "KI"].iter().zip(j.entries) {
        println!("{name:>4} {:>24} {:>24} {:>24}", row[0], row[1], row[2]);
    }
    Ok(())
}

fn fmt_complex(z: &Complex) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{} {} {}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
    }
}

#[derive(Serialize)]
struct StabilityReport {
    aux: AuxParams,
    gains: PidGains,
    truth: PlantParams,
    characteristic: [f64; 3],
    routh_stable: bool,
    eigen_stable: bool,
    eigenvalues: Vec<Complex>,
    t_range: (f64, f64),
    /// `None` when no tested `T` is stable.
    threshold: Option<StabilityThreshold>,
}

fn stability(aux: AuxParams, truth: PlantParams, range: (f64, f64), json: bool) -> anyhow::Result<()> {
    let gains = forward_map(&aux)?;
    let routh_stable = routh_condition(&gains, &truth)?;
    let m = closed_loop_matrix(&gains, &truth)?;
    let threshold = match find_t_bar(aux.kp, aux.kd, &truth, range) {
        Ok(t) => Some(t),
        Err(pidmap_core::Error::NoStableT { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let report = StabilityReport {
        aux,
        gains,
        truth,
        characteristic: m.characteristic(),
        routh_stable,
        eigen_stable: is_hurwitz(&m),
        eigenvalues: m.eigenvalues(),
        t_range: range,
        threshold,
    };
    if json {
        return write_json(None, &report);
    }
    let [c2, c1, c0] = report.characteristic;
    println!("gains: KP = {}, KI = {}, KD = {}", gains.kp, gains.ki, gains.kd);
    println!("characteristic polynomial: s³ + {c2}·s² + {c1}·s + {c0}");
    println!("routh-hurwitz: {}", if routh_stable { "stable" } else { "unstable" });
    let eig: Vec<String> = report.eigenvalues.iter().map(fmt_complex).collect();
    println!("eigenvalues: {}", eig.join(", "));
    match threshold {
        Some(StabilityThreshold::Unbounded) => {
            println!("stabilising T: all tested T in [{}, {}]", range.0, range.1)
        }
        Some(StabilityThreshold::Finite(t)) => println!("stabilising T: T < {t}"),
        None => println!("stabilising T: none in [{}, {}]", range.0, range.1),
    }
    Ok(())
}

fn lyapunov_bound(aux: AuxParams, truth: PlantParams, u_inf: f64, theta: f64, json: bool) -> anyhow::Result<()> {
    let gains = forward_map(&aux)?;
    let m = closed_loop_matrix(&gains, &truth)?;
    let report = ultimate_bound(&m, u_inf, theta)?;
    if json {
        return write_json(None, &report);
    }
    println!("P =");
    for row in report.p {
        println!("  {:>24} {:>24} {:>24}", row[0], row[1], row[2]);
    }
    println!("lambda_min(P) = {}\nlambda_max(P) = {}", report.lambda_min, report.lambda_max);
    println!("residual ‖PA + AᵀP + I‖_F = {:e}", report.residual);
    println!("ultimate bound (theta = {}, u_inf = {}): {}", theta, u_inf, report.bound);
    Ok(())
}

#[derive(Debug, Serialize)]
struct Table1Row {
    label: &'static str,
    aux: AuxParams,
    gains: PidGains,
    ub_d1: f64,
    ub_d2: f64,
    settled_d1: bool,
    settled_d2: bool,
}

#[derive(Debug, Serialize)]
struct Table1Report {
    disturbance_amplitude: f64,
    rows: Vec<Table1Row>,
    ratio_p1_p3: f64,
    ratio_p2_p3: f64,
    reference_ratio_p1_p3: f64,
    reference_ratio_p2_p3: f64,
    all_settled: bool,
}

fn table1(amplitude: f64, json: bool, out_json: Option<PathBuf>) -> anyhow::Result<()> {
    let mut rows = Vec::new();
    for (label, aux) in presets::TABLE1 {
        let run = |kind| -> anyhow::Result<_> {
            let cfg = presets::elevation(aux, presets::table1_disturbance(kind, amplitude));
            let r = run_closed_loop(&cfg).with_context(|| format!("{label} under d{kind}"))?;
            Ok(r.ultimate_bound)
        };
        let (d1, d2) = (run(1)?, run(2)?);
        rows.push(Table1Row {
            label,
            aux,
            gains: forward_map(&aux)?,
            ub_d1: d1.epsilon,
            ub_d2: d2.epsilon,
            settled_d1: d1.settled,
            settled_d2: d2.settled,
        });
    }
    let report = Table1Report {
        disturbance_amplitude: amplitude,
        ratio_p1_p3: rows[0].ub_d2 / rows[2].ub_d2,
        ratio_p2_p3: rows[1].ub_d2 / rows[2].ub_d2,
        reference_ratio_p1_p3: presets::REFERENCE_RATIOS.0,
        reference_ratio_p2_p3: presets::REFERENCE_RATIOS.1,
        all_settled: rows.iter().all(|r| r.settled_d1 && r.settled_d2),
        rows,
    };
    if out_json.is_some() {
        write_json(out_json.as_deref(), &report)?;
    }
    if json {
        return write_json(None, &report);
    }
    let flag = |s: bool| if s { "" } else { " (unsettled)" };
    println!(
        "{:<4} {:>5} {:>5} {:>5} {:>6} {:>6} {:>6} {:>24} {:>24}",
        "row", "kp", "kd", "T", "KP", "KI", "KD", "UB(d1)", "UB(d2)"
    );
    for r in &report.rows {
        println!(
            "{:<4} {:>5} {:>5} {:>5} {:>6} {:>6} {:>6} {:>24} {:>24}",
            r.label,
            r.aux.kp,
            r.aux.kd,
            r.aux.time_constant,
            r.gains.kp,
            r.gains.ki,
            r.gains.kd,
            format!("{:.6e}{}", r.ub_d1, flag(r.settled_d1)),
            format!("{:.6e}{}", r.ub_d2, flag(r.settled_d2)),
        );
    }
    println!(
        "UB(P1)/UB(P3) under d2: {:.4} (reference {:.4})",
        report.ratio_p1_p3, report.reference_ratio_p1_p3
    );
    println!(
        "UB(P2)/UB(P3) under d2: {:.4} (reference {:.4})",
        report.ratio_p2_p3, report.reference_ratio_p2_p3
    );
    Ok(())
}

#[derive(Serialize)]
struct StudyRow {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "gapE")]
    gap_e: f64,
    #[serde(rename = "gapD")]
    gap_d: f64,
    #[serde(rename = "ubE")]
    ub_e: f64,
    #[serde(rename = "ubD")]
    ub_d: f64,
    ratio_prev: Option<f64>,
}

fn sp_study(t_list: &[f64], kp: f64, kd: f64, out_csv: Option<PathBuf>) -> anyhow::Result<()> {
    if t_list.is_empty() {
        bail!(UsageError("--T-list is empty".into()));
    }
    if t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) || t_list.windows(2).any(|w| w[1] >= w[0]) {
        bail!(pidmap_core::Error::Config("T list must be positive and strictly decreasing"));
    }
    let template = presets::sp_study(kp, kd, t_list[0]);
    for &t in t_list {
        if !stable_at(kp, kd, t, &template.truth)? {
            bail!("closed loop is unstable at T = {t}");
        }
    }
    let study: OtStudy = o_of_t_study(&template, t_list)?;
    write_csv(
        out_csv.as_deref(),
        study.rows.iter().map(|r| StudyRow {
            t: r.time_constant,
            gap_e: r.gap_e,
            gap_d: r.gap_d,
            ub_e: r.ub_e,
            ub_d: r.ub_d,
            ratio_prev: r.ratio_prev,
        }),
    )?;
    for (name, fit) in [("gapE", study.gap_e_fit), ("gapD", study.gap_d_fit), ("ubE", study.ub_e_fit)] {
        eprintln!(
            "{name} = k·T: k = {}, R² = {:.4} (centred {:.4})",
            fit.slope, fit.r_squared, fit.r_squared_centered
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "KP")]
    kp: f64,
    #[serde(rename = "KI")]
    ki: f64,
    #[serde(rename = "KD")]
    kd: f64,
    stable: bool,
    ultimate_bound: f64,
    settling_time: f64,
    max_control: f64,
    max_dhat: f64,
    settled: bool,
}

#[allow(clippy::too_many_arguments)]
fn sweep_t(
    kp: f64,
    kd: f64,
    (t_min, t_max): (f64, f64),
    points: usize,
    truth: TruthArgs,
    disturbance: &str,
    t_end: f64,
    out_csv: Option<PathBuf>,
) -> anyhow::Result<()> {
    if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) || points == 0 {
        bail!(pidmap_core::Error::Config("sweep needs 0 < T-min <= T-max and at least one point"));
    }
    let w = DisturbanceSignal::preset(disturbance)
        .ok_or_else(|| UsageError(format!("unknown disturbance preset {disturbance:?}")))?;
    let ts: Vec<f64> = (0..points)
        .map(|k| match points {
            1 => t_min,
            _ => t_min * (t_max / t_min).powf(k as f64 / (points - 1) as f64),
        })
        .collect();
    let runs = std::thread::scope(|s| {
        let handles: Vec<_> = ts
            .iter()
            .map(|&t| {
                let w = w.clone();
                s.spawn(move || -> anyhow::Result<SweepRow> {
                    let aux = AuxParams::new(kp, kd, t);
                    let gains = forward_map(&aux)?;
                    let mut cfg = presets::elevation(aux, w);
                    cfg.truth = PlantParams { w: cfg.truth.w, ..truth.into() };
                    cfg.t_end = t_end;
                    let stable = routh_condition(&gains, &cfg.truth)?;
                    let summary = match stable.then(|| run_closed_loop(&cfg)) {
                        Some(Ok(r)) => Some(Summary::of(&r)),
                        Some(Err(pidmap_core::Error::InstabilityEscape { .. })) | None => None,
                        Some(Err(e)) => return Err(e.into()),
                    };
                    let nan = f64::NAN;
                    Ok(SweepRow {
                        t,
                        kp: gains.kp,
                        ki: gains.ki,
                        kd: gains.kd,
                        stable,
                        ultimate_bound: summary.map_or(nan, |s| s.ultimate_bound),
                        settling_time: summary.map_or(nan, |s| s.settling_time),
                        max_control: summary.map_or(nan, |s| s.max_control),
                        max_dhat: summary.map_or(nan, |s| s.max_dhat),
                        settled: summary.is_some_and(|s| s.settled),
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect::<Vec<_>>()
    });
    let rows = runs.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    write_csv(out_csv.as_deref(), rows)
}
