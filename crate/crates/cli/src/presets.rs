//! Named experiments for the helicopter elevation channel.

use pidmap_core::plant::ELEVATION_INITIAL;
use pidmap_core::sim::{peaking_free_state, Controller, SimConfig};
use pidmap_core::{AuxParams, DisturbanceSignal, PlantParams, PlantState, ReferenceTrajectory};

/// Tuning rows of the P1–P3 comparison.
pub const TABLE1: [(&str, AuxParams); 3] = [
    ("P1", AuxParams::new(1.0, 2.0, 0.1)),
    ("P2", AuxParams::new(6.0, 4.0, 0.4)),
    ("P3", AuxParams::new(1.0, 2.0, 0.4)),
];

/// Reference ε(P1)/ε(P3) and ε(P2)/ε(P3).
pub const REFERENCE_RATIOS: (f64, f64) = (0.95 / 3.55, 1.11 / 3.55);

pub const NAMES: [&str; 8] = [
    "table1-P1-d1",
    "table1-P1-d2",
    "table1-P2-d1",
    "table1-P2-d2",
    "table1-P3-d1",
    "table1-P3-d2",
    "zero",
    "sp-study",
];

/// Elevation tracking from rest at the initial angle, exact feedback linearisation.
pub fn elevation(aux: AuxParams, w: DisturbanceSignal) -> SimConfig {
    SimConfig::new(
        PlantParams::nominal(w),
        Controller::Aux(aux),
        ReferenceTrajectory::elevation(),
        PlantState::new(ELEVATION_INITIAL, 0.0),
    )
}

/// `d1` (constant) or `d2` (cosine) with the given amplitude.
pub fn table1_disturbance(kind: u8, amplitude: f64) -> DisturbanceSignal {
    if kind == 1 {
        DisturbanceSignal::constant(amplitude)
    } else {
        DisturbanceSignal::cosine(amplitude, 1.0)
    }
}

/// Elevation experiment under `d2` started with `kd·e1(0) + e2(0) = 0`.
pub fn sp_study(kp: f64, kd: f64, time_constant: f64) -> SimConfig {
    let traj = ReferenceTrajectory::elevation();
    let state = peaking_free_state(&traj, kd, ELEVATION_INITIAL);
    SimConfig::new(
        PlantParams::nominal(DisturbanceSignal::preset("d2-elevation").expect("built-in preset")),
        Controller::Aux(AuxParams::new(kp, kd, time_constant)),
        traj,
        state,
    )
}

pub fn experiment(name: &str) -> Option<SimConfig> {
    if let Some(rest) = name.strip_prefix("table1-") {
        let (row, dist) = rest.split_once('-')?;
        let (_, aux) = TABLE1.iter().find(|(label, _)| *label == row)?;
        let kind = match dist {
            "d1" => 1,
            "d2" => 2,
            _ => return None,
        };
        return Some(elevation(*aux, table1_disturbance(kind, pidmap_core::plant::ELEVATION_DISTURBANCE)));
    }
    match name {
        "zero" => Some(SimConfig::new(
            PlantParams::default(),
            Controller::Aux(AuxParams::new(1.0, 2.0, 0.1)),
            ReferenceTrajectory::constant(0.0),
            PlantState::default(),
        )),
        "sp-study" => Some(sp_study(1.0, 2.0, 0.1)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in NAMES {
            let cfg = experiment(name).unwrap();
            cfg.validate().unwrap();
        }
        assert!(experiment("table1-P4-d1").is_none());
        assert!(experiment("table1-P1-d3").is_none());
        assert!(experiment("nope").is_none());
    }
}
