use pidmap_core::analysis::routh_condition;
use pidmap_core::gainmap::forward_map;
use pidmap_core::plant::{SineTerm, ELEVATION_INITIAL};
use pidmap_core::sim::{
    o_of_t_study, peaking_free_state, run_closed_loop, run_sp_form, Controller, SimConfig, INITIAL_LAYER_WIDTH,
};
use pidmap_core::{AuxParams, DisturbanceSignal, PlantParams, PlantState, ReferenceTrajectory};
use proptest::prelude::*;

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn stable(aux: &AuxParams, truth: &PlantParams) -> bool {
    routh_condition(&forward_map(aux).unwrap(), truth).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn three_representations_agree(
        kp in 0.5f64..6.0, kd in 0.5f64..5.0, t in 0.02f64..0.5,
        a1 in -1.0f64..1.0, a2 in -1.0f64..1.0, b in -0.5f64..0.5,
        amp in 0.0f64..1.0, freq in 0.1f64..3.0,
        q0 in -30.0f64..30.0, qdot0 in -5.0f64..5.0, pitch in any::<bool>(),
    ) {
        let aux = AuxParams::new(kp, kd, t);
        let truth = PlantParams::new(a1, a2, b, DisturbanceSignal::cosine(amp, freq));
        prop_assume!(stable(&aux, &truth));
        let traj = if pitch { ReferenceTrajectory::pitch() } else { ReferenceTrajectory::elevation() };
        let cfg = SimConfig {
            t_end: 5.0,
            ..SimConfig::new(truth, Controller::Aux(aux), traj, PlantState::new(q0, qdot0))
        };
        let raw_cfg = SimConfig { controller: Controller::Pid(forward_map(&aux).unwrap()), ..cfg.clone() };
        let dec = run_closed_loop(&cfg).unwrap();
        let raw = run_closed_loop(&raw_cfg).unwrap();
        let sp = run_sp_form(&cfg).unwrap();
        prop_assert!(sup_gap(&dec.e1, &raw.e1) <= 1e-6);
        prop_assert!(sup_gap(&dec.e1, &sp.e1) <= 1e-6);
        prop_assert!(sup_gap(&dec.dtilde, &sp.dtilde) <= 1e-6 * dec.dtilde[0].abs().max(1.0));
    }

    #[test]
    fn constant_reference_and_disturbance_are_rejected(
        kp in 1.0f64..5.0, kd in 1.0f64..5.0,
        a1 in -0.5f64..0.5, a2 in -0.5f64..0.5, b in -0.5f64..0.5,
        w in -1.0f64..1.0, qd in -20.0f64..20.0, q0 in -30.0f64..30.0,
    ) {
        let aux = AuxParams::new(kp, kd, 0.02);
        let truth = PlantParams::new(a1, a2, b, DisturbanceSignal::constant(w));
        prop_assume!(stable(&aux, &truth));
        let cfg = SimConfig::new(truth, Controller::Aux(aux), ReferenceTrajectory::constant(qd), PlantState::new(q0, 0.0));
        let r = run_closed_loop(&cfg).unwrap();
        let tail = r.times.partition_point(|&t| t < 40.0);
        prop_assert!(r.e1[tail..].iter().all(|e| e.abs() <= 1e-3));
        prop_assert!(r.dtilde[tail..].iter().all(|e| e.abs() <= 1e-3));
    }

    #[test]
    fn estimator_peak_scales_inversely_with_t(
        q0 in -30.0f64..-5.0, qdot0 in -1.0f64..1.0, t in 0.02f64..0.2,
    ) {
        let peak = |t: f64| {
            let cfg = SimConfig {
                t_end: 1.0,
                ..SimConfig::new(
                    PlantParams::nominal(DisturbanceSignal::cosine(0.345, 1.0)),
                    Controller::Aux(AuxParams::new(1.0, 2.0, t)),
                    ReferenceTrajectory::elevation(),
                    PlantState::new(q0, qdot0),
                )
            };
            run_closed_loop(&cfg).unwrap().peak_dhat_until(INITIAL_LAYER_WIDTH * t)
        };
        let ratio = peak(t / 2.0) / peak(t);
        prop_assert!((1.7..=2.3).contains(&ratio), "ratio {}", ratio);
    }
}

#[test]
fn gaps_and_bounds_are_first_order_in_t() {
    let traj = ReferenceTrajectory::elevation();
    let template = SimConfig::new(
        PlantParams::nominal(DisturbanceSignal::cosine(0.345, 1.0)),
        Controller::Aux(AuxParams::new(1.0, 2.0, 0.2)),
        traj.clone(),
        peaking_free_state(&traj, 2.0, ELEVATION_INITIAL),
    );
    let study = o_of_t_study(&template, &[0.2, 0.1, 0.05, 0.025]).unwrap();
    assert_eq!(study.peaking_numerator, 0.0);
    for w in study.rows.windows(2) {
        for (prev, next) in [(w[0].gap_e, w[1].gap_e), (w[0].gap_d, w[1].gap_d), (w[0].ub_d, w[1].ub_d)] {
            let r = next / prev;
            assert!((0.35..=0.65).contains(&r), "{r}");
        }
    }
    assert!(study.gap_e_fit.slope > 0.0 && study.gap_d_fit.r_squared >= 0.95);
}

#[test]
fn generic_initial_error_gives_order_one_gap() {
    // kd·e1(0) + e2(0) ≠ 0: d̃(0) ~ 1/T and the error gap does not vanish with T
    let template = SimConfig::new(
        PlantParams::nominal(DisturbanceSignal::cosine(0.345, 1.0)),
        Controller::Aux(AuxParams::new(1.0, 2.0, 0.2)),
        ReferenceTrajectory::elevation(),
        PlantState::new(ELEVATION_INITIAL, 0.0),
    );
    let study = o_of_t_study(&template, &[0.1, 0.05, 0.025]).unwrap();
    assert!(study.peaking_numerator.abs() > 1.0);
    for r in study.rows.iter().filter_map(|r| r.ratio_prev) {
        assert!(r > 0.8, "{r}");
    }
}

#[test]
fn runs_are_bit_identical() {
    let truth = PlantParams::new(
        0.3,
        -0.2,
        0.1,
        DisturbanceSignal::SumOfSinusoids {
            offset: 0.1,
            terms: vec![SineTerm::new(0.5, 1.3, 0.2), SineTerm::cosine(0.2, 0.4)],
        },
    );
    let cfg = SimConfig {
        t_end: 10.0,
        ..SimConfig::new(truth, Controller::Aux(AuxParams::new(6.0, 4.0, 0.05)), ReferenceTrajectory::pitch(), PlantState::new(2.0, 1.0))
    };
    let a = run_closed_loop(&cfg).unwrap();
    let b = run_closed_loop(&cfg).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    for (x, y) in [(&a.e1, &b.e1), (&a.u, &b.u), (&a.dtilde, &b.dtilde), (&a.qi, &b.qi)] {
        assert_eq!(bits(x), bits(y));
    }
    assert_eq!(a.ultimate_bound, b.ultimate_bound);
}
