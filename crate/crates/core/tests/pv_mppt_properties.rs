use proptest::prelude::*;

use solarpump::mppt::{ic_step, mppt_run, po_step, Algorithm, MpptState, PoVariant};
use solarpump::pv::{
    array_current, array_residual_at, cell_current, default_array, find_mpp, iv_curve,
    open_circuit_voltage, voltage_grid, PvArrayParams, PvReference,
};

fn array(irradiance: f64, t_c: f64, n_s: u32, n_p: u32) -> PvArrayParams {
    PvArrayParams {
        n_s,
        n_p,
        ..default_array(irradiance, t_c)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn current_non_increasing_and_residual_small(
        g in 50.0..1200.0f64,
        t in 260.0..350.0f64,
        n_s in 1u32..80,
        n_p in 1u32..4,
    ) {
        let ap = array(g, t, n_s, n_p);
        let curve = iv_curve(&ap, &voltage_grid(&ap, 120).unwrap()).unwrap();
        for w in curve.currents.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for k in 0..curve.voltages.len() {
            prop_assert!(array_residual_at(&ap, curve.voltages[k], curve.currents[k]) < 1e-9);
            prop_assert_eq!(curve.powers[k], curve.voltages[k] * curve.currents[k]);
        }
    }

    #[test]
    fn mpp_matches_scan(g in 100.0..1200.0f64, t in 270.0..340.0f64) {
        let ap = default_array(g, t);
        let mpp = find_mpp(&ap).unwrap();
        let voc = open_circuit_voltage(&ap).unwrap();
        let n = 20_000;
        let (mut best_v, mut best_p) = (0.0, f64::MIN);
        for k in 0..=n {
            let v = voc * k as f64 / n as f64;
            let p = v * array_current(&ap, v).unwrap();
            if p > best_p {
                (best_v, best_p) = (v, p);
            }
        }
        prop_assert!((mpp.v - best_v).abs() <= voc / n as f64 + 1e-3, "{} vs {}", mpp.v, best_v);
        prop_assert!(mpp.p >= best_p - 1e-9);
    }

    #[test]
    fn photocurrent_scales_short_circuit(lambda in 0.05..3.0f64) {
        let reference = PvReference { r_s: 0.0, ..PvReference::default() };
        let base = reference.cell_at(1000.0, 298.0);
        let scaled = solarpump::pv::PvCellParams { i_ph: base.i_ph * lambda, ..base };
        let i0 = cell_current(&base, 0.0).unwrap();
        let i1 = cell_current(&scaled, 0.0).unwrap();
        prop_assert!((i1 / i0 - lambda).abs() <= 1e-6 * lambda);
    }

    #[test]
    fn laws_move_at_most_one_step(
        v0 in 1.0..50.0f64,
        dv in 0.05..2.0f64,
        samples in prop::collection::vec((0.0..60.0f64, 0.0..10.0f64), 1..40),
        ic in any::<bool>(),
    ) {
        let mut st = MpptState::new(v0, dv).unwrap();
        for (v, i) in samples {
            let next = if ic { ic_step(&st, v, i) } else { po_step(&st, v, i, PoVariant::Standard) };
            let moved = (next.v_ref - st.v_ref).abs();
            prop_assert!(moved == 0.0 || (moved - dv).abs() < 1e-9);
            prop_assert_eq!(next.iteration, st.iteration + 1);
            st = next;
        }
    }

    #[test]
    fn po_limit_cycle_stays_near_peak(v_peak in 8.0..40.0f64, v0 in 2.0..60.0f64, dv in 0.1..1.0f64) {
        let source = move |v: f64| (500.0 - (v - v_peak).powi(2)) / v;
        let run = mppt_run(&source, Algorithm::PerturbObserve(PoVariant::Standard), MpptState::new(v0, dv).unwrap(), 1000).unwrap();
        let first = run.trajectory.iter().position(|s| (s.v_ref - v_peak).abs() <= dv);
        prop_assert!(first.is_some());
        for s in &run.trajectory[first.unwrap()..] {
            prop_assert!((s.v_ref - v_peak).abs() <= 2.0 * dv + 1e-9);
        }
    }
}

#[test]
fn ic_holds_at_the_peak() {
    // P = V(10 − V/2) peaks at V = 10 with I = 5, so dI/dV = −I/V there
    let st = MpptState {
        v_prev: 9.9,
        i_prev: 10.0 - 9.9 / 2.0,
        ..MpptState::new(10.0, 0.5).unwrap()
    };
    let next = ic_step(&st, 10.0, 5.0);
    assert_eq!(next.v_ref, st.v_ref);
}

#[test]
fn runs_are_deterministic() {
    let ap = default_array(800.0, 310.0);
    let algo = Algorithm::IncrementalConductance;
    let a = mppt_run(&ap, algo, MpptState::new(20.0, 0.5).unwrap(), 150).unwrap();
    let b = mppt_run(&ap, algo, MpptState::new(20.0, 0.5).unwrap(), 150).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
}

#[test]
fn temperature_and_irradiance_trends() {
    let p35 = |t: f64| 35.0 * array_current(&default_array(1000.0, t), 35.0).unwrap();
    assert!(p35(298.0) > p35(323.0) && p35(323.0) > p35(348.0));
    let mpp = |g: f64| find_mpp(&default_array(g, 298.0)).unwrap().p;
    assert!(mpp(200.0) < mpp(600.0) && mpp(600.0) < mpp(1000.0));
}
