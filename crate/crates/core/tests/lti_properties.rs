use proptest::prelude::*;

use solarpump::lti::{
    default_dt, error_constants, frequency_response, log_grid, routh_table, stability_margins,
    step_metrics, step_response, step_response_auto, suggest_t_end, Polynomial, TransferFunction,
    Verdict,
};
use solarpump::plants::second_order;

fn coeffs(max_deg: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_deg).prop_flat_map(|deg| {
        (
            prop_oneof![-10.0..-0.1f64, 0.1..10.0f64],
            prop::collection::vec(-10.0..10.0f64, deg),
        )
            .prop_map(|(lead, rest)| std::iter::once(lead).chain(rest).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roots_meet_residual_bound(c in coeffs(8)) {
        let p = Polynomial::from_coeffs(&c);
        let roots = p.roots().unwrap();
        prop_assert_eq!(roots.len(), p.degree());
        for r in roots {
            prop_assert!(p.relative_residual(r) <= 1e-9, "root {r} of {c:?}");
        }
    }

    #[test]
    fn routh_counts_right_half_plane_roots(c in coeffs(6)) {
        let p = Polynomial::from_coeffs(&c);
        prop_assume!(p.degree() >= 2);
        let roots = p.roots().unwrap();
        prop_assume!(roots.iter().all(|r| r.re.abs() >= 1e-3));
        let rhp = roots.iter().filter(|r| r.re > 0.0).count();
        let rt = routh_table(&p).unwrap();
        prop_assert_eq!(rt.table.len(), p.degree() + 1);
        prop_assert_eq!(rt.sign_changes, rhp, "{:?}", c);
        prop_assert_eq!(rt.verdict == Verdict::Stable, rhp == 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_settles_at_dc_gain(k in 0.1..10.0f64, wn in 0.5..20.0f64, zeta in 0.1..2.0f64) {
        let tf = second_order(k, wn, zeta).unwrap();
        let tr = step_response_auto(&tf, suggest_t_end(&tf).unwrap() * 1.5).unwrap();
        let m = step_metrics(&tr).unwrap();
        prop_assert!((m.steady_state_value - tf.dc_gain()).abs() <= 5e-3 * tf.dc_gain());
        prop_assert!(m.overshoot_pct >= 0.0);
        prop_assert!(m.rise_time_s >= 0.0 && m.settling_time_s >= 0.0 && m.peak_time_s >= 0.0);
        if m.overshoot_pct > 0.0 {
            prop_assert!(m.peak >= m.steady_state_value);
        }
    }

    #[test]
    fn halving_dt_barely_moves_metrics(wn in 0.5..20.0f64, zeta in 0.2..0.9f64) {
        let tf = second_order(1.0, wn, zeta).unwrap();
        let t_end = suggest_t_end(&tf).unwrap();
        let dt = default_dt(&tf, t_end).unwrap();
        let a = step_metrics(&step_response(&tf, t_end, dt).unwrap()).unwrap();
        let b = step_metrics(&step_response(&tf, t_end, dt / 2.0).unwrap()).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-12);
        prop_assert!(rel(a.rise_time_s, b.rise_time_s) < 5e-3);
        prop_assert!(rel(a.settling_time_s, b.settling_time_s) < 5e-3);
        prop_assert!(rel(a.peak_time_s, b.peak_time_s) < 5e-3);
        prop_assert!(rel(a.peak, b.peak) < 5e-3);
        prop_assert!((a.overshoot_pct - b.overshoot_pct).abs() < 5e-3 * b.overshoot_pct.max(1.0));
    }

    #[test]
    fn stable_loops_have_positive_phase_margin(
        k in 0.1..500.0f64,
        a in 0.1..20.0f64,
        b in 0.1..20.0f64,
        integrator in any::<bool>(),
    ) {
        let den = Polynomial::from_real_roots(&[-a, -b]);
        let den = if integrator { &den * &Polynomial::s() } else { den };
        let open = TransferFunction::new(Polynomial::constant(k), den).unwrap();
        let closed = open.unity_feedback().unwrap();
        prop_assume!(closed.poles().unwrap().iter().all(|p| p.re < -1e-6));
        let fr = frequency_response(&open, &log_grid(1e-3, 1e4, 2000)).unwrap();
        prop_assert!(fr.omegas.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(fr.omegas.len(), fr.phase_deg.len());
        let m = stability_margins(&fr);
        if let Some(pm) = m.phase_margin_deg {
            prop_assert!(pm > 0.0, "PM {pm}");
        }
        prop_assert!(m.gm_freq_rad_s.is_none_or(|w| w > 0.0));
        prop_assert!(m.pm_freq_rad_s.is_none_or(|w| w > 0.0));
    }

    #[test]
    fn type_zero_error_constants(k in 0.01..100.0f64, a in 0.1..10.0f64, b in 0.1..10.0f64) {
        let g = TransferFunction::new(Polynomial::constant(k), Polynomial::from_real_roots(&[-a, -b])).unwrap();
        let ec = error_constants(&g);
        prop_assert_eq!(ec.system_type, 0);
        prop_assert_eq!(ec.kv_vel, 0.0);
        prop_assert_eq!(ec.ka_acc, 0.0);
        prop_assert!((ec.e_step - 1.0 / (1.0 + ec.kp_pos)).abs() < 1e-12);
        prop_assert!((ec.kp_pos - k / (a * b)).abs() <= 1e-9 * ec.kp_pos);
    }
}

#[test]
fn first_order_metrics_match_closed_form() {
    for tau in [0.1, 1.0, 475.0] {
        let tf = TransferFunction::from_coeffs(&[3.0], &[tau, 1.0]).unwrap();
        let m = step_metrics(&step_response_auto(&tf, 10.0 * tau).unwrap()).unwrap();
        assert!((m.rise_time_s / (tau * 9f64.ln()) - 1.0).abs() < 0.01);
        assert!((m.settling_time_s / (tau * 50f64.ln()) - 1.0).abs() < 0.01);
        assert_eq!(m.overshoot_pct, 0.0);
    }
}
