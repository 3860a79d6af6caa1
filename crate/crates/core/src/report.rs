//! Registry of published figures, recomputed and compared.
//!
//! Each row carries the quoted value, the recomputed value, its own
//! tolerance and a status. Deviations are data: building the report never
//! fails on a mismatch.

use std::fmt;

use crate::csv_out::{num, Table};
use crate::lti::{
    error_constants, frequency_response, log_grid, routh_table, ss_error_vs_gain,
    stability_margins, step_metrics, step_response_auto, ErrorKind, Margins, Polynomial,
    StepMetrics, TransferFunction, Verdict,
};
use crate::plants::{
    cascade_plant, cascade_system, closed_loop_char_poly, metering_pump_tf, motor_measured,
    motor_tf, pid_tf, pump_tf, tank_pid, tank_second_order, tank_tf, MotorParams, TankParams,
    CASCADE_PID_1, CASCADE_PID_2, MOTOR_MEASURED_DEN, MOTOR_MEASURED_NUM, MOTOR_PID,
};
use crate::Result;

/// Poles and zeros.
pub const TOL_POLE_ABS: f64 = 1e-3;
/// Step metrics and margins read off figures.
pub const TOL_FIGURE_REL: f64 = 0.15;
/// Closed-form identities.
pub const TOL_ANALYTIC_REL: f64 = 1e-3;

/// Quoted figures are multiplied by this before analysing the measured
/// motor loop; the quoted K = 1e5 and 1e6 behave as loop gains 10 and 100.
pub const MOTOR_GAIN_SCALE: f64 = 1e-4;

/// Registry ids in report order.
pub const REGISTRY_IDS: [&str; 67] = [
    "tank2.pole_re",
    "tank2.pole_im",
    "pid2.zero",
    "motor.open_dc_gain",
    "motor.closed_dc_gain",
    "motor.k1e5.rise",
    "motor.k1e5.overshoot",
    "motor.k1e5.peak_time",
    "motor.k1e5.pm",
    "motor.k1e5.pm_freq",
    "motor.k1e5.bode_116",
    "motor.k1e6.rise",
    "motor.k1e6.overshoot",
    "motor.k1e6.peak_time",
    "motor.k1e6.peak",
    "motor.k1e6.settling",
    "motor.k1e6.gm",
    "motor.k1e6.gm_freq",
    "motor.k1e6.pm",
    "motor.k1e6.pm_freq",
    "motor.gain_e0.1_closed",
    "motor.gain_e0.1_open",
    "motor.gain_e0.01_open",
    "motor.gain_e0.01_closed",
    "motor_pid.rise",
    "motor_pid.settling",
    "motor_pid.overshoot",
    "motor_pid.peak",
    "motor_pid.gm",
    "motor_pid.gm_freq",
    "motor_pid.pm",
    "motor_pid.pm_freq",
    "routh.printed_quartic",
    "routh.pid_char_poly",
    "motor.symbolic_vs_numeric",
    "pid2.rise",
    "pid2.overshoot",
    "pid2.peak_time",
    "pid2.peak",
    "pid2.settling",
    "metering.dc_gain",
    "pump.rise",
    "pump.settling",
    "pump.time_constant",
    "pump.kp",
    "pump.kv",
    "pump.ka",
    "pump.e_step",
    "cascade.plant_pole_1",
    "cascade.plant_pole_2",
    "tank.time_constant",
    "routh.cascade_all_k",
    "cascade.gain_e0.1",
    "cascade.gain_e0.01",
    "cascade.e_step",
    "cascade.pid1.rise",
    "cascade.pid1.settling",
    "cascade.pid1.overshoot",
    "cascade.pid1.peak",
    "cascade.pid2.rise",
    "cascade.pid2.settling",
    "cascade.pid2.overshoot",
    "cascade.pid2.peak",
    "cascade.pid2.gm",
    "cascade.pid2.gm_freq",
    "cascade.pid2.pm",
    "cascade.pid2.pm_freq",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Match,
    Deviates,
    Qualitative,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Match => "MATCH",
            Status::Deviates => "DEVIATES",
            Status::Qualitative => "QUALITATIVE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    Abs(f64),
    Rel(f64),
    /// No numeric claim to compare.
    None,
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Abs(t) => write!(f, "abs {t:e}"),
            Tolerance::Rel(t) => write!(f, "rel {}%", num((t * 100.0 * 1e3).round() / 1e3)),
            Tolerance::None => f.write_str("-"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
    Missing,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => f.write_str(&num(*x)),
            Value::Text(s) => f.write_str(s),
            Value::Missing => f.write_str("-"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaperReference {
    pub id: &'static str,
    pub description: &'static str,
    pub claimed: Value,
    pub unit: &'static str,
    pub computed: Value,
    pub abs_dev: Option<f64>,
    pub rel_dev: Option<f64>,
    pub tolerance: Tolerance,
    pub status: Status,
    /// How the computed value was obtained; always set on deviations.
    pub derivation: String,
}

/// Tolerance widened to half a unit in the last quoted decimal, since a
/// three-digit quote cannot be checked more finely than that. Integers are
/// taken as exact.
fn quote_tolerance(quoted: &str, base_rel: f64) -> Tolerance {
    let v: f64 = quoted
        .replace(',', "")
        .parse()
        .expect("registry quote parses");
    let digits = quoted.split(['e', 'E']).next().unwrap_or(quoted);
    let Some((_, decimals)) = digits.split_once('.') else {
        return Tolerance::Rel(base_rel);
    };
    let half_ulp = 0.5 * 10f64.powi(-(decimals.len() as i32));
    Tolerance::Rel(base_rel.max(half_ulp / v.abs()))
}

fn parse_quote(q: &str) -> f64 {
    q.replace(',', "").parse().expect("registry quote parses")
}

struct Builder {
    rows: Vec<PaperReference>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn numeric(
        &mut self,
        id: &'static str,
        description: &'static str,
        claimed: f64,
        unit: &'static str,
        computed: Option<f64>,
        tolerance: Tolerance,
        derivation: impl Into<String>,
    ) {
        let mut derivation = derivation.into();
        let (abs_dev, rel_dev, status) = match computed {
            Some(c) if c.is_finite() => {
                let abs = (c - claimed).abs();
                let rel = (claimed != 0.0).then(|| abs / claimed.abs());
                let ok = match tolerance {
                    Tolerance::Abs(t) => abs <= t,
                    Tolerance::Rel(t) => abs == 0.0 || rel.is_some_and(|r| r <= t),
                    Tolerance::None => false,
                };
                (
                    Some(abs),
                    rel,
                    if ok { Status::Match } else { Status::Deviates },
                )
            }
            _ => {
                if derivation.is_empty() {
                    derivation = "not computable".into();
                }
                (None, None, Status::Deviates)
            }
        };
        self.rows.push(PaperReference {
            id,
            description,
            claimed: Value::Number(claimed),
            unit,
            computed: computed.map_or(Value::Missing, Value::Number),
            abs_dev,
            rel_dev,
            tolerance,
            status,
            derivation,
        });
    }

    fn figure(
        &mut self,
        id: &'static str,
        description: &'static str,
        claimed: f64,
        unit: &'static str,
        computed: Option<f64>,
        derivation: &str,
    ) {
        self.numeric(
            id,
            description,
            claimed,
            unit,
            computed,
            Tolerance::Rel(TOL_FIGURE_REL),
            derivation,
        );
    }

    fn analytic(
        &mut self,
        id: &'static str,
        description: &'static str,
        quoted: &str,
        unit: &'static str,
        computed: f64,
        derivation: &str,
    ) {
        let tol = quote_tolerance(quoted, TOL_ANALYTIC_REL);
        self.numeric(
            id,
            description,
            parse_quote(quoted),
            unit,
            Some(computed),
            tol,
            derivation,
        );
    }

    fn pole(
        &mut self,
        id: &'static str,
        description: &'static str,
        claimed: f64,
        computed: f64,
        derivation: &str,
    ) {
        self.numeric(
            id,
            description,
            claimed,
            "1/s",
            Some(computed),
            Tolerance::Abs(TOL_POLE_ABS),
            derivation,
        );
    }

    fn verdict(
        &mut self,
        id: &'static str,
        description: &'static str,
        claimed: Verdict,
        computed: Verdict,
        derivation: String,
    ) {
        let status = if claimed == computed {
            Status::Match
        } else {
            Status::Deviates
        };
        self.rows.push(PaperReference {
            id,
            description,
            claimed: Value::Text(claimed.to_string()),
            unit: "",
            computed: Value::Text(computed.to_string()),
            abs_dev: None,
            rel_dev: None,
            tolerance: Tolerance::None,
            status,
            derivation,
        });
    }

    fn qualitative(
        &mut self,
        id: &'static str,
        description: &'static str,
        unit: &'static str,
        computed: f64,
        derivation: String,
    ) {
        self.rows.push(PaperReference {
            id,
            description,
            claimed: Value::Missing,
            unit,
            computed: Value::Number(computed),
            abs_dev: None,
            rel_dev: None,
            tolerance: Tolerance::None,
            status: Status::Qualitative,
            derivation,
        });
    }

    /// Rows for the step metrics and margins of one loop.
    fn loop_rows(
        &mut self,
        rows: &[(&'static str, &'static str, f64, &'static str, Metric)],
        lm: &LoopMetrics,
        derivation: &str,
    ) {
        for (id, description, claimed, unit, metric) in rows {
            let computed = lm.get(*metric);
            self.figure(id, description, *claimed, unit, computed, derivation);
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Metric {
    Rise,
    Settling,
    Overshoot,
    Peak,
    PeakTime,
    GainMargin,
    GmFreq,
    PhaseMargin,
    PmFreq,
}

struct LoopMetrics {
    step: Option<StepMetrics>,
    margins: Margins,
}

impl LoopMetrics {
    fn get(&self, m: Metric) -> Option<f64> {
        let s = self.step.as_ref();
        match m {
            Metric::Rise => s.map(|s| s.rise_time_s),
            Metric::Settling => s.map(|s| s.settling_time_s),
            Metric::Overshoot => s.map(|s| s.overshoot_pct),
            Metric::Peak => s.map(|s| s.peak),
            Metric::PeakTime => s.map(|s| s.peak_time_s),
            Metric::GainMargin => self.margins.gain_margin_db,
            Metric::GmFreq => self.margins.gm_freq_rad_s,
            Metric::PhaseMargin => self.margins.phase_margin_deg,
            Metric::PmFreq => self.margins.pm_freq_rad_s,
        }
    }
}

/// Frequency grid used for every margin in the report.
pub fn report_grid() -> Vec<f64> {
    log_grid(1e-2, 1e5, 4000)
}

fn analyse_loop(open: &TransferFunction, t_end: f64) -> Result<LoopMetrics> {
    let closed = open.unity_feedback()?;
    let step = step_metrics(&step_response_auto(&closed, t_end)?).ok();
    let margins = stability_margins(&frequency_response(open, &report_grid())?);
    Ok(LoopMetrics { step, margins })
}

/// Velocity form of the measured motor: the free integrator removed.
fn motor_velocity() -> TransferFunction {
    TransferFunction::from_coeffs(&MOTOR_MEASURED_NUM, &MOTOR_MEASURED_DEN[..3]).expect("constant")
}

/// Measured motor with one added to its denominator, the closed-loop form
/// whose DC gain equals the numerator.
fn motor_closed_template() -> TransferFunction {
    let mut den = MOTOR_MEASURED_DEN;
    den[3] += 1.0;
    TransferFunction::from_coeffs(&MOTOR_MEASURED_NUM, &den).expect("constant")
}

fn gain_for(template: &TransferFunction, target: f64) -> Option<f64> {
    ss_error_vs_gain(template, &log_grid(1e-3, 1e8, 221), ErrorKind::Step)
        .ok()?
        .gain_for(target)
}

use Metric::*;

/// Recomputes every registered figure, in registry order.
pub fn run_validation_report() -> Result<Vec<PaperReference>> {
    let mut b = Builder { rows: Vec::new() };

    // second-order tank
    let poles = tank_second_order(1.0).poles()?;
    let upper = poles
        .iter()
        .copied()
        .find(|p| p.im > 0.0)
        .unwrap_or(poles[0]);
    let d = "roots of s^2 + 0.02241 s + 5";
    b.pole(
        "tank2.pole_re",
        "second-order tank pole, real part",
        -0.0112,
        upper.re,
        d,
    );
    b.pole(
        "tank2.pole_im",
        "second-order tank pole, imaginary part",
        2.236,
        upper.im,
        d,
    );

    let zeros = tank_pid().zeros()?;
    let z = zeros.iter().map(|z| z.re).fold(f64::NAN, f64::min);
    b.pole(
        "pid2.zero",
        "double zero of 747.5(1+0.12s)^2/s",
        -8.24,
        z,
        "zeros at -1/0.12",
    );

    // measured motor, scaled loop gain
    let dv = motor_velocity().dc_gain();
    b.analytic(
        "motor.open_dc_gain",
        "measured motor DC gain, integrator removed",
        "0.962",
        "",
        dv,
        "0.0001563/0.0001625",
    );
    let dc = motor_closed_template().dc_gain();
    b.analytic(
        "motor.closed_dc_gain",
        "measured motor DC gain, closed-loop form",
        "0.000156",
        "",
        dc,
        "num / (den + 1) at s = 0",
    );

    let scaled = |k: f64| {
        format!(
            "unity feedback around {} x measured motor (quoted K = {k:e} times 1e-4)",
            k * MOTOR_GAIN_SCALE
        )
    };
    let k5 = analyse_loop(&motor_measured(1e5 * MOTOR_GAIN_SCALE), 2.0)?;
    b.loop_rows(
        &[
            ("motor.k1e5.rise", "K=1e5 loop rise time", 0.156, "s", Rise),
            (
                "motor.k1e5.overshoot",
                "K=1e5 loop overshoot",
                2.79,
                "%",
                Overshoot,
            ),
            (
                "motor.k1e5.peak_time",
                "K=1e5 loop peak time",
                0.325,
                "s",
                PeakTime,
            ),
            (
                "motor.k1e5.pm",
                "K=1e5 loop phase margin",
                67.4,
                "deg",
                PhaseMargin,
            ),
            (
                "motor.k1e5.pm_freq",
                "K=1e5 loop phase crossover",
                8.93,
                "rad/s",
                PmFreq,
            ),
        ],
        &k5,
        &scaled(1e5),
    );
    let mag116 =
        frequency_response(&motor_measured(1e5 * MOTOR_GAIN_SCALE), &[116.0])?.magnitude_db[0];
    b.figure(
        "motor.k1e5.bode_116",
        "K=1e5 open-loop magnitude at 116 rad/s",
        -36.3,
        "dB",
        Some(mag116),
        &scaled(1e5),
    );

    let k6 = analyse_loop(&motor_measured(1e6 * MOTOR_GAIN_SCALE), 2.0)?;
    b.loop_rows(
        &[
            ("motor.k1e6.rise", "K=1e6 loop rise time", 0.0264, "s", Rise),
            (
                "motor.k1e6.overshoot",
                "K=1e6 loop overshoot",
                51.7,
                "%",
                Overshoot,
            ),
            (
                "motor.k1e6.peak_time",
                "K=1e6 loop peak time",
                0.0687,
                "s",
                PeakTime,
            ),
            ("motor.k1e6.peak", "K=1e6 loop peak", 1.52, "", Peak),
            (
                "motor.k1e6.settling",
                "K=1e6 loop settling time",
                0.419,
                "s",
                Settling,
            ),
            (
                "motor.k1e6.gm",
                "K=1e6 loop gain margin",
                16.3,
                "dB",
                GainMargin,
            ),
            (
                "motor.k1e6.gm_freq",
                "K=1e6 loop phase crossover",
                116.0,
                "rad/s",
                GmFreq,
            ),
            (
                "motor.k1e6.pm",
                "K=1e6 loop phase margin",
                23.0,
                "deg",
                PhaseMargin,
            ),
            (
                "motor.k1e6.pm_freq",
                "K=1e6 loop gain crossover",
                43.8,
                "rad/s",
                PmFreq,
            ),
        ],
        &k6,
        &scaled(1e6),
    );

    // steady-state error gains
    let d_closed = "bisection on 1/(1 + K*0.0001563) against num/(den + 1)";
    let d_open = "bisection on 1/(1 + K*0.962) against the integrator-free motor";
    let closed = motor_closed_template();
    let open = motor_velocity();
    for (id, desc, quote, template, target, d) in [
        (
            "motor.gain_e0.1_closed",
            "gain for e = 0.1, closed-loop form",
            "57582",
            &closed,
            0.1,
            d_closed,
        ),
        (
            "motor.gain_e0.1_open",
            "gain for e = 0.1, open-loop form",
            "9.36",
            &open,
            0.1,
            d_open,
        ),
        (
            "motor.gain_e0.01_open",
            "gain for e = 0.01, open-loop form",
            "102.9",
            &open,
            0.01,
            d_open,
        ),
        (
            "motor.gain_e0.01_closed",
            "gain for e = 0.01, closed-loop form",
            "633400",
            &closed,
            0.01,
            d_closed,
        ),
    ] {
        let k = gain_for(template, target).unwrap_or(f64::NAN);
        b.analytic(id, desc, quote, "", k, d);
    }

    // PID on the measured motor
    let pid_motor = pid_tf(&MOTOR_PID)?.series(&motor_measured(1.0));
    let t1 = analyse_loop(&pid_motor, 10.0)?;
    b.loop_rows(
        &[
            (
                "motor_pid.rise",
                "tuned motor PID rise time",
                0.0303,
                "s",
                Rise,
            ),
            (
                "motor_pid.settling",
                "tuned motor PID settling time",
                0.179,
                "s",
                Settling,
            ),
            (
                "motor_pid.overshoot",
                "tuned motor PID overshoot",
                23.2,
                "%",
                Overshoot,
            ),
            ("motor_pid.peak", "tuned motor PID peak", 1.23, "", Peak),
            (
                "motor_pid.gm",
                "tuned motor PID gain margin",
                42.8,
                "dB",
                GainMargin,
            ),
            (
                "motor_pid.gm_freq",
                "tuned motor PID phase crossover",
                1630.0,
                "rad/s",
                GmFreq,
            ),
            (
                "motor_pid.pm",
                "tuned motor PID phase margin",
                60.0,
                "deg",
                PhaseMargin,
            ),
            (
                "motor_pid.pm_freq",
                "tuned motor PID gain crossover",
                39.9,
                "rad/s",
                PmFreq,
            ),
        ],
        &t1,
        "PID (9.51202, 5.6443, 0.00022) in series with the measured motor, unity feedback",
    );

    let cp = closed_loop_char_poly(&pid_tf(&MOTOR_PID)?, &motor_measured(1.0))?;
    let printed = Polynomial::new(vec![1.0, 625.8, 1.382e4, 1.239e7, 7.349e6])?;
    let pr = routh_table(&printed)?;
    let rhp: Vec<String> = printed
        .roots()?
        .iter()
        .filter(|r| r.re > 0.0)
        .map(|r| format!("{:.3}{:+.3}i", r.re, r.im))
        .collect();
    b.verdict(
        "routh.printed_quartic",
        "printed quartic s^4+625.8s^3+1.382e4s^2+1.239e7s+7.349e6",
        Verdict::Stable,
        pr.verdict,
        format!(
            "{} sign changes; right-half-plane roots {}",
            pr.sign_changes,
            rhp.join(", ")
        ),
    );
    let cr = routh_table(&cp)?;
    let coeffs: Vec<String> = cp.coeffs().iter().map(|c| num(*c)).collect();
    b.verdict(
        "routh.pid_char_poly",
        "characteristic polynomial rebuilt from the PID gains and measured motor",
        Verdict::Stable,
        cr.verdict,
        format!("monic coefficients {}", coeffs.join(" ")),
    );

    let symbolic = motor_tf(&MotorParams::default())?;
    let sym_dc = symbolic.num().coeff(0) / symbolic.den().coeff(1);
    b.qualitative(
        "motor.symbolic_vs_numeric",
        "velocity DC gain from the listed motor parameters (measured form gives 0.962)",
        "",
        sym_dc,
        format!("Kt / (R b + Kt Ke) = {}; the measured coefficients are not reproducible from the listed parameters", num(sym_dc)),
    );

    // PID-2 on the second-order tank
    let pid2 = tank_pid().series(&tank_second_order(1.0));
    let p2 = analyse_loop(&pid2, 2.0)?;
    b.loop_rows(
        &[
            ("pid2.rise", "PID-2 tank loop rise time", 0.0204, "s", Rise),
            (
                "pid2.overshoot",
                "PID-2 tank loop overshoot",
                14.4,
                "%",
                Overshoot,
            ),
            (
                "pid2.peak_time",
                "PID-2 tank loop peak time",
                0.059,
                "s",
                PeakTime,
            ),
            ("pid2.peak", "PID-2 tank loop peak", 1.14, "", Peak),
            (
                "pid2.settling",
                "PID-2 tank loop settling time",
                0.165,
                "s",
                Settling,
            ),
        ],
        &p2,
        "747.5(1+0.12s)^2/s in series with 5/(s^2+0.02241s+5), unity feedback",
    );

    // metering pump
    b.qualitative(
        "metering.dc_gain",
        "metering pump DC gain",
        "",
        metering_pump_tf().dc_gain(),
        "1.869/0.4582".into(),
    );

    // storage pump
    let tau = 475.0;
    let pump = pump_tf(5.0, tau)?;
    let d = "first-order analytic, tau = 475 s";
    b.figure(
        "pump.rise",
        "storage pump rise time",
        174.0,
        "s",
        Some(tau * 9f64.ln()),
        "first-order analytic, 475 ln 9",
    );
    b.figure(
        "pump.settling",
        "storage pump settling time",
        310.0,
        "s",
        Some(tau * 50f64.ln()),
        "first-order analytic, 475 ln 50",
    );
    b.figure(
        "pump.time_constant",
        "storage pump time constant",
        112.0,
        "s",
        Some(tau),
        d,
    );
    let ec = error_constants(&pump);
    b.analytic(
        "pump.kp",
        "storage pump position constant",
        "5",
        "",
        ec.kp_pos,
        "G(0)",
    );
    b.numeric(
        "pump.kv",
        "storage pump velocity constant",
        0.0,
        "",
        Some(ec.kv_vel),
        Tolerance::Abs(1e-12),
        "lim s G(s)",
    );
    b.numeric(
        "pump.ka",
        "storage pump acceleration constant",
        0.0,
        "",
        Some(ec.ka_acc),
        Tolerance::Abs(1e-12),
        "lim s^2 G(s)",
    );
    b.analytic(
        "pump.e_step",
        "storage pump steady-state step error",
        "0.833",
        "",
        ec.e_step,
        "1/(1 + Kp)",
    );

    // level-control cascade
    let plant = cascade_plant();
    let pp = plant.poles()?;
    let (p_slow, p_fast) = pp
        .iter()
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), p| {
            (hi.max(p.re), lo.min(p.re))
        });
    b.pole(
        "cascade.plant_pole_1",
        "cascade plant slow pole",
        -1.0,
        p_slow,
        "roots of 0.1s^2 + 1.1s + 1",
    );
    b.pole(
        "cascade.plant_pole_2",
        "cascade plant fast pole",
        -10.0,
        p_fast,
        "roots of 0.1s^2 + 1.1s + 1",
    );
    b.analytic(
        "tank.time_constant",
        "tank time constant R A",
        "1",
        "s",
        tank_tf(&TankParams {
            area: 100.0,
            outflow_r: 0.01,
        })?
        .poles()?[0]
            .re
            .recip()
            .abs(),
        "R = 0.01, A = 100",
    );

    let ks = [0.1, 1.0, 10.0, 100.0, 1000.0, 1e6];
    let mut all = Verdict::Stable;
    for k in ks {
        let cp = closed_loop_char_poly(&TransferFunction::gain(k), &plant)?;
        if routh_table(&cp)?.verdict != Verdict::Stable {
            all = Verdict::Unstable;
        }
    }
    b.verdict(
        "routh.cascade_all_k",
        "cascade under gain K, stable for all K > 0",
        Verdict::Stable,
        all,
        "Routh verdict at K = 0.1, 1, 10, 100, 1000, 1e6".into(),
    );

    let d_cas = "bisection on 1/(1 + 0.05 K)";
    b.analytic(
        "cascade.gain_e0.1",
        "cascade gain for e = 0.1",
        "180",
        "",
        gain_for(&plant, 0.1).unwrap_or(f64::NAN),
        d_cas,
    );
    b.analytic(
        "cascade.gain_e0.01",
        "cascade gain for e = 0.01",
        "1980",
        "",
        gain_for(&plant, 0.01).unwrap_or(f64::NAN),
        d_cas,
    );
    b.analytic(
        "cascade.e_step",
        "cascade steady-state step error at K = 1",
        "0.048",
        "",
        error_constants(&plant).e_step,
        "1/(1 + Kp), Kp = 0.05",
    );

    let c1 = cascade_system(50.0, &CASCADE_PID_1)?;
    let m1 = analyse_loop(&c1.open_loop, 10.0)?;
    b.loop_rows(
        &[
            (
                "cascade.pid1.rise",
                "cascade with PID-1 rise time",
                0.812,
                "s",
                Rise,
            ),
            (
                "cascade.pid1.settling",
                "cascade with PID-1 settling time",
                3.04,
                "s",
                Settling,
            ),
            (
                "cascade.pid1.overshoot",
                "cascade with PID-1 overshoot",
                7.47,
                "%",
                Overshoot,
            ),
            (
                "cascade.pid1.peak",
                "cascade with PID-1 peak",
                1.07,
                "",
                Peak,
            ),
        ],
        &m1,
        "filtered PID (0.653, 1.085, 0.03, N 19.23) x sensor 50 x plant, unity feedback",
    );
    let c2 = cascade_system(50.0, &CASCADE_PID_2)?;
    let m2 = analyse_loop(&c2.open_loop, 10.0)?;
    b.loop_rows(
        &[
            (
                "cascade.pid2.rise",
                "cascade with PID-2 rise time",
                0.146,
                "s",
                Rise,
            ),
            (
                "cascade.pid2.settling",
                "cascade with PID-2 settling time",
                0.796,
                "s",
                Settling,
            ),
            (
                "cascade.pid2.overshoot",
                "cascade with PID-2 overshoot",
                18.1,
                "%",
                Overshoot,
            ),
            (
                "cascade.pid2.peak",
                "cascade with PID-2 peak",
                1.18,
                "",
                Peak,
            ),
            (
                "cascade.pid2.gm",
                "cascade with PID-2 gain margin",
                38.9,
                "dB",
                GainMargin,
            ),
            (
                "cascade.pid2.gm_freq",
                "cascade with PID-2 phase crossover",
                101.0,
                "rad/s",
                GmFreq,
            ),
            (
                "cascade.pid2.pm",
                "cascade with PID-2 phase margin",
                49.3,
                "deg",
                PhaseMargin,
            ),
            (
                "cascade.pid2.pm_freq",
                "cascade with PID-2 gain crossover",
                8.77,
                "rad/s",
                PmFreq,
            ),
        ],
        &m2,
        "filtered PID (4.67, 3.91, -0.0047, N 1002.69) x sensor 50 x plant, unity feedback",
    );

    Ok(b.rows)
}

pub fn report_table(rows: &[PaperReference]) -> Table {
    let mut t = Table::new(&[
        "id",
        "description",
        "claimed",
        "unit",
        "computed",
        "abs_dev",
        "rel_dev",
        "tolerance",
        "status",
        "derivation",
    ]);
    let opt = |x: Option<f64>| x.map_or_else(String::new, num);
    for r in rows {
        t.rows.push(vec![
            r.id.to_string(),
            r.description.to_string(),
            r.claimed.to_string(),
            r.unit.to_string(),
            r.computed.to_string(),
            opt(r.abs_dev),
            opt(r.rel_dev),
            r.tolerance.to_string(),
            r.status.to_string(),
            r.derivation.clone(),
        ]);
    }
    t
}

/// Fixed-width text rendering with derivations listed under deviations.
pub fn render_text(rows: &[PaperReference]) -> String {
    let short = |v: &Value| match v {
        Value::Number(x) => format!("{x:.6}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string(),
        other => other.to_string(),
    };
    let mut out = format!(
        "{:<26} {:>12} {:>12} {:>10} {:>12} {}\n",
        "id", "claimed", "computed", "rel_dev", "tolerance", "status"
    );
    for r in rows {
        let rel = r
            .rel_dev
            .map_or_else(|| "-".into(), |x| format!("{:.2}%", x * 100.0));
        out.push_str(&format!(
            "{:<26} {:>12} {:>12} {:>10} {:>12} {}\n",
            r.id,
            short(&r.claimed),
            short(&r.computed),
            rel,
            r.tolerance.to_string(),
            r.status
        ));
        if r.status != Status::Match {
            out.push_str(&format!("    {}\n", r.derivation));
        }
    }
    let count = |s| rows.iter().filter(|r| r.status == s).count();
    out.push_str(&format!(
        "\n{} rows: {} MATCH, {} DEVIATES, {} QUALITATIVE\n",
        rows.len(),
        count(Status::Match),
        count(Status::Deviates),
        count(Status::Qualitative)
    ));
    out
}
