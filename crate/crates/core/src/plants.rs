//! Transfer-function constructors for the tracker motor, controllers, pumps,
//! tanks and the sensor-feedback cascade, plus the valve linearization.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lti::{Polynomial, TransferFunction};

/// Numerator of the measured tracker-motor transfer function.
pub const MOTOR_MEASURED_NUM: [f64; 1] = [0.0001563];
/// Denominator of the measured tracker-motor transfer function.
pub const MOTOR_MEASURED_DEN: [f64; 4] = [1.2e-8, 7.51e-6, 0.0001625, 0.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorParams {
    /// Rotor inertia, kg·m².
    pub j: f64,
    /// Viscous friction, N·m·s.
    pub b_friction: f64,
    /// Torque constant, N·m/A.
    pub k_t: f64,
    /// Back-EMF constant, V·s/rad.
    pub k_e: f64,
    /// Armature resistance, Ω.
    pub r: f64,
    /// Armature inductance, H.
    pub l: f64,
    pub k_a: f64,
    pub k_s: f64,
    pub k_d: f64,
    pub n_gear: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        Self {
            j: 0.01,
            b_friction: 1e-6,
            k_t: 0.0125,
            k_e: 0.0125,
            r: 1.0,
            l: 0.5,
            k_a: 1.0,
            k_s: 1.0,
            k_d: 1.0,
            n_gear: 1.0,
        }
    }
}

/// Armature-controlled DC motor from voltage to shaft angle.
pub fn motor_tf(mp: &MotorParams) -> Result<TransferFunction> {
    let gain = mp.k_s * mp.k_a * mp.k_d * mp.k_t * mp.n_gear;
    TransferFunction::from_coeffs(
        &[gain],
        &[
            mp.l * mp.j,
            mp.b_friction * mp.l + mp.r * mp.j,
            mp.r * mp.b_friction + mp.k_t * mp.k_e,
            0.0,
        ],
    )
}

/// The measured motor transfer function scaled by a loop gain.
pub fn motor_measured(gain: f64) -> TransferFunction {
    TransferFunction::from_coeffs(&MOTOR_MEASURED_NUM, &MOTOR_MEASURED_DEN)
        .expect("constant coefficients are valid")
        .scale(gain)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Derivative filter coefficient; 0 selects the ideal derivative.
    pub n_filter: f64,
}

impl PidParams {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            n_filter: 0.0,
        }
    }

    pub fn filtered(kp: f64, ki: f64, kd: f64, n_filter: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            n_filter,
        }
    }
}

/// Gains of the PID tuned against the measured motor.
pub const MOTOR_PID: PidParams = PidParams {
    kp: 9.51202,
    ki: 5.6443,
    kd: 0.00022,
    n_filter: 0.0,
};
/// First tuned cascade controller (slow, low overshoot).
pub const CASCADE_PID_1: PidParams = PidParams {
    kp: 0.653,
    ki: 1.085,
    kd: 0.03,
    n_filter: 19.23,
};
/// Second tuned cascade controller (fast).
pub const CASCADE_PID_2: PidParams = PidParams {
    kp: 4.67,
    ki: 3.91,
    kd: -0.0047,
    n_filter: 1002.69,
};

/// `Kp + Ki/s + Kd·s`, or with a first-order derivative filter
/// `Kp + Ki/s + Kd·N·s/(s + N)` when `n_filter > 0`.
pub fn pid_tf(pp: &PidParams) -> Result<TransferFunction> {
    if pp.n_filter < 0.0 {
        return Err(Error::invalid("derivative filter coefficient must be ≥ 0"));
    }
    let n = pp.n_filter;
    let (num, den) = if n == 0.0 {
        (vec![pp.kd, pp.kp, pp.ki], vec![1.0, 0.0])
    } else {
        (
            vec![pp.kp + pp.kd * n, pp.kp * n + pp.ki, pp.ki * n],
            vec![1.0, n, 0.0],
        )
    };
    let tf = TransferFunction::from_coeffs(&num, &den)?;
    if pp.ki == 0.0 {
        // the integrator is absent, so the s factor cancels exactly
        let strip = |p: &Polynomial| {
            let c = p.coeffs();
            Polynomial::new(c[..c.len() - 1].to_vec())
        };
        if tf.num().is_zero() {
            return Ok(TransferFunction::gain(0.0));
        }
        return TransferFunction::new(strip(tf.num())?, strip(tf.den())?);
    }
    Ok(tf)
}

/// `747.5 (1 + 0.12 s)² / s`, the controller of the second-order tank loop.
pub fn tank_pid() -> TransferFunction {
    let zero = Polynomial::from_coeffs(&[0.12, 1.0]);
    TransferFunction::new((&zero * &zero).scale(747.5), Polynomial::s())
        .expect("constant coefficients are valid")
}

/// Monic numerator of `1 + C·G`.
pub fn closed_loop_char_poly(c: &TransferFunction, g: &TransferFunction) -> Result<Polynomial> {
    let p = &(c.num() * g.num()) + &(c.den() * g.den());
    if p.is_zero() {
        return Err(Error::DegenerateSystem("1 + C·G cancels to zero".into()));
    }
    p.monic()
}

/// `K / (1 + τ s)`.
pub fn pump_tf(k: f64, tau: f64) -> Result<TransferFunction> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!(
            "pump time constant must be positive, got {tau}"
        )));
    }
    TransferFunction::from_coeffs(&[k], &[tau, 1.0])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TankParams {
    /// Cross-section, m².
    pub area: f64,
    /// Outflow resistance.
    pub outflow_r: f64,
}

/// `R / (1 + R·A·s)`.
pub fn tank_tf(tp: &TankParams) -> Result<TransferFunction> {
    if !(tp.area > 0.0 && tp.outflow_r > 0.0) {
        return Err(Error::invalid(
            "tank area and outflow resistance must be positive",
        ));
    }
    TransferFunction::from_coeffs(&[tp.outflow_r], &[tp.outflow_r * tp.area, 1.0])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValveParams {
    pub c_v: f64,
    pub a_v: f64,
    /// Operating level.
    pub h_0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValveLinearization {
    /// `df/dh` at the operating level.
    pub d_slope: f64,
    /// `1 / D`.
    pub k_v: f64,
    /// Steady flow `c_v·a_v·√h₀`.
    pub f_h0: f64,
}

/// Orifice outflow `f(h) = c_v·a_v·√h`.
pub fn valve_flow(vp: &ValveParams, h: f64) -> f64 {
    vp.c_v * vp.a_v * h.sqrt()
}

/// Tangent of the orifice law at `h₀`.
pub fn valve_linearize(vp: &ValveParams) -> Result<ValveLinearization> {
    if !(vp.h_0 > 0.0) {
        return Err(Error::SingularLinearization(vp.h_0));
    }
    let d = vp.c_v * vp.a_v / (2.0 * vp.h_0.sqrt());
    Ok(ValveLinearization {
        d_slope: d,
        k_v: 1.0 / d,
        f_h0: valve_flow(vp, vp.h_0),
    })
}

/// Valve-linearized tank time constant `A / D`.
pub fn valve_time_constant(area: f64, lin: &ValveLinearization) -> f64 {
    area / lin.d_slope
}

/// `k_i·k_s·k_v / (τ_v s + 1)`.
pub fn tank_loop_tf(k_i: f64, k_s: f64, k_v: f64, tau_v: f64) -> Result<TransferFunction> {
    if !(tau_v > 0.0) {
        return Err(Error::invalid(format!(
            "tau_v must be positive, got {tau_v}"
        )));
    }
    TransferFunction::from_coeffs(&[k_i * k_s * k_v], &[tau_v, 1.0])
}

/// `K ωₙ² / (s² + 2ζωₙ s + ωₙ²)`.
pub fn second_order(k: f64, wn: f64, zeta: f64) -> Result<TransferFunction> {
    TransferFunction::from_coeffs(&[k * wn * wn], &[1.0, 2.0 * zeta * wn, wn * wn])
}

/// `5K / (s² + 0.02241 s + 5)`.
pub fn tank_second_order(k: f64) -> TransferFunction {
    TransferFunction::from_coeffs(&[5.0 * k], &[1.0, 0.02241, 5.0])
        .expect("constant coefficients are valid")
}

/// `1.869 / (s² + 12.32 s + 0.4582)`.
pub fn metering_pump_tf() -> TransferFunction {
    TransferFunction::from_coeffs(&[1.869], &[1.0, 12.32, 0.4582])
        .expect("constant coefficients are valid")
}

/// Pump `5/(0.1s+1)` in series with tank `0.01/(s+1)`.
pub fn cascade_plant() -> TransferFunction {
    let pump = pump_tf(5.0, 0.1).expect("positive time constant");
    let tank = tank_tf(&TankParams {
        area: 100.0,
        outflow_r: 0.01,
    })
    .expect("positive");
    pump.series(&tank)
}

/// Loop assemblies of the level-control cascade: controller, plant and
/// sensor gain in the forward path, unity feedback on the sensed level.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeSystem {
    pub plant: TransferFunction,
    pub controller: TransferFunction,
    pub sensor_gain: f64,
    pub open_loop: TransferFunction,
    pub closed_loop: TransferFunction,
}

pub fn cascade_system(k_sensor: f64, pid: &PidParams) -> Result<CascadeSystem> {
    let plant = cascade_plant();
    let controller = pid_tf(pid)?;
    let open_loop = controller.series(&plant).scale(k_sensor);
    let closed_loop = open_loop.unity_feedback()?;
    Ok(CascadeSystem {
        plant,
        controller,
        sensor_gain: k_sensor,
        open_loop,
        closed_loop,
    })
}

/// Named systems addressable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    MotorMeasured,
    MotorSymbolic,
    PumpStorage,
    PumpLoop,
    Tank001,
    Tank2ndOrder,
    Cascade,
    MeteringPump,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::MotorMeasured,
        Preset::MotorSymbolic,
        Preset::PumpStorage,
        Preset::PumpLoop,
        Preset::Tank001,
        Preset::Tank2ndOrder,
        Preset::Cascade,
        Preset::MeteringPump,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::MotorMeasured => "motor_paper",
            Preset::MotorSymbolic => "motor_symbolic",
            Preset::PumpStorage => "pump_storage",
            Preset::PumpLoop => "pump_loop",
            Preset::Tank001 => "tank_001",
            Preset::Tank2ndOrder => "tank_2nd_order",
            Preset::Cascade => "cascade",
            Preset::MeteringPump => "metering_pump",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::MotorMeasured => {
                "measured tracker motor 0.0001563/(1.2e-8 s^3 + 7.51e-6 s^2 + 0.0001625 s)"
            }
            Preset::MotorSymbolic => "tracker motor built from the listed J, b, K_t, K_e, R, L",
            Preset::PumpStorage => "storage pump 5/(1 + 475 s)",
            Preset::PumpLoop => "loop pump 5/(1 + 0.1 s)",
            Preset::Tank001 => "tank 0.01/(s + 1)",
            Preset::Tank2ndOrder => "second-order tank 5/(s^2 + 0.02241 s + 5)",
            Preset::Cascade => "pump-tank plant 0.05/(0.1 s^2 + 1.1 s + 1)",
            Preset::MeteringPump => "metering pump 1.869/(s^2 + 12.32 s + 0.4582)",
        }
    }

    /// Open-loop transfer function of the preset at unit gain.
    pub fn transfer_function(self) -> TransferFunction {
        match self {
            Preset::MotorMeasured => motor_measured(1.0),
            Preset::MotorSymbolic => motor_tf(&MotorParams::default()).expect("valid defaults"),
            Preset::PumpStorage => pump_tf(5.0, 475.0).expect("valid"),
            Preset::PumpLoop => pump_tf(5.0, 0.1).expect("valid"),
            Preset::Tank001 => tank_tf(&TankParams {
                area: 100.0,
                outflow_r: 0.01,
            })
            .expect("valid"),
            Preset::Tank2ndOrder => tank_second_order(1.0),
            Preset::Cascade => cascade_plant(),
            Preset::MeteringPump => metering_pump_tf(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| {
                let ids: Vec<_> = Preset::ALL.iter().map(|p| p.id()).collect();
                Error::invalid(format!(
                    "unknown preset `{s}` (expected one of {})",
                    ids.join(", ")
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{routh_table, Verdict};

    fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= rel * y.abs().max(1e-300))
    }

    #[test]
    fn symbolic_motor_coefficients() {
        let tf = motor_tf(&MotorParams::default()).unwrap();
        // monic form: divide by L·J = 0.005
        let expected = [1.0, 0.0100005 / 0.005, 1.5725e-4 / 0.005, 0.0];
        assert!(close(tf.den().coeffs(), &expected, 1e-12));
        assert!((tf.num().coeffs()[0] - 0.0125 / 0.005).abs() < 1e-12);
        let no_torque = motor_tf(&MotorParams {
            k_t: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!(no_torque.num().is_zero());
    }

    #[test]
    fn pid_forms() {
        let c = pid_tf(&MOTOR_PID).unwrap();
        assert_eq!(c.num().coeffs(), &[0.00022, 9.51202, 5.6443]);
        assert_eq!(c.den().coeffs(), &[1.0, 0.0]);
        let p = pid_tf(&PidParams::new(3.0, 0.0, 0.0)).unwrap();
        assert_eq!(p, TransferFunction::gain(3.0));
        let t = tank_pid();
        assert!(close(t.num().coeffs(), &[10.764, 179.4, 747.5], 1e-12));
        assert_eq!(t.den().coeffs(), &[1.0, 0.0]);
    }

    #[test]
    fn filtered_pid_matches_parallel_form() {
        let pp = CASCADE_PID_2;
        let c = pid_tf(&pp).unwrap();
        let s = num_complex::Complex64::new(0.3, 2.0);
        let direct = pp.kp + pp.ki / s + pp.kd * pp.n_filter * s / (s + pp.n_filter);
        assert!((c.eval(s) - direct).norm() < 1e-10 * direct.norm());
    }

    #[test]
    fn char_poly_cases() {
        let p = closed_loop_char_poly(
            &TransferFunction::gain(1.0),
            &TransferFunction::integrator(),
        )
        .unwrap();
        assert_eq!(p.coeffs(), &[1.0, 1.0]);
        let g = pump_tf(5.0, 475.0).unwrap();
        let p0 = closed_loop_char_poly(&TransferFunction::gain(0.0), &g).unwrap();
        assert_eq!(p0, g.den().clone());
    }

    #[test]
    fn pump_and_tank() {
        let g = pump_tf(5.0, 475.0).unwrap();
        assert!((g.dc_gain() - 5.0).abs() < 1e-12);
        assert!((g.poles().unwrap()[0].re + 1.0 / 475.0).abs() < 1e-12);
        assert!(pump_tf(5.0, 0.0).is_err());
        let t = tank_tf(&TankParams {
            area: 100.0,
            outflow_r: 0.01,
        })
        .unwrap();
        assert_eq!(t.num().coeffs(), &[0.01]);
        assert_eq!(t.den().coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn valve_tangent() {
        let lin = valve_linearize(&ValveParams {
            c_v: 1.0,
            a_v: 1.0,
            h_0: 1.0,
        })
        .unwrap();
        assert_eq!((lin.f_h0, lin.d_slope, lin.k_v), (1.0, 0.5, 2.0));
        let q = valve_linearize(&ValveParams {
            c_v: 1.0,
            a_v: 1.0,
            h_0: 4.0,
        })
        .unwrap();
        assert_eq!((q.f_h0, q.d_slope), (2.0, 0.25));
        assert!(matches!(
            valve_linearize(&ValveParams {
                c_v: 1.0,
                a_v: 1.0,
                h_0: 0.0
            }),
            Err(Error::SingularLinearization(_))
        ));
        assert!((valve_time_constant(100.0, &lin) - 200.0).abs() < 1e-12);
    }

    #[test]
    fn tank_loop_gain() {
        assert!((tank_loop_tf(2.0, 3.0, 4.0, 1.0).unwrap().dc_gain() - 24.0).abs() < 1e-12);
        assert_eq!(
            tank_loop_tf(1.0, 1.0, 1.0, 1.0).unwrap(),
            TransferFunction::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn second_order_tank() {
        let g = tank_second_order(1.0);
        let wn = 5f64.sqrt();
        let zeta = 0.02241 / (2.0 * wn);
        assert_eq!(second_order(1.0, wn, zeta).unwrap().den().coeffs().len(), 3);
        assert!((zeta - 0.00501).abs() < 1e-5);
        assert!(tank_second_order(0.0).num().is_zero());
        assert!((g.dc_gain() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metering_pump() {
        let g = metering_pump_tf();
        assert!((g.dc_gain() - 4.079).abs() < 1e-3);
        assert!(g.poles().unwrap().iter().all(|p| p.im == 0.0 && p.re < 0.0));
    }

    #[test]
    fn cascade_plant_product() {
        let p = cascade_plant();
        assert!(close(p.num().coeffs(), &[0.5], 1e-15));
        assert!(close(p.den().coeffs(), &[1.0, 11.0, 10.0], 1e-15));
        for k in [1.0, 10.0, 100.0, 1000.0] {
            let cp = closed_loop_char_poly(&TransferFunction::gain(k), &p).unwrap();
            assert_eq!(routh_table(&cp).unwrap().verdict, Verdict::Stable);
        }
    }

    #[test]
    fn presets_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.id().parse::<Preset>().unwrap(), p);
            assert!(p.transfer_function().is_proper());
        }
        assert!("nope".parse::<Preset>().is_err());
    }
}
