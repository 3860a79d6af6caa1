//! Whole-system scenario engine: irradiance and sun path in, tracked PV
//! power through MPPT into a battery, relay-controlled pumps moving water
//! between two tanks and the soil.

use crate::error::{Error, Result};
use crate::geometry::{angle_of_incidence, SunPosition, TrackerOrientation};
use crate::mppt::{duty_for, po_step, MpptState, PoVariant};
use crate::pv::{array_current, default_array, PvArrayParams};
use crate::tracking::{apply_command, ldr_model, tracking_step, TrackerSetup};

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub dt_s: f64,
    /// `(t s, W/m²)` breakpoints, linearly interpolated and held at the ends.
    pub irradiance_profile: Vec<(f64, f64)>,
    /// `(t s, elevation °, azimuth °)` breakpoints.
    pub sun_path: Vec<(f64, f64, f64)>,
    pub cell_temp_k: f64,
    pub battery_capacity_wh: f64,
    pub battery_voltage_v: f64,
    pub soc_init_pct: f64,
    /// Controller and sensor draw, always on.
    pub base_load_w: f64,
    pub tank1_volume_l: f64,
    pub tank2_volume_l: f64,
    pub tank1_init_pct: f64,
    pub tank2_init_pct: f64,
    /// Gravity return from tank 2 to tank 1 through the valve at a full
    /// tank 2; scales with the square root of the level.
    pub valve_return_lpm: f64,
    pub soil_init_pct: f64,
    pub soil_gain_pct_per_l: f64,
    pub soil_decay_pct_per_h: f64,
    pub pump_flow_lpm: f64,
    pub pump_power_w: f64,
    pub pump_tau_s: f64,
    pub tank_low_pct: f64,
    pub tank_full_pct: f64,
    pub soil_dry_pct: f64,
    pub soil_wet_pct: f64,
    pub battery_cutoff_pct: f64,
    pub mppt_dv: f64,
    pub mppt_v_init: f64,
    pub tracker_period_s: f64,
    pub tracker_step_deg: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration_s: 7200.0,
            dt_s: 0.1,
            irradiance_profile: vec![(0.0, 220.0), (7200.0, 260.0)],
            sun_path: vec![(0.0, 20.0, 100.0), (7200.0, 45.0, 140.0)],
            cell_temp_k: 298.0,
            battery_capacity_wh: 84.0,
            battery_voltage_v: 12.0,
            soc_init_pct: 60.0,
            base_load_w: 2.0,
            tank1_volume_l: 39.5,
            tank2_volume_l: 39.5,
            tank1_init_pct: 80.0,
            tank2_init_pct: 30.0,
            valve_return_lpm: 0.5,
            soil_init_pct: 31.0,
            soil_gain_pct_per_l: 2.0,
            soil_decay_pct_per_h: 1.0,
            pump_flow_lpm: 5.0,
            pump_power_w: 60.0,
            pump_tau_s: 0.1,
            tank_low_pct: 20.0,
            tank_full_pct: 90.0,
            soil_dry_pct: 30.0,
            soil_wet_pct: 70.0,
            battery_cutoff_pct: 10.0,
            mppt_dv: 0.5,
            mppt_v_init: 30.0,
            tracker_period_s: 1.0,
            tracker_step_deg: 1.8,
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        check(
            self.dt_s > 0.0 && self.dt_s.is_finite(),
            "dt_s must be positive",
        )?;
        check(
            self.duration_s > 0.0 && self.duration_s.is_finite(),
            "duration_s must be positive",
        )?;
        for (name, v) in [
            ("soc_init_pct", self.soc_init_pct),
            ("tank1_init_pct", self.tank1_init_pct),
            ("tank2_init_pct", self.tank2_init_pct),
            ("soil_init_pct", self.soil_init_pct),
            ("tank_low_pct", self.tank_low_pct),
            ("tank_full_pct", self.tank_full_pct),
            ("soil_dry_pct", self.soil_dry_pct),
            ("soil_wet_pct", self.soil_wet_pct),
            ("battery_cutoff_pct", self.battery_cutoff_pct),
        ] {
            check(
                (0.0..=100.0).contains(&v),
                &format!("{name} must lie in [0, 100], got {v}"),
            )?;
        }
        check(
            self.tank_low_pct < self.tank_full_pct,
            "tank_low_pct must be below tank_full_pct",
        )?;
        check(
            self.soil_dry_pct < self.soil_wet_pct,
            "soil_dry_pct must be below soil_wet_pct",
        )?;
        for (name, v) in [
            ("battery_capacity_wh", self.battery_capacity_wh),
            ("battery_voltage_v", self.battery_voltage_v),
            ("tank1_volume_l", self.tank1_volume_l),
            ("tank2_volume_l", self.tank2_volume_l),
            ("pump_flow_lpm", self.pump_flow_lpm),
            ("pump_tau_s", self.pump_tau_s),
            ("cell_temp_k", self.cell_temp_k),
            ("mppt_dv", self.mppt_dv),
            ("tracker_period_s", self.tracker_period_s),
            ("tracker_step_deg", self.tracker_step_deg),
        ] {
            check(
                v > 0.0 && v.is_finite(),
                &format!("{name} must be positive, got {v}"),
            )?;
        }
        for (name, v) in [
            ("base_load_w", self.base_load_w),
            ("pump_power_w", self.pump_power_w),
            ("valve_return_lpm", self.valve_return_lpm),
            ("soil_gain_pct_per_l", self.soil_gain_pct_per_l),
            ("soil_decay_pct_per_h", self.soil_decay_pct_per_h),
        ] {
            check(
                v >= 0.0 && v.is_finite(),
                &format!("{name} must be non-negative, got {v}"),
            )?;
        }
        check(
            !self.irradiance_profile.is_empty(),
            "irradiance profile is empty",
        )?;
        check(!self.sun_path.is_empty(), "sun path is empty")?;
        check(
            self.irradiance_profile.windows(2).all(|w| w[1].0 > w[0].0),
            "irradiance breakpoints must have increasing times",
        )?;
        check(
            self.sun_path.windows(2).all(|w| w[1].0 > w[0].0),
            "sun path breakpoints must have increasing times",
        )?;
        check(
            self.irradiance_profile.iter().all(|p| p.1 >= 0.0),
            "irradiance must be non-negative",
        )?;
        check(
            self.sun_path.iter().all(|p| (-90.0..=90.0).contains(&p.1)),
            "sun elevation must lie in [-90, 90]",
        )?;
        Ok(())
    }

    pub fn irradiance_at(&self, t: f64) -> f64 {
        interp(&self.irradiance_profile, t, |p| p.0, |p| p.1)
    }

    pub fn sun_at(&self, t: f64) -> SunPosition {
        SunPosition {
            theta_se: interp(&self.sun_path, t, |p| p.0, |p| p.1),
            theta_sa: interp(&self.sun_path, t, |p| p.0, |p| p.2).rem_euclid(360.0),
        }
    }
}

fn interp<T>(pts: &[T], t: f64, time: impl Fn(&T) -> f64, val: impl Fn(&T) -> f64) -> f64 {
    let i = pts.partition_point(|p| time(p) <= t);
    if i == 0 {
        return val(&pts[0]);
    }
    if i == pts.len() {
        return val(&pts[pts.len() - 1]);
    }
    let (a, b) = (&pts[i - 1], &pts[i]);
    let w = (t - time(a)) / (time(b) - time(a));
    val(a) + w * (val(b) - val(a))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RelayState {
    pub pump1: bool,
    pub pump2: bool,
    pub battery_relay: bool,
}

/// Levels the relay logic looks at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Levels {
    pub tank2_pct: f64,
    pub soil_pct: f64,
    pub soc_pct: f64,
}

/// Hysteresis latches: pump 1 refills tank 2 between the low and full marks,
/// pump 2 waters between the dry and wet marks, and the battery relay drops
/// out below the cutoff.
pub fn control_logic_step(state: &RelayState, levels: &Levels, cfg: &ScenarioConfig) -> RelayState {
    let latch = |on: bool, start: bool, stop: bool| if on { !stop } else { start };
    RelayState {
        pump1: latch(
            state.pump1,
            levels.tank2_pct < cfg.tank_low_pct,
            levels.tank2_pct >= cfg.tank_full_pct,
        ),
        pump2: latch(
            state.pump2,
            levels.soil_pct < cfg.soil_dry_pct,
            levels.soil_pct >= cfg.soil_wet_pct,
        ),
        battery_relay: levels.soc_pct >= cfg.battery_cutoff_pct,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PumpState {
    pub flow_lpm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpStep {
    pub flow_lpm: f64,
    /// Volume the pump would move over the step, L.
    pub volume_l: f64,
    pub load_w: f64,
}

impl PumpState {
    /// First-order flow response toward the rated flow (on) or zero (off).
    pub fn step(&mut self, on: bool, dt: f64, cfg: &ScenarioConfig) -> PumpStep {
        let target = if on { cfg.pump_flow_lpm } else { 0.0 };
        let start = self.flow_lpm;
        let decay = (-dt / cfg.pump_tau_s).exp();
        self.flow_lpm = target + (start - target) * decay;
        // exact integral of the exponential approach over the step
        let mean = target + (start - target) * cfg.pump_tau_s / dt * (1.0 - decay);
        PumpStep {
            flow_lpm: self.flow_lpm,
            volume_l: mean * dt / 60.0,
            load_w: cfg.pump_power_w * mean / cfg.pump_flow_lpm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub irradiance: f64,
    pub pv_power_w: f64,
    pub soc_pct: f64,
    pub pump1_on: bool,
    pub pump2_on: bool,
    pub tank2_level_pct: f64,
    pub soil_moisture_pct: f64,
    pub theta_te: f64,
    pub theta_ta: f64,
    pub alpha: f64,
    pub tank1_l: f64,
    pub tank2_l: f64,
    pub delivered_l: f64,
    pub pump1_flow_lpm: f64,
    pub pump2_flow_lpm: f64,
    pub v_ref: f64,
    pub duty: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    pub records: Vec<SimRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSummary {
    pub final_soc_pct: f64,
    pub pump1_starts: usize,
    pub pump2_starts: usize,
    pub pump1_on_s: f64,
    pub pump2_on_s: f64,
    pub water_delivered_l: f64,
    pub pv_energy_wh: f64,
}

impl SimTrace {
    pub const COLUMNS: [&'static str; 11] = [
        "t",
        "irradiance",
        "pv_power_w",
        "soc_pct",
        "pump1_on",
        "pump2_on",
        "tank2_level_pct",
        "soil_moisture_pct",
        "theta_TE",
        "theta_TA",
        "alpha",
    ];

    pub fn summary(&self) -> SimSummary {
        let starts = |f: fn(&SimRecord) -> bool| {
            self.records
                .windows(2)
                .filter(|w| !f(&w[0]) && f(&w[1]))
                .count()
                + usize::from(self.records.first().is_some_and(f))
        };
        let dt = match self.records.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => 0.0,
        };
        let last = self.records.last();
        SimSummary {
            final_soc_pct: last.map_or(0.0, |r| r.soc_pct),
            pump1_starts: starts(|r| r.pump1_on),
            pump2_starts: starts(|r| r.pump2_on),
            pump1_on_s: self.records.iter().filter(|r| r.pump1_on).count() as f64 * dt,
            pump2_on_s: self.records.iter().filter(|r| r.pump2_on).count() as f64 * dt,
            water_delivered_l: last.map_or(0.0, |r| r.delivered_l),
            pv_energy_wh: self.records.iter().map(|r| r.pv_power_w).sum::<f64>() * dt / 3600.0,
        }
    }
}

/// Moves up to `want` litres from `from` to `to`, limited by what `from`
/// holds and the room left in `to`. Returns the amount moved.
fn transfer(from: &mut f64, to: &mut f64, to_cap: f64, want: f64) -> f64 {
    let amount = want.min(*from).min((to_cap - *to).max(0.0)).max(0.0);
    *from -= amount;
    *to += amount;
    amount
}

/// Source volume below which a pump is interlocked off, L.
pub const DRY_RUN_L: f64 = 0.1;

fn pct(v: f64, cap: f64) -> f64 {
    (100.0 * v / cap).clamp(0.0, 100.0)
}

/// Runs the scenario with forward-Euler bookkeeping at `dt_s`, recording
/// every step.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let steps = (cfg.duration_s / cfg.dt_s).round() as usize;
    let tracker_every = ((cfg.tracker_period_s / cfg.dt_s).round() as usize).max(1);
    let setup = TrackerSetup {
        motor_step_deg: cfg.tracker_step_deg,
        ..TrackerSetup::default()
    };
    let mut orientation: TrackerOrientation = setup.start;

    let mut soc = cfg.soc_init_pct;
    let mut tank1 = cfg.tank1_volume_l * cfg.tank1_init_pct / 100.0;
    let mut tank2 = cfg.tank2_volume_l * cfg.tank2_init_pct / 100.0;
    let mut delivered = 0.0;
    let mut soil = cfg.soil_init_pct;
    let mut relay = RelayState::default();
    let (mut pump1, mut pump2) = (PumpState::default(), PumpState::default());
    let mut mppt = MpptState::new(cfg.mppt_v_init, cfg.mppt_dv)?;
    let array_template: PvArrayParams = default_array(1000.0, cfg.cell_temp_k);
    let v_max = 2.0 * cfg.mppt_v_init.max(array_template.n_s as f64);

    let mut records = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * cfg.dt_s;
        let sun = cfg.sun_at(t);
        let irradiance = if sun.theta_se > 0.0 {
            cfg.irradiance_at(t)
        } else {
            0.0
        };

        if k % tracker_every == 0 {
            let readings = ldr_model(&sun, &orientation, irradiance);
            let cmd = tracking_step(&readings, &setup.thresholds);
            orientation = apply_command(&orientation, &cmd, &setup.home, setup.motor_step_deg);
        }
        let alpha = angle_of_incidence(&sun, &orientation);
        let effective = irradiance * alpha.to_radians().cos().max(0.0);

        let array = default_array(effective, cfg.cell_temp_k);
        let v = mppt.v_ref.clamp(0.0, v_max);
        let i = array_current(&array, v)?;
        let pv_power = (v * i).max(0.0);
        let duty = duty_for(cfg.battery_voltage_v, v).duty;

        relay = control_logic_step(
            &relay,
            &Levels {
                tank2_pct: pct(tank2, cfg.tank2_volume_l),
                soil_pct: soil,
                soc_pct: soc,
            },
            cfg,
        );
        // dry-run interlock: a pump with an empty source stays off
        let run1 = relay.pump1 && relay.battery_relay && tank1 > DRY_RUN_L;
        let run2 = relay.pump2 && relay.battery_relay && tank2 > DRY_RUN_L;

        records.push(SimRecord {
            t,
            irradiance,
            pv_power_w: pv_power,
            soc_pct: soc,
            pump1_on: relay.pump1,
            pump2_on: relay.pump2,
            tank2_level_pct: pct(tank2, cfg.tank2_volume_l),
            soil_moisture_pct: soil,
            theta_te: orientation.theta_te,
            theta_ta: orientation.theta_ta,
            alpha,
            tank1_l: tank1,
            tank2_l: tank2,
            delivered_l: delivered,
            pump1_flow_lpm: pump1.flow_lpm,
            pump2_flow_lpm: pump2.flow_lpm,
            v_ref: v,
            duty,
        });
        if k == steps {
            break;
        }

        let dt = cfg.dt_s;
        let p1 = pump1.step(run1, dt, cfg);
        let p2 = pump2.step(run2, dt, cfg);
        transfer(&mut tank1, &mut tank2, cfg.tank2_volume_l, p1.volume_l);
        let watered = transfer(&mut tank2, &mut delivered, f64::INFINITY, p2.volume_l);
        let ret = cfg.valve_return_lpm * (tank2 / cfg.tank2_volume_l).max(0.0).sqrt() * dt / 60.0;
        transfer(&mut tank2, &mut tank1, cfg.tank1_volume_l, ret);

        soil = (soil + cfg.soil_gain_pct_per_l * watered - cfg.soil_decay_pct_per_h * dt / 3600.0)
            .clamp(0.0, 100.0);
        let load = cfg.base_load_w + p1.load_w + p2.load_w;
        soc = (soc + (pv_power - load) * dt / 3600.0 / cfg.battery_capacity_wh * 100.0)
            .clamp(0.0, 100.0);

        mppt = po_step(&mppt, v, i, PoVariant::Standard);
        mppt.v_ref = mppt.v_ref.clamp(0.0, v_max);
    }
    Ok(SimTrace { records })
}
