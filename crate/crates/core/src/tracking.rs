//! Four-quadrant LDR sensing and the dual-axis tracking state machine.

use std::fmt;

use crate::geometry::{
    angle_of_incidence, dot, sun_vector, tracker_basis, SunPosition, TrackerOrientation,
};

/// ADC full-scale count at 1000 W/m² normal incidence.
pub const ADC_FULL_SCALE: f64 = 1023.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LdrReadings {
    pub top_left: u16,
    pub top_right: u16,
    pub bottom_left: u16,
    pub bottom_right: u16,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingThresholds {
    /// Mean reading below which the tracker parks (night).
    pub avgsum_min: f64,
    /// Dead band on the left/right and top/bottom differences.
    pub diff_deadband: f64,
}

impl Default for TrackingThresholds {
    fn default() -> Self {
        Self {
            avgsum_min: 8.0,
            diff_deadband: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AzimuthMove {
    Left,
    Right,
    Hold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElevationMove {
    Up,
    Down,
    Hold,
}

impl fmt::Display for AzimuthMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AzimuthMove::Left => "left",
            AzimuthMove::Right => "right",
            AzimuthMove::Hold => "hold",
        })
    }
}

impl fmt::Display for ElevationMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElevationMove::Up => "up",
            ElevationMove::Down => "down",
            ElevationMove::Hold => "hold",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrackerCommand {
    pub azimuth_move: AzimuthMove,
    pub elevation_move: ElevationMove,
    pub park: bool,
}

impl TrackerCommand {
    pub const PARK: Self = Self {
        azimuth_move: AzimuthMove::Hold,
        elevation_move: ElevationMove::Hold,
        park: true,
    };
}

/// Cosine-response quadrant sensors. Each sensor faces 45° off the panel
/// normal toward its corner; right is `+x'` and top is `+z'`.
pub fn ldr_model(sp: &SunPosition, to: &TrackerOrientation, irradiance: f64) -> LdrReadings {
    let s = sun_vector(sp);
    let (x, y, z) = tracker_basis(to);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let read = |sx: f64, sz: f64| {
        let n = [0, 1, 2].map(|k| h * y[k] + 0.5 * (sx * x[k] + sz * z[k]));
        let v = ADC_FULL_SCALE * irradiance.max(0.0) / 1000.0 * dot(&s, &n).max(0.0);
        v.round().clamp(0.0, ADC_FULL_SCALE) as u16
    };
    LdrReadings {
        top_left: read(-1.0, 1.0),
        top_right: read(1.0, 1.0),
        bottom_left: read(-1.0, -1.0),
        bottom_right: read(1.0, -1.0),
    }
}

pub fn tracking_step(r: &LdrReadings, th: &TrackingThresholds) -> TrackerCommand {
    let (tl, tr, bl, br) = (
        r.top_left as f64,
        r.top_right as f64,
        r.bottom_left as f64,
        r.bottom_right as f64,
    );
    let avgsum = (tl + tr + bl + br) / 4.0;
    if avgsum < th.avgsum_min {
        return TrackerCommand::PARK;
    }
    let diff_azi = (tl + bl) / 2.0 - (tr + br) / 2.0;
    let diff_elev = (tl + tr) / 2.0 - (bl + br) / 2.0;
    let azimuth_move = if diff_azi.abs() <= th.diff_deadband {
        AzimuthMove::Hold
    } else if diff_azi > 0.0 {
        AzimuthMove::Right
    } else {
        AzimuthMove::Left
    };
    let elevation_move = if diff_elev.abs() <= th.diff_deadband {
        ElevationMove::Hold
    } else if diff_elev > 0.0 {
        ElevationMove::Up
    } else {
        ElevationMove::Down
    };
    TrackerCommand {
        azimuth_move,
        elevation_move,
        park: false,
    }
}

/// One motor move. `Right` turns the panel toward its left-hand sensors
/// (decreasing azimuth), `Up` raises the elevation. Parking walks both axes
/// back toward `home`. Elevation stays within [0, 180].
pub fn apply_command(
    to: &TrackerOrientation,
    cmd: &TrackerCommand,
    home: &TrackerOrientation,
    motor_step_deg: f64,
) -> TrackerOrientation {
    let toward = |from: f64, to: f64| from + (to - from).clamp(-motor_step_deg, motor_step_deg);
    if cmd.park {
        let d_ta = crate::geometry::wrap180(home.theta_ta - to.theta_ta);
        let ta = to.theta_ta + d_ta.clamp(-motor_step_deg, motor_step_deg);
        return TrackerOrientation::new(toward(to.theta_te, home.theta_te), ta.rem_euclid(360.0));
    }
    let ta = match cmd.azimuth_move {
        AzimuthMove::Left => to.theta_ta + motor_step_deg,
        AzimuthMove::Right => to.theta_ta - motor_step_deg,
        AzimuthMove::Hold => to.theta_ta,
    };
    let te = match cmd.elevation_move {
        ElevationMove::Up => to.theta_te + motor_step_deg,
        ElevationMove::Down => to.theta_te - motor_step_deg,
        ElevationMove::Hold => to.theta_te,
    };
    TrackerOrientation::new(te.clamp(0.0, 180.0), ta.rem_euclid(360.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackSample {
    pub step: usize,
    /// Orientation after the step's move.
    pub orientation: TrackerOrientation,
    /// Incidence angle after the move.
    pub alpha: f64,
    /// Readings that produced the command.
    pub readings: LdrReadings,
    pub command: TrackerCommand,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackerSetup {
    pub start: TrackerOrientation,
    pub home: TrackerOrientation,
    pub thresholds: TrackingThresholds,
    pub motor_step_deg: f64,
}

impl Default for TrackerSetup {
    fn default() -> Self {
        let home = TrackerOrientation::new(90.0, 180.0);
        Self {
            start: home,
            home,
            thresholds: TrackingThresholds::default(),
            motor_step_deg: 1.8,
        }
    }
}

/// Sense, decide and move once per path entry `(sun, irradiance W/m²)`.
pub fn tracking_sim(
    path: &[(SunPosition, f64)],
    setup: &TrackerSetup,
) -> crate::Result<Vec<TrackSample>> {
    if path.is_empty() {
        return Err(crate::Error::invalid("empty sun path"));
    }
    if !(setup.motor_step_deg > 0.0) {
        return Err(crate::Error::invalid("motor step must be positive"));
    }
    let mut to = setup.start;
    let mut out = Vec::with_capacity(path.len());
    for (step, (sp, irr)) in path.iter().enumerate() {
        let readings = ldr_model(sp, &to, *irr);
        let command = tracking_step(&readings, &setup.thresholds);
        to = apply_command(&to, &command, &setup.home, setup.motor_step_deg);
        out.push(TrackSample {
            step,
            orientation: to,
            alpha: angle_of_incidence(sp, &to),
            readings,
            command,
        });
    }
    Ok(out)
}
