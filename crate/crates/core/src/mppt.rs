//! Perturb-and-Observe and Incremental-Conductance reference-voltage laws
//! and the boost converter relation.

use crate::error::{Error, Result};
use crate::pv::{array_current, PvArrayParams};

/// Anything that returns a current for a terminal voltage.
pub trait PvSource {
    fn current(&self, v: f64) -> Result<f64>;
}

impl PvSource for PvArrayParams {
    fn current(&self, v: f64) -> Result<f64> {
        array_current(self, v)
    }
}

impl<F: Fn(f64) -> f64> PvSource for F {
    fn current(&self, v: f64) -> Result<f64> {
        Ok(self(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpptEvent {
    Increase,
    Decrease,
    Hold,
    /// Conductance undefined at `V = 0`; reference held.
    HoldUndefined,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpptState {
    pub v_prev: f64,
    pub i_prev: f64,
    pub p_prev: f64,
    pub v_ref: f64,
    pub dv_step: f64,
    pub iteration: u64,
    pub last_event: Option<MpptEvent>,
}

impl MpptState {
    /// Fresh state at `v_ref` with an empty history.
    pub fn new(v_ref: f64, dv_step: f64) -> Result<Self> {
        if !(dv_step > 0.0) {
            return Err(Error::invalid(format!(
                "dV step must be positive, got {dv_step}"
            )));
        }
        Ok(Self {
            v_prev: v_ref,
            i_prev: 0.0,
            p_prev: 0.0,
            v_ref,
            dv_step,
            iteration: 0,
            last_event: None,
        })
    }

    fn advance(&self, v: f64, i: f64, event: MpptEvent) -> Self {
        let v_ref = match event {
            MpptEvent::Increase => self.v_ref + self.dv_step,
            MpptEvent::Decrease => self.v_ref - self.dv_step,
            MpptEvent::Hold | MpptEvent::HoldUndefined => self.v_ref,
        };
        Self {
            v_prev: v,
            i_prev: i,
            p_prev: v * i,
            v_ref,
            iteration: self.iteration + 1,
            last_event: Some(event),
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PoVariant {
    /// Climb toward higher power: step in the direction of the last move
    /// when power rose, reverse when it fell.
    #[default]
    Standard,
    /// Branch table with the directions swapped, kept for comparison.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    PerturbObserve(PoVariant),
    IncrementalConductance,
}

pub fn po_step(st: &MpptState, v_now: f64, i_now: f64, variant: PoVariant) -> MpptState {
    let dp = v_now * i_now - st.p_prev;
    let dv = v_now - st.v_prev;
    let event = if dp == 0.0 {
        MpptEvent::Hold
    } else {
        let same = (dp > 0.0) == (dv >= 0.0);
        match (same, variant) {
            (true, PoVariant::Standard) | (false, PoVariant::Printed) => MpptEvent::Increase,
            _ => MpptEvent::Decrease,
        }
    };
    st.advance(v_now, i_now, event)
}

pub fn ic_step(st: &MpptState, v_now: f64, i_now: f64) -> MpptState {
    let dv = v_now - st.v_prev;
    let di = i_now - st.i_prev;
    let event = if dv == 0.0 {
        if di == 0.0 {
            MpptEvent::Hold
        } else if di > 0.0 {
            MpptEvent::Increase
        } else {
            MpptEvent::Decrease
        }
    } else if v_now == 0.0 {
        MpptEvent::HoldUndefined
    } else {
        let g = di / dv;
        let target = -i_now / v_now;
        if (g - target).abs() <= 1e-6 * g.abs().max(target.abs()) {
            MpptEvent::Hold
        } else if g > target {
            MpptEvent::Increase
        } else {
            MpptEvent::Decrease
        }
    };
    st.advance(v_now, i_now, event)
}

pub fn mppt_step(st: &MpptState, v_now: f64, i_now: f64, algo: Algorithm) -> MpptState {
    match algo {
        Algorithm::PerturbObserve(variant) => po_step(st, v_now, i_now, variant),
        Algorithm::IncrementalConductance => ic_step(st, v_now, i_now),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpptSample {
    pub iter: u64,
    /// Operating voltage at which the sample was measured.
    pub v_ref: f64,
    pub i: f64,
    pub p: f64,
}

#[derive(Debug)]
pub struct MpptRun {
    pub trajectory: Vec<MpptSample>,
    pub final_state: MpptState,
    /// Solver error that cut the run short.
    pub error: Option<Error>,
}

/// Closes the loop against `source`: each iteration operates at the current
/// reference, measures the current and applies the update law.
pub fn mppt_run<S: PvSource + ?Sized>(
    source: &S,
    algo: Algorithm,
    st0: MpptState,
    steps: usize,
) -> Result<MpptRun> {
    if steps == 0 {
        return Err(Error::invalid("steps must be at least 1"));
    }
    let mut st = st0;
    let mut trajectory = Vec::with_capacity(steps);
    for _ in 0..steps {
        let v = st.v_ref;
        let i = match source.current(v) {
            Ok(i) => i,
            Err(e) => {
                return Ok(MpptRun {
                    trajectory,
                    final_state: st,
                    error: Some(e),
                });
            }
        };
        trajectory.push(MpptSample {
            iter: st.iteration,
            v_ref: v,
            i,
            p: v * i,
        });
        st = mppt_step(&st, v, i, algo);
    }
    Ok(MpptRun {
        trajectory,
        final_state: st,
        error: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConverterSetting {
    pub duty: f64,
}

/// `V_out / V_in = 1 / (1 − D)`.
pub fn boost_ratio(cs: &ConverterSetting) -> Result<f64> {
    if !(0.0..1.0).contains(&cs.duty) {
        return Err(Error::InvalidDuty(cs.duty));
    }
    Ok(1.0 / (1.0 - cs.duty))
}

/// Duty cycle that boosts the panel reference up to the battery voltage,
/// clamped to `[0, 0.95]`.
pub fn duty_for(v_battery: f64, v_ref: f64) -> ConverterSetting {
    let d = if v_ref > 0.0 {
        1.0 - v_battery / v_ref
    } else {
        0.0
    };
    ConverterSetting {
        duty: d.clamp(0.0, 0.95),
    }
}
