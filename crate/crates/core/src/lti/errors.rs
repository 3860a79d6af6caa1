use super::TransferFunction;
use crate::error::{Error, Result};

/// Static error constants of an open loop under unity feedback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorConstants {
    /// Poles at the origin minus zeros at the origin.
    pub system_type: i32,
    pub kp_pos: f64,
    pub kv_vel: f64,
    pub ka_acc: f64,
    pub e_step: f64,
    pub e_ramp: f64,
    pub e_parabola: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Step,
    Ramp,
    Parabola,
}

impl ErrorConstants {
    pub fn error(&self, kind: ErrorKind) -> f64 {
        match kind {
            ErrorKind::Step => self.e_step,
            ErrorKind::Ramp => self.e_ramp,
            ErrorKind::Parabola => self.e_parabola,
        }
    }
}

fn reciprocal(k: f64) -> f64 {
    if k.is_infinite() {
        0.0
    } else if k == 0.0 {
        f64::INFINITY
    } else {
        1.0 / k
    }
}

pub fn error_constants(g: &TransferFunction) -> ErrorConstants {
    let (num, den) = (g.num(), g.den());
    if num.is_zero() {
        return ErrorConstants {
            system_type: 0,
            kp_pos: 0.0,
            kv_vel: 0.0,
            ka_acc: 0.0,
            e_step: 1.0,
            e_ramp: f64::INFINITY,
            e_parabola: f64::INFINITY,
        };
    }
    let zn = num.zero_root_multiplicity();
    let zd = den.zero_root_multiplicity();
    let system_type = zd as i32 - zn as i32;
    // G(s) = s^-type · g0(s) with g0(0) finite and nonzero
    let g0 = num.coeff(zn) / den.coeff(zd);
    let limit = |m: i32| {
        if m > system_type {
            0.0
        } else if m == system_type {
            g0
        } else {
            f64::INFINITY.copysign(g0)
        }
    };
    let (kp, kv, ka) = (limit(0), limit(1), limit(2));
    let e_step = if kp.is_infinite() {
        0.0
    } else if kp == -1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 + kp)
    };
    ErrorConstants {
        system_type,
        kp_pos: kp,
        kv_vel: kv,
        ka_acc: ka,
        e_step,
        e_ramp: reciprocal(kv),
        e_parabola: reciprocal(ka),
    }
}

/// Error constants of `K·template` over a gain sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct GainSweep {
    template: TransferFunction,
    pub kind: ErrorKind,
    pub points: Vec<(f64, ErrorConstants)>,
}

impl GainSweep {
    fn error_at(&self, k: f64) -> f64 {
        error_constants(&self.template.scale(k)).error(self.kind)
    }

    /// Smallest swept gain meeting `e ≤ target`, refined by bisection
    /// inside the bracketing interval. `None` when no swept gain reaches it.
    pub fn gain_for(&self, target: f64) -> Option<f64> {
        let first = self.points.first()?;
        if first.1.error(self.kind) <= target {
            return Some(first.0);
        }
        let i = self
            .points
            .iter()
            .position(|(_, ec)| ec.error(self.kind) <= target)?;
        let (mut lo, mut hi) = (self.points[i - 1].0, self.points[i].0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.error_at(mid) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        Some(hi)
    }
}

/// Sweeps `G(K) = K·template` over ascending positive gains.
pub fn ss_error_vs_gain(
    template: &TransferFunction,
    gains: &[f64],
    kind: ErrorKind,
) -> Result<GainSweep> {
    if gains.is_empty() {
        return Err(Error::invalid("empty gain list"));
    }
    if gains.windows(2).any(|w| w[1] <= w[0]) || gains[0] <= 0.0 {
        return Err(Error::invalid("gains must be positive and ascending"));
    }
    let points = gains
        .iter()
        .map(|&k| (k, error_constants(&template.scale(k))))
        .collect();
    Ok(GainSweep {
        template: template.clone(),
        kind,
        points,
    })
}
