//! Time-domain step responses and their summary metrics.

use super::TransferFunction;
use crate::error::{Error, Result};

/// Sampled unit-step response.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// Set when the system has a right-half-plane pole or the integration
    /// blew up; the trace may then be truncated.
    pub diverged: bool,
}

impl StepTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Linear interpolation of the response at time `t` (clamped to the trace).
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.t.partition_point(|&ti| ti < t);
        if i == 0 {
            return self.y[0];
        }
        if i >= self.t.len() {
            return *self.y.last().unwrap();
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let w = (t - t0) / (t1 - t0);
        self.y[i - 1] + w * (self.y[i] - self.y[i - 1])
    }
}

/// Summary of a step response. Rise time is measured 10%→90% of the
/// transition and settling uses a ±2% band around the final value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepMetrics {
    pub rise_time_s: f64,
    pub settling_time_s: f64,
    pub overshoot_pct: f64,
    pub peak: f64,
    pub peak_time_s: f64,
    pub steady_state_value: f64,
}

/// Controllable-canonical realisation `x' = A x + B u`, `y = C x + D u`,
/// with `A` stored as the last-row coefficients only.
struct Companion {
    /// `a[i]` multiplies `x[i]` in the last state equation (negated).
    a: Vec<f64>,
    c: Vec<f64>,
    d: f64,
}

impl Companion {
    fn from_tf(tf: &TransferFunction) -> Result<Self> {
        if !tf.is_proper() {
            return Err(Error::Unsupported(
                "step response of an improper transfer function".into(),
            ));
        }
        let den = tf.den();
        let n = den.degree();
        let a: Vec<f64> = (0..n).map(|i| den.coeff(i)).collect();
        let d = tf.num().coeff(n);
        let c: Vec<f64> = (0..n).map(|i| tf.num().coeff(i) - d * a[i]).collect();
        Ok(Self { a, c, d })
    }

    fn deriv(&self, x: &[f64], u: f64, out: &mut [f64]) {
        let n = x.len();
        if n > 0 {
            out[..n - 1].copy_from_slice(&x[1..]);
            out[n - 1] = u - self.a.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>();
        }
    }

    fn output(&self, x: &[f64], u: f64) -> f64 {
        self.c.iter().zip(x).map(|(c, xi)| c * xi).sum::<f64>() + self.d * u
    }
}

fn has_rhp_pole(tf: &TransferFunction) -> Result<bool> {
    Ok(tf.poles()?.iter().any(|p| p.re > 1e-9 * p.norm().max(1.0)))
}

/// Default integration step: a twentieth of the fastest real-part time
/// constant, at most `t_end/2000`, and no more than `0.1/|p|max` so RK4
/// resolves oscillatory poles.
pub fn default_dt(tf: &TransferFunction, t_end: f64) -> Result<f64> {
    let poles = tf.poles()?;
    let mut dt = t_end / 2000.0;
    let max_re = poles.iter().map(|p| p.re.abs()).fold(0.0, f64::max);
    if max_re > 0.0 {
        dt = dt.min(1.0 / max_re / 20.0);
    }
    let max_mod = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if max_mod > 0.0 {
        dt = dt.min(0.1 / max_mod);
    }
    Ok(dt)
}

/// A horizon long enough for a stable system to settle: ten slowest time
/// constants, or 10 s when no pole has a nonzero real part.
pub fn suggest_t_end(tf: &TransferFunction) -> Result<f64> {
    let slowest = tf
        .poles()?
        .iter()
        .map(|p| p.re.abs())
        .filter(|&r| r > 1e-12)
        .fold(f64::INFINITY, f64::min);
    Ok(if slowest.is_finite() {
        10.0 / slowest
    } else {
        10.0
    })
}

/// Unit-step response by fixed-step RK4 on the controllable-canonical
/// state equations.
pub fn step_response(tf: &TransferFunction, t_end: f64, dt: f64) -> Result<StepTrace> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 10.0 * dt) {
        return Err(Error::invalid(format!(
            "t_end ({t_end}) must be at least 10·dt ({dt})"
        )));
    }
    let sys = Companion::from_tf(tf)?;
    let diverged_poles = has_rhp_pole(tf)?;

    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let h = t_end / steps as f64;
    let n = sys.a.len();
    let u = 1.0;

    let mut x = vec![0.0; n];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];

    let mut t = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    t.push(0.0);
    y.push(sys.output(&x, u));
    let mut blew_up = false;

    for step in 1..=steps {
        sys.deriv(&x, u, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        sys.deriv(&tmp, u, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        sys.deriv(&tmp, u, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        sys.deriv(&tmp, u, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let yi = sys.output(&x, u);
        if !yi.is_finite() || yi.abs() > 1e150 {
            blew_up = true;
            break;
        }
        t.push(step as f64 * h);
        y.push(yi);
    }

    Ok(StepTrace {
        t,
        y,
        diverged: diverged_poles || blew_up,
    })
}

/// Step response with the default step size.
pub fn step_response_auto(tf: &TransferFunction, t_end: f64) -> Result<StepTrace> {
    step_response(tf, t_end, default_dt(tf, t_end)?)
}

fn crossing_time(t: &[f64], z: &[f64], level: f64) -> Option<f64> {
    if z[0] >= level {
        return Some(t[0]);
    }
    (1..z.len()).find(|&i| z[i] >= level).map(|i| {
        let w = (level - z[i - 1]) / (z[i] - z[i - 1]);
        t[i - 1] + w * (t[i] - t[i - 1])
    })
}

/// Extracts rise, settling, overshoot and peak from a step trace.
pub fn step_metrics(trace: &StepTrace) -> Result<StepMetrics> {
    if trace.diverged {
        return Err(Error::Diverged);
    }
    let (t, y) = (&trace.t, &trace.y);
    if y.len() < 2 {
        return Err(Error::invalid("trace needs at least two samples"));
    }
    let n = y.len();
    let final_value = y[n - 1];
    let y0 = y[0];

    let tail = &y[n - (n / 20).max(1)..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi - lo > 0.01 * final_value.abs() && hi - lo > 1e-12 {
        return Err(Error::NotSettled(format!(
            "final 5% of samples span {} around {final_value}",
            hi - lo
        )));
    }

    let span = final_value - y0;
    if span == 0.0 {
        return Ok(StepMetrics {
            rise_time_s: 0.0,
            settling_time_s: 0.0,
            overshoot_pct: 0.0,
            peak: final_value,
            peak_time_s: t[0],
            steady_state_value: final_value,
        });
    }

    // progress from y0 (0) to the final value (1)
    let z: Vec<f64> = y.iter().map(|v| (v - y0) / span).collect();
    let t10 = crossing_time(t, &z, 0.1).unwrap_or(t[n - 1]);
    let t90 = crossing_time(t, &z, 0.9).unwrap_or(t[n - 1]);

    let (imax, zmax) = z
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bz), (i, &v)| {
            if v > bz {
                (i, v)
            } else {
                (bi, bz)
            }
        });
    let (mut peak_time, mut zpeak) = (t[imax], zmax);
    if imax > 0 && imax + 1 < n {
        // parabola through the three samples around the maximum
        let (za, zb, zc) = (z[imax - 1], z[imax], z[imax + 1]);
        let denom = za - 2.0 * zb + zc;
        if denom < 0.0 {
            let off = 0.5 * (za - zc) / denom;
            let h = t[imax + 1] - t[imax];
            peak_time = t[imax] + off * h;
            zpeak = zb - 0.25 * (za - zc) * off;
        }
    }
    let peak = y0 + zpeak * span;
    let overshoot_pct = ((zpeak - 1.0) * 100.0).max(0.0);

    let band = 0.02
        * if final_value != 0.0 {
            final_value.abs()
        } else {
            span.abs()
        };
    let settling_time_s = match (0..n).rev().find(|&i| (y[i] - final_value).abs() > band) {
        None => t[0],
        Some(i) if i + 1 >= n => t[n - 1],
        Some(i) => {
            let (e0, e1) = ((y[i] - final_value).abs(), (y[i + 1] - final_value).abs());
            let w = if e0 == e1 {
                0.0
            } else {
                (e0 - band) / (e0 - e1)
            };
            t[i] + w.clamp(0.0, 1.0) * (t[i + 1] - t[i])
        }
    };

    Ok(StepMetrics {
        rise_time_s: (t90 - t10).max(0.0),
        settling_time_s,
        overshoot_pct,
        peak,
        peak_time_s: peak_time,
        steady_state_value: final_value,
    })
}
