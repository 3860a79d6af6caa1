use num_complex::Complex64;

use super::TransferFunction;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse {
    pub omegas: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    /// Continuous phase in degrees.
    pub phase_deg: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Margins {
    pub gain_margin_db: Option<f64>,
    pub gm_freq_rad_s: Option<f64>,
    pub phase_margin_deg: Option<f64>,
    pub pm_freq_rad_s: Option<f64>,
}

/// `n` log-spaced frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// 400 points over 1e-2..1e4 rad/s.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-2, 1e4, 400)
}

/// Phase contribution of the factor `(jω − r)` in degrees, continuous in ω
/// for every root not on the positive imaginary axis.
fn factor_phase(omega: f64, r: Complex64) -> f64 {
    let b = omega - r.im;
    if r.re > 0.0 {
        180.0 - b.atan2(r.re).to_degrees()
    } else {
        b.atan2(-r.re).to_degrees()
    }
}

pub fn frequency_response(tf: &TransferFunction, omegas: &[f64]) -> Result<FrequencyResponse> {
    if omegas.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    if omegas[0] <= 0.0 || omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "frequency grid must be positive and strictly increasing",
        ));
    }
    let zeros = tf.zeros()?;
    let poles = tf.poles()?;
    let k = tf.num().leading();
    let base = if k < 0.0 { 180.0 } else { 0.0 };

    let mut magnitude_db = Vec::with_capacity(omegas.len());
    let mut phase_deg = Vec::with_capacity(omegas.len());
    for &w0 in omegas {
        let mut w = w0;
        if tf.den().eval_complex(Complex64::new(0.0, w)).norm() == 0.0 {
            w *= 1.0 + 1e-12;
        }
        let h = tf.eval(Complex64::new(0.0, w));
        magnitude_db.push(20.0 * h.norm().log10());
        let phase = base + zeros.iter().map(|&z| factor_phase(w, z)).sum::<f64>()
            - poles.iter().map(|&p| factor_phase(w, p)).sum::<f64>();
        phase_deg.push(phase);
    }
    Ok(FrequencyResponse {
        omegas: omegas.to_vec(),
        magnitude_db,
        phase_deg,
    })
}

/// Crossings of `ys` through `level`, as (fraction, index) of the bracketing
/// interval `[i, i+1]`.
fn crossings(ys: &[f64], level: f64) -> Vec<(usize, f64)> {
    ys.windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] < level) != (w[1] < level))
        .map(|(i, w)| (i, (level - w[0]) / (w[1] - w[0])))
        .collect()
}

fn log_interp(omegas: &[f64], i: usize, frac: f64) -> f64 {
    (omegas[i].ln() + frac * (omegas[i + 1].ln() - omegas[i].ln())).exp()
}

fn lin_interp(ys: &[f64], i: usize, frac: f64) -> f64 {
    ys[i] + frac * (ys[i + 1] - ys[i])
}

/// Gain margin at −180° (mod 360°) phase crossings and phase margin at 0 dB
/// crossings. When several crossings exist the smallest margin is reported.
pub fn stability_margins(fr: &FrequencyResponse) -> Margins {
    let mut m = Margins::default();
    let (lo, hi) = fr
        .phase_deg
        .iter()
        .filter(|p| p.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| {
            (a.min(p), b.max(p))
        });

    if lo.is_finite() {
        let k_lo = ((lo + 180.0) / 360.0).floor() as i64;
        let k_hi = ((hi + 180.0) / 360.0).ceil() as i64;
        for k in k_lo..=k_hi {
            let level = -180.0 + 360.0 * k as f64;
            for (i, frac) in crossings(&fr.phase_deg, level) {
                let gm = -lin_interp(&fr.magnitude_db, i, frac);
                if m.gain_margin_db.is_none_or(|cur| gm.abs() < cur.abs()) {
                    m.gain_margin_db = Some(gm);
                    m.gm_freq_rad_s = Some(log_interp(&fr.omegas, i, frac));
                }
            }
        }
    }

    for (i, frac) in crossings(&fr.magnitude_db, 0.0) {
        let phase = lin_interp(&fr.phase_deg, i, frac);
        let pm = (phase + 180.0).rem_euclid(360.0);
        let pm = if pm > 180.0 { pm - 360.0 } else { pm };
        if m.phase_margin_deg.is_none_or(|cur| pm.abs() < cur.abs()) {
            m.phase_margin_deg = Some(pm);
            m.pm_freq_rad_s = Some(log_interp(&fr.omegas, i, frac));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_at_unit_frequency() {
        let fr = frequency_response(&TransferFunction::integrator(), &[1.0]).unwrap();
        assert!(fr.magnitude_db[0].abs() < 1e-12);
        assert!((fr.phase_deg[0] + 90.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_corner() {
        let tf = TransferFunction::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
        let fr = frequency_response(&tf, &[1.0]).unwrap();
        assert!((fr.magnitude_db[0] + 3.0103).abs() < 1e-3);
        assert!((fr.phase_deg[0] + 45.0).abs() < 1e-9);
        let m = stability_margins(&frequency_response(&tf, &default_grid()).unwrap());
        assert!(m.gain_margin_db.is_none());
    }

    #[test]
    fn type_one_second_order_phase_margin() {
        let tf = TransferFunction::from_coeffs(&[1.0], &[1.0, 1.0, 0.0]).unwrap();
        let m = stability_margins(&frequency_response(&tf, &default_grid()).unwrap());
        // ω²(ω²+1) = 1
        let wc = ((5f64.sqrt() - 1.0) / 2.0).sqrt();
        let pm = 180.0 - 90.0 - wc.atan().to_degrees();
        assert!((m.pm_freq_rad_s.unwrap() - wc).abs() < 2e-3 * wc);
        assert!((m.phase_margin_deg.unwrap() - pm).abs() < 0.2);
        assert!((pm - 51.8).abs() < 0.05);
    }

    #[test]
    fn phase_is_continuous_through_minus_180() {
        let tf = TransferFunction::from_coeffs(&[1.0], &[1.0, 3.0, 3.0, 1.0]).unwrap();
        let fr = frequency_response(&tf, &default_grid()).unwrap();
        assert!(fr.phase_deg.windows(2).all(|w| (w[1] - w[0]).abs() < 10.0));
        assert!((fr.phase_deg.last().unwrap() + 270.0).abs() < 1.0);
        // (1 + jω)³ reaches −180° at ω = √3 where |G| = 1/8
        let m = stability_margins(&fr);
        assert!((m.gm_freq_rad_s.unwrap() - 3f64.sqrt()).abs() < 0.01);
        assert!((m.gain_margin_db.unwrap() - 20.0 * 8f64.log10()).abs() < 0.05);
    }

    #[test]
    fn right_half_plane_pole_phase() {
        // 1/(s − 1): phase −180° at DC rising to −90°
        let tf = TransferFunction::from_coeffs(&[1.0], &[1.0, -1.0]).unwrap();
        let fr = frequency_response(&tf, &log_grid(1e-3, 1e3, 50)).unwrap();
        assert!((fr.phase_deg[0] + 180.0).abs() < 0.1);
        assert!((fr.phase_deg.last().unwrap() + 90.0).abs() < 0.1);
    }

    #[test]
    fn pole_on_grid_is_nudged() {
        let tf = TransferFunction::from_coeffs(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        let fr = frequency_response(&tf, &[0.5, 1.0, 2.0]).unwrap();
        assert!(fr.magnitude_db[1].is_finite());
    }

    #[test]
    fn grid_must_increase() {
        let tf = TransferFunction::integrator();
        assert!(frequency_response(&tf, &[1.0, 1.0]).is_err());
        assert!(frequency_response(&tf, &[0.0, 1.0]).is_err());
    }
}
