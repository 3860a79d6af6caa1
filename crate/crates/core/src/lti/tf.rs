use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::Polynomial;
use crate::error::{Error, Result};

/// A rational continuous-time transfer function `num(s) / den(s)`.
///
/// Stored canonically with a monic denominator. Common factors are never
/// cancelled, so a closed loop keeps every pole of its assembly.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DegenerateSystem("zero denominator".into()));
        }
        let k = 1.0 / den.leading();
        Ok(Self {
            num: num.scale(k),
            den: den.scale(k),
        })
    }

    /// Convenience constructor from coefficient slices (highest degree first).
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(
            Polynomial::new(num.to_vec())?,
            Polynomial::new(den.to_vec())?,
        )
    }

    pub fn gain(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
        }
    }

    /// The pure integrator `1/s`.
    pub fn integrator() -> Self {
        Self {
            num: Polynomial::one(),
            den: Polynomial::s(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// `num(0)/den(0)`; infinite when there is a pole at the origin.
    pub fn dc_gain(&self) -> f64 {
        let d = self.den.eval(0.0);
        let n = self.num.eval(0.0);
        if d == 0.0 {
            if n == 0.0 {
                f64::NAN
            } else {
                f64::INFINITY.copysign(n)
            }
        } else {
            n / d
        }
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() || self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    /// Series connection `self · other`.
    pub fn series(&self, other: &Self) -> Self {
        Self {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    /// Parallel connection `self + other`.
    pub fn parallel(&self, other: &Self) -> Self {
        Self {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
    }

    /// Negative feedback `G / (1 + G·H)`.
    pub fn feedback(&self, h: &Self) -> Result<Self> {
        let num = &self.num * &h.den;
        let den = &(&self.den * &h.den) + &(&self.num * &h.num);
        if den.is_zero() {
            return Err(Error::DegenerateSystem(
                "1 + G·H vanishes identically".into(),
            ));
        }
        Self::new(num, den)
    }

    /// Unity negative feedback `G / (1 + G)`.
    pub fn unity_feedback(&self) -> Result<Self> {
        self.feedback(&Self::gain(1.0))
    }
}

/// Negative feedback `G / (1 + G·H)` in canonical form.
pub fn tf_feedback(g: &TransferFunction, h: &TransferFunction) -> Result<TransferFunction> {
    g.feedback(h)
}

impl fmt::Display for TransferFunction {
    /// `num: c_n … c_0 / den: d_m … d_0`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "num: {} / den: {}", self.num, self.den)
    }
}

impl FromStr for TransferFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("expected `num: c… / den: d…`, got `{s}`"));
        let (lhs, rhs) = s.split_once('/').ok_or_else(bad)?;
        let num = lhs.trim().strip_prefix("num:").ok_or_else(bad)?;
        let den = rhs.trim().strip_prefix("den:").ok_or_else(bad)?;
        let parse = |part: &str| -> Result<Polynomial> {
            let coeffs = part
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad coefficient `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            Polynomial::new(coeffs)
        };
        Self::new(parse(num)?, parse(den)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_unity_feedback() {
        let cl = tf_feedback(
            &TransferFunction::integrator(),
            &TransferFunction::gain(1.0),
        )
        .unwrap();
        assert_eq!(cl.num().coeffs(), &[1.0]);
        assert_eq!(cl.den().coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn motor_loop_denominator() {
        let k = 7.0;
        let g = TransferFunction::from_coeffs(&[0.0001563 * k], &[1.2e-8, 7.51e-6, 0.0001625, 0.0])
            .unwrap();
        let cl = g.unity_feedback().unwrap();
        let expected = [1.2e-8, 7.51e-6, 0.0001625, 0.0001563 * k];
        let scale = 1.2e-8;
        for (c, e) in cl.den().coeffs().iter().zip(expected) {
            assert!((c * scale - e).abs() <= 1e-12 * e.abs(), "{c} vs {e}");
        }
    }

    #[test]
    fn open_loop_when_feedback_is_zero() {
        let g = TransferFunction::from_coeffs(&[5.0], &[475.0, 1.0]).unwrap();
        let cl = g.feedback(&TransferFunction::gain(0.0)).unwrap();
        assert_eq!(cl, g);
    }

    #[test]
    fn degenerate_feedback() {
        // G = -1, H = 1 gives 1 + GH = 0
        let g = TransferFunction::gain(-1.0);
        assert!(matches!(
            g.unity_feedback(),
            Err(Error::DegenerateSystem(_))
        ));
    }

    #[test]
    fn text_form_parses_and_prints() {
        let tf: TransferFunction = "num: 5 / den: 475 1".parse().unwrap();
        assert!((tf.dc_gain() - 5.0).abs() < 1e-12);
        let again: TransferFunction = tf.to_string().parse().unwrap();
        assert_eq!(tf, again);
        assert!("5 / 475 1".parse::<TransferFunction>().is_err());
        assert!("num: 1 / den: 0".parse::<TransferFunction>().is_err());
    }

    #[test]
    fn dc_gain_of_integrator_is_infinite() {
        assert!(TransferFunction::integrator().dc_gain().is_infinite());
    }
}
