//! Real polynomials with coefficients stored highest degree first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A real polynomial `c[0]·s^n + c[1]·s^(n-1) + … + c[n]`.
///
/// Leading zeros are stripped on construction, so the leading coefficient is
/// nonzero unless the polynomial is identically zero (stored as `[0.0]`).
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("polynomial needs at least one coefficient"));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite polynomial coefficient {c}"
            )));
        }
        Ok(Self::normalized(coeffs))
    }

    /// Builds a polynomial from a slice of already-finite coefficients.
    ///
    /// Panics if the slice is empty or holds a non-finite value; intended for
    /// literals in code.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        Self::new(coeffs.to_vec()).expect("valid polynomial literal")
    }

    pub fn constant(c: f64) -> Self {
        Self::normalized(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Self::normalized(vec![1.0, 0.0])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_real_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            &acc * &Self::normalized(vec![1.0, -r])
        })
    }

    fn normalized(mut coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        match first {
            Some(i) => {
                coeffs.drain(..i);
            }
            None => coeffs = vec![0.0],
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of `s^power` (zero beyond the degree).
    pub fn coeff(&self, power: usize) -> f64 {
        let n = self.degree();
        if power > n {
            0.0
        } else {
            self.coeffs[n - power]
        }
    }

    /// Sum of absolute coefficient values.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::normalized(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero();
        }
        Self::normalized(
            self.coeffs[..n]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (n - i) as f64)
                .collect(),
        )
    }

    /// Divides through by the leading coefficient.
    pub fn monic(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DegenerateSystem(
                "zero polynomial has no monic form".into(),
            ));
        }
        Ok(self.scale(1.0 / self.leading()))
    }

    /// Multiplicity of the root at `s = 0`.
    pub fn zero_root_multiplicity(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        self.coeffs.iter().rev().take_while(|&&c| c == 0.0).count()
    }

    /// All complex roots with multiplicity, sorted by real then imaginary part.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::invalid("zero polynomial has no defined roots"));
        }
        if self.degree() == 0 {
            return Err(Error::invalid("constant polynomial has no roots"));
        }
        let mut roots = find_roots(&self.coeffs);
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }

    /// `|p(r)| / (‖p‖₁ · max(1,|r|)^n)`, the scale-free residual used to
    /// accept a computed root.
    pub fn relative_residual(&self, r: Complex64) -> f64 {
        let n = self.degree() as i32;
        self.eval_complex(r).norm() / (self.l1_norm() * r.norm().max(1.0).powi(n))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let pad = |p: &Polynomial, i: usize| {
            let off = n - p.coeffs.len();
            if i < off {
                0.0
            } else {
                p.coeffs[i - off]
            }
        };
        Polynomial::normalized((0..n).map(|i| pad(self, i) + pad(rhs, i)).collect())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::normalized(out)
    }
}

impl fmt::Display for Polynomial {
    /// Whitespace-separated coefficients, highest degree first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

const MAX_ITERATIONS: usize = 500;

/// Aberth–Ehrlich simultaneous iteration seeded from the Newton polygon,
/// followed by a Newton polish against the original coefficients.
fn find_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let zeros = coeffs.iter().rev().take_while(|&&c| c == 0.0).count();
    let reduced = &coeffs[..coeffs.len() - zeros];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let n = reduced.len() - 1;
    match n {
        0 => {}
        1 => roots.push(Complex64::new(-reduced[1] / reduced[0], 0.0)),
        _ => {
            let mut z = initial_guesses(reduced);
            aberth(reduced, &mut z);
            for r in z.iter_mut() {
                polish(reduced, r);
                if r.im.abs() <= 1e-14 * r.norm() {
                    r.im = 0.0;
                }
            }
            roots.extend(z);
        }
    }
    roots
}

fn horner_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(coeffs[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(k, ln|a_k|)`, so clusters of very different magnitude each get seeds.
fn initial_guesses(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    // ascending powers
    let pts: Vec<(usize, f64)> = (0..=n)
        .filter_map(|k| {
            let c = coeffs[n - k];
            (c != 0.0).then(|| (k, c.abs().ln()))
        })
        .collect();

    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross =
                (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let m = j - i;
        let radius = ((li - lj) / m as f64).exp();
        for k in 0..m {
            let theta =
                2.0 * std::f64::consts::PI * (k as f64 / m as f64 + i as f64 / n as f64) + 0.4;
            guesses.push(Complex64::from_polar(radius, theta));
        }
    }
    guesses
}

fn aberth(coeffs: &[f64], z: &mut [Complex64]) {
    let n = z.len();
    for _ in 0..MAX_ITERATIONS {
        let mut converged = true;
        for k in 0..n {
            let (p, dp) = horner_with_derivative(coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !step.is_finite() {
                continue;
            }
            z[k] -= step;
            if step.norm() > 1e-15 * z[k].norm().max(1e-300) {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
}

fn polish(coeffs: &[f64], z: &mut Complex64) {
    for _ in 0..3 {
        let (p, dp) = horner_with_derivative(coeffs, *z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            return;
        }
        let candidate = *z - p / dp;
        let (pc, _) = horner_with_derivative(coeffs, candidate);
        if candidate.is_finite() && pc.norm() < p.norm() {
            *z = candidate;
        } else {
            return;
        }
    }
}
