//! Solar position, tracker frames, incidence angles and the closed-form
//! optimal tracker orientation. Angles are degrees at the API boundary.

use crate::error::{Error, Result};

fn sin_d(x: f64) -> f64 {
    x.to_radians().sin()
}

fn cos_d(x: f64) -> f64 {
    x.to_radians().cos()
}

fn acos_d(x: f64) -> Result<f64> {
    if x.abs() > 1.0 + 1e-12 {
        return Err(Error::invalid(format!("acos argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0).acos().to_degrees())
}

/// Wraps an angle to (−180, 180].
pub fn wrap180(x: f64) -> f64 {
    let y = (x + 180.0).rem_euclid(360.0) - 180.0;
    if y == -180.0 {
        180.0
    } else {
        y
    }
}

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SunPosition {
    /// Elevation above the horizon.
    pub theta_se: f64,
    /// Azimuth clockwise from north.
    pub theta_sa: f64,
}

impl SunPosition {
    pub fn new(theta_se: f64, theta_sa: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&theta_se) || !theta_sa.is_finite() {
            return Err(Error::invalid(format!(
                "sun elevation {theta_se} outside [-90, 90]"
            )));
        }
        Ok(Self {
            theta_se,
            theta_sa: theta_sa.rem_euclid(360.0),
        })
    }

    pub fn theta_sz(&self) -> f64 {
        90.0 - self.theta_se
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackerOrientation {
    pub theta_te: f64,
    pub theta_ta: f64,
}

impl TrackerOrientation {
    pub fn new(theta_te: f64, theta_ta: f64) -> Self {
        Self { theta_te, theta_ta }
    }

    pub fn theta_tilt(&self) -> f64 {
        (90.0 - self.theta_te).abs()
    }
}

/// Solar declination for day-of-year `n`.
pub fn declination(n: u32) -> f64 {
    -23.45 * cos_d(360.0 / 365.0 * (n as f64 + 10.0))
}

/// Zenith and elevation from latitude, declination and hour angle.
pub fn zenith_and_elevation(l_st: f64, delta: f64, st: f64) -> Result<(f64, f64)> {
    let arg = sin_d(l_st) * sin_d(delta) + cos_d(l_st) * cos_d(delta) * cos_d(st);
    let z = acos_d(arg)?;
    Ok((z, 90.0 - z))
}

/// Sun azimuth clockwise from north, from latitude, declination and hour
/// angle. Afternoon hour angles are positive and put the sun in the west.
pub fn solar_azimuth(l_st: f64, delta: f64, st: f64) -> f64 {
    let east = -cos_d(delta) * sin_d(st);
    let north = cos_d(l_st) * sin_d(delta) - sin_d(l_st) * cos_d(delta) * cos_d(st);
    east.atan2(north).to_degrees().rem_euclid(360.0)
}

/// Unit vector toward the sun in (east, north, up) coordinates.
pub fn sun_vector(sp: &SunPosition) -> Vec3 {
    let (se, sa) = (sp.theta_se, sp.theta_sa);
    [sin_d(sa) * cos_d(se), cos_d(sa) * cos_d(se), sin_d(se)]
}

/// Right-handed tracker frame `(x', y', z')`: `x'` horizontal along the
/// elevation axis, `y'` the panel normal, `z'` the in-plane "up" direction.
pub fn tracker_basis(to: &TrackerOrientation) -> (Vec3, Vec3, Vec3) {
    let (te, ta) = (to.theta_te, to.theta_ta);
    let x = [cos_d(ta), -sin_d(ta), 0.0];
    let y = [sin_d(ta) * cos_d(te), cos_d(ta) * cos_d(te), sin_d(te)];
    let z = [-sin_d(te) * sin_d(ta), -sin_d(te) * cos_d(ta), cos_d(te)];
    (x, y, z)
}

pub fn angle_of_incidence(sp: &SunPosition, to: &TrackerOrientation) -> f64 {
    let arg = sin_d(sp.theta_se) * sin_d(to.theta_te)
        + cos_d(sp.theta_se) * cos_d(to.theta_te) * cos_d(sp.theta_sa - to.theta_ta);
    arg.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Closed-form `(s·x', s·z')`.
pub fn incidence_projections(sp: &SunPosition, to: &TrackerOrientation) -> (f64, f64) {
    let (se, sa, te, ta) = (sp.theta_se, sp.theta_sa, to.theta_te, to.theta_ta);
    let sx = cos_d(se) * sin_d(sa - ta);
    let sz = sin_d(se) * cos_d(te) - cos_d(se) * sin_d(te) * cos_d(sa - ta);
    (sx, sz)
}

/// In-plane bearing of the sun on the tracker face, (−180, 180].
pub fn incidence_direction(sp: &SunPosition, to: &TrackerOrientation) -> Result<f64> {
    let (sx, sz) = incidence_projections(sp, to);
    if sx.abs() < 1e-12 && sz.abs() < 1e-12 {
        return Err(Error::UndefinedDirection);
    }
    Ok(wrap180(sx.atan2(sz).to_degrees()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncidenceResult {
    pub alpha: f64,
    pub beta: Option<f64>,
}

pub fn incidence(sp: &SunPosition, to: &TrackerOrientation) -> IncidenceResult {
    IncidenceResult {
        alpha: angle_of_incidence(sp, to),
        beta: incidence_direction(sp, to).ok(),
    }
}

/// `a w⁴ + b w² + c` with the intermediates it is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// cos θ_SE
    pub c_se: f64,
    /// sin θ_SE
    pub n_se: f64,
    /// tan β
    pub d_beta: f64,
    /// cos α
    pub a_alpha: f64,
}

impl QuarticCoeffs {
    /// The even quartic whose roots are `cos θ_TE` for a tracker that sees
    /// the sun at incidence `alpha` and direction `beta`.
    pub fn new(sp: &SunPosition, alpha: f64, beta: f64) -> Self {
        let c_se = cos_d(sp.theta_se);
        let n_se = sin_d(sp.theta_se);
        let d = beta.to_radians().tan();
        let a_al = cos_d(alpha);
        let (p, k, m) = Self::pkm(n_se, d, a_al);
        Self {
            a: k * k,
            b: m - 2.0 * p * k,
            c: p * p - m,
            c_se,
            n_se,
            d_beta: d,
            a_alpha: a_al,
        }
    }

    fn pkm(n: f64, d: f64, a: f64) -> (f64, f64, f64) {
        let p = (1.0 + d * d) * (a * a + n * n);
        let k = 1.0 + d * d * a * a;
        let m = 4.0 * n * n * a * a * (1.0 + d * d).powi(2);
        (p, k, m)
    }

    /// `sin θ_TE` paired with a root `R = cos θ_TE`, from the linear relation
    /// left after eliminating the azimuth.
    pub fn f_of(&self, r: f64) -> f64 {
        let (n, d, a) = (self.n_se, self.d_beta, self.a_alpha);
        let (p, k, _) = Self::pkm(n, d, a);
        let den = 2.0 * n * a * (1.0 + d * d);
        if den.abs() < 1e-12 {
            (1.0 - r * r).max(0.0).sqrt()
        } else {
            (p - r * r * k) / den
        }
    }

    /// `(G, H)`, proportional to `(sin φ, cos φ)` with `φ = θ_SA − θ_TA`.
    pub fn gh_of(&self, r: f64, f: f64) -> (f64, f64) {
        let (n, d, a) = (self.n_se, self.d_beta, self.a_alpha);
        let s = r.signum();
        (s * d * (n - f * a), s * (a - n * f))
    }
}

/// Real roots `w` of `a w⁴ + b w² + c = 0` via `u = w²`.
pub fn quartic_even_roots(qc: &QuarticCoeffs) -> Vec<f64> {
    let (a, b, c) = (qc.a, qc.b, qc.c);
    let scale = a.abs() + b.abs() + c.abs();
    let mut us = Vec::new();
    if a == 0.0 {
        if b != 0.0 {
            us.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        // a double root (alpha = 0) can round to a slightly negative discriminant
        if disc >= -1e-12 * (b * b + 4.0 * (a * c).abs()) {
            let sq = disc.max(0.0).sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            if q == 0.0 {
                us.push(0.0);
            } else {
                us.push(q / a);
                us.push(c / q);
            }
        }
    }
    let mut ws = Vec::new();
    for u in us {
        if u < -1e-12 {
            continue;
        }
        let w = u.max(0.0).sqrt();
        for cand in if w == 0.0 { vec![0.0] } else { vec![w, -w] } {
            let res = a * cand.powi(4) + b * cand * cand + c;
            if res.abs() < 1e-8 * scale && !ws.contains(&cand) {
                ws.push(cand);
            }
        }
    }
    ws.sort_by(f64::total_cmp);
    ws
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientationSolution {
    pub orientation: TrackerOrientation,
    pub achieved_alpha: f64,
    pub achieved_beta: Option<f64>,
    /// Max-norm distance of the achieved angles from the targets, degrees.
    pub error_deg: f64,
    /// No quartic root met the tolerance; the grid search result is returned.
    pub analytic_miss: bool,
}

/// Targets with `alpha` this small leave `beta` meaningless.
const ALPHA_ONLY: f64 = 1e-6;

fn orientation_error(sp: &SunPosition, to: &TrackerOrientation, alpha: f64, beta: f64) -> f64 {
    let da = (angle_of_incidence(sp, to) - alpha).abs();
    if alpha < ALPHA_ONLY {
        return da;
    }
    match incidence_direction(sp, to) {
        Ok(b) => da.max(wrap180(b - beta).abs()),
        Err(_) => f64::INFINITY,
    }
}

fn solution(
    sp: &SunPosition,
    to: TrackerOrientation,
    alpha: f64,
    beta: f64,
    miss: bool,
) -> OrientationSolution {
    OrientationSolution {
        orientation: to,
        achieved_alpha: angle_of_incidence(sp, &to),
        achieved_beta: incidence_direction(sp, &to).ok(),
        error_deg: orientation_error(sp, &to, alpha, beta),
        analytic_miss: miss,
    }
}

/// Tracker elevation and azimuth that see the sun at incidence `alpha` and
/// in-plane direction `beta`. Every real quartic root is tried and the one
/// whose achieved angles are closest to the targets is kept; if none is
/// within 0.5° a grid search is used instead.
pub fn optimal_orientation(sp: &SunPosition, alpha: f64, beta: f64) -> Result<OrientationSolution> {
    if !(0.0..90.0).contains(&alpha) || !beta.is_finite() {
        return Err(Error::invalid(format!(
            "targets out of range: alpha={alpha}, beta={beta}"
        )));
    }
    let qc = QuarticCoeffs::new(sp, alpha, beta);
    let mut best: Option<OrientationSolution> = None;
    if qc.d_beta.is_finite() && qc.d_beta.abs() < 1e12 {
        for r in quartic_even_roots(&qc) {
            let f = qc.f_of(r);
            let te = f.atan2(r).to_degrees();
            let (g, h) = qc.gh_of(r, f);
            let ta = (sp.theta_sa - g.atan2(h).to_degrees()).rem_euclid(360.0);
            let cand = solution(sp, TrackerOrientation::new(te, ta), alpha, beta, false);
            if best.is_none_or(|b| cand.error_deg < b.error_deg) {
                best = Some(cand);
            }
        }
    }
    match best {
        Some(b) if b.error_deg < 0.5 => Ok(b),
        _ => Ok(grid_orientation(sp, alpha, beta)),
    }
}

/// Exhaustive search: a 1° sweep of elevation [0, 180] and azimuth [0, 360),
/// refined on a 0.1° grid around the best cell.
pub fn grid_orientation(sp: &SunPosition, alpha: f64, beta: f64) -> OrientationSolution {
    let err =
        |te: f64, ta: f64| orientation_error(sp, &TrackerOrientation::new(te, ta), alpha, beta);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=180 {
        for j in 0..360 {
            let (te, ta) = (i as f64, j as f64);
            let e = err(te, ta);
            if e < best.0 {
                best = (e, te, ta);
            }
        }
    }
    let (_, te0, ta0) = best;
    for i in -20..=20 {
        for j in -20..=20 {
            let te = (te0 + i as f64 * 0.1).clamp(0.0, 180.0);
            let ta = (ta0 + j as f64 * 0.1).rem_euclid(360.0);
            let e = err(te, ta);
            if e < best.0 {
                best = (e, te, ta);
            }
        }
    }
    solution(
        sp,
        TrackerOrientation::new(best.1, best.2),
        alpha,
        beta,
        true,
    )
}
