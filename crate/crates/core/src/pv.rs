//! Double-diode photovoltaic cell and array model.

use crate::error::{Error, Result};

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.381e-23;
/// Elementary charge, C.
pub const Q: f64 = 1.602e-19;

/// `a·k_B·T_c/q`.
pub fn thermal_voltage(a: f64, t_c: f64) -> f64 {
    a * K_B * t_c / Q
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvCellParams {
    /// Photocurrent, A.
    pub i_ph: f64,
    /// Diffusion diode saturation current, A.
    pub i_o1: f64,
    /// Recombination diode saturation current, A.
    pub i_o2: f64,
    pub r_s: f64,
    pub r_p: f64,
    pub a1: f64,
    pub a2: f64,
    /// Cell temperature, K.
    pub t_c: f64,
}

impl PvCellParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.i_ph >= 0.0
            && self.i_o1 > 0.0
            && self.i_o2 > 0.0
            && self.r_s >= 0.0
            && self.r_p > 0.0
            && (0.5..=3.0).contains(&self.a1)
            && (0.5..=3.0).contains(&self.a2)
            && self.t_c > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "cell parameters out of range: {self:?}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvArrayParams {
    pub cell: PvCellParams,
    pub n_s: u32,
    pub n_p: u32,
    /// Collector area, m².
    pub area: f64,
    /// Plane-of-array irradiance, W/m².
    pub irradiance: f64,
}

impl PvArrayParams {
    pub fn validate(&self) -> Result<()> {
        self.cell.validate()?;
        if self.n_s == 0 || self.n_p == 0 {
            return Err(Error::invalid("N_s and N_p must be at least 1"));
        }
        if !(self.area > 0.0) || !(self.irradiance >= 0.0) {
            return Err(Error::invalid(
                "area must be positive and irradiance non-negative",
            ));
        }
        Ok(())
    }

    /// Same array under a different irradiance and cell temperature, using
    /// the reference module data for the photocurrent and saturation currents.
    pub fn at_conditions(&self, reference: &PvReference, irradiance: f64, t_c: f64) -> Self {
        Self {
            cell: reference.cell_at(irradiance, t_c),
            irradiance,
            ..*self
        }
    }
}

/// Reference data from which operating-point cell parameters are derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvReference {
    /// Photocurrent at 1000 W/m².
    pub i_ph_stc: f64,
    pub i_o1_ref: f64,
    pub i_o2_ref: f64,
    pub r_s: f64,
    pub r_p: f64,
    pub a1: f64,
    pub a2: f64,
    /// Temperature at which the saturation currents are given, K.
    pub t_ref: f64,
    /// Band gap, eV.
    pub e_gap_ev: f64,
}

impl Default for PvReference {
    fn default() -> Self {
        Self {
            i_ph_stc: 8.0,
            i_o1_ref: 1e-10,
            i_o2_ref: 1e-6,
            r_s: 0.01,
            r_p: 100.0,
            a1: 1.0,
            a2: 2.0,
            t_ref: 298.0,
            e_gap_ev: 1.12,
        }
    }
}

impl PvReference {
    /// `I_o(T) = I_o,ref·(T/T_ref)³·exp(q·E_g/(a·k_B)·(1/T_ref − 1/T))`.
    fn saturation(&self, i_ref: f64, a: f64, t_c: f64) -> f64 {
        let ratio = t_c / self.t_ref;
        i_ref
            * ratio.powi(3)
            * (Q * self.e_gap_ev / (a * K_B) * (1.0 / self.t_ref - 1.0 / t_c)).exp()
    }

    pub fn cell_at(&self, irradiance: f64, t_c: f64) -> PvCellParams {
        PvCellParams {
            i_ph: self.i_ph_stc * irradiance / 1000.0,
            i_o1: self.saturation(self.i_o1_ref, self.a1, t_c),
            i_o2: self.saturation(self.i_o2_ref, self.a2, t_c),
            r_s: self.r_s,
            r_p: self.r_p,
            a1: self.a1,
            a2: self.a2,
            t_c,
        }
    }
}

/// Default 60-cell, 1.6 m² array. The parameters are illustrative.
pub fn default_array(irradiance: f64, t_c: f64) -> PvArrayParams {
    PvArrayParams {
        cell: PvReference::default().cell_at(irradiance, t_c),
        n_s: 60,
        n_p: 1,
        area: 1.6,
        irradiance,
    }
}

/// Residual `I − RHS(I)` of the array equation; strictly increasing in `I`.
fn array_residual(ap: &PvArrayParams, v: f64, i: f64) -> (f64, f64) {
    let c = &ap.cell;
    let (ns, np) = (ap.n_s as f64, ap.n_p as f64);
    let rs = c.r_s * ns / np;
    let rp = c.r_p * ns / np;
    let vt1 = ns * thermal_voltage(c.a1, c.t_c);
    let vt2 = ns * thermal_voltage(c.a2, c.t_c);
    let x = v + i * rs;
    let e1 = (x / vt1).exp();
    let e2 = (x / vt2).exp();
    let rhs = np * c.i_ph - np * c.i_o1 * (e1 - 1.0) - np * c.i_o2 * (e2 - 1.0) - x / rp;
    let drhs = -np * c.i_o1 * e1 * rs / vt1 - np * c.i_o2 * e2 * rs / vt2 - rs / rp;
    (i - rhs, 1.0 - drhs)
}

fn solve_bracketed(ap: &PvArrayParams, v: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f = |i: f64| array_residual(ap, v, i);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if fx.abs() < 1e-12 {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let (fx, _) = f(x);
    if fx.abs() <= 1e-9 {
        Ok(x)
    } else {
        Err(Error::SolverFailure {
            voltage: v,
            reason: format!("residual {fx:e} A after bracketing [{lo}, {hi}]"),
        })
    }
}

/// Array output current at terminal voltage `v_a`, solving the implicit
/// double-diode equation with safeguarded Newton iteration.
pub fn array_current(ap: &PvArrayParams, v_a: f64) -> Result<f64> {
    if !v_a.is_finite() {
        return Err(Error::invalid("voltage must be finite"));
    }
    // RHS is decreasing in I, so I0 = RHS(0) bounds the root: the root lies
    // between 0 and I0
    let rhs0 = -array_residual(ap, v_a, 0.0).0;
    if !rhs0.is_finite() {
        return Err(Error::SolverFailure {
            voltage: v_a,
            reason: "diode current overflows".into(),
        });
    }
    let lo = rhs0.min(0.0) - 1.0;
    let hi = rhs0.max(0.0) + 1.0;
    solve_bracketed(ap, v_a, lo, hi)
}

/// Single-cell current: the array equation with one cell.
pub fn cell_current(p: &PvCellParams, v_c: f64) -> Result<f64> {
    let ap = PvArrayParams {
        cell: *p,
        n_s: 1,
        n_p: 1,
        area: 1.0,
        irradiance: 0.0,
    };
    array_current(&ap, v_c)
}

/// Absolute residual of the array equation at a solved point, A.
pub fn array_residual_at(ap: &PvArrayParams, v_a: f64, i_a: f64) -> f64 {
    array_residual(ap, v_a, i_a).0.abs()
}

/// Open-circuit voltage by bisection on `I(V) = 0`.
pub fn open_circuit_voltage(ap: &PvArrayParams) -> Result<f64> {
    if array_current(ap, 0.0)? <= 1e-12 {
        return Ok(0.0);
    }
    let mut hi = ap.n_s as f64;
    let mut guard = 0;
    while array_current(ap, hi)? > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::SolverFailure {
                voltage: hi,
                reason: "open-circuit voltage not bracketed".into(),
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if array_current(ap, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IvCurve {
    pub voltages: Vec<f64>,
    pub currents: Vec<f64>,
    pub powers: Vec<f64>,
    /// Grid voltages skipped because the solver failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

pub fn iv_curve(ap: &PvArrayParams, v_grid: &[f64]) -> Result<IvCurve> {
    ap.validate()?;
    if v_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("voltage grid must be ascending"));
    }
    let mut curve = IvCurve::default();
    for &v in v_grid {
        match array_current(ap, v) {
            Ok(i) => {
                curve.voltages.push(v);
                curve.currents.push(i);
                curve.powers.push(v * i);
            }
            Err(e @ Error::SolverFailure { .. }) => curve.failures.push((v, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(curve)
}

/// `n` evenly spaced voltages from 0 to the open-circuit voltage.
pub fn voltage_grid(ap: &PvArrayParams, n: usize) -> Result<Vec<f64>> {
    let voc = open_circuit_voltage(ap)?;
    let n = n.max(2);
    Ok((0..n).map(|k| voc * k as f64 / (n - 1) as f64).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MppPoint {
    pub v: f64,
    pub i: f64,
    pub p: f64,
    /// The coarse scan found more than one local maximum.
    pub multimodal: bool,
}

/// Maximum power point by golden-section search around the best point of a
/// coarse scan over `[0, V_oc]`.
pub fn find_mpp(ap: &PvArrayParams) -> Result<MppPoint> {
    ap.validate()?;
    let voc = open_circuit_voltage(ap)?;
    if voc <= 0.0 {
        return Ok(MppPoint {
            v: 0.0,
            i: array_current(ap, 0.0)?,
            p: 0.0,
            multimodal: false,
        });
    }
    let power = |v: f64| -> Result<f64> { Ok(v * array_current(ap, v)?) };
    const N: usize = 200;
    let vs: Vec<f64> = (0..=N).map(|k| voc * k as f64 / N as f64).collect();
    let ps = vs.iter().map(|&v| power(v)).collect::<Result<Vec<_>>>()?;
    let best = (0..=N).fold(0, |b, k| if ps[k] > ps[b] { k } else { b });
    let peaks = (1..N)
        .filter(|&k| ps[k] > ps[k - 1] && ps[k] >= ps[k + 1])
        .count();

    let (mut a, mut b) = (vs[best.saturating_sub(1)], vs[(best + 1).min(N)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut pc, mut pd) = (power(c)?, power(d)?);
    while b - a > 1e-7 {
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - g * (b - a);
            pc = power(c)?;
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + g * (b - a);
            pd = power(d)?;
        }
    }
    let v = 0.5 * (a + b);
    let i = array_current(ap, v)?;
    Ok(MppPoint {
        v,
        i,
        p: v * i,
        multimodal: peaks > 1,
    })
}

/// `V·I / (A·G_T)`.
pub fn pv_efficiency(v_a: f64, i_a: f64, area: f64, irradiance: f64) -> Result<f64> {
    if irradiance == 0.0 {
        return Err(Error::UndefinedEfficiency);
    }
    if !(area > 0.0) || !(irradiance > 0.0) {
        return Err(Error::invalid("area and irradiance must be positive"));
    }
    Ok(v_a * i_a / (area * irradiance))
}
