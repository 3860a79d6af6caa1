use std::fmt;

use super::Polynomial;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    /// No sign change, but a zero row or zero pivot was met: roots on or
    /// numerically at the imaginary axis.
    Marginal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouthResult {
    /// One row per power of `s`, from `s^n` down to `s^0`.
    pub table: Vec<Vec<f64>>,
    pub first_column: Vec<f64>,
    pub sign_changes: usize,
    pub verdict: Verdict,
    /// Rows rebuilt from an auxiliary polynomial derivative.
    pub auxiliary_rows: Vec<usize>,
    /// Rows whose zero pivot was replaced by epsilon.
    pub epsilon_rows: Vec<usize>,
}

/// Routh array with epsilon substitution for zero pivots and the auxiliary
/// polynomial derivative for rows that vanish entirely.
pub fn routh_table(p: &Polynomial) -> Result<RouthResult> {
    if p.is_zero() {
        return Err(Error::invalid("Routh table of the zero polynomial"));
    }
    if p.degree() == 0 {
        return Err(Error::invalid("Routh table needs degree ≥ 1"));
    }
    let n = p.degree();
    let sign = p.leading().signum();
    let c: Vec<f64> = p.coeffs().iter().map(|x| x * sign).collect();
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps = 1e-9 * scale;
    let tiny = 1e-12 * scale;
    let width = n / 2 + 1;

    let row_from = |start: usize| -> Vec<f64> {
        (0..width)
            .map(|k| c.get(start + 2 * k).copied().unwrap_or(0.0))
            .collect()
    };
    let mut table = vec![row_from(0), row_from(1)];
    let mut auxiliary_rows = Vec::new();
    let mut epsilon_rows = Vec::new();

    for i in 1..=n {
        if i >= 2 {
            let (r2, r1) = (&table[i - 2], &table[i - 1]);
            let row: Vec<f64> = (0..width)
                .map(|j| {
                    let a = r2.get(j + 1).copied().unwrap_or(0.0);
                    let b = r1.get(j + 1).copied().unwrap_or(0.0);
                    (r1[0] * a - r2[0] * b) / r1[0]
                })
                .collect();
            table.push(row);
        }
        let row_scale = table[i - 1]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(tiny);
        if table[i].iter().all(|x| x.abs() <= 1e-12 * row_scale) {
            // derivative of the auxiliary polynomial formed from the row above
            let power = n - (i - 1);
            let above = table[i - 1].clone();
            table[i] = (0..width)
                .map(|k| {
                    let pk = power as isize - 2 * k as isize;
                    if pk > 0 {
                        above[k] * pk as f64
                    } else {
                        0.0
                    }
                })
                .collect();
            auxiliary_rows.push(i);
        }
        if table[i][0].abs() <= 1e-12 * row_scale {
            table[i][0] = eps;
            epsilon_rows.push(i);
        }
    }

    let first_column: Vec<f64> = table.iter().map(|r| r[0]).collect();
    let sign_changes = first_column
        .windows(2)
        .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
        .count();
    let verdict = if sign_changes > 0 {
        Verdict::Unstable
    } else if auxiliary_rows.is_empty() && epsilon_rows.is_empty() {
        Verdict::Stable
    } else {
        Verdict::Marginal
    };
    Ok(RouthResult {
        table,
        first_column,
        sign_changes,
        verdict,
        auxiliary_rows,
        epsilon_rows,
    })
}
