use num_complex::Complex64;

use super::Polynomial;
use super::TransferFunction;
use crate::error::{Error, Result};

/// Closed-loop poles for one gain. Poles keep their index across gains so
/// each index traces one branch.
#[derive(Clone, Debug, PartialEq)]
pub struct LocusPoint {
    pub gain: f64,
    pub poles: Vec<Complex64>,
}

/// Roots of `den(G) + K·num(G)` for each gain under unity feedback, with
/// branches paired to the previous gain by nearest neighbour.
pub fn root_locus(g: &TransferFunction, gains: &[f64]) -> Result<Vec<LocusPoint>> {
    if gains.is_empty() {
        return Err(Error::invalid("empty gain list"));
    }
    if gains.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
        return Err(Error::invalid("gains must be positive and finite"));
    }
    if gains.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("gains must be strictly ascending"));
    }
    let mut out: Vec<LocusPoint> = Vec::with_capacity(gains.len());
    for &k in gains {
        let cl: Polynomial = g.den() + &g.num().scale(k);
        let mut poles = if cl.degree() == 0 {
            Vec::new()
        } else {
            cl.roots()?
        };
        if let Some(prev) = out.last() {
            poles = pair_with(&prev.poles, poles);
        }
        out.push(LocusPoint { gain: k, poles });
    }
    Ok(out)
}

/// Reorders `next` so `next[i]` is the pole nearest `prev[i]`, choosing the
/// globally closest remaining pair first.
fn pair_with(prev: &[Complex64], next: Vec<Complex64>) -> Vec<Complex64> {
    if prev.len() != next.len() {
        return next;
    }
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in prev.iter().enumerate() {
        for (j, q) in next.iter().enumerate() {
            pairs.push(((p - q).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; n];
    let mut used = vec![false; n];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(next[j]);
            used[j] = true;
        }
    }
    out.into_iter()
        .map(|p| p.expect("every branch paired"))
        .collect()
}
