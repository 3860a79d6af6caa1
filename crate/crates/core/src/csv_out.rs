//! CSV tables: header row always present, LF line endings, numbers at nine
//! significant digits.

use std::io::Write;
use std::path::Path;

use crate::geometry::{incidence, SunPosition, TrackerOrientation};
use crate::lti::{FrequencyResponse, LocusPoint, StepTrace};
use crate::mppt::MpptRun;
use crate::pv::IvCurve;
use crate::sim::SimTrace;
use crate::tracking::TrackSample;
use crate::{Error, Result};

/// Nine significant digits, printed in the shortest form that round-trips
/// that rounded value.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let s = rounded.to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().copied().map(num).collect());
    }

    pub fn write_to<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Writes the table to `path`; `-` means standard output.
    pub fn emit(&self, path: &Path) -> Result<()> {
        if path.as_os_str() == "-" {
            let out = std::io::stdout();
            return self.write_to(out.lock()).map_err(|e| io_err(path, e));
        }
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_to(std::io::BufWriter::new(file))
            .map_err(|e| io_err(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
        let header = rd
            .headers()
            .map_err(|e| io_err(path, e))?
            .iter()
            .map(String::from)
            .collect();
        let rows = rd
            .records()
            .map(|r| r.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<csv::Result<Vec<Vec<String>>>>()
            .map_err(|e| io_err(path, e))?;
        Ok(Self { header, rows })
    }

    /// Numeric view of one column, by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r.get(idx)?.parse().ok()).collect()
    }
}

fn io_err(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    };
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn step_table(tr: &StepTrace) -> Table {
    let mut t = Table::new(&["t", "y"]);
    for (a, b) in tr.t.iter().zip(&tr.y) {
        t.push_nums(&[*a, *b]);
    }
    t
}

pub fn bode_table(fr: &FrequencyResponse) -> Table {
    let mut t = Table::new(&["omega", "mag_db", "phase_deg"]);
    for k in 0..fr.omegas.len() {
        t.push_nums(&[fr.omegas[k], fr.magnitude_db[k], fr.phase_deg[k]]);
    }
    t
}

/// One row per gain with `re_k,im_k` pairs for every pole.
pub fn locus_table(points: &[LocusPoint]) -> Table {
    let n = points.first().map_or(0, |p| p.poles.len());
    let mut header = vec!["gain".to_string()];
    for k in 0..n {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for p in points {
        let mut row = vec![p.gain];
        for z in &p.poles {
            row.extend([z.re, z.im]);
        }
        t.push_nums(&row);
    }
    t
}

pub fn iv_table(c: &IvCurve) -> Table {
    let mut t = Table::new(&["v", "i", "p"]);
    for k in 0..c.voltages.len() {
        t.push_nums(&[c.voltages[k], c.currents[k], c.powers[k]]);
    }
    t
}

pub fn mppt_table(run: &MpptRun) -> Table {
    let mut t = Table::new(&["iter", "v_ref", "i", "p"]);
    for s in &run.trajectory {
        t.push_nums(&[s.iter as f64, s.v_ref, s.i, s.p]);
    }
    t
}

pub fn track_table(samples: &[TrackSample]) -> Table {
    let mut t = Table::new(&[
        "step", "theta_TE", "theta_TA", "alpha", "tl", "tr", "bl", "br", "az_cmd", "el_cmd",
    ]);
    for s in samples {
        let r = &s.readings;
        let (az, el) = if s.command.park {
            ("park".to_string(), "park".to_string())
        } else {
            (
                s.command.azimuth_move.to_string(),
                s.command.elevation_move.to_string(),
            )
        };
        t.rows.push(vec![
            s.step.to_string(),
            num(s.orientation.theta_te),
            num(s.orientation.theta_ta),
            num(s.alpha),
            r.top_left.to_string(),
            r.top_right.to_string(),
            r.bottom_left.to_string(),
            r.bottom_right.to_string(),
            az,
            el,
        ]);
    }
    t
}

/// Row of the solar-angle table. `st` is solar time in hours and `n` the day
/// of the year.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleRow {
    pub n: u32,
    pub st: f64,
    pub delta: f64,
    pub theta_e: f64,
    pub theta_z: f64,
    pub sun: SunPosition,
    pub tracker: TrackerOrientation,
}

pub fn angle_table(rows: &[AngleRow]) -> Table {
    let mut t = Table::new(&[
        "n", "ST", "delta", "theta_e", "theta_z", "theta_SA", "theta_TE", "theta_TA", "alpha",
        "beta",
    ]);
    for r in rows {
        let inc = incidence(&r.sun, &r.tracker);
        let beta = inc.beta.map_or_else(|| "NaN".into(), num);
        t.rows.push(vec![
            r.n.to_string(),
            num(r.st),
            num(r.delta),
            num(r.theta_e),
            num(r.theta_z),
            num(r.sun.theta_sa),
            num(r.tracker.theta_te),
            num(r.tracker.theta_ta),
            num(inc.alpha),
            beta,
        ]);
    }
    t
}

pub fn sim_table(tr: &SimTrace) -> Table {
    let mut t = Table::new(&SimTrace::COLUMNS);
    for r in &tr.records {
        t.rows.push(vec![
            num(r.t),
            num(r.irradiance),
            num(r.pv_power_w),
            num(r.soc_pct),
            flag(r.pump1_on),
            flag(r.pump2_on),
            num(r.tank2_level_pct),
            num(r.soil_moisture_pct),
            num(r.theta_te),
            num(r.theta_ta),
            num(r.alpha),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(123456789.123), "123456789");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(2.0), "2");
    }

    #[test]
    fn header_present_for_empty_table() {
        let t = Table::new(&["t", "y"]);
        assert_eq!(t.to_csv_string(), "t,y\n");
    }

    #[test]
    fn lf_only() {
        let mut t = Table::new(&["a", "b"]);
        t.push_nums(&[1.0, 2.5]);
        let s = t.to_csv_string();
        assert_eq!(s, "a,b\n1,2.5\n");
        assert!(!s.contains('\r'));
    }

    #[test]
    fn io_error_names_path() {
        let t = Table::new(&["a"]);
        let p = Path::new("/nonexistent-dir/out.csv");
        let err = t.emit(p).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
