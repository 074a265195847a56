//! CSV snapshots, profile comparison and run logs.
//!
//! A profile has one row per cell with columns
//! `y, rho, u1, u2, u3, theta, sigma11, sigma12, sigma22, q1, q2`.
//! A state file additionally stores every evolved coefficient so the grid
//! can be restored exactly (`y, u1, u2, u3, theta, f_a1_a2_a3, ...`).

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::cdvm::{DvField, DvMoments};
use crate::error::{Error, Result};
use crate::moments::{count_up_to, MomentSpace, MomentState, MultiIndex};
use crate::solver1d::Grid1D;

pub const PROFILE_COLUMNS: [&str; 11] = [
    "y", "rho", "u1", "u2", "u3", "theta", "sigma11", "sigma12", "sigma22", "q1", "q2",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileRow {
    pub y: f64,
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub sigma11: f64,
    pub sigma12: f64,
    pub sigma22: f64,
    pub q1: f64,
    pub q2: f64,
}

impl ProfileRow {
    pub fn from_state(y: f64, s: &MomentState) -> Self {
        let sigma = s.stress();
        let q = s.heat_flux();
        Self {
            y,
            rho: s.rho(),
            u: s.u,
            theta: s.theta,
            sigma11: sigma[0][0],
            sigma12: sigma[0][1],
            sigma22: sigma[1][1],
            q1: q[0],
            q2: q[1],
        }
    }

    pub fn from_dv(y: f64, m: &DvMoments) -> Self {
        Self {
            y,
            rho: m.rho,
            u: m.u,
            theta: m.theta,
            sigma11: m.sigma[0][0],
            sigma12: m.sigma[0][1],
            sigma22: m.sigma[1][1],
            q1: m.q[0],
            q2: m.q[1],
        }
    }

    pub fn values(&self) -> [f64; 11] {
        [
            self.y,
            self.rho,
            self.u[0],
            self.u[1],
            self.u[2],
            self.theta,
            self.sigma11,
            self.sigma12,
            self.sigma22,
            self.q1,
            self.q2,
        ]
    }

    pub fn from_values(v: [f64; 11]) -> Self {
        Self {
            y: v[0],
            rho: v[1],
            u: [v[2], v[3], v[4]],
            theta: v[5],
            sigma11: v[6],
            sigma12: v[7],
            sigma22: v[8],
            q1: v[9],
            q2: v[10],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Profile {
    pub rows: Vec<ProfileRow>,
}

impl Profile {
    pub fn from_grid(grid: &Grid1D) -> Self {
        let rows = grid
            .centers()
            .into_iter()
            .zip(&grid.cells)
            .map(|(y, s)| ProfileRow::from_state(y, s))
            .collect();
        Self { rows }
    }

    pub fn from_field(field: &DvField) -> Self {
        let rows = field
            .centers()
            .into_iter()
            .zip(field.moments())
            .map(|(y, m)| ProfileRow::from_dv(y, &m))
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = PROFILE_COLUMNS
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Unknown {
                kind: "column",
                name: name.to_string(),
            })?;
        Ok(self.rows.iter().map(|r| r.values()[k]).collect())
    }

    /// Rows with `lo ≤ y ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .filter(|r| r.y >= lo && r.y <= hi)
                .copied()
                .collect(),
        }
    }

    /// Linear interpolation onto `ys`, holding end values outside the range.
    pub fn resample(&self, ys: &[f64]) -> Self {
        let rows = ys
            .iter()
            .map(|&y| {
                let r = &self.rows;
                let k = r.partition_point(|row| row.y < y);
                let mut v = if k == 0 {
                    r[0].values()
                } else if k == r.len() {
                    r[r.len() - 1].values()
                } else {
                    let (a, b) = (r[k - 1].values(), r[k].values());
                    let t = (y - a[0]) / (b[0] - a[0]);
                    std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
                };
                v[0] = y;
                ProfileRow::from_values(v)
            })
            .collect();
        Self { rows }
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(PROFILE_COLUMNS).map_err(csv_error)?;
        for row in &self.rows {
            out.write_record(row.values().iter().map(|v| v.to_string()))
                .map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut input = csv::Reader::from_reader(r);
        let header = input.headers().map_err(csv_error)?.clone();
        if header.iter().ne(PROFILE_COLUMNS) {
            return Err(Error::Csv {
                line: 1,
                msg: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
            });
        }
        let mut rows = Vec::new();
        for (n, rec) in input.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            let v = parse_fields(&rec, n + 2)?;
            let v: [f64; 11] = v.try_into().map_err(|_| Error::Csv {
                line: n + 2,
                msg: "expected 11 fields".into(),
            })?;
            rows.push(ProfileRow::from_values(v));
        }
        Ok(Self { rows })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Csv {
        line,
        msg: e.to_string(),
    }
}

fn parse_fields(rec: &csv::StringRecord, line: usize) -> Result<Vec<f64>> {
    rec.iter()
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| Error::Csv {
                line,
                msg: format!("{s:?}: {e}"),
            })
        })
        .collect()
}

/// `‖a - b‖₂ / ‖b‖₂`; `b` is the reference.
pub fn l2rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// `l2rel` of every column except `y`. `b` is resampled onto `a`'s cell
/// centers when the grids differ.
pub fn compare(a: &Profile, b: &Profile) -> Result<Vec<(&'static str, f64)>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Config("cannot compare empty profiles".into()));
    }
    let ys = a.column("y")?;
    let same = a.len() == b.len()
        && a.rows
            .iter()
            .zip(&b.rows)
            .all(|(x, y)| (x.y - y.y).abs() < 1e-9);
    let b = if same { b.clone() } else { b.resample(&ys) };
    PROFILE_COLUMNS[1..]
        .iter()
        .map(|c| Ok((*c, l2rel(&a.column(c)?, &b.column(c)?))))
        .collect()
}

fn coeff_name(a: MultiIndex) -> String {
    format!("f_{}_{}_{}", a.0[0], a.0[1], a.0[2])
}

/// Full state: frame and all evolved coefficients per cell.
pub fn write_state(grid: &Grid1D, w: impl Write) -> Result<()> {
    let space = grid.space();
    let evolved = space.evolved_len();
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["y", "u1", "u2", "u3", "theta"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(space.indices()[..evolved].iter().map(|a| coeff_name(*a)));
    out.write_record(&header).map_err(csv_error)?;
    for (y, s) in grid.centers().into_iter().zip(&grid.cells) {
        let mut rec = vec![y.to_string()];
        rec.extend(s.u.iter().map(|v| v.to_string()));
        rec.push(s.theta.to_string());
        rec.extend(s.coeffs()[..evolved].iter().map(|v| v.to_string()));
        out.write_record(&rec).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_state(r: impl Read) -> Result<Grid1D> {
    let mut input = csv::Reader::from_reader(r);
    let header = input.headers().map_err(csv_error)?.clone();
    let ncoef = header.len().saturating_sub(5);
    let order = (3..=64)
        .find(|&m| count_up_to(m) == ncoef)
        .ok_or_else(|| Error::Csv {
            line: 1,
            msg: format!("{ncoef} coefficient columns match no order"),
        })?;
    let space = MomentSpace::new(order)?;
    for (k, a) in space.indices()[..ncoef].iter().enumerate() {
        if header.get(5 + k) != Some(coeff_name(*a).as_str()) {
            return Err(Error::Csv {
                line: 1,
                msg: format!("column {} should be {}", 5 + k, coeff_name(*a)),
            });
        }
    }
    let mut ys = Vec::new();
    let mut cells = Vec::new();
    for (n, rec) in input.records().enumerate() {
        let v = parse_fields(&rec.map_err(csv_error)?, n + 2)?;
        ys.push(v[0]);
        let mut coeffs = vec![0.0; space.len()];
        coeffs[..ncoef].copy_from_slice(&v[5..]);
        cells.push(MomentState::from_parts(
            Arc::clone(&space),
            [v[1], v[2], v[3]],
            v[4],
            coeffs,
        ));
    }
    if ys.len() < 2 {
        return Err(Error::Csv {
            line: 2,
            msg: "need at least 2 cells".into(),
        });
    }
    let dx = ys[1] - ys[0];
    Grid1D::new(ys[0] - 0.5 * dx, ys[ys.len() - 1] + 0.5 * dx, cells)
}

pub fn write_state_csv(grid: &Grid1D, path: impl AsRef<Path>) -> Result<()> {
    write_state(grid, std::fs::File::create(path)?)
}

pub fn read_state_csv(path: impl AsRef<Path>) -> Result<Grid1D> {
    read_state(std::fs::File::open(path)?)
}

/// Plain-text run log: `key = value` header lines, then one
/// `step time dt residual` line per step.
pub fn write_run_log(
    path: impl AsRef<Path>,
    header: &[(String, String)],
    dt: &[f64],
    residuals: &[f64],
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (k, v) in header {
        writeln!(f, "# {k} = {v}")?;
    }
    writeln!(f, "# step time dt residual")?;
    let mut t = 0.0;
    for (i, (d, r)) in dt.iter().zip(residuals).enumerate() {
        t += d;
        writeln!(f, "{} {t:.9e} {d:.6e} {r:.6e}", i + 1)?;
    }
    f.flush()?;
    Ok(())
}
