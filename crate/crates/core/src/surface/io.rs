//! Plain-text surface tables.
//!
//! ```text
//! # cpl-surface v1
//! # n=3 mode=axisymmetric n_theta=128 n_phi=1 field_components=0
//! # label=spheroid(a=1,c=2)
//! # columns: theta phi rho [E_0 ... E_(n-1)]
//! 1.2118...e-2 0.0000000000000000e0 1.9998...e0
//! ...
//! ```
//!
//! One node per line in grid order. The grid is rebuilt from the header and
//! the node angles are checked against it on import.

use super::{GridMode, SphereGrid, StarShapedSurface};
use crate::error::{Error, Result};

const MAGIC: &str = "# cpl-surface v1";
const ANGLE_TOLERANCE: f64 = 1e-9;

pub fn write_table(surface: &StarShapedSurface, field: Option<&[Vec<f64>]>) -> String {
    let grid = surface.grid();
    let comps = field.map_or(0, |_| grid.dim());
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!(
        "# n={} mode={} n_theta={} n_phi={} field_components={}\n",
        grid.dim(),
        grid.mode(),
        grid.n_theta(),
        grid.n_phi(),
        comps
    ));
    out.push_str(&format!("# label={}\n", surface.label));
    out.push_str("# columns: theta phi rho");
    for k in 0..comps {
        out.push_str(&format!(" E_{k}"));
    }
    out.push('\n');
    for i in 0..grid.len() {
        out.push_str(&format!(
            "{:.16e} {:.16e} {:.16e}",
            grid.theta()[i],
            grid.phi()[i],
            surface.rho()[i]
        ));
        if let Some(f) = field {
            for v in &f[i] {
                out.push_str(&format!(" {v:.16e}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Parsed surface table: the surface and, when present, the per-node field.
pub type SurfaceTable = (StarShapedSurface, Option<Vec<Vec<f64>>>);

pub fn read_table(text: &str) -> Result<SurfaceTable> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(Error::Parse(format!("missing `{MAGIC}` header line")));
    }
    let mut n = None;
    let mut mode = None;
    let mut n_theta = None;
    let mut n_phi = None;
    let mut comps = 0usize;
    let mut label = String::from("imported");
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(l) = rest.strip_prefix("label=") {
                label = l.to_string();
                continue;
            }
            if rest.starts_with("columns:") {
                continue;
            }
            for kv in rest.split_whitespace() {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("malformed header entry `{kv}`")))?;
                let num = || v.parse::<usize>().map_err(|_| Error::Parse(format!("bad value for {k}: `{v}`")));
                match k {
                    "n" => n = Some(num()?),
                    "n_theta" => n_theta = Some(num()?),
                    "n_phi" => n_phi = Some(num()?),
                    "field_components" => comps = num()?,
                    "mode" => {
                        mode = Some(match v {
                            "axisymmetric" => GridMode::Axisymmetric,
                            "full" => GridMode::Full,
                            other => return Err(Error::Parse(format!("unknown grid mode `{other}`"))),
                        })
                    }
                    other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
                }
            }
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        rows.push(vals);
    }
    let (n, mode, n_theta, n_phi) = match (n, mode, n_theta, n_phi) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(Error::Parse("header must give n, mode, n_theta and n_phi".into())),
    };
    if comps != 0 && comps != n {
        return Err(Error::Parse(format!("field_components must be 0 or n = {n}")));
    }
    let grid = SphereGrid::with_mode(n, mode, n_theta, n_phi)?;
    if rows.len() != grid.len() {
        return Err(Error::Parse(format!("expected {} node rows, found {}", grid.len(), rows.len())));
    }
    let mut rho = Vec::with_capacity(rows.len());
    let mut field = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 3 + comps {
            return Err(Error::Parse(format!("row {i} has {} columns, expected {}", row.len(), 3 + comps)));
        }
        if (row[0] - grid.theta()[i]).abs() > ANGLE_TOLERANCE || (row[1] - grid.phi()[i]).abs() > ANGLE_TOLERANCE {
            return Err(Error::Parse(format!("row {i} angles do not match the {mode} grid")));
        }
        rho.push(row[2]);
        if comps > 0 {
            field.push(row[3..].to_vec());
        }
    }
    let surface = StarShapedSurface::new(grid, rho, label)?;
    Ok((surface, (comps > 0).then_some(field)))
}
