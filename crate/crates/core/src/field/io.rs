//! CSV serialization (`x[,y],t,value`) with a `key=value` sidecar.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Exterior, Grid, SpaceTimeField};
use crate::error::{Error, Result};
use crate::presets::FieldPreset;
use crate::scalar::{lit, to_f64, Real};

pub fn write_field_csv<T: Real>(path: &Path, u: &SpaceTimeField<T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let dim = u.grid().dim();
    if dim == 1 {
        w.write_record(["x", "t", "value"])?;
    } else {
        w.write_record(["x", "y", "t", "value"])?;
    }
    for k in 0..u.len() {
        let t = to_f64(u.times()[k]).to_string();
        for (i, v) in u.values(k).iter().enumerate() {
            let p = u.grid().point(i);
            let mut rec = vec![to_f64(p[0]).to_string()];
            if dim == 2 {
                rec.push(to_f64(p[1]).to_string());
            }
            rec.push(t.clone());
            rec.push(to_f64(*v).to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the metadata sidecar; `extra` entries are appended after the standard keys.
pub fn write_sidecar<T: Real>(path: &Path, u: &SpaceTimeField<T>, extra: &[(&str, String)]) -> Result<()> {
    let g = u.grid();
    let mut f = fs::File::create(path)?;
    writeln!(f, "n={}", g.dim())?;
    writeln!(f, "R={}", to_f64(g.half_width()))?;
    writeln!(f, "h={}", to_f64(g.spacing()))?;
    writeln!(f, "periodic={}", g.is_periodic())?;
    writeln!(f, "dt={}", to_f64(u.dt()))?;
    writeln!(f, "sigma={}", to_f64(u.sigma()))?;
    writeln!(f, "exterior={}", u.exterior().label())?;
    writeln!(f, "slices={}", u.len())?;
    for (k, v) in extra {
        writeln!(f, "{k}={v}")?;
    }
    Ok(())
}

fn parse_sidecar(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Parse(format!("sidecar line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Reads a field written by [`write_field_csv`] and [`write_sidecar`].
/// The exterior label must name a preset (`zero`, `const(c)`, `bump(..)`, ...).
pub fn read_field_csv<T: Real>(csv_path: &Path, sidecar_path: &Path) -> Result<SpaceTimeField<T>> {
    let meta = parse_sidecar(&fs::read_to_string(sidecar_path)?)?;
    let get = |k: &str| meta.get(k).ok_or_else(|| Error::Parse(format!("sidecar lacks `{k}`")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse::<f64>().map_err(|_| Error::Parse(format!("bad `{k}`"))) };
    let dim = num("n")? as usize;
    let (r, h, sigma, dt) = (num("R")?, num("h")?, num("sigma")?, num("dt")?);
    let grid = if get("periodic")? == "true" {
        Grid::periodic(dim, lit::<T>(r), lit(h))?
    } else {
        Grid::new(dim, lit::<T>(r), lit(h))?
    };
    let preset: FieldPreset = get("exterior")?
        .parse()
        .map_err(|_| Error::UnsupportedExterior(format!("cannot rebuild exterior `{}`", meta["exterior"])))?;
    let exterior: Exterior<T> = preset.exterior(dim);
    let mut field = SpaceTimeField::new(grid, lit(sigma), exterior)?.with_dt(lit(dt));
    let per_slice = field.grid().len();
    let mut rdr = csv::Reader::from_path(csv_path)?;
    let mut current: Option<f64> = None;
    let mut buf: Vec<T> = Vec::with_capacity(per_slice);
    for rec in rdr.records() {
        let rec = rec?;
        let t: f64 = rec[dim].parse().map_err(|_| Error::Parse("bad time column".into()))?;
        let v: f64 = rec[dim + 1].parse().map_err(|_| Error::Parse("bad value column".into()))?;
        if current != Some(t) {
            if let Some(prev) = current {
                field.push_slice(lit(prev), std::mem::take(&mut buf))?;
            }
            current = Some(t);
        }
        buf.push(lit(v));
    }
    if let Some(prev) = current {
        field.push_slice(lit(prev), buf)?;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(2, 1.0_f64, 0.25).unwrap();
        let u =
            SpaceTimeField::from_fn(grid, 1.5, &[0.0, 0.1], Exterior::Constant(0.5), |x, t| x[0] * 0.1 + t).unwrap();
        let (c, m) = (dir.path().join("u.csv"), dir.path().join("u.meta"));
        write_field_csv(&c, &u).unwrap();
        write_sidecar(&m, &u, &[("note", "test".into())]).unwrap();
        let back: SpaceTimeField<f64> = read_field_csv(&c, &m).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.values(1), u.values(1));
        assert_eq!(back.exterior().label(), "const(0.5)");
        let text = fs::read_to_string(&c).unwrap();
        assert!(text.starts_with("x,y,t,value\n"));
    }
}
