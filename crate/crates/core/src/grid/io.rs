//! Flat binary and CSV serialisation of fields.
//!
//! Binary layout, little endian: `dim: u32`, `M: u32`, `L: f64`,
//! `space: u32` (0 physical, 1 frequency), then `M^dim` pairs of `f64`
//! (real, imaginary) in row-major order. The grid origin is not stored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Space, TorusField, TorusGrid};
use crate::error::{Error, Result};

/// Largest field written as CSV.
const CSV_LIMIT: usize = 1 << 18;

pub fn write_field_to<W: Write>(f: &TorusField, mut w: W) -> Result<()> {
    let g = f.grid();
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.points() as u32).to_le_bytes())?;
    w.write_all(&g.side().to_le_bytes())?;
    let flag: u32 = match f.space() {
        Space::Physical => 0,
        Space::Frequency => 1,
    };
    w.write_all(&flag.to_le_bytes())?;
    for v in f.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_from<R: Read>(mut r: R) -> Result<TorusField> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let points = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let side = f64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let space = match u32::from_le_bytes(b4) {
        0 => Space::Physical,
        1 => Space::Frequency,
        s => return Err(Error::Format(format!("unknown space flag {s}"))),
    };
    let grid = TorusGrid::new(dim, points, side).map_err(|e| Error::Format(e.to_string()))?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != grid.len() * 16 {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            raw.len(),
            grid.len() * 16
        )));
    }
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    TorusField::new(grid, values, space)
}

pub fn write_field(f: &TorusField, path: impl AsRef<Path>) -> Result<()> {
    write_field_to(f, BufWriter::new(File::create(path)?))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<TorusField> {
    read_field_from(BufReader::new(File::open(path)?))
}

/// One row per sample: per-axis index, per-axis coordinate (`x` or `ξ`),
/// real and imaginary part.
pub fn write_field_csv<W: Write>(f: &TorusField, w: W) -> Result<()> {
    let g = f.grid();
    if g.len() > CSV_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "CSV output is limited to {CSV_LIMIT} samples, field has {}",
            g.len()
        )));
    }
    let axes = ["0", "1", "2"];
    let coord = match f.space() {
        Space::Physical => "x",
        Space::Frequency => "xi",
    };
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = Vec::new();
    for a in &axes[..g.dim()] {
        header.push(format!("i{a}"));
    }
    for a in &axes[..g.dim()] {
        header.push(format!("{coord}{a}"));
    }
    header.push("re".into());
    header.push("im".into());
    out.write_record(&header).map_err(csv_err)?;
    for (i, v) in f.values().iter().enumerate() {
        let ix = g.unflatten(i);
        let pos = match f.space() {
            Space::Physical => g.point(i),
            Space::Frequency => g.freq(i),
        };
        let mut row: Vec<String> = Vec::with_capacity(2 * g.dim() + 2);
        for a in 0..g.dim() {
            row.push(match f.space() {
                Space::Physical => ix[a].to_string(),
                Space::Frequency => g.wavenumber(ix[a]).to_string(),
            });
        }
        for p in &pos[..g.dim()] {
            row.push(p.to_string());
        }
        row.push(v.re.to_string());
        row.push(v.im.to_string());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = TorusGrid::new(2, 8, 1.5).unwrap();
        let f = TorusField::from_fn(g, |x| Complex64::new(x[0], -x[1] * 2.0));
        let mut buf = Vec::new();
        write_field_to(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 20 + 64 * 16);
        let h = read_field_from(buf.as_slice()).unwrap();
        assert_eq!(h.grid(), f.grid());
        assert_eq!(h.values(), f.values());
        assert!(read_field_from(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = TorusGrid::new(2, 4, 1.0).unwrap();
        let f = TorusField::from_fn(g, |_| Complex64::new(1.0, 0.0)).into_frequency();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("i0,i1,xi0,xi1,re,im"));
        assert_eq!(lines.count(), 16);
    }
}
