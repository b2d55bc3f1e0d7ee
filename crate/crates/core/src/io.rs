//! On-disk formats.
//!
//! Field dumps are little-endian binary: the magic bytes `RWL1`, a `u32`
//! rank, `rank` `u32` dimensions, then `f64` samples in row-major order. One
//! file holds one scalar component. Time series are CSV with a header row
//! and every number written as C's `%.17g`.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::SlabGrid;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const MAGIC: &[u8; 4] = b"RWL1";

/// `x` formatted like `printf("%.17g", x)`.
pub fn format_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::Format(format!(
                "row has {} columns, header has {}",
                r.len(),
                header.len()
            )));
        }
        let line: Vec<String> = r.iter().map(|v| format_g17(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let header: Vec<String> = match lines.next() {
        Some(h) => h?.split(',').map(|s| s.trim().to_string()).collect(),
        None => return Err(Error::Format(format!("{}: empty CSV", path.display()))),
    };
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Format(format!("{}:{}: bad number '{}'", path.display(), n + 2, s))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "{}:{}: expected {} columns",
                path.display(),
                n + 2,
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_dump(path: &Path, dims: &[usize], data: &[f64]) -> Result<()> {
    let expected: usize = dims.iter().product();
    if expected != data.len() {
        return Err(Error::Format(format!(
            "dims {:?} need {} samples, got {}",
            dims,
            expected,
            data.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(dims.len() as u32).to_le_bytes())?;
    for &d in dims {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} too large")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dump(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |msg: &str| Error::Format(format!("{}: {msg}", path.display()));
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(bad("missing RWL1 header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let rank = u32_at(4);
    let head = 8 + 4 * rank;
    if rank == 0 || rank > 8 || bytes.len() < head {
        return Err(bad("bad rank"));
    }
    let dims: Vec<usize> = (0..rank).map(|i| u32_at(8 + 4 * i)).collect();
    let n: usize = dims.iter().product();
    if bytes.len() != head + 8 * n {
        return Err(bad(&format!(
            "expected {} samples for dims {:?}, file holds {} bytes of data",
            n,
            dims,
            bytes.len() - head
        )));
    }
    let data = bytes[head..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dims, data))
}

/// Planar fields are written with rank 2, slab fields with rank 3.
pub fn write_scalar_field(path: &Path, f: &ScalarField) -> Result<()> {
    let g = f.grid();
    let dims: Vec<usize> = if g.is_planar() {
        vec![g.nx(), g.ny()]
    } else {
        g.shape().to_vec()
    };
    write_dump(path, &dims, f.data())
}

/// Read a field dump onto a grid of half-width `half_width`.
pub fn read_scalar_field(path: &Path, half_width: f64) -> Result<ScalarField> {
    let (dims, data) = read_dump(path)?;
    let grid = match dims.as_slice() {
        [nx, ny] => SlabGrid::new(half_width, *nx, *ny, 4)?.plane(),
        [nx, ny, nz] => SlabGrid::new(half_width, *nx, *ny, *nz)?,
        _ => {
            return Err(Error::Format(format!(
                "{}: expected rank 2 or 3, got {}",
                path.display(),
                dims.len()
            )))
        }
    };
    let f = ScalarField::from_vec(&Arc::new(grid), data)?;
    f.check_finite("field dump")?;
    Ok(f)
}

/// Load a field dump onto an existing grid, checking the shape.
pub fn read_scalar_field_on(path: &Path, grid: &Arc<SlabGrid>) -> Result<ScalarField> {
    let f = read_scalar_field(path, grid.half_width())?;
    if !f.grid().same_as(grid) {
        return Err(Error::Format(format!(
            "{}: shape does not match the configured grid",
            path.display()
        )));
    }
    let out = ScalarField::from_vec(grid, f.into_vec())?;
    Ok(out)
}

/// `prefix_1.rwl`, `prefix_2.rwl`, ... one per component.
pub fn component_paths(dir: &Path, prefix: &str, dim: usize) -> Vec<PathBuf> {
    (1..=dim).map(|i| dir.join(format!("{prefix}_{i}.rwl"))).collect()
}

pub fn write_vector_field(dir: &Path, prefix: &str, v: &VectorField) -> Result<Vec<PathBuf>> {
    let paths = component_paths(dir, prefix, v.dim());
    for (p, c) in paths.iter().zip(v.components()) {
        write_scalar_field(p, c)?;
    }
    Ok(paths)
}

pub fn read_vector_field_on(dir: &Path, prefix: &str, dim: usize, grid: &Arc<SlabGrid>) -> Result<VectorField> {
    let comps = component_paths(dir, prefix, dim)
        .iter()
        .map(|p| read_scalar_field_on(p, grid))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1, "0.10000000000000001"),
            (1e-5, "1.0000000000000001e-05"),
            (123456.0, "123456"),
            (1e20, "1e+20"),
            (1e16, "10000000000000000"),
            (1e17, "1e+17"),
            (3.0e-4, "0.00029999999999999997"),
            (f64::NAN, "nan"),
            (f64::NEG_INFINITY, "-inf"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g17(x), s, "{x}");
        }
    }

    #[test]
    fn g17_round_trips() {
        let mut r = crate::random::rng(3);
        use rand::Rng;
        for _ in 0..2000 {
            let x: f64 = r.gen_range(-1.0..1.0) * 10f64.powi(r.gen_range(-300..300));
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn dump_round_trip_and_layout() {
        let dir = std::env::temp_dir().join(format!("rwl-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let g = Arc::new(SlabGrid::new(2.0, 4, 6, 4).unwrap());
        let f = ScalarField::from_fn(&g, |x, y, z| x + 10.0 * y + 100.0 * z);
        let p = dir.join("f.rwl");
        write_scalar_field(&p, &f).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"RWL1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 8 + 12 + 8 * 96);
        let back = read_scalar_field_on(&p, &g).unwrap();
        assert_eq!(back.data(), f.data());

        let plane = Arc::new(g.plane());
        let h = ScalarField::from_fn(&plane, |x, y, _| x * y);
        write_scalar_field(&p, &h).unwrap();
        assert_eq!(read_dump(&p).unwrap().0, vec![4, 6]);
        assert_eq!(read_scalar_field_on(&p, &plane).unwrap().data(), h.data());
        assert!(read_scalar_field_on(&p, &g).is_err());

        std::fs::write(&p, b"NOPE").unwrap();
        assert!(read_dump(&p).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("rwl-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("a.csv");
        let h = vec!["t".to_string(), "x".to_string()];
        let rows = vec![vec![0.1, 1.0 / 3.0], vec![2.0, -1e-300]];
        write_csv(&p, &h, &rows).unwrap();
        let (h2, r2) = read_csv(&p).unwrap();
        assert_eq!(h, h2);
        assert_eq!(rows, r2);
        assert!(write_csv(&p, &h, &[vec![1.0]]).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
