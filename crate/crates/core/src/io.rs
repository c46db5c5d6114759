//! CSV and `SGF1` binary persistence of fields and states.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic    4 bytes  "SGF1"
//! kind     u8       0 real field, 1 complex field, 2 state
//! topology u8       0 zero, 1 kink, 2 antikink
//! reserved 2 bytes  zero
//! n        u32
//! x_min    f64
//! x_max    f64
//! time     f64
//! data     n f64 (real) | n (re, im) pairs (complex) | n phi then n phi_t (state)
//! ```

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::error::{Result, SgError};
use crate::field::{ComplexField, Field, Grid};
use crate::state::{State, Topology};

const MAGIC: &[u8; 4] = b"SGF1";

/// Contents of an `SGF1` stream.
#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Real(Field),
    Complex(ComplexField),
    State(State),
}

fn topo_code(t: Topology) -> u8 {
    match t {
        Topology::Zero => 0,
        Topology::Kink => 1,
        Topology::Antikink => 2,
    }
}

fn write_header<W: Write>(w: &mut W, kind: u8, topo: u8, grid: &Grid, time: f64) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[kind, topo, 0, 0])?;
    w.write_all(&(grid.len() as u32).to_le_bytes())?;
    for v in [grid.x_min(), grid.x_max(), time] {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn write_f64s<W: Write>(w: &mut W, v: impl Iterator<Item = f64>) -> Result<()> {
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(w: &mut W, snap: &Snapshot) -> Result<()> {
    match snap {
        Snapshot::Real(f) => {
            write_header(w, 0, 0, f.grid(), 0.0)?;
            write_f64s(w, f.values().iter().copied())
        }
        Snapshot::Complex(f) => {
            write_header(w, 1, 0, f.grid(), 0.0)?;
            write_f64s(w, f.values().iter().flat_map(|c| [c.re, c.im]))
        }
        Snapshot::State(s) => {
            write_header(w, 2, topo_code(s.topology()), s.grid(), s.time())?;
            write_f64s(w, s.phi().values().iter().copied())?;
            write_f64s(w, s.phi_t().values().iter().copied())
        }
    }
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_vec<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| read_f64(r)).collect()
}

pub fn read_binary<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(SgError::Format("bad magic".into()));
    }
    let (kind, topo) = (head[4], head[5]);
    let n = u32::from_le_bytes([head[8], head[9], head[10], head[11]]) as usize;
    let x_min = read_f64(r)?;
    let x_max = read_f64(r)?;
    let time = read_f64(r)?;
    let grid = Grid::new(x_min, x_max, n)?;
    match kind {
        0 => Ok(Snapshot::Real(Field::new(grid, read_vec(r, n)?)?)),
        1 => {
            let v = read_vec(r, 2 * n)?;
            let c = v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            Ok(Snapshot::Complex(Field::new(grid, c)?))
        }
        2 => {
            let topology = match topo {
                0 => Topology::Zero,
                1 => Topology::Kink,
                2 => Topology::Antikink,
                t => return Err(SgError::Format(format!("unknown topology code {t}"))),
            };
            let phi = Field::new(grid, read_vec(r, n)?)?;
            let phi_t = Field::new(grid, read_vec(r, n)?)?;
            Ok(Snapshot::State(State::raw(phi, phi_t, time, topology)))
        }
        k => Err(SgError::Format(format!("unknown snapshot kind {k}"))),
    }
}

/// `x,value` rows with a header line; `{:e}` keeps full precision.
pub fn write_csv<W: Write>(w: &mut W, f: &Field) -> Result<()> {
    writeln!(w, "x,value")?;
    for (x, v) in f.grid().points().zip(f.values()) {
        writeln!(w, "{x:e},{v:e}")?;
    }
    Ok(())
}

pub fn write_complex_csv<W: Write>(w: &mut W, f: &ComplexField) -> Result<()> {
    writeln!(w, "x,re,im")?;
    for (x, v) in f.grid().points().zip(f.values()) {
        writeln!(w, "{x:e},{:e},{:e}", v.re, v.im)?;
    }
    Ok(())
}

/// Reads `x,value` rows; the grid is rebuilt from the first node and the
/// spacing, with the right end one spacing past the last node.
pub fn read_csv<R: BufRead>(r: R) -> Result<Field> {
    let rows = read_rows(r, 2)?;
    let n = rows.len();
    if n < 2 {
        return Err(SgError::Format("too few rows".into()));
    }
    let dx = rows[1][0] - rows[0][0];
    let grid = Grid::new(rows[0][0], rows[0][0] + dx * n as f64, n)?;
    for (i, row) in rows.iter().enumerate() {
        if (row[0] - grid.x(i)).abs() > 1e-9 * grid.length() {
            return Err(SgError::Format(format!("row {i} is off the uniform grid")));
        }
    }
    Field::new(grid, rows.into_iter().map(|r| r[1]).collect())
}

/// Numeric CSV rows with exactly `cols` columns; a non-numeric first line
/// is taken as a header.
pub fn read_rows<R: BufRead>(r: R, cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == cols => out.push(v),
            Ok(v) => {
                return Err(SgError::Format(format!(
                    "line {}: expected {cols} columns, found {}",
                    i + 1,
                    v.len()
                )))
            }
            Err(_) if i == 0 => continue,
            Err(e) => return Err(SgError::Format(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-4.0, 4.0, 32).unwrap()
    }

    #[test]
    fn binary_roundtrip_is_bit_exact() {
        let g = grid();
        let phi = Field::from_fn(g, |x| (-x * x).exp() / 3.0).unwrap();
        let phi_t = Field::from_fn(g, |x| x.sin() * 1e-7 * (-x * x).exp()).unwrap();
        let s = State::raw(phi, phi_t, 1.25, Topology::Zero);
        let mut buf = Vec::new();
        write_binary(&mut buf, &Snapshot::State(s.clone())).unwrap();
        assert_eq!(&buf[..4], b"SGF1");
        assert_eq!(buf.len(), 36 + 2 * 32 * 8);
        let back = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, Snapshot::State(s));
    }

    #[test]
    fn complex_roundtrip() {
        let f = Field::from_fn(grid(), |x| Complex64::new(x, -x * x)).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &Snapshot::Complex(f.clone())).unwrap();
        assert_eq!(read_binary(&mut buf.as_slice()).unwrap(), Snapshot::Complex(f));
    }

    #[test]
    fn bad_magic() {
        let buf = vec![0u8; 64];
        assert!(matches!(read_binary(&mut buf.as_slice()), Err(SgError::Format(_))));
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let f = Field::from_fn(grid(), |x| (0.1 * x).exp() / 7.0).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
}
