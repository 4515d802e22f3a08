//! Field snapshot container.
//!
//! Little-endian binary: magic `KSNP`, `u32` version, `i32` k, `u64` nu, `u64` nx,
//! `u8` layout, `f64` time, `f64` M, `f64` a, then `u`, `cos θ`, `cos θ` weights
//! as `f64` arrays, then `Φ` and `Ψ²` as row-major `(re, im)` pairs (`cos θ` fastest).

use crate::error::{Error, Result};
use crate::field::{AngularLayout, FieldState, Grid};
use crate::geometry::KerrBackground;
use num_complex::Complex64 as C64;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"KSNP";
pub const VERSION: u32 = 1;

pub fn encode(state: &FieldState, bg: &KerrBackground) -> Vec<u8> {
    let g = &state.grid;
    let mut out = Vec::with_capacity(64 + 8 * (g.nu() + 2 * g.nx()) + 32 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&state.k.to_le_bytes());
    out.extend_from_slice(&(g.nu() as u64).to_le_bytes());
    out.extend_from_slice(&(g.nx() as u64).to_le_bytes());
    out.push(match g.layout {
        AngularLayout::CellCentered => 0,
        AngularLayout::Gauss => 1,
    });
    for v in [state.time, bg.mass, bg.spin] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in g.u.iter().chain(&g.costheta).chain(&g.costheta_weights) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for c in state.psi1.iter().chain(&state.psi2) {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self.buf.get(self.pos..end).ok_or_else(|| Error::Format("snapshot truncated".into()))?;
        self.pos = end;
        Ok(bytes.try_into().unwrap())
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| Ok(f64::from_le_bytes(self.take()?))).collect()
    }
}

/// Returns the state with `(M, a)` as stored in the header.
pub fn decode(buf: &[u8]) -> Result<(FieldState, f64, f64)> {
    let mut c = Cursor { buf, pos: 0 };
    if &c.take::<4>()? != MAGIC {
        return Err(Error::Format("not a field snapshot (bad magic)".into()));
    }
    let version = u32::from_le_bytes(c.take()?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let k = i32::from_le_bytes(c.take()?);
    let nu = u64::from_le_bytes(c.take()?) as usize;
    let nx = u64::from_le_bytes(c.take()?) as usize;
    let layout = match c.take::<1>()?[0] {
        0 => AngularLayout::CellCentered,
        1 => AngularLayout::Gauss,
        other => return Err(Error::Format(format!("unknown angular layout tag {other}"))),
    };
    let need = nu.checked_mul(nx).and_then(|n| n.checked_mul(32)).ok_or_else(|| Error::Format("snapshot dims overflow".into()))?;
    if buf.len() != 53 + 8 * (nu + 2 * nx) + need {
        return Err(Error::Format(format!("snapshot size {} does not match dims {nu} x {nx}", buf.len())));
    }
    let time = f64::from_le_bytes(c.take()?);
    let mass = f64::from_le_bytes(c.take()?);
    let spin = f64::from_le_bytes(c.take()?);
    let u = c.f64s(nu)?;
    let x = c.f64s(nx)?;
    let wx = c.f64s(nx)?;
    let grid = Grid::new(u, x, wx, layout)?;
    let mut pairs = |n: usize| -> Result<Vec<C64>> {
        let v = c.f64s(2 * n)?;
        Ok(v.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
    };
    let psi1 = pairs(nu * nx)?;
    let psi2 = pairs(nu * nx)?;
    Ok((FieldState { k, grid, psi1, psi2, time, derivatives: None }, mass, spin))
}

pub fn write(path: &Path, state: &FieldState, bg: &KerrBackground) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&encode(state, bg))?;
    f.flush()?;
    Ok(())
}

pub fn read(path: &Path) -> Result<(FieldState, f64, f64)> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    decode(&buf).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub const CSV_HEADER: &str = "u,costheta,re_phi,im_phi,re_psi2,im_psi2";

/// Lossy plotting export (8 significant digits).
pub fn to_csv(state: &FieldState) -> String {
    let g = &state.grid;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for iu in 0..g.nu() {
        for ix in 0..g.nx() {
            let i = g.index(iu, ix);
            let (a, b) = (state.psi1[i], state.psi2[i]);
            let _ = writeln!(out, "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}", g.u[iu], g.costheta[ix], a.re, a.im, b.re, b.im);
        }
    }
    out
}
