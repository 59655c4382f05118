//! Little-endian binary layouts for grid functions and phase-space fields.
//!
//! `MSGF`: magic, u32 version, u32 d, `d × (f64 step, f64 extent)`, then
//! row-major complex128 samples.
//! `MSSF`: magic, u32 version, u32 d, x-grid block, ξ-grid block, 32-byte
//! window hash (zero for plain phase fields), then row-major samples.

use std::io::{Read, Write};

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::stft::{PhaseField, PhaseGrid, StftField};

pub const GRID_MAGIC: &[u8; 4] = b"MSGF";
pub const FIELD_MAGIC: &[u8; 4] = b"MSSF";
pub const VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn put_axes(w: &mut impl Write, axes: &[Axis]) -> Result<()> {
    for a in axes {
        put_f64(w, a.step)?;
        put_f64(w, a.extent)?;
    }
    Ok(())
}

fn get_axes(r: &mut impl Read, d: usize) -> Result<Vec<Axis>> {
    (0..d)
        .map(|_| {
            let step = get_f64(r)?;
            let extent = get_f64(r)?;
            Axis::new(step, extent)
        })
        .collect()
}

fn put_samples(w: &mut impl Write, samples: &ArrayD<Complex64>) -> Result<()> {
    let mut buf = Vec::with_capacity(samples.len() * 16);
    for z in samples.iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_samples(r: &mut impl Read, shape: &[usize]) -> Result<ArrayD<Complex64>> {
    let n: usize = shape.iter().product();
    let mut buf = vec![0u8; n * 16];
    r.read_exact(&mut buf)?;
    let vals = buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    ArrayD::from_shape_vec(IxDyn(shape), vals).map_err(|e| Error::Format(e.to_string()))
}

fn check_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<usize> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = get_u32(r)? as usize;
    if d == 0 || d > 16 {
        return Err(Error::Format(format!("implausible dimension {d}")));
    }
    Ok(d)
}

pub fn write_grid_function(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    w.write_all(GRID_MAGIC)?;
    put_u32(w, VERSION)?;
    put_u32(w, f.dim() as u32)?;
    put_axes(w, f.axes())?;
    put_samples(w, f.samples())
}

pub fn read_grid_function(r: &mut impl Read) -> Result<GridFunction> {
    let d = check_header(r, GRID_MAGIC)?;
    let axes = get_axes(r, d)?;
    let shape: Vec<usize> = axes.iter().map(Axis::len).collect();
    let samples = get_samples(r, &shape)?;
    GridFunction::new(axes, samples)
}

pub fn grid_function_bytes(f: &GridFunction) -> Vec<u8> {
    let mut buf = Vec::new();
    write_grid_function(&mut buf, f).expect("writing to a Vec cannot fail");
    buf
}

/// Hex SHA-256 of the window's binary encoding.
pub fn window_id(window: &GridFunction) -> String {
    let digest = Sha256::digest(grid_function_bytes(window));
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn decode_hex(s: &str) -> Result<[u8; 32]> {
    let mut out = [0u8; 32];
    if s.len() != 64 {
        return Err(Error::Format(format!("window id must be 64 hex digits, got {}", s.len())));
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).map_err(|e| Error::Format(e.to_string()))?;
    }
    Ok(out)
}

fn write_field_raw(w: &mut impl Write, field: &PhaseField, id: [u8; 32]) -> Result<()> {
    let grid = field.grid();
    w.write_all(FIELD_MAGIC)?;
    put_u32(w, VERSION)?;
    put_u32(w, grid.dim() as u32)?;
    put_axes(w, &grid.x_axes)?;
    for a in &grid.xi_axes {
        put_f64(w, a.step)?;
        put_f64(w, a.extent)?;
    }
    w.write_all(&id)?;
    put_samples(w, field.samples())
}

pub fn write_phase_field(w: &mut impl Write, field: &PhaseField) -> Result<()> {
    write_field_raw(w, field, [0u8; 32])
}

pub fn write_stft_field(w: &mut impl Write, field: &StftField) -> Result<()> {
    write_field_raw(w, &field.field, decode_hex(&field.window_id)?)
}

/// Reads an `MSSF` stream; the window id is `None` for plain phase fields.
pub fn read_field(r: &mut impl Read) -> Result<(PhaseField, Option<String>)> {
    let d = check_header(r, FIELD_MAGIC)?;
    let x_axes = get_axes(r, d)?;
    let xi_axes = (0..d)
        .map(|_| {
            let step = get_f64(r)?;
            let extent = get_f64(r)?;
            if !(step > 0.0 && extent >= 0.0 && step.is_finite() && extent.is_finite()) {
                return Err(Error::Format("invalid ξ axis".into()));
            }
            Ok(Axis { step, extent })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut id = [0u8; 32];
    r.read_exact(&mut id)?;
    let grid = PhaseGrid::new(x_axes, xi_axes)?;
    let samples = get_samples(r, &grid.shape())?;
    let field = PhaseField::new(grid, samples)?;
    let id = (id != [0u8; 32]).then(|| id.iter().map(|b| format!("{b:02x}")).collect());
    Ok((field, id))
}
