//! Twisted convolution of phase-space fields and the reproducing projection.
//!
//! `(F ♯ G)(x,ξ) = (2π)^{-d/2} ∬ F(x-y, ξ-η) G(y,η) e^{-i<x-y,η>} dy dη`
//!
//! Only `d = 1` phase grids are supported.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::stft::{stft, PhaseField};

/// Operands must fall below this fraction of their peak on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;

fn check_operands(f: &PhaseField, g: &PhaseField) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("twisted convolution operands use different phase grids".into()));
    }
    if f.grid().dim() != 1 {
        return Err(Error::Unsupported(format!(
            "twisted convolution on R^{}; only d = 1 is implemented",
            2 * f.grid().dim()
        )));
    }
    for (name, op) in [("F", f), ("G", g)] {
        let b = op.boundary_sup();
        if b > BOUNDARY_TOL * op.sup_norm() {
            return Err(Error::BoundaryTail(format!(
                "{name} reaches {b:e} on the boundary (peak {:e})",
                op.sup_norm()
            )));
        }
    }
    Ok(())
}

fn as2(f: &PhaseField) -> Array2<Complex64> {
    f.samples().clone().into_dimensionality().expect("d = 1 phase field is two-dimensional")
}

/// Definitional `O(N²)` double sum per output point.
pub fn twisted_convolution_direct(f: &PhaseField, g: &PhaseField) -> Result<PhaseField> {
    check_operands(f, g)?;
    let grid = f.grid().clone();
    let (xa, ka) = (grid.x_axes[0], grid.xi_axes[0]);
    let (nx, nk) = (xa.len(), ka.len());
    let (hx, hk) = (xa.half_count() as i64, ka.half_count() as i64);
    let (fa, ga) = (as2(f), as2(g));
    let scale = grid.cell_volume() / (2.0 * PI).sqrt();
    let rows: Vec<Vec<Complex64>> = (0..nx)
        .into_par_iter()
        .map(|ix| {
            (0..nk)
                .map(|ik| {
                    let mut s = Complex64::new(0.0, 0.0);
                    for iy in 0..nx {
                        let iu = ix as i64 - iy as i64 + hx;
                        if iu < 0 || iu >= nx as i64 {
                            continue;
                        }
                        let u = xa.point(iu as usize);
                        for ie in 0..nk {
                            let iv = ik as i64 - ie as i64 + hk;
                            if iv < 0 || iv >= nk as i64 {
                                continue;
                            }
                            let tw = Complex64::from_polar(1.0, -u * ka.point(ie));
                            s += fa[[iu as usize, iv as usize]] * ga[[iy, ie]] * tw;
                        }
                    }
                    s * scale
                })
                .collect()
        })
        .collect();
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    let samples = ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&[nx, nk]), flat)
        .map_err(|e| Error::Format(e.to_string()))?;
    PhaseField::new(grid, samples)
}

/// Fast twisted convolution: for each output row `x` the η-sum is a
/// linear convolution in ξ, accumulated over `y` in the FFT domain.
pub fn twisted_convolution(f: &PhaseField, g: &PhaseField) -> Result<PhaseField> {
    check_operands(f, g)?;
    let grid = f.grid().clone();
    let (xa, ka) = (grid.x_axes[0], grid.xi_axes[0]);
    let (nx, nk) = (xa.len(), ka.len());
    let (hx, hk) = (xa.half_count() as i64, ka.half_count());
    let (fa, ga) = (as2(f), as2(g));
    let p = (2 * nk - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(p);
    let inv = planner.plan_fft_inverse(p);

    let spectrum = |row: &mut dyn Iterator<Item = Complex64>| {
        let mut buf: Vec<Complex64> = row.collect();
        buf.resize(p, Complex64::new(0.0, 0.0));
        fwd.process(&mut buf);
        buf
    };
    let f_hat: Vec<Vec<Complex64>> = (0..nx).map(|iu| spectrum(&mut fa.row(iu).iter().copied())).collect();
    let twist: Vec<Vec<Complex64>> = (0..nx)
        .map(|iu| {
            let u = xa.point(iu);
            (0..nk).map(|ie| Complex64::from_polar(1.0, -u * ka.point(ie))).collect()
        })
        .collect();

    let scale = grid.cell_volume() / (2.0 * PI).sqrt() / p as f64;
    let rows: Vec<Vec<Complex64>> = (0..nx)
        .into_par_iter()
        .map(|ix| {
            let mut acc = vec![Complex64::new(0.0, 0.0); p];
            let mut buf = vec![Complex64::new(0.0, 0.0); p];
            for iy in 0..nx {
                let iu = ix as i64 - iy as i64 + hx;
                if iu < 0 || iu >= nx as i64 {
                    continue;
                }
                let iu = iu as usize;
                let grow = ga.row(iy);
                if grow.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                    continue;
                }
                for (ie, b) in buf.iter_mut().enumerate() {
                    *b = if ie < nk { grow[ie] * twist[iu][ie] } else { Complex64::new(0.0, 0.0) };
                }
                fwd.process(&mut buf);
                for ((a, b), fh) in acc.iter_mut().zip(&buf).zip(&f_hat[iu]) {
                    *a += b * fh;
                }
            }
            inv.process(&mut acc);
            (0..nk).map(|ik| acc[ik + hk] * scale).collect()
        })
        .collect();
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    let samples = ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&[nx, nk]), flat)
        .map_err(|e| Error::Format(e.to_string()))?;
    PhaseField::new(grid, samples)
}

/// `P_φ F = ‖φ‖^{-2} F ♯ V_φφ`, with `V_φφ` computed on `F`'s grid.
pub fn project_pphi(f: &PhaseField, window: &GridFunction) -> Result<PhaseField> {
    let n2 = window.l2_norm().powi(2);
    if n2 == 0.0 {
        return Err(Error::Degenerate("zero window".into()));
    }
    let vpp = stft(window, window, f.grid())?.field;
    Ok(twisted_convolution(f, &vpp)?.scale(Complex64::new(1.0 / n2, 0.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproducingResidual {
    /// Relative sup residual, or the absolute sup of the right side when
    /// the normalization `(φ3, φ1)` vanishes.
    pub residual: f64,
    pub relative: bool,
    pub normalization: (f64, f64),
}

const ORTHOGONAL_TOL: f64 = 1e-12;
const DEGENERATE_TOL: f64 = 1e-4;

/// Compares `(φ3,φ1) V_{φ2} f` with `(V_{φ1} f) ♯ (V_{φ2} φ3)` on `grid`.
pub fn reproducing_residual(
    f: &GridFunction,
    phi1: &GridFunction,
    phi2: &GridFunction,
    phi3: &GridFunction,
    grid: &crate::stft::PhaseGrid,
) -> Result<ReproducingResidual> {
    let ip = phi3.inner(phi1)?;
    let rhs = twisted_convolution(&stft(f, phi1, grid)?.field, &stft(phi3, phi2, grid)?.field)?;
    let normalization = (ip.re, ip.im);
    if ip.norm() <= ORTHOGONAL_TOL * phi1.l2_norm() * phi3.l2_norm() {
        let residual = rhs.sup_norm();
        if residual > DEGENERATE_TOL {
            return Err(Error::Degenerate(format!(
                "(φ3, φ1) = 0 but the twisted side reaches {residual:e}"
            )));
        }
        return Ok(ReproducingResidual { residual, relative: false, normalization });
    }
    let lhs = stft(f, phi2, grid)?.field.scale(ip);
    let scale = lhs.sup_norm();
    let diff = lhs.sup_distance(&rhs)?;
    let residual = if scale == 0.0 { diff } else { diff / scale };
    Ok(ReproducingResidual { residual, relative: true, normalization })
}
