//! Discrete short-time Fourier transform
//!
//! `V_φf(x,ξ) = (2π)^{-d/2} ∫ f(y) conj(φ(y-x)) e^{-i<y,ξ>} dy`
//!
//! evaluated as a Riemann sum on the function grid. Window positions `x` are
//! restricted to grid multiples so translation is an index shift; frequencies
//! use an FFT when the ξ-step is FFT-dual to the grid and a direct DFT
//! otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{ArrayD, Axis as NdAxis, Dimension, IxDyn};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::lattice::{mixed_norm_samples, MixedNormSpec};
use crate::weights::WeightDescriptor;

/// Product phase-space grid: window positions × frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_axes: Vec<Axis>,
    pub xi_axes: Vec<Axis>,
}

impl PhaseGrid {
    pub fn new(x_axes: Vec<Axis>, xi_axes: Vec<Axis>) -> Result<Self> {
        if x_axes.is_empty() || x_axes.len() != xi_axes.len() {
            return Err(Error::DimensionMismatch { expected: x_axes.len(), got: xi_axes.len() });
        }
        Ok(Self { x_axes, xi_axes })
    }

    /// Window positions every `x_stride` samples of `axes`, frequencies on
    /// the FFT-dual lattice `2π/(N h) Z` up to `xi_extent` (clipped to the
    /// Nyquist band).
    pub fn fft_dual(axes: &[Axis], x_stride: usize, xi_extent: f64) -> Result<Self> {
        if x_stride == 0 {
            return Err(Error::InvalidParameter("x_stride must be positive".into()));
        }
        let mut x_axes = Vec::with_capacity(axes.len());
        let mut xi_axes = Vec::with_capacity(axes.len());
        for a in axes {
            let step = a.step * x_stride as f64;
            let half = a.half_count() / x_stride;
            x_axes.push(Axis::new(step, half as f64 * step)?);
            let dxi = 2.0 * PI / (a.len() as f64 * a.step);
            let limit = xi_extent.min(PI / a.step);
            let k = (limit / dxi * (1.0 + 1e-12)).floor();
            xi_axes.push(Axis { step: dxi, extent: k * dxi });
        }
        Self::new(x_axes, xi_axes)
    }

    /// Window positions every `x_stride` samples, frequencies with an
    /// arbitrary step `xi_step` up to `xi_extent`.
    pub fn with_xi_step(axes: &[Axis], x_stride: usize, xi_step: f64, xi_extent: f64) -> Result<Self> {
        let base = Self::fft_dual(axes, x_stride, 0.0)?;
        let k = (xi_extent / xi_step * (1.0 + 1e-12)).floor();
        let xi = Axis { step: xi_step, extent: k * xi_step };
        if !(xi_step > 0.0 && xi_step.is_finite()) {
            return Err(Error::InvalidParameter("xi_step must be positive".into()));
        }
        Self::new(base.x_axes, vec![xi; axes.len()])
    }

    pub fn dim(&self) -> usize {
        self.x_axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.x_axes.iter().chain(&self.xi_axes).map(Axis::len).collect()
    }

    /// Steps of all `2d` phase-space axes.
    pub fn steps(&self) -> Vec<f64> {
        self.x_axes.iter().chain(&self.xi_axes).map(|a| a.step).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.steps().iter().product()
    }

    /// Phase-space point `(x, ξ)` of a `2d` multi-index.
    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        self.x_axes
            .iter()
            .chain(&self.xi_axes)
            .zip(idx)
            .map(|(a, &i)| a.point(i))
            .collect()
    }

    /// Multi-index of the phase point `X` if it lies on the grid.
    pub fn index_of(&self, point: &[f64]) -> Option<Vec<usize>> {
        if point.len() != 2 * self.dim() {
            return None;
        }
        self.x_axes
            .iter()
            .chain(&self.xi_axes)
            .zip(point)
            .map(|(a, &p)| {
                let off = a.lattice_offset(p)?;
                let i = off + a.half_count() as i64;
                (i >= 0 && i < a.len() as i64).then_some(i as usize)
            })
            .collect()
    }
}

/// Samples of an arbitrary field on a phase grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    samples: ArrayD<Complex64>,
}

impl PhaseField {
    pub fn new(grid: PhaseGrid, samples: ArrayD<Complex64>) -> Result<Self> {
        if samples.shape() != grid.shape().as_slice() {
            return Err(Error::GridMismatch(format!(
                "field shape {:?} does not match phase grid {:?}",
                samples.shape(),
                grid.shape()
            )));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("phase field samples".into()));
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let shape = grid.shape();
        let samples = ArrayD::from_shape_fn(IxDyn(&shape), |idx| f(&grid.point(idx.slice())));
        Self::new(grid, samples)
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        let shape = grid.shape();
        Self { grid, samples: ArrayD::zeros(IxDyn(&shape)) }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn samples(&self) -> &ArrayD<Complex64> {
        &self.samples
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Discrete `L^1` norm `Σ |F| Δx Δξ`.
    pub fn l1_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self { grid: self.grid.clone(), samples: self.samples.mapv(|z| z * alpha) }
    }

    pub fn combine(&self, alpha: Complex64, other: &PhaseField, beta: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("phase grids differ".into()));
        }
        let mut samples = self.samples.mapv(|z| z * alpha);
        samples.zip_mut_with(&other.samples, |a, b| *a += b * beta);
        Ok(Self { grid: self.grid.clone(), samples })
    }

    /// `sup |self - other|`.
    pub fn sup_distance(&self, other: &PhaseField) -> Result<f64> {
        Ok(self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))?.sup_norm())
    }

    /// Largest modulus on the outermost layer of the phase grid.
    pub fn boundary_sup(&self) -> f64 {
        let shape = self.grid.shape();
        self.samples
            .indexed_iter()
            .filter(|(idx, _)| idx.slice().iter().zip(&shape).any(|(&i, &n)| i == 0 || i + 1 == n))
            .fold(0.0, |m, (_, z)| m.max(z.norm()))
    }
}

/// `V_φf` on a phase grid, tagged with the window's content hash.
#[derive(Clone, Debug, PartialEq)]
pub struct StftField {
    pub field: PhaseField,
    pub window_id: String,
}

impl StftField {
    pub fn grid(&self) -> &PhaseGrid {
        self.field.grid()
    }

    pub fn samples(&self) -> &ArrayD<Complex64> {
        self.field.samples()
    }
}

/// `φ(x) = π^{-d/4} e^{-|x|²/2}`, unit `L²` norm.
pub fn gaussian_window(axes: &[Axis]) -> Result<GridFunction> {
    let d = axes.len() as f64;
    let c = PI.powf(-d / 4.0);
    GridFunction::from_fn(axes.to_vec(), |x| {
        Complex64::new(c * (-0.5 * x.iter().map(|t| t * t).sum::<f64>()).exp(), 0.0)
    })
}

enum AxisDft {
    Fft { fft: Arc<dyn Fft<f64>>, bins: Vec<usize> },
    Direct { matrix: Vec<Complex64> },
}

/// Maps `N` samples on one function axis to `K` frequencies.
struct AxisPlan {
    n_in: usize,
    n_out: usize,
    dft: AxisDft,
    /// `e^{iLξ_k}` for the FFT path (the grid starts at `-L`).
    phase: Vec<Complex64>,
}

impl AxisPlan {
    fn new(axis: &Axis, xi: &Axis, planner: &mut FftPlanner<f64>) -> Result<Self> {
        let h = axis.step;
        let n_in = axis.len();
        let n_out = xi.len();
        if xi.extent > PI / h * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "ξ extent {} exceeds the Nyquist limit π/h = {}",
                xi.extent,
                PI / h
            )));
        }
        let freqs: Vec<f64> = (0..n_out).map(|k| xi.point(k)).collect();
        let m_real = 2.0 * PI / (xi.step * h);
        let m = m_real.round();
        let phase = freqs.iter().map(|&f| Complex64::from_polar(1.0, axis.extent * f)).collect();
        if (m_real - m).abs() <= 1e-9 * m_real && m as usize >= n_in {
            let m = m as usize;
            let half = xi.half_count() as i64;
            let bins = (0..n_out)
                .map(|k| (k as i64 - half).rem_euclid(m as i64) as usize)
                .collect();
            Ok(Self { n_in, n_out, dft: AxisDft::Fft { fft: planner.plan_fft_forward(m), bins }, phase })
        } else {
            let mut matrix = Vec::with_capacity(n_in * n_out);
            for &f in &freqs {
                for n in 0..n_in {
                    matrix.push(Complex64::from_polar(1.0, -axis.point(n) * f));
                }
            }
            Ok(Self { n_in, n_out, dft: AxisDft::Direct { matrix }, phase })
        }
    }

    fn is_fft(&self) -> bool {
        matches!(self.dft, AxisDft::Fft { .. })
    }

    fn apply(&self, input: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        match &self.dft {
            AxisDft::Fft { fft, bins } => {
                scratch.clear();
                scratch.extend_from_slice(input);
                scratch.resize(fft.len(), Complex64::new(0.0, 0.0));
                fft.process(scratch);
                for k in 0..self.n_out {
                    out[k] = scratch[bins[k]] * self.phase[k];
                }
            }
            AxisDft::Direct { matrix } => {
                for k in 0..self.n_out {
                    let row = &matrix[k * self.n_in..(k + 1) * self.n_in];
                    out[k] = row.iter().zip(input).map(|(w, v)| w * v).sum();
                }
            }
        }
    }
}

/// Applies per-axis DFT plans to every axis of `arr` in turn.
fn transform_axes(mut arr: ArrayD<Complex64>, plans: &[AxisPlan]) -> ArrayD<Complex64> {
    let mut scratch = Vec::new();
    let mut lin = Vec::new();
    let mut lout = Vec::new();
    for (ax, plan) in plans.iter().enumerate() {
        let mut shape = arr.shape().to_vec();
        shape[ax] = plan.n_out;
        let mut out = ArrayD::zeros(IxDyn(&shape));
        for (src, mut dst) in arr.lanes(NdAxis(ax)).into_iter().zip(out.lanes_mut(NdAxis(ax))) {
            lin.clear();
            lin.extend(src.iter().copied());
            lout.resize(plan.n_out, Complex64::new(0.0, 0.0));
            plan.apply(&lin, &mut lout, &mut scratch);
            for (d, v) in dst.iter_mut().zip(&lout) {
                *d = *v;
            }
        }
        arr = out;
    }
    arr
}

/// Window stride (in samples) of each x axis.
fn x_strides(f_axes: &[Axis], grid: &PhaseGrid) -> Result<Vec<usize>> {
    f_axes
        .iter()
        .zip(&grid.x_axes)
        .map(|(fa, xa)| {
            let s = xa.step / fa.step;
            if (s - s.round()).abs() > 1e-9 * s || s.round() < 1.0 {
                return Err(Error::Misaligned(format!(
                    "x step {} is not a multiple of the function step {}",
                    xa.step, fa.step
                )));
            }
            if xa.extent > fa.extent * (1.0 + 1e-12) {
                return Err(Error::Misaligned(format!(
                    "x extent {} exceeds the function grid extent {}",
                    xa.extent, fa.extent
                )));
            }
            Ok(s.round() as usize)
        })
        .collect()
}

/// Whether every axis of this grid is evaluated by FFT.
pub fn uses_fft(f_axes: &[Axis], grid: &PhaseGrid) -> Result<bool> {
    let mut planner = FftPlanner::new();
    let mut all = true;
    for (a, xi) in f_axes.iter().zip(&grid.xi_axes) {
        all &= AxisPlan::new(a, xi, &mut planner)?.is_fft();
    }
    Ok(all)
}

fn normalisation(f: &GridFunction) -> f64 {
    (2.0 * PI).powf(-(f.dim() as f64) / 2.0) * f.cell_volume()
}

/// `V_φf` on `grid`. `f` and `φ` must share a grid.
pub fn stft(f: &GridFunction, window: &GridFunction, grid: &PhaseGrid) -> Result<StftField> {
    f.ensure_same_grid(window)?;
    if grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: grid.dim() });
    }
    let strides = x_strides(f.axes(), grid)?;
    let mut planner = FftPlanner::new();
    let plans: Vec<AxisPlan> = f
        .axes()
        .iter()
        .zip(&grid.xi_axes)
        .map(|(a, xi)| AxisPlan::new(a, xi, &mut planner))
        .collect::<Result<_>>()?;

    let d = f.dim();
    let x_shape: Vec<usize> = grid.x_axes.iter().map(Axis::len).collect();
    let n_x: usize = x_shape.iter().product();
    let f_shape: Vec<usize> = f.axes().iter().map(Axis::len).collect();
    let norm = normalisation(f);
    let fs = f.samples();
    let ws = window.samples();

    let slices: Vec<ArrayD<Complex64>> = (0..n_x)
        .into_par_iter()
        .map(|lin| {
            let mut rem = lin;
            let mut shift = vec![0i64; d];
            for k in (0..d).rev() {
                let i = rem % x_shape[k];
                rem /= x_shape[k];
                shift[k] = (i as i64 - grid.x_axes[k].half_count() as i64) * strides[k] as i64;
            }
            let g = ArrayD::from_shape_fn(IxDyn(&f_shape), |idx| {
                let mut widx = Vec::with_capacity(d);
                for k in 0..d {
                    let j = idx[k] as i64 - shift[k];
                    if j < 0 || j >= f_shape[k] as i64 {
                        return Complex64::new(0.0, 0.0);
                    }
                    widx.push(j as usize);
                }
                fs[&idx] * ws[IxDyn(&widx)].conj()
            });
            transform_axes(g, &plans).mapv(|z| z * norm)
        })
        .collect();

    let mut shape = x_shape.clone();
    shape.extend(grid.xi_axes.iter().map(Axis::len));
    let flat: Vec<Complex64> = slices.into_iter().flat_map(|s| s.into_iter()).collect();
    let samples = ArrayD::from_shape_vec(IxDyn(&shape), flat)
        .map_err(|e| Error::Format(format!("stft assembly: {e}")))?;
    Ok(StftField {
        field: PhaseField::new(grid.clone(), samples)?,
        window_id: crate::format::window_id(window),
    })
}

/// Direct evaluation of `V_φf(x, ξ)` at one grid-aligned `x` and any `ξ`.
pub fn stft_point(f: &GridFunction, window: &GridFunction, x: &[f64], xi: &[f64]) -> Result<Complex64> {
    f.ensure_same_grid(window)?;
    let d = f.dim();
    if x.len() != d || xi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len().min(xi.len()) });
    }
    let shift: Vec<i64> = f
        .axes()
        .iter()
        .zip(x)
        .map(|(a, &v)| a.lattice_offset(v).ok_or_else(|| Error::Misaligned(format!("x = {v} is off the grid"))))
        .collect::<Result<_>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut off = vec![0i64; d];
    for (idx, v) in f.samples().indexed_iter() {
        let mut phase = 0.0;
        for k in 0..d {
            let half = f.axes()[k].half_count() as i64;
            off[k] = idx[k] as i64 - half - shift[k];
            phase -= f.axes()[k].point(idx[k]) * xi[k];
        }
        let w = window.at_offset(&off);
        if w.re != 0.0 || w.im != 0.0 {
            acc += v * w.conj() * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(acc * normalisation(f))
}

/// `e^{i<·,ξ0>} f(· - x0)`, zero where the shift leaves the grid.
pub fn tf_shift(f: &GridFunction, x0: &[f64], xi0: &[f64]) -> Result<GridFunction> {
    let d = f.dim();
    if x0.len() != d || xi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x0.len().min(xi0.len()) });
    }
    let shift: Vec<i64> = f
        .axes()
        .iter()
        .zip(x0)
        .map(|(a, &v)| a.lattice_offset(v).ok_or_else(|| Error::Misaligned(format!("shift {v} is off the grid"))))
        .collect::<Result<_>>()?;
    let axes = f.axes().to_vec();
    let shape: Vec<usize> = axes.iter().map(Axis::len).collect();
    let samples = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
        let mut off = Vec::with_capacity(d);
        let mut phase = 0.0;
        for k in 0..d {
            off.push(idx[k] as i64 - axes[k].half_count() as i64 - shift[k]);
            phase += axes[k].point(idx[k]) * xi0[k];
        }
        f.at_offset(&off) * Complex64::from_polar(1.0, phase)
    });
    GridFunction::new(axes, samples)
}

/// `‖V_φf · ω‖_B` with `B` the mixed norm `spec` on phase space.
pub fn modulation_norm(
    f: &GridFunction,
    omega: &WeightDescriptor,
    spec: &MixedNormSpec,
    window: &GridFunction,
    grid: &PhaseGrid,
) -> Result<f64> {
    let field = stft(f, window, grid)?;
    modulation_norm_of_field(&field.field, omega, spec)
}

/// Same as [`modulation_norm`] for an already computed field.
pub fn modulation_norm_of_field(field: &PhaseField, omega: &WeightDescriptor, spec: &MixedNormSpec) -> Result<f64> {
    let grid = field.grid();
    let n = 2 * grid.dim();
    if omega.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: omega.dim() });
    }
    let mut mags = field.samples().mapv(|z| z.norm());
    if !matches!(omega.kind(), crate::weights::WeightKind::Constant { c } if *c == 1.0) {
        for (idx, v) in mags.indexed_iter_mut() {
            if *v != 0.0 {
                *v *= omega.eval(&grid.point(idx.slice()))?;
            }
        }
    }
    mixed_norm_samples(&mags, &grid.steps(), spec)
}

/// `sup_X ω(X) |V_φf(X)|` over the phase grid.
pub fn weighted_sup(field: &PhaseField, omega: &WeightDescriptor) -> Result<f64> {
    let grid = field.grid();
    let mut m = 0.0f64;
    for (idx, z) in field.samples().indexed_iter() {
        if z.norm() > 0.0 {
            m = m.max(z.norm() * omega.eval(&grid.point(idx.slice()))?);
        }
    }
    Ok(m)
}

/// Fit parameters for [`gs_decay_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFitOptions {
    /// Only points with `|X| >= cutoff` enter the fit.
    pub cutoff: f64,
    /// Largest admissible `C`, relative to `sup |F|`.
    pub cap: f64,
    /// Samples below `noise_floor * sup |F|` are treated as round-off.
    pub noise_floor: f64,
}

impl Default for DecayFitOptions {
    fn default() -> Self {
        Self { cutoff: 1.0, cap: 1e3, noise_floor: 1e-13 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GsDecayFit {
    pub s: f64,
    pub t: f64,
    /// Largest `r` with `|F| <= C e^{-r(|x|^{1/t} + |ξ|^{1/s})}` on the fitted
    /// points for `C = cap · sup|F|`.
    pub fitted_r: f64,
    /// Mean slack `ln C - r ρ(X) - ln |F(X)|` over the fitted points.
    pub residual: f64,
    pub points_used: usize,
}

/// Fits the Gelfand–Shilov envelope exponent of a sampled field.
pub fn gs_decay_fit(field: &PhaseField, s: f64, t: f64, opts: &DecayFitOptions) -> Result<GsDecayFit> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter("s and t must be positive".into()));
    }
    let peak = field.sup_norm();
    if peak == 0.0 {
        return Err(Error::Degenerate("all-zero field".into()));
    }
    let grid = field.grid();
    let d = grid.dim();
    let ln_c = (opts.cap * peak).ln();
    let mut pts = Vec::new();
    for (idx, z) in field.samples().indexed_iter() {
        let p = grid.point(idx.slice());
        let radius = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mag = z.norm();
        if radius < opts.cutoff || mag <= opts.noise_floor * peak {
            continue;
        }
        let nx = p[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        let nxi = p[d..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let rho = nx.powf(1.0 / t) + nxi.powf(1.0 / s);
        if rho > 0.0 {
            pts.push((rho, mag.ln()));
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptySample("no field samples above the noise floor beyond the cutoff".into()));
    }
    let fitted_r = pts
        .iter()
        .map(|(rho, lm)| (ln_c - lm) / rho)
        .fold(f64::INFINITY, f64::min);
    let residual = pts.iter().map(|(rho, lm)| ln_c - fitted_r * rho - lm).sum::<f64>() / pts.len() as f64;
    Ok(GsDecayFit { s, t, fitted_r, residual, points_used: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes(h: f64, l: f64) -> Vec<Axis> {
        GridFunction::cube_axes(1, h, l).unwrap()
    }

    #[test]
    fn window_value_and_symmetry() {
        let phi = gaussian_window(&axes(1.0 / 16.0, 8.0)).unwrap();
        let mid = phi.axes()[0].half_count();
        assert!((phi.samples()[[mid]].re - PI.powf(-0.25)).abs() < 1e-15);
        let n = phi.axes()[0].len();
        for i in 0..n {
            assert_eq!(phi.samples()[[i]], phi.samples()[[n - 1 - i]]);
        }
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        let a = axes(0.125, 6.0);
        let phi = gaussian_window(&a).unwrap();
        let f = GridFunction::from_fn(a.clone(), |x| Complex64::new((-(x[0] - 1.0).powi(2)).exp(), x[0].sin() * 0.1)).unwrap();
        let g1 = PhaseGrid::fft_dual(&a, 4, 6.0).unwrap();
        assert!(uses_fft(&a, &g1).unwrap());
        let v1 = stft(&f, &phi, &g1).unwrap();
        for (idx, z) in v1.samples().indexed_iter() {
            let p = g1.point(idx.slice());
            let direct = stft_point(&f, &phi, &p[..1], &p[1..]).unwrap();
            assert!((z - direct).norm() < 1e-13, "{p:?}");
        }
    }

    #[test]
    fn nyquist_and_alignment_errors() {
        let a = axes(0.25, 4.0);
        let phi = gaussian_window(&a).unwrap();
        let g = PhaseGrid::new(a.clone(), vec![Axis::new(1.0, 20.0).unwrap()]).unwrap();
        assert!(matches!(stft(&phi, &phi, &g), Err(Error::InvalidParameter(_))));
        let g = PhaseGrid::new(vec![Axis::new(0.3, 3.0).unwrap()], vec![Axis::new(1.0, 2.0).unwrap()]).unwrap();
        assert!(matches!(stft(&phi, &phi, &g), Err(Error::Misaligned(_))));
        assert!(tf_shift(&phi, &[0.1], &[0.0]).is_err());
    }

    #[test]
    fn zero_function_gives_zero_field() {
        let a = axes(0.25, 4.0);
        let phi = gaussian_window(&a).unwrap();
        let zero = GridFunction::zeros(a.clone()).unwrap();
        let g = PhaseGrid::fft_dual(&a, 1, 4.0).unwrap();
        assert_eq!(stft(&zero, &phi, &g).unwrap().field.sup_norm(), 0.0);
    }

    #[test]
    fn decay_fit_is_scale_invariant_and_rejects_empty_regions() {
        let a = axes(0.125, 8.0);
        let phi = gaussian_window(&a).unwrap();
        let g = PhaseGrid::fft_dual(&a, 2, 8.0).unwrap();
        let v = stft(&phi, &phi, &g).unwrap().field;
        let opts = DecayFitOptions::default();
        let r1 = gs_decay_fit(&v, 0.5, 0.5, &opts).unwrap();
        let r2 = gs_decay_fit(&v.scale(Complex64::new(2.0, 0.0)), 0.5, 0.5, &opts).unwrap();
        assert!((r1.fitted_r - r2.fitted_r).abs() < 1e-12);
        let compact = PhaseField::from_fn(g.clone(), |p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            Complex64::new(if r2 < 0.5 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert!(matches!(gs_decay_fit(&compact, 0.5, 0.5, &opts), Err(Error::EmptySample(_))));
        assert!(gs_decay_fit(&PhaseField::zeros(g), 0.5, 0.5, &opts).is_err());
    }
}
