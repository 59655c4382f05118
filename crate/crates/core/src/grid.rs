//! Uniform symmetric grids and sampled functions on them.

use ndarray::{ArrayD, Dimension, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One axis of a symmetric uniform grid `{-L, -L+h, ..., L}`.
///
/// `extent` must be an integer multiple of `step`, so the axis always has an
/// odd number of points and contains the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub step: f64,
    pub extent: f64,
}

impl Axis {
    pub fn new(step: f64, extent: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!("axis step must be positive, got {step}")));
        }
        if !(extent.is_finite() && extent >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "axis extent must be non-negative, got {extent}"
            )));
        }
        let ratio = extent / step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Misaligned(format!(
                "extent {extent} is not a multiple of step {step}"
            )));
        }
        Ok(Self { step, extent })
    }

    /// Number of points on the positive half axis (excluding 0).
    pub fn half_count(&self) -> usize {
        (self.extent / self.step).round() as usize
    }

    pub fn len(&self) -> usize {
        2 * self.half_count() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the `i`-th sample.
    pub fn point(&self, i: usize) -> f64 {
        (i as f64 - self.half_count() as f64) * self.step
    }

    /// Signed offset (in samples) of `x` from the origin if `x` sits on this
    /// grid's lattice `step * Z`.
    pub fn lattice_offset(&self, x: f64) -> Option<i64> {
        let r = x / self.step;
        let n = r.round();
        ((r - n).abs() <= 1e-9 * r.abs().max(1.0)).then_some(n as i64)
    }
}

/// Complex samples of a function on a symmetric truncated grid in `d`
/// dimensions. Samples are stored row-major, axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    axes: Vec<Axis>,
    samples: ArrayD<Complex64>,
}

impl GridFunction {
    pub fn new(axes: Vec<Axis>, samples: ArrayD<Complex64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one axis".into()));
        }
        let shape: Vec<usize> = axes.iter().map(Axis::len).collect();
        if samples.shape() != shape.as_slice() {
            return Err(Error::GridMismatch(format!(
                "sample shape {:?} does not match grid shape {:?}",
                samples.shape(),
                shape
            )));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("grid function samples".into()));
        }
        Ok(Self { axes, samples })
    }

    pub fn zeros(axes: Vec<Axis>) -> Result<Self> {
        let shape: Vec<usize> = axes.iter().map(Axis::len).collect();
        Self::new(axes, ArrayD::zeros(IxDyn(&shape)))
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(axes: Vec<Axis>, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let shape: Vec<usize> = axes.iter().map(Axis::len).collect();
        let mut x = vec![0.0; axes.len()];
        let samples = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
            for (k, axis) in axes.iter().enumerate() {
                x[k] = axis.point(idx[k]);
            }
            f(&x)
        });
        Self::new(axes, samples)
    }

    /// Isotropic grid with the same step and extent on every axis.
    pub fn cube_axes(dim: usize, step: f64, extent: f64) -> Result<Vec<Axis>> {
        let axis = Axis::new(step, extent)?;
        Ok(vec![axis; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn samples(&self) -> &ArrayD<Complex64> {
        &self.samples
    }

    pub fn into_samples(self) -> ArrayD<Complex64> {
        self.samples
    }

    /// Riemann cell volume `h_1 ... h_d`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.axes == other.axes
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.axes, other.axes
            )))
        }
    }

    /// Coordinates of the sample with multi-index `idx`.
    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.point(i))
            .collect()
    }

    /// Sample at a signed lattice offset from the origin, zero outside the grid.
    pub fn at_offset(&self, offset: &[i64]) -> Complex64 {
        let mut idx = Vec::with_capacity(offset.len());
        for (o, a) in offset.iter().zip(&self.axes) {
            let i = o + a.half_count() as i64;
            if i < 0 || i >= a.len() as i64 {
                return Complex64::new(0.0, 0.0);
            }
            idx.push(i as usize);
        }
        self.samples[IxDyn(&idx)]
    }

    /// Discrete inner product `h^d * sum f conj(g)`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.ensure_same_grid(other)?;
        let s: Complex64 = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        (s * self.cell_volume()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).sum::<f64>() * self.cell_volume()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn scale(&self, alpha: Complex64) -> GridFunction {
        Self {
            axes: self.axes.clone(),
            samples: self.samples.mapv(|z| z * alpha),
        }
    }

    /// `alpha * self + beta * other` on a shared grid.
    pub fn combine(&self, alpha: Complex64, other: &GridFunction, beta: Complex64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let mut samples = self.samples.mapv(|z| z * alpha);
        samples.zip_mut_with(&other.samples, |a, b| *a += b * beta);
        Ok(Self { axes: self.axes.clone(), samples })
    }

    /// Largest sample modulus on the outermost layer of the grid.
    pub fn boundary_sup(&self) -> f64 {
        let mut m = 0.0f64;
        for (idx, z) in self.samples.indexed_iter() {
            let on_edge = idx
                .slice()
                .iter()
                .zip(&self.axes)
                .any(|(&i, a)| i == 0 || i + 1 == a.len());
            if on_edge {
                m = m.max(z.norm());
            }
        }
        m
    }
}
