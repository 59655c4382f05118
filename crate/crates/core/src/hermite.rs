//! Hermite functions, Hermite expansions and the Bargmann transform.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::stft::{gaussian_window, stft_point, PhaseField};

pub const DEFAULT_ORDER_CAP: usize = 32;

/// `h_0, ..., h_n` at `x` by the normalized three-term recurrence.
pub fn hermite_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let h0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(h0);
    if n >= 1 {
        out.push(2f64.sqrt() * x * h0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Smallest extent that resolves `h_n`.
pub fn required_extent(n: usize) -> f64 {
    (2.0 * n as f64 + 1.0).sqrt() + 4.0
}

fn check_orders(orders: &[usize], axes: &[Axis], cap: usize) -> Result<()> {
    if orders.len() != axes.len() {
        return Err(Error::DimensionMismatch { expected: axes.len(), got: orders.len() });
    }
    for (&n, a) in orders.iter().zip(axes) {
        if n > cap {
            return Err(Error::InvalidParameter(format!("order {n} exceeds the cap {cap}")));
        }
        if a.extent + 1e-12 < required_extent(n) {
            return Err(Error::InvalidParameter(format!(
                "extent {} too small for order {n} (needs {:.4})",
                a.extent,
                required_extent(n)
            )));
        }
    }
    Ok(())
}

/// Per-axis tables `table[k][n][i] = h_n(x_i)` on axis `k`.
fn tables(axes: &[Axis], orders: &[usize]) -> Vec<Vec<Vec<f64>>> {
    axes.iter()
        .zip(orders)
        .map(|(a, &n)| {
            let cols: Vec<Vec<f64>> = (0..a.len()).map(|i| hermite_values(n, a.point(i))).collect();
            (0..=n).map(|m| cols.iter().map(|c| c[m]).collect()).collect()
        })
        .collect()
}

/// `h_α` sampled on `axes`.
pub fn hermite_function(alpha: &[usize], axes: &[Axis]) -> Result<GridFunction> {
    hermite_function_capped(alpha, axes, DEFAULT_ORDER_CAP)
}

pub fn hermite_function_capped(alpha: &[usize], axes: &[Axis], cap: usize) -> Result<GridFunction> {
    check_orders(alpha, axes, cap)?;
    let t = tables(axes, alpha);
    let f = GridFunction::zeros(axes.to_vec())?;
    let samples = ndarray::ArrayD::from_shape_fn(f.samples().raw_dim(), |idx| {
        let mut v = 1.0;
        for (k, &n) in alpha.iter().enumerate() {
            v *= t[k][n][idx[k]];
        }
        Complex64::new(v, 0.0)
    });
    GridFunction::new(axes.to_vec(), samples)
}

/// Coefficients `c_α` for `α ≤ max_order` componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion {
    pub max_order: Vec<usize>,
    pub coeffs: BTreeMap<Vec<usize>, Complex64>,
}

fn all_indices(max_order: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in max_order {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=n).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

impl HermiteExpansion {
    pub fn dim(&self) -> usize {
        self.max_order.len()
    }

    pub fn coeff(&self, alpha: &[usize]) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    /// `Σ |c_α|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(a, c)| json!({"alpha": a, "re": c.re, "im": c.im}))
            .collect();
        json!({"N": self.max_order, "coeffs": coeffs})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let max_order: Vec<usize> = serde_json::from_value(
            v.get("N").cloned().ok_or_else(|| Error::Format("missing \"N\"".into()))?,
        )?;
        let mut coeffs = BTreeMap::new();
        let list = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("missing \"coeffs\" array".into()))?;
        for e in list {
            let alpha: Vec<usize> = serde_json::from_value(
                e.get("alpha").cloned().ok_or_else(|| Error::Format("coefficient without alpha".into()))?,
            )?;
            if alpha.len() != max_order.len() || alpha.iter().zip(&max_order).any(|(a, n)| a > n) {
                return Err(Error::Format(format!("multi-index {alpha:?} outside N = {max_order:?}")));
            }
            let re = e.get("re").and_then(Value::as_f64).unwrap_or(0.0);
            let im = e.get("im").and_then(Value::as_f64).unwrap_or(0.0);
            coeffs.insert(alpha, Complex64::new(re, im));
        }
        Ok(Self { max_order, coeffs })
    }

    /// `Σ c_α z^α / sqrt(α!)`, the Bargmann transform of the truncated series.
    pub fn bargmann(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .zip(&self.max_order)
            .map(|(&zk, &n)| {
                let mut p = Vec::with_capacity(n + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for m in 0..=n {
                    p.push(acc);
                    acc = acc * zk / ((m + 1) as f64).sqrt();
                }
                p
            })
            .collect();
        Ok(self
            .coeffs
            .iter()
            .map(|(a, c)| a.iter().enumerate().fold(*c, |v, (k, &m)| v * powers[k][m]))
            .sum())
    }
}

/// `c_α = (f, h_α)` for all `α ≤ max_order`.
pub fn hermite_analyze(f: &GridFunction, max_order: &[usize]) -> Result<HermiteExpansion> {
    check_orders(max_order, f.axes(), DEFAULT_ORDER_CAP)?;
    let t = tables(f.axes(), max_order);
    let vol = f.cell_volume();
    let indices = all_indices(max_order);
    let coeffs: Vec<(Vec<usize>, Complex64)> = indices
        .into_par_iter()
        .map(|alpha| {
            let mut s = Complex64::new(0.0, 0.0);
            for (idx, v) in f.samples().indexed_iter() {
                let mut w = 1.0;
                for (k, &n) in alpha.iter().enumerate() {
                    w *= t[k][n][idx[k]];
                }
                s += v * w;
            }
            (alpha, s * vol)
        })
        .collect();
    Ok(HermiteExpansion { max_order: max_order.to_vec(), coeffs: coeffs.into_iter().collect() })
}

/// `Σ c_α h_α` on `axes`.
pub fn hermite_synthesize(e: &HermiteExpansion, axes: &[Axis]) -> Result<GridFunction> {
    check_orders(&e.max_order, axes, DEFAULT_ORDER_CAP)?;
    let t = tables(axes, &e.max_order);
    let zero = GridFunction::zeros(axes.to_vec())?;
    let samples = ndarray::ArrayD::from_shape_fn(zero.samples().raw_dim(), |idx| {
        e.coeffs
            .iter()
            .map(|(a, c)| a.iter().enumerate().fold(*c, |v, (k, &n)| v * t[k][n][idx[k]]))
            .sum()
    });
    GridFunction::new(axes.to_vec(), samples)
}

/// Bargmann value in log-magnitude/phase form. `value` is `None` when the
/// modulus is not representable as an `f64`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BargmannValue {
    pub log_modulus: f64,
    pub phase: f64,
    pub value: Option<Complex64>,
    pub overflow: bool,
}

impl BargmannValue {
    fn from_parts(log_prefactor: f64, phase_shift: f64, v: Complex64) -> Self {
        if v.norm() == 0.0 {
            return Self { log_modulus: f64::NEG_INFINITY, phase: 0.0, value: Some(v), overflow: false };
        }
        let log_modulus = log_prefactor + v.norm().ln();
        let phase = v.arg() + phase_shift;
        let overflow = log_modulus >= f64::MAX.ln();
        let value = (!overflow).then(|| Complex64::from_polar(log_modulus.exp(), phase));
        Self { log_modulus, phase, value, overflow }
    }

    fn direct(v: Complex64) -> Self {
        Self::from_parts(0.0, 0.0, v)
    }

    pub fn modulus(&self) -> f64 {
        self.log_modulus.exp()
    }
}

fn uv_prefactor(x: &[f64], xi: &[f64]) -> (f64, f64) {
    let d = x.len() as f64;
    let r2: f64 = x.iter().chain(xi).map(|v| v * v).sum();
    let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
    (0.5 * d * (2.0 * PI).ln() + 0.5 * r2, -dot)
}

/// `(U_V V_φf)(x,ξ) = (2π)^{d/2} e^{(|x|²+|ξ|²)/2} e^{-i<x,ξ>} V_φf(√2 x, -√2 ξ)`
/// with the Gaussian window, evaluated on demand. `√2 x` must lie on the
/// grid of `f`.
pub fn bargmann_point(f: &GridFunction, x: &[f64], xi: &[f64]) -> Result<BargmannValue> {
    let d = f.dim();
    if x.len() != d || xi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len().min(xi.len()) });
    }
    let sx: Vec<f64> = x.iter().map(|v| v * 2f64.sqrt()).collect();
    let sxi: Vec<f64> = xi.iter().map(|v| -v * 2f64.sqrt()).collect();
    for (a, (&p, &q)) in f.axes().iter().zip(sx.iter().zip(&sxi)) {
        if a.lattice_offset(p).is_none() || p.abs() > a.extent * (1.0 + 1e-12) {
            return Err(Error::Misaligned(format!("√2·x = {p} is not a grid point")));
        }
        if q.abs() > PI / a.step * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("√2·ξ = {q} beyond the Nyquist band")));
        }
    }
    let phi = gaussian_window(f.axes())?;
    let v = stft_point(f, &phi, &sx, &sxi)?;
    let (lp, ph) = uv_prefactor(x, xi);
    Ok(BargmannValue::from_parts(lp, ph, v))
}

/// Same conjugation applied to a precomputed Gaussian-window field; the
/// point `(√2 x, -√2 ξ)` must be on the field's grid.
pub fn bargmann_from_field(field: &PhaseField, x: &[f64], xi: &[f64]) -> Result<BargmannValue> {
    let mut p: Vec<f64> = x.iter().map(|v| v * 2f64.sqrt()).collect();
    p.extend(xi.iter().map(|v| -v * 2f64.sqrt()));
    let idx = field
        .grid()
        .index_of(&p)
        .ok_or_else(|| Error::Misaligned(format!("phase point {p:?} is not on the field grid")))?;
    let v = field.samples()[ndarray::IxDyn(&idx)];
    let (lp, ph) = uv_prefactor(x, xi);
    Ok(BargmannValue::from_parts(lp, ph, v))
}

/// Truncated-series Bargmann transform at `z = x + iξ`.
pub fn bargmann_expansion(e: &HermiteExpansion, x: &[f64], xi: &[f64]) -> Result<BargmannValue> {
    let z: Vec<Complex64> = x.iter().zip(xi).map(|(&a, &b)| Complex64::new(a, b)).collect();
    Ok(BargmannValue::direct(e.bargmann(&z)?))
}

/// Direct quadrature of `∫ f(y) A(z,y) dy` with the Bargmann kernel
/// `A(z,y) = π^{-d/4} exp(-(<z,z> + |y|²)/2 + √2 <z,y>)`.
pub fn bargmann_kernel(f: &GridFunction, z: &[Complex64]) -> Result<Complex64> {
    let d = f.dim();
    if z.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: z.len() });
    }
    let kernels: Vec<Vec<Complex64>> = f
        .axes()
        .iter()
        .zip(z)
        .map(|(a, &zk)| {
            (0..a.len())
                .map(|i| {
                    let y = a.point(i);
                    (-(zk * zk + y * y) / 2.0 + 2f64.sqrt() * zk * y).exp() * PI.powf(-0.25)
                })
                .collect()
        })
        .collect();
    let mut s = Complex64::new(0.0, 0.0);
    for (idx, v) in f.samples().indexed_iter() {
        let mut w = *v;
        for (k, table) in kernels.iter().enumerate() {
            w *= table[idx[k]];
        }
        s += w;
    }
    Ok(s * f.cell_volume())
}
