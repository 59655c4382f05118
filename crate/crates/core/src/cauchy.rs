//! Taylor coefficients of entire functions from samples on poly-disc tori.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::{ArrayD, Axis as NdAxis, Dimension, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Values of `F` at `z_j = R e^{2πi k_j / M}` for `k ∈ {0..M-1}^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDiscSamples {
    radius: f64,
    resolution: usize,
    samples: ArrayD<Complex64>,
}

impl PolyDiscSamples {
    pub fn new(radius: f64, resolution: usize, samples: ArrayD<Complex64>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if resolution == 0 || samples.ndim() == 0 || samples.shape().iter().any(|&n| n != resolution) {
            return Err(Error::GridMismatch(format!(
                "torus samples of shape {:?} for resolution {resolution}",
                samples.shape()
            )));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("torus samples".into()));
        }
        Ok(Self { radius, resolution, samples })
    }

    pub fn from_fn(
        dim: usize,
        radius: f64,
        resolution: usize,
        f: impl Fn(&[Complex64]) -> Complex64,
    ) -> Result<Self> {
        let shape = vec![resolution; dim];
        let samples = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
            let z: Vec<Complex64> = idx
                .slice()
                .iter()
                .map(|&k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / resolution as f64))
                .collect();
            f(&z)
        });
        Self::new(radius, resolution, samples)
    }

    /// Like [`from_fn`](Self::from_fn) for a fallible evaluator.
    pub fn try_from_fn(
        dim: usize,
        radius: f64,
        resolution: usize,
        f: impl Fn(&[Complex64]) -> Result<Complex64>,
    ) -> Result<Self> {
        let shape = vec![resolution; dim];
        let mut vals = Vec::with_capacity(resolution.pow(dim as u32));
        for idx in ndarray::indices(IxDyn(&shape)) {
            let z: Vec<Complex64> = idx
                .slice()
                .iter()
                .map(|&k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / resolution as f64))
                .collect();
            vals.push(f(&z)?);
        }
        let samples = ArrayD::from_shape_vec(IxDyn(&shape), vals).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(radius, resolution, samples)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.samples.ndim()
    }

    pub fn samples(&self) -> &ArrayD<Complex64> {
        &self.samples
    }

    /// Sampled `sup |F|` on the torus.
    pub fn sup(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaylorCoefficients {
    pub radius: f64,
    pub order_cap: usize,
    #[serde(serialize_with = "serialize_coeffs")]
    pub coeffs: BTreeMap<Vec<usize>, Complex64>,
    /// Sampled `sup |F|` on the `2R` torus, when provided.
    pub c_r: Option<f64>,
    /// Largest `|a(α)| (2R)^{|α|} / C_R`.
    pub worst_bound_ratio: Option<f64>,
}

fn serialize_coeffs<S: serde::Serializer>(m: &BTreeMap<Vec<usize>, Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for (a, c) in m {
        seq.serialize_element(&serde_json::json!({"alpha": a, "re": c.re, "im": c.im}))?;
    }
    seq.end()
}

const BOUND_RTOL: f64 = 1e-9;
const BOUND_ATOL: f64 = 1e-12;

/// Discrete iterated Cauchy integrals `a(α) = mean(F(z) z^{-α})` for
/// `α ≤ K` componentwise.
fn raw_coefficients(f: &PolyDiscSamples, k: usize) -> Result<BTreeMap<Vec<usize>, Complex64>> {
    let m = f.resolution;
    if m < 4 * k {
        return Err(Error::InvalidParameter(format!(
            "aliasing: resolution {m} is below 4·K = {}",
            4 * k
        )));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let mut arr = f.samples.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for ax in 0..arr.ndim() {
        for mut lane in arr.lanes_mut(NdAxis(ax)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process(&mut buf);
            for (v, b) in lane.iter_mut().zip(&buf) {
                *v = *b / m as f64;
            }
        }
    }
    let mut out = BTreeMap::new();
    let cap = vec![k + 1; f.dim()];
    for idx in ndarray::indices(IxDyn(&cap)) {
        let alpha: Vec<usize> = idx.slice().to_vec();
        let order: usize = alpha.iter().sum();
        out.insert(alpha.clone(), arr[IxDyn(&alpha)] * f.radius.powi(-(order as i32)));
    }
    Ok(out)
}

/// Taylor coefficients up to order `K` per axis. When `outer` (samples on
/// the `2R` torus) is given, `C_R` is measured there and the bound
/// `|a(α)| <= C_R (2R)^{-|α|}` is enforced.
pub fn taylor_from_cauchy(
    f: &PolyDiscSamples,
    k: usize,
    outer: Option<&PolyDiscSamples>,
) -> Result<TaylorCoefficients> {
    let coeffs = raw_coefficients(f, k)?;
    let (c_r, worst_bound_ratio) = match outer {
        None => (None, None),
        Some(o) => {
            if o.dim() != f.dim() {
                return Err(Error::DimensionMismatch { expected: f.dim(), got: o.dim() });
            }
            if (o.radius - 2.0 * f.radius).abs() > 1e-12 * f.radius {
                return Err(Error::InvalidParameter(format!(
                    "outer torus radius {} is not 2R = {}",
                    o.radius,
                    2.0 * f.radius
                )));
            }
            let c = o.sup();
            let two_r = 2.0 * f.radius;
            let mut worst = 0.0f64;
            for (alpha, a) in &coeffs {
                let order: usize = alpha.iter().sum();
                let bound = c * two_r.powi(-(order as i32));
                if a.norm() > bound * (1.0 + BOUND_RTOL) + BOUND_ATOL {
                    return Err(Error::Assertion(format!(
                        "|a({alpha:?})| = {:e} exceeds C_R (2R)^-|α| = {bound:e}",
                        a.norm()
                    )));
                }
                if c > 0.0 {
                    worst = worst.max(a.norm() / bound);
                }
            }
            (Some(c), Some(worst))
        }
    };
    Ok(TaylorCoefficients { radius: f.radius, order_cap: k, coeffs, c_r, worst_bound_ratio })
}

/// `Σ_{|α| > K} C_R 2^{-|α|}` over multi-indices in `d` variables.
pub fn geometric_tail(c_r: f64, d: usize, k: usize) -> f64 {
    let mut total = 0.0;
    let mut n = k + 1;
    loop {
        let count = binomial(n + d - 1, d - 1);
        let term = count * 0.5f64.powi(n as i32);
        total += term;
        if term < 1e-18 * total.max(1e-300) || n > k + 4000 {
            break;
        }
        n += 1;
    }
    c_r * total
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformLimit {
    /// Whether the empirical `C_R` stayed bounded along the sequence.
    pub bounded: bool,
    /// Selected subsequence (positions in the input list).
    pub indices: Vec<usize>,
    #[serde(serialize_with = "serialize_coeffs")]
    pub coeffs: BTreeMap<Vec<usize>, Complex64>,
    /// `C_R` per input element, measured on its own torus.
    pub c_r: Vec<f64>,
    /// Sup-norm tail estimate on `D_R` beyond the extracted order.
    pub tail_estimate: f64,
    /// True when no member matched the anchor and the limit was
    /// extrapolated in `1/index`.
    pub extrapolated: bool,
}

const STABILIZATION_TOL: f64 = 1e-9;
const GROWTH_FACTOR: f64 = 10.0;

fn weighted_distance(a: &BTreeMap<Vec<usize>, Complex64>, b: &BTreeMap<Vec<usize>, Complex64>) -> f64 {
    a.iter()
        .map(|(alpha, x)| {
            let w = 2f64.powi(alpha.iter().sum::<usize>() as i32);
            w * (x - b.get(alpha).copied().unwrap_or_default()).norm()
        })
        .fold(0.0, f64::max)
}

/// Effective diagonal extraction on a bounded sequence of entire functions
/// sampled on the `2R` torus. Coefficients are taken up to order `K`.
pub fn subsequence_uniform_limit(seq: &[PolyDiscSamples], r: f64, k: usize) -> Result<UniformLimit> {
    let first = seq.first().ok_or_else(|| Error::EmptySample("empty sequence".into()))?;
    for s in seq {
        if s.dim() != first.dim() || s.resolution != first.resolution {
            return Err(Error::GridMismatch("sequence elements use different tori".into()));
        }
        if (s.radius - 2.0 * r).abs() > 1e-12 * r {
            return Err(Error::InvalidParameter(format!("samples must lie on the 2R = {} torus", 2.0 * r)));
        }
    }
    let c_r: Vec<f64> = seq.iter().map(PolyDiscSamples::sup).collect();
    let half = c_r.len() / 2;
    let first_max = c_r[..half.max(1)].iter().cloned().fold(0.0, f64::max);
    let second_max = c_r[half..].iter().cloned().fold(0.0, f64::max);
    let bounded = c_r.iter().all(|c| c.is_finite()) && !(seq.len() >= 2 && second_max > GROWTH_FACTOR * first_max.max(f64::MIN_POSITIVE));
    if !bounded {
        return Ok(UniformLimit {
            bounded,
            indices: vec![],
            coeffs: BTreeMap::new(),
            c_r,
            tail_estimate: f64::INFINITY,
            extrapolated: false,
        });
    }
    let coeffs: Vec<BTreeMap<Vec<usize>, Complex64>> =
        seq.iter().map(|s| raw_coefficients(s, k)).collect::<Result<_>>()?;
    let last = seq.len() - 1;
    let indices: Vec<usize> = (0..seq.len())
        .filter(|&j| weighted_distance(&coeffs[j], &coeffs[last]) <= STABILIZATION_TOL)
        .collect();
    let c_sup = c_r.iter().cloned().fold(0.0, f64::max);
    let tail_estimate = geometric_tail(c_sup, first.dim(), k);
    if indices.len() > 1 || seq.len() == 1 {
        return Ok(UniformLimit { bounded, indices, coeffs: coeffs[last].clone(), c_r, tail_estimate, extrapolated: false });
    }
    // a_j ≈ b + c/j on the last two members.
    let (m, n) = (last as f64, (last + 1) as f64);
    let limit = coeffs[last]
        .iter()
        .map(|(alpha, an)| {
            let am = coeffs[last - 1][alpha];
            (alpha.clone(), (an * n - am * m) / (n - m))
        })
        .collect();
    Ok(UniformLimit {
        bounded,
        indices: (0..seq.len()).collect(),
        coeffs: limit,
        c_r,
        tail_estimate,
        extrapolated: true,
    })
}
