//! Continuity and compactness of `M(ω₁,B) → M(ω₂,B)`.
//!
//! Three independent channels look at the quotient `ω₂/ω₁`: its sampled
//! decay at infinity, the diagonal lattice operator `λ ↦ ω₂(λ)/ω₁(λ)`
//! truncated to balls, and witness sequences of normalized time-frequency
//! shifted Gaussians along standard paths.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::lattice::{mixed_norm_lattice, Exponent, LatticeSequence, MixedNormSpec, OrderedBasis};
use crate::stft::{gaussian_window, stft, stft_point, tf_shift, weighted_sup, PhaseGrid};
use crate::weights::{
    check_pq_class, classify_trend, vanishing_at_infinity_with, DecayOptions, DecayProfile, DecayVerdict,
    SampleGrid, WeightDescriptor, DEFAULT_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuityVerdict {
    Continuous,
    NotContinuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactnessVerdict {
    Compact,
    NotCompact,
    Inconclusive,
}

fn verdicts_from_decay(v: DecayVerdict) -> (ContinuityVerdict, CompactnessVerdict) {
    match v {
        DecayVerdict::Vanishes => (ContinuityVerdict::Continuous, CompactnessVerdict::Compact),
        DecayVerdict::BoundedNotVanishing => (ContinuityVerdict::Continuous, CompactnessVerdict::NotCompact),
        DecayVerdict::Unbounded => (ContinuityVerdict::NotContinuous, CompactnessVerdict::NotCompact),
    }
}

fn same_dim(w1: &WeightDescriptor, w2: &WeightDescriptor) -> Result<usize> {
    if w1.dim() != w2.dim() {
        return Err(Error::DimensionMismatch { expected: w1.dim(), got: w2.dim() });
    }
    if !w1.dim().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "phase-space weights need an even dimension, got {}",
            w1.dim()
        )));
    }
    Ok(w1.dim())
}

fn quotient(w1: &WeightDescriptor, w2: &WeightDescriptor) -> Result<WeightDescriptor> {
    WeightDescriptor::quotient(w2.clone(), w1.clone())
}

/// Quotient channel: sampled decay of `ω₂/ω₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientAnalysis {
    /// Sampled `sup ω₂/ω₁`, including the origin.
    pub quotient_sup: f64,
    pub quotient_decay: DecayProfile,
    pub continuity_verdict: ContinuityVerdict,
    pub compactness_verdict: CompactnessVerdict,
}

/// `sup ω₂/ω₁` over spheres and axes, with the continuity verdict.
pub fn continuity_certificate(
    w1: &WeightDescriptor,
    w2: &WeightDescriptor,
    radii: &[f64],
    sphere_samples: usize,
) -> Result<(f64, ContinuityVerdict)> {
    let q = compactness_certificate(w1, w2, radii, sphere_samples)?;
    Ok((q.quotient_sup, q.continuity_verdict))
}

pub fn compactness_certificate(
    w1: &WeightDescriptor,
    w2: &WeightDescriptor,
    radii: &[f64],
    sphere_samples: usize,
) -> Result<QuotientAnalysis> {
    compactness_certificate_with(w1, w2, radii, sphere_samples, &DecayOptions::default())
}

pub fn compactness_certificate_with(
    w1: &WeightDescriptor,
    w2: &WeightDescriptor,
    radii: &[f64],
    sphere_samples: usize,
    opts: &DecayOptions,
) -> Result<QuotientAnalysis> {
    let n = same_dim(w1, w2)?;
    let q = quotient(w1, w2)?;
    let profile = vanishing_at_infinity_with(&q, radii, sphere_samples, opts)?;
    let ln_origin = q.ln_eval(&vec![0.0; n])?;
    let ln_sup = profile.ln_sphere_max.iter().fold(ln_origin, |m, v| m.max(*v));
    let (continuity_verdict, compactness_verdict) = verdicts_from_decay(profile.verdict);
    Ok(QuotientAnalysis {
        quotient_sup: ln_sup.exp(),
        quotient_decay: profile,
        continuity_verdict,
        compactness_verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationLevel {
    pub radius: f64,
    /// `ω₂(λ)/ω₁(λ)` over `Λ_E ∩ B_R`, largest first.
    pub ratios: Vec<f64>,
    /// `max ω₂/ω₁` over `Λ_E ∩ (B_{extent} \ B_R)`.
    pub tail_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpectrum {
    /// Lattice points are enumerated up to this radius.
    pub extent: f64,
    pub levels: Vec<TruncationLevel>,
    pub continuity_verdict: ContinuityVerdict,
    pub compactness_verdict: CompactnessVerdict,
}

const MAX_LATTICE_POINTS: usize = 20_000_000;

/// Lattice points `T_E j` with `|T_E j| <= radius`.
fn lattice_ball(basis: &OrderedBasis, radius: f64) -> Result<Vec<Vec<f64>>> {
    let n = basis.dim();
    let inv = basis.inverse();
    let bounds: Vec<i64> = (0..n)
        .map(|k| {
            let row: f64 = inv[k].iter().map(|v| v * v).sum::<f64>().sqrt();
            (row * radius).floor() as i64
        })
        .collect();
    let total = bounds
        .iter()
        .try_fold(1usize, |acc, &b| acc.checked_mul(2 * b as usize + 1))
        .filter(|&t| t <= MAX_LATTICE_POINTS)
        .ok_or_else(|| Error::InvalidParameter(format!("lattice ball of radius {radius} is too large")))?;
    let mut out = Vec::new();
    let mut j = vec![0i64; n];
    for lin in 0..total {
        let mut rem = lin;
        for k in (0..n).rev() {
            let w = 2 * bounds[k] as usize + 1;
            j[k] = (rem % w) as i64 - bounds[k];
            rem /= w;
        }
        let p = basis.lattice_point(&j);
        if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Per-radius spectrum of the diagonal lattice operator. Lattice points are
/// enumerated up to twice the largest radius.
pub fn truncation_spectrum(
    w1: &WeightDescriptor,
    w2: &WeightDescriptor,
    basis: &OrderedBasis,
    radii: &[f64],
) -> Result<TruncationSpectrum> {
    let n = same_dim(w1, w2)?;
    if basis.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: basis.dim() });
    }
    crate::weights::validate_radii(radii)?;
    let q = quotient(w1, w2)?;
    let extent = 2.0 * radii[radii.len() - 1];
    let points = lattice_ball(basis, extent)?;
    let vals: Vec<(f64, f64)> = points
        .par_iter()
        .map(|p| Ok((p.iter().map(|v| v * v).sum::<f64>().sqrt(), q.ln_eval(p)?)))
        .collect::<Result<_>>()?;
    let mut levels = Vec::with_capacity(radii.len());
    let mut ln_in = Vec::new();
    let mut ln_tail = Vec::new();
    for &r in radii {
        let mut ratios: Vec<f64> = vals
            .iter()
            .filter(|(norm, _)| *norm <= r * (1.0 + 1e-12))
            .map(|(_, lq)| lq.exp())
            .collect();
        if ratios.is_empty() {
            return Err(Error::EmptySample(format!("no lattice points in the ball of radius {r}")));
        }
        ratios.sort_by(|a, b| b.total_cmp(a));
        let ln_tail_max = vals
            .iter()
            .filter(|(norm, _)| *norm > r * (1.0 + 1e-12))
            .fold(f64::NEG_INFINITY, |m, (_, lq)| m.max(*lq));
        ln_in.push(ratios[0].ln());
        ln_tail.push(ln_tail_max);
        levels.push(TruncationLevel { radius: r, ratios, tail_max: ln_tail_max.exp() });
    }
    let opts = DecayOptions::default();
    let continuity_verdict = if classify_trend(&ln_in, &ln_in, opts.threshold, opts.tol) == DecayVerdict::Unbounded {
        ContinuityVerdict::NotContinuous
    } else {
        ContinuityVerdict::Continuous
    };
    let compactness_verdict = match (continuity_verdict, classify_trend(&ln_tail, &ln_tail, opts.threshold, opts.tol)) {
        (ContinuityVerdict::NotContinuous, _) | (_, DecayVerdict::Unbounded) => CompactnessVerdict::NotCompact,
        (_, DecayVerdict::Vanishes) => CompactnessVerdict::Compact,
        (_, DecayVerdict::BoundedNotVanishing) => CompactnessVerdict::NotCompact,
    };
    Ok(TruncationSpectrum { extent, levels, continuity_verdict, compactness_verdict })
}

/// A sequence of phase points with strictly increasing norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPath {
    pub name: String,
    pub points: Vec<Vec<f64>>,
}

impl WitnessPath {
    pub fn new(name: impl Into<String>, points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::EmptySample("empty witness path".into()))?;
        let n = first.len();
        let mut prev = -1.0;
        for p in &points {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("witness path point".into()));
            }
            let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r <= prev {
                return Err(Error::InvalidParameter("witness path norms must increase strictly".into()));
            }
            prev = r;
        }
        Ok(Self { name: name.into(), points })
    }

    /// `X_k = r_k e_axis` in `R^{2d}`.
    pub fn axis(name: &str, phase_dim: usize, axis: usize, radii: &[f64]) -> Result<Self> {
        if axis >= phase_dim {
            return Err(Error::InvalidParameter(format!("axis {axis} outside R^{phase_dim}")));
        }
        let points = radii
            .iter()
            .map(|&r| {
                let mut p = vec![0.0; phase_dim];
                p[axis] = r;
                p
            })
            .collect();
        Self::new(name, points)
    }

    /// `X_k = (r_k/2, ..., r_k/2)`.
    pub fn diagonal(phase_dim: usize, radii: &[f64]) -> Result<Self> {
        Self::new("diagonal", radii.iter().map(|&r| vec![r / 2.0; phase_dim]).collect())
    }

    /// Positive x-axis, positive ξ-axis and diagonal.
    pub fn standard(phase_dim: usize, radii: &[f64]) -> Result<Vec<Self>> {
        Ok(vec![
            Self::axis("x_axis", phase_dim, 0, radii)?,
            Self::axis("xi_axis", phase_dim, phase_dim / 2, radii)?,
            Self::diagonal(phase_dim, radii)?,
        ])
    }

    pub fn norms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessVerdict {
    NonCompactnessWitnessed,
    NonContinuityWitnessed,
    NoObstruction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub point: Vec<f64>,
    /// `ω₂(X_k) |V_φ f_k(X_k)|` on the grid.
    pub computed: f64,
    /// `(2π)^{-d/2} ω₂(X_k)/ω₁(X_k)`.
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessTrace {
    pub path: String,
    pub points: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// `(2π)^{-d/2} ω₂(X_k)/ω₁(X_k)`.
    pub ratios: Vec<f64>,
    pub grid_checks: Vec<GridCheck>,
    pub max_grid_error: f64,
    pub verdict: WitnessVerdict,
}

pub const WITNESS_TOL: f64 = 1e-5;
pub const DEFAULT_K_GRID: usize = 3;

/// `f_k = ω₁(X_k)^{-1} e^{i<·,ξ_k>} φ(· - x_k)`.
pub fn witness_function(w1: &WeightDescriptor, window: &GridFunction, point: &[f64]) -> Result<GridFunction> {
    let d = window.dim();
    let f = tf_shift(window, &point[..d], &point[d..])?;
    Ok(f.scale(Complex64::new(1.0 / w1.eval(point)?, 0.0)))
}

/// Evaluates the witness identity on the first `k_grid` path points and
/// the analytic ratios on all of them.
pub fn witness_sequence_test(
    w1: &WeightDescriptor,
    w2: &WeightDescriptor,
    path: &WitnessPath,
    window: &GridFunction,
    k_grid: usize,
) -> Result<WitnessTrace> {
    let n = same_dim(w1, w2)?;
    let d = window.dim();
    if n != 2 * d || path.points[0].len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: 2 * d });
    }
    let c = (2.0 * PI).powf(-(d as f64) / 2.0);
    let ratios: Vec<f64> = path
        .points
        .iter()
        .map(|p| Ok(c * (w2.ln_eval(p)? - w1.ln_eval(p)?).exp()))
        .collect::<Result<_>>()?;
    let mut grid_checks = Vec::new();
    for p in path.points.iter().take(k_grid) {
        for (a, (&x, &xi)) in window.axes().iter().zip(p[..d].iter().zip(&p[d..])) {
            if a.lattice_offset(x).is_none() || x.abs() > a.extent / 2.0 {
                return Err(Error::Misaligned(format!(
                    "witness point {p:?} is off-grid or beyond half the extent {}",
                    a.extent
                )));
            }
            if xi.abs() > (PI / a.step).min(a.extent / 2.0) {
                return Err(Error::Misaligned(format!("witness frequency {xi} is outside the resolved band")));
            }
        }
        let fk = witness_function(w1, window, p)?;
        let v = stft_point(&fk, window, &p[..d], &p[d..])?;
        let computed = w2.eval(p)? * v.norm();
        let expected = c * w2.eval(p)? / w1.eval(p)?;
        grid_checks.push(GridCheck {
            point: p.clone(),
            computed,
            expected,
            relative_error: (computed - expected).abs() / expected,
        });
    }
    let max_grid_error = grid_checks.iter().fold(0.0f64, |m, g| m.max(g.relative_error));
    if max_grid_error > WITNESS_TOL {
        return Err(Error::Assertion(format!(
            "witness identity off by {max_grid_error:e} on path {}",
            path.name
        )));
    }
    let ln_ratios: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let opts = DecayOptions::default();
    let verdict = match classify_trend(&ln_ratios, &ln_ratios, opts.threshold, opts.tol) {
        DecayVerdict::Unbounded => WitnessVerdict::NonContinuityWitnessed,
        DecayVerdict::BoundedNotVanishing => WitnessVerdict::NonCompactnessWitnessed,
        DecayVerdict::Vanishes => WitnessVerdict::NoObstruction,
    };
    Ok(WitnessTrace {
        path: path.name.clone(),
        points: path.points.clone(),
        norms: path.norms(),
        ratios,
        grid_checks,
        max_grid_error,
        verdict,
    })
}

/// Combined verdicts over several witness paths: the first obstruction wins.
pub fn witness_verdicts(traces: &[WitnessTrace]) -> (ContinuityVerdict, CompactnessVerdict) {
    if traces.iter().any(|t| t.verdict == WitnessVerdict::NonContinuityWitnessed) {
        (ContinuityVerdict::NotContinuous, CompactnessVerdict::NotCompact)
    } else if traces.iter().any(|t| t.verdict == WitnessVerdict::NonCompactnessWitnessed) {
        (ContinuityVerdict::Continuous, CompactnessVerdict::NotCompact)
    } else {
        (ContinuityVerdict::Continuous, CompactnessVerdict::Compact)
    }
}

/// `sup_X ω(X) |V_φ f(X)|` over the phase grid.
pub fn minfty_lower_bound(
    f: &GridFunction,
    omega: &WeightDescriptor,
    window: &GridFunction,
    grid: &PhaseGrid,
) -> Result<f64> {
    weighted_sup(&stft(f, window, grid)?.field, omega)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub p0: f64,
    pub q0: f64,
    pub radii: Vec<f64>,
    /// Discrete `L^{p0,q0}` norm of `ω₂/ω₁` over `Λ_E ∩ B_ρ`.
    pub running_norm: Vec<f64>,
    pub increment_ratios: Vec<f64>,
    /// Geometric extrapolation of the remaining tail.
    pub extrapolated_tail: f64,
    pub verdict: CompactnessVerdict,
}

const RUNNING_STEPS: usize = 6;
const INCREMENT_RATIO: f64 = 0.8;
const TAIL_FRACTION: f64 = 0.05;

/// Running lattice norm of the quotient over `B_{R/32}, ..., B_R`.
pub fn lpq_quotient_criterion(
    w1: &WeightDescriptor,
    w2: &WeightDescriptor,
    p0: f64,
    q0: f64,
    basis: &OrderedBasis,
    big_r: f64,
) -> Result<CorollaryReport> {
    let n = same_dim(w1, w2)?;
    if basis.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: basis.dim() });
    }
    for (name, v) in [("p0", p0), ("q0", q0)] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must lie in [1, ∞), got {v}")));
        }
    }
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(Error::InvalidParameter(format!("R must be positive, got {big_r}")));
    }
    let q = quotient(w1, w2)?;
    let d = n / 2;
    let mut exps = vec![Exponent::new(p0)?; d];
    exps.extend(vec![Exponent::new(q0)?; d]);
    let spec = MixedNormSpec::new(basis.clone(), exps, WeightDescriptor::constant(1.0, n)?)?;

    let inv = basis.inverse().clone();
    let to_coords = |p: &[f64]| -> Vec<i64> {
        inv.iter().map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>().round() as i64).collect()
    };
    let points = lattice_ball(basis, big_r)?;
    let entries: Vec<(f64, Vec<i64>, f64)> = points
        .par_iter()
        .map(|p| {
            let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok((r, to_coords(p), q.eval(p)?))
        })
        .collect::<Result<_>>()?;

    let radii: Vec<f64> = (0..RUNNING_STEPS)
        .map(|i| big_r / 2f64.powi((RUNNING_STEPS - 1 - i) as i32))
        .collect();
    let running_norm: Vec<f64> = radii
        .iter()
        .map(|&rho| {
            let vals: BTreeMap<Vec<i64>, Complex64> = entries
                .iter()
                .filter(|(r, _, _)| *r <= rho * (1.0 + 1e-12))
                .map(|(_, j, v)| (j.clone(), Complex64::new(*v, 0.0)))
                .collect();
            mixed_norm_lattice(&LatticeSequence::new(basis.clone(), vals)?, &spec)
        })
        .collect::<Result<_>>()?;
    let increments: Vec<f64> = running_norm.windows(2).map(|w| w[1] - w[0]).collect();
    let increment_ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .collect();
    let last_ratios = &increment_ratios[increment_ratios.len().saturating_sub(2)..];
    let converging = last_ratios.iter().all(|&r| r <= INCREMENT_RATIO);
    let rho = last_ratios.iter().cloned().fold(0.0, f64::max);
    let last_inc = *increments.last().unwrap_or(&0.0);
    let extrapolated_tail = if converging && rho < 1.0 { last_inc * rho / (1.0 - rho) } else { f64::INFINITY };
    let partial = *running_norm.last().unwrap_or(&0.0);
    let verdict = if partial.is_finite() && extrapolated_tail <= TAIL_FRACTION * partial {
        CompactnessVerdict::Compact
    } else {
        CompactnessVerdict::Inconclusive
    };
    Ok(CorollaryReport { p0, q0, radii, running_norm, increment_ratios, extrapolated_tail, verdict })
}

/// Knobs of [`analyze_embedding`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingOptions {
    pub radii: Vec<f64>,
    pub sphere_samples: usize,
    /// Columns of the truncation lattice basis; the standard basis if empty.
    pub lattice: Vec<Vec<f64>>,
    pub grid_step: f64,
    pub grid_extent: f64,
    pub k_grid: usize,
    /// `P_Q` preflight parameters `(c, R, r)` and sample grid.
    pub pq_c: f64,
    pub pq_big_r: f64,
    pub pq_r: f64,
    pub pq_sample_extent: f64,
    pub pq_sample_points: usize,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        Self {
            radii: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            sphere_samples: 64,
            lattice: vec![],
            grid_step: 1.0 / 16.0,
            grid_extent: 8.0,
            k_grid: DEFAULT_K_GRID,
            pq_c: 1.0,
            pq_big_r: 2.0,
            pq_r: 1.0,
            pq_sample_extent: 8.0,
            pq_sample_points: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelVerdicts {
    pub quotient: (ContinuityVerdict, CompactnessVerdict),
    pub truncation: (ContinuityVerdict, CompactnessVerdict),
    pub witness: (ContinuityVerdict, CompactnessVerdict),
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub omega1: Value,
    pub omega2: Value,
    pub quotient_sup: f64,
    pub quotient_decay: DecayProfile,
    pub continuity_verdict: ContinuityVerdict,
    pub compactness_verdict: CompactnessVerdict,
    pub truncation_spectrum: TruncationSpectrum,
    pub witness_trace: Vec<WitnessTrace>,
    pub channels: ChannelVerdicts,
    /// Whether both weights passed the `P_Q` preflight.
    pub hypotheses_verified: bool,
}

fn preflight(w: &WeightDescriptor, o: &EmbeddingOptions) -> Result<bool> {
    let n = w.dim();
    let per_axis = (o.pq_sample_points as f64).powf(1.0 / n as f64).floor().max(3.0) as usize;
    let half = ((per_axis - 1) / 2).max(1);
    let step = o.pq_sample_extent / half as f64;
    let sample = SampleGrid::new(o.pq_sample_extent, step)?;
    match check_pq_class(w, o.pq_c, o.pq_big_r, o.pq_r, &sample, DEFAULT_TOL) {
        Ok(c) => Ok(c.passed),
        Err(Error::EmptySample(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Runs all three channels and assembles the report. The quotient channel
/// decides continuity; compactness is reported only when all channels agree.
pub fn analyze_embedding(
    w1: &WeightDescriptor,
    w2: &WeightDescriptor,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingReport> {
    let n = same_dim(w1, w2)?;
    let q = compactness_certificate(w1, w2, &opts.radii, opts.sphere_samples)?;
    let basis = if opts.lattice.is_empty() {
        OrderedBasis::standard(n)
    } else {
        OrderedBasis::from_vectors(&opts.lattice)?
    };
    let trunc = truncation_spectrum(w1, w2, &basis, &opts.radii)?;
    let axes: Vec<Axis> = GridFunction::cube_axes(n / 2, opts.grid_step, opts.grid_extent)?;
    let window = gaussian_window(&axes)?;
    let traces: Vec<WitnessTrace> = WitnessPath::standard(n, &opts.radii)?
        .iter()
        .map(|p| witness_sequence_test(w1, w2, p, &window, opts.k_grid))
        .collect::<Result<_>>()?;
    let quotient_ch = (q.continuity_verdict, q.compactness_verdict);
    let truncation_ch = (trunc.continuity_verdict, trunc.compactness_verdict);
    let witness_ch = witness_verdicts(&traces);
    let agree = quotient_ch == truncation_ch && quotient_ch == witness_ch;
    let compactness_verdict = if agree { q.compactness_verdict } else { CompactnessVerdict::Inconclusive };
    let hypotheses_verified = preflight(w1, opts)? && preflight(w2, opts)?;
    Ok(EmbeddingReport {
        omega1: w1.to_json(),
        omega2: w2.to_json(),
        quotient_sup: q.quotient_sup,
        quotient_decay: q.quotient_decay,
        continuity_verdict: q.continuity_verdict,
        compactness_verdict,
        truncation_spectrum: trunc,
        witness_trace: traces,
        channels: ChannelVerdicts { quotient: quotient_ch, truncation: truncation_ch, witness: witness_ch, agree },
        hypotheses_verified,
    })
}

impl EmbeddingReport {
    /// Plot data: one row per radius index with annulus sup, tail max and
    /// each witness path's norm and ratio.
    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["radius".to_string(), "annulus_sup".into(), "tail_max".into()];
        for t in &self.witness_trace {
            header.push(format!("{}_norm", t.path));
            header.push(format!("{}_ratio", t.path));
        }
        out.write_record(&header).map_err(csv_err)?;
        let rows = self
            .quotient_decay
            .radii
            .len()
            .max(self.witness_trace.iter().map(|t| t.ratios.len()).max().unwrap_or(0));
        let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for i in 0..rows {
            let mut rec = vec![
                cell(self.quotient_decay.radii.get(i).copied()),
                cell(self.quotient_decay.annulus_sup.get(i).copied()),
                cell(self.truncation_spectrum.levels.get(i).map(|l| l.tail_max)),
            ];
            for t in &self.witness_trace {
                rec.push(cell(t.norms.get(i).copied()));
                rec.push(cell(t.ratios.get(i).copied()));
            }
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
