//! Ordered bases, their lattices, and iterated mixed (quasi-)norms.
//!
//! A mixed norm is taken in the coordinates of an ordered basis `E`: the
//! first coordinate is integrated first with exponent `p_1`, the result is
//! integrated over the second coordinate with `p_2`, and so on. Measures are
//! Lebesgue measure on the coordinates, so a lattice cell `j + κ(E)` has
//! coordinate measure one.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::{ArrayD, Axis as NdAxis, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{self, Matrix};
use crate::weights::WeightDescriptor;

/// An ordered basis of `R^d`, stored as the matrix `T_E` whose columns are
/// `e_1, ..., e_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedBasis {
    matrix: Matrix,
    det: f64,
    inverse: Matrix,
}

impl OrderedBasis {
    /// Builds the basis from its column matrix `T_E` (row-major rows).
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter("basis matrix must be square and non-empty".into()));
        }
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("basis matrix".into()));
        }
        let (det, inverse) = linalg::det_and_inverse(&matrix).map_err(|_| Error::SingularBasis(0.0))?;
        if det.abs() <= 1e-300 {
            return Err(Error::SingularBasis(det));
        }
        Ok(Self { matrix, det, inverse })
    }

    /// Builds the basis from its vectors `e_1, ..., e_d`.
    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(linalg::transpose(&vectors.to_vec()))
    }

    pub fn standard(d: usize) -> Self {
        Self::from_matrix(linalg::identity(d)).expect("identity is invertible")
    }

    /// Standard basis vectors in the given order (`order[k]` is the
    /// coordinate axis of `e_{k+1}`).
    pub fn permuted(order: &[usize]) -> Result<Self> {
        let d = order.len();
        let mut vectors = vec![vec![0.0; d]; d];
        for (k, &axis) in order.iter().enumerate() {
            if axis >= d {
                return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
            }
            vectors[k][axis] = 1.0;
        }
        Self::from_vectors(&vectors)
    }

    pub fn diagonal(scales: &[f64]) -> Result<Self> {
        let d = scales.len();
        let m = (0..d)
            .map(|i| (0..d).map(|j| if i == j { scales[i] } else { 0.0 }).collect())
            .collect();
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// The basis vectors `e_1, ..., e_d`.
    pub fn vectors(&self) -> Matrix {
        linalg::transpose(&self.matrix)
    }

    /// Lattice point `T_E j`.
    pub fn lattice_point(&self, j: &[i64]) -> Vec<f64> {
        let jf: Vec<f64> = j.iter().map(|&v| v as f64).collect();
        linalg::matvec(&self.matrix, &jf)
    }

    /// Gram pairing `<e_j, f_k>` between this basis and `other`.
    pub fn pairing(&self, other: &OrderedBasis) -> Matrix {
        linalg::matmul(&linalg::transpose(&self.matrix), &other.matrix)
    }

    pub fn approx_eq(&self, other: &OrderedBasis, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .matrix
                .iter()
                .flatten()
                .zip(other.matrix.iter().flatten())
                .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0))
    }
}

/// `T_{E'} = 2π (T_E^{-1})^t`, so that `<e_j, e'_k> = 2π δ_jk`.
pub fn dual_basis(e: &OrderedBasis) -> Result<OrderedBasis> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let m = linalg::transpose(e.inverse())
        .into_iter()
        .map(|row| row.into_iter().map(|v| two_pi * v).collect())
        .collect();
    OrderedBasis::from_matrix(m)
}

/// Whether the basis vectors split into a set spanning `{(x, 0)}` and a set
/// spanning `{(0, ξ)}`.
pub fn is_phase_split(e: &OrderedBasis) -> Result<bool> {
    let n = e.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("phase space dimension must be even, got {n}")));
    }
    let d = n / 2;
    let eps = 1e-12;
    let mut xs = Vec::new();
    let mut xis = Vec::new();
    for v in e.vectors() {
        let scale = v.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let x_zero = v[..d].iter().all(|t| t.abs() <= eps * scale);
        let xi_zero = v[d..].iter().all(|t| t.abs() <= eps * scale);
        match (x_zero, xi_zero) {
            (false, true) => xs.push(v[..d].to_vec()),
            (true, false) => xis.push(v[d..].to_vec()),
            _ => return Ok(false),
        }
    }
    Ok(xs.len() == d
        && xis.len() == d
        && linalg::rank(&xs, 1e-12) == d
        && linalg::rank(&xis, 1e-12) == d)
}

/// A Lebesgue exponent in `(0, ∞]`. Serialises as a number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::InvalidParameter(format!("exponent must lie in (0, inf], got {p}")));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p` with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        let p = match &v {
            Value::Number(n) => n.as_f64().unwrap_or(f64::NAN),
            Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => f64::INFINITY,
            _ => f64::NAN,
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// `p' = ∞` for `p ≤ 1`, `p/(p-1)` for `1 < p < ∞`, `1` for `p = ∞`.
pub fn conjugate_exponent(p: Exponent) -> Exponent {
    let v = p.value();
    if v <= 1.0 {
        Exponent::INFINITY
    } else if v.is_infinite() {
        Exponent(1.0)
    } else {
        Exponent(v / (v - 1.0))
    }
}

/// Basis, exponents and weight of an `E`-split Lebesgue norm.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedNormSpec {
    pub basis: OrderedBasis,
    pub exponents: Vec<Exponent>,
    pub weight: WeightDescriptor,
}

impl MixedNormSpec {
    pub fn new(basis: OrderedBasis, exponents: Vec<Exponent>, weight: WeightDescriptor) -> Result<Self> {
        if exponents.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: exponents.len() });
        }
        if weight.dim() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: weight.dim() });
        }
        Ok(Self { basis, exponents, weight })
    }

    /// Unweighted norm with the standard basis and the same exponent on
    /// every axis.
    pub fn uniform(d: usize, p: Exponent) -> Result<Self> {
        Self::new(OrderedBasis::standard(d), vec![p; d], WeightDescriptor::constant(1.0, d)?)
    }

    /// `L^{p,q}_1` on `R^{2d}`: `x` integrated first with `p`, then `ξ` with `q`.
    pub fn lpq1(d: usize, p: Exponent, q: Exponent) -> Result<Self> {
        let mut e = vec![p; d];
        e.extend(std::iter::repeat_n(q, d));
        Self::new(OrderedBasis::standard(2 * d), e, WeightDescriptor::constant(1.0, 2 * d)?)
    }

    /// `L^{p,q}_2` on `R^{2d}`: `ξ` integrated first with `q`, then `x` with `p`.
    pub fn lpq2(d: usize, p: Exponent, q: Exponent) -> Result<Self> {
        let order: Vec<usize> = (d..2 * d).chain(0..d).collect();
        let mut e = vec![q; d];
        e.extend(std::iter::repeat_n(p, d));
        Self::new(OrderedBasis::permuted(&order)?, e, WeightDescriptor::constant(1.0, 2 * d)?)
    }

    /// Quasi-norm order `r = min(1, p_1, ..., p_d)`.
    pub fn order(&self) -> f64 {
        self.exponents.iter().fold(1.0f64, |m, p| m.min(p.value()))
    }

    pub fn is_norm(&self) -> bool {
        self.order() >= 1.0
    }
}

/// A finitely supported sequence on the lattice `Λ_E`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSequence {
    pub basis: OrderedBasis,
    pub values: BTreeMap<Vec<i64>, Complex64>,
}

impl LatticeSequence {
    pub fn new(basis: OrderedBasis, values: BTreeMap<Vec<i64>, Complex64>) -> Result<Self> {
        for (j, v) in &values {
            if j.len() != basis.dim() {
                return Err(Error::DimensionMismatch { expected: basis.dim(), got: j.len() });
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(format!("lattice value at {j:?}")));
            }
        }
        Ok(Self { basis, values })
    }

    pub fn from_real(basis: OrderedBasis, entries: impl IntoIterator<Item = (Vec<i64>, f64)>) -> Result<Self> {
        Self::new(basis, entries.into_iter().map(|(j, v)| (j, Complex64::new(v, 0.0))).collect())
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// JSON layout: `{"basis": [e_1, ..., e_d], "entries": [{"j", "re", "im"}]}`.
    pub fn to_json(&self) -> Value {
        json!({
            "basis": self.basis.vectors(),
            "entries": self.values.iter().map(|(j, v)| json!({"j": j, "re": v.re, "im": v.im})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Entry {
            j: Vec<i64>,
            re: f64,
            #[serde(default)]
            im: f64,
        }
        #[derive(Deserialize)]
        struct Raw {
            basis: Vec<Vec<f64>>,
            entries: Vec<Entry>,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let basis = OrderedBasis::from_vectors(&raw.basis)?;
        let mut values = BTreeMap::new();
        for e in raw.entries {
            if values.insert(e.j.clone(), Complex64::new(e.re, e.im)).is_some() {
                return Err(Error::Format(format!("duplicate lattice index {:?}", e.j)));
            }
        }
        Self::new(basis, values)
    }
}

/// Folds axis 0 of `values` with exponent `p` and coordinate step `step`.
fn fold_axis(values: &ArrayD<f64>, p: Exponent, step: f64) -> ArrayD<f64> {
    values.map_axis(NdAxis(0), |lane| {
        let m = lane.iter().fold(0.0f64, |m, &v| m.max(v));
        if p.is_infinite() || m == 0.0 {
            return m;
        }
        let pv = p.value();
        let s: f64 = lane.iter().map(|&v| (v / m).powf(pv)).sum();
        m * (s * step).powf(1.0 / pv)
    })
}

/// Iterated norm of non-negative samples laid out with axis `k` holding
/// coordinate `k + 1` and spacing `steps[k]`.
pub fn iterated_norm(values: &ArrayD<f64>, steps: &[f64], exponents: &[Exponent]) -> Result<f64> {
    if values.ndim() != exponents.len() || steps.len() != exponents.len() {
        return Err(Error::DimensionMismatch { expected: exponents.len(), got: values.ndim() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mixed norm samples".into()));
    }
    let mut acc = values.clone();
    for (p, h) in exponents.iter().zip(steps) {
        acc = fold_axis(&acc, *p, *h);
    }
    Ok(acc.iter().next().copied().unwrap_or(0.0))
}

/// Norm of `|f ω|` given on the sparse coordinate lattice `c_k Z`.
fn sparse_norm(points: &[(Vec<i64>, f64)], steps: &[f64], exponents: &[Exponent]) -> Result<f64> {
    let d = exponents.len();
    if points.is_empty() {
        return Ok(0.0);
    }
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for (m, _) in points {
        for k in 0..d {
            lo[k] = lo[k].min(m[k]);
            hi[k] = hi[k].max(m[k]);
        }
    }
    let shape: Vec<usize> = (0..d).map(|k| (hi[k] - lo[k] + 1) as usize).collect();
    let total: usize = shape.iter().product();
    if total > 200_000_000 {
        return Err(Error::InvalidParameter("lattice support bounding box too large".into()));
    }
    let mut dense = ArrayD::<f64>::zeros(IxDyn(&shape));
    for (m, v) in points {
        let idx: Vec<usize> = (0..d).map(|k| (m[k] - lo[k]) as usize).collect();
        dense[IxDyn(&idx)] = *v;
    }
    iterated_norm(&dense, steps, exponents)
}

/// Mixed norm of a lattice sequence: the norm of its piecewise-constant
/// extension, weight evaluated at the lattice points.
pub fn mixed_norm_lattice(a: &LatticeSequence, spec: &MixedNormSpec) -> Result<f64> {
    if !a.basis.approx_eq(&spec.basis, 1e-12) {
        return Err(Error::GridMismatch("sequence basis differs from the norm basis".into()));
    }
    let points: Vec<(Vec<i64>, f64)> = a
        .values
        .iter()
        .map(|(j, v)| Ok((j.clone(), v.norm() * spec.weight.eval(&a.basis.lattice_point(j))?)))
        .collect::<Result<_>>()?;
    sparse_norm(&points, &vec![1.0; a.dim()], &spec.exponents)
}

/// Factorises `A = diag(c) U` with `U` integer and unimodular, so that the
/// grid `D Z^d` has `E`-coordinates `c_k (U n)_k`.
pub(crate) fn coordinate_lattice(a: &Matrix) -> Result<(Vec<f64>, Vec<Vec<i64>>)> {
    let d = a.len();
    let mut c = Vec::with_capacity(d);
    let mut u = Vec::with_capacity(d);
    for row in a {
        let min = row
            .iter()
            .filter(|v| v.abs() > 1e-12)
            .fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !min.is_finite() {
            return Err(Error::SingularBasis(0.0));
        }
        let mut found = None;
        for div in 1..=64 {
            let ck = min / div as f64;
            let ints: Vec<f64> = row.iter().map(|v| v / ck).collect();
            if ints.iter().all(|t| (t - t.round()).abs() <= 1e-8 * t.abs().max(1.0)) {
                found = Some((ck, ints.iter().map(|t| t.round() as i64).collect::<Vec<_>>()));
                break;
            }
        }
        let (ck, urow) = found.ok_or_else(|| {
            Error::Misaligned("sample grid is not a lattice in the basis coordinates".into())
        })?;
        c.push(ck);
        u.push(urow);
    }
    let uf: Matrix = u.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let det = linalg::det_and_inverse(&uf).map(|(det, _)| det).unwrap_or(0.0);
    if (det.abs() - 1.0).abs() > 1e-9 || d == 0 {
        return Err(Error::Misaligned(format!(
            "grid maps to a sublattice of index {} in basis coordinates; resample instead",
            det.abs()
        )));
    }
    Ok((c, u))
}

/// Mixed norm of samples on an axis-aligned grid `{ (n_k - half_k) step_k }`.
///
/// The sample lattice must be `T_E (c Z^d)` up to a unimodular change of
/// coordinates; otherwise the call errors rather than interpolating.
/// `magnitudes` holds `|F|` and is multiplied by `spec.weight`.
pub fn mixed_norm_samples(magnitudes: &ArrayD<f64>, steps: &[f64], spec: &MixedNormSpec) -> Result<f64> {
    let d = spec.basis.dim();
    if magnitudes.ndim() != d || steps.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: magnitudes.ndim() });
    }
    let diag: Matrix = (0..d)
        .map(|i| (0..d).map(|j| if i == j { steps[i] } else { 0.0 }).collect())
        .collect();
    let a = linalg::matmul(spec.basis.inverse(), &diag);
    let (c, u) = coordinate_lattice(&a)?;
    let half: Vec<i64> = magnitudes.shape().iter().map(|&n| (n as i64 - 1) / 2).collect();

    let constant_weight = matches!(spec.weight.kind(), crate::weights::WeightKind::Constant { .. });
    let w0 = if constant_weight { spec.weight.eval(&vec![0.0; d])? } else { 1.0 };

    // Signed permutation: permute axes directly.
    let perm: Option<Vec<(usize, i64)>> = u
        .iter()
        .map(|row| {
            let nz: Vec<usize> = (0..d).filter(|&j| row[j] != 0).collect();
            (nz.len() == 1 && row[nz[0]].abs() == 1).then(|| (nz[0], row[nz[0]]))
        })
        .collect();
    let mut weighted = magnitudes.clone();
    if constant_weight {
        weighted.mapv_inplace(|v| v * w0);
    } else {
        let mut x = vec![0.0; d];
        for (idx, v) in weighted.indexed_iter_mut() {
            for k in 0..d {
                x[k] = (idx[k] as i64 - half[k]) as f64 * steps[k];
            }
            *v *= spec.weight.eval(&x)?;
        }
    }
    if let Some(perm) = perm {
        let axes: Vec<usize> = perm.iter().map(|(j, _)| *j).collect();
        let mut view = weighted.view().permuted_axes(IxDyn(&axes));
        for (k, (_, sign)) in perm.iter().enumerate() {
            if *sign < 0 {
                view.invert_axis(NdAxis(k));
            }
        }
        return iterated_norm(&view.to_owned(), &c, &spec.exponents);
    }
    let mut points = Vec::with_capacity(weighted.len());
    for (idx, v) in weighted.indexed_iter() {
        let n: Vec<i64> = (0..d).map(|k| idx[k] as i64 - half[k]).collect();
        let m: Vec<i64> = u.iter().map(|row| row.iter().zip(&n).map(|(a, b)| a * b).sum()).collect();
        points.push((m, *v));
    }
    sparse_norm(&points, &c, &spec.exponents)
}

/// Mixed norm of a sampled function.
pub fn mixed_norm_grid(f: &GridFunction, spec: &MixedNormSpec) -> Result<f64> {
    if f.dim() != spec.basis.dim() {
        return Err(Error::DimensionMismatch { expected: spec.basis.dim(), got: f.dim() });
    }
    let mags = f.samples().mapv(|z| z.norm());
    let steps: Vec<f64> = f.axes().iter().map(|a| a.step).collect();
    mixed_norm_samples(&mags, &steps, spec)
}

/// Result of [`discrete_inclusion_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    /// `‖a‖_q / ‖a‖_p` per family member (`None` for the zero sequence).
    pub ratios: Vec<Option<f64>>,
    pub worst_constant: f64,
    /// Per member: `(R, sup_{|λ| >= R} |a(λ)| ω(λ))` at quartiles of the
    /// support radius.
    pub tail_sups: Vec<Vec<(f64, f64)>>,
}

/// Empirical constant of `ℓ^p_(ω) ⊆ ℓ^q_(ω)` for `p ≤ q` across a family.
pub fn discrete_inclusion_check(
    family: &[LatticeSequence],
    p: &[Exponent],
    q: &[Exponent],
    omega: &WeightDescriptor,
) -> Result<InclusionReport> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    if p.iter().zip(q).any(|(a, b)| a.value() > b.value()) {
        return Err(Error::InvalidParameter("inclusion check needs p <= q componentwise".into()));
    }
    let mut ratios = Vec::with_capacity(family.len());
    let mut tails = Vec::with_capacity(family.len());
    let mut worst = 0.0f64;
    for a in family {
        let sp = MixedNormSpec::new(a.basis.clone(), p.to_vec(), omega.clone())?;
        let sq = MixedNormSpec::new(a.basis.clone(), q.to_vec(), omega.clone())?;
        let np = mixed_norm_lattice(a, &sp)?;
        let nq = mixed_norm_lattice(a, &sq)?;
        let r = (np > 0.0).then(|| nq / np);
        if let Some(r) = r {
            worst = worst.max(r);
        }
        ratios.push(r);

        let pts: Vec<(f64, f64)> = a
            .values
            .iter()
            .map(|(j, v)| {
                let x = a.basis.lattice_point(j);
                let rad = x.iter().map(|t| t * t).sum::<f64>().sqrt();
                Ok((rad, v.norm() * omega.eval(&x)?))
            })
            .collect::<Result<_>>()?;
        let rmax = pts.iter().fold(0.0f64, |m, (r, _)| m.max(*r));
        tails.push(
            [0.0, 0.25, 0.5, 0.75]
                .iter()
                .map(|f| {
                    let r0 = f * rmax;
                    let s = pts.iter().filter(|(r, _)| *r >= r0).fold(0.0f64, |m, (_, v)| m.max(*v));
                    (r0, s)
                })
                .collect(),
        );
    }
    Ok(InclusionReport { ratios, worst_constant: worst, tail_sups: tails })
}
