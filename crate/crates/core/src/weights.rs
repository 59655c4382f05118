//! Symbolic weight families on `R^n` (usually phase space `R^{2d}`) and
//! sample-based certificates for moderateness, `P_Q` membership and decay.
//!
//! Every evaluation goes through [`WeightDescriptor::ln_eval`]; the positive
//! value is only materialised on request, so Gaussian and sub-exponential
//! weights can be compared far beyond the range where `exp` overflows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// A closed family of positive weights.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    /// `(1 + |X|)^s`
    PolyBracket { s: f64 },
    /// `(1 + |x| + |xi|)^s` on `R^{2d}`
    Shubin { s: f64 },
    /// `(1 + |xi|)^s` on `R^{2d}`
    Sobolev { s: f64 },
    /// `exp(r |X|^{1/s})`, `s >= 1`
    SubExp { r: f64, s: f64 },
    /// `exp(r |X|^2)`
    Gaussian { r: f64 },
    Constant { c: f64 },
    /// `exp(<a, X>)`; not even, used as input to symmetrisation.
    ExpLinear { a: Vec<f64> },
    Product(Box<WeightDescriptor>, Box<WeightDescriptor>),
    Quotient(Box<WeightDescriptor>, Box<WeightDescriptor>),
    Power { base: Box<WeightDescriptor>, exponent: f64 },
    /// `max(w(X), w(-X))`
    ReflectMax(Box<WeightDescriptor>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightDescriptor {
    kind: WeightKind,
    dim: usize,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn finite_param(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

impl WeightDescriptor {
    fn checked_dim(dim: usize) -> Result<usize> {
        if dim == 0 {
            Err(Error::InvalidParameter("weight dimension must be positive".into()))
        } else {
            Ok(dim)
        }
    }

    fn phase_dim(dim: usize) -> Result<usize> {
        let dim = Self::checked_dim(dim)?;
        if dim % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "phase-space weight needs an even dimension, got {dim}"
            )));
        }
        Ok(dim)
    }

    pub fn poly_bracket(s: f64, dim: usize) -> Result<Self> {
        Ok(Self { kind: WeightKind::PolyBracket { s: finite_param("s", s)? }, dim: Self::checked_dim(dim)? })
    }

    pub fn shubin(s: f64, dim: usize) -> Result<Self> {
        Ok(Self { kind: WeightKind::Shubin { s: finite_param("s", s)? }, dim: Self::phase_dim(dim)? })
    }

    pub fn sobolev(s: f64, dim: usize) -> Result<Self> {
        Ok(Self { kind: WeightKind::Sobolev { s: finite_param("s", s)? }, dim: Self::phase_dim(dim)? })
    }

    pub fn subexp(r: f64, s: f64, dim: usize) -> Result<Self> {
        finite_param("r", r)?;
        if !(s.is_finite() && s >= 1.0) {
            return Err(Error::InvalidParameter(format!("subexp order s must be >= 1, got {s}")));
        }
        Ok(Self { kind: WeightKind::SubExp { r, s }, dim: Self::checked_dim(dim)? })
    }

    pub fn gaussian(r: f64, dim: usize) -> Result<Self> {
        Ok(Self { kind: WeightKind::Gaussian { r: finite_param("r", r)? }, dim: Self::checked_dim(dim)? })
    }

    pub fn constant(c: f64, dim: usize) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("constant weight must be positive, got {c}")));
        }
        Ok(Self { kind: WeightKind::Constant { c }, dim: Self::checked_dim(dim)? })
    }

    pub fn exp_linear(a: Vec<f64>) -> Result<Self> {
        let dim = Self::checked_dim(a.len())?;
        for &v in &a {
            finite_param("a", v)?;
        }
        Ok(Self { kind: WeightKind::ExpLinear { a }, dim })
    }

    fn same_dim(a: &Self, b: &Self) -> Result<usize> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
        }
        Ok(a.dim)
    }

    pub fn product(lhs: Self, rhs: Self) -> Result<Self> {
        let dim = Self::same_dim(&lhs, &rhs)?;
        Ok(Self { kind: WeightKind::Product(Box::new(lhs), Box::new(rhs)), dim })
    }

    pub fn quotient(num: Self, den: Self) -> Result<Self> {
        let dim = Self::same_dim(&num, &den)?;
        Ok(Self { kind: WeightKind::Quotient(Box::new(num), Box::new(den)), dim })
    }

    pub fn power(base: Self, exponent: f64) -> Result<Self> {
        let dim = base.dim;
        Ok(Self {
            kind: WeightKind::Power { base: Box::new(base), exponent: finite_param("exponent", exponent)? },
            dim,
        })
    }

    pub fn reflect_max(base: Self) -> Self {
        let dim = base.dim;
        Self { kind: WeightKind::ReflectMax(Box::new(base)), dim }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when `w(-X) = w(X)` follows from the structure alone.
    pub fn is_even_by_construction(&self) -> bool {
        match &self.kind {
            WeightKind::ExpLinear { a } => a.iter().all(|&v| v == 0.0),
            WeightKind::Product(a, b) | WeightKind::Quotient(a, b) => {
                a.is_even_by_construction() && b.is_even_by_construction()
            }
            WeightKind::Power { base, .. } => base.is_even_by_construction(),
            _ => true,
        }
    }

    fn ln_eval_unchecked(&self, x: &[f64]) -> f64 {
        let half = self.dim / 2;
        match &self.kind {
            WeightKind::PolyBracket { s } => s * norm(x).ln_1p(),
            WeightKind::Shubin { s } => s * (norm(&x[..half]) + norm(&x[half..])).ln_1p(),
            WeightKind::Sobolev { s } => s * norm(&x[half..]).ln_1p(),
            WeightKind::SubExp { r, s } => r * norm(x).powf(1.0 / s),
            WeightKind::Gaussian { r } => r * x.iter().map(|v| v * v).sum::<f64>(),
            WeightKind::Constant { c } => c.ln(),
            WeightKind::ExpLinear { a } => a.iter().zip(x).map(|(a, v)| a * v).sum(),
            WeightKind::Product(a, b) => a.ln_eval_unchecked(x) + b.ln_eval_unchecked(x),
            WeightKind::Quotient(a, b) => a.ln_eval_unchecked(x) - b.ln_eval_unchecked(x),
            WeightKind::Power { base, exponent } => exponent * base.ln_eval_unchecked(x),
            WeightKind::ReflectMax(base) => {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                base.ln_eval_unchecked(x).max(base.ln_eval_unchecked(&neg))
            }
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weight evaluation point".into()));
        }
        Ok(())
    }

    /// Natural logarithm of the weight at `x`.
    pub fn ln_eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.ln_eval_unchecked(x))
    }

    /// The weight value at `x`; errors if it leaves the `f64` range.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = self.ln_eval(x)?.exp();
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("weight value at {x:?} is not representable")))
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, params, children): (&str, Value, Vec<&WeightDescriptor>) = match &self.kind {
            WeightKind::PolyBracket { s } => ("poly_bracket", json!({ "s": s }), vec![]),
            WeightKind::Shubin { s } => ("shubin", json!({ "s": s }), vec![]),
            WeightKind::Sobolev { s } => ("sobolev", json!({ "s": s }), vec![]),
            WeightKind::SubExp { r, s } => ("subexp", json!({ "r": r, "s": s }), vec![]),
            WeightKind::Gaussian { r } => ("gaussian", json!({ "r": r }), vec![]),
            WeightKind::Constant { c } => ("constant", json!({ "c": c }), vec![]),
            WeightKind::ExpLinear { a } => ("exp_linear", json!({ "a": a }), vec![]),
            WeightKind::Product(a, b) => ("product", json!({}), vec![a, b]),
            WeightKind::Quotient(a, b) => ("quotient", json!({}), vec![a, b]),
            WeightKind::Power { base, exponent } => ("power", json!({ "exponent": exponent }), vec![base]),
            WeightKind::ReflectMax(base) => ("reflect_max", json!({}), vec![base]),
        };
        json!({
            "kind": kind,
            "params": params,
            "dim": self.dim,
            "children": children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Format("weight must be a JSON object".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Format("weight.kind missing".into()))?;
        let empty = Map::new();
        let params = match obj.get("params") {
            Some(Value::Object(m)) => m,
            None => &empty,
            Some(_) => return Err(Error::Format("weight.params must be an object".into())),
        };
        let children: Vec<WeightDescriptor> = match obj.get("children") {
            Some(Value::Array(c)) => c.iter().map(Self::from_json).collect::<Result<_>>()?,
            None => vec![],
            Some(_) => return Err(Error::Format("weight.children must be an array".into())),
        };
        let num = |name: &str| -> Result<f64> {
            params
                .get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Format(format!("weight {kind}: params.{name} missing")))
        };
        let dim_field = obj.get("dim").and_then(Value::as_u64).map(|d| d as usize);
        let dim = || -> Result<usize> {
            dim_field.ok_or_else(|| Error::Format(format!("weight {kind}: dim missing")))
        };
        let composite = matches!(kind, "product" | "quotient" | "power" | "reflect_max");
        if !composite && !children.is_empty() {
            return Err(Error::Format(format!("weight {kind} takes no children")));
        }
        let w = match kind {
            "poly_bracket" => Self::poly_bracket(num("s")?, dim()?)?,
            "shubin" => Self::shubin(num("s")?, dim()?)?,
            "sobolev" => Self::sobolev(num("s")?, dim()?)?,
            "subexp" => Self::subexp(num("r")?, num("s")?, dim()?)?,
            "gaussian" => Self::gaussian(num("r")?, dim()?)?,
            "constant" => Self::constant(num("c")?, dim()?)?,
            "exp_linear" => {
                let a = params
                    .get("a")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Format("weight exp_linear: params.a missing".into()))?
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| Error::Format("params.a must be numeric".into())))
                    .collect::<Result<Vec<_>>>()?;
                Self::exp_linear(a)?
            }
            "product" | "quotient" | "power" | "reflect_max" => {
                let mut it = children.into_iter();
                match kind {
                    "product" => {
                        let (a, b) = (it.next(), it.next());
                        match (a, b, it.next()) {
                            (Some(a), Some(b), None) => Self::product(a, b)?,
                            _ => return Err(Error::Format("weight product expects 2 children".into())),
                        }
                    }
                    "quotient" => match (it.next(), it.next(), it.next()) {
                        (Some(a), Some(b), None) => Self::quotient(a, b)?,
                        _ => return Err(Error::Format("weight quotient expects 2 children".into())),
                    },
                    "power" => match (it.next(), it.next()) {
                        (Some(b), None) => Self::power(b, num("exponent")?)?,
                        _ => return Err(Error::Format("weight power expects 1 child".into())),
                    },
                    _ => match (it.next(), it.next()) {
                        (Some(b), None) => Self::reflect_max(b),
                        _ => return Err(Error::Format("weight reflect_max expects 1 child".into())),
                    },
                }
            }
            other => return Err(Error::Format(format!("unknown weight kind '{other}'"))),
        };
        if let Some(d) = dim_field {
            if d != w.dim {
                return Err(Error::DimensionMismatch { expected: w.dim, got: d });
            }
        }
        Ok(w)
    }
}

impl Serialize for WeightDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// A symmetric cube grid `{-L, ..., L}^n` with spacing `step`, used as the
/// finite stand-in for the quantifiers in weight inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub extent: f64,
    pub step: f64,
}

impl SampleGrid {
    pub fn new(extent: f64, step: f64) -> Result<Self> {
        crate::grid::Axis::new(step, extent)?;
        Ok(Self { extent, step })
    }

    pub fn points(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        let axis = crate::grid::Axis::new(self.step, self.extent)?;
        let n = axis.len();
        let total = n.checked_pow(dim as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| {
            Error::InvalidParameter(format!("sample grid with {n}^{dim} points is too large"))
        })?;
        let mut out = Vec::with_capacity(total);
        for lin in 0..total {
            let mut rem = lin;
            let mut p = vec![0.0; dim];
            for k in (0..dim).rev() {
                p[k] = axis.point(rem % n);
                rem /= n;
            }
            out.push(p);
        }
        Ok(out)
    }
}

/// Outcome of [`check_moderate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModerateCertificate {
    /// Largest sampled `w(x+y) / (w(x) v(y))`.
    pub best_constant: f64,
    /// `best_constant / claimed_constant`.
    pub max_violation_ratio: f64,
    pub claimed_constant: f64,
    pub sample_spec: SampleGrid,
    pub pairs_checked: usize,
    pub worst_pair: (Vec<f64>, Vec<f64>),
    pub tol: f64,
    pub passed: bool,
}

/// Relative tolerance used by all pass/fail criteria unless overridden.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Checks `w(x+y) <= C w(x) v(y)` over all sampled pairs with `C = 1`.
pub fn check_moderate(
    w: &WeightDescriptor,
    v: &WeightDescriptor,
    sample: &SampleGrid,
    tol: f64,
) -> Result<ModerateCertificate> {
    check_moderate_with_constant(w, v, sample, 1.0, tol)
}

/// Checks `w(x+y) <= C w(x) v(y)` for a claimed constant `C` over all
/// sampled pairs `(x, y)`. Passing is monotone in the sample: shrinking the
/// sample can only lower `best_constant`.
pub fn check_moderate_with_constant(
    w: &WeightDescriptor,
    v: &WeightDescriptor,
    sample: &SampleGrid,
    claimed_constant: f64,
    tol: f64,
) -> Result<ModerateCertificate> {
    if w.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: v.dim() });
    }
    if !(claimed_constant.is_finite() && claimed_constant > 0.0) {
        return Err(Error::InvalidParameter("claimed constant must be positive".into()));
    }
    let points = sample.points(w.dim())?;
    if points.is_empty() {
        return Err(Error::EmptySample("moderateness sample".into()));
    }
    let mut ln_v = Vec::with_capacity(points.len());
    for y in &points {
        let lv = v.ln_eval(y)?;
        if !lv.is_finite() || lv.exp() <= 0.0 {
            return Err(Error::Degenerate(format!("moderator vanishes at {y:?}")));
        }
        let neg: Vec<f64> = y.iter().map(|t| -t).collect();
        let lv_neg = v.ln_eval(&neg)?;
        if (lv - lv_neg).abs() > 1e-9 * lv.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!("moderator is not even at {y:?}")));
        }
        ln_v.push(lv);
    }
    let ln_w: Vec<f64> = points.iter().map(|x| w.ln_eval(x)).collect::<Result<_>>()?;

    // Per-x maxima in parallel, then a sequential reduction in index order.
    let per_x: Vec<(f64, usize)> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut best = (f64::NEG_INFINITY, 0usize);
            let mut xy = vec![0.0; x.len()];
            for (j, y) in points.iter().enumerate() {
                for k in 0..x.len() {
                    xy[k] = x[k] + y[k];
                }
                let r = w.ln_eval_unchecked(&xy) - ln_w[i] - ln_v[j];
                if r > best.0 {
                    best = (r, j);
                }
            }
            best
        })
        .collect();
    let (mut ln_best, mut wi, mut wj) = (f64::NEG_INFINITY, 0, 0);
    for (i, &(r, j)) in per_x.iter().enumerate() {
        if r > ln_best {
            ln_best = r;
            wi = i;
            wj = j;
        }
    }
    let best_constant = ln_best.exp();
    let ratio = (ln_best - claimed_constant.ln()).exp();
    Ok(ModerateCertificate {
        best_constant,
        max_violation_ratio: ratio,
        claimed_constant,
        sample_spec: *sample,
        pairs_checked: points.len() * points.len(),
        worst_pair: (points[wi].clone(), points[wj].clone()),
        tol,
        passed: ln_best.is_finite() && ratio <= 1.0 + tol,
    })
}

/// `max(v1(x), v1(-x))`; returned unchanged when already even.
pub fn symmetrize_submultiplicative(v1: &WeightDescriptor) -> WeightDescriptor {
    if v1.is_even_by_construction() {
        v1.clone()
    } else {
        WeightDescriptor::reflect_max(v1.clone())
    }
}

/// A weight with its moderator and a passing certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedWeight {
    pub weight: WeightDescriptor,
    pub moderator: WeightDescriptor,
    pub certificate: ModerateCertificate,
}

/// Bundles `w`, its moderator `v` and the certificate for the claimed
/// constant. Input to [`compose_closure_suite`].
pub fn certify(
    w: &WeightDescriptor,
    v: &WeightDescriptor,
    sample: &SampleGrid,
    claimed_constant: f64,
    tol: f64,
) -> Result<CertifiedWeight> {
    let certificate = check_moderate_with_constant(w, v, sample, claimed_constant, tol)?;
    Ok(CertifiedWeight { weight: w.clone(), moderator: v.clone(), certificate })
}

/// Product, quotient and power of certified weights, each re-certified
/// against the composed moderator with the composed constant
/// (`C1 C2`, `C1 C2`, `C1^|a|`).
pub fn compose_closure_suite(
    w1: &CertifiedWeight,
    w2: &CertifiedWeight,
    a: f64,
) -> Result<Vec<(WeightDescriptor, ModerateCertificate)>> {
    for (name, cw) in [("w1", w1), ("w2", w2)] {
        if !cw.certificate.passed {
            return Err(Error::InvalidParameter(format!("{name} has a failed moderateness certificate")));
        }
    }
    let sample = w1.certificate.sample_spec;
    let tol = w1.certificate.tol.max(w2.certificate.tol);
    let c1 = w1.certificate.claimed_constant;
    let c2 = w2.certificate.claimed_constant;
    let v12 = WeightDescriptor::product(w1.moderator.clone(), w2.moderator.clone())?;

    let product = WeightDescriptor::product(w1.weight.clone(), w2.weight.clone())?;
    let quotient = WeightDescriptor::quotient(w1.weight.clone(), w2.weight.clone())?;
    let power = WeightDescriptor::power(w1.weight.clone(), a)?;
    let v_pow = WeightDescriptor::power(w1.moderator.clone(), a.abs())?;

    let mut out = Vec::with_capacity(3);
    let cert = check_moderate_with_constant(&product, &v12, &sample, c1 * c2, tol)?;
    out.push((product, cert));
    let cert = check_moderate_with_constant(&quotient, &v12, &sample, c1 * c2, tol)?;
    out.push((quotient, cert));
    let cert = check_moderate_with_constant(&power, &v_pow, &sample, c1.powf(a.abs()), tol)?;
    out.push((power, cert));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Vanishes,
    BoundedNotVanishing,
    Unbounded,
}

/// Sampling parameters for [`vanishing_at_infinity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    /// The outermost sphere sits at `radii.last() * growth`.
    pub growth: f64,
    /// Extra sphere radii per factor of two between the given radii.
    pub per_octave: usize,
    /// `vanishes` needs `annulus_sup[last] <= threshold * annulus_sup[first]`.
    pub threshold: f64,
    pub tol: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { growth: 2.0, per_octave: 4, threshold: 0.1, tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub radii: Vec<f64>,
    /// Sampled `sup_{|X| >= radii[i]} w(X)`; non-increasing.
    pub annulus_sup: Vec<f64>,
    pub ln_annulus_sup: Vec<f64>,
    /// The refined sphere radii and the maximum on each sphere.
    pub sphere_radii: Vec<f64>,
    pub ln_sphere_max: Vec<f64>,
    pub verdict: DecayVerdict,
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic unit directions: equispaced on the circle for `n = 2`,
/// normalised Halton points otherwise, always followed by the `2n` signed
/// coordinate axes.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count + 2 * n);
    match n {
        1 => {}
        2 => {
            for k in 0..count {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                dirs.push(vec![t.cos(), t.sin()]);
            }
        }
        _ => {
            let mut i = 1;
            while dirs.len() < count {
                let p: Vec<f64> = (0..n)
                    .map(|k| 2.0 * radical_inverse(i, PRIMES[k % PRIMES.len()]) - 1.0)
                    .collect();
                let r = norm(&p);
                if r > 1e-3 {
                    dirs.push(p.iter().map(|v| v / r).collect());
                }
                i += 1;
            }
        }
    }
    for k in 0..n {
        for sgn in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[k] = sgn;
            dirs.push(e);
        }
    }
    dirs
}

pub fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("radii must be non-empty".into()));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidParameter("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
    }
    Ok(())
}

/// Geometric refinement of `[radii[0], radii[last] * growth]` merged with
/// the given radii.
pub(crate) fn refine_radii(radii: &[f64], growth: f64, per_octave: usize) -> Vec<f64> {
    let lo = radii[0];
    let hi = radii[radii.len() - 1] * growth.max(1.0);
    let mut out: Vec<f64> = radii.to_vec();
    if per_octave > 0 && hi > lo {
        let steps = ((hi / lo).log2() * per_octave as f64).ceil() as usize;
        for k in 0..=steps {
            out.push(lo * (hi / lo).powf(k as f64 / steps.max(1) as f64));
        }
    }
    out.push(hi);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    out
}

/// Classifies a sequence of log-values along increasing radii.
///
/// `ln_growth` is the sequence used to detect unbounded growth (strict
/// increase across the outermost three entries); `ln_sup` is the tail
/// supremum used to detect decay.
pub fn classify_trend(ln_growth: &[f64], ln_sup: &[f64], threshold: f64, tol: f64) -> DecayVerdict {
    let step = (1.0 + tol).ln();
    let n = ln_growth.len();
    if n >= 3 && ln_growth[n - 3..].windows(2).all(|w| w[1] - w[0] > step) {
        return DecayVerdict::Unbounded;
    }
    if ln_growth.iter().any(|v| v.is_infinite() && *v > 0.0) {
        return DecayVerdict::Unbounded;
    }
    let m = ln_sup.len();
    if m >= 2 {
        let tail = &ln_sup[m.saturating_sub(3)..];
        let decreasing = tail.windows(2).all(|w| w[0] - w[1] > step);
        if decreasing && ln_sup[m - 1] <= ln_sup[0] + threshold.ln() {
            return DecayVerdict::Vanishes;
        }
    }
    DecayVerdict::BoundedNotVanishing
}

/// Samples `sup_{|X| >= R} w(X)` on concentric spheres plus axis points.
pub fn vanishing_at_infinity(
    w: &WeightDescriptor,
    radii: &[f64],
    sphere_samples: usize,
) -> Result<DecayProfile> {
    vanishing_at_infinity_with(w, radii, sphere_samples, &DecayOptions::default())
}

pub fn vanishing_at_infinity_with(
    w: &WeightDescriptor,
    radii: &[f64],
    sphere_samples: usize,
    opts: &DecayOptions,
) -> Result<DecayProfile> {
    validate_radii(radii)?;
    let n = w.dim();
    if sphere_samples < 2 * n {
        return Err(Error::InvalidParameter(format!(
            "sphere_samples must be at least {}, got {sphere_samples}",
            2 * n
        )));
    }
    let dirs = sphere_directions(n, sphere_samples);
    let sphere_radii = refine_radii(radii, opts.growth, opts.per_octave);
    let ln_sphere_max: Vec<f64> = sphere_radii
        .par_iter()
        .map(|&r| {
            let mut x = vec![0.0; n];
            let mut m = f64::NEG_INFINITY;
            for d in &dirs {
                for k in 0..n {
                    x[k] = r * d[k];
                }
                m = m.max(w.ln_eval_unchecked(&x));
            }
            m
        })
        .collect();
    let ln_annulus_sup: Vec<f64> = radii
        .iter()
        .map(|&r0| {
            sphere_radii
                .iter()
                .zip(&ln_sphere_max)
                .filter(|(r, _)| **r >= r0 * (1.0 - 1e-12))
                .fold(f64::NEG_INFINITY, |m, (_, v)| m.max(*v))
        })
        .collect();
    let verdict = classify_trend(&ln_sphere_max, &ln_annulus_sup, opts.threshold, opts.tol);
    Ok(DecayProfile {
        radii: radii.to_vec(),
        annulus_sup: ln_annulus_sup.iter().map(|v| v.exp()).collect(),
        ln_annulus_sup,
        sphere_radii,
        ln_sphere_max,
        verdict,
    })
}

/// Per-clause outcome of [`check_pq_class`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqCertificate {
    pub c: f64,
    pub big_r: f64,
    pub r: f64,
    pub sample_spec: SampleGrid,
    pub admissible_pairs: usize,
    /// Empirical extrema of `w(x+y) w(x-y) / w(x)^2` on the admissible region.
    pub comparability_lower: f64,
    pub comparability_upper: f64,
    pub comparability_passed: bool,
    /// `inf w(x) e^{r|x|^2}` and `sup w(x) e^{-r|x|^2}` over the sample.
    pub gauss_lower_constant: f64,
    pub gauss_upper_constant: f64,
    pub gauss_lower_passed: bool,
    pub gauss_upper_passed: bool,
    pub passed: bool,
}

/// Checks the two `P_Q` clauses on a finite sample.
///
/// The comparability clause is evaluated on pairs with `R c <= |x|` and
/// `|x| |y| <= c`. A `≲` bound is accepted when its sampled extreme over the
/// outer half of the sample (in `|x|`) does not exceed the extreme over the
/// inner half by more than `tol`, i.e. the bounding ratio is not growing.
pub fn check_pq_class(
    w: &WeightDescriptor,
    c: f64,
    big_r: f64,
    r: f64,
    sample: &SampleGrid,
    tol: f64,
) -> Result<PqCertificate> {
    if big_r.is_nan() || big_r < 2.0 {
        return Err(Error::InvalidParameter(format!("R must be >= 2, got {big_r}")));
    }
    if !(c > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter("c and r must be positive".into()));
    }
    let points = sample.points(w.dim())?;
    let ln_w: Vec<f64> = points.iter().map(|x| w.ln_eval(x)).collect::<Result<_>>()?;
    let norms: Vec<f64> = points.iter().map(|x| norm(x)).collect();
    let split = sample.extent / 2.0;
    let step = (1.0 + tol).ln();

    let mut inner = (f64::INFINITY, f64::NEG_INFINITY);
    let mut outer = (f64::INFINITY, f64::NEG_INFINITY);
    let mut pairs = 0usize;
    let mut xp = vec![0.0; w.dim()];
    let mut xm = vec![0.0; w.dim()];
    for (i, x) in points.iter().enumerate() {
        let nx = norms[i];
        if nx < big_r * c {
            continue;
        }
        for (j, y) in points.iter().enumerate() {
            if nx * norms[j] > c {
                continue;
            }
            for k in 0..x.len() {
                xp[k] = x[k] + y[k];
                xm[k] = x[k] - y[k];
            }
            let q = w.ln_eval_unchecked(&xp) + w.ln_eval_unchecked(&xm) - 2.0 * ln_w[i];
            let bucket = if nx <= split { &mut inner } else { &mut outer };
            bucket.0 = bucket.0.min(q);
            bucket.1 = bucket.1.max(q);
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::EmptySample(format!(
            "no sampled x with |x| >= Rc = {} inside extent {}",
            big_r * c,
            sample.extent
        )));
    }
    let lo = inner.0.min(outer.0);
    let hi = inner.1.max(outer.1);
    let comparability_passed = lo.is_finite()
        && hi.is_finite()
        && (inner.0.is_infinite() || outer.0 >= inner.0 - step)
        && (inner.1.is_infinite() || outer.1 <= inner.1 + step);

    let mut g_in = (f64::INFINITY, f64::NEG_INFINITY);
    let mut g_out = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, lw) in ln_w.iter().enumerate() {
        let q2 = norms[i] * norms[i];
        let (low, up) = (lw + r * q2, lw - r * q2);
        let b = if norms[i] <= split { &mut g_in } else { &mut g_out };
        b.0 = b.0.min(low);
        b.1 = b.1.max(up);
    }
    let gauss_lower_passed = g_out.0.is_infinite() || g_out.0 >= g_in.0 - step;
    let gauss_upper_passed = g_out.1.is_infinite() || g_out.1 <= g_in.1 + step;
    Ok(PqCertificate {
        c,
        big_r,
        r,
        sample_spec: *sample,
        admissible_pairs: pairs,
        comparability_lower: lo.exp(),
        comparability_upper: hi.exp(),
        comparability_passed,
        gauss_lower_constant: g_in.0.min(g_out.0).exp(),
        gauss_upper_constant: g_in.1.max(g_out.1).exp(),
        gauss_lower_passed,
        gauss_upper_passed,
        passed: comparability_passed && gauss_lower_passed && gauss_upper_passed,
    })
}
