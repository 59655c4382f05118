//! Configuration-driven batch runs behind the `modspace` binary.
//!
//! A run takes a command name and a JSON config carrying
//! `"$schema_version": 1`. The report embeds the resolved config (with
//! defaults filled in), a timestamp, the command result and the outcome of
//! the hard assertions checked along the way.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::embedding::{analyze_embedding, lpq_quotient_criterion, CompactnessVerdict, ContinuityVerdict, EmbeddingOptions};
use crate::error::{Error, Result};
use crate::format::{read_grid_function, write_stft_field};
use crate::grid::{Axis, GridFunction};
use crate::hermite::{bargmann_kernel, bargmann_point, hermite_function};
use crate::lattice::{Exponent, MixedNormSpec, OrderedBasis};
use crate::stft::{gaussian_window, modulation_norm, stft, tf_shift, uses_fft, PhaseGrid};
use crate::twisted::{project_pphi, reproducing_residual};
use crate::weights::{
    certify, check_moderate_with_constant, check_pq_class, compose_closure_suite, vanishing_at_infinity, SampleGrid,
    WeightDescriptor, DEFAULT_TOL,
};

pub const SCHEMA_VERSION: u64 = 1;
pub const SCHEMA_KEY: &str = "$schema_version";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    WeightCheck,
    Stft,
    Modnorm,
    BargmannCompare,
    TwistedCheck,
    EmbedAnalyze,
    CorollaryCheck,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::WeightCheck,
        Command::Stft,
        Command::Modnorm,
        Command::BargmannCompare,
        Command::TwistedCheck,
        Command::EmbedAnalyze,
        Command::CorollaryCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::WeightCheck => "weight-check",
            Command::Stft => "stft",
            Command::Modnorm => "modnorm",
            Command::BargmannCompare => "bargmann-compare",
            Command::TwistedCheck => "twisted-check",
            Command::EmbedAnalyze => "embed-analyze",
            Command::CorollaryCheck => "corollary-check",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Optional `"output"` block of a config; CLI flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
}

impl OutputSpec {
    pub fn from_config(config: &Value) -> Result<Self> {
        match config.get("output") {
            None | Some(Value::Null) => Ok(Self::default()),
            Some(v) => {
                let spec: Self = parse_section_at(v.clone(), "output.")?;
                spec.output_format()?;
                Ok(spec)
            }
        }
    }

    pub fn output_format(&self) -> Result<Option<OutputFormat>> {
        match self.format.as_deref() {
            None => Ok(None),
            Some("json") => Ok(Some(OutputFormat::Json)),
            Some("csv") => Ok(Some(OutputFormat::Csv)),
            Some(other) => Err(Error::Format(format!("output.format: expected json or csv, got {other}"))),
        }
    }
}

/// Result of one run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Value,
    pub csv: String,
    /// Descriptions of failed hard assertions; empty on success.
    pub failures: Vec<String>,
}

impl RunOutput {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.csv.clone(),
        }
    }
}

/// Process exit status for an error: I/O 3, assertion 1, anything else
/// (schema, parameters) 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        Error::Assertion(_) => 1,
        _ => 2,
    }
}

/// Sets the leaf at a dotted `path` (array elements by index), creating
/// intermediate objects. `raw` is parsed as JSON, falling back to a string.
pub fn apply_override(config: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::Format(format!("--set {path}: empty path segment")));
    }
    let mut cur = config;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(|| Value::Object(Map::new()))
            }
            Value::Array(arr) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| Error::Format(format!("--set {path}: '{seg}' indexes an array")))?;
                let len = arr.len();
                let slot = arr
                    .get_mut(idx)
                    .ok_or_else(|| Error::Format(format!("--set {path}: index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(Error::Format(format!(
                    "--set {path}: '{}' is not an object",
                    segments[..i].join(".")
                )))
            }
        };
    }
    Ok(())
}

/// Applies `key=value` overrides in order.
pub fn apply_overrides(config: &mut Value, sets: &[String]) -> Result<()> {
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("--set expects key=value, got '{s}'")))?;
        apply_override(config, k.trim(), v)?;
    }
    Ok(())
}

fn parse_section<T: DeserializeOwned>(v: Value) -> Result<T> {
    parse_section_at(v, "")
}

fn parse_section_at<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::Format(format!("{prefix}{inner}"))
        } else {
            Error::Format(format!("{prefix}{path}: {inner}"))
        }
    })
}

fn default_one() -> f64 {
    1.0
}

fn default_dim() -> usize {
    1
}

fn default_stride() -> usize {
    1
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_sphere_samples() -> usize {
    64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub step: f64,
    pub extent: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

impl GridConfig {
    fn axes(&self) -> Result<Vec<Axis>> {
        if self.dim == 0 {
            return Err(Error::Format("grid.dim: must be positive".into()));
        }
        GridFunction::cube_axes(self.dim, self.step, self.extent)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    #[serde(default = "default_stride")]
    pub x_stride: usize,
    pub xi_extent: f64,
    #[serde(default)]
    pub xi_step: Option<f64>,
}

impl PhaseConfig {
    fn grid(&self, axes: &[Axis]) -> Result<PhaseGrid> {
        match self.xi_step {
            Some(s) => PhaseGrid::with_xi_step(axes, self.x_stride, s, self.xi_extent),
            None => PhaseGrid::fft_dual(axes, self.x_stride, self.xi_extent),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Zero,
    Gaussian,
    Hermite { alpha: Vec<usize> },
    TfShiftedGaussian { x0: Vec<f64>, xi0: Vec<f64> },
    File { path: PathBuf },
}

impl FunctionConfig {
    fn label(&self) -> String {
        match self {
            FunctionConfig::Zero => "zero".into(),
            FunctionConfig::Gaussian => "gaussian".into(),
            FunctionConfig::Hermite { alpha } => format!("hermite{alpha:?}"),
            FunctionConfig::TfShiftedGaussian { x0, xi0 } => format!("shifted{x0:?}{xi0:?}"),
            FunctionConfig::File { path } => path.display().to_string(),
        }
    }

    fn build(&self, axes: &[Axis]) -> Result<GridFunction> {
        match self {
            FunctionConfig::Zero => GridFunction::zeros(axes.to_vec()),
            FunctionConfig::Gaussian => gaussian_window(axes),
            FunctionConfig::Hermite { alpha } => hermite_function(alpha, axes),
            FunctionConfig::TfShiftedGaussian { x0, xi0 } => tf_shift(&gaussian_window(axes)?, x0, xi0),
            FunctionConfig::File { path } => {
                let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
                let f = read_grid_function(&mut file)?;
                if f.axes() != axes {
                    return Err(Error::GridMismatch(format!(
                        "{} uses grid {:?}, config grid is {:?}",
                        path.display(),
                        f.axes(),
                        axes
                    )));
                }
                Ok(f)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureConfig {
    pub other: WeightDescriptor,
    pub other_moderator: WeightDescriptor,
    #[serde(default = "default_one")]
    pub other_constant: f64,
    pub a: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub radii: Vec<f64>,
    #[serde(default = "default_sphere_samples")]
    pub sphere_samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PqConfig {
    pub c: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub r: f64,
    pub sample: SampleGrid,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightCheckConfig {
    pub weight: WeightDescriptor,
    pub moderator: WeightDescriptor,
    pub sample: SampleGrid,
    #[serde(default = "default_one")]
    pub claimed_constant: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub closure: Option<ClosureConfig>,
    #[serde(default)]
    pub decay: Option<DecayConfig>,
    #[serde(default)]
    pub pq: Option<PqConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftConfig {
    pub function: FunctionConfig,
    #[serde(default)]
    pub window: Option<FunctionConfig>,
    pub grid: GridConfig,
    pub phase: PhaseConfig,
    /// Optional binary dump of the field.
    #[serde(default)]
    pub field_out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    #[serde(default)]
    pub p: Option<Exponent>,
    #[serde(default)]
    pub q: Option<Exponent>,
    /// Integrate ξ innermost instead of x.
    #[serde(default)]
    pub xi_inner: bool,
    #[serde(default)]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub exponents: Option<Vec<Exponent>>,
}

impl NormConfig {
    fn spec(&self, d: usize) -> Result<MixedNormSpec> {
        if let Some(exps) = &self.exponents {
            let basis = match &self.basis {
                Some(b) => OrderedBasis::from_vectors(b)?,
                None => OrderedBasis::standard(2 * d),
            };
            return MixedNormSpec::new(basis, exps.clone(), WeightDescriptor::constant(1.0, 2 * d)?);
        }
        let (p, q) = match (self.p, self.q) {
            (Some(p), Some(q)) => (p, q),
            _ => return Err(Error::Format("norm: give either p and q or exponents".into())),
        };
        if self.xi_inner {
            MixedNormSpec::lpq2(d, p, q)
        } else {
            MixedNormSpec::lpq1(d, p, q)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModnormConfig {
    pub function: FunctionConfig,
    #[serde(default)]
    pub window: Option<FunctionConfig>,
    pub grid: GridConfig,
    pub phase: PhaseConfig,
    pub weight: WeightDescriptor,
    pub norm: NormConfig,
}

fn default_bargmann_tol() -> f64 {
    1e-5
}

fn default_twisted_tol() -> f64 {
    1e-4
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BargmannConfig {
    pub grid: GridConfig,
    pub orders: Vec<usize>,
    /// Points `[x, ξ]` with `√2 x` on the grid.
    pub points: Vec<[f64; 2]>,
    #[serde(default = "default_bargmann_tol")]
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistedConfig {
    pub grid: GridConfig,
    pub phase: PhaseConfig,
    pub functions: Vec<FunctionConfig>,
    #[serde(default = "default_twisted_tol")]
    pub tol: f64,
    /// Also run the orthogonal-window variant `φ1 = h_0`, `φ3 = h_1`.
    #[serde(default = "default_true")]
    pub orthogonal_check: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedConfig {
    pub omega1: WeightDescriptor,
    pub omega2: WeightDescriptor,
    #[serde(default)]
    pub options: EmbeddingOptions,
}

fn default_corollary_radius() -> f64 {
    64.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorollaryConfig {
    pub omega1: WeightDescriptor,
    pub omega2: WeightDescriptor,
    pub p0: f64,
    pub q0: f64,
    #[serde(default)]
    pub lattice: Option<Vec<Vec<f64>>>,
    #[serde(rename = "R", default = "default_corollary_radius")]
    pub big_r: f64,
}

struct Outcome {
    config: Value,
    result: Value,
    csv: String,
    failures: Vec<String>,
}

/// Validates the envelope and strips `$schema_version` / `command`.
fn open_envelope(command: Command, config: &Value) -> Result<Value> {
    let mut obj = config
        .as_object()
        .cloned()
        .ok_or_else(|| Error::Format("config must be a JSON object".into()))?;
    match obj.remove(SCHEMA_KEY) {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(Error::Format(format!(
                "{SCHEMA_KEY}: unsupported value {other}, expected {SCHEMA_VERSION}"
            )))
        }
        None => return Err(Error::Format(format!("{SCHEMA_KEY}: missing"))),
    }
    obj.remove("output");
    if let Some(c) = obj.remove("command") {
        if c.as_str() != Some(command.name()) {
            return Err(Error::Format(format!("command: config is for {c}, invoked as {}", command.name())));
        }
    }
    Ok(Value::Object(obj))
}

/// Runs `command` on `config`. The timestamp is the only non-deterministic
/// field of the report.
pub fn run(command: Command, config: &Value) -> Result<RunOutput> {
    let body = open_envelope(command, config)?;
    let out = match command {
        Command::WeightCheck => weight_check(parse_section(body)?)?,
        Command::Stft => stft_run(parse_section(body)?)?,
        Command::Modnorm => modnorm_run(parse_section(body)?)?,
        Command::BargmannCompare => bargmann_run(parse_section(body)?)?,
        Command::TwistedCheck => twisted_run(parse_section(body)?)?,
        Command::EmbedAnalyze => embed_run(parse_section(body)?)?,
        Command::CorollaryCheck => corollary_run(parse_section(body)?)?,
    };
    let mut resolved = out.config;
    if let Value::Object(m) = &mut resolved {
        m.insert(SCHEMA_KEY.into(), json!(SCHEMA_VERSION));
        m.insert("command".into(), json!(command.name()));
        if let Some(o) = config.get("output") {
            m.insert("output".into(), o.clone());
        }
    }
    let report = json!({
        SCHEMA_KEY: SCHEMA_VERSION,
        "command": command.name(),
        "config": resolved,
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "result": out.result,
        "assertions": { "passed": out.failures.is_empty(), "failures": out.failures },
    });
    Ok(RunOutput { report, csv: out.csv, failures: out.failures })
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("config serializes")
}

fn weight_check(cfg: WeightCheckConfig) -> Result<Outcome> {
    let moderate =
        check_moderate_with_constant(&cfg.weight, &cfg.moderator, &cfg.sample, cfg.claimed_constant, cfg.tol)?;
    let mut result = Map::new();
    result.insert("moderate".into(), to_value(&moderate));
    let mut failures = Vec::new();
    let mut csv = String::from("section,key,value\n");
    let _ = writeln!(csv, "moderate,best_constant,{:e}", moderate.best_constant);
    let _ = writeln!(csv, "moderate,passed,{}", moderate.passed);
    if let Some(cl) = &cfg.closure {
        let c1 = certify(&cfg.weight, &cfg.moderator, &cfg.sample, cfg.claimed_constant, cfg.tol)?;
        let c2 = certify(&cl.other, &cl.other_moderator, &cfg.sample, cl.other_constant, cfg.tol)?;
        let suite = compose_closure_suite(&c1, &c2, cl.a)?;
        let names = ["product", "quotient", "power"];
        let mut list = Vec::new();
        for (name, (w, cert)) in names.iter().zip(&suite) {
            if !cert.passed {
                failures.push(format!("closure {name}: best constant {:e} exceeds {:e}", cert.best_constant, cert.claimed_constant));
            }
            let _ = writeln!(csv, "closure,{name},{:e}", cert.max_violation_ratio);
            list.push(json!({"operation": name, "weight": w.to_json(), "certificate": cert}));
        }
        result.insert("closure".into(), Value::Array(list));
    }
    if let Some(dc) = &cfg.decay {
        let profile = vanishing_at_infinity(&cfg.weight, &dc.radii, dc.sphere_samples)?;
        for (r, s) in profile.radii.iter().zip(&profile.annulus_sup) {
            let _ = writeln!(csv, "decay,{r},{s:e}");
        }
        result.insert("decay".into(), to_value(&profile));
    }
    if let Some(pq) = &cfg.pq {
        let cert = check_pq_class(&cfg.weight, pq.c, pq.big_r, pq.r, &pq.sample, cfg.tol)?;
        let _ = writeln!(csv, "pq,passed,{}", cert.passed);
        result.insert("pq".into(), to_value(&cert));
    }
    Ok(Outcome { config: to_value(&cfg), result: Value::Object(result), csv, failures })
}

fn window_for(cfg: &Option<FunctionConfig>, axes: &[Axis]) -> Result<GridFunction> {
    match cfg {
        Some(w) => w.build(axes),
        None => gaussian_window(axes),
    }
}

fn stft_run(cfg: StftConfig) -> Result<Outcome> {
    let axes = cfg.grid.axes()?;
    let f = cfg.function.build(&axes)?;
    let phi = window_for(&cfg.window, &axes)?;
    let grid = cfg.phase.grid(&axes)?;
    let v = stft(&f, &phi, &grid)?;
    let d = f.dim();
    let bound = f.l1_norm() * phi.sup_norm() * (2.0 * PI).powf(-(d as f64) / 2.0);
    let sup = v.field.sup_norm();
    let mut failures = Vec::new();
    if sup > bound * (1.0 + 1e-12) + 1e-300 {
        failures.push(format!("sup |V_φf| = {sup:e} exceeds ‖f‖₁‖φ‖∞(2π)^(-d/2) = {bound:e}"));
    }
    if let Some(path) = &cfg.field_out {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_stft_field(&mut w, &v)?;
        std::io::Write::flush(&mut w)?;
    }
    let expected_l2 = f.l2_norm() * phi.l2_norm();
    let origin = grid.index_of(&vec![0.0; 2 * d]).map(|i| v.samples()[ndarray::IxDyn(&i)]);
    let result = json!({
        "window_id": v.window_id,
        "uses_fft": uses_fft(&axes, &grid)?,
        "shape": grid.shape(),
        "sup": sup,
        "sup_bound": bound,
        "l2_norm": v.field.l2_norm(),
        "l2_expected": expected_l2,
        "isometry_relative_error": if expected_l2 > 0.0 { (v.field.l2_norm() - expected_l2).abs() / expected_l2 } else { v.field.l2_norm() },
        "boundary_sup": v.field.boundary_sup(),
        "value_at_origin": origin.map(|z| json!({"re": z.re, "im": z.im})),
    });
    let mut csv = String::new();
    let cols: Vec<String> = (0..d).map(|k| format!("x{k}")).chain((0..d).map(|k| format!("xi{k}"))).collect();
    let _ = writeln!(csv, "{},re,im,abs", cols.join(","));
    for (idx, z) in v.samples().indexed_iter() {
        let p = grid.point(idx.slice());
        let coords: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
        let _ = writeln!(csv, "{},{:e},{:e},{:e}", coords.join(","), z.re, z.im, z.norm());
    }
    Ok(Outcome { config: to_value(&cfg), result, csv, failures })
}

use ndarray::Dimension;

fn modnorm_run(cfg: ModnormConfig) -> Result<Outcome> {
    let axes = cfg.grid.axes()?;
    let f = cfg.function.build(&axes)?;
    let phi = window_for(&cfg.window, &axes)?;
    let grid = cfg.phase.grid(&axes)?;
    let spec = cfg.norm.spec(f.dim())?;
    let norm = modulation_norm(&f, &cfg.weight, &spec, &phi, &grid)?;
    let result = json!({
        "norm": norm,
        "function_l2": f.l2_norm(),
        "window_l2": phi.l2_norm(),
        "order": spec.order(),
    });
    let csv = format!("norm,function_l2\n{norm:e},{:e}\n", f.l2_norm());
    Ok(Outcome { config: to_value(&cfg), result, csv, failures: vec![] })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn bargmann_run(cfg: BargmannConfig) -> Result<Outcome> {
    if cfg.grid.dim != 1 {
        return Err(Error::Unsupported("bargmann-compare runs on d = 1 grids".into()));
    }
    let axes = cfg.grid.axes()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut csv = String::from("order,x,xi,stft_re,stft_im,kernel_re,kernel_im,exact_modulus,path_difference,modulus_error\n");
    for &n in &cfg.orders {
        let h = hermite_function(&[n], &axes)?;
        for &[x, xi] in &cfg.points {
            let z = Complex64::new(x, xi);
            let via_stft = bargmann_point(&h, &[x], &[xi])?;
            let via_kernel = bargmann_kernel(&h, &[z])?;
            let exact = z.norm().powi(n as i32) / factorial(n).sqrt();
            let v = via_stft
                .value
                .ok_or_else(|| Error::NonFinite(format!("Bargmann value at {z} overflows")))?;
            let diff = (v - via_kernel).norm();
            let merr = (v.norm() - exact).abs();
            if diff > cfg.tol || merr > cfg.tol {
                failures.push(format!("order {n}, z = {z}: path difference {diff:e}, modulus error {merr:e}"));
            }
            let _ = writeln!(
                csv,
                "{n},{x},{xi},{:e},{:e},{:e},{:e},{exact:e},{diff:e},{merr:e}",
                v.re, v.im, via_kernel.re, via_kernel.im
            );
            rows.push(json!({
                "order": n, "x": x, "xi": xi,
                "via_stft": via_stft,
                "via_kernel": {"re": via_kernel.re, "im": via_kernel.im},
                "exact_modulus": exact,
                "path_difference": diff,
                "modulus_error": merr,
            }));
        }
    }
    let worst = rows.iter().filter_map(|r| r["path_difference"].as_f64()).fold(0.0, f64::max);
    let result = json!({ "comparisons": rows, "max_path_difference": worst });
    Ok(Outcome { config: to_value(&cfg), result, csv, failures })
}

fn twisted_run(cfg: TwistedConfig) -> Result<Outcome> {
    let axes = cfg.grid.axes()?;
    let grid = cfg.phase.grid(&axes)?;
    let phi = gaussian_window(&axes)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut csv = String::from("function,reproducing,projection,idempotency,orthogonal\n");
    let ortho = if cfg.orthogonal_check {
        Some((hermite_function(&vec![0; axes.len()], &axes)?, {
            let mut a = vec![0; axes.len()];
            a[0] = 1;
            hermite_function(&a, &axes)?
        }))
    } else {
        None
    };
    for fc in &cfg.functions {
        let f = fc.build(&axes)?;
        let label = fc.label();
        let rep = reproducing_residual(&f, &phi, &phi, &phi, &grid)?;
        let v = stft(&f, &phi, &grid)?.field;
        let p1 = project_pphi(&v, &phi)?;
        let p2 = project_pphi(&p1, &phi)?;
        let rel = |a: f64, s: f64| if s > 0.0 { a / s } else { a };
        let projection = rel(p1.sup_distance(&v)?, v.sup_norm());
        let idempotency = rel(p2.sup_distance(&p1)?, p1.sup_norm());
        let orthogonal = match &ortho {
            Some((h0, h1)) => Some(reproducing_residual(&f, h0, &phi, h1, &grid)?),
            None => None,
        };
        for (name, val) in [("reproducing", rep.residual), ("projection", projection), ("idempotency", idempotency)] {
            if val > cfg.tol {
                failures.push(format!("{label}: {name} residual {val:e} exceeds {:e}", cfg.tol));
            }
        }
        if let Some(o) = &orthogonal {
            if o.residual > cfg.tol {
                failures.push(format!("{label}: orthogonal-window residual {:e} exceeds {:e}", o.residual, cfg.tol));
            }
        }
        let _ = writeln!(
            csv,
            "{label},{:e},{projection:e},{idempotency:e},{}",
            rep.residual,
            orthogonal.as_ref().map(|o| format!("{:e}", o.residual)).unwrap_or_default()
        );
        rows.push(json!({
            "function": label,
            "reproducing": rep,
            "projection_residual": projection,
            "idempotency_residual": idempotency,
            "orthogonal": orthogonal,
        }));
    }
    Ok(Outcome { config: to_value(&cfg), result: json!({ "functions": rows }), csv, failures })
}

fn embed_run(cfg: EmbedConfig) -> Result<Outcome> {
    let report = analyze_embedding(&cfg.omega1, &cfg.omega2, &cfg.options)?;
    let mut failures = Vec::new();
    if report.compactness_verdict == CompactnessVerdict::Compact
        && report.continuity_verdict != ContinuityVerdict::Continuous
    {
        failures.push("compact verdict without continuity".into());
    }
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    let csv = String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Outcome { config: to_value(&cfg), result: to_value(&report), csv, failures })
}

fn corollary_run(cfg: CorollaryConfig) -> Result<Outcome> {
    let n = cfg.omega1.dim();
    let basis = match &cfg.lattice {
        Some(v) => OrderedBasis::from_vectors(v)?,
        None => OrderedBasis::standard(n),
    };
    let report = lpq_quotient_criterion(&cfg.omega1, &cfg.omega2, cfg.p0, cfg.q0, &basis, cfg.big_r)?;
    let mut csv = String::from("radius,running_norm\n");
    for (r, v) in report.radii.iter().zip(&report.running_norm) {
        let _ = writeln!(csv, "{r},{v:e}");
    }
    Ok(Outcome { config: to_value(&cfg), result: to_value(&report), csv, failures: vec![] })
}
