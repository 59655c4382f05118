//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use modspace::cauchy::{taylor_from_cauchy, PolyDiscSamples};
use modspace::embedding::{
    analyze_embedding, lpq_quotient_criterion, truncation_spectrum, witness_sequence_test, CompactnessVerdict,
    ContinuityVerdict, EmbeddingOptions, WitnessPath, DEFAULT_K_GRID,
};
use modspace::grid::{Axis, GridFunction};
use modspace::hermite::{bargmann_kernel, bargmann_point, hermite_analyze, hermite_function};
use modspace::lattice::{Exponent, MixedNormSpec, OrderedBasis};
use modspace::stft::{gaussian_window, modulation_norm, stft, stft_point, tf_shift, PhaseGrid};
use modspace::twisted::{project_pphi, reproducing_residual};
use modspace::weights::{certify, compose_closure_suite, SampleGrid, WeightDescriptor, DEFAULT_TOL};
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

type Outcome = Result<(bool, String), modspace::Error>;
type Criterion = (&'static str, fn() -> Outcome);

const C0: f64 = 0.398_942_280_401_432_7; // (2π)^{-1/2}

fn axes(h: f64, l: f64) -> Vec<Axis> {
    GridFunction::cube_axes(1, h, l).unwrap()
}

fn shubin(s: f64) -> WeightDescriptor {
    WeightDescriptor::shubin(s, 2).unwrap()
}

fn sobolev(s: f64) -> WeightDescriptor {
    WeightDescriptor::sobolev(s, 2).unwrap()
}

fn poly(s: f64) -> WeightDescriptor {
    WeightDescriptor::poly_bracket(s, 2).unwrap()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn normalization_residual(h: f64) -> Result<f64, modspace::Error> {
    let phi = gaussian_window(&axes(h, 8.0))?;
    Ok((stft_point(&phi, &phi, &[0.0], &[0.0])? - C0).norm())
}

fn c1() -> Outcome {
    let r = normalization_residual(1.0 / 16.0)?;
    Ok((r <= 1e-6, format!("|V_φφ(0,0) - (2π)^(-1/2)| = {r:.3e} (tol 1e-6)")))
}

fn c2() -> Outcome {
    let h = 1.0 / 16.0;
    let a = axes(h, 12.0);
    let phi = gaussian_window(&a)?;
    let f = hermite_function(&[2], &a)?.combine(
        Complex64::new(1.0, 0.0),
        &hermite_function(&[1], &a)?,
        Complex64::new(0.0, 0.5),
    )?;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x0 = rng.gen_range(-32i32..=32) as f64 * h;
        let xi0 = rng.gen_range(-12i32..=12) as f64 * 0.25;
        let shifted = tf_shift(&f, &[x0], &[xi0])?;
        for _ in 0..5 {
            let y = rng.gen_range(-48i32..=48) as f64 * h;
            let eta = rng.gen_range(-16i32..=16) as f64 * 0.25;
            let lhs = stft_point(&shifted, &phi, &[y], &[eta])?;
            let rhs = Complex64::from_polar(1.0, -x0 * (eta - xi0)) * stft_point(&f, &phi, &[y - x0], &[eta - xi0])?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok((worst <= 1e-10, format!("max covariance residual over 20 shifts = {worst:.3e} (tol 1e-10)")))
}

fn c3() -> Outcome {
    let a = axes(1.0 / 16.0, 10.0);
    let phi = gaussian_window(&a)?;
    let grid = PhaseGrid::fft_dual(&a, 2, 10.0)?;
    let spec = MixedNormSpec::lpq1(1, Exponent::new(2.0)?, Exponent::new(2.0)?)?;
    let one = WeightDescriptor::constant(1.0, 2)?;
    let mut worst = 0.0f64;
    for n in 0..=6 {
        let f = hermite_function(&[n], &a)?;
        let m = modulation_norm(&f, &one, &spec, &phi, &grid)?;
        worst = worst.max((m - f.l2_norm()).abs());
    }
    Ok((worst <= 1e-4, format!("max |‖V_φh_n‖ - ‖h_n‖|, n ≤ 6 = {worst:.3e} (tol 1e-4)")))
}

fn twisted_setup(x_stride: usize, xi_step: Option<f64>) -> Result<(Vec<Axis>, GridFunction, PhaseGrid), modspace::Error> {
    let a = axes(0.125, 12.0);
    let phi = gaussian_window(&a)?;
    let grid = match xi_step {
        Some(s) => PhaseGrid::with_xi_step(&a, x_stride, s, 12.0)?,
        None => PhaseGrid::fft_dual(&a, x_stride, 12.0)?,
    };
    Ok((a, phi, grid))
}

fn reproducing_worst(x_stride: usize, xi_step: Option<f64>) -> Result<f64, modspace::Error> {
    let (a, phi, grid) = twisted_setup(x_stride, xi_step)?;
    let mut worst = 0.0f64;
    for n in 0..=2 {
        let f = hermite_function(&[n], &a)?;
        worst = worst.max(reproducing_residual(&f, &phi, &phi, &phi, &grid)?.residual);
    }
    Ok(worst)
}

fn c4() -> Outcome {
    let worst = reproducing_worst(2, None)?;
    let (a, phi, grid) = twisted_setup(2, None)?;
    let (h0, h1) = (hermite_function(&[0], &a)?, hermite_function(&[1], &a)?);
    let mut ortho = 0.0f64;
    for n in 0..=2 {
        let f = hermite_function(&[n], &a)?;
        let r = reproducing_residual(&f, &h0, &phi, &h1, &grid)?;
        ortho = ortho.max(if r.relative { f64::INFINITY } else { r.residual });
    }
    Ok((
        worst <= 1e-4 && ortho <= 1e-4,
        format!("reproducing residual = {worst:.3e}, orthogonal-window right side = {ortho:.3e} (tol 1e-4)"),
    ))
}

/// Range-fixing residual and, with `twice`, the double-application residual.
fn projection_worst(x_stride: usize, xi_step: Option<f64>, twice: bool) -> Result<(f64, f64), modspace::Error> {
    let (a, phi, grid) = twisted_setup(x_stride, xi_step)?;
    let (mut fix, mut idem) = (0.0f64, 0.0f64);
    for n in 0..=6 {
        let v = stft(&hermite_function(&[n], &a)?, &phi, &grid)?.field;
        let p1 = project_pphi(&v, &phi)?;
        fix = fix.max(p1.sup_distance(&v)? / v.sup_norm());
        if twice {
            let p2 = project_pphi(&p1, &phi)?;
            idem = idem.max(p2.sup_distance(&p1)? / p1.sup_norm());
        }
    }
    Ok((fix, idem))
}

fn c5() -> Outcome {
    let (fix, idem) = projection_worst(2, None, true)?;
    Ok((
        fix <= 1e-4 && idem <= 1e-4,
        format!("range fixing = {fix:.3e}, double application = {idem:.3e} (tol 1e-4, relative sup)"),
    ))
}

fn c6() -> Outcome {
    let a = axes(1.0 / 16.0, 10.0);
    let s = 2f64.sqrt();
    let xs = [0.0, 0.25 / s, 0.5 / s, 1.0 / s, 1.5 / s, s, 2.75 / s];
    let xis = [0.0, 0.4, -0.9, 1.3, -1.6, 2.0];
    let (mut worst, mut count) = (0.0f64, 0);
    for n in 0..=6 {
        let h = hermite_function(&[n], &a)?;
        for &x in &xs {
            for &xi in &xis {
                let z = Complex64::new(x, xi);
                if z.norm() > 2.0 + 1e-12 {
                    continue;
                }
                let via_stft = bargmann_point(&h, &[x], &[xi])?.value.unwrap_or(Complex64::new(f64::NAN, 0.0));
                let via_kernel = bargmann_kernel(&h, &[z])?;
                let d = (via_stft - via_kernel).norm();
                worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
                count += 1;
            }
        }
    }
    Ok((worst <= 1e-5, format!("max two-path difference over {count} (α, z) pairs = {worst:.3e} (tol 1e-5)")))
}

fn c7() -> Outcome {
    let f = PolyDiscSamples::from_fn(1, 1.0, 64, |z| z[0].exp())?;
    let t = taylor_from_cauchy(&f, 8, None)?;
    let coeff_err = (0..=8).map(|n| (t.coeffs[&vec![n]] - 1.0 / factorial(n)).norm()).fold(0.0, f64::max);
    let a = axes(0.125, 8.0);
    let e = hermite_analyze(&hermite_function(&[3], &a)?, &[7])?;
    let inner = PolyDiscSamples::try_from_fn(1, 1.0, 64, |z| e.bargmann(z))?;
    let outer = PolyDiscSamples::try_from_fn(1, 2.0, 64, |z| e.bargmann(z))?;
    // An exceeded bound surfaces as an assertion error.
    let bound = taylor_from_cauchy(&inner, 12, Some(&outer));
    let ratio = bound.as_ref().ok().and_then(|b| b.worst_bound_ratio);
    Ok((
        coeff_err <= 1e-10 && bound.is_ok(),
        format!(
            "e^z coefficient error = {coeff_err:.3e} (tol 1e-10); h_3 bound {} (worst |a|(2R)^|α|/C_R = {})",
            if bound.is_ok() { "holds" } else { "violated" },
            ratio.map_or("n/a".into(), |r| format!("{r:.3}"))
        ),
    ))
}

fn c8() -> Outcome {
    let opts = EmbeddingOptions::default();
    let cases = [
        ("shubin(2,1)", shubin(2.0), shubin(1.0), ContinuityVerdict::Continuous, CompactnessVerdict::Compact),
        ("shubin(3,0.5)", shubin(3.0), shubin(0.5), ContinuityVerdict::Continuous, CompactnessVerdict::Compact),
        ("sobolev(2,1)", sobolev(2.0), sobolev(1.0), ContinuityVerdict::Continuous, CompactnessVerdict::NotCompact),
        ("equal", shubin(1.0), shubin(1.0), ContinuityVerdict::Continuous, CompactnessVerdict::NotCompact),
        ("shubin(1,2)", shubin(1.0), shubin(2.0), ContinuityVerdict::NotContinuous, CompactnessVerdict::NotCompact),
    ];
    let mut bad = Vec::new();
    for (name, w1, w2, cont, comp) in cases {
        let r = analyze_embedding(&w1, &w2, &opts)?;
        if !r.channels.agree || r.continuity_verdict != cont || r.compactness_verdict != comp {
            bad.push(format!("{name}: {:?}/{:?} agree={}", r.continuity_verdict, r.compactness_verdict, r.channels.agree));
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "5 cells match, channels agree on each".into() } else { bad.join("; ") }))
}

fn c9() -> Outcome {
    let t = truncation_spectrum(&shubin(2.0), &shubin(1.0), &OrderedBasis::standard(2), &[4.0, 8.0, 16.0])?;
    let factors: Vec<f64> = t.levels.iter().map(|l| l.tail_max * (1.0 + l.radius)).collect();
    let ok = factors.iter().all(|&f| (0.5..=2.0).contains(&f));
    Ok((ok, format!("tail·(1+R) at R = 4, 8, 16: {factors:.3?} (within [0.5, 2])")))
}

fn c10() -> Outcome {
    let phi = gaussian_window(&axes(1.0 / 16.0, 8.0))?;
    let radii = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let mut worst = 0.0f64;
    let mut checks = 0;
    for (w1, w2) in [(shubin(2.0), shubin(1.0)), (shubin(1.0), shubin(2.0)), (sobolev(2.0), sobolev(1.0))] {
        for path in WitnessPath::standard(2, &radii)? {
            let tr = witness_sequence_test(&w1, &w2, &path, &phi, DEFAULT_K_GRID)?;
            checks += tr.grid_checks.len();
            worst = worst.max(tr.max_grid_error);
        }
    }
    Ok((
        worst <= 1e-5 && checks == 27,
        format!("{checks} grid checks, max relative error = {worst:.3e} (tol 1e-5)"),
    ))
}

fn c11() -> Outcome {
    let b = OrderedBasis::standard(2);
    let one = WeightDescriptor::constant(1.0, 2)?;
    let compact = lpq_quotient_criterion(&one, &poly(-3.0), 1.0, 1.0, &b, 64.0)?;
    let constant = lpq_quotient_criterion(&one, &one, 1.0, 1.0, &b, 64.0)?;
    Ok((
        compact.verdict == CompactnessVerdict::Compact && constant.verdict == CompactnessVerdict::Inconclusive,
        format!("poly_bracket(-3): {:?}; constant: {:?}", compact.verdict, constant.verdict),
    ))
}

fn c12() -> Outcome {
    let sample = SampleGrid::new(4.0, 0.5)?;
    let exps = [-2.0, -1.0, 1.0, 2.0];
    let certified: Vec<_> = exps
        .iter()
        .map(|&s| certify(&poly(s), &poly(s.abs()), &sample, 1.0, DEFAULT_TOL))
        .collect::<Result<_, _>>()?;
    let mut failed = Vec::new();
    let mut total = 0;
    for (i, c1) in certified.iter().enumerate() {
        for (j, c2) in certified.iter().enumerate() {
            for a in [-1.5, 0.5, 2.0] {
                for (k, (_, cert)) in compose_closure_suite(c1, c2, a)?.iter().enumerate() {
                    total += 1;
                    if !cert.passed {
                        failed.push(format!("({}, {}, a={a}) op {k}", exps[i], exps[j]));
                    }
                }
            }
        }
    }
    Ok((
        failed.is_empty(),
        if failed.is_empty() { format!("{total} certificates pass") } else { format!("failed: {}", failed.join(", ")) },
    ))
}

fn c13() -> Outcome {
    let n = (normalization_residual(1.0)?, normalization_residual(0.5)?);
    let r = (reproducing_worst(8, Some(1.0))?, reproducing_worst(4, Some(0.5))?);
    let p = (projection_worst(8, Some(1.0), false)?.0, projection_worst(4, Some(0.5), false)?.0);
    let ok = [n, r, p].iter().all(|&(c, f)| f * 2.0 <= c);
    Ok((
        ok,
        format!(
            "criterion 1 (h 1 → 1/2): {:.2e} → {:.2e}; criterion 4 (phase step 1 → 1/2): {:.2e} → {:.2e}; criterion 5 range fixing: {:.2e} → {:.2e}",
            n.0, n.1, r.0, r.1, p.0, p.1
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("STFT normalization", c1),
        ("covariance identity", c2),
        ("Moyal isometry", c3),
        ("reproducing formula", c4),
        ("projection range and idempotency", c5),
        ("Bargmann two-path consistency", c6),
        ("Cauchy-Taylor coefficients and bound", c7),
        ("embedding verdict matrix", c8),
        ("Shubin tail law", c9),
        ("witness identity", c10),
        ("lpq corollary", c11),
        ("weight closure", c12),
        ("refinement convergence", c13),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
