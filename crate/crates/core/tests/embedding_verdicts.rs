use std::f64::consts::PI;

use modspace::embedding::{
    analyze_embedding, compactness_certificate, continuity_certificate, lpq_quotient_criterion, minfty_lower_bound,
    truncation_spectrum, witness_function, witness_sequence_test, CompactnessVerdict, ContinuityVerdict,
    EmbeddingOptions, WitnessPath, WitnessVerdict,
};
use modspace::grid::GridFunction;
use modspace::lattice::OrderedBasis;
use modspace::stft::{gaussian_window, PhaseGrid};
use modspace::weights::WeightDescriptor;

const RADII: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

fn shubin(s: f64) -> WeightDescriptor {
    WeightDescriptor::shubin(s, 2).unwrap()
}

fn sobolev(s: f64) -> WeightDescriptor {
    WeightDescriptor::sobolev(s, 2).unwrap()
}

fn window() -> GridFunction {
    gaussian_window(&GridFunction::cube_axes(1, 1.0 / 16.0, 8.0).unwrap()).unwrap()
}

#[test]
fn continuity_examples() {
    let (sup, v) = continuity_certificate(&shubin(2.0), &shubin(2.0), &RADII, 64).unwrap();
    assert!((sup - 1.0).abs() < 1e-12);
    assert_eq!(v, ContinuityVerdict::Continuous);
    let (_, v) = continuity_certificate(&shubin(2.0), &shubin(3.0), &RADII, 64).unwrap();
    assert_eq!(v, ContinuityVerdict::NotContinuous);
    for t in [0.5, 1.0, 2.5] {
        let (sup, v) = continuity_certificate(&shubin(3.0), &shubin(3.0 - t), &RADII, 64).unwrap();
        assert!((sup - 1.0).abs() < 1e-12);
        assert_eq!(v, ContinuityVerdict::Continuous);
    }
}

#[test]
fn compactness_examples() {
    let q = compactness_certificate(&shubin(2.0), &shubin(1.0), &RADII, 64).unwrap();
    assert_eq!(q.compactness_verdict, CompactnessVerdict::Compact);
    let q = compactness_certificate(&sobolev(2.0), &sobolev(1.0), &RADII, 64).unwrap();
    assert_eq!(q.compactness_verdict, CompactnessVerdict::NotCompact);
    assert_eq!(q.continuity_verdict, ContinuityVerdict::Continuous);
    let q = compactness_certificate(&shubin(1.0), &shubin(1.0), &RADII, 64).unwrap();
    assert_eq!(q.compactness_verdict, CompactnessVerdict::NotCompact);
}

#[test]
fn truncation_examples() {
    let b = OrderedBasis::standard(2);
    let t = truncation_spectrum(&shubin(2.0), &shubin(2.0), &b, &RADII).unwrap();
    assert!(t.levels.iter().all(|l| l.tail_max == 1.0 && l.ratios.iter().all(|&r| r == 1.0)));

    let t = truncation_spectrum(&shubin(2.0), &shubin(1.0), &b, &[4.0, 8.0, 16.0]).unwrap();
    for l in &t.levels {
        let law = 1.0 / (1.0 + l.radius);
        assert!(l.tail_max <= 2.0 * law && l.tail_max >= 0.5 * law, "R={} tail={}", l.radius, l.tail_max);
        assert!(l.ratios.windows(2).all(|w| w[0] >= w[1]));
    }

    let t = truncation_spectrum(&sobolev(2.0), &sobolev(1.0), &b, &RADII).unwrap();
    assert!(t.levels.iter().all(|l| (l.tail_max - 1.0).abs() < 1e-15));
}

/// Brute-force oracle for the Shubin tail: the smallest `|x| + |ξ|` over
/// integer points outside the ball.
#[test]
fn shubin_tail_matches_brute_force() {
    let b = OrderedBasis::standard(2);
    let t = truncation_spectrum(&shubin(2.0), &shubin(1.0), &b, &[4.0, 8.0, 16.0]).unwrap();
    for l in &t.levels {
        let r = l.radius;
        let mut best = f64::INFINITY;
        let m = (2.0 * 16.0) as i64;
        for i in -m..=m {
            for j in -m..=m {
                let (x, y) = (i as f64, j as f64);
                let n = (x * x + y * y).sqrt();
                if n > r && n <= 32.0 {
                    best = best.min(x.abs() + y.abs());
                }
            }
        }
        assert!((l.tail_max - 1.0 / (1.0 + best)).abs() < 1e-14);
    }
}

#[test]
fn witness_examples() {
    let phi = window();
    let c = (2.0 * PI).powf(-0.5);
    let path = WitnessPath::axis("x_axis", 2, 0, &RADII).unwrap();

    let tr = witness_sequence_test(&sobolev(2.0), &sobolev(1.0), &path, &phi, 3).unwrap();
    assert!(tr.ratios.iter().all(|r| (r - c).abs() < 1e-15));
    assert_eq!(tr.verdict, WitnessVerdict::NonCompactnessWitnessed);

    let tr = witness_sequence_test(&shubin(2.0), &shubin(1.0), &path, &phi, 3).unwrap();
    for (r, k) in tr.ratios.iter().zip(RADII) {
        assert!((r - c / (1.0 + k)).abs() < 1e-15);
    }
    assert_eq!(tr.verdict, WitnessVerdict::NoObstruction);

    let tr = witness_sequence_test(&shubin(1.0), &shubin(2.0), &path, &phi, 3).unwrap();
    assert_eq!(tr.verdict, WitnessVerdict::NonContinuityWitnessed);
    assert_eq!(tr.grid_checks.len(), 3);
    assert!(tr.max_grid_error <= 1e-5);

    let off = WitnessPath::new("off", vec![vec![0.01, 0.0], vec![1.0, 0.0]]).unwrap();
    assert!(witness_sequence_test(&shubin(1.0), &shubin(2.0), &off, &phi, 3).is_err());
}

#[test]
fn minfty_examples() {
    let phi = window();
    let a = phi.axes().to_vec();
    let grid = PhaseGrid::fft_dual(&a, 16, 4.0).unwrap();
    let one = WeightDescriptor::constant(1.0, 2).unwrap();
    let zero = GridFunction::zeros(a.clone()).unwrap();
    assert_eq!(minfty_lower_bound(&zero, &one, &phi, &grid).unwrap(), 0.0);
    let m = minfty_lower_bound(&phi, &one, &phi, &grid).unwrap();
    assert!((m - (2.0 * PI).powf(-0.5)).abs() < 1e-5);

    let (w1, w2) = (shubin(2.0), shubin(1.0));
    let xk = vec![2.0, 0.0];
    let fk = witness_function(&w1, &phi, &xk).unwrap();
    let m = minfty_lower_bound(&fk, &w2, &phi, &grid).unwrap();
    let want = (2.0 * PI).powf(-0.5) * w2.eval(&xk).unwrap() / w1.eval(&xk).unwrap();
    assert!(m >= want * (1.0 - 1e-9));
}

#[test]
fn corollary_examples() {
    let b = OrderedBasis::standard(2);
    let one = WeightDescriptor::constant(1.0, 2).unwrap();
    let r = lpq_quotient_criterion(&one, &WeightDescriptor::poly_bracket(-3.0, 2).unwrap(), 1.0, 1.0, &b, 64.0).unwrap();
    assert_eq!(r.verdict, CompactnessVerdict::Compact, "{r:?}");
    // ∫(1+r)^{-3} 2πr dr = π.
    assert!((r.running_norm.last().unwrap() - PI).abs() < 0.25 * PI);

    let r = lpq_quotient_criterion(&one, &one, 1.0, 1.0, &b, 64.0).unwrap();
    assert_eq!(r.verdict, CompactnessVerdict::Inconclusive);

    let r = lpq_quotient_criterion(&one, &WeightDescriptor::poly_bracket(-1.0, 2).unwrap(), 2.0, 2.0, &b, 64.0).unwrap();
    assert_eq!(r.verdict, CompactnessVerdict::Inconclusive, "{r:?}");
}

#[test]
fn verdict_matrix_channels_agree() {
    let opts = EmbeddingOptions::default();
    let cases = [
        (shubin(2.0), shubin(1.0), ContinuityVerdict::Continuous, CompactnessVerdict::Compact),
        (shubin(3.0), shubin(0.5), ContinuityVerdict::Continuous, CompactnessVerdict::Compact),
        (sobolev(2.0), sobolev(1.0), ContinuityVerdict::Continuous, CompactnessVerdict::NotCompact),
        (shubin(1.0), shubin(1.0), ContinuityVerdict::Continuous, CompactnessVerdict::NotCompact),
        (shubin(1.0), shubin(2.0), ContinuityVerdict::NotContinuous, CompactnessVerdict::NotCompact),
    ];
    for (w1, w2, cont, comp) in cases {
        let r = analyze_embedding(&w1, &w2, &opts).unwrap();
        assert!(r.channels.agree, "{:?}", r.channels);
        assert_eq!(r.continuity_verdict, cont);
        assert_eq!(r.compactness_verdict, comp);
        if r.compactness_verdict == CompactnessVerdict::Compact {
            assert_eq!(r.continuity_verdict, ContinuityVerdict::Continuous);
        }
        let back = analyze_embedding(&w2, &w1, &opts).unwrap();
        assert!(!(r.compactness_verdict == CompactnessVerdict::Compact && back.compactness_verdict == CompactnessVerdict::Compact));
    }
}

#[test]
fn report_csv_has_one_row_per_radius() {
    let r = analyze_embedding(&shubin(2.0), &shubin(1.0), &EmbeddingOptions::default()).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + RADII.len());
    assert!(lines[0].starts_with("radius,annulus_sup,tail_max,x_axis_norm,x_axis_ratio"));
}
