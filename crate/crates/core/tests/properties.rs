use std::collections::BTreeMap;

use modspace::format::{grid_function_bytes, read_grid_function};
use modspace::grid::{Axis, GridFunction};
use modspace::hermite::{hermite_analyze, hermite_function};
use modspace::lattice::{mixed_norm_lattice, Exponent, LatticeSequence, MixedNormSpec, OrderedBasis};
use modspace::run::apply_override;
use modspace::stft::{gaussian_window, stft, tf_shift, PhaseGrid};
use modspace::weights::{check_moderate_with_constant, SampleGrid, WeightDescriptor};
use num_complex::Complex64;
use proptest::prelude::*;

fn axes() -> Vec<Axis> {
    GridFunction::cube_axes(1, 0.125, 10.0).unwrap()
}

/// Gaussian packet centred at `(x0, ξ0)` with width `s`.
fn packet(x0: f64, xi0: f64, s: f64, c: Complex64) -> GridFunction {
    GridFunction::from_fn(axes(), move |x| {
        let t = x[0] - x0;
        c * Complex64::from_polar((-t * t / (2.0 * s * s)).exp(), xi0 * x[0])
    })
    .unwrap()
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![1.0..6.0f64, Just(f64::INFINITY)]
}

fn lattice_seq() -> impl Strategy<Value = LatticeSequence> {
    prop::collection::btree_map((-4i64..=4, -4i64..=4).prop_map(|(a, b)| vec![a, b]), complex(), 1..12)
        .prop_map(|m| LatticeSequence::new(OrderedBasis::standard(2), m).unwrap())
}

fn norm(a: &LatticeSequence, p: f64, q: f64) -> f64 {
    let spec = MixedNormSpec::lpq1(1, Exponent::new(p).unwrap(), Exponent::new(q).unwrap()).unwrap();
    mixed_norm_lattice(a, &spec).unwrap()
}

fn add(a: &LatticeSequence, b: &LatticeSequence) -> LatticeSequence {
    let mut m: BTreeMap<Vec<i64>, Complex64> = a.values.clone();
    for (j, v) in &b.values {
        *m.entry(j.clone()).or_default() += v;
    }
    LatticeSequence::new(a.basis.clone(), m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stft_is_linear(
        (x1, k1, s1) in (-2.0..2.0f64, -2.0..2.0f64, 0.7..1.5f64),
        (x2, k2, s2) in (-2.0..2.0f64, -2.0..2.0f64, 0.7..1.5f64),
        a in complex(), b in complex(),
    ) {
        let (f, g) = (packet(x1, k1, s1, Complex64::new(1.0, 0.0)), packet(x2, k2, s2, Complex64::new(1.0, 0.0)));
        let phi = gaussian_window(&axes()).unwrap();
        let grid = PhaseGrid::fft_dual(&axes(), 4, 6.0).unwrap();
        let lhs = stft(&f.combine(a, &g, b).unwrap(), &phi, &grid).unwrap().field;
        let rhs = stft(&f, &phi, &grid).unwrap().field.combine(a, &stft(&g, &phi, &grid).unwrap().field, b).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() <= 1e-13 * (1.0 + lhs.sup_norm()));
    }

    #[test]
    fn stft_is_an_isometry(x0 in -2.0..2.0f64, xi0 in -2.0..2.0f64, s in 0.7..1.5f64, c in complex()) {
        let f = packet(x0, xi0, s, c);
        let phi = gaussian_window(&axes()).unwrap();
        let grid = PhaseGrid::fft_dual(&axes(), 1, 10.0).unwrap();
        let v = stft(&f, &phi, &grid).unwrap().field;
        let want = f.l2_norm() * phi.l2_norm();
        prop_assert!((v.l2_norm() - want).abs() <= 1e-9 * want.max(1e-300));
    }

    #[test]
    fn tf_shift_preserves_norm_inside_the_grid(k in -16i32..=16, xi0 in -3.0..3.0f64) {
        let f = packet(0.0, 0.0, 1.0, Complex64::new(1.0, 0.0));
        let g = tf_shift(&f, &[k as f64 * 0.125], &[xi0]).unwrap();
        prop_assert!((g.l2_norm() - f.l2_norm()).abs() <= 1e-12);
    }

    #[test]
    fn moderate_constant_is_monotone(s in -3.0..3.0f64, extra in 0.0..5.0f64) {
        let w = WeightDescriptor::poly_bracket(s, 2).unwrap();
        let v = WeightDescriptor::poly_bracket(s.abs(), 2).unwrap();
        let sample = SampleGrid::new(3.0, 1.0).unwrap();
        let base = check_moderate_with_constant(&w, &v, &sample, 1.0, 1e-9).unwrap();
        prop_assert!(base.passed);
        prop_assert!(base.best_constant <= 1.0 + 1e-9);
        let looser = check_moderate_with_constant(&w, &v, &sample, 1.0 + extra, 1e-9).unwrap();
        prop_assert!(looser.passed);
        prop_assert_eq!(looser.best_constant, base.best_constant);
        if base.best_constant > 1e-3 {
            let tight = check_moderate_with_constant(&w, &v, &sample, base.best_constant * 0.5, 1e-9).unwrap();
            prop_assert!(!tight.passed);
        }
    }

    #[test]
    fn weight_json_round_trip(s in -3.0..3.0f64, r in 0.1..2.0f64, x in prop::collection::vec(-5.0..5.0f64, 2)) {
        let w = WeightDescriptor::product(
            WeightDescriptor::poly_bracket(s, 2).unwrap(),
            WeightDescriptor::subexp(r, 2.0, 2).unwrap(),
        ).unwrap();
        let back = WeightDescriptor::from_json(&w.to_json()).unwrap();
        prop_assert_eq!(back.eval(&x).unwrap(), w.eval(&x).unwrap());
    }

    #[test]
    fn mixed_norm_is_homogeneous_and_subadditive(a in lattice_seq(), b in lattice_seq(), p in exponent(), q in exponent(), c in complex()) {
        let scaled = LatticeSequence::new(a.basis.clone(), a.values.iter().map(|(j, v)| (j.clone(), v * c)).collect()).unwrap();
        let na = norm(&a, p, q);
        prop_assert!((norm(&scaled, p, q) - c.norm() * na).abs() <= 1e-12 * (1.0 + c.norm() * na));
        let sum = norm(&add(&a, &b), p, q);
        prop_assert!(sum <= (na + norm(&b, p, q)) * (1.0 + 1e-12));
    }

    #[test]
    fn lattice_norms_decrease_in_the_exponent(a in lattice_seq(), p in 1.0..4.0f64, dp in 0.0..4.0f64) {
        prop_assert!(norm(&a, p + dp, p + dp) <= norm(&a, p, p) * (1.0 + 1e-12));
        prop_assert!(norm(&a, f64::INFINITY, f64::INFINITY) <= norm(&a, p, p) * (1.0 + 1e-12));
    }

    #[test]
    fn binary_format_round_trip(x0 in -2.0..2.0f64, xi0 in -2.0..2.0f64, c in complex()) {
        let f = packet(x0, xi0, 1.0, c);
        let back = read_grid_function(&mut grid_function_bytes(&f).as_slice()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn hermite_analysis_recovers_coefficients(c in prop::collection::vec(complex(), 4)) {
        let a = GridFunction::cube_axes(1, 0.125, 8.0).unwrap();
        let mut f = GridFunction::zeros(a.clone()).unwrap();
        for (n, cn) in c.iter().enumerate() {
            f = f.combine(Complex64::new(1.0, 0.0), &hermite_function(&[n], &a).unwrap(), *cn).unwrap();
        }
        let e = hermite_analyze(&f, &[5]).unwrap();
        for (n, cn) in c.iter().enumerate() {
            prop_assert!((e.coeff(&[n]) - cn).norm() <= 1e-9);
        }
        prop_assert!(e.coeff(&[5]).norm() <= 1e-9);
    }

    #[test]
    fn override_sets_the_leaf(key in "[a-z]{1,6}", inner in "[a-z]{1,6}", v in -1e6..1e6f64) {
        let mut cfg = serde_json::json!({"fixed": 1});
        let path = format!("{key}.{inner}");
        apply_override(&mut cfg, &path, &v.to_string()).unwrap();
        prop_assert_eq!(cfg[&key][&inner].as_f64(), Some(v));
    }
}
