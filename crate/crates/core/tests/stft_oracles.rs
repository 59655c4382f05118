use std::f64::consts::PI;

use modspace::grid::{Axis, GridFunction};
use modspace::lattice::{Exponent, MixedNormSpec};
use modspace::stft::{
    gaussian_window, gs_decay_fit, modulation_norm, stft, stft_point, tf_shift, uses_fft, DecayFitOptions,
    PhaseGrid,
};
use modspace::weights::WeightDescriptor;
use num_complex::Complex64;

fn axes(h: f64, l: f64) -> Vec<Axis> {
    GridFunction::cube_axes(1, h, l).unwrap()
}

/// Composite Simpson rule on [-l, l] with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> Complex64, l: f64, n: usize) -> Complex64 {
    let h = 2.0 * l / n as f64;
    let mut s = f(-l) + f(l);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += f(-l + i as f64 * h) * w;
    }
    s * h / 3.0
}

fn gaussian(x: f64) -> f64 {
    PI.powf(-0.25) * (-0.5 * x * x).exp()
}

#[test]
fn window_has_unit_norm() {
    let phi = gaussian_window(&axes(1.0 / 16.0, 8.0)).unwrap();
    assert!((phi.l2_norm() - 1.0).abs() < 1e-8);
}

#[test]
fn gaussian_stft_matches_quadrature_oracle() {
    let a = axes(1.0 / 16.0, 8.0);
    let phi = gaussian_window(&a).unwrap();
    let v00 = stft_point(&phi, &phi, &[0.0], &[0.0]).unwrap();
    assert!((v00 - Complex64::new((2.0 * PI).powf(-0.5), 0.0)).norm() < 1e-6);

    let oracle = simpson(
        |y| Complex64::from_polar(gaussian(y) * gaussian(y - 1.0) / (2.0 * PI).sqrt(), -y),
        12.0,
        24000,
    );
    let v11 = stft_point(&phi, &phi, &[1.0], &[1.0]).unwrap();
    assert!((v11 - oracle).norm() < 1e-6);
    assert!((v11.norm() - (2.0 * PI).powf(-0.5) * (-0.5f64).exp()).abs() < 1e-6);
}

#[test]
fn fft_field_contains_oracle_values() {
    let a = axes(1.0 / 16.0, 8.0);
    let phi = gaussian_window(&a).unwrap();
    let grid = PhaseGrid::fft_dual(&a, 16, 6.0).unwrap();
    assert!(uses_fft(&a, &grid).unwrap());
    let v = stft(&phi, &phi, &grid).unwrap();
    for (idx, z) in v.samples().indexed_iter() {
        let (x, xi) = (grid.x_axes[0].point(idx[0]), grid.xi_axes[0].point(idx[1]));
        let exact = (2.0 * PI).powf(-0.5) * (-(x * x + xi * xi) / 4.0).exp();
        assert!((z.norm() - exact).abs() < 1e-6, "({x}, {xi})");
    }
}

#[test]
fn crude_sup_bound_holds() {
    let a = axes(0.125, 8.0);
    let phi = gaussian_window(&a).unwrap();
    let f = GridFunction::from_fn(a.clone(), |x| Complex64::new((-x[0].abs()).exp(), (x[0] * 3.0).cos() * 0.2)).unwrap();
    let v = stft(&f, &phi, &PhaseGrid::fft_dual(&a, 4, 8.0).unwrap()).unwrap();
    let bound = f.l1_norm() * phi.sup_norm() / (2.0 * PI).sqrt();
    assert!(v.field.sup_norm() <= bound * (1.0 + 1e-12));
}

#[test]
fn covariance_identity() {
    let a = axes(1.0 / 16.0, 8.0);
    let phi = gaussian_window(&a).unwrap();
    let f = GridFunction::from_fn(a.clone(), |x| Complex64::new((-(x[0] + 0.5).powi(2)).exp(), 0.0)).unwrap();
    let (x0, xi0) = (1.0, 2.0);
    let shifted = tf_shift(&f, &[x0], &[xi0]).unwrap();
    let mut worst = 0.0f64;
    for &y in &[-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0] {
        for &eta in &[-1.5, 0.0, 1.0, 2.0, 2.5, 4.0] {
            let lhs = stft_point(&shifted, &phi, &[y], &[eta]).unwrap();
            let rhs = Complex64::from_polar(1.0, -x0 * (eta - xi0))
                * stft_point(&f, &phi, &[y - x0], &[eta - xi0]).unwrap();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn tf_shift_trivial_cases() {
    let a = axes(0.25, 6.0);
    let f = GridFunction::from_fn(a.clone(), |x| Complex64::new(x[0].sin(), x[0].cos())).unwrap();
    assert_eq!(tf_shift(&f, &[0.0], &[0.0]).unwrap(), f);
    let g = tf_shift(&f, &[1.0], &[3.0]).unwrap();
    for i in 4..a[0].len() {
        assert!((g.samples()[[i]].norm() - f.samples()[[i - 4]].norm()).abs() < 1e-14);
    }
}

#[test]
fn modulation_norm_isometry_and_monotonicity() {
    let a = axes(0.125, 8.0);
    let phi = gaussian_window(&a).unwrap();
    let grid = PhaseGrid::fft_dual(&a, 1, 8.0).unwrap();
    let spec = MixedNormSpec::lpq1(1, Exponent::new(2.0).unwrap(), Exponent::new(2.0).unwrap()).unwrap();
    let one = WeightDescriptor::constant(1.0, 2).unwrap();
    let n = modulation_norm(&phi, &one, &spec, &phi, &grid).unwrap();
    assert!((n - 1.0).abs() < 1e-4, "{n}");

    let zero = GridFunction::zeros(a.clone()).unwrap();
    assert_eq!(modulation_norm(&zero, &one, &spec, &phi, &grid).unwrap(), 0.0);

    let w1 = WeightDescriptor::poly_bracket(2.0, 2).unwrap();
    let w2 = WeightDescriptor::poly_bracket(1.0, 2).unwrap();
    let coarse = PhaseGrid::fft_dual(&a, 4, 8.0).unwrap();
    let n1 = modulation_norm(&phi, &w1, &spec, &phi, &coarse).unwrap();
    let n2 = modulation_norm(&phi, &w2, &spec, &phi, &coarse).unwrap();
    assert!(n2 <= n1);
}

#[test]
fn gaussian_decay_fit() {
    let a = axes(0.125, 8.0);
    let phi = gaussian_window(&a).unwrap();
    let v = stft(&phi, &phi, &PhaseGrid::fft_dual(&a, 2, 8.0).unwrap()).unwrap();
    let fit = gs_decay_fit(&v.field, 0.5, 0.5, &DecayFitOptions::default()).unwrap();
    assert!(fit.fitted_r >= 0.2, "{fit:?}");
    assert!(fit.fitted_r < 0.35, "{fit:?}");
}

#[test]
fn linearity() {
    let a = axes(0.125, 6.0);
    let phi = gaussian_window(&a).unwrap();
    let f = GridFunction::from_fn(a.clone(), |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
    let g = GridFunction::from_fn(a.clone(), |x| Complex64::new(0.0, x[0] * (-x[0] * x[0]).exp())).unwrap();
    let (al, be) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
    let grid = PhaseGrid::fft_dual(&a, 2, 6.0).unwrap();
    let lhs = stft(&f.combine(al, &g, be).unwrap(), &phi, &grid).unwrap().field;
    let rhs = stft(&f, &phi, &grid).unwrap().field.combine(al, &stft(&g, &phi, &grid).unwrap().field, be).unwrap();
    assert!(lhs.sup_distance(&rhs).unwrap() < 1e-12);
}

#[test]
fn two_dimensional_isometry() {
    let a = GridFunction::cube_axes(2, 0.25, 6.0).unwrap();
    let phi = gaussian_window(&a).unwrap();
    let f = GridFunction::from_fn(a.clone(), |x| {
        Complex64::new((-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 2.0).exp() * (1.0 + x[0]), 0.0)
    })
    .unwrap();
    let v = stft(&f, &phi, &PhaseGrid::fft_dual(&a, 1, 6.0).unwrap()).unwrap();
    let rel = (v.field.l2_norm() - f.l2_norm() * phi.l2_norm()).abs() / f.l2_norm();
    assert!(rel < 1e-5, "{rel}");
}
