use sphmean_core::radial::horospherical_oracle;
use sphmean_core::range::{
    adversarial_sinogram, certify, orthogonality_residuals, support_smoothness_report, Tolerances, Verdict, ORIGIN_ORDERS,
};
use sphmean_core::spectrum::{assemble_basis, SpectralBasis};
use sphmean_core::transform::{forward_sinogram, forward_sinogram_unchecked, ARC_STEP};
use sphmean_core::{BumpKind, Geometry, Phantom, Point, Sinogram};

fn radius(geometry: Geometry) -> f64 {
    if geometry == Geometry::S2 { 0.7 } else { 1.0 }
}

fn basis(geometry: Geometry) -> SpectralBasis {
    assemble_basis(geometry, radius(geometry), 10, 8).unwrap()
}

fn compliant(geometry: Geometry) -> Phantom {
    let r = radius(geometry);
    Phantom::single(BumpKind::GaussianBump, Point::polar(geometry, 0.3 * r, 0.7).unwrap(), 0.1 * r, 1.0).unwrap()
}

/// Pokes through the detector circle.
fn poking(geometry: Geometry) -> Phantom {
    let r = radius(geometry);
    Phantom::single(BumpKind::GaussianBump, Point::polar(geometry, 0.9 * r, 0.7).unwrap(), 0.2 * r, 1.0).unwrap()
}

/// `P_ν(cos r) = ₂F₁(-ν, ν + 1; 1; sin²(r/2))`.
fn legendre_function(nu: f64, r: f64) -> f64 {
    let x = (0.5 * r).sin().powi(2);
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 0..400 {
        let k = k as f64;
        term *= (k - nu) * (k + nu + 1.0) / ((k + 1.0) * (k + 1.0)) * x;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    assert!(n % 2 == 0);
    let mut acc = f[0] + f[n];
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    acc * h / 3.0
}

#[test]
fn zero_sinogram_is_in_range() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let r = radius(geometry);
        let g = Sinogram::zeros(geometry, r, 32, 128, 2.0 * r).unwrap();
        let report = certify(&g, &basis(geometry), 30, &Tolerances::default()).unwrap();
        assert_eq!(report.verdict, Verdict::InRange);
        assert!(report.orthogonality.iter().all(|e| e.residual == 0.0));
        assert!(report.support.support_pass);
        assert!(report.support.origin_pass());
    }
}

#[test]
fn forward_data_certified_in_range() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let r = radius(geometry);
        let g = forward_sinogram(&compliant(geometry), r, 64, 128, 2.0 * r).unwrap();
        let report = certify(&g, &basis(geometry), 30, &Tolerances::default()).unwrap();
        assert_eq!(report.verdict, Verdict::InRange, "{geometry:?}");
        assert!(report.max_normalized_residual <= 1e-3);
        assert!(report.support.support_sup <= 1e-9);
        assert!(report.support.origin_vanishing_orders.iter().all(|&o| o >= ORIGIN_ORDERS));
    }
}

#[test]
fn negative_cases_out_of_range() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let r = radius(geometry);
        let b = basis(geometry);
        let g = forward_sinogram_unchecked(&poking(geometry), r, 64, 128, 2.0 * r, ARC_STEP).unwrap();
        assert_eq!(certify(&g, &b, 30, &Tolerances::default()).unwrap().verdict, Verdict::OutOfRange);
        let g = adversarial_sinogram(&b.entries[0], geometry, r, 64, 128, 2.0 * r).unwrap();
        assert_eq!(certify(&g, &b, 30, &Tolerances::default()).unwrap().verdict, Verdict::OutOfRange);
    }
}

#[test]
fn adversarial_residual_matches_direct_integral() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let r = radius(geometry);
        let b = basis(geometry);
        let entry = &b.entries[0];
        let g = adversarial_sinogram(entry, geometry, r, 64, 256, 2.0 * r).unwrap();
        let got = orthogonality_residuals(&g, &b, 1).unwrap()[0].normalized;

        // The angular factors cancel, leaving
        // ∫ (h w)² χ / (‖h w χ‖ ‖h w‖) over [0, 2R].
        let count = 801;
        let h = 2.0 * r / (count - 1) as f64;
        let (mut a, mut bb, mut c) = (vec![0.0; count], vec![0.0; count], vec![0.0; count]);
        for i in 0..count {
            let s = i as f64 * h;
            let hv = match geometry {
                Geometry::H2 => horospherical_oracle(2, entry.lambda, s, 512).unwrap(),
                Geometry::S2 => legendre_function(entry.lambda, s),
            };
            let hw = hv * geometry.circle_density(s);
            let x = s / (2.0 * r);
            let chi = if x < 1.0 { (1.0 - 1.0 / (1.0 - x * x)).exp() } else { 0.0 };
            a[i] = hw * hw * chi;
            bb[i] = (hw * chi).powi(2);
            c[i] = hw * hw;
        }
        let want = simpson(&a, h) / (simpson(&bb, h) * simpson(&c, h)).sqrt();
        assert!(want >= 0.1, "{want}");
        assert!(got >= 0.1);
        assert!((got - want).abs() <= 2e-3, "{geometry:?}: {got} vs {want}");
    }
}

#[test]
fn residuals_are_linear() {
    let geometry = Geometry::H2;
    let r = radius(geometry);
    let b = basis(geometry);
    let g1 = forward_sinogram(&compliant(geometry), r, 32, 96, 2.0 * r).unwrap();
    let g2 = adversarial_sinogram(&b.entries[3], geometry, r, 32, 96, 2.0 * r).unwrap();
    let (alpha, beta) = (2.5, -0.75);
    let mix = g1.combine(alpha, &g2, beta).unwrap();
    let r1 = orthogonality_residuals(&g1, &b, 40).unwrap();
    let r2 = orthogonality_residuals(&g2, &b, 40).unwrap();
    let rm = orthogonality_residuals(&mix, &b, 40).unwrap();
    let scale = rm.iter().fold(0.0f64, |a, e| a.max(e.residual.abs()));
    for ((a, b), m) in r1.iter().zip(&r2).zip(&rm) {
        assert!((m.residual - alpha * a.residual - beta * b.residual).abs() <= 1e-12 * scale.max(1.0));
    }
}

#[test]
fn jump_flagged_by_radial_decay() {
    let geometry = Geometry::H2;
    let mut g = Sinogram::zeros(geometry, 1.0, 32, 256, 2.0).unwrap();
    for j in 0..32 {
        for k in 0..256 {
            if g.radius(k) > 0.2 && g.radius(k) < 1.0 {
                g.set(j, k, 1.0);
            }
        }
    }
    let tol = Tolerances::default();
    let report = support_smoothness_report(&g, 1.0, ORIGIN_ORDERS, &tol).unwrap();
    let index = report.smoothness.radial_index.unwrap();
    assert!(index < 1.0, "{index}");
    assert!(!report.smoothness_pass(&tol));
    assert_ne!(certify(&g, &basis(geometry), 30, &tol).unwrap().verdict, Verdict::InRange);
}

#[test]
fn verdicts_stable_in_basis_size() {
    for geometry in [Geometry::H2, Geometry::S2] {
        let r = radius(geometry);
        let b = basis(geometry);
        assert!(b.len() >= 60);
        let tol = Tolerances::default();
        let good = forward_sinogram(&compliant(geometry), r, 64, 128, 2.0 * r).unwrap();
        let bad = adversarial_sinogram(&b.entries[0], geometry, r, 64, 128, 2.0 * r).unwrap();
        for g in [&good, &bad] {
            let small = certify(g, &b, 30, &tol).unwrap().verdict;
            let large = certify(g, &b, 60, &tol).unwrap().verdict;
            assert_eq!(small, large);
        }
    }
}

#[test]
fn residuals_do_not_grow_under_refinement() {
    let geometry = Geometry::S2;
    let r = radius(geometry);
    let b = basis(geometry);
    let mut prev = f64::INFINITY;
    for (nt, nr) in [(32, 64), (64, 128), (128, 256)] {
        let g = forward_sinogram(&compliant(geometry), r, nt, nr, 2.0 * r).unwrap();
        let worst = certify(&g, &b, 30, &Tolerances::default()).unwrap().max_normalized_residual;
        assert!(worst <= 1.1 * prev, "{worst} after {prev}");
        prev = worst;
    }
}

#[test]
fn window_and_geometry_checked() {
    let b = basis(Geometry::H2);
    let short = Sinogram::zeros(Geometry::H2, 1.0, 16, 128, 1.5).unwrap();
    assert!(certify(&short, &b, 10, &Tolerances::default()).is_err());
    let other = Sinogram::zeros(Geometry::S2, 1.0, 16, 128, 2.0).unwrap();
    assert!(orthogonality_residuals(&other, &b, 10).is_err());
    let wrong_r = Sinogram::zeros(Geometry::H2, 0.8, 16, 128, 2.0).unwrap();
    assert!(orthogonality_residuals(&wrong_r, &b, 10).is_err());
    let coarse = Sinogram::zeros(Geometry::H2, 1.0, 16, 32, 2.0).unwrap();
    assert!(support_smoothness_report(&coarse, 1.0, 4, &Tolerances::default()).is_err());
}
