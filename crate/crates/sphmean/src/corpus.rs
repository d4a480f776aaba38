//! Reference phantoms for pipeline checks.

use sphmean_core::{Bump, BumpKind, Geometry, Phantom, Point};

fn bump(geometry: Geometry, kind: BumpKind, s: f64, theta: f64, width: f64, amplitude: f64) -> Bump {
    Bump { kind, center: Point::polar(geometry, s, theta).expect("corpus center"), width, amplitude }
}

/// Five phantoms supported well inside the ball of radius `r`.
pub fn compliant(geometry: Geometry, r: f64) -> Vec<Phantom> {
    use BumpKind::{GaussianBump as G, PolynomialBump as P};
    let one = |b: Bump| Phantom::new(geometry, vec![b]).expect("corpus phantom");
    vec![
        one(bump(geometry, G, 0.0, 0.0, 0.2 * r, 1.0)),
        one(bump(geometry, G, 0.3 * r, 0.7, 0.2 * r, 1.0)),
        one(bump(geometry, P, 0.25 * r, 2.0, 0.2 * r, 1.0)),
        Phantom::new(
            geometry,
            vec![bump(geometry, G, 0.3 * r, 0.5, 0.15 * r, 1.0), bump(geometry, G, 0.35 * r, 3.5, 0.15 * r, -0.6)],
        )
        .expect("corpus phantom"),
        one(bump(geometry, P, 0.1 * r, 4.0, 0.25 * r, 1.0)),
    ]
}

/// A bump whose support crosses the detector circle.
pub fn support_violating(geometry: Geometry, r: f64) -> Phantom {
    Phantom::new(geometry, vec![bump(geometry, BumpKind::GaussianBump, 0.9 * r, 0.7, 0.2 * r, 1.0)]).expect("corpus phantom")
}
