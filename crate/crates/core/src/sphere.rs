//! Derivative-free minimization over unit vectors in R³.

use nalgebra::Vector3;
use std::f64::consts::PI;

/// Default number of nodes in the starting grid.
pub const DEFAULT_GRID_NODES: usize = 2000;

/// Angular step at which the local refinement stops.
pub const ANGLE_TOL: f64 = 1e-10;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // π(3 − √5)
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_SWEEPS: usize = 200;

/// Deterministic quasi-uniform spiral of `count` points on the unit sphere.
pub fn golden_spiral(count: usize) -> Vec<Vector3<f64>> {
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = GOLDEN_ANGLE * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

pub fn from_angles(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

pub fn to_angles(v: &Vector3<f64>) -> (f64, f64) {
    let v = v.normalize();
    (v.z.clamp(-1.0, 1.0).acos(), v.y.atan2(v.x))
}

/// Golden-section search for a minimum of `f` on `[a, b]`; stops when the
/// bracket is shorter than `tol`. Returns `(x, f(x))`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Result of a sphere minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereMin {
    pub point: Vector3<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Alternating golden-section refinement in `(θ, φ)` starting from `start`,
/// with initial half-width `radius`. Each sweep halves the bracket until it
/// drops below [`ANGLE_TOL`].
pub fn refine(f: &impl Fn(&Vector3<f64>) -> f64, start: &Vector3<f64>, radius: f64) -> SphereMin {
    let (mut theta, mut phi) = to_angles(start);
    let mut best = f(&from_angles(theta, phi));
    let mut evaluations = 1;
    let mut width = radius;
    for _ in 0..MAX_SWEEPS {
        let counter = std::cell::Cell::new(0usize);
        let g_theta = |t: f64| {
            counter.set(counter.get() + 1);
            f(&from_angles(t, phi))
        };
        let (t, ft) = golden_section(g_theta, theta - width, theta + width, ANGLE_TOL);
        if ft <= best {
            theta = t;
            best = ft;
        }
        // φ is degenerate near the poles; widen it so a sweep still moves.
        let phi_width = (width / theta.sin().abs().max(1e-3)).min(PI);
        let g_phi = |s: f64| {
            counter.set(counter.get() + 1);
            f(&from_angles(theta, s))
        };
        let (s, fs) = golden_section(g_phi, phi - phi_width, phi + phi_width, ANGLE_TOL);
        if fs <= best {
            phi = s;
            best = fs;
        }
        evaluations += counter.get();
        if width < ANGLE_TOL {
            break;
        }
        width *= 0.5;
    }
    SphereMin {
        point: from_angles(theta, phi),
        value: best,
        evaluations,
    }
}

/// Grid search over [`golden_spiral`] nodes followed by [`refine`] from the
/// best few nodes. Ties on the grid resolve to the lowest node index.
pub fn minimize(f: impl Fn(&Vector3<f64>) -> f64 + Sync, nodes: usize, starts: usize) -> SphereMin {
    let grid = golden_spiral(nodes.max(1));
    let mut scored: Vec<(usize, f64)> = grid.iter().map(&f).enumerate().collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    // Mean node spacing on the unit sphere.
    let spacing = (4.0 * PI / nodes.max(1) as f64).sqrt();
    let mut best: Option<SphereMin> = None;
    let mut evaluations = grid.len();
    for &(i, _) in scored.iter().take(starts.max(1)) {
        let r = refine(&f, &grid[i], 2.0 * spacing);
        evaluations += r.evaluations;
        if best.is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let mut best = best.unwrap();
    best.evaluations = evaluations;
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Matrix3;

    #[test]
    fn spiral_is_unit_and_balanced() {
        let pts = golden_spiral(2000);
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
        let centroid: Vector3<f64> = pts.iter().sum::<Vector3<f64>>() / 2000.0;
        assert!(centroid.norm() < 1e-3);
    }

    #[test]
    fn golden_section_parabola() {
        // The minimizer of a quadratic is only resolvable to about √ε.
        let (x, fx) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert_relative_eq!(x, 0.3, epsilon = 1e-7);
        assert_relative_eq!(fx, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn angles_round_trip() {
        let v = Vector3::new(0.3, -0.5, 0.7).normalize();
        let (t, p) = to_angles(&v);
        assert!((from_angles(t, p) - v).norm() < 1e-15);
    }

    #[test]
    fn finds_top_eigenvector_of_quadratic_form() {
        // min of −eᵗAe over the sphere is −λ_max.
        let a = Matrix3::new(0.9, 0.2, 0.1, 0.2, 0.4, -0.3, 0.1, -0.3, 0.7);
        let lmax = a.symmetric_eigenvalues().max();
        let m = minimize(|e| -(e.transpose() * a * e)[0], 2000, 3);
        assert_relative_eq!(m.value, -lmax, epsilon = 1e-13);
    }

    #[test]
    fn optimum_on_pole_and_equator() {
        let z = Matrix3::from_diagonal(&Vector3::new(0.1, 0.2, 1.0));
        let m = minimize(|e| -(e.transpose() * z * e)[0], 2000, 3);
        assert_relative_eq!(m.value, -1.0, epsilon = 1e-14);
        let x = Matrix3::from_diagonal(&Vector3::new(1.0, 0.2, 0.1));
        let m = minimize(|e| -(e.transpose() * x * e)[0], 2000, 3);
        assert_relative_eq!(m.value, -1.0, epsilon = 1e-14);
        assert!(m.point.x.abs() > 1.0 - 1e-7);
    }
}
