//! Symmetric 3×3 eigenproblems.
//!
//! [`closed_form_eigenvalues`] uses the trigonometric solution of the
//! characteristic cubic. Its absolute error is `O(ε‖A‖)`, which is poor in
//! relative terms for small eigenvalues, so [`symmetric_eigen`] polishes with
//! cyclic Jacobi rotations. Jacobi keeps high relative accuracy when the
//! input is close to diagonal, which is the case for every cat-state `K`.

use nalgebra::{Matrix3, Vector3};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix, descending, from the characteristic cubic.
pub fn closed_form_eigenvalues(a: &Matrix3<f64>) -> [f64; 3] {
    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let q = a.trace() / 3.0;
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
    if p2 == 0.0 {
        return [q, q, q];
    }
    let p = (p2 / 6.0).sqrt();
    let b = (a - Matrix3::identity() * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = 3.0 * q - hi - lo;
    [hi, mid, lo]
}

/// Eigenpairs of a symmetric 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen3 {
    /// Eigenvalues in axis order: `values[i]` belongs to `vectors.column(i)`.
    pub values: [f64; 3],
    pub vectors: Matrix3<f64>,
}

impl Eigen3 {
    /// Eigenvalues sorted in descending order.
    pub fn sorted_values(&self) -> [f64; 3] {
        let mut v = self.values;
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unit eigenvector of the largest eigenvalue.
    ///
    /// Among eigenvalues within `tie_tol · max(1, |λ_max|)` of the largest, the
    /// one whose eigenvector leans most on the highest axis wins (z before y
    /// before x). The sign is fixed so the dominant component is positive.
    pub fn top_vector(&self, tie_tol: f64) -> Vector3<f64> {
        let max = self.max_value();
        let slack = tie_tol * max.abs().max(1.0);
        let dominant_axis = |c: usize| {
            let v = self.vectors.column(c);
            (0..3)
                .max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()).then(i.cmp(&j)))
                .unwrap()
        };
        let best = (0..3)
            .filter(|&c| self.values[c] >= max - slack)
            .max_by_key(|&c| dominant_axis(c))
            .unwrap();
        let mut v: Vector3<f64> = self.vectors.column(best).into();
        let axis = dominant_axis(best);
        if v[axis] < 0.0 {
            v = -v;
        }
        v.normalize()
    }
}

/// Cyclic Jacobi diagonalization.
pub fn symmetric_eigen(a: &Matrix3<f64>) -> Eigen3 {
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = Matrix3::identity();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = m[(p, q)];
            // Negligible relative to the geometric mean of its diagonal pair.
            if apq.abs() <= 1e-3 * f64::EPSILON * (m[(p, p)] * m[(q, q)]).abs().sqrt()
                || apq.abs() < f64::MIN_POSITIVE
            {
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                continue;
            }
            rotated = true;
            let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Matrix3::identity();
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = s;
            rot[(q, p)] = -s;
            m = rot.transpose() * m * rot;
            m[(p, q)] = 0.0;
            m[(q, p)] = 0.0;
            v *= rot;
        }
        if !rotated {
            break;
        }
    }
    Eigen3 {
        values: [m[(0, 0)], m[(1, 1)], m[(2, 2)]],
        vectors: v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_keeps_axis_order() {
        let a = Matrix3::from_diagonal(&Vector3::new(144.0, 9.0, 164.0));
        let e = symmetric_eigen(&a);
        assert_eq!(e.values, [144.0, 9.0, 164.0]);
        assert_eq!(e.top_vector(1e-12), Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(closed_form_eigenvalues(&a), [164.0, 144.0, 9.0]);
    }

    #[test]
    fn tie_prefers_z_axis() {
        let a = Matrix3::from_diagonal(&Vector3::new(0.5, 0.1, 0.5));
        assert_eq!(symmetric_eigen(&a).top_vector(1e-12), Vector3::new(0.0, 0.0, 1.0));
        let a = Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 0.1));
        assert_eq!(symmetric_eigen(&a).top_vector(1e-12), Vector3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn tiny_eigenvalue_keeps_relative_accuracy() {
        let a = Matrix3::from_diagonal(&Vector3::new(1.0, 3.7e-9, 0.25));
        let e = symmetric_eigen(&a);
        assert_eq!(e.values[1], 3.7e-9);
    }

    #[test]
    fn degenerate_scalar_matrix() {
        let a = Matrix3::identity() * 2.0;
        assert_eq!(closed_form_eigenvalues(&a), [2.0, 2.0, 2.0]);
        assert_eq!(symmetric_eigen(&a).values, [2.0, 2.0, 2.0]);
    }

    fn sym_strategy() -> impl Strategy<Value = Matrix3<f64>> {
        proptest::array::uniform6(-2.0f64..2.0).prop_map(|x| {
            Matrix3::new(x[0], x[3], x[4], x[3], x[1], x[5], x[4], x[5], x[2])
        })
    }

    proptest! {
        #[test]
        fn jacobi_diagonalizes(a in sym_strategy()) {
            let e = symmetric_eigen(&a);
            let d = Matrix3::from_diagonal(&Vector3::from(e.values));
            let back = e.vectors * d * e.vectors.transpose();
            prop_assert!((back - a).abs().max() < 1e-12);
            prop_assert!((e.vectors.transpose() * e.vectors - Matrix3::identity()).abs().max() < 1e-13);
        }

        #[test]
        fn closed_form_agrees_with_jacobi(a in sym_strategy()) {
            let closed = closed_form_eigenvalues(&a);
            let jac = symmetric_eigen(&a).sorted_values();
            for (c, j) in closed.iter().zip(jac) {
                prop_assert!((c - j).abs() < 1e-12 * a.abs().max().max(1.0));
            }
        }

        #[test]
        fn top_vector_is_unit_and_maximizes_form(a in sym_strategy()) {
            let e = symmetric_eigen(&a);
            let v = e.top_vector(1e-12);
            prop_assert!((v.norm() - 1.0).abs() < 1e-14);
            assert_relative_eq!((v.transpose() * a * v)[0], e.max_value(), epsilon = 1e-12);
        }
    }
}
