//! SO(3) utilities: axis-angle maps, nearest-rotation projection, and the
//! Euler convention used for reporting.

use nalgebra::{Matrix3, Vector3};

/// Skew-symmetric (cross-product) matrix of `v`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rodrigues exponential map: axis-angle vector to rotation matrix.
pub fn axis_angle_to_rotation(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let k = skew(omega);
    if theta2 < 1e-16 {
        // Second-order Taylor expansion around zero.
        return Matrix3::identity() + k + 0.5 * k * k;
    }
    let theta = libm::sqrt(theta2);
    let a = libm::sin(theta) / theta;
    let b = (1.0 - libm::cos(theta)) / theta2;
    Matrix3::identity() + a * k + b * k * k
}

/// Logarithm map: rotation matrix to axis-angle vector with angle in [0, pi].
pub fn rotation_to_axis_angle(r: &Matrix3<f64>) -> Vector3<f64> {
    // Route through a unit quaternion; stable near both 0 and pi.
    let q = nalgebra::UnitQuaternion::from_matrix(r);
    q.scaled_axis()
}

/// Right Jacobian of the exponential map: exp(w + d) ~ exp(w) exp(Jr(w) d).
pub fn so3_right_jacobian(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let k = skew(omega);
    if theta2 < 1e-16 {
        return Matrix3::identity() - 0.5 * k + (1.0 / 6.0) * k * k;
    }
    let theta = libm::sqrt(theta2);
    let a = (1.0 - libm::cos(theta)) / theta2;
    let b = (theta - libm::sin(theta)) / (theta2 * theta);
    Matrix3::identity() - a * k + b * k * k
}

/// Result of projecting a matrix onto the rotation group.
#[derive(Debug, Clone, Copy)]
pub struct RotationProjection {
    pub rotation: Matrix3<f64>,
    /// True when the nearest rotation is not unique (rank-deficient input or
    /// a tie between the smallest singular values under sign correction).
    pub ambiguous: bool,
}

/// Nearest rotation matrix in Frobenius norm, with the determinant forced
/// to +1 by flipping the smallest singular direction when necessary.
pub fn nearest_rotation(m: &Matrix3<f64>) -> RotationProjection {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let s = svd.singular_values;

    let det = (u * v_t).determinant();
    let rotation = if det >= 0.0 {
        u * v_t
    } else {
        // nalgebra returns singular values sorted descending; the correction
        // sign attaches to the smallest one.
        u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0)) * v_t
    };

    let scale = s[0].max(1.0);
    let rank_deficient = s[2] <= 1e-12 * scale;
    let tied_smallest = det < 0.0 && (s[1] - s[2]).abs() <= 1e-12 * scale;
    RotationProjection {
        rotation,
        ambiguous: rank_deficient || tied_smallest,
    }
}

/// Rotation by pi about the z axis, written exactly.
pub fn rotation_z_pi() -> Matrix3<f64> {
    Matrix3::new(-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0)
}

/// Euler angles under the convention R = Rz(roll) * Ry(yaw) * Rx(pitch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Set when |yaw| is within 1e-6 of pi/2; roll is fixed to 0 there and
    /// only roll-pitch differences are observable.
    pub gimbal_degenerate: bool,
}

/// Decompose a rotation into (roll, pitch, yaw) with R = Rz(roll)Ry(yaw)Rx(pitch).
pub fn euler_decompose(r: &Matrix3<f64>) -> EulerAngles {
    // Under this convention r[(2,0)] = -sin(yaw).
    let sy = -r[(2, 0)];
    let sy = sy.clamp(-1.0, 1.0);
    let yaw = libm::asin(sy);
    let cos_yaw = libm::cos(yaw);

    if (yaw.abs() - core::f64::consts::FRAC_PI_2).abs() < 1e-6 || cos_yaw.abs() < 1e-12 {
        // Gimbal lock: only roll - sign(sin_yaw) * pitch is determined.
        let pitch = libm::atan2(r[(0, 1)] * sy.signum(), r[(0, 2)] * sy.signum());
        return EulerAngles {
            roll: 0.0,
            pitch,
            yaw,
            gimbal_degenerate: true,
        };
    }

    EulerAngles {
        roll: libm::atan2(r[(1, 0)], r[(0, 0)]),
        pitch: libm::atan2(r[(2, 1)], r[(2, 2)]),
        yaw,
        gimbal_degenerate: false,
    }
}

/// Compose a rotation as R = Rz(roll) * Ry(yaw) * Rx(pitch).
pub fn euler_compose(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    rotation_z(roll) * rotation_y(yaw) * rotation_x(pitch)
}

pub fn rotation_x(angle: f64) -> Matrix3<f64> {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rotation_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rotation_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Maximum absolute entry of R^T R - I, plus the determinant deviation.
/// Zero for an exact rotation.
pub fn rotation_defect(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r - Matrix3::identity();
    let mut worst: f64 = 0.0;
    for entry in gram.iter() {
        worst = worst.max(entry.abs());
    }
    worst.max((r.determinant() - 1.0).abs())
}

/// Geodesic distance on SO(3) in radians.
pub fn geodesic_distance(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    rotation_to_axis_angle(&(a.transpose() * b)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let angle: f64 = rng.random_range(0.0..core::f64::consts::PI);
        if axis.norm() < 1e-9 {
            return Matrix3::identity();
        }
        axis_angle_to_rotation(&(axis.normalize() * angle))
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = random_rotation(&mut rng);
            let back = axis_angle_to_rotation(&rotation_to_axis_angle(&r));
            assert_abs_diff_eq!(r, back, epsilon = 1e-12);
        }
    }

    #[test]
    fn nearest_rotation_is_idempotent_on_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let r = random_rotation(&mut rng);
            let proj = nearest_rotation(&r);
            assert!(!proj.ambiguous);
            assert_abs_diff_eq!(proj.rotation, r, epsilon = 1e-12);
        }
    }

    #[test]
    fn nearest_rotation_strips_scale() {
        let proj = nearest_rotation(&(2.0 * Matrix3::identity()));
        assert_abs_diff_eq!(proj.rotation, Matrix3::identity(), epsilon = 1e-12);
    }

    #[test]
    fn nearest_rotation_of_reflection_minimizes_frobenius_among_sign_fixes() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        let proj = nearest_rotation(&m);
        assert!((proj.rotation.determinant() - 1.0).abs() < 1e-12);
        assert!(rotation_defect(&proj.rotation) < 1e-12);

        // Brute-force oracle: among U diag(+-1) V^T with determinant +1, the
        // returned rotation must attain the minimum Frobenius distance to m.
        let svd = m.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut best = f64::INFINITY;
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let candidate =
                        u * Matrix3::from_diagonal(&Vector3::new(sx, sy, sz)) * v_t;
                    if (candidate.determinant() - 1.0).abs() < 1e-9 {
                        best = best.min((candidate - m).norm());
                    }
                }
            }
        }
        assert!((proj.rotation - m).norm() <= best + 1e-12);
        // The reflection case has equal singular values, so the minimizer
        // is not unique and must be flagged.
        assert!(proj.ambiguous);
    }

    #[test]
    fn euler_identity_is_zero() {
        let e = euler_decompose(&Matrix3::identity());
        assert_eq!((e.roll, e.pitch, e.yaw), (0.0, 0.0, 0.0));
        assert!(!e.gimbal_degenerate);
    }

    #[test]
    fn euler_pure_yaw() {
        let e = euler_decompose(&rotation_y(0.3));
        assert_abs_diff_eq!(e.yaw, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(e.roll, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.pitch, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn euler_round_trip_over_seeded_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut checked = 0;
        while checked < 1000 {
            let r = random_rotation(&mut rng);
            let e = euler_decompose(&r);
            if e.gimbal_degenerate {
                continue;
            }
            let back = euler_compose(e.roll, e.pitch, e.yaw);
            assert_abs_diff_eq!(r, back, epsilon = 1e-9);
            checked += 1;
        }
    }

    #[test]
    fn euler_gimbal_lock_is_flagged() {
        let r = rotation_y(core::f64::consts::FRAC_PI_2);
        let e = euler_decompose(&r);
        assert!(e.gimbal_degenerate);
        assert_eq!(e.roll, 0.0);
        // The recomposition must still reproduce the rotation.
        let back = euler_compose(e.roll, e.pitch, e.yaw);
        assert_abs_diff_eq!(r, back, epsilon = 1e-9);
    }

    #[test]
    fn right_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let omega = Vector3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let jr = so3_right_jacobian(&omega);
            let r = axis_angle_to_rotation(&omega);
            let h = 1e-6;
            for col in 0..3 {
                let mut dp = omega;
                let mut dm = omega;
                dp[col] += h;
                dm[col] -= h;
                // d/d(omega_col) exp(omega) ~ R * skew(Jr e_col) (right perturbation).
                let fd = (axis_angle_to_rotation(&dp) - axis_angle_to_rotation(&dm)) / (2.0 * h);
                let analytic = r * skew(&jr.column(col).into());
                assert_abs_diff_eq!(fd, analytic, epsilon = 1e-6);
            }
        }
    }
}
