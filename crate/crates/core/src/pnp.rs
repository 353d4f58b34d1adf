//! Perspective-n-point solver: direct linear transform initialization,
//! Levenberg-Marquardt refinement over axis-angle and translation, and
//! detection/correction of the flipped-pose local minimum that near-planar
//! landmark sets induce.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector2, Vector3, Vector6};

use crate::camera::CameraIntrinsics;
use crate::error::Error;
use crate::face::{FaceModel3D, LandmarkSet2D};
use crate::pose::{detect_flip, flip_pose, HeadPose};
use crate::rotation::{
    axis_angle_to_rotation, nearest_rotation, rotation_to_axis_angle, skew, so3_right_jacobian,
};

/// Minimum landmark count for the 12-parameter linear initialization.
pub const MIN_DLT_POINTS: usize = 6;

/// Condition-number threshold above which the linear system is reported
/// ill-conditioned (the solver still proceeds).
pub const DLT_CONDITION_LIMIT: f64 = 1e12;

/// Tuning knobs for the iterative refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_lm_iterations: usize,
    pub lm_initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    /// Relative cost decrease below which an accepted step ends the loop.
    pub convergence_tol: f64,
    pub correction_enabled: bool,
    /// LM iterations run before the flip check.
    pub correction_after_iterations: usize,
    /// Testing aid: start refinement from the flipped counterpart of the
    /// linear initialization, to probe the secondary basin on demand.
    pub flip_initialization: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_lm_iterations: 100,
            lm_initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.1,
            convergence_tol: 1e-10,
            correction_enabled: true,
            correction_after_iterations: 10,
            flip_initialization: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.max_lm_iterations == 0
            || !(self.lm_initial_damping > 0.0)
            || !(self.damping_up > 1.0)
            || !(self.damping_down > 0.0 && self.damping_down < 1.0)
            || !(self.convergence_tol > 0.0)
        {
            return Err(Error::InvalidInput("solver config values must be positive".into()));
        }
        if self.correction_after_iterations > self.max_lm_iterations {
            return Err(Error::InvalidInput(
                "correction_after_iterations must not exceed max_lm_iterations".into(),
            ));
        }
        Ok(())
    }
}

/// Output of the linear initialization: the rotation block is a relaxed
/// (non-orthonormal) estimate scaled so its third row has unit norm.
#[derive(Debug, Clone, Copy)]
pub struct DltInit {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub ill_conditioned: bool,
    pub condition_number: f64,
}

/// Side observations produced while solving; never fatal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverDiagnostics {
    pub dlt_ill_conditioned: bool,
    pub dlt_rotation_ambiguous: bool,
    /// The flip check fired and the pose was corrected mid-refinement.
    pub correction_applied: bool,
    /// The corrected run still ended with a negative translation depth.
    pub correction_failed: bool,
}

/// A refined pose together with its diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct PoseSolution {
    pub pose: HeadPose,
    pub diagnostics: SolverDiagnostics,
}

/// Direct linear transform over the selected landmarks.
///
/// Builds the homogeneous system in normalized image coordinates, takes the
/// least-squares null vector by SVD, scales so the third rotation row has
/// unit norm, and picks the global sign that makes the majority of
/// transformed depths positive.
pub fn dlt_initialize(
    model: &FaceModel3D,
    indices: &[usize],
    observed: &LandmarkSet2D,
    cam: &CameraIntrinsics,
) -> Result<DltInit, Error> {
    let n = indices.len();
    if n < MIN_DLT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_DLT_POINTS,
            got: n,
        });
    }

    let mut a = DMatrix::<f64>::zeros(2 * n, 12);
    for (k, &i) in indices.iter().enumerate() {
        let p = model.points()[i];
        let obs = observed.points()[i];
        let u = (obs.x - cam.cx) / cam.fx;
        let v = (obs.y - cam.cy) / cam.fy;
        let r0 = 2 * k;
        a[(r0, 0)] = p.x;
        a[(r0, 1)] = p.y;
        a[(r0, 2)] = p.z;
        a[(r0, 3)] = 1.0;
        a[(r0, 8)] = -u * p.x;
        a[(r0, 9)] = -u * p.y;
        a[(r0, 10)] = -u * p.z;
        a[(r0, 11)] = -u;
        let r1 = r0 + 1;
        a[(r1, 4)] = p.x;
        a[(r1, 5)] = p.y;
        a[(r1, 6)] = p.z;
        a[(r1, 7)] = 1.0;
        a[(r1, 8)] = -v * p.x;
        a[(r1, 9)] = -v * p.y;
        a[(r1, 10)] = -v * p.z;
        a[(r1, 11)] = -v;
    }

    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let s = &svd.singular_values;
    // The homogeneous system always has a (near-)zero smallest singular
    // value -- that direction IS the solution. Degeneracy means the null
    // space has dimension above one, so condition the second-smallest.
    let second_smallest = s[s.len() - 2];
    let condition_number = if second_smallest > 0.0 {
        s[0] / second_smallest
    } else {
        f64::INFINITY
    };
    let ill_conditioned = !(condition_number < DLT_CONDITION_LIMIT);

    let theta: Vec<f64> = v_t.row(v_t.nrows() - 1).iter().copied().collect();
    let mut rotation = Matrix3::new(
        theta[0], theta[1], theta[2], theta[4], theta[5], theta[6], theta[8], theta[9], theta[10],
    );
    let mut translation = Vector3::new(theta[3], theta[7], theta[11]);

    let third_row_norm = rotation.row(2).norm();
    // The homogeneous solution has unit norm overall; a vanishing third row
    // only occurs for degenerate systems, where any finite scaling will do.
    let scale = if third_row_norm > 1e-12 {
        1.0 / third_row_norm
    } else {
        1.0
    };
    rotation *= scale;
    translation *= scale;

    let positive_depths = indices
        .iter()
        .filter(|&&i| (rotation * model.points()[i] + translation).z > 0.0)
        .count();
    if 2 * positive_depths < n {
        rotation = -rotation;
        translation = -translation;
    }

    Ok(DltInit {
        rotation,
        translation,
        ill_conditioned,
        condition_number,
    })
}

/// The reprojection residual system for a fixed landmark subset, exposing
/// residuals and the analytic Jacobian in the 6 pose parameters
/// (axis-angle, then translation).
pub struct ReprojectionProblem {
    points: Vec<Vector3<f64>>,
    observed: Vec<Vector2<f64>>,
    cam: CameraIntrinsics,
}

impl ReprojectionProblem {
    pub fn new(
        model: &FaceModel3D,
        indices: &[usize],
        observed: &LandmarkSet2D,
        cam: &CameraIntrinsics,
    ) -> Result<Self, Error> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("empty index subset".into()));
        }
        Ok(Self {
            points: indices.iter().map(|&i| model.points()[i]).collect(),
            observed: indices.iter().map(|&i| observed.points()[i]).collect(),
            cam: *cam,
        })
    }

    pub fn residual_count(&self) -> usize {
        2 * self.points.len()
    }

    /// Residuals (projected minus observed), or None when any entry is
    /// non-finite (zero or sign-crossing depth).
    pub fn residuals(&self, omega: &Vector3<f64>, t: &Vector3<f64>) -> Option<DVector<f64>> {
        let r = axis_angle_to_rotation(omega);
        let mut out = DVector::zeros(self.residual_count());
        for (k, (p, obs)) in self.points.iter().zip(self.observed.iter()).enumerate() {
            let q = r * p + t;
            let x = q.x / q.z * self.cam.fx + self.cam.cx;
            let y = q.y / q.z * self.cam.fy + self.cam.cy;
            if !(x.is_finite() && y.is_finite()) {
                return None;
            }
            out[2 * k] = x - obs.x;
            out[2 * k + 1] = y - obs.y;
        }
        Some(out)
    }

    pub fn cost(&self, omega: &Vector3<f64>, t: &Vector3<f64>) -> Option<f64> {
        self.residuals(omega, t).map(|r| r.norm_squared())
    }

    /// Analytic Jacobian of the residuals with respect to (omega, t).
    ///
    /// Uses the right Jacobian of the exponential map, so a perturbation d
    /// acts as exp(omega + d) ~ exp(omega) exp(Jr(omega) d).
    pub fn jacobian(&self, omega: &Vector3<f64>, t: &Vector3<f64>) -> DMatrix<f64> {
        let r = axis_angle_to_rotation(omega);
        let jr = so3_right_jacobian(omega);
        let mut jac = DMatrix::zeros(self.residual_count(), 6);
        for (k, p) in self.points.iter().enumerate() {
            let q = r * p + t;
            let inv_z = 1.0 / q.z;
            // d(pixel)/d(camera point)
            let d_pix = nalgebra::Matrix2x3::new(
                self.cam.fx * inv_z,
                0.0,
                -self.cam.fx * q.x * inv_z * inv_z,
                0.0,
                self.cam.fy * inv_z,
                -self.cam.fy * q.y * inv_z * inv_z,
            );
            // d(camera point)/d(omega) = -R [p]x Jr(omega); d/dt = I.
            let d_omega = d_pix * (-r * skew(p) * jr);
            let d_t = d_pix;
            for col in 0..3 {
                jac[(2 * k, col)] = d_omega[(0, col)];
                jac[(2 * k + 1, col)] = d_omega[(1, col)];
                jac[(2 * k, 3 + col)] = d_t[(0, col)];
                jac[(2 * k + 1, 3 + col)] = d_t[(1, col)];
            }
        }
        jac
    }
}

/// Keep the axis-angle parameter inside the ball of radius pi.
fn wrap_axis_angle(omega: &mut Vector3<f64>) {
    let theta = omega.norm();
    if theta > core::f64::consts::PI {
        *omega *= (theta - core::f64::consts::TAU) / theta;
    }
}

struct LmState {
    omega: Vector3<f64>,
    t: Vector3<f64>,
    residuals: DVector<f64>,
    cost: f64,
    lambda: f64,
}

enum LmStop {
    Converged,
    IterationBudget,
}

/// Damped Gauss-Newton loop on a mutable state. Accepted steps never
/// increase the cost; stops on a negligible relative decrease, on damping
/// exhaustion, or after `budget` attempted iterations.
fn lm_loop(
    problem: &ReprojectionProblem,
    state: &mut LmState,
    budget: usize,
    config: &SolverConfig,
    iterations: &mut usize,
    trace: &mut Option<&mut Vec<f64>>,
) -> LmStop {
    const LAMBDA_CEILING: f64 = 1e15;
    for _ in 0..budget {
        *iterations += 1;
        wrap_axis_angle(&mut state.omega);

        let jac = problem.jacobian(&state.omega, &state.t);
        let grad = jac.transpose() * &state.residuals;
        let hessian = jac.transpose() * &jac;

        let mut augmented = Matrix6::zeros();
        for r in 0..6 {
            for c in 0..6 {
                augmented[(r, c)] = hessian[(r, c)];
            }
            // Marquardt scaling keeps rotation and translation blocks
            // comparably damped despite their different units.
            augmented[(r, r)] += state.lambda * hessian[(r, r)].max(1e-12);
        }
        let rhs = -Vector6::from_fn(|r, _| grad[r]);

        let step = match augmented.cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => {
                state.lambda *= config.damping_up;
                if state.lambda > LAMBDA_CEILING {
                    return LmStop::Converged;
                }
                continue;
            }
        };

        let trial_omega = state.omega + Vector3::new(step[0], step[1], step[2]);
        let trial_t = state.t + Vector3::new(step[3], step[4], step[5]);
        let trial_cost = problem
            .residuals(&trial_omega, &trial_t)
            .map(|r| (r.norm_squared(), r));

        match trial_cost {
            Some((cost, residuals)) if cost <= state.cost => {
                let decrease = state.cost - cost;
                let converged = decrease <= config.convergence_tol * state.cost;
                state.omega = trial_omega;
                state.t = trial_t;
                state.residuals = residuals;
                state.cost = cost;
                state.lambda = (state.lambda * config.damping_down).max(1e-18);
                if let Some(sink) = trace.as_deref_mut() {
                    sink.push(cost);
                }
                if converged {
                    return LmStop::Converged;
                }
            }
            _ => {
                state.lambda *= config.damping_up;
                if state.lambda > LAMBDA_CEILING {
                    return LmStop::Converged;
                }
            }
        }
    }
    LmStop::IterationBudget
}

/// Levenberg-Marquardt refinement from an explicit initial pose.
///
/// With correction enabled, the flip check runs after
/// `correction_after_iterations` iterations (or at early convergence): a
/// negative translation depth triggers the planar-counterpart jump, after
/// which refinement continues with reset damping.
pub fn lm_refine(
    model: &FaceModel3D,
    indices: &[usize],
    observed: &LandmarkSet2D,
    cam: &CameraIntrinsics,
    init: &HeadPose,
    config: &SolverConfig,
) -> Result<PoseSolution, Error> {
    lm_refine_traced(model, indices, observed, cam, init, config, None)
}

/// As [`lm_refine`], additionally recording the cost after every accepted
/// step (the initial cost first) into `trace`.
pub fn lm_refine_traced(
    model: &FaceModel3D,
    indices: &[usize],
    observed: &LandmarkSet2D,
    cam: &CameraIntrinsics,
    init: &HeadPose,
    config: &SolverConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<PoseSolution, Error> {
    config.validate()?;
    let problem = ReprojectionProblem::new(model, indices, observed, cam)?;

    let omega = rotation_to_axis_angle(&init.rotation);
    let t = init.translation;
    let residuals = problem
        .residuals(&omega, &t)
        .ok_or_else(|| Error::NumericalFailure("non-finite residuals at initialization".into()))?;
    let cost = residuals.norm_squared();
    if let Some(sink) = trace.as_deref_mut() {
        sink.push(cost);
    }
    let mut state = LmState {
        omega,
        t,
        residuals,
        cost,
        lambda: config.lm_initial_damping,
    };

    let mut iterations = 0usize;
    let mut diagnostics = SolverDiagnostics::default();

    let first_budget = if config.correction_enabled {
        config.correction_after_iterations
    } else {
        config.max_lm_iterations
    };
    let first_stop = lm_loop(&problem, &mut state, first_budget, config, &mut iterations, &mut trace);

    let mut converged = matches!(first_stop, LmStop::Converged);
    if config.correction_enabled {
        if state.t.z < 0.0 {
            let flipped_omega = {
                let r = axis_angle_to_rotation(&state.omega) * crate::rotation::rotation_z_pi();
                rotation_to_axis_angle(&r)
            };
            let flipped_t = -state.t;
            match problem.residuals(&flipped_omega, &flipped_t) {
                Some(residuals) => {
                    diagnostics.correction_applied = true;
                    state.cost = residuals.norm_squared();
                    state.omega = flipped_omega;
                    state.t = flipped_t;
                    state.residuals = residuals;
                    state.lambda = config.lm_initial_damping;
                    if let Some(sink) = trace.as_deref_mut() {
                        sink.push(state.cost);
                    }
                }
                // The counterpart pose is unusable (a landmark sits on the
                // principal plane); keep the uncorrected state.
                None => diagnostics.correction_failed = true,
            }
        }
        if diagnostics.correction_applied || !converged {
            let remaining = config.max_lm_iterations - iterations.min(config.max_lm_iterations);
            let stop = lm_loop(&problem, &mut state, remaining, config, &mut iterations, &mut trace);
            converged = matches!(stop, LmStop::Converged);
        }
        if diagnostics.correction_applied && state.t.z < 0.0 {
            diagnostics.correction_failed = true;
        }
    }

    let rotation = nearest_rotation(&axis_angle_to_rotation(&state.omega)).rotation;
    let final_omega = rotation_to_axis_angle(&rotation);
    let cost = problem
        .residuals(&final_omega, &state.t)
        .map(|r| r.norm_squared())
        .unwrap_or(state.cost);

    let mut pose = HeadPose::from_parts_unchecked(rotation, state.t);
    pose.cost = cost;
    pose.converged = converged;
    pose.iterations = iterations;
    Ok(PoseSolution { pose, diagnostics })
}

/// Full pipeline: linear initialization, projection onto the rotation
/// group, then refinement with the configured flip handling.
pub fn estimate_pose(
    model: &FaceModel3D,
    indices: &[usize],
    observed: &LandmarkSet2D,
    cam: &CameraIntrinsics,
    config: &SolverConfig,
) -> Result<PoseSolution, Error> {
    config.validate()?;
    let dlt = dlt_initialize(model, indices, observed, cam)?;
    let projection = nearest_rotation(&dlt.rotation);
    let mut init = HeadPose::from_parts_unchecked(projection.rotation, dlt.translation);
    if config.flip_initialization {
        init = flip_pose(&init);
    }
    let mut solution = lm_refine(model, indices, observed, cam, &init, config)?;
    solution.diagnostics.dlt_ill_conditioned = dlt.ill_conditioned;
    solution.diagnostics.dlt_rotation_ambiguous = projection.ambiguous;
    Ok(solution)
}

/// Convenience check used by callers that require the corrected-solver
/// contract: the output either faces the camera or carries the
/// could-not-correct diagnostic.
pub fn satisfies_correction_contract(solution: &PoseSolution) -> bool {
    !detect_flip(&solution.pose) || solution.diagnostics.correction_failed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::approximate_intrinsics;
    use crate::pose::project;
    use crate::rotation::{euler_compose, geodesic_distance, rotation_defect};
    use crate::synth::generate_model;
    use approx::assert_abs_diff_eq;

    fn test_scene() -> (FaceModel3D, CameraIntrinsics, HeadPose) {
        let model = generate_model(11);
        let cam = approximate_intrinsics(1280, 720).unwrap();
        let pose = HeadPose::new(
            euler_compose(0.05, -0.1, 0.15),
            Vector3::new(10.0, -20.0, 420.0),
        )
        .unwrap();
        (model, cam, pose)
    }

    fn observe(model: &FaceModel3D, pose: &HeadPose, cam: &CameraIntrinsics) -> LandmarkSet2D {
        let all: Vec<usize> = (0..68).collect();
        let pts = project(model, &all, pose, cam).unwrap();
        LandmarkSet2D::new(pts, 1280, 720).unwrap()
    }

    #[test]
    fn dlt_recovers_pose_from_noiseless_projections() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let dlt = dlt_initialize(&model, model.all_indices(), &observed, &cam).unwrap();
        assert!(!dlt.ill_conditioned, "condition = {}", dlt.condition_number);
        // The DLT estimate is scaled so the third rotation row is unit; the
        // ground truth already satisfies that, so entries must agree.
        assert_abs_diff_eq!(dlt.rotation, pose.rotation, epsilon = 1e-6);
        assert_abs_diff_eq!(dlt.translation, pose.translation, epsilon = 1e-4);
    }

    #[test]
    fn dlt_flags_planar_models_as_ill_conditioned() {
        let (model, cam, pose) = test_scene();
        // Flatten the model: exact rank deficiency in the linear system.
        let pts = model
            .points()
            .iter()
            .map(|p| Vector3::new(p.x, p.y, 0.0))
            .collect();
        let flat = FaceModel3D::new(
            pts,
            model.inner_indices().to_vec(),
            model.all_indices().to_vec(),
            "flat".into(),
        )
        .unwrap();
        let observed = observe(&flat, &pose, &cam);
        let dlt = dlt_initialize(&flat, flat.all_indices(), &observed, &cam).unwrap();
        assert!(dlt.ill_conditioned);
    }

    #[test]
    fn dlt_rejects_fewer_than_six_points() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let err = dlt_initialize(&model, &[0, 1, 2, 3, 4], &observed, &cam).unwrap_err();
        assert_eq!(err, Error::InsufficientPoints { needed: 6, got: 5 });
    }

    #[test]
    fn lm_from_ground_truth_stays_at_minimum() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let sol = lm_refine(
            &model,
            model.all_indices(),
            &observed,
            &cam,
            &pose,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(sol.pose.cost < 1e-18, "cost = {}", sol.pose.cost);
        assert!(sol.pose.converged);
        assert!(geodesic_distance(&sol.pose.rotation, &pose.rotation) < 1e-9);
        assert!((sol.pose.translation - pose.translation).norm() < 1e-9);
    }

    #[test]
    fn lm_from_dlt_recovers_ground_truth() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let dlt = dlt_initialize(&model, model.all_indices(), &observed, &cam).unwrap();
        let init = HeadPose::from_parts_unchecked(
            nearest_rotation(&dlt.rotation).rotation,
            dlt.translation,
        );
        let sol = lm_refine(
            &model,
            model.all_indices(),
            &observed,
            &cam,
            &init,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(geodesic_distance(&sol.pose.rotation, &pose.rotation) < 1e-6);
    }

    #[test]
    fn lm_without_correction_stays_in_flipped_basin() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let config = SolverConfig {
            correction_enabled: false,
            ..SolverConfig::default()
        };
        let init = flip_pose(&pose);
        let sol = lm_refine(&model, model.all_indices(), &observed, &cam, &init, &config).unwrap();
        assert!(sol.pose.translation.z < 0.0);
        assert!(sol.pose.flipped);
        // The captured basin sits a yaw-pi composition away from the truth.
        let gap = geodesic_distance(&sol.pose.rotation, &pose.rotation);
        assert!(gap > 2.5, "gap = {gap}");
    }

    #[test]
    fn correction_restores_frontal_basin_from_flipped_start() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let init = flip_pose(&pose);
        let sol = lm_refine(
            &model,
            model.all_indices(),
            &observed,
            &cam,
            &init,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(sol.diagnostics.correction_applied);
        assert!(!sol.diagnostics.correction_failed);
        assert!(!sol.pose.flipped);
        assert!(geodesic_distance(&sol.pose.rotation, &pose.rotation) < 1e-6);
        assert!(
            (sol.pose.translation - pose.translation).norm() / pose.translation.norm() < 1e-6
        );
    }

    #[test]
    fn estimate_pose_recovers_ground_truth_with_correction() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let sol = estimate_pose(
            &model,
            model.all_indices(),
            &observed,
            &cam,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(!sol.pose.flipped);
        assert!(geodesic_distance(&sol.pose.rotation, &pose.rotation) < 1e-6);
        assert!(
            (sol.pose.translation - pose.translation).norm() / pose.translation.norm() < 1e-6
        );
    }

    #[test]
    fn estimate_pose_with_adversarial_init_and_correction_recovers() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let config = SolverConfig {
            flip_initialization: true,
            ..SolverConfig::default()
        };
        let sol = estimate_pose(&model, model.all_indices(), &observed, &cam, &config).unwrap();
        assert!(!sol.pose.flipped);
        assert!(geodesic_distance(&sol.pose.rotation, &pose.rotation) < 1e-6);
    }

    #[test]
    fn estimate_pose_with_adversarial_init_without_correction_flips() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let config = SolverConfig {
            flip_initialization: true,
            correction_enabled: false,
            ..SolverConfig::default()
        };
        let sol = estimate_pose(&model, model.all_indices(), &observed, &cam, &config).unwrap();
        assert!(sol.pose.flipped);
    }

    #[test]
    fn accepted_steps_never_increase_cost() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let dlt = dlt_initialize(&model, model.all_indices(), &observed, &cam).unwrap();
        let init = HeadPose::from_parts_unchecked(
            nearest_rotation(&dlt.rotation).rotation,
            dlt.translation,
        );
        let config = SolverConfig {
            correction_enabled: false,
            ..SolverConfig::default()
        };
        let mut costs = Vec::new();
        lm_refine_traced(
            &model,
            model.all_indices(),
            &observed,
            &cam,
            &init,
            &config,
            Some(&mut costs),
        )
        .unwrap();
        assert!(costs.len() >= 2);
        for pair in costs.windows(2) {
            assert!(pair[1] <= pair[0], "cost increased: {pair:?}");
        }
    }

    #[test]
    fn solver_outputs_are_valid_rotations() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        for flip_init in [false, true] {
            for correction in [false, true] {
                let config = SolverConfig {
                    flip_initialization: flip_init,
                    correction_enabled: correction,
                    ..SolverConfig::default()
                };
                let sol =
                    estimate_pose(&model, model.all_indices(), &observed, &cam, &config).unwrap();
                assert!(rotation_defect(&sol.pose.rotation) < 1e-10);
            }
        }
    }

    #[test]
    fn analytic_jacobian_matches_central_differences() {
        let (model, cam, _) = test_scene();
        let all: Vec<usize> = (0..68).collect();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(21);
        for _ in 0..20 {
            use rand::Rng;
            let pose = HeadPose::new(
                euler_compose(
                    rng.random_range(-0.6..0.6),
                    rng.random_range(-0.6..0.6),
                    rng.random_range(-0.6..0.6),
                ),
                Vector3::new(
                    rng.random_range(-50.0..50.0),
                    rng.random_range(-50.0..50.0),
                    rng.random_range(300.0..600.0),
                ),
            )
            .unwrap();
            let observed = observe(&model, &pose, &cam);
            let problem = ReprojectionProblem::new(&model, &all, &observed, &cam).unwrap();
            let omega = rotation_to_axis_angle(&pose.rotation);
            // Evaluate away from the optimum so residual terms are nonzero.
            let omega_eval = omega + Vector3::new(0.02, -0.015, 0.01);
            let t_eval = pose.translation + Vector3::new(3.0, -2.0, 8.0);

            let analytic = problem.jacobian(&omega_eval, &t_eval);
            let h = 1e-6;
            let mut fd = DMatrix::zeros(problem.residual_count(), 6);
            for col in 0..6 {
                let mut wp = omega_eval;
                let mut wm = omega_eval;
                let mut tp = t_eval;
                let mut tm = t_eval;
                if col < 3 {
                    wp[col] += h;
                    wm[col] -= h;
                } else {
                    tp[col - 3] += h;
                    tm[col - 3] -= h;
                }
                let rp = problem.residuals(&wp, &tp).unwrap();
                let rm = problem.residuals(&wm, &tm).unwrap();
                fd.set_column(col, &((rp - rm) / (2.0 * h)));
            }
            let rel = (&fd - &analytic).norm() / analytic.norm();
            assert!(rel < 1e-5, "relative Jacobian error {rel}");
        }
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let bad = SolverConfig {
            correction_after_iterations: 200,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            lm_initial_damping: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn corrected_solver_contract_holds_on_adversarial_inputs() {
        let (model, cam, pose) = test_scene();
        let observed = observe(&model, &pose, &cam);
        let config = SolverConfig {
            flip_initialization: true,
            ..SolverConfig::default()
        };
        let sol = estimate_pose(&model, model.all_indices(), &observed, &cam, &config).unwrap();
        assert!(satisfies_correction_contract(&sol));
    }
}
