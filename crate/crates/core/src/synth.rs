//! Deterministic synthetic scenes with known ground truth: a procedural
//! 68-landmark face model, seeded pose sampling, per-subject shape
//! deformation, inner-region swap perturbation, and noisy projections.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::camera::{approximate_intrinsics, CameraIntrinsics};
use crate::dataset::Label;
use crate::error::Error;
use crate::face::{FaceModel3D, LandmarkSet2D, LANDMARK_COUNT};
use crate::pose::HeadPose;
use crate::rotation::euler_compose;

/// First landmark index of the inner facial region (everything but the jaw).
pub const INNER_REGION_START: usize = 17;

/// Default near-planarity target: mean |z| over the pose subset relative to
/// the x-y extent.
pub const DEFAULT_PLANARITY: f64 = 0.04;

/// Landmark subset used for the whole-face pose estimate: jaw outline,
/// brows, nose, and the two mouth corners (38 indices).
pub fn default_all_indices() -> Vec<usize> {
    let mut v: Vec<usize> = (0..=35).collect();
    v.push(48);
    v.push(54);
    v
}

/// Landmark subset for the inner-region pose estimate: brows, nose, and
/// mouth corners (21 indices); the dynamic eye and lip contours are left out.
pub fn default_inner_indices() -> Vec<usize> {
    let mut v: Vec<usize> = (17..=35).collect();
    v.push(48);
    v.push(54);
    v
}

/// Build the face template before jitter, centering, and depth scaling.
fn face_template() -> Vec<Vector3<f64>> {
    let mut pts = Vec::with_capacity(LANDMARK_COUNT);

    // Depths are chosen so the outline, brows, eyes, and mouth sit close to
    // the face plane while the nose protrudes; the tip must dominate the
    // outline depth even after centroid subtraction.

    // Jaw outline 0..=16, sweeping ear to ear under the chin.
    for i in 0..17 {
        let s = i as f64 / 16.0;
        let phi = core::f64::consts::PI * (1.0 - s);
        let (sin, cos) = (libm::sin(phi), libm::cos(phi));
        pts.push(Vector3::new(72.0 * cos, 40.0 - 130.0 * sin, 1.0 + 0.5 * cos * cos));
    }
    // Brows 17..=21 and 22..=26.
    for side in [-1.0, 1.0] {
        for i in 0..5 {
            let s = i as f64 / 4.0;
            let x = side * (52.0 - 36.0 * if side < 0.0 { s } else { 1.0 - s });
            pts.push(Vector3::new(
                x,
                42.0 + 6.0 * libm::sin(core::f64::consts::PI * s),
                0.0,
            ));
        }
    }
    // Nose bridge 27..=30 (tip at 30) and base 31..=35.
    for (v, w) in [(30.0, 3.0), (19.0, 6.0), (8.0, 10.0), (-3.0, 16.0)] {
        pts.push(Vector3::new(0.0, v, w));
    }
    for (i, w) in [(0usize, 4.0), (1, 6.0), (2, 8.0), (3, 6.0), (4, 4.0)] {
        pts.push(Vector3::new(-12.0 + 6.0 * i as f64, -12.0, w));
    }
    // Eyes 36..=41 and 42..=47, six points each.
    for side in [-1.0, 1.0] {
        for i in 0..6 {
            let a = i as f64 / 6.0 * core::f64::consts::TAU;
            pts.push(Vector3::new(
                side * 31.0 + 9.0 * libm::cos(a),
                26.0 + 4.0 * libm::sin(a),
                0.0,
            ));
        }
    }
    // Mouth: outer ring 48..=59, inner ring 60..=67.
    for i in 0..12 {
        let a = i as f64 / 12.0 * core::f64::consts::TAU;
        pts.push(Vector3::new(
            24.0 * libm::cos(a),
            -52.0 + 10.0 * libm::sin(a),
            0.5,
        ));
    }
    for i in 0..8 {
        let a = i as f64 / 8.0 * core::f64::consts::TAU;
        pts.push(Vector3::new(
            14.0 * libm::cos(a),
            -52.0 + 4.0 * libm::sin(a),
            1.0,
        ));
    }
    debug_assert_eq!(pts.len(), LANDMARK_COUNT);
    pts
}

/// Generate the procedural face model with the default planarity.
pub fn generate_model(seed: u64) -> FaceModel3D {
    generate_model_with_planarity(seed, DEFAULT_PLANARITY)
}

/// Generate the procedural face model, scaling depths so the planarity
/// statistic hits `planarity` exactly. A target of zero yields an exactly
/// planar model (useful for the two-minima identities).
pub fn generate_model_with_planarity(seed: u64, planarity: f64) -> FaceModel3D {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0, 0));
    let mut pts = face_template();

    let scale = rng.random_range(0.95..1.05);
    for p in pts.iter_mut() {
        *p *= scale;
        p.x += rng.random_range(-1.5..1.5);
        p.y += rng.random_range(-1.5..1.5);
        p.z += rng.random_range(-0.75..0.75);
    }

    let centroid = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    for p in pts.iter_mut() {
        *p -= centroid;
    }

    let all = default_all_indices();
    let inner = default_inner_indices();

    // Rescale depths to the requested planarity; the centroid is already
    // zero and stays zero under a pure z scaling.
    let provisional = FaceModel3D::new(pts.clone(), inner.clone(), all.clone(), String::new())
        .expect("template satisfies model invariants");
    let current = provisional.planarity_ratio();
    let z_scale = if current > 0.0 { planarity / current } else { 0.0 };
    for p in pts.iter_mut() {
        p.z *= z_scale;
    }

    FaceModel3D::new(pts, inner, all, format!("synthetic-{seed}"))
        .expect("scaled template satisfies model invariants")
}

/// Scene description; every derived quantity is a pure function of this
/// struct, so identical specs reproduce identical datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    pub frame_count: usize,
    pub subject_count: usize,
    /// Euler ranges in radians under the Rz(roll) Ry(yaw) Rx(pitch) convention.
    pub roll_range: (f64, f64),
    pub pitch_range: (f64, f64),
    pub yaw_range: (f64, f64),
    /// Axis-aligned translation box in millimeters.
    pub translation_min: Vector3<f64>,
    pub translation_max: Vector3<f64>,
    /// Standard deviation of i.i.d. Gaussian pixel noise.
    pub pixel_noise: f64,
    /// Amplitude (mm) of the smooth field applied to inner-region points of
    /// fake frames before projection.
    pub swap_perturbation: f64,
    /// Amplitude (mm) of the smooth per-subject deformation of the model.
    pub subject_deformation: f64,
    pub image_width: u32,
    pub image_height: u32,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            frame_count: 100,
            subject_count: 4,
            roll_range: (-0.3, 0.3),
            pitch_range: (-0.3, 0.3),
            yaw_range: (-0.3, 0.3),
            translation_min: Vector3::new(-60.0, -40.0, 350.0),
            translation_max: Vector3::new(60.0, 40.0, 550.0),
            pixel_noise: 0.5,
            swap_perturbation: 1.5,
            subject_deformation: 0.0,
            image_width: 1280,
            image_height: 720,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.frame_count == 0 {
            return Err(Error::SpecInvalid("frame count must be positive".into()));
        }
        if self.subject_count == 0 {
            return Err(Error::SpecInvalid("subject count must be positive".into()));
        }
        if !(self.pixel_noise >= 0.0 && self.swap_perturbation >= 0.0 && self.subject_deformation >= 0.0)
        {
            return Err(Error::SpecInvalid("amplitudes must be nonnegative".into()));
        }
        for (lo, hi) in [self.roll_range, self.pitch_range, self.yaw_range] {
            if !(lo <= hi) {
                return Err(Error::SpecInvalid("pose range is reversed or non-finite".into()));
            }
        }
        for axis in 0..3 {
            if !(self.translation_min[axis] <= self.translation_max[axis]) {
                return Err(Error::SpecInvalid("translation box is reversed".into()));
            }
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::SpecInvalid("image dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn camera(&self) -> CameraIntrinsics {
        approximate_intrinsics(self.image_width, self.image_height)
            .expect("validated dimensions are positive")
    }
}

/// A smooth, low-frequency displacement field over model coordinates: one
/// bounded sinusoid per output axis, with seeded directions and phases.
#[derive(Debug, Clone, Copy)]
pub struct DeformField {
    amplitude: f64,
    wave_vectors: [Vector3<f64>; 3],
    phases: [f64; 3],
}

impl DeformField {
    pub fn from_rng(rng: &mut ChaCha8Rng, amplitude: f64) -> Self {
        let mut wave_vectors = [Vector3::zeros(); 3];
        let mut phases = [0.0; 3];
        for axis in 0..3 {
            let dir = Vector3::new(
                rng.random_range(-1.0..1.0f64),
                rng.random_range(-1.0..1.0f64),
                rng.random_range(-1.0..1.0f64),
            );
            let dir = if dir.norm() > 1e-9 {
                dir.normalize()
            } else {
                Vector3::x()
            };
            // Wavelengths of a few hundred millimeters: a gentle gradient
            // across a 150 mm face.
            wave_vectors[axis] = dir * rng.random_range(0.5..1.5) / 60.0;
            phases[axis] = rng.random_range(0.0..core::f64::consts::TAU);
        }
        Self {
            amplitude,
            wave_vectors,
            phases,
        }
    }

    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            wave_vectors: [Vector3::zeros(); 3],
            phases: [0.0; 3],
        }
    }

    /// Displacement at a model point; each component is bounded by the
    /// field amplitude.
    pub fn displace(&self, p: &Vector3<f64>) -> Vector3<f64> {
        if self.amplitude == 0.0 {
            return Vector3::zeros();
        }
        Vector3::new(
            self.amplitude * libm::sin(self.wave_vectors[0].dot(p) + self.phases[0]),
            self.amplitude * libm::sin(self.wave_vectors[1].dot(p) + self.phases[1]),
            self.amplitude * libm::sin(self.wave_vectors[2].dot(p) + self.phases[2]),
        )
    }
}

/// Sample a head pose from the spec ranges, rejecting poses that put any
/// model landmark at nonpositive depth.
pub fn sample_pose(
    spec: &SceneSpec,
    model: &FaceModel3D,
    rng: &mut ChaCha8Rng,
) -> Result<HeadPose, Error> {
    const MAX_TRIES: usize = 1000;
    for _ in 0..MAX_TRIES {
        let roll = sample_range(rng, spec.roll_range);
        let pitch = sample_range(rng, spec.pitch_range);
        let yaw = sample_range(rng, spec.yaw_range);
        let t = Vector3::new(
            sample_range(rng, (spec.translation_min.x, spec.translation_max.x)),
            sample_range(rng, (spec.translation_min.y, spec.translation_max.y)),
            sample_range(rng, (spec.translation_min.z, spec.translation_max.z)),
        );
        let pose = HeadPose::from_parts_unchecked(euler_compose(roll, pitch, yaw), t);
        if model.points().iter().all(|p| pose.transform(p).z > 0.0) {
            return Ok(pose);
        }
    }
    Err(Error::SpecInvalid(
        "pose ranges cannot satisfy depth positivity".into(),
    ))
}

fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// One rendered frame with its ground truth.
#[derive(Debug, Clone)]
pub struct RenderedFrame {
    pub landmarks: LandmarkSet2D,
    pub truth_pose: HeadPose,
    pub fake: bool,
}

/// Render the landmarks of one frame: subject deformation, optional
/// inner-region swap perturbation, projection, then pixel noise.
pub fn render_frame(
    model: &FaceModel3D,
    subject_field: &DeformField,
    pose: &HeadPose,
    cam: &CameraIntrinsics,
    spec: &SceneSpec,
    fake: bool,
    rng: &mut ChaCha8Rng,
) -> Result<RenderedFrame, Error> {
    let mut pts: Vec<Vector3<f64>> = model
        .points()
        .iter()
        .map(|p| p + subject_field.displace(p))
        .collect();
    if fake {
        let swap = DeformField::from_rng(rng, spec.swap_perturbation);
        for (i, base) in model.points().iter().enumerate().skip(INNER_REGION_START) {
            pts[i] += swap.displace(base);
        }
    }

    let mut pixels = Vec::with_capacity(LANDMARK_COUNT);
    for (i, p) in pts.iter().enumerate() {
        let q = pose.transform(p);
        match cam.project_point(&q) {
            Some(px) => pixels.push(px),
            None => return Err(Error::ProjectionSingularity { index: i }),
        }
    }

    if spec.pixel_noise > 0.0 {
        let normal = Normal::new(0.0, spec.pixel_noise)
            .map_err(|_| Error::SpecInvalid("invalid pixel noise".into()))?;
        for px in pixels.iter_mut() {
            px.x += normal.sample(rng);
            px.y += normal.sample(rng);
        }
    }

    Ok(RenderedFrame {
        landmarks: LandmarkSet2D::new(pixels, spec.image_width, spec.image_height)?,
        truth_pose: *pose,
        fake,
    })
}

/// A fully generated scene: the shared model plus per-frame landmarks,
/// labels, subjects, and ground-truth poses.
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub model: FaceModel3D,
    pub frames: Vec<GeneratedFrame>,
}

#[derive(Debug, Clone)]
pub struct GeneratedFrame {
    pub frame_id: String,
    pub label: Label,
    /// Target subject first; fake frames also carry the source subject.
    pub subjects: Vec<String>,
    pub landmarks: LandmarkSet2D,
    pub truth_pose: HeadPose,
}

/// Generate a balanced scene: alternating labels, subjects assigned
/// round-robin within per-class pools so each subject keeps a fixed class
/// context, and every frame seeded independently from the spec seed.
pub fn generate_scene(spec: &SceneSpec) -> Result<GeneratedScene, Error> {
    spec.validate()?;
    if spec.frame_count % 2 != 0 {
        return Err(Error::SpecInvalid(
            "balanced output requires an even frame count".into(),
        ));
    }

    let model = generate_model(spec.seed);
    let cam = spec.camera();

    let subjects: Vec<String> = (0..spec.subject_count).map(|i| format!("s{i:02}")).collect();
    let fake_pool: Vec<usize> = (0..spec.subject_count.div_ceil(2)).collect();
    let auth_pool: Vec<usize> = if spec.subject_count == 1 {
        alloc::vec![0]
    } else {
        (spec.subject_count.div_ceil(2)..spec.subject_count).collect()
    };

    let fields: Vec<DeformField> = (0..spec.subject_count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, 1, i as u64));
            DeformField::from_rng(&mut rng, spec.subject_deformation)
        })
        .collect();

    let mut frames = Vec::with_capacity(spec.frame_count);
    for idx in 0..spec.frame_count {
        let fake = idx % 2 == 1;
        let pool = if fake { &fake_pool } else { &auth_pool };
        let target = pool[(idx / 2) % pool.len()];
        let mut subject_ids = alloc::vec![subjects[target].clone()];
        if fake {
            let source = pool[(idx / 2 + 1) % pool.len()];
            if source != target {
                subject_ids.push(subjects[source].clone());
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, 2, idx as u64));
        const MAX_RENDER_TRIES: usize = 100;
        let mut rendered = None;
        for _ in 0..MAX_RENDER_TRIES {
            let pose = sample_pose(spec, &model, &mut rng)?;
            match render_frame(&model, &fields[target], &pose, &cam, spec, fake, &mut rng) {
                Ok(frame) => {
                    rendered = Some(frame);
                    break;
                }
                Err(Error::ProjectionSingularity { .. }) => continue,
                Err(other) => return Err(other),
            }
        }
        let rendered = rendered.ok_or_else(|| {
            Error::SpecInvalid("could not render a frame with positive depths".into())
        })?;

        frames.push(GeneratedFrame {
            frame_id: format!("f{idx:05}"),
            label: if fake { Label::Fake } else { Label::Authentic },
            subjects: subject_ids,
            landmarks: rendered.landmarks,
            truth_pose: rendered.truth_pose,
        });
    }

    Ok(GeneratedScene { model, frames })
}

/// SplitMix64-style seed derivation so subject, frame, and model streams
/// never collide.
fn mix_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
