//! Coordinate transforms between pixel, camera, robot-body ("ginger") and
//! world frames, plus Euler-angle rotation construction.
//!
//! Conventions: `i` is the pixel column (paired with `cx`), `j` the pixel row,
//! origin top-left. Depth is the z-distance in the camera frame, not the ray
//! length. Angles are radians everywhere inside the library; degrees only at
//! CLI boundaries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::f64::consts::PI;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid observation: depth must be positive, got {0}")]
    InvalidObservation(f64),
}

/// 3D vector, meters unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Horizontal (floor-plane) distance to another point.
    pub fn dist_xy(self, o: Vec3) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3 { rows }
    }

    /// Columns given as the images of the basis vectors.
    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3 {
            rows: [
                [c0.x, c1.x, c2.x],
                [c0.y, c1.y, c2.y],
                [c0.z, c1.z, c2.z],
            ],
        }
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum();
            }
        }
        Mat3 { rows: out }
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn det(&self) -> f64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Max absolute entry of `self * self^T - I`; 0 for perfectly orthonormal.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.mul_mat(&self.transpose());
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.rows[i][j] - expect).abs());
            }
        }
        worst
    }
}

/// Pinhole intrinsics, pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        assert!(fx > 0.0 && fy > 0.0, "focal lengths must be positive");
        CameraIntrinsics { fx, fy, cx, cy }
    }
}

/// Camera-to-agent transform. The rotation is orthonormal; its determinant
/// may be -1 because the agent-to-world step flips one axis and the full
/// camera-to-world chain must preserve orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraExtrinsics {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl CameraExtrinsics {
    pub fn identity() -> Self {
        CameraExtrinsics {
            rotation: Mat3::IDENTITY,
            translation: Vec3::ZERO,
        }
    }
}

/// Intrinsic Euler angles (alpha, beta, gamma), radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }
}

/// Normalize an angle to the canonical (-pi, pi] range.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Robot body pose: Euler angles plus a world translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPose {
    pub euler: EulerAngles,
    pub translation: Vec3,
}

impl RobotPose {
    pub fn new(euler: EulerAngles, translation: Vec3) -> Self {
        RobotPose { euler, translation }
    }

    /// Planar pose: position on the floor plus heading about z.
    pub fn planar(x: f64, y: f64, heading: f64) -> Self {
        RobotPose {
            euler: EulerAngles::new(0.0, 0.0, normalize_angle(heading)),
            translation: Vec3::new(x, y, 0.0),
        }
    }

    pub fn heading(&self) -> f64 {
        self.euler.gamma
    }

    pub fn normalized(mut self) -> Self {
        self.euler.alpha = normalize_angle(self.euler.alpha);
        self.euler.beta = normalize_angle(self.euler.beta);
        self.euler.gamma = normalize_angle(self.euler.gamma);
        self
    }
}

/// One pixel with its depth reading. `i` is the column, `j` the row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelObservation {
    pub i: u32,
    pub j: u32,
    pub depth: f64,
}

impl PixelObservation {
    pub fn new(i: u32, j: u32, depth: f64) -> Self {
        PixelObservation { i, j, depth }
    }
}

/// Which body axis is mirrored when mapping body coordinates to world
/// coordinates. The default mirrors y; mirroring x instead is available for
/// experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisFlip {
    #[default]
    NegateY,
    NegateX,
}

impl AxisFlip {
    fn apply(self, p: Vec3) -> Vec3 {
        match self {
            AxisFlip::NegateY => Vec3::new(p.x, -p.y, p.z),
            AxisFlip::NegateX => Vec3::new(-p.x, p.y, p.z),
        }
    }
}

/// Back-project a pixel with depth into camera coordinates.
pub fn pixel_to_camera(
    intr: &CameraIntrinsics,
    obs: &PixelObservation,
) -> Result<Vec3, GeometryError> {
    if !(obs.depth > 0.0) {
        return Err(GeometryError::InvalidObservation(obs.depth));
    }
    Ok(Vec3::new(
        (obs.i as f64 - intr.cx) / intr.fx * obs.depth,
        (obs.j as f64 - intr.cy) / intr.fy * obs.depth,
        obs.depth,
    ))
}

/// Rigid transform from camera to agent coordinates: `R * p + T`.
pub fn camera_to_agent(extr: &CameraExtrinsics, p_camera: Vec3) -> Vec3 {
    extr.rotation.mul_vec(p_camera) + extr.translation
}

fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
}

fn rot_y(b: f64) -> Mat3 {
    let (s, c) = b.sin_cos();
    Mat3::from_rows([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
}

fn rot_z(g: f64) -> Mat3 {
    let (s, c) = g.sin_cos();
    Mat3::from_rows([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Rotation from Euler angles, composed as `Rz(gamma) * Ry(beta) * Rx(alpha)`.
pub fn euler_to_rotation(angles: EulerAngles) -> Mat3 {
    rot_z(angles.gamma)
        .mul_mat(&rot_y(angles.beta))
        .mul_mat(&rot_x(angles.alpha))
}

/// Agent (body) to world transform: `R_g * flip(p) + T_g`, mirroring the
/// y component by default.
pub fn agent_to_world(pose: &RobotPose, p_agent: Vec3) -> Vec3 {
    agent_to_world_with(AxisFlip::NegateY, pose, p_agent)
}

pub fn agent_to_world_with(flip: AxisFlip, pose: &RobotPose, p_agent: Vec3) -> Vec3 {
    euler_to_rotation(pose.euler).mul_vec(flip.apply(p_agent)) + pose.translation
}

/// Full back-projection chain pixel -> camera -> agent -> world.
pub fn pixel_to_world(
    intr: &CameraIntrinsics,
    extr: &CameraExtrinsics,
    pose: &RobotPose,
    obs: &PixelObservation,
) -> Result<Vec3, GeometryError> {
    pixel_to_world_with(AxisFlip::NegateY, intr, extr, pose, obs)
}

pub fn pixel_to_world_with(
    flip: AxisFlip,
    intr: &CameraIntrinsics,
    extr: &CameraExtrinsics,
    pose: &RobotPose,
    obs: &PixelObservation,
) -> Result<Vec3, GeometryError> {
    let p_camera = pixel_to_camera(intr, obs)?;
    let p_agent = camera_to_agent(extr, p_camera);
    Ok(agent_to_world_with(flip, pose, p_agent))
}

/// Inverse of `agent_to_world`.
pub fn world_to_agent(pose: &RobotPose, p_world: Vec3) -> Vec3 {
    world_to_agent_with(AxisFlip::NegateY, pose, p_world)
}

pub fn world_to_agent_with(flip: AxisFlip, pose: &RobotPose, p_world: Vec3) -> Vec3 {
    let rot = euler_to_rotation(pose.euler).transpose();
    flip.apply(rot.mul_vec(p_world - pose.translation))
}

/// Inverse of `camera_to_agent`.
pub fn agent_to_camera(extr: &CameraExtrinsics, p_agent: Vec3) -> Vec3 {
    extr.rotation.transpose().mul_vec(p_agent - extr.translation)
}

/// Project a world point to continuous pixel coordinates plus depth.
/// Returns `None` for points on or behind the image plane.
pub fn world_to_pixel(
    intr: &CameraIntrinsics,
    extr: &CameraExtrinsics,
    pose: &RobotPose,
    p_world: Vec3,
) -> Option<(f64, f64, f64)> {
    world_to_pixel_with(AxisFlip::NegateY, intr, extr, pose, p_world)
}

pub fn world_to_pixel_with(
    flip: AxisFlip,
    intr: &CameraIntrinsics,
    extr: &CameraExtrinsics,
    pose: &RobotPose,
    p_world: Vec3,
) -> Option<(f64, f64, f64)> {
    let p_camera = agent_to_camera(extr, world_to_agent_with(flip, pose, p_world));
    if p_camera.z <= 0.0 {
        return None;
    }
    Some((
        p_camera.x / p_camera.z * intr.fx + intr.cx,
        p_camera.y / p_camera.z * intr.fy + intr.cy,
        p_camera.z,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-12;

    fn assert_vec3_eq(got: Vec3, want: Vec3, tol: f64) {
        assert!(
            got.dist(want) <= tol,
            "expected {want:?}, got {got:?} (err {})",
            got.dist(want)
        );
    }

    #[test]
    fn pixel_to_camera_principal_point_ray() {
        let intr = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0);
        let p = pixel_to_camera(&intr, &PixelObservation::new(0, 0, 2.0)).unwrap();
        assert_vec3_eq(p, Vec3::new(0.0, 0.0, 2.0), EPS);
    }

    #[test]
    fn pixel_to_camera_hand_evaluated() {
        let intr = CameraIntrinsics::new(2.0, 2.0, 1.0, 1.0);
        let p = pixel_to_camera(&intr, &PixelObservation::new(3, 1, 4.0)).unwrap();
        assert_vec3_eq(p, Vec3::new(4.0, 0.0, 4.0), EPS);
        let p = pixel_to_camera(&intr, &PixelObservation::new(0, 3, 2.0)).unwrap();
        assert_vec3_eq(p, Vec3::new(-1.0, 2.0, 2.0), EPS);
    }

    #[test]
    fn pixel_to_camera_rejects_nonpositive_depth() {
        let intr = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0);
        for depth in [0.0, -1.0] {
            let err = pixel_to_camera(&intr, &PixelObservation::new(0, 0, depth));
            assert_eq!(err, Err(GeometryError::InvalidObservation(depth)));
        }
    }

    #[test]
    fn camera_to_agent_identity_and_translation() {
        let extr = CameraExtrinsics::identity();
        assert_vec3_eq(
            camera_to_agent(&extr, Vec3::new(1.0, 2.0, 3.0)),
            Vec3::new(1.0, 2.0, 3.0),
            EPS,
        );
        let extr = CameraExtrinsics {
            rotation: Mat3::IDENTITY,
            translation: Vec3::new(0.0, 0.0, 1.2),
        };
        assert_vec3_eq(
            camera_to_agent(&extr, Vec3::new(0.0, 0.0, 2.0)),
            Vec3::new(0.0, 0.0, 3.2),
            EPS,
        );
    }

    #[test]
    fn camera_to_agent_quarter_turn_about_z() {
        let extr = CameraExtrinsics {
            rotation: euler_to_rotation(EulerAngles::new(0.0, 0.0, std::f64::consts::FRAC_PI_2)),
            translation: Vec3::ZERO,
        };
        assert_vec3_eq(
            camera_to_agent(&extr, Vec3::new(1.0, 0.0, 0.0)),
            Vec3::new(0.0, 1.0, 0.0),
            1e-9,
        );
    }

    #[test]
    fn euler_to_rotation_axis_cases() {
        assert_eq!(euler_to_rotation(EulerAngles::new(0.0, 0.0, 0.0)), Mat3::IDENTITY);
        let r = euler_to_rotation(EulerAngles::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        assert_vec3_eq(r.mul_vec(Vec3::new(1.0, 0.0, 0.0)), Vec3::new(0.0, 1.0, 0.0), 1e-9);
        let r = euler_to_rotation(EulerAngles::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0));
        assert_vec3_eq(r.mul_vec(Vec3::new(0.0, 1.0, 0.0)), Vec3::new(0.0, 0.0, 1.0), 1e-9);
    }

    #[test]
    fn euler_composition_order_is_z_y_x() {
        let angles = EulerAngles::new(0.3, -0.7, 1.1);
        let want = rot_z(angles.gamma)
            .mul_mat(&rot_y(angles.beta))
            .mul_mat(&rot_x(angles.alpha));
        assert_eq!(euler_to_rotation(angles), want);
    }

    #[test]
    fn agent_to_world_negates_y() {
        let pose = RobotPose::planar(1.0, 2.0, 0.0);
        assert_vec3_eq(
            agent_to_world(&pose, Vec3::new(0.0, 1.0, 0.0)),
            Vec3::new(1.0, 1.0, 0.0),
            EPS,
        );
        let pose = RobotPose::planar(0.0, 0.0, 0.0);
        assert_vec3_eq(
            agent_to_world(&pose, Vec3::new(3.0, 0.0, 4.0)),
            Vec3::new(3.0, 0.0, 4.0),
            EPS,
        );
        let pose = RobotPose::planar(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        assert_vec3_eq(
            agent_to_world(&pose, Vec3::new(1.0, 0.0, 0.0)),
            Vec3::new(0.0, 1.0, 0.0),
            1e-9,
        );
    }

    #[test]
    fn axis_flip_alternative_negates_x() {
        let pose = RobotPose::planar(0.0, 0.0, 0.0);
        assert_vec3_eq(
            agent_to_world_with(AxisFlip::NegateX, &pose, Vec3::new(1.0, 2.0, 3.0)),
            Vec3::new(-1.0, 2.0, 3.0),
            EPS,
        );
    }

    #[test]
    fn pixel_to_world_matches_composition() {
        let intr = CameraIntrinsics::new(90.0, 90.0, 63.5, 47.5);
        let extr = CameraExtrinsics {
            rotation: euler_to_rotation(EulerAngles::new(0.2, -0.1, 0.4)),
            translation: Vec3::new(0.1, 0.0, 1.3),
        };
        let pose = RobotPose::planar(2.0, -1.0, 0.8);
        let obs = PixelObservation::new(17, 80, 2.75);
        let fused = pixel_to_world(&intr, &extr, &pose, &obs).unwrap();
        let composed = agent_to_world(
            &pose,
            camera_to_agent(&extr, pixel_to_camera(&intr, &obs).unwrap()),
        );
        assert_vec3_eq(fused, composed, 1e-12);
    }

    #[test]
    fn pixel_to_world_propagates_depth_error() {
        let intr = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0);
        let extr = CameraExtrinsics::identity();
        let pose = RobotPose::planar(0.0, 0.0, 0.0);
        let err = pixel_to_world(&intr, &extr, &pose, &PixelObservation::new(0, 0, 0.0));
        assert_eq!(err, Err(GeometryError::InvalidObservation(0.0)));
    }

    #[test]
    fn identity_chain_recovers_depth_on_axis() {
        let intr = CameraIntrinsics::new(50.0, 50.0, 32.0, 24.0);
        let extr = CameraExtrinsics::identity();
        let pose = RobotPose::planar(0.0, 0.0, 0.0);
        let obs = PixelObservation::new(32, 24, 3.5);
        let p = pixel_to_world(&intr, &extr, &pose, &obs).unwrap();
        assert_vec3_eq(p, Vec3::new(0.0, 0.0, 3.5), EPS);
    }

    #[test]
    fn rotation_orthonormality_over_random_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let angles = EulerAngles::new(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            let r = euler_to_rotation(angles);
            assert!(r.orthonormality_error() <= 1e-9);
            assert!((r.det() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn world_to_pixel_inverts_pixel_to_world() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let intr = CameraIntrinsics::new(90.0, 95.0, 63.5, 47.5);
        for _ in 0..200 {
            let extr = CameraExtrinsics {
                rotation: euler_to_rotation(EulerAngles::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )),
                translation: Vec3::new(
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(0.5..1.5),
                ),
            };
            let pose = RobotPose::planar(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.2..3.2),
            );
            let obs = PixelObservation::new(
                rng.random_range(0..128),
                rng.random_range(0..96),
                rng.random_range(0.3..5.0),
            );
            let world = pixel_to_world(&intr, &extr, &pose, &obs).unwrap();
            let (i, j, depth) = world_to_pixel(&intr, &extr, &pose, world).unwrap();
            assert!((i - obs.i as f64).abs() < 1e-6);
            assert!((j - obs.j as f64).abs() < 1e-6);
            assert!((depth - obs.depth).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn depth_homogeneity(i in 0u32..128, j in 0u32..96, depth in 0.01f64..10.0, e in 0u32..6) {
            // Power-of-two factors make the scaling claim exact in floating point.
            let k = f64::from(1u32 << e);
            let intr = CameraIntrinsics::new(91.0, 91.0, 63.5, 47.5);
            let base = pixel_to_camera(&intr, &PixelObservation::new(i, j, depth)).unwrap();
            let scaled = pixel_to_camera(&intr, &PixelObservation::new(i, j, depth * k)).unwrap();
            prop_assert_eq!(scaled, base.scale(k));
        }

        #[test]
        fn normalize_angle_is_canonical(a in -100.0f64..100.0) {
            let n = normalize_angle(a);
            prop_assert!(n > -PI - 1e-12 && n <= PI + 1e-12);
            // Same direction: sin/cos agree.
            prop_assert!((n.sin() - a.sin()).abs() < 1e-9);
            prop_assert!((n.cos() - a.cos()).abs() < 1e-9);
        }
    }
}
