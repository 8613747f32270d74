//! Per-pixel ray casting against object boxes and the floor plane.

use super::{
    CameraMount, MountId, RobotState, SensorFrame, WorldScene, BACKGROUND_COLOR, DEPTH_QUANT,
    FLOOR_COLOR, IMG_HEIGHT, IMG_WIDTH, MAX_RANGE,
};
use crate::geometry::{agent_to_world, camera_to_agent, euler_to_rotation, Mat3, Vec3};

const RAY_EPS: f64 = 1e-9;

/// Ray/axis-aligned-box entry parameter, or `None` when the ray misses.
/// `t` is measured in units of the (unnormalized) direction vector.
fn ray_box_entry(origin: Vec3, dir: Vec3, bmin: Vec3, bmax: Vec3) -> Option<f64> {
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for axis in 0..3 {
        let (o, d, lo, hi) = match axis {
            0 => (origin.x, dir.x, bmin.x, bmax.x),
            1 => (origin.y, dir.y, bmin.y, bmax.y),
            _ => (origin.z, dir.z, bmin.z, bmax.z),
        };
        if d.abs() < 1e-12 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let t1 = (lo - o) / d;
        let t2 = (hi - o) / d;
        t_enter = t_enter.max(t1.min(t2));
        t_exit = t_exit.min(t1.max(t2));
        if t_enter > t_exit {
            return None;
        }
    }
    (t_enter > RAY_EPS).then_some(t_enter)
}

fn quantize_depth(depth: f64) -> f64 {
    (depth / DEPTH_QUANT).round() * DEPTH_QUANT
}

/// Render one sensor frame from the given mount. Deterministic: identical
/// inputs produce identical frames.
pub fn render(scene: &WorldScene, robot: &RobotState, mount: MountId) -> SensorFrame {
    let cam: &CameraMount = robot.mount(mount);
    let intr = cam.intrinsics;
    let pose = robot.pose;

    // Camera center and the linear camera-direction-to-world map. The chain
    // is affine, so directions transform by the difference of two points.
    let origin = agent_to_world(&pose, camera_to_agent(&cam.extrinsics, Vec3::ZERO));
    let flip = Mat3::from_cols(
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    );
    let dir_map = euler_to_rotation(pose.euler)
        .mul_mat(&flip)
        .mul_mat(&cam.extrinsics.rotation);

    let boxes: Vec<_> = scene
        .objects
        .iter()
        .map(|o| (o.id, o.box_min(), o.box_max(), o.category.color()))
        .collect();

    let n = (IMG_WIDTH * IMG_HEIGHT) as usize;
    let mut rgb = vec![BACKGROUND_COLOR; n];
    let mut depth = vec![0.0; n];
    let mut segmentation = vec![0u32; n];

    for j in 0..IMG_HEIGHT {
        for i in 0..IMG_WIDTH {
            // Ray through the integer pixel grid; with d_c.z = 1 the entry
            // parameter equals the camera-frame depth.
            let d_cam = Vec3::new(
                (i as f64 - intr.cx) / intr.fx,
                (j as f64 - intr.cy) / intr.fy,
                1.0,
            );
            let d_world = dir_map.mul_vec(d_cam);

            let mut best_t = MAX_RANGE;
            let mut best_id = 0u32;
            let mut best_color = BACKGROUND_COLOR;

            for (id, bmin, bmax, color) in &boxes {
                if let Some(t) = ray_box_entry(origin, d_world, *bmin, *bmax) {
                    if t < best_t {
                        best_t = t;
                        best_id = *id;
                        best_color = *color;
                    }
                }
            }

            // Floor plane z = 0, clipped to the cafe bounds.
            if best_id == 0 && d_world.z < -1e-12 {
                let t = -origin.z / d_world.z;
                if t > RAY_EPS && t < best_t {
                    let hit_x = origin.x + t * d_world.x;
                    let hit_y = origin.y + t * d_world.y;
                    if scene.bounds.contains(hit_x, hit_y) {
                        best_t = t;
                        best_color = FLOOR_COLOR;
                    }
                }
            }

            let idx = (j * IMG_WIDTH + i) as usize;
            if best_id != 0 || best_color != BACKGROUND_COLOR {
                rgb[idx] = best_color;
                depth[idx] = quantize_depth(best_t);
                segmentation[idx] = best_id;
            }
        }
    }

    SensorFrame {
        width: IMG_WIDTH,
        height: IMG_HEIGHT,
        rgb,
        depth,
        segmentation,
        intr,
        extr: cam.extrinsics,
        pose,
    }
}

/// Four head-camera captures at the current heading plus 90/180/270 degrees.
/// The robot is left untouched.
pub fn observe_four_directions(scene: &WorldScene, robot: &RobotState) -> [SensorFrame; 4] {
    let base = robot.pose.heading();
    std::array::from_fn(|k| {
        let mut looker = robot.clone();
        looker.pose =
            crate::geometry::RobotPose::planar(
                robot.pose.translation.x,
                robot.pose.translation.y,
                base + k as f64 * std::f64::consts::FRAC_PI_2,
            );
        render(scene, &looker, MountId::Head)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simworld::load_scene;

    fn scene_with(objects: &str) -> WorldScene {
        let json = format!(r#"{{ "bounds": [-10, -10, 10, 10], "objects": [{objects}] }}"#);
        load_scene(json.as_bytes()).unwrap()
    }

    fn level_head_robot(x: f64, y: f64, heading: f64) -> RobotState {
        // Zero-pitch head camera simplifies analytic expectations.
        let mut robot = RobotState::new(x, y, heading);
        robot.mounts[0].extrinsics.rotation = super::super::mount_rotation(0.0);
        robot
    }

    #[test]
    fn empty_scene_renders_background_and_floor() {
        let scene = scene_with("");
        let robot = RobotState::new(0.0, 0.0, 0.0);
        let frame = render(&scene, &robot, MountId::Head);
        assert!(frame.segmentation.iter().all(|&s| s == 0));
        // Downward-pitched head camera must see some floor in range.
        assert!(frame.depth.iter().any(|&d| d > 0.0));
    }

    #[test]
    fn cube_ahead_center_pixel_hits_front_face() {
        // 1 m cube centered 3 m ahead on the optical axis: front face at 2.5 m.
        let scene = scene_with(
            r#"{ "id": 7, "category": "cup", "position": [3.1, 0, 1.35], "half_extents": [0.5, 0.5, 0.5] }"#,
        );
        let robot = level_head_robot(0.0, 0.0, 0.0);
        let frame = render(&scene, &robot, MountId::Head);
        // Optical axis passes through the integer pixel at (cx, cy) rounded.
        let (ci, cj) = (frame.intr.cx.round() as u32, frame.intr.cy.round() as u32);
        assert_eq!(frame.seg_at(ci, cj), 7);
        let expected = 3.1 - 0.5 - 0.1; // box front minus camera forward offset
        assert!((frame.depth_at(ci, cj) - expected).abs() < 2e-3);
    }

    #[test]
    fn object_behind_robot_is_not_rendered() {
        let scene = scene_with(
            r#"{ "id": 3, "category": "chair", "position": [-2, 0, 0.25], "half_extents": [0.2, 0.2, 0.25] }"#,
        );
        let robot = RobotState::new(0.0, 0.0, 0.0);
        let frame = render(&scene, &robot, MountId::Head);
        assert!(frame.segmentation.iter().all(|&s| s != 3));
    }

    #[test]
    fn object_beyond_range_is_not_rendered() {
        let scene = scene_with(
            r#"{ "id": 3, "category": "table", "position": [6, 0, 0.36], "half_extents": [0.5, 0.5, 0.36] }"#,
        );
        let robot = RobotState::new(0.0, 0.0, 0.0);
        let frame = render(&scene, &robot, MountId::Head);
        assert!(frame.segmentation.iter().all(|&s| s == 0));
    }

    #[test]
    fn render_is_deterministic() {
        let scene = scene_with(
            r#"{ "id": 1, "category": "table", "position": [2, 0.5, 0.36], "half_extents": [0.6, 0.45, 0.36] },
               { "id": 2, "category": "cup", "position": [2, 0.5, 0.77], "half_extents": [0.04, 0.04, 0.05], "surface_of": 1 }"#,
        );
        let robot = RobotState::new(0.0, 0.0, 0.2);
        assert_eq!(render(&scene, &robot, MountId::Head), render(&scene, &robot, MountId::Head));
    }

    #[test]
    fn depth_positive_wherever_segmented() {
        let scene = scene_with(
            r#"{ "id": 1, "category": "table", "position": [1.8, 0, 0.36], "half_extents": [0.6, 0.45, 0.36] }"#,
        );
        let robot = RobotState::new(0.0, 0.0, 0.0);
        for frame in observe_four_directions(&scene, &robot) {
            for idx in 0..frame.depth.len() {
                if frame.segmentation[idx] != 0 {
                    assert!(frame.depth[idx] > 0.0);
                }
            }
        }
    }

    #[test]
    fn observe_four_directions_restores_heading_and_sees_all_sides() {
        let scene = scene_with(
            r#"{ "id": 1, "category": "chair", "position": [1.5, 0, 0.25], "half_extents": [0.2, 0.2, 0.25] },
               { "id": 2, "category": "chair", "position": [0, 1.5, 0.25], "half_extents": [0.2, 0.2, 0.25] },
               { "id": 3, "category": "chair", "position": [-1.5, 0, 0.25], "half_extents": [0.2, 0.2, 0.25] },
               { "id": 4, "category": "chair", "position": [0, -1.5, 0.25], "half_extents": [0.2, 0.2, 0.25] }"#,
        );
        let robot = RobotState::new(0.0, 0.0, 0.0);
        let frames = observe_four_directions(&scene, &robot);
        for (k, frame) in frames.iter().enumerate() {
            let want = (k + 1) as u32;
            assert!(
                frame.segmentation.contains(&want),
                "direction {k} should see chair {want}"
            );
        }
    }

    #[test]
    fn pixel_back_projection_lands_inside_object_box() {
        use crate::geometry::{pixel_to_world, PixelObservation};
        let scene = scene_with(
            r#"{ "id": 9, "category": "table", "position": [1.8, 0.3, 0.36], "half_extents": [0.6, 0.45, 0.36] }"#,
        );
        let robot = RobotState::new(0.0, 0.0, 0.1);
        let frame = render(&scene, &robot, MountId::Head);
        let obj = scene.object(9).unwrap();
        let mut checked = 0;
        for j in 0..frame.height {
            for i in 0..frame.width {
                if frame.seg_at(i, j) != 9 {
                    continue;
                }
                let obs = PixelObservation::new(i, j, frame.depth_at(i, j));
                let p = pixel_to_world(&frame.intr, &frame.extr, &frame.pose, &obs).unwrap();
                // Within the box inflated by one depth-quantization cell
                // (scaled by the ray obliquity, bounded here by 3x).
                let tol = 3.0 * DEPTH_QUANT + 1e-9;
                assert!(
                    p.x >= obj.box_min().x - tol && p.x <= obj.box_max().x + tol,
                    "x out of box: {p:?}"
                );
                assert!(p.y >= obj.box_min().y - tol && p.y <= obj.box_max().y + tol);
                assert!(p.z >= obj.box_min().z - tol && p.z <= obj.box_max().z + tol);
                checked += 1;
            }
        }
        assert!(checked > 50, "expected a sizable blob, got {checked} pixels");
    }
}
