//! Deterministic desk-scale cafe world: scene model, robot state, synthetic
//! RGB/depth/segmentation cameras, planar motion with collision sweeps, and
//! the state-mutation hook used by skills.

mod effect;
mod motion;
mod render;
mod scene;

pub use effect::{apply_effect, EffectError, WorldEffect};
pub use motion::{move_to, path_clear, MotionError, MoveOutcome, MoveResult};
pub use render::{observe_four_directions, render};
pub use scene::{load_scene, scene_to_json, SceneError};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    euler_to_rotation, CameraExtrinsics, CameraIntrinsics, EulerAngles, Mat3, RobotPose, Vec3,
};

/// Default sensor image width, pixels.
pub const IMG_WIDTH: u32 = 128;
/// Default sensor image height, pixels.
pub const IMG_HEIGHT: u32 = 96;
/// Horizontal field of view, degrees (? 70 deg at the default resolution).
pub const FOV_DEG: f64 = 70.0;
/// Depth sensor maximum range, meters. Hits beyond the range read as background.
pub const MAX_RANGE: f64 = 3.5;
/// Depth output quantization step, meters (1 mm).
pub const DEPTH_QUANT: f64 = 1e-3;
/// Robot footprint radius for collision sweeps, meters.
pub const ROBOT_RADIUS: f64 = 0.15;

/// Fixed category palette. Thirteen categories cover the desk-scale cafe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Table,
    Chair,
    CoffeeMachine,
    Kettle,
    Cup,
    Bread,
    Milk,
    AirConditioner,
    LightSwitch,
    Curtain,
    Mop,
    Towel,
    FloorPatch,
}

pub const ALL_CATEGORIES: [Category; 13] = [
    Category::Table,
    Category::Chair,
    Category::CoffeeMachine,
    Category::Kettle,
    Category::Cup,
    Category::Bread,
    Category::Milk,
    Category::AirConditioner,
    Category::LightSwitch,
    Category::Curtain,
    Category::Mop,
    Category::Towel,
    Category::FloorPatch,
];

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Table => "table",
            Category::Chair => "chair",
            Category::CoffeeMachine => "coffee_machine",
            Category::Kettle => "kettle",
            Category::Cup => "cup",
            Category::Bread => "bread",
            Category::Milk => "milk",
            Category::AirConditioner => "air_conditioner",
            Category::LightSwitch => "light_switch",
            Category::Curtain => "curtain",
            Category::Mop => "mop",
            Category::Towel => "towel",
            Category::FloorPatch => "floor_patch",
        }
    }

    pub fn from_name(name: &str) -> Option<Category> {
        ALL_CATEGORIES.iter().copied().find(|c| c.name() == name)
    }

    /// Fixed render color, one per category.
    pub fn color(self) -> [u8; 3] {
        match self {
            Category::Table => [139, 69, 19],
            Category::Chair => [205, 133, 63],
            Category::CoffeeMachine => [70, 70, 80],
            Category::Kettle => [192, 192, 200],
            Category::Cup => [250, 250, 250],
            Category::Bread => [222, 184, 135],
            Category::Milk => [245, 245, 220],
            Category::AirConditioner => [176, 196, 222],
            Category::LightSwitch => [255, 215, 0],
            Category::Curtain => [178, 34, 34],
            Category::Mop => [85, 107, 47],
            Category::Towel => [70, 130, 180],
            Category::FloorPatch => [120, 100, 90],
        }
    }

    /// Floor patches are painted regions, not obstacles.
    pub fn traversable(self) -> bool {
        matches!(self, Category::FloorPatch)
    }

    /// Categories that sit on table surfaces.
    pub fn tabletop(self) -> bool {
        matches!(
            self,
            Category::CoffeeMachine
                | Category::Kettle
                | Category::Cup
                | Category::Bread
                | Category::Milk
                | Category::Towel
        )
    }

    /// Declared mutable state keys with their value kinds and defaults.
    pub fn state_schema(self) -> &'static [StateField] {
        const AC: &[StateField] = &[
            StateField { key: "power", kind: StateKind::OnOff, default: "off" },
            StateField { key: "level", kind: StateKind::Level, default: "3" },
        ];
        const LIGHT: &[StateField] =
            &[StateField { key: "power", kind: StateKind::OnOff, default: "off" }];
        const CURTAIN: &[StateField] =
            &[StateField { key: "open", kind: StateKind::Bool, default: "false" }];
        const CHAIR: &[StateField] =
            &[StateField { key: "aligned", kind: StateKind::Bool, default: "true" }];
        const TABLE: &[StateField] =
            &[StateField { key: "dirty", kind: StateKind::Bool, default: "false" }];
        const PATCH: &[StateField] =
            &[StateField { key: "dirty", kind: StateKind::Bool, default: "true" }];
        const COFFEE: &[StateField] =
            &[StateField { key: "brewed", kind: StateKind::Bool, default: "false" }];
        const KETTLE: &[StateField] =
            &[StateField { key: "poured", kind: StateKind::Bool, default: "false" }];
        match self {
            Category::AirConditioner => AC,
            Category::LightSwitch => LIGHT,
            Category::Curtain => CURTAIN,
            Category::Chair => CHAIR,
            Category::Table => TABLE,
            Category::FloorPatch => PATCH,
            Category::CoffeeMachine => COFFEE,
            Category::Kettle => KETTLE,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StateField {
    pub key: &'static str,
    pub kind: StateKind,
    pub default: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Bool,
    OnOff,
    Level,
}

impl StateKind {
    pub fn valid(self, value: &str) -> bool {
        match self {
            StateKind::Bool => matches!(value, "true" | "false"),
            StateKind::OnOff => matches!(value, "on" | "off"),
            StateKind::Level => matches!(value, "1" | "2" | "3" | "4" | "5"),
        }
    }
}

/// Axis-aligned rectangle on the floor plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Rect { min_x, min_y, max_x, max_y }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    pub fn expand(&self, r: f64) -> Rect {
        Rect::new(self.min_x - r, self.min_y - r, self.max_x + r, self.max_y + r)
    }

    pub fn shrink(&self, r: f64) -> Rect {
        self.expand(-r)
    }

    pub fn overlaps(&self, o: &Rect) -> bool {
        self.min_x < o.max_x && o.min_x < self.max_x && self.min_y < o.max_y && o.min_y < self.max_y
    }

    /// Distance from a point to the rectangle (0 inside).
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let dx = (self.min_x - x).max(0.0).max(x - self.max_x);
        let dy = (self.min_y - y).max(0.0).max(y - self.max_y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.min_x + self.max_x) / 2.0, (self.min_y + self.max_y) / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// One placed object: an axis-aligned box centered at `position`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: u32,
    pub category: Category,
    /// Box center, world meters.
    pub position: Vec3,
    /// Box half-extents, meters.
    pub half_extents: Vec3,
    /// Id of the supporting table, if any.
    pub surface_of: Option<u32>,
    /// Mutable object state per the category schema.
    pub state: BTreeMap<String, String>,
}

impl ObjectInstance {
    pub fn footprint(&self) -> Rect {
        Rect::new(
            self.position.x - self.half_extents.x,
            self.position.y - self.half_extents.y,
            self.position.x + self.half_extents.x,
            self.position.y + self.half_extents.y,
        )
    }

    pub fn box_min(&self) -> Vec3 {
        self.position - self.half_extents
    }

    pub fn box_max(&self) -> Vec3 {
        self.position + self.half_extents
    }

    pub fn top_z(&self) -> f64 {
        self.position.z + self.half_extents.z
    }

    pub fn state_bool(&self, key: &str) -> bool {
        self.state.get(key).map(|v| v == "true").unwrap_or(false)
    }
}

/// Ground-truth cafe scene. The floor is the plane z = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldScene {
    pub bounds: Rect,
    pub objects: Vec<ObjectInstance>,
}

impl WorldScene {
    pub fn object(&self, id: u32) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_mut(&mut self, id: u32) -> Option<&mut ObjectInstance> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    pub fn objects_of(&self, category: Category) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter(move |o| o.category == category)
    }

    /// Segmentation id to category mapping, the agent's item catalog.
    pub fn category_map(&self) -> BTreeMap<u32, Category> {
        self.objects.iter().map(|o| (o.id, o.category)).collect()
    }

    /// True when a robot disc of `ROBOT_RADIUS` centered at (x, y) collides
    /// with nothing and stays inside the bounds.
    pub fn is_walkable(&self, x: f64, y: f64) -> bool {
        if !self.bounds.shrink(ROBOT_RADIUS).contains(x, y) {
            return false;
        }
        !self
            .objects
            .iter()
            .filter(|o| !o.category.traversable())
            .any(|o| o.footprint().expand(ROBOT_RADIUS).contains(x, y))
    }

    /// Rasterized walkable mask at the given resolution (cells per meter side
    /// length `cell`), row-major with `(col, row) = (x, y)` indices.
    pub fn walkable_mask(&self, cell: f64) -> (usize, usize, Vec<bool>) {
        let cols = (self.bounds.width() / cell).ceil() as usize;
        let rows = (self.bounds.height() / cell).ceil() as usize;
        let mut mask = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let x = self.bounds.min_x + (c as f64 + 0.5) * cell;
                let y = self.bounds.min_y + (r as f64 + 0.5) * cell;
                mask.push(self.is_walkable(x, y));
            }
        }
        (cols, rows, mask)
    }
}

/// Camera mount slot on the robot body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MountId {
    Head,
    Chest,
    Waist,
}

pub const ALL_MOUNTS: [MountId; 3] = [MountId::Head, MountId::Chest, MountId::Waist];

#[derive(Debug, Clone, PartialEq)]
pub struct CameraMount {
    pub id: MountId,
    pub intrinsics: CameraIntrinsics,
    /// Camera-to-agent transform, fixed per mount.
    pub extrinsics: CameraExtrinsics,
}

fn default_intrinsics() -> CameraIntrinsics {
    let cx = (IMG_WIDTH - 1) as f64 / 2.0;
    let cy = (IMG_HEIGHT - 1) as f64 / 2.0;
    let fx = cx / (FOV_DEG.to_radians() / 2.0).tan();
    CameraIntrinsics::new(fx, fx, cx, cy)
}

/// Forward-looking mount: camera x to body left-right, camera y down, camera
/// z along the body forward axis, tilted down by `pitch`. The matrix has
/// determinant -1 on purpose: the body-to-world step mirrors the y axis and
/// the full camera-to-world chain must keep image orientation.
fn mount_rotation(pitch: f64) -> Mat3 {
    let base = Mat3::from_cols(
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, -1.0),
        Vec3::new(1.0, 0.0, 0.0),
    );
    base.mul_mat(&euler_to_rotation(EulerAngles::new(-pitch, 0.0, 0.0)))
}

#[cfg(test)]
pub(crate) fn mount_rotation_for_tests(pitch: f64) -> Mat3 {
    mount_rotation(pitch)
}

fn default_mounts() -> [CameraMount; 3] {
    let intr = default_intrinsics();
    let make = |id, height: f64, pitch_deg: f64| CameraMount {
        id,
        intrinsics: intr,
        extrinsics: CameraExtrinsics {
            rotation: mount_rotation(pitch_deg.to_radians()),
            translation: Vec3::new(0.10, 0.0, height),
        },
    };
    [
        make(MountId::Head, 1.35, 25.0),
        make(MountId::Chest, 0.95, 15.0),
        make(MountId::Waist, 0.55, 5.0),
    ]
}

/// Robot state: planar pose, camera mounts and the held item.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub pose: RobotPose,
    pub mounts: [CameraMount; 3],
    pub held_item: Option<Category>,
}

impl RobotState {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        RobotState {
            pose: RobotPose::planar(x, y, heading),
            mounts: default_mounts(),
            held_item: None,
        }
    }

    pub fn mount(&self, id: MountId) -> &CameraMount {
        self.mounts
            .iter()
            .find(|m| m.id == id)
            .expect("robot has exactly three mounts")
    }

    pub fn position_xy(&self) -> (f64, f64) {
        (self.pose.translation.x, self.pose.translation.y)
    }
}

/// One synchronized RGB + depth + segmentation capture.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB, one entry per pixel.
    pub rgb: Vec<[u8; 3]>,
    /// Row-major depth, meters; 0 means no reading.
    pub depth: Vec<f64>,
    /// Row-major object ids; 0 is background.
    pub segmentation: Vec<u32>,
    pub intr: CameraIntrinsics,
    pub extr: CameraExtrinsics,
    /// Robot pose at capture time.
    pub pose: RobotPose,
}

impl SensorFrame {
    pub fn idx(&self, i: u32, j: u32) -> usize {
        (j * self.width + i) as usize
    }

    pub fn depth_at(&self, i: u32, j: u32) -> f64 {
        self.depth[self.idx(i, j)]
    }

    pub fn seg_at(&self, i: u32, j: u32) -> u32 {
        self.segmentation[self.idx(i, j)]
    }

    pub fn rgb_at(&self, i: u32, j: u32) -> [u8; 3] {
        self.rgb[self.idx(i, j)]
    }
}

/// Background (no reading) render color.
pub const BACKGROUND_COLOR: [u8; 3] = [0, 0, 0];
/// Floor render color.
pub const FLOOR_COLOR: [u8; 3] = [45, 45, 45];

/// Waypoints on an inset ring inside the bounds, walked counter-clockwise
/// from the corner nearest the bounds minimum. The four corners are always
/// included (for `count >= 4`), so consecutive legs run along the ring
/// rectangle's edges and never cut across its interior. Used by the
/// exploration tour, the skill-level detour route and the scripted explorer.
pub fn waypoint_ring(bounds: &Rect, count: usize, margin: f64) -> Vec<(f64, f64)> {
    let inner = Rect::new(
        bounds.min_x + margin,
        bounds.min_y + margin,
        bounds.max_x - margin,
        bounds.max_y - margin,
    );
    let w = inner.width().max(0.0);
    let h = inner.height().max(0.0);
    let perimeter = 2.0 * (w + h);
    if count == 0 || perimeter <= 0.0 {
        return Vec::new();
    }

    // Corners in walk order, then extra points distributed over the edges
    // proportionally to edge length (largest remainder).
    let corners = [
        (inner.min_x, inner.min_y),
        (inner.max_x, inner.min_y),
        (inner.max_x, inner.max_y),
        (inner.min_x, inner.max_y),
    ];
    if count <= 4 {
        return corners.into_iter().take(count).collect();
    }
    let extras = count - 4;
    let lengths = [w, h, w, h];
    let mut per_edge: Vec<usize> =
        lengths.iter().map(|l| (extras as f64 * l / perimeter).floor() as usize).collect();
    let mut assigned: usize = per_edge.iter().sum();
    let mut remainders: Vec<(f64, usize)> = lengths
        .iter()
        .enumerate()
        .map(|(i, l)| (extras as f64 * l / perimeter - per_edge[i] as f64, i))
        .collect();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, edge) in remainders {
        if assigned == extras {
            break;
        }
        per_edge[edge] += 1;
        assigned += 1;
    }

    let mut points = Vec::with_capacity(count);
    for edge in 0..4 {
        let (start, end) = (corners[edge], corners[(edge + 1) % 4]);
        points.push(start);
        let n = per_edge[edge];
        for k in 1..=n {
            let t = k as f64 / (n + 1) as f64;
            points.push((start.0 + t * (end.0 - start.0), start.1 + t * (end.1 - start.1)));
        }
    }
    points
}
