//! Multimodal environment memory: language memory (object id, category and
//! world coordinates) plus image memory (fused colored point cloud and its
//! floor-plan projection), maintained as updatable global memory.

mod floorplan;
mod kmeans;
mod knn;
mod outliers;

pub use floorplan::{project_floor_plan, Cell, FloorPlan};
pub use kmeans::{locate_pixel_center, two_means, CenterError, TwoMeans};
pub use outliers::{remove_outliers, OutlierOutcome, OutlierParams};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{pixel_to_world, PixelObservation, Vec3};
use crate::simworld::{Category, Rect, SensorFrame};

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("memory parse error: {0}")]
    Parse(String),
}

/// One remembered object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageMemoryEntry {
    pub object_id: u32,
    pub category: Category,
    pub world_pos: Vec3,
    /// Episode step index of the latest sighting.
    pub last_seen: u64,
}

/// One fused cloud point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoredPoint {
    pub position: Vec3,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ColoredPointCloud {
    pub points: Vec<ColoredPoint>,
}

impl ColoredPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Ablation switches for the two memory halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryFlags {
    pub language_memory: bool,
    pub image_memory: bool,
}

impl Default for MemoryFlags {
    fn default() -> Self {
        MemoryFlags { language_memory: true, image_memory: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemParams {
    /// Cluster-center distance threshold for the center positioning, pixels.
    pub zeta: f64,
    /// Blobs smaller than this carry no reliable center and are skipped.
    pub min_blob_pixels: usize,
    /// Floor-plan cell edge, meters.
    pub cell_size: f64,
    /// Height band projected into the floor plan, meters.
    pub z_band: (f64, f64),
}

impl Default for MemParams {
    fn default() -> Self {
        MemParams {
            zeta: 25.0,
            min_blob_pixels: 6,
            cell_size: 0.10,
            z_band: (0.02, 1.8),
        }
    }
}

/// One localized object extracted from a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectObservation {
    pub object_id: u32,
    /// Snapped pixel the depth was read at.
    pub pixel: (u32, u32),
    pub world_pos: Vec3,
    pub pixel_count: usize,
}

/// Group segmented pixels by id, run the center positioning per id, snap the
/// center to the nearest pixel of that id and back-project it to the world.
pub fn extract_object_observations(
    frame: &SensorFrame,
    zeta: f64,
    min_blob_pixels: usize,
) -> Vec<ObjectObservation> {
    let mut groups: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for j in 0..frame.height {
        for i in 0..frame.width {
            let id = frame.seg_at(i, j);
            if id != 0 {
                groups.entry(id).or_default().push((i, j));
            }
        }
    }

    let mut out = Vec::new();
    for (id, pixels) in groups {
        if pixels.len() < min_blob_pixels {
            continue;
        }
        let (ci, cj) = locate_pixel_center(&pixels, zeta).expect("group is non-empty");
        // The centroid or midpoint may land on background; snap to the
        // nearest pixel that carries this id before reading depth.
        let snapped = pixels
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = (a.0 as f64 - ci).powi(2) + (a.1 as f64 - cj).powi(2);
                let db = (b.0 as f64 - ci).powi(2) + (b.1 as f64 - cj).powi(2);
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("group is non-empty");
        let depth = frame.depth_at(snapped.0, snapped.1);
        let obs = PixelObservation::new(snapped.0, snapped.1, depth);
        let world = pixel_to_world(&frame.intr, &frame.extr, &frame.pose, &obs)
            .expect("segmented pixels have positive depth");
        out.push(ObjectObservation {
            object_id: id,
            pixel: snapped,
            world_pos: world,
            pixel_count: pixels.len(),
        });
    }
    out
}

/// The global multimodal memory.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMemory {
    pub flags: MemoryFlags,
    pub params: MemParams,
    /// Scene bounds the floor plan covers.
    pub bounds: Rect,
    pub language: BTreeMap<u32, LanguageMemoryEntry>,
    pub cloud: ColoredPointCloud,
    pub plan: FloorPlan,
    /// Number of frames integrated so far.
    pub step: u64,
}

impl EnvironmentMemory {
    pub fn new(bounds: Rect, flags: MemoryFlags) -> Self {
        Self::with_params(bounds, flags, MemParams::default())
    }

    pub fn with_params(bounds: Rect, flags: MemoryFlags, params: MemParams) -> Self {
        EnvironmentMemory {
            flags,
            params,
            bounds,
            language: BTreeMap::new(),
            cloud: ColoredPointCloud::default(),
            plan: FloorPlan::empty(&bounds, params.cell_size),
            step: 0,
        }
    }

    /// Fold one frame into the memory. Language entries upsert latest-wins;
    /// image memory back-projects every valid-depth pixel into the cloud and
    /// refreshes the floor plan. Ids missing from `labels` are skipped.
    pub fn integrate_frame(&mut self, frame: &SensorFrame, labels: &BTreeMap<u32, Category>) {
        if !self.flags.language_memory && !self.flags.image_memory {
            return;
        }
        self.step += 1;

        if self.flags.language_memory {
            for obs in
                extract_object_observations(frame, self.params.zeta, self.params.min_blob_pixels)
            {
                let Some(&category) = labels.get(&obs.object_id) else { continue };
                self.language.insert(
                    obs.object_id,
                    LanguageMemoryEntry {
                        object_id: obs.object_id,
                        category,
                        world_pos: obs.world_pos,
                        last_seen: self.step,
                    },
                );
            }
        }

        if self.flags.image_memory {
            for j in 0..frame.height {
                for i in 0..frame.width {
                    let depth = frame.depth_at(i, j);
                    if depth <= 0.0 {
                        continue;
                    }
                    let obs = PixelObservation::new(i, j, depth);
                    let p = pixel_to_world(&frame.intr, &frame.extr, &frame.pose, &obs)
                        .expect("depth checked positive");
                    self.cloud.points.push(ColoredPoint {
                        position: p,
                        color: frame.rgb_at(i, j),
                    });
                }
            }
            self.rebuild_plan();
        }
    }

    /// Re-derive the floor plan from the cloud (the plan is always a pure
    /// function of the cloud and the parameters).
    pub fn rebuild_plan(&mut self) {
        self.plan =
            project_floor_plan(&self.cloud, &self.bounds, self.params.cell_size, self.params.z_band);
    }

    /// Replace the cloud with its outlier-filtered version.
    pub fn filter_outliers(&mut self, params: &OutlierParams) -> OutlierOutcome {
        let (filtered, outcome) = remove_outliers(&self.cloud, params);
        self.cloud = filtered;
        self.rebuild_plan();
        outcome
    }

    /// Entries sorted by object id.
    pub fn entries(&self) -> impl Iterator<Item = &LanguageMemoryEntry> {
        self.language.values()
    }

    pub fn entries_of(&self, category: Category) -> impl Iterator<Item = &LanguageMemoryEntry> {
        self.language.values().filter(move |e| e.category == category)
    }

    pub fn serialize_memory(&self) -> Vec<u8> {
        let doc = MemoryDoc {
            flags: self.flags,
            params: self.params,
            bounds: self.bounds,
            step: self.step,
            language: self.language.values().cloned().collect(),
            cloud: self
                .cloud
                .points
                .iter()
                .map(|p| {
                    (
                        p.position.x,
                        p.position.y,
                        p.position.z,
                        p.color[0],
                        p.color[1],
                        p.color[2],
                    )
                })
                .collect(),
        };
        serde_json::to_vec(&doc).expect("memory serialization cannot fail")
    }

    pub fn deserialize_memory(bytes: &[u8]) -> Result<Self, MemoryError> {
        let doc: MemoryDoc =
            serde_json::from_slice(bytes).map_err(|e| MemoryError::Parse(e.to_string()))?;
        if !(doc.params.cell_size > 0.0) || doc.params.min_blob_pixels == 0 {
            return Err(MemoryError::Parse("invalid memory parameters".into()));
        }
        if doc.bounds.min_x >= doc.bounds.max_x || doc.bounds.min_y >= doc.bounds.max_y {
            return Err(MemoryError::Parse("invalid bounds".into()));
        }
        let mut mem = EnvironmentMemory::with_params(doc.bounds, doc.flags, doc.params);
        mem.step = doc.step;
        for entry in doc.language {
            if !entry.world_pos.is_finite() {
                return Err(MemoryError::Parse(format!(
                    "entry {} has non-finite coordinates",
                    entry.object_id
                )));
            }
            mem.language.insert(entry.object_id, entry);
        }
        for (x, y, z, r, g, b) in doc.cloud {
            let position = Vec3::new(x, y, z);
            if !position.is_finite() {
                return Err(MemoryError::Parse("non-finite cloud point".into()));
            }
            mem.cloud.points.push(ColoredPoint { position, color: [r, g, b] });
        }
        // The plan is derived state, not wire state.
        mem.rebuild_plan();
        Ok(mem)
    }
}

#[derive(Serialize, Deserialize)]
struct MemoryDoc {
    flags: MemoryFlags,
    params: MemParams,
    bounds: Rect,
    step: u64,
    language: Vec<LanguageMemoryEntry>,
    cloud: Vec<(f64, f64, f64, u8, u8, u8)>,
}
