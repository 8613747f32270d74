//! Scene JSON loading, validation and writing.
//!
//! Wire format:
//! `{ "bounds": [xmin,ymin,xmax,ymax], "objects": [{ "id": int, "category":
//! str, "position": [x,y,z], "half_extents": [ex,ey,ez], "surface_of":
//! int|null, "state": {..} }] }`. All lengths are meters; `position` is the
//! box center.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::collections::{BTreeMap, BTreeSet};

use super::{Category, ObjectInstance, Rect, WorldScene};
use crate::geometry::Vec3;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene parse error: {0}")]
    Parse(String),
    #[error("scene validation error: {0}")]
    Validation(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct SceneDoc {
    bounds: [f64; 4],
    objects: Vec<ObjectDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectDoc {
    id: u32,
    category: String,
    position: [f64; 3],
    half_extents: [f64; 3],
    #[serde(default)]
    surface_of: Option<u32>,
    #[serde(default)]
    state: BTreeMap<String, String>,
}

/// Parse and validate scene JSON bytes.
pub fn load_scene(bytes: &[u8]) -> Result<WorldScene, SceneError> {
    let doc: SceneDoc =
        serde_json::from_slice(bytes).map_err(|e| SceneError::Parse(e.to_string()))?;
    scene_from_doc(doc)
}

fn scene_from_doc(doc: SceneDoc) -> Result<WorldScene, SceneError> {
    let [min_x, min_y, max_x, max_y] = doc.bounds;
    if !doc.bounds.iter().all(|v| v.is_finite()) || min_x >= max_x || min_y >= max_y {
        return Err(SceneError::Validation(format!(
            "bounds [{min_x}, {min_y}, {max_x}, {max_y}] are not a valid rectangle"
        )));
    }
    let bounds = Rect::new(min_x, min_y, max_x, max_y);

    let mut seen = BTreeSet::new();
    let mut objects = Vec::with_capacity(doc.objects.len());
    for obj in doc.objects {
        let id = obj.id;
        if id == 0 {
            return Err(SceneError::Validation("object id 0 is reserved for background".into()));
        }
        if !seen.insert(id) {
            return Err(SceneError::Validation(format!("duplicate object id {id}")));
        }
        let category = Category::from_name(&obj.category).ok_or_else(|| {
            SceneError::Validation(format!("object {id}: unknown category {:?}", obj.category))
        })?;
        let position = Vec3::new(obj.position[0], obj.position[1], obj.position[2]);
        let half_extents = Vec3::new(obj.half_extents[0], obj.half_extents[1], obj.half_extents[2]);
        if !position.is_finite() || !half_extents.is_finite() {
            return Err(SceneError::Validation(format!("object {id}: non-finite geometry")));
        }
        if half_extents.x <= 0.0 || half_extents.y <= 0.0 || half_extents.z <= 0.0 {
            return Err(SceneError::Validation(format!(
                "object {id}: half extents must be positive"
            )));
        }

        let mut state = obj.state;
        let schema = category.state_schema();
        for (key, value) in &state {
            let field = schema.iter().find(|f| f.key == key).ok_or_else(|| {
                SceneError::Validation(format!(
                    "object {id}: state key {key:?} not in the {} schema",
                    category.name()
                ))
            })?;
            if !field.kind.valid(value) {
                return Err(SceneError::Validation(format!(
                    "object {id}: state {key:?} has invalid value {value:?}"
                )));
            }
        }
        for field in schema {
            state.entry(field.key.to_string()).or_insert_with(|| field.default.to_string());
        }

        objects.push(ObjectInstance {
            id,
            category,
            position,
            half_extents,
            surface_of: obj.surface_of,
            state,
        });
    }
    objects.sort_by_key(|o| o.id);

    let scene = WorldScene { bounds, objects };
    validate_scene(&scene)?;
    Ok(scene)
}

fn validate_scene(scene: &WorldScene) -> Result<(), SceneError> {
    for obj in &scene.objects {
        let fp = obj.footprint();
        if fp.min_x < scene.bounds.min_x
            || fp.min_y < scene.bounds.min_y
            || fp.max_x > scene.bounds.max_x
            || fp.max_y > scene.bounds.max_y
            || obj.box_min().z < -1e-9
        {
            return Err(SceneError::Validation(format!(
                "object {} extends outside the scene bounds",
                obj.id
            )));
        }
        if let Some(table_id) = obj.surface_of {
            let table = scene.object(table_id).ok_or_else(|| {
                SceneError::Validation(format!(
                    "object {}: surface_of references missing object {table_id}",
                    obj.id
                ))
            })?;
            if table.category != Category::Table {
                return Err(SceneError::Validation(format!(
                    "object {}: surface_of {table_id} is not a table",
                    obj.id
                )));
            }
        }
    }
    let tables: Vec<_> = scene.objects_of(Category::Table).collect();
    for (i, a) in tables.iter().enumerate() {
        for b in &tables[i + 1..] {
            if a.footprint().overlaps(&b.footprint()) {
                return Err(SceneError::Validation(format!(
                    "tables {} and {} overlap",
                    a.id, b.id
                )));
            }
        }
    }
    Ok(())
}

/// Serialize a scene back to its wire format.
pub fn scene_to_json(scene: &WorldScene) -> serde_json::Value {
    let doc = SceneDoc {
        bounds: [scene.bounds.min_x, scene.bounds.min_y, scene.bounds.max_x, scene.bounds.max_y],
        objects: scene
            .objects
            .iter()
            .map(|o| ObjectDoc {
                id: o.id,
                category: o.category.name().to_string(),
                position: [o.position.x, o.position.y, o.position.z],
                half_extents: [o.half_extents.x, o.half_extents.y, o.half_extents.z],
                surface_of: o.surface_of,
                state: o.state.clone(),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("scene serialization cannot fail")
}
