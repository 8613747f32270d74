//! World-state mutation hook used by the skills layer. Effects are validated
//! against the per-category state schemas and applied atomically.

use thiserror::Error;

use super::{ObjectInstance, WorldScene};

#[derive(Debug, Clone, PartialEq)]
pub enum WorldEffect {
    /// Set one state key on an object to a schema-legal value.
    SetState { object: u32, key: String, value: String },
    /// Add a new object (e.g. a served glass of milk).
    Spawn(Box<ObjectInstance>),
    /// Remove an object (e.g. a towel that was picked up).
    Remove { object: u32 },
}

#[derive(Debug, Error, PartialEq)]
pub enum EffectError {
    #[error("precondition failed: unknown object {0}")]
    UnknownObject(u32),
    #[error("precondition failed: object {object}: {reason}")]
    InvalidTransition { object: u32, reason: String },
}

/// Apply a single effect, or fail without touching the scene.
pub fn apply_effect(scene: &mut WorldScene, effect: &WorldEffect) -> Result<(), EffectError> {
    match effect {
        WorldEffect::SetState { object, key, value } => {
            let obj = scene
                .object(*object)
                .ok_or(EffectError::UnknownObject(*object))?;
            let field = obj
                .category
                .state_schema()
                .iter()
                .find(|f| f.key == key.as_str())
                .ok_or_else(|| EffectError::InvalidTransition {
                    object: *object,
                    reason: format!("state key {key:?} not declared for {}", obj.category.name()),
                })?;
            if !field.kind.valid(value) {
                return Err(EffectError::InvalidTransition {
                    object: *object,
                    reason: format!("value {value:?} not allowed for {key:?}"),
                });
            }
            let obj = scene.object_mut(*object).expect("checked above");
            obj.state.insert(key.clone(), value.clone());
            Ok(())
        }
        WorldEffect::Spawn(new_obj) => {
            if new_obj.id == 0 || scene.object(new_obj.id).is_some() {
                return Err(EffectError::InvalidTransition {
                    object: new_obj.id,
                    reason: "spawn id already in use".into(),
                });
            }
            let fp = new_obj.footprint();
            if fp.min_x < scene.bounds.min_x
                || fp.min_y < scene.bounds.min_y
                || fp.max_x > scene.bounds.max_x
                || fp.max_y > scene.bounds.max_y
            {
                return Err(EffectError::InvalidTransition {
                    object: new_obj.id,
                    reason: "spawn outside scene bounds".into(),
                });
            }
            let idx = scene
                .objects
                .binary_search_by_key(&new_obj.id, |o| o.id)
                .unwrap_err();
            scene.objects.insert(idx, (**new_obj).clone());
            Ok(())
        }
        WorldEffect::Remove { object } => {
            let idx = scene
                .objects
                .iter()
                .position(|o| o.id == *object)
                .ok_or(EffectError::UnknownObject(*object))?;
            scene.objects.remove(idx);
            Ok(())
        }
    }
}
