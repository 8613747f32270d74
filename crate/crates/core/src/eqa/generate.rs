//! Seeded scene randomization, the geometric ground-truth answer oracle, and
//! dataset assembly with yes/no balance control.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::affordance::{categories_for, AFFORDANCES};
use super::templates::{
    display_name, render_affordance, render_closer, render_exists, render_same_table,
    render_same_table_item, template_type, QuestionType, TEMPLATE_IDS,
};
use crate::geometry::Vec3;
use crate::simworld::{
    load_scene, scene_to_json, Category, ObjectInstance, Rect, WorldScene, ROBOT_RADIUS,
};

/// Default desk-scale cafe bounds, meters.
pub fn default_bounds() -> Rect {
    Rect::new(0.0, 0.0, 10.0, 8.0)
}

/// Margin of the exploration ring that placement keeps walkable.
pub const RING_MARGIN: f64 = 1.0;

/// Interior obstacles must not encroach on the ring corridor: the footprint
/// grown by the robot diameter has to sit strictly inside or strictly
/// outside the ring rectangle.
fn clear_of_ring(fp: &Rect, bounds: &Rect) -> bool {
    let ring = bounds.shrink(RING_MARGIN);
    let grown = fp.expand(2.0 * ROBOT_RADIUS + 0.05);
    let fully_inside = grown.min_x > ring.min_x
        && grown.min_y > ring.min_y
        && grown.max_x < ring.max_x
        && grown.max_y < ring.max_y;
    let fully_outside = !grown.overlaps(&ring);
    fully_inside || fully_outside
}

/// Episode start pose corner; placement keeps a disc around it clear.
pub const START_CLEARANCE: f64 = 0.55;

fn start_point(bounds: &Rect) -> (f64, f64) {
    (bounds.min_x + 0.7, bounds.min_y + 0.7)
}

struct Placer {
    bounds: Rect,
    objects: Vec<ObjectInstance>,
    next_id: u32,
}

impl Placer {
    fn collides(&self, fp: &Rect, clearance: f64, ignore_traversable: bool) -> bool {
        let grown = fp.expand(clearance);
        self.objects.iter().any(|o| {
            if ignore_traversable && o.category.traversable() {
                return false;
            }
            o.footprint().overlaps(&grown)
        })
    }

    fn near_start(&self, fp: &Rect) -> bool {
        let (sx, sy) = start_point(&self.bounds);
        fp.expand(ROBOT_RADIUS).distance_to(sx, sy) < START_CLEARANCE
    }

    fn in_bounds(&self, fp: &Rect) -> bool {
        fp.min_x >= self.bounds.min_x
            && fp.min_y >= self.bounds.min_y
            && fp.max_x <= self.bounds.max_x
            && fp.max_y <= self.bounds.max_y
    }

    fn push(
        &mut self,
        category: Category,
        position: Vec3,
        half_extents: Vec3,
        surface_of: Option<u32>,
        state: &[(&str, &str)],
    ) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        let mut map = BTreeMap::new();
        for field in category.state_schema() {
            map.insert(field.key.to_string(), field.default.to_string());
        }
        for (k, v) in state {
            map.insert((*k).to_string(), (*v).to_string());
        }
        self.objects.push(ObjectInstance {
            id,
            category,
            position,
            half_extents,
            surface_of,
            state: map,
        });
        id
    }
}

/// Deterministic scene randomization. Objects are drawn from `catalog`;
/// when tables and at least two tabletop categories are available the scene
/// guarantees at least two tables carrying two items each, so location
/// templates are instantiable.
pub fn randomize_scene(seed: u64, catalog: &[Category], bounds: Rect) -> WorldScene {
    for attempt in 0..32u64 {
        let scene = try_randomize(seed.wrapping_add(attempt << 32), catalog, bounds);
        if scene_guarantee_ok(&scene, catalog) {
            return scene;
        }
    }
    // Guarantees involve only placement retries over open space; with the
    // desk-scale bounds an attempt practically always succeeds.
    try_randomize(seed, catalog, bounds)
}

fn scene_guarantee_ok(scene: &WorldScene, catalog: &[Category]) -> bool {
    if !catalog.contains(&Category::Table) {
        return true;
    }
    let tabletop_kinds = catalog.iter().filter(|c| c.tabletop()).count();
    if tabletop_kinds < 4 {
        return true;
    }
    let mut per_table: BTreeMap<u32, usize> = BTreeMap::new();
    for obj in &scene.objects {
        if let Some(t) = obj.surface_of {
            *per_table.entry(t).or_default() += 1;
        }
    }
    per_table.values().filter(|&&n| n >= 2).count() >= 2
}

fn try_randomize(seed: u64, catalog: &[Category], bounds: Rect) -> WorldScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let has = |c: Category| catalog.contains(&c);
    let mut placer = Placer { bounds, objects: Vec::new(), next_id: 1 };

    // A seeded subset of optional categories stays out of the scene so that
    // existence questions have natural no-answers. At least one of the
    // consumable items survives to keep table pairs formable.
    let mut dropped: Vec<Category> = Vec::new();
    let optional = [
        Category::Cup,
        Category::Bread,
        Category::Milk,
        Category::Mop,
        Category::Curtain,
        Category::AirConditioner,
    ];
    let drop_count = rng.random_range(1..=3usize);
    let mut pool: Vec<Category> = optional.to_vec();
    for _ in 0..drop_count {
        if pool.is_empty() {
            break;
        }
        let idx = rng.random_range(0..pool.len());
        let candidate = pool.remove(idx);
        let consumables = [Category::Cup, Category::Bread, Category::Milk];
        let surviving = consumables
            .iter()
            .filter(|c| has(**c) && !dropped.contains(c) && **c != candidate)
            .count();
        if consumables.contains(&candidate) && surviving == 0 {
            continue;
        }
        dropped.push(candidate);
    }
    let placed = |c: Category, dropped: &[Category]| has(c) && !dropped.contains(&c);

    // Tables.
    let mut table_ids = Vec::new();
    if has(Category::Table) {
        let count = rng.random_range(4..=6);
        for _ in 0..count {
            for _try in 0..60 {
                let ex = rng.random_range(0.50..0.65);
                let ey = rng.random_range(0.40..0.50);
                let h = rng.random_range(0.68..0.76);
                let x = rng.random_range(bounds.min_x + 1.9..bounds.max_x - 1.9);
                let y = rng.random_range(bounds.min_y + 1.9..bounds.max_y - 1.9);
                let fp = Rect::new(x - ex, y - ey, x + ex, y + ey);
                if !placer.in_bounds(&fp)
                    || placer.collides(&fp, 0.95, true)
                    || placer.near_start(&fp)
                    || !clear_of_ring(&fp, &bounds)
                {
                    continue;
                }
                let id = placer.push(
                    Category::Table,
                    Vec3::new(x, y, h / 2.0),
                    Vec3::new(ex, ey, h / 2.0),
                    None,
                    &[],
                );
                table_ids.push(id);
                break;
            }
        }
    }

    // Chairs beside tables.
    if has(Category::Chair) {
        let table_positions: Vec<_> = table_ids
            .iter()
            .filter_map(|id| placer.objects.iter().find(|o| o.id == *id))
            .map(|t| (t.position, t.half_extents))
            .collect();
        for (pos, half) in table_positions {
            let n = rng.random_range(0..=2);
            for _ in 0..n {
                for _try in 0..20 {
                    let side = rng.random_range(0..4);
                    let gap = 0.28;
                    let (cx, cy) = match side {
                        0 => (pos.x + half.x + gap, pos.y + rng.random_range(-0.3..0.3)),
                        1 => (pos.x - half.x - gap, pos.y + rng.random_range(-0.3..0.3)),
                        2 => (pos.x + rng.random_range(-0.4..0.4), pos.y + half.y + gap),
                        _ => (pos.x + rng.random_range(-0.4..0.4), pos.y - half.y - gap),
                    };
                    let fp = Rect::new(cx - 0.2, cy - 0.2, cx + 0.2, cy + 0.2);
                    if !placer.in_bounds(&fp)
                        || placer.collides(&fp, 0.05, true)
                        || placer.near_start(&fp)
                        || !clear_of_ring(&fp, &bounds)
                    {
                        continue;
                    }
                    let aligned = if rng.random_bool(0.5) { "true" } else { "false" };
                    placer.push(
                        Category::Chair,
                        Vec3::new(cx, cy, 0.225),
                        Vec3::new(0.2, 0.2, 0.225),
                        None,
                        &[("aligned", aligned)],
                    );
                    break;
                }
            }
        }
    }

    // Tabletop items, paired two per table so same-table questions have
    // positive instances: (coffee_machine, towel) on the bar, then
    // (kettle, cup), (bread, milk) as available.
    let mut item_specs: Vec<(Category, Vec3)> = Vec::new();
    for (category, half) in [
        (Category::CoffeeMachine, Vec3::new(0.15, 0.12, 0.18)),
        (Category::Towel, Vec3::new(0.12, 0.12, 0.025)),
        (Category::Kettle, Vec3::new(0.09, 0.09, 0.11)),
        (Category::Cup, Vec3::new(0.045, 0.045, 0.055)),
        (Category::Bread, Vec3::new(0.08, 0.08, 0.045)),
        (Category::Milk, Vec3::new(0.045, 0.045, 0.09)),
    ] {
        if placed(category, &dropped) {
            item_specs.push((category, half));
        }
    }
    let mut spec_iter = item_specs.into_iter();
    'tables: for table_id in &table_ids {
        let (t_pos, t_half) = {
            let t = placer.objects.iter().find(|o| o.id == *table_id).unwrap();
            (t.position, t.half_extents)
        };
        let top = t_pos.z + t_half.z;
        let mut on_this_table: Vec<Rect> = Vec::new();
        for _slot in 0..2 {
            let Some((category, half)) = spec_iter.next() else { break 'tables };
            for _try in 0..40 {
                let x = t_pos.x + rng.random_range(-(t_half.x - half.x - 0.03)..(t_half.x - half.x - 0.03));
                let y = t_pos.y + rng.random_range(-(t_half.y - half.y - 0.03)..(t_half.y - half.y - 0.03));
                let fp = Rect::new(x - half.x, y - half.y, x + half.x, y + half.y);
                if on_this_table.iter().any(|r| r.overlaps(&fp)) {
                    continue;
                }
                on_this_table.push(fp);
                placer.push(
                    category,
                    Vec3::new(x, y, top + half.z),
                    half,
                    Some(*table_id),
                    &[],
                );
                break;
            }
        }
    }

    // Wall fixtures.
    if placed(Category::AirConditioner, &dropped) {
        let y = rng.random_range(bounds.min_y + 1.5..bounds.max_y - 1.5);
        placer.push(
            Category::AirConditioner,
            Vec3::new(bounds.min_x + 0.19, y, 1.25),
            Vec3::new(0.18, 0.3, 0.22),
            None,
            &[],
        );
    }
    if has(Category::LightSwitch) {
        let x = rng.random_range(bounds.min_x + 2.0..bounds.max_x - 1.0);
        placer.push(
            Category::LightSwitch,
            Vec3::new(x, bounds.min_y + 0.07, 1.1),
            Vec3::new(0.06, 0.06, 0.09),
            None,
            &[],
        );
    }
    if placed(Category::Curtain, &dropped) {
        let n = rng.random_range(1..=2);
        for _ in 0..n {
            for _try in 0..20 {
                let x = rng.random_range(bounds.min_x + 1.0..bounds.max_x - 1.0);
                let fp = Rect::new(x - 0.5, bounds.max_y - 0.13, x + 0.5, bounds.max_y - 0.01);
                if placer.collides(&fp, 0.1, true) {
                    continue;
                }
                placer.push(
                    Category::Curtain,
                    Vec3::new(x, bounds.max_y - 0.07, 0.9),
                    Vec3::new(0.5, 0.06, 0.55),
                    None,
                    &[],
                );
                break;
            }
        }
    }
    if placed(Category::Mop, &dropped) {
        for _try in 0..30 {
            let x = rng.random_range(bounds.max_x - 0.4..bounds.max_x - 0.2);
            let y = rng.random_range(bounds.min_y + 1.0..bounds.max_y - 1.0);
            let fp = Rect::new(x - 0.08, y - 0.08, x + 0.08, y + 0.08);
            if placer.collides(&fp, 0.2, true) || placer.near_start(&fp) {
                continue;
            }
            placer.push(Category::Mop, Vec3::new(x, y, 0.5), Vec3::new(0.08, 0.08, 0.5), None, &[]);
            break;
        }
    }
    if has(Category::FloorPatch) {
        let n = rng.random_range(1..=2);
        for _ in 0..n {
            for _try in 0..30 {
                let x = rng.random_range(bounds.min_x + 1.0..bounds.max_x - 1.0);
                let y = rng.random_range(bounds.min_y + 1.0..bounds.max_y - 1.0);
                let fp = Rect::new(x - 0.35, y - 0.35, x + 0.35, y + 0.35);
                if placer.collides(&fp, 0.3, false) || placer.near_start(&fp) {
                    continue;
                }
                placer.push(
                    Category::FloorPatch,
                    Vec3::new(x, y, 0.015),
                    Vec3::new(0.35, 0.35, 0.015),
                    None,
                    &[("dirty", "true")],
                );
                break;
            }
        }
    }

    let scene = WorldScene { bounds, objects: placer.objects };
    // Round-trip through the schema validator to keep every generated scene
    // loadable from its JSON form.
    load_scene(scene_to_json(&scene).to_string().as_bytes()).expect("generated scene is valid")
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("binding references missing object {0}")]
    MissingObject(u32),
    #[error("object {0} is not on any table")]
    NotOnTable(u32),
    #[error("ambiguous binding: {0}")]
    Ambiguous(String),
    #[error("unknown activity {0:?}")]
    UnknownActivity(String),
}

/// Machine-readable bindings the oracle answers from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuestionBinding {
    /// Template 1: the unique other item on the same table.
    SameTableItem { obj: u32 },
    /// Template 2: are both objects supported by the same table?
    SameTable { a: u32, b: u32 },
    /// Template 3: is a closer to b than to c (3D center distance)?
    Closer { a: u32, b: u32, c: u32 },
    /// Template 4: does any instance of the named item exist?
    Exists { name: String },
    /// Template 5: does anything enabling the activity exist?
    Affordance { activity: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAnswer {
    pub text: String,
    pub support: serde_json::Value,
}

fn object<'a>(scene: &'a WorldScene, id: u32) -> Result<&'a ObjectInstance, OracleError> {
    scene.object(id).ok_or(OracleError::MissingObject(id))
}

/// Ground-truth answers. Same-table relations use `surface_of`; comparisons
/// use Euclidean distance between object centers with strict inequality.
pub fn answer_oracle(
    scene: &WorldScene,
    binding: &QuestionBinding,
) -> Result<OracleAnswer, OracleError> {
    match binding {
        QuestionBinding::SameTableItem { obj } => {
            let o = object(scene, *obj)?;
            let table = o.surface_of.ok_or(OracleError::NotOnTable(*obj))?;
            let mates: Vec<&ObjectInstance> = scene
                .objects
                .iter()
                .filter(|m| m.id != *obj && m.surface_of == Some(table))
                .collect();
            match mates.as_slice() {
                [mate] => Ok(OracleAnswer {
                    text: display_name(mate.category),
                    support: serde_json::json!({
                        "object_id": obj,
                        "table_id": table,
                        "answer_id": mate.id,
                    }),
                }),
                [] => Err(OracleError::Ambiguous(format!("object {obj} is alone on its table"))),
                _ => Err(OracleError::Ambiguous(format!(
                    "table {table} carries more than two items"
                ))),
            }
        }
        QuestionBinding::SameTable { a, b } => {
            let oa = object(scene, *a)?;
            let ob = object(scene, *b)?;
            let ta = oa.surface_of.ok_or(OracleError::NotOnTable(*a))?;
            let tb = ob.surface_of.ok_or(OracleError::NotOnTable(*b))?;
            Ok(OracleAnswer {
                text: if ta == tb { "yes" } else { "no" }.into(),
                support: serde_json::json!({
                    "object_ids": [a, b],
                    "tables": [ta, tb],
                }),
            })
        }
        QuestionBinding::Closer { a, b, c } => {
            let oa = object(scene, *a)?;
            let ob = object(scene, *b)?;
            let oc = object(scene, *c)?;
            let dab = oa.position.dist(ob.position);
            let dac = oa.position.dist(oc.position);
            if dab == dac {
                return Err(OracleError::Ambiguous("equal distances".into()));
            }
            Ok(OracleAnswer {
                text: if dab < dac { "yes" } else { "no" }.into(),
                support: serde_json::json!({
                    "object_ids": [a, b, c],
                    "distances": { "to_b": dab, "to_c": dac },
                }),
            })
        }
        QuestionBinding::Exists { name } => {
            let category = super::templates::category_from_display(name);
            let found: Vec<u32> = category
                .map(|c| scene.objects_of(c).map(|o| o.id).collect())
                .unwrap_or_default();
            Ok(OracleAnswer {
                text: if found.is_empty() { "no" } else { "yes" }.into(),
                support: serde_json::json!({ "name": name, "matching_ids": found }),
            })
        }
        QuestionBinding::Affordance { activity } => {
            let cats = categories_for(activity)
                .ok_or_else(|| OracleError::UnknownActivity(activity.clone()))?;
            let found: Vec<u32> = cats
                .iter()
                .flat_map(|c| scene.objects_of(*c).map(|o| o.id))
                .collect();
            Ok(OracleAnswer {
                text: if found.is_empty() { "no" } else { "yes" }.into(),
                support: serde_json::json!({
                    "activity": activity,
                    "categories": cats.iter().map(|c| c.name()).collect::<Vec<_>>(),
                    "matching_ids": found,
                }),
            })
        }
    }
}

/// Can this template be instantiated on the scene at all?
pub fn template_instantiable(scene: &WorldScene, template_id: u8) -> bool {
    let unique = |c: Category| scene.objects_of(c).count() == 1;
    match template_id {
        1 => {
            // A table carrying exactly two items, both of unique categories.
            let mut per_table: BTreeMap<u32, Vec<&ObjectInstance>> = BTreeMap::new();
            for o in &scene.objects {
                if let Some(t) = o.surface_of {
                    per_table.entry(t).or_default().push(o);
                }
            }
            per_table
                .values()
                .any(|items| items.len() == 2 && items.iter().all(|o| unique(o.category)))
        }
        2 => {
            scene
                .objects
                .iter()
                .filter(|o| o.surface_of.is_some() && unique(o.category))
                .count()
                >= 2
        }
        3 => {
            crate::simworld::ALL_CATEGORIES
                .iter()
                .filter(|c| unique(**c))
                .count()
                >= 3
        }
        4 | 5 => true,
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetParams {
    pub scene_count: u64,
    pub start_seed: u64,
    pub per_template: usize,
    pub max_binding_tries: usize,
}

impl Default for DatasetParams {
    fn default() -> Self {
        DatasetParams { scene_count: 70, start_seed: 1, per_template: 3, max_binding_tries: 300 }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("template {template_id}: answer balance unattainable ({yes}/{total} yes)")]
    BalanceUnattainable { template_id: u8, yes: usize, total: usize },
    #[error("template {template_id} not instantiable on scene {scene_id}")]
    Uninstantiable { template_id: u8, scene_id: String },
    #[error("dataset parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetItem {
    pub scene_id: String,
    /// Embedded scene wire format.
    pub scene: serde_json::Value,
    #[serde(rename = "type")]
    pub qtype: QuestionType,
    pub template_id: u8,
    pub question: String,
    pub answer: String,
    pub support: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub items: Vec<DatasetItem>,
}

struct BindingDraw {
    binding: QuestionBinding,
    question: String,
}

/// Draw a candidate binding for a template. `want_yes` steers boolean
/// templates toward the desired answer; the draw may still land elsewhere.
fn draw_binding(
    scene: &WorldScene,
    template_id: u8,
    want_yes: bool,
    rng: &mut ChaCha8Rng,
) -> Option<BindingDraw> {
    let unique = |c: Category| scene.objects_of(c).count() == 1;
    let on_table_unique: Vec<&ObjectInstance> = scene
        .objects
        .iter()
        .filter(|o| o.surface_of.is_some() && unique(o.category))
        .collect();
    match template_id {
        1 => {
            let mut per_table: BTreeMap<u32, Vec<&ObjectInstance>> = BTreeMap::new();
            for o in &scene.objects {
                if let Some(t) = o.surface_of {
                    per_table.entry(t).or_default().push(o);
                }
            }
            let pairs: Vec<&Vec<&ObjectInstance>> = per_table
                .values()
                .filter(|items| items.len() == 2 && items.iter().all(|o| unique(o.category)))
                .collect();
            let pair = pairs.choose(rng)?;
            let obj = pair.choose(rng)?;
            Some(BindingDraw {
                binding: QuestionBinding::SameTableItem { obj: obj.id },
                question: render_same_table_item(&display_name(obj.category)),
            })
        }
        2 => {
            let candidates: Vec<(&ObjectInstance, &ObjectInstance)> = on_table_unique
                .iter()
                .flat_map(|a| on_table_unique.iter().map(move |b| (*a, *b)))
                .filter(|(a, b)| a.id < b.id)
                .filter(|(a, b)| (a.surface_of == b.surface_of) == want_yes)
                .collect();
            let (a, b) = candidates.choose(rng)?;
            Some(BindingDraw {
                binding: QuestionBinding::SameTable { a: a.id, b: b.id },
                question: render_same_table(
                    &display_name(a.category),
                    &display_name(b.category),
                ),
            })
        }
        3 => {
            let candidates: Vec<&ObjectInstance> =
                scene.objects.iter().filter(|o| unique(o.category)).collect();
            if candidates.len() < 3 {
                return None;
            }
            for _ in 0..20 {
                let mut picks = candidates.clone();
                let a = picks.remove(rng.random_range(0..picks.len()));
                let b = picks.remove(rng.random_range(0..picks.len()));
                let c = picks.remove(rng.random_range(0..picks.len()));
                let dab = a.position.dist(b.position);
                let dac = a.position.dist(c.position);
                if dab == dac {
                    continue;
                }
                if (dab < dac) != want_yes {
                    continue;
                }
                return Some(BindingDraw {
                    binding: QuestionBinding::Closer { a: a.id, b: b.id, c: c.id },
                    question: render_closer(
                        &display_name(a.category),
                        &display_name(b.category),
                        &display_name(c.category),
                    ),
                });
            }
            None
        }
        4 => {
            const EXTRA_NOUNS: [&str; 4] = ["piano", "plant", "guitar", "television"];
            if want_yes {
                let present: Vec<Category> = crate::simworld::ALL_CATEGORIES
                    .iter()
                    .copied()
                    .filter(|c| scene.objects_of(*c).next().is_some())
                    .collect();
                let cat = present.choose(rng)?;
                Some(BindingDraw {
                    binding: QuestionBinding::Exists { name: display_name(*cat) },
                    question: render_exists(&display_name(*cat)),
                })
            } else {
                let mut absent: Vec<String> = crate::simworld::ALL_CATEGORIES
                    .iter()
                    .filter(|c| scene.objects_of(**c).next().is_none())
                    .map(|c| display_name(*c))
                    .collect();
                absent.extend(EXTRA_NOUNS.iter().map(|s| s.to_string()));
                let name = absent.choose(rng)?;
                Some(BindingDraw {
                    binding: QuestionBinding::Exists { name: name.clone() },
                    question: render_exists(name),
                })
            }
        }
        5 => {
            let candidates: Vec<&str> = AFFORDANCES
                .iter()
                .filter(|(_, cats)| {
                    cats.iter().any(|c| scene.objects_of(*c).next().is_some()) == want_yes
                })
                .map(|(activity, _)| *activity)
                .collect();
            let activity = candidates.choose(rng)?;
            Some(BindingDraw {
                binding: QuestionBinding::Affordance { activity: activity.to_string() },
                question: render_affordance(activity),
            })
        }
        _ => None,
    }
}

/// Generate the full dataset: `scene_count` scenes, `per_template` items per
/// template, boolean answers balanced per template by steering alternate
/// draws toward yes and no.
pub fn generate_dataset(params: &DatasetParams) -> Result<Dataset, DatasetError> {
    let mut items = Vec::new();
    let mut balance: BTreeMap<u8, (usize, usize)> = BTreeMap::new();

    for index in 0..params.scene_count {
        let seed = params.start_seed + index;
        let scene = randomize_scene(seed, &crate::simworld::ALL_CATEGORIES, default_bounds());
        let scene_id = format!("scene-{index:03}");
        let scene_json = scene_to_json(&scene);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(17));

        for template_id in TEMPLATE_IDS {
            if !template_instantiable(&scene, template_id) {
                return Err(DatasetError::Uninstantiable { template_id, scene_id });
            }
            for k in 0..params.per_template {
                // Alternate desired boolean answers for balance.
                let want_yes = (index as usize * params.per_template + k) % 2 == 0;
                let mut accepted: Option<(BindingDraw, OracleAnswer)> = None;
                let mut fallback: Option<(BindingDraw, OracleAnswer)> = None;
                for _ in 0..params.max_binding_tries {
                    let Some(draw) = draw_binding(&scene, template_id, want_yes, &mut rng)
                    else {
                        // Steered draw impossible; let the opposite side in.
                        if let Some(draw) = draw_binding(&scene, template_id, !want_yes, &mut rng)
                        {
                            if let Ok(ans) = answer_oracle(&scene, &draw.binding) {
                                fallback = Some((draw, ans));
                            }
                        }
                        break;
                    };
                    match answer_oracle(&scene, &draw.binding) {
                        Ok(ans) => {
                            accepted = Some((draw, ans));
                            break;
                        }
                        Err(_) => continue,
                    }
                }
                let Some((draw, answer)) = accepted.or(fallback) else {
                    return Err(DatasetError::Uninstantiable { template_id, scene_id });
                };
                if answer.text == "yes" || answer.text == "no" {
                    let entry = balance.entry(template_id).or_default();
                    entry.1 += 1;
                    if answer.text == "yes" {
                        entry.0 += 1;
                    }
                }
                items.push(DatasetItem {
                    scene_id: scene_id.clone(),
                    scene: scene_json.clone(),
                    qtype: template_type(template_id),
                    template_id,
                    question: draw.question,
                    answer: answer.text,
                    support: answer.support,
                });
            }
        }
    }

    for (template_id, (yes, total)) in &balance {
        if *total == 0 {
            continue;
        }
        let frac = *yes as f64 / *total as f64;
        if !(0.4..=0.6).contains(&frac) {
            return Err(DatasetError::BalanceUnattainable {
                template_id: *template_id,
                yes: *yes,
                total: *total,
            });
        }
    }

    Ok(Dataset { items })
}

/// Reconstruct the oracle binding of a stored item from its support field,
/// for replay checks.
pub fn binding_from_item(item: &DatasetItem) -> Option<QuestionBinding> {
    let support = &item.support;
    let id = |v: &serde_json::Value| v.as_u64().map(|x| x as u32);
    match item.template_id {
        1 => Some(QuestionBinding::SameTableItem { obj: id(&support["object_id"])? }),
        2 => {
            let ids = support["object_ids"].as_array()?;
            Some(QuestionBinding::SameTable { a: id(&ids[0])?, b: id(&ids[1])? })
        }
        3 => {
            let ids = support["object_ids"].as_array()?;
            Some(QuestionBinding::Closer { a: id(&ids[0])?, b: id(&ids[1])?, c: id(&ids[2])? })
        }
        4 => Some(QuestionBinding::Exists { name: support["name"].as_str()?.to_string() }),
        5 => Some(QuestionBinding::Affordance {
            activity: support["activity"].as_str()?.to_string(),
        }),
        _ => None,
    }
}

pub fn write_dataset(dataset: &Dataset) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(dataset).expect("dataset serialization");
    bytes.push(b'\n');
    bytes
}

pub fn read_dataset(bytes: &[u8]) -> Result<Dataset, DatasetError> {
    let dataset: Dataset =
        serde_json::from_slice(bytes).map_err(|e| DatasetError::Parse(e.to_string()))?;
    for item in &dataset.items {
        if !TEMPLATE_IDS.contains(&item.template_id) {
            return Err(DatasetError::Parse(format!(
                "item in {} has invalid template id {}",
                item.scene_id, item.template_id
            )));
        }
        if item.qtype != template_type(item.template_id) {
            return Err(DatasetError::Parse(format!(
                "item in {} has mismatched question type",
                item.scene_id
            )));
        }
        load_scene(item.scene.to_string().as_bytes())
            .map_err(|e| DatasetError::Parse(format!("embedded scene: {e}")))?;
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_reproduces_the_scene() {
        let a = randomize_scene(42, &crate::simworld::ALL_CATEGORIES, default_bounds());
        let b = randomize_scene(42, &crate::simworld::ALL_CATEGORIES, default_bounds());
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_seeds_differ() {
        let mut layouts = Vec::new();
        for seed in 0..10 {
            let scene = randomize_scene(seed, &crate::simworld::ALL_CATEGORIES, default_bounds());
            layouts.push(scene_to_json(&scene).to_string());
        }
        for i in 0..layouts.len() {
            for j in i + 1..layouts.len() {
                assert_ne!(layouts[i], layouts[j], "seeds {i} and {j} collide");
            }
        }
    }

    #[test]
    fn degenerate_catalog_still_yields_a_valid_scene() {
        let scene = randomize_scene(7, &[Category::Table], default_bounds());
        assert!(scene.objects.iter().all(|o| o.category == Category::Table));
        assert!(!template_instantiable(&scene, 1));
        assert!(template_instantiable(&scene, 4));
    }

    #[test]
    fn generated_scenes_have_two_tables_with_two_items() {
        for seed in 1..=8 {
            let scene = randomize_scene(seed, &crate::simworld::ALL_CATEGORIES, default_bounds());
            assert!(scene_guarantee_ok(&scene, &crate::simworld::ALL_CATEGORIES), "seed {seed}");
            assert!(template_instantiable(&scene, 1), "seed {seed}");
            assert!(template_instantiable(&scene, 2), "seed {seed}");
            assert!(template_instantiable(&scene, 3), "seed {seed}");
        }
    }

    #[test]
    fn start_zone_is_walkable() {
        for seed in 1..=8 {
            let scene = randomize_scene(seed, &crate::simworld::ALL_CATEGORIES, default_bounds());
            let (sx, sy) = start_point(&scene.bounds);
            assert!(scene.is_walkable(sx, sy), "seed {seed}");
        }
    }

    #[test]
    fn oracle_same_table_cases() {
        let scene = load_scene(
            br#"{ "bounds": [0, 0, 8, 6], "objects": [
                { "id": 7, "category": "table", "position": [2, 2, 0.36], "half_extents": [0.6, 0.45, 0.36] },
                { "id": 8, "category": "table", "position": [6, 4, 0.36], "half_extents": [0.6, 0.45, 0.36] },
                { "id": 1, "category": "cup", "position": [2.1, 2, 0.77], "half_extents": [0.045, 0.045, 0.055], "surface_of": 7 },
                { "id": 2, "category": "kettle", "position": [1.8, 2.1, 0.83], "half_extents": [0.09, 0.09, 0.11], "surface_of": 7 },
                { "id": 3, "category": "bread", "position": [6, 4, 0.765], "half_extents": [0.08, 0.08, 0.045], "surface_of": 8 }
            ] }"#,
        )
        .unwrap();
        let yes = answer_oracle(&scene, &QuestionBinding::SameTable { a: 1, b: 2 }).unwrap();
        assert_eq!(yes.text, "yes");
        let no = answer_oracle(&scene, &QuestionBinding::SameTable { a: 1, b: 3 }).unwrap();
        assert_eq!(no.text, "no");
        // Template 2 is symmetric.
        let swapped = answer_oracle(&scene, &QuestionBinding::SameTable { a: 2, b: 1 }).unwrap();
        assert_eq!(swapped.text, yes.text);
        // Template 1 names the companion item.
        let item = answer_oracle(&scene, &QuestionBinding::SameTableItem { obj: 1 }).unwrap();
        assert_eq!(item.text, "kettle");
    }

    #[test]
    fn oracle_closer_uses_strict_distance() {
        let scene = load_scene(
            br#"{ "bounds": [0, 0, 8, 6], "objects": [
                { "id": 1, "category": "cup", "position": [1, 1, 0.1], "half_extents": [0.05, 0.05, 0.05] },
                { "id": 2, "category": "kettle", "position": [2, 1, 0.1], "half_extents": [0.05, 0.05, 0.05] },
                { "id": 3, "category": "bread", "position": [4, 1, 0.1], "half_extents": [0.05, 0.05, 0.05] }
            ] }"#,
        )
        .unwrap();
        let yes = answer_oracle(&scene, &QuestionBinding::Closer { a: 1, b: 2, c: 3 }).unwrap();
        assert_eq!(yes.text, "yes");
        // Swapping the comparison objects flips the answer.
        let no = answer_oracle(&scene, &QuestionBinding::Closer { a: 1, b: 3, c: 2 }).unwrap();
        assert_eq!(no.text, "no");
    }

    #[test]
    fn oracle_existence_and_affordance() {
        let scene = load_scene(
            br#"{ "bounds": [0, 0, 8, 6], "objects": [
                { "id": 1, "category": "mop", "position": [7.8, 3, 0.5], "half_extents": [0.08, 0.08, 0.5] }
            ] }"#,
        )
        .unwrap();
        assert_eq!(
            answer_oracle(&scene, &QuestionBinding::Exists { name: "mop".into() }).unwrap().text,
            "yes"
        );
        assert_eq!(
            answer_oracle(&scene, &QuestionBinding::Exists { name: "piano".into() }).unwrap().text,
            "no"
        );
        assert_eq!(
            answer_oracle(&scene, &QuestionBinding::Affordance { activity: "clean the floor".into() })
                .unwrap()
                .text,
            "yes"
        );
        assert_eq!(
            answer_oracle(&scene, &QuestionBinding::Affordance { activity: "fly away".into() }),
            Err(OracleError::UnknownActivity("fly away".into()))
        );
    }

    #[test]
    fn small_dataset_is_balanced_and_self_consistent() {
        let params = DatasetParams { scene_count: 6, start_seed: 1, ..Default::default() };
        let dataset = generate_dataset(&params).unwrap();
        assert_eq!(dataset.items.len(), 6 * 5 * 3);
        let mut balance: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
        for item in &dataset.items {
            let scene = load_scene(item.scene.to_string().as_bytes()).unwrap();
            let binding = binding_from_item(item).expect("support is machine-readable");
            let replayed = answer_oracle(&scene, &binding).unwrap();
            assert_eq!(replayed.text, item.answer, "item {:?}", item.question);
            if item.answer == "yes" || item.answer == "no" {
                let entry = balance.entry(item.template_id).or_default();
                entry.1 += 1;
                if item.answer == "yes" {
                    entry.0 += 1;
                }
            }
        }
        for (template_id, (yes, total)) in balance {
            let frac = yes as f64 / total as f64;
            assert!(
                (0.4..=0.6).contains(&frac),
                "template {template_id} unbalanced: {yes}/{total}"
            );
        }
    }

    #[test]
    fn dataset_round_trip() {
        let params = DatasetParams { scene_count: 2, start_seed: 5, ..Default::default() };
        let dataset = generate_dataset(&params).unwrap();
        let bytes = write_dataset(&dataset);
        let back = read_dataset(&bytes).unwrap();
        assert_eq!(dataset, back);
    }
}
