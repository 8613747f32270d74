//! Atomic embodied-control skills with explicit preconditions and world
//! effects. Skills execute against the simulated world and use the language
//! memory to resolve navigation targets.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::mem::EnvironmentMemory;
use crate::simworld::{
    apply_effect, move_to, path_clear, Category, MoveOutcome, Rect, RobotState, WorldEffect,
    WorldScene, ROBOT_RADIUS,
};

/// Manipulation skills require the robot within this distance of the target
/// object's footprint, meters.
pub const PROXIMITY_RADIUS: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcCommand {
    Raise,
    Lower,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurtainCommand {
    Open,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerCommand {
    On,
    Off,
}

/// The skill catalog: eleven control interfaces plus `take_towel`, added so
/// that `wipe_table`'s tool precondition is satisfiable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "skill", rename_all = "snake_case")]
pub enum SkillAction {
    MoveTo { target: String },
    ProduceAndGrabMilk,
    MakeCoffee,
    PourWater,
    GrabBread,
    ControlAc { command: AcCommand },
    MopFloor,
    WipeTable,
    ControlCurtains { command: CurtainCommand },
    ControlLighting { command: PowerCommand },
    StraightenChair,
    TakeTowel,
}

impl SkillAction {
    pub fn name(&self) -> &'static str {
        match self {
            SkillAction::MoveTo { .. } => "move_to",
            SkillAction::ProduceAndGrabMilk => "produce_and_grab_milk",
            SkillAction::MakeCoffee => "make_coffee",
            SkillAction::PourWater => "pour_water",
            SkillAction::GrabBread => "grab_bread",
            SkillAction::ControlAc { .. } => "control_ac",
            SkillAction::MopFloor => "mop_floor",
            SkillAction::WipeTable => "wipe_table",
            SkillAction::ControlCurtains { .. } => "control_curtains",
            SkillAction::ControlLighting { .. } => "control_lighting",
            SkillAction::StraightenChair => "straighten_chair",
            SkillAction::TakeTowel => "take_towel",
        }
    }

    /// Render one plan-grammar line, `skill_name(arg, ...)`.
    pub fn render(&self) -> String {
        match self {
            SkillAction::MoveTo { target } => format!("move_to({target})"),
            SkillAction::ControlAc { command } => {
                let arg = match command {
                    AcCommand::Raise => "raise",
                    AcCommand::Lower => "lower",
                    AcCommand::On => "on",
                    AcCommand::Off => "off",
                };
                format!("control_ac({arg})")
            }
            SkillAction::ControlCurtains { command } => {
                let arg = match command {
                    CurtainCommand::Open => "open",
                    CurtainCommand::Close => "close",
                };
                format!("control_curtains({arg})")
            }
            SkillAction::ControlLighting { command } => {
                let arg = match command {
                    PowerCommand::On => "on",
                    PowerCommand::Off => "off",
                };
                format!("control_lighting({arg})")
            }
            other => format!("{}()", other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeReason {
    /// The skill succeeded but the world was already in the requested state.
    NoOp,
    TargetUnknown { target: String },
    Unreachable { target: String },
    PreconditionFailed { detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillOutcome {
    pub success: bool,
    pub reason: Option<OutcomeReason>,
    /// Meters traveled while executing this skill.
    pub distance_traveled: f64,
}

impl SkillOutcome {
    fn ok(distance: f64) -> Self {
        SkillOutcome { success: true, reason: None, distance_traveled: distance }
    }

    fn no_op(distance: f64) -> Self {
        SkillOutcome { success: true, reason: Some(OutcomeReason::NoOp), distance_traveled: distance }
    }

    fn fail(reason: OutcomeReason, distance: f64) -> Self {
        SkillOutcome { success: false, reason: Some(reason), distance_traveled: distance }
    }

    pub fn failure_detail(&self) -> Option<String> {
        match &self.reason {
            Some(OutcomeReason::NoOp) | None => None,
            Some(OutcomeReason::TargetUnknown { target }) => {
                Some(format!("target unknown: no {target} in memory"))
            }
            Some(OutcomeReason::Unreachable { target }) => {
                Some(format!("unreachable: path blocked short of {target}"))
            }
            Some(OutcomeReason::PreconditionFailed { detail }) => {
                Some(format!("precondition failed: {detail}"))
            }
        }
    }
}

/// The footprint that counts for reach checks: items sitting on a table are
/// reachable from anywhere at that table.
fn reach_footprint(scene: &WorldScene, obj: &crate::simworld::ObjectInstance) -> Rect {
    match obj.surface_of.and_then(|id| scene.object(id)) {
        Some(table) => table.footprint(),
        None => obj.footprint(),
    }
}

/// Nearest scene object of a category within manipulation reach.
fn reachable<'a>(
    scene: &'a WorldScene,
    robot: &RobotState,
    category: Category,
) -> Option<&'a crate::simworld::ObjectInstance> {
    let (x, y) = robot.position_xy();
    scene
        .objects_of(category)
        .map(|o| (reach_footprint(scene, o).distance_to(x, y), o.id, o))
        .filter(|(d, _, _)| *d <= PROXIMITY_RADIUS)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, _, o)| o)
}

fn not_in_reach(category: Category) -> SkillOutcome {
    SkillOutcome::fail(
        OutcomeReason::PreconditionFailed {
            detail: format!("no {} within reach", category.name()),
        },
        0.0,
    )
}

fn within_reach(robot: &RobotState, footprint: &Rect) -> bool {
    let (x, y) = robot.position_xy();
    footprint.distance_to(x, y) <= PROXIMITY_RADIUS
}

/// One straight leg toward the (clamped) goal center; the collision sweep
/// stops the robot at the footprint boundary.
fn direct_leg(scene: &WorldScene, robot: &mut RobotState, goal: Vec3) -> (f64, bool) {
    let inner = scene.bounds.shrink(ROBOT_RADIUS + 1e-6);
    let target = Vec3::new(
        goal.x.clamp(inner.min_x, inner.max_x),
        goal.y.clamp(inner.min_y, inner.max_y),
        0.0,
    );
    match move_to(scene, robot, target) {
        Ok(result) => (result.path_length, matches!(result.outcome, MoveOutcome::Reached)),
        Err(_) => (0.0, false),
    }
}

/// Navigate toward a remembered position; success means the robot ends
/// within manipulation reach of the footprint. A blocked direct line falls
/// back to the wall-following ring corridor: walk to the nearest ring
/// waypoint, follow the ring toward the one nearest the goal, then cut in.
/// Returns the distance traveled and the reach flag.
fn approach(
    scene: &WorldScene,
    robot: &mut RobotState,
    goal: Vec3,
    footprint: Rect,
) -> (f64, bool) {
    if within_reach(robot, &footprint) {
        return (0.0, true);
    }
    let (mut traveled, _) = direct_leg(scene, robot, goal);
    if within_reach(robot, &footprint) {
        return (traveled, true);
    }

    // Ring-corridor detour: enter the ring at the nearest waypoint with a
    // clear line from here, follow the corridor toward the waypoint nearest
    // the goal, then cut in.
    let ring = crate::simworld::waypoint_ring(&scene.bounds, 12, 1.0);
    if ring.len() < 2 {
        return (traveled, false);
    }
    let (rx, ry) = robot.position_xy();
    let dist2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let Some(entry) = (0..ring.len())
        .filter(|&i| path_clear(scene, (rx, ry), ring[i]))
        .min_by(|&a, &b| dist2((rx, ry), ring[a]).total_cmp(&dist2((rx, ry), ring[b])))
    else {
        return (traveled, false);
    };
    let exit = (0..ring.len())
        .min_by(|&a, &b| {
            dist2((goal.x, goal.y), ring[a]).total_cmp(&dist2((goal.x, goal.y), ring[b]))
        })
        .expect("ring is non-empty");

    let n = ring.len() as isize;
    let forward = (exit as isize - entry as isize).rem_euclid(n);
    let backward = (entry as isize - exit as isize).rem_euclid(n);
    let step: isize = if forward <= backward { 1 } else { -1 };
    let hops = forward.min(backward);

    let (d, _) = direct_leg(scene, robot, Vec3::new(ring[entry].0, ring[entry].1, 0.0));
    traveled += d;
    let mut idx = entry as isize;
    for _ in 0..hops {
        idx = (idx + step).rem_euclid(n);
        let (wx, wy) = ring[idx as usize];
        let (d, _) = direct_leg(scene, robot, Vec3::new(wx, wy, 0.0));
        traveled += d;
    }
    let (d, _) = direct_leg(scene, robot, goal);
    traveled += d;
    (traveled, within_reach(robot, &footprint))
}

/// Execute one skill against the world. Total: every action yields an
/// outcome, never a panic. Failed skills leave the world unchanged except
/// for robot motion on blocked moves.
pub fn execute(
    action: &SkillAction,
    scene: &mut WorldScene,
    robot: &mut RobotState,
    mem: &EnvironmentMemory,
) -> SkillOutcome {
    match action {
        SkillAction::MoveTo { target } => exec_move_to(target, scene, robot, mem),
        SkillAction::TakeTowel => exec_take_towel(scene, robot, mem),
        SkillAction::ProduceAndGrabMilk => exec_produce_milk(scene, robot),
        SkillAction::MakeCoffee => exec_set_bool(scene, robot, Category::CoffeeMachine, "brewed", true),
        SkillAction::PourWater => exec_set_bool(scene, robot, Category::Kettle, "poured", true),
        SkillAction::GrabBread => exec_grab_bread(scene, robot),
        SkillAction::ControlAc { command } => exec_control_ac(scene, robot, *command),
        SkillAction::MopFloor => exec_mop_floor(scene, robot),
        SkillAction::WipeTable => exec_wipe_table(scene, robot),
        SkillAction::ControlCurtains { command } => exec_set_bool(
            scene,
            robot,
            Category::Curtain,
            "open",
            matches!(command, CurtainCommand::Open),
        ),
        SkillAction::ControlLighting { command } => exec_power(
            scene,
            robot,
            Category::LightSwitch,
            matches!(command, PowerCommand::On),
        ),
        SkillAction::StraightenChair => exec_straighten_chair(scene, robot),
    }
}

/// Resolve a target name to the nearest remembered instance of that
/// category, ties broken by lowest id.
fn resolve_target<'a>(
    mem: &'a EnvironmentMemory,
    robot: &RobotState,
    name: &str,
) -> Result<&'a crate::mem::LanguageMemoryEntry, SkillOutcome> {
    let Some(category) = Category::from_name(name) else {
        return Err(SkillOutcome::fail(
            OutcomeReason::TargetUnknown { target: name.to_string() },
            0.0,
        ));
    };
    let (rx, ry) = robot.position_xy();
    mem.entries_of(category)
        .map(|e| (e.world_pos.dist_xy(Vec3::new(rx, ry, 0.0)), e.object_id, e))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, _, e)| e)
        .ok_or_else(|| {
            SkillOutcome::fail(OutcomeReason::TargetUnknown { target: name.to_string() }, 0.0)
        })
}

fn footprint_near(scene: &WorldScene, object_id: u32, fallback: Vec3) -> Rect {
    match scene.object(object_id) {
        Some(obj) => reach_footprint(scene, obj),
        None => Rect::new(fallback.x - 0.1, fallback.y - 0.1, fallback.x + 0.1, fallback.y + 0.1),
    }
}

fn exec_move_to(
    target: &str,
    scene: &mut WorldScene,
    robot: &mut RobotState,
    mem: &EnvironmentMemory,
) -> SkillOutcome {
    let entry = match resolve_target(mem, robot, target) {
        Ok(e) => e,
        Err(out) => return out,
    };
    let footprint = footprint_near(scene, entry.object_id, entry.world_pos);
    let (traveled, near) = approach(scene, robot, entry.world_pos, footprint);
    if near {
        SkillOutcome::ok(traveled)
    } else {
        SkillOutcome::fail(OutcomeReason::Unreachable { target: target.to_string() }, traveled)
    }
}

fn exec_take_towel(
    scene: &mut WorldScene,
    robot: &mut RobotState,
    mem: &EnvironmentMemory,
) -> SkillOutcome {
    if let Some(held) = robot.held_item {
        return SkillOutcome::fail(
            OutcomeReason::PreconditionFailed {
                detail: format!("hands are full (holding {})", held.name()),
            },
            0.0,
        );
    }
    // Walks to the nearest remembered towel, then picks it up.
    let mut traveled = 0.0;
    if reachable(scene, robot, Category::Towel).is_none() {
        let entry = match resolve_target(mem, robot, "towel") {
            Ok(e) => e,
            Err(out) => return out,
        };
        let footprint = footprint_near(scene, entry.object_id, entry.world_pos);
        let (dist, near) = approach(scene, robot, entry.world_pos, footprint);
        traveled = dist;
        if !near {
            return SkillOutcome::fail(
                OutcomeReason::Unreachable { target: "towel".into() },
                traveled,
            );
        }
    }
    let Some(towel) = reachable(scene, robot, Category::Towel) else {
        return SkillOutcome::fail(
            OutcomeReason::PreconditionFailed { detail: "no towel within reach".into() },
            traveled,
        );
    };
    let id = towel.id;
    apply_effect(scene, &WorldEffect::Remove { object: id }).expect("towel exists");
    robot.held_item = Some(Category::Towel);
    SkillOutcome::ok(traveled)
}

fn exec_produce_milk(scene: &mut WorldScene, robot: &mut RobotState) -> SkillOutcome {
    if let Some(held) = robot.held_item {
        return SkillOutcome::fail(
            OutcomeReason::PreconditionFailed {
                detail: format!("hands are full (holding {})", held.name()),
            },
            0.0,
        );
    }
    if reachable(scene, robot, Category::Table).is_none() {
        return not_in_reach(Category::Table);
    }
    // The glass is produced on the table and grabbed in one motion.
    robot.held_item = Some(Category::Milk);
    SkillOutcome::ok(0.0)
}

fn exec_grab_bread(scene: &mut WorldScene, robot: &mut RobotState) -> SkillOutcome {
    if let Some(held) = robot.held_item {
        return SkillOutcome::fail(
            OutcomeReason::PreconditionFailed {
                detail: format!("hands are full (holding {})", held.name()),
            },
            0.0,
        );
    }
    let Some(bread) = reachable(scene, robot, Category::Bread) else {
        return not_in_reach(Category::Bread);
    };
    let id = bread.id;
    apply_effect(scene, &WorldEffect::Remove { object: id }).expect("bread exists");
    robot.held_item = Some(Category::Bread);
    SkillOutcome::ok(0.0)
}

fn exec_set_bool(
    scene: &mut WorldScene,
    robot: &mut RobotState,
    category: Category,
    key: &str,
    value: bool,
) -> SkillOutcome {
    let Some(obj) = reachable(scene, robot, category) else {
        return not_in_reach(category);
    };
    let id = obj.id;
    let already = obj.state_bool(key) == value;
    if already {
        return SkillOutcome::no_op(0.0);
    }
    apply_effect(
        scene,
        &WorldEffect::SetState { object: id, key: key.into(), value: value.to_string() },
    )
    .expect("schema-declared transition");
    SkillOutcome::ok(0.0)
}

fn exec_power(
    scene: &mut WorldScene,
    robot: &mut RobotState,
    category: Category,
    on: bool,
) -> SkillOutcome {
    let Some(obj) = reachable(scene, robot, category) else {
        return not_in_reach(category);
    };
    let id = obj.id;
    let want = if on { "on" } else { "off" };
    if obj.state.get("power").map(String::as_str) == Some(want) {
        return SkillOutcome::no_op(0.0);
    }
    apply_effect(
        scene,
        &WorldEffect::SetState { object: id, key: "power".into(), value: want.into() },
    )
    .expect("schema-declared transition");
    SkillOutcome::ok(0.0)
}

fn exec_control_ac(scene: &mut WorldScene, robot: &mut RobotState, cmd: AcCommand) -> SkillOutcome {
    match cmd {
        AcCommand::On => exec_power(scene, robot, Category::AirConditioner, true),
        AcCommand::Off => exec_power(scene, robot, Category::AirConditioner, false),
        AcCommand::Raise | AcCommand::Lower => {
            let Some(obj) = reachable(scene, robot, Category::AirConditioner) else {
                return not_in_reach(Category::AirConditioner);
            };
            let id = obj.id;
            let level: i32 = obj
                .state
                .get("level")
                .and_then(|v| v.parse().ok())
                .unwrap_or(3);
            let next = match cmd {
                AcCommand::Raise => (level + 1).min(5),
                _ => (level - 1).max(1),
            };
            if next == level {
                return SkillOutcome::no_op(0.0);
            }
            apply_effect(
                scene,
                &WorldEffect::SetState { object: id, key: "level".into(), value: next.to_string() },
            )
            .expect("schema-declared transition");
            SkillOutcome::ok(0.0)
        }
    }
}

fn exec_mop_floor(scene: &mut WorldScene, robot: &mut RobotState) -> SkillOutcome {
    let (x, y) = robot.position_xy();
    let mut patches: Vec<_> = scene
        .objects_of(Category::FloorPatch)
        .map(|o| (o.footprint().distance_to(x, y), o.id, o.state_bool("dirty")))
        .filter(|(d, _, _)| *d <= PROXIMITY_RADIUS)
        .collect();
    patches.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let Some(&(_, id, dirty)) = patches.iter().find(|(_, _, dirty)| *dirty).or(patches.first())
    else {
        return SkillOutcome::fail(
            OutcomeReason::PreconditionFailed { detail: "no dirty floor region within reach".into() },
            0.0,
        );
    };
    if !dirty {
        return SkillOutcome::no_op(0.0);
    }
    apply_effect(
        scene,
        &WorldEffect::SetState { object: id, key: "dirty".into(), value: "false".into() },
    )
    .expect("schema-declared transition");
    SkillOutcome::ok(0.0)
}

fn exec_wipe_table(scene: &mut WorldScene, robot: &mut RobotState) -> SkillOutcome {
    if robot.held_item != Some(Category::Towel) {
        return SkillOutcome::fail(
            OutcomeReason::PreconditionFailed { detail: "not holding a towel".into() },
            0.0,
        );
    }
    let Some(table) = reachable(scene, robot, Category::Table) else {
        return not_in_reach(Category::Table);
    };
    let id = table.id;
    if !table.state_bool("dirty") {
        return SkillOutcome::no_op(0.0);
    }
    apply_effect(
        scene,
        &WorldEffect::SetState { object: id, key: "dirty".into(), value: "false".into() },
    )
    .expect("schema-declared transition");
    SkillOutcome::ok(0.0)
}

fn exec_straighten_chair(scene: &mut WorldScene, robot: &mut RobotState) -> SkillOutcome {
    let (x, y) = robot.position_xy();
    let mut chairs: Vec<_> = scene
        .objects_of(Category::Chair)
        .map(|o| (o.footprint().distance_to(x, y), o.id, o.state_bool("aligned")))
        .filter(|(d, _, _)| *d <= PROXIMITY_RADIUS)
        .collect();
    chairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if chairs.is_empty() {
        return not_in_reach(Category::Chair);
    }
    let Some(&(_, id, _)) = chairs.iter().find(|(_, _, aligned)| !aligned) else {
        return SkillOutcome::no_op(0.0);
    };
    apply_effect(
        scene,
        &WorldEffect::SetState { object: id, key: "aligned".into(), value: "true".into() },
    )
    .expect("schema-declared transition");
    SkillOutcome::ok(0.0)
}

/// One catalog row: the machine-readable skill signature planners receive.
#[derive(Debug, Clone, Serialize)]
pub struct SkillSignature {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub preconditions: &'static str,
    pub effect: &'static str,
    /// Not part of the original eleven control interfaces.
    pub derived: bool,
}

pub fn catalog() -> Vec<SkillSignature> {
    vec![
        SkillSignature {
            name: "move_to",
            args: &["target_name"],
            preconditions: "target category present in language memory; path clear",
            effect: "robot stands within reach of the nearest remembered instance",
            derived: false,
        },
        SkillSignature {
            name: "produce_and_grab_milk",
            args: &[],
            preconditions: "hands empty; within reach of a table",
            effect: "a glass of milk is produced on the table and held",
            derived: false,
        },
        SkillSignature {
            name: "make_coffee",
            args: &[],
            preconditions: "within reach of a coffee_machine",
            effect: "the machine brews coffee",
            derived: false,
        },
        SkillSignature {
            name: "pour_water",
            args: &[],
            preconditions: "within reach of a kettle",
            effect: "water is poured from the kettle",
            derived: false,
        },
        SkillSignature {
            name: "grab_bread",
            args: &[],
            preconditions: "hands empty; within reach of bread",
            effect: "the bread is held",
            derived: false,
        },
        SkillSignature {
            name: "control_ac",
            args: &["raise|lower|on|off"],
            preconditions: "within reach of an air_conditioner",
            effect: "power or level changes accordingly",
            derived: false,
        },
        SkillSignature {
            name: "mop_floor",
            args: &[],
            preconditions: "within reach of a dirty floor_patch",
            effect: "the floor region becomes clean",
            derived: false,
        },
        SkillSignature {
            name: "wipe_table",
            args: &[],
            preconditions: "holding a towel; within reach of a table",
            effect: "the table becomes clean",
            derived: false,
        },
        SkillSignature {
            name: "control_curtains",
            args: &["open|close"],
            preconditions: "within reach of a curtain",
            effect: "the curtain opens or closes",
            derived: false,
        },
        SkillSignature {
            name: "control_lighting",
            args: &["on|off"],
            preconditions: "within reach of a light_switch",
            effect: "the lights turn on or off",
            derived: false,
        },
        SkillSignature {
            name: "straighten_chair",
            args: &[],
            preconditions: "within reach of a chair",
            effect: "the nearest misplaced chair is aligned",
            derived: false,
        },
        SkillSignature {
            name: "take_towel",
            args: &[],
            preconditions: "hands empty; a towel known in memory and reachable",
            effect: "robot walks to the towel and holds it",
            derived: true,
        },
    ]
}

/// Stable line-oriented catalog rendering, one skill per line. This text is
/// what planners receive as the robot's capabilities.
pub fn catalog_text() -> String {
    let mut out = String::new();
    for sig in catalog() {
        let args = sig.args.join(", ");
        let tag = if sig.derived { " [derived]" } else { "" };
        out.push_str(&format!(
            "{}({}){} :: requires: {} :: effect: {}\n",
            sig.name, args, tag, sig.preconditions, sig.effect
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mem::{LanguageMemoryEntry, MemoryFlags};
    use crate::simworld::load_scene;

    fn fixture() -> (WorldScene, RobotState, EnvironmentMemory) {
        let scene = load_scene(
            br#"{ "bounds": [0, 0, 8, 6], "objects": [
                { "id": 1, "category": "table", "position": [4.0, 3.0, 0.36], "half_extents": [0.6, 0.45, 0.36], "state": { "dirty": "true" } },
                { "id": 2, "category": "coffee_machine", "position": [4.0, 3.2, 0.92], "half_extents": [0.15, 0.12, 0.2], "surface_of": 1 },
                { "id": 3, "category": "towel", "position": [1.0, 5.0, 0.75], "half_extents": [0.12, 0.12, 0.03] },
                { "id": 4, "category": "light_switch", "position": [0.08, 2.0, 1.1], "half_extents": [0.05, 0.08, 0.08] },
                { "id": 5, "category": "floor_patch", "position": [6.5, 1.0, 0.015], "half_extents": [0.4, 0.4, 0.015] },
                { "id": 6, "category": "chair", "position": [4.0, 1.8, 0.25], "half_extents": [0.2, 0.2, 0.25], "state": { "aligned": "false" } }
            ] }"#,
        )
        .unwrap();
        let robot = RobotState::new(1.0, 1.0, 0.0);
        let mut mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
        for obj in &scene.objects {
            mem.language.insert(
                obj.id,
                LanguageMemoryEntry {
                    object_id: obj.id,
                    category: obj.category,
                    world_pos: obj.position,
                    last_seen: 1,
                },
            );
        }
        (scene, robot, mem)
    }

    #[test]
    fn move_to_known_target_travels_roughly_straight() {
        let (mut scene, mut robot, mem) = fixture();
        let out = execute(
            &SkillAction::MoveTo { target: "coffee_machine".into() },
            &mut scene,
            &mut robot,
            &mem,
        );
        assert!(out.success, "{out:?}");
        let straight = ((4.0f64 - 1.0).powi(2) + (3.2 - 1.065f64).powi(2)).sqrt();
        assert!(out.distance_traveled <= straight + 0.05);
        let (x, y) = robot.position_xy();
        assert!(scene.object(1).unwrap().footprint().distance_to(x, y) <= PROXIMITY_RADIUS);
    }

    #[test]
    fn move_to_unknown_category_fails_without_crash() {
        let (mut scene, mut robot, mem) = fixture();
        let out = execute(&SkillAction::MoveTo { target: "piano".into() }, &mut scene, &mut robot, &mem);
        assert!(!out.success);
        assert!(matches!(out.reason, Some(OutcomeReason::TargetUnknown { .. })));
    }

    #[test]
    fn wipe_table_without_towel_fails_precondition() {
        let (mut scene, mut robot, mem) = fixture();
        execute(&SkillAction::MoveTo { target: "table".into() }, &mut scene, &mut robot, &mem);
        let before = scene.clone();
        let out = execute(&SkillAction::WipeTable, &mut scene, &mut robot, &mem);
        assert!(!out.success);
        assert_eq!(
            out.reason,
            Some(OutcomeReason::PreconditionFailed { detail: "not holding a towel".into() })
        );
        assert_eq!(scene, before, "failed skill must leave the world unchanged");
    }

    #[test]
    fn towel_then_wipe_cleans_the_table() {
        let (mut scene, mut robot, mem) = fixture();
        let out = execute(&SkillAction::TakeTowel, &mut scene, &mut robot, &mem);
        assert!(out.success, "{out:?}");
        assert_eq!(robot.held_item, Some(Category::Towel));
        assert!(scene.object(3).is_none(), "towel left the scene");
        let out = execute(&SkillAction::MoveTo { target: "table".into() }, &mut scene, &mut robot, &mem);
        assert!(out.success);
        let out = execute(&SkillAction::WipeTable, &mut scene, &mut robot, &mem);
        assert!(out.success);
        assert!(!scene.object(1).unwrap().state_bool("dirty"));
        // Wiping again is a no-op success.
        let out = execute(&SkillAction::WipeTable, &mut scene, &mut robot, &mem);
        assert!(out.success);
        assert_eq!(out.reason, Some(OutcomeReason::NoOp));
    }

    #[test]
    fn lighting_toggle_reports_no_op_when_already_set() {
        let (mut scene, mut robot, mem) = fixture();
        execute(&SkillAction::MoveTo { target: "light_switch".into() }, &mut scene, &mut robot, &mem);
        let on = SkillAction::ControlLighting { command: PowerCommand::On };
        let out = execute(&on, &mut scene, &mut robot, &mem);
        assert!(out.success);
        assert_eq!(out.reason, None);
        let out = execute(&on, &mut scene, &mut robot, &mem);
        assert!(out.success);
        assert_eq!(out.reason, Some(OutcomeReason::NoOp));
    }

    #[test]
    fn effects_touch_only_the_named_object() {
        let (mut scene, mut robot, mem) = fixture();
        execute(&SkillAction::MoveTo { target: "chair".into() }, &mut scene, &mut robot, &mem);
        let before = scene.clone();
        let out = execute(&SkillAction::StraightenChair, &mut scene, &mut robot, &mem);
        assert!(out.success);
        for obj in &scene.objects {
            let prior = before.object(obj.id).unwrap();
            if obj.id == 6 {
                assert!(obj.state_bool("aligned"));
            } else {
                assert_eq!(obj, prior);
            }
        }
    }

    #[test]
    fn mop_floor_needs_a_dirty_patch_within_reach() {
        let (mut scene, mut robot, mem) = fixture();
        let out = execute(&SkillAction::MopFloor, &mut scene, &mut robot, &mem);
        assert!(!out.success, "patch is far away");
        execute(&SkillAction::MoveTo { target: "floor_patch".into() }, &mut scene, &mut robot, &mem);
        let out = execute(&SkillAction::MopFloor, &mut scene, &mut robot, &mem);
        assert!(out.success, "{out:?}");
        assert!(!scene.object(5).unwrap().state_bool("dirty"));
        let out = execute(&SkillAction::MopFloor, &mut scene, &mut robot, &mem);
        assert_eq!(out.reason, Some(OutcomeReason::NoOp));
    }

    #[test]
    fn ac_level_clamps_at_bounds() {
        let scene_json = br#"{ "bounds": [0, 0, 8, 6], "objects": [
            { "id": 1, "category": "air_conditioner", "position": [0.2, 3.0, 1.3], "half_extents": [0.15, 0.3, 0.25], "state": { "level": "5", "power": "on" } }
        ] }"#;
        let mut scene = load_scene(scene_json).unwrap();
        let mut robot = RobotState::new(1.0, 3.0, 0.0);
        let mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
        let out = execute(&SkillAction::ControlAc { command: AcCommand::Raise }, &mut scene, &mut robot, &mem);
        assert_eq!(out.reason, Some(OutcomeReason::NoOp));
        let out = execute(&SkillAction::ControlAc { command: AcCommand::Lower }, &mut scene, &mut robot, &mem);
        assert!(out.success);
        assert_eq!(scene.object(1).unwrap().state.get("level").unwrap(), "4");
    }

    #[test]
    fn grab_with_full_hands_fails() {
        let (mut scene, mut robot, mem) = fixture();
        robot.held_item = Some(Category::Bread);
        let out = execute(&SkillAction::TakeTowel, &mut scene, &mut robot, &mem);
        assert!(!out.success);
        assert!(matches!(out.reason, Some(OutcomeReason::PreconditionFailed { .. })));
    }

    #[test]
    fn every_action_is_total_on_an_empty_world() {
        let scene_json = br#"{ "bounds": [0, 0, 8, 6], "objects": [] }"#;
        let mut scene = load_scene(scene_json).unwrap();
        let mut robot = RobotState::new(1.0, 1.0, 0.0);
        let mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
        let actions = [
            SkillAction::MoveTo { target: "table".into() },
            SkillAction::ProduceAndGrabMilk,
            SkillAction::MakeCoffee,
            SkillAction::PourWater,
            SkillAction::GrabBread,
            SkillAction::ControlAc { command: AcCommand::On },
            SkillAction::MopFloor,
            SkillAction::WipeTable,
            SkillAction::ControlCurtains { command: CurtainCommand::Open },
            SkillAction::ControlLighting { command: PowerCommand::Off },
            SkillAction::StraightenChair,
            SkillAction::TakeTowel,
        ];
        for action in &actions {
            let out = execute(action, &mut scene, &mut robot, &mem);
            assert!(!out.success, "{action:?} cannot succeed in an empty world");
            assert!(out.reason.is_some());
        }
    }

    #[test]
    fn catalog_lists_twelve_skills_with_one_derived() {
        let cat = catalog();
        assert_eq!(cat.len(), 12);
        assert_eq!(cat.iter().filter(|s| s.derived).count(), 1);
        let text = catalog_text();
        assert_eq!(text.lines().count(), 12);
        assert!(text.contains("take_towel() [derived]"));
    }
}
