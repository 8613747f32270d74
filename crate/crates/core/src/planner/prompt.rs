//! Prompt assembly. The templates are versioned documents (see
//! docs/prompts/); this module renders them. Memory renders as one
//! "id, category, (x, y, z)" line per entry plus a floor-plan summary.

use super::remote::{ChatMessage, MessageContent};
use super::{EqaRequest, PlannerRequest};
use crate::geometry::Vec3;
use crate::mem::EnvironmentMemory;
use crate::simworld::Rect;

pub const PROMPT_VERSION: &str = "v1";

/// One line per remembered object, sorted by id.
pub fn render_language_memory(mem: &EnvironmentMemory) -> String {
    let mut out = String::new();
    for entry in mem.entries() {
        out.push_str(&format!(
            "{}, {}, ({:.2}, {:.2}, {:.2})\n",
            entry.object_id,
            entry.category.name(),
            entry.world_pos.x,
            entry.world_pos.y,
            entry.world_pos.z
        ));
    }
    out
}

/// Inverse of `render_language_memory`, tolerant of trailing noise lines.
pub fn parse_language_memory(text: &str) -> Vec<(u32, String, Vec3)> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        let Some((id_part, rest)) = line.split_once(", ") else { continue };
        let Ok(id) = id_part.parse::<u32>() else { continue };
        let Some((category, coords)) = rest.split_once(", (") else { continue };
        let Some(coords) = coords.strip_suffix(')') else { continue };
        let parts: Vec<_> = coords.split(", ").collect();
        if parts.len() != 3 {
            continue;
        }
        let (Ok(x), Ok(y), Ok(z)) =
            (parts[0].parse::<f64>(), parts[1].parse::<f64>(), parts[2].parse::<f64>())
        else {
            continue;
        };
        out.push((id, category.to_string(), Vec3::new(x, y, z)));
    }
    out
}

/// Single-line floor-plan summary: grid shape, bounds, occupied fraction
/// and (while exploration is incomplete) the unexplored-region centroid.
pub fn render_floor_summary(mem: &EnvironmentMemory) -> String {
    let mut line = format!(
        "floor plan: {}x{} cells of {:.2} m over [{:.2}, {:.2}]x[{:.2}, {:.2}]; {:.1}% occupied",
        mem.plan.cols,
        mem.plan.rows,
        mem.plan.cell_size,
        mem.bounds.min_x,
        mem.bounds.min_y,
        mem.bounds.max_x,
        mem.bounds.max_y,
        100.0 * mem.plan.occupied_fraction()
    );
    if let Some((x, y)) = mem.plan.unknown_centroid() {
        line.push_str(&format!("; unexplored center ({x:.2}, {y:.2})"));
    }
    line
}

/// Recover the unexplored-region centroid from a floor summary line.
pub fn parse_floor_summary_frontier(text: &str) -> Option<(f64, f64)> {
    let (_, rest) = text.split_once("unexplored center (")?;
    let (coords, _) = rest.split_once(')')?;
    let (x, y) = coords.split_once(", ")?;
    Some((x.parse().ok()?, y.parse().ok()?))
}

/// Recover the bounds rectangle from a floor summary line.
pub fn parse_floor_summary_bounds(text: &str) -> Option<Rect> {
    let (_, rest) = text.split_once("over [")?;
    let (min_part, rest) = rest.split_once("]x[")?;
    let (max_part, _) = rest.split_once(']')?;
    let (min_x, min_y) = min_part.split_once(", ")?;
    let (max_x, max_y) = max_part.split_once(", ")?;
    Some(Rect::new(
        min_x.parse().ok()?,
        min_y.parse().ok()?,
        max_x.parse().ok()?,
        max_y.parse().ok()?,
    ))
}

fn memory_section(language: &Option<String>, floor: &Option<String>) -> String {
    let mut out = String::new();
    match language {
        Some(text) if !text.is_empty() => {
            out.push_str("Known objects (id, category, world coordinates in meters):\n");
            out.push_str(text);
        }
        Some(_) => out.push_str("No objects are remembered yet.\n"),
        None => {}
    }
    if let Some(floor) = floor {
        out.push_str(floor);
        out.push('\n');
    }
    if out.is_empty() {
        out.push_str("(no environment memory available)\n");
    }
    out
}

/// Chat messages for a planning request (template planner-v1).
pub fn build_planner_messages(req: &PlannerRequest) -> Vec<ChatMessage> {
    let system = format!(
        "You are the task planner of a cafe service robot. Decompose the \
         instruction into a plan using only the skills below, one \
         skill_name(arg) per line, nothing else.\n\nSkills:\n{}",
        req.catalog
    );
    let mut user = String::new();
    user.push_str("Environment memory:\n");
    user.push_str(&memory_section(&req.language_memory, &req.floor_plan_summary));
    for failed in &req.failed_plans {
        user.push_str("\nA previous plan failed and must not be repeated:\n");
        user.push_str(&failed.plan_text);
        user.push_str(&format!("failure: {}\n", failed.reason));
    }
    if let Some(note) = &req.retry_note {
        user.push_str(&format!("\nNote: {note}\n"));
    }
    user.push_str(&format!("\nInstruction: {}\n", req.instruction));
    vec![
        ChatMessage { role: "system".into(), content: MessageContent::Text(system) },
        ChatMessage { role: "user".into(), content: MessageContent::Text(user) },
    ]
}

/// Chat messages for a question-answering turn (template eqa-v1).
pub fn build_eqa_messages(req: &EqaRequest) -> Vec<ChatMessage> {
    let system = "You answer questions about a cafe by exploring it. If the \
                  information below suffices, reply `ANSWER: <text>`. \
                  Otherwise reply `EXPLORE: <x> <y>` with world coordinates \
                  to observe from next."
        .to_string();
    let mut user = String::new();
    user.push_str("Environment memory:\n");
    user.push_str(&memory_section(&req.language_memory, &req.floor_plan_summary));
    if !req.exploration.is_empty() {
        user.push_str("\nExploration so far:\n");
        for record in &req.exploration {
            let status = if record.reached { "reached" } else { "unreachable" };
            user.push_str(&format!("- {} ({status})\n", record.target));
        }
    }
    if req.force_answer {
        user.push_str("\nThe exploration budget is exhausted: you must ANSWER now.\n");
    }
    if let Some(note) = &req.retry_note {
        user.push_str(&format!("\nNote: {note}\n"));
    }
    user.push_str(&format!("\nQuestion: {}\n", req.question));
    vec![
        ChatMessage { role: "system".into(), content: MessageContent::Text(system) },
        ChatMessage { role: "user".into(), content: MessageContent::Text(user) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mem::{LanguageMemoryEntry, MemoryFlags};
    use crate::simworld::Category;

    fn memory_with_entries() -> EnvironmentMemory {
        let mut mem =
            EnvironmentMemory::new(Rect::new(0.0, 0.0, 8.0, 6.0), MemoryFlags::default());
        for (id, category, pos) in [
            (7u32, Category::CoffeeMachine, Vec3::new(4.0, 3.2, 0.92)),
            (3, Category::Towel, Vec3::new(1.0, 5.0, 0.78)),
        ] {
            mem.language.insert(
                id,
                LanguageMemoryEntry { object_id: id, category, world_pos: pos, last_seen: 1 },
            );
        }
        mem
    }

    #[test]
    fn language_memory_render_parse_round_trip() {
        let mem = memory_with_entries();
        let text = render_language_memory(&mem);
        let parsed = parse_language_memory(&text);
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].0, 3);
        assert_eq!(parsed[0].1, "towel");
        assert_eq!(parsed[1].1, "coffee_machine");
        assert!((parsed[1].2.x - 4.0).abs() < 1e-9);
    }

    #[test]
    fn floor_summary_round_trips_bounds() {
        let mem = memory_with_entries();
        let line = render_floor_summary(&mem);
        let bounds = parse_floor_summary_bounds(&line).unwrap();
        assert_eq!(bounds, Rect::new(0.0, 0.0, 8.0, 6.0));
    }

    #[test]
    fn planner_messages_embed_all_sections() {
        let req = PlannerRequest {
            instruction: "please make a cup of coffee".into(),
            catalog: crate::skills::catalog_text(),
            language_memory: Some("7, coffee_machine, (4.00, 3.20, 0.92)\n".into()),
            floor_plan_summary: None,
            failed_plans: vec![super::super::FailedPlan {
                plan_text: "make_coffee()\n".into(),
                reason: "precondition failed: no coffee_machine within reach".into(),
            }],
            retry_note: None,
        };
        let messages = build_planner_messages(&req);
        assert_eq!(messages.len(), 2);
        let MessageContent::Text(user) = &messages[1].content else { panic!() };
        assert!(user.contains("coffee_machine"));
        assert!(user.contains("must not be repeated"));
        assert!(user.contains("please make a cup of coffee"));
    }
}
