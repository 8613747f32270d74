//! The closed question-answering loop: observe from four directions, judge
//! sufficiency, explore, repeat. Tracks the exploration count, unreachable
//! plans and path length.

use super::{
    parse_eqa_verdict, EqaRequest, EqaVerdict, ExploreRecord, ExploreTarget, PlannerBackend,
    PlannerError,
};
use crate::geometry::Vec3;
use crate::mem::EnvironmentMemory;
use crate::planner::prompt::{render_floor_summary, render_language_memory};
use crate::simworld::{move_to, observe_four_directions, Category, RobotState, WorldScene};

#[derive(Debug, Clone, Copy)]
pub struct EpisodeCaps {
    /// Maximum planner-directed exploration moves per episode.
    pub max_explorations: usize,
}

impl Default for EpisodeCaps {
    fn default() -> Self {
        EpisodeCaps { max_explorations: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EqaEpisodeOutcome {
    pub answer: String,
    /// Planner-directed moves that reached their target, excluding the
    /// initial observation at the starting position.
    pub exploration_count: u32,
    /// Planned targets that turned out to be inaccessible.
    pub unreachable_count: u32,
    /// Meters traveled from receiving the question to answering it.
    pub path_length_m: f64,
}

fn build_request(
    question: &str,
    mem: &EnvironmentMemory,
    history: &[ExploreRecord],
    force_answer: bool,
) -> EqaRequest {
    EqaRequest {
        question: question.to_string(),
        language_memory: mem.flags.language_memory.then(|| render_language_memory(mem)),
        floor_plan_summary: mem.flags.image_memory.then(|| render_floor_summary(mem)),
        exploration: history.to_vec(),
        force_answer,
        retry_note: None,
    }
}

/// One sufficiency judgment, with a single retry on a malformed verdict.
pub fn eqa_step(
    question: &str,
    mem: &EnvironmentMemory,
    history: &[ExploreRecord],
    force_answer: bool,
    backend: &mut dyn PlannerBackend,
) -> Result<EqaVerdict, PlannerError> {
    let req = build_request(question, mem, history, force_answer);
    let text = backend.eqa_text(&req)?;
    match parse_eqa_verdict(&text) {
        Ok(verdict) => Ok(verdict),
        Err(first) => {
            let mut retry = req.clone();
            retry.retry_note = Some(format!(
                "previous output was malformed ({first}); reply with ANSWER: or EXPLORE:"
            ));
            let text2 = backend.eqa_text(&retry)?;
            match parse_eqa_verdict(&text2) {
                Ok(verdict) => Ok(verdict),
                Err(second) => Err(PlannerError::VerdictParse { first, second }),
            }
        }
    }
}

fn observe_and_integrate(scene: &WorldScene, robot: &RobotState, mem: &mut EnvironmentMemory) {
    let labels = scene.category_map();
    for frame in observe_four_directions(scene, robot) {
        mem.integrate_frame(&frame, &labels);
    }
}

/// Resolve an exploration target to world coordinates. Object names go
/// through the language memory (nearest remembered instance).
fn resolve_target(
    target: &ExploreTarget,
    mem: &EnvironmentMemory,
    robot: &RobotState,
) -> Option<Vec3> {
    match target {
        ExploreTarget::Point(x, y) => Some(Vec3::new(*x, *y, 0.0)),
        ExploreTarget::Object(name) => {
            let category = Category::from_name(name)?;
            let (rx, ry) = robot.position_xy();
            mem.entries_of(category)
                .map(|e| (e.world_pos.dist_xy(Vec3::new(rx, ry, 0.0)), e.object_id, e.world_pos))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, _, p)| p)
        }
    }
}

/// Run one question to completion. The episode terminates within the caps
/// for every backend: explorations are bounded and the final verdict is
/// forced to answer (a backend that still refuses yields an empty answer).
pub fn run_eqa_episode(
    question: &str,
    scene: &mut WorldScene,
    robot: &mut RobotState,
    mem: &mut EnvironmentMemory,
    history: &mut Vec<ExploreRecord>,
    backend: &mut dyn PlannerBackend,
    caps: &EpisodeCaps,
) -> Result<EqaEpisodeOutcome, PlannerError> {
    let mut outcome = EqaEpisodeOutcome::default();

    // Initial four-direction observation at the starting position; not
    // counted as exploration.
    observe_and_integrate(scene, robot, mem);

    for _ in 0..caps.max_explorations {
        match eqa_step(question, mem, history, false, backend)? {
            EqaVerdict::Sufficient { answer } => {
                outcome.answer = answer;
                return Ok(outcome);
            }
            EqaVerdict::Explore { target } => {
                let desc = target.describe();
                match resolve_target(&target, mem, robot) {
                    None => {
                        outcome.unreachable_count += 1;
                        history.push(ExploreRecord { target: desc, reached: false });
                    }
                    Some(goal) => match move_to(scene, robot, goal) {
                        Ok(result) => {
                            outcome.path_length_m += result.path_length;
                            let reached = result.reached();
                            if reached {
                                outcome.exploration_count += 1;
                            } else {
                                outcome.unreachable_count += 1;
                            }
                            history.push(ExploreRecord { target: desc, reached });
                            observe_and_integrate(scene, robot, mem);
                        }
                        Err(_) => {
                            outcome.unreachable_count += 1;
                            history.push(ExploreRecord { target: desc, reached: false });
                        }
                    },
                }
            }
        }
    }

    // Exploration budget exhausted: the backend must answer now.
    match eqa_step(question, mem, history, true, backend)? {
        EqaVerdict::Sufficient { answer } => outcome.answer = answer,
        EqaVerdict::Explore { .. } => outcome.answer = String::new(),
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mem::MemoryFlags;
    use crate::planner::BackendError;
    use crate::planner::ScriptedOracle;
    use crate::simworld::load_scene;

    fn scene_with(objects: &str) -> WorldScene {
        let json = format!(r#"{{ "bounds": [0, 0, 8, 6], "objects": [{objects}] }}"#);
        load_scene(json.as_bytes()).unwrap()
    }

    fn episode_parts(objects: &str) -> (WorldScene, RobotState, EnvironmentMemory) {
        let scene = scene_with(objects);
        let robot = RobotState::new(0.7, 0.7, 0.0);
        let mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
        (scene, robot, mem)
    }

    #[test]
    fn answer_from_initial_observation_costs_nothing() {
        // The kettle is right in front of the start pose.
        let (mut scene, mut robot, mut mem) = episode_parts(
            r#"{ "id": 1, "category": "kettle", "position": [2.0, 0.7, 0.4], "half_extents": [0.1, 0.1, 0.12] }"#,
        );
        let mut history = Vec::new();
        let mut backend = ScriptedOracle::new();
        let outcome = run_eqa_episode(
            "Is there any kettle in the cafe?",
            &mut scene,
            &mut robot,
            &mut mem,
            &mut history,
            &mut backend,
            &EpisodeCaps::default(),
        )
        .unwrap();
        assert_eq!(outcome.answer, "yes");
        assert_eq!(outcome.exploration_count, 0);
        assert_eq!(outcome.unreachable_count, 0);
        assert_eq!(outcome.path_length_m, 0.0);
    }

    #[test]
    fn absent_object_explores_then_answers_no() {
        let (mut scene, mut robot, mut mem) = episode_parts(
            r#"{ "id": 1, "category": "table", "position": [4.0, 3.0, 0.36], "half_extents": [0.6, 0.45, 0.36] }"#,
        );
        let mut history = Vec::new();
        let mut backend = ScriptedOracle::new();
        let outcome = run_eqa_episode(
            "Is there any mop in the cafe?",
            &mut scene,
            &mut robot,
            &mut mem,
            &mut history,
            &mut backend,
            &EpisodeCaps::default(),
        )
        .unwrap();
        assert_eq!(outcome.answer, "no");
        assert!(outcome.exploration_count >= 1, "should have explored: {outcome:?}");
        assert!(outcome.path_length_m > 0.0);
        assert!(!history.is_empty());
    }

    #[test]
    fn episode_terminates_within_caps_for_adversarial_backends() {
        struct AlwaysExplore;
        impl PlannerBackend for AlwaysExplore {
            fn name(&self) -> &'static str {
                "adversarial"
            }
            fn plan_text(
                &mut self,
                _req: &crate::planner::PlannerRequest,
            ) -> Result<String, BackendError> {
                Ok(String::new())
            }
            fn eqa_text(&mut self, _req: &EqaRequest) -> Result<String, BackendError> {
                Ok("EXPLORE: 4.00 3.00".into())
            }
        }
        let (mut scene, mut robot, mut mem) = episode_parts("");
        let mut history = Vec::new();
        let mut backend = AlwaysExplore;
        let caps = EpisodeCaps { max_explorations: 3 };
        let outcome = run_eqa_episode(
            "Is there any mop in the cafe?",
            &mut scene,
            &mut robot,
            &mut mem,
            &mut history,
            &mut backend,
            &caps,
        )
        .unwrap();
        // The adversary never answers; the episode still terminates.
        assert_eq!(outcome.answer, "");
        assert_eq!(history.len(), 3);
    }

    #[test]
    fn blocked_exploration_increments_upc_and_is_recorded() {
        struct OneBadTarget {
            sent: bool,
        }
        impl PlannerBackend for OneBadTarget {
            fn name(&self) -> &'static str {
                "one-bad-target"
            }
            fn plan_text(
                &mut self,
                _req: &crate::planner::PlannerRequest,
            ) -> Result<String, BackendError> {
                Ok(String::new())
            }
            fn eqa_text(&mut self, req: &EqaRequest) -> Result<String, BackendError> {
                if !self.sent {
                    self.sent = true;
                    // Dead center of the big table: unreachable.
                    Ok("EXPLORE: 4.00 3.00".into())
                } else {
                    assert!(
                        req.exploration.iter().any(|r| r.target == "4.00 3.00" && !r.reached),
                        "failure history must carry the blocked target"
                    );
                    Ok("ANSWER: no".into())
                }
            }
        }
        let (mut scene, mut robot, mut mem) = episode_parts(
            r#"{ "id": 1, "category": "table", "position": [4.0, 3.0, 0.36], "half_extents": [0.6, 0.45, 0.36] }"#,
        );
        let mut history = Vec::new();
        let mut backend = OneBadTarget { sent: false };
        let outcome = run_eqa_episode(
            "Is there any mop in the cafe?",
            &mut scene,
            &mut robot,
            &mut mem,
            &mut history,
            &mut backend,
            &EpisodeCaps::default(),
        )
        .unwrap();
        assert_eq!(outcome.unreachable_count, 1);
        assert_eq!(outcome.exploration_count, 0);
        assert!(outcome.path_length_m > 0.0, "partial travel counts toward PL");
    }
}
