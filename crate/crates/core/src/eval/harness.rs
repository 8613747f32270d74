//! The three-phase evaluation pipeline: exploration, instruction issue,
//! plan execution and scoring; plus the question-answering harness with
//! single- and multi-round modes. Cases run in parallel worker lanes; the
//! report preserves case order regardless of the lane count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instructions::InstructionCase;
use super::metrics::score_plan;
use super::report::{
    EqaCaseRecord, EqaReport, InstructionCaseRecord, InstructionReport, StepRecord, SubtaskRecord,
};
use crate::eqa::Dataset;
use crate::geometry::Vec3;
use crate::mem::{EnvironmentMemory, MemoryFlags};
use crate::planner::{
    plan, run_eqa_episode, EpisodeCaps, PlannerBackend, PlannerRequest,
};
use crate::planner::{render_floor_summary, render_language_memory};
use crate::simworld::{load_scene, move_to, observe_four_directions, RobotState, WorldScene};
use crate::skills::{catalog_text, execute, SkillAction};
use crate::util::normalize_answer;

/// Waypoints in the canonical exploration circuit.
pub const TOUR_WAYPOINTS: usize = 10;

/// Canonical episode start pose, next to the bounds minimum corner.
pub fn default_start(scene: &WorldScene) -> RobotState {
    RobotState::new(scene.bounds.min_x + 0.7, scene.bounds.min_y + 0.7, 0.0)
}

/// Which memory is withheld from planner requests (instruction evaluation)
/// or never built (question-answering evaluation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AblationFlags {
    pub no_language_memory: bool,
    pub no_image_memory: bool,
}

impl AblationFlags {
    pub fn no_mem() -> Self {
        AblationFlags { no_language_memory: true, no_image_memory: true }
    }

    pub fn memory_flags(&self) -> MemoryFlags {
        MemoryFlags {
            language_memory: !self.no_language_memory,
            image_memory: !self.no_image_memory,
        }
    }
}

/// Drive the fixed waypoint circuit, observing in four directions at the
/// start pose and at every waypoint. Observations start facing the room
/// center so the view fans sweep the interior. Returns the distance
/// traveled.
pub fn exploration_tour(
    scene: &WorldScene,
    robot: &mut RobotState,
    mem: &mut EnvironmentMemory,
    waypoints: usize,
) -> f64 {
    let labels = scene.category_map();
    let (cx, cy) = scene.bounds.center();
    let mut observe = |robot: &mut RobotState, mem: &mut EnvironmentMemory| {
        let (x, y) = robot.position_xy();
        let toward_center = (cy - y).atan2(cx - x);
        robot.pose = crate::geometry::RobotPose::planar(x, y, toward_center);
        for frame in observe_four_directions(scene, robot) {
            mem.integrate_frame(&frame, &labels);
        }
    };
    let mut path = 0.0;
    observe(robot, mem);
    for (x, y) in crate::simworld::waypoint_ring(&scene.bounds, waypoints, 1.0) {
        if let Ok(result) = move_to(scene, robot, Vec3::new(x, y, 0.0)) {
            path += result.path_length;
        }
        observe(robot, mem);
    }
    path
}

/// Run `f` over item indices on `jobs` worker lanes, preserving item order
/// in the output.
fn parallel_indexed<R: Send>(
    len: usize,
    jobs: usize,
    f: impl Fn(usize) -> R + Sync,
) -> Vec<R> {
    let jobs = jobs.max(1).min(len.max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..len).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= len {
                    break;
                }
                let out = f(idx);
                results.lock().expect("worker lane poisoned")[idx] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("worker lane poisoned")
        .into_iter()
        .map(|r| r.expect("every index was processed"))
        .collect()
}

/// Does the subtask's reference sequence appear, in order, among the
/// successfully executed steps of the generated plan?
fn subtask_satisfied(
    reference: &[SkillAction],
    executed: &[(SkillAction, bool)],
) -> bool {
    let mut want = reference.iter();
    let mut need = want.next();
    for (step, success) in executed {
        if let Some(target) = need {
            if *success && step == target {
                need = want.next();
            }
        }
    }
    need.is_none()
}

/// Phase 1-3 for one case: exploration tour, planner request (with memory
/// sections subject to the ablation), plan execution and scoring.
fn run_instruction_case(
    base_scene: &WorldScene,
    case: &InstructionCase,
    ablation: AblationFlags,
    backend: &mut dyn PlannerBackend,
) -> InstructionCaseRecord {
    let mut scene = base_scene.clone();
    let mut robot = default_start(base_scene);
    let mut mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
    exploration_tour(&scene, &mut robot, &mut mem, TOUR_WAYPOINTS);

    let request = PlannerRequest {
        instruction: case.text.clone(),
        catalog: catalog_text(),
        language_memory: (!ablation.no_language_memory).then(|| render_language_memory(&mem)),
        floor_plan_summary: (!ablation.no_image_memory).then(|| render_floor_summary(&mem)),
        failed_plans: Vec::new(),
        retry_note: None,
    };

    let grounding_rendered: Vec<String> =
        case.grounding_plan.iter().map(|s| s.render()).collect();

    let generated = match plan(&request, backend) {
        Ok(plan) => plan,
        Err(err) => {
            return InstructionCaseRecord {
                instruction: case.text.clone(),
                grounding_plan: grounding_rendered,
                plan_text: String::new(),
                planner_error: Some(err.to_string()),
                steps: Vec::new(),
                subtasks: case
                    .subtasks
                    .iter()
                    .map(|kind| SubtaskRecord { kind: *kind, success: false })
                    .collect(),
                score: score_plan(&case.grounding_plan, &[], false),
            };
        }
    };

    let mut steps = Vec::with_capacity(generated.steps.len());
    let mut executed = Vec::with_capacity(generated.steps.len());
    for action in &generated.steps {
        let outcome = execute(action, &mut scene, &mut robot, &mem);
        steps.push(StepRecord {
            action: action.render(),
            success: outcome.success,
            reason: outcome.failure_detail(),
            distance_m: outcome.distance_traveled,
        });
        executed.push((action.clone(), outcome.success));
    }

    let subtasks: Vec<SubtaskRecord> = case
        .subtasks
        .iter()
        .map(|kind| SubtaskRecord {
            kind: *kind,
            success: subtask_satisfied(&kind.reference_plan(), &executed),
        })
        .collect();

    let all_steps_ok = executed.iter().all(|(_, ok)| *ok);
    let task_complete = all_steps_ok && subtasks.iter().all(|s| s.success);
    let score = score_plan(&case.grounding_plan, &generated.steps, task_complete);

    InstructionCaseRecord {
        instruction: case.text.clone(),
        grounding_plan: grounding_rendered,
        plan_text: generated.raw_text,
        planner_error: None,
        steps,
        subtasks,
        score,
    }
}

/// Instruction-planning evaluation over prepared cases.
pub fn run_instruction_eval(
    scene: &WorldScene,
    cases: &[InstructionCase],
    ablation: AblationFlags,
    jobs: usize,
    make_backend: &(dyn Fn() -> Box<dyn PlannerBackend> + Sync),
    config: serde_json::Value,
) -> InstructionReport {
    let records = parallel_indexed(cases.len(), jobs, |idx| {
        let mut backend = make_backend();
        run_instruction_case(scene, &cases[idx], ablation, backend.as_mut())
    });
    InstructionReport::new(config, records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqaMode {
    /// Every question starts from an empty memory and the start pose.
    SingleRound,
    /// Memory, failure history and the robot pose persist across a scene's
    /// questions.
    MultiRound,
}

impl std::str::FromStr for EqaMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(EqaMode::SingleRound),
            "multi" => Ok(EqaMode::MultiRound),
            other => Err(format!("mode must be single or multi, got {other:?}")),
        }
    }
}

/// Select up to `limit` scenes from the dataset (seeded, order-preserving),
/// then run every selected question in the chosen mode.
pub fn run_eqa_eval(
    dataset: &Dataset,
    mode: EqaMode,
    ablation: AblationFlags,
    scene_limit: Option<(usize, u64)>,
    caps: EpisodeCaps,
    jobs: usize,
    make_backend: &(dyn Fn() -> Box<dyn PlannerBackend> + Sync),
    config: serde_json::Value,
) -> EqaReport {
    // Group items by scene, preserving dataset order.
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<&crate::eqa::DatasetItem>> = BTreeMap::new();
    for item in &dataset.items {
        if !groups.contains_key(&item.scene_id) {
            order.push(item.scene_id.clone());
        }
        groups.entry(item.scene_id.clone()).or_default().push(item);
    }
    if let Some((limit, seed)) = scene_limit {
        if limit < order.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked: Vec<usize> = (0..order.len()).collect();
            picked.shuffle(&mut rng);
            let mut chosen: Vec<usize> = picked.into_iter().take(limit).collect();
            chosen.sort_unstable();
            order = chosen.into_iter().map(|i| order[i].clone()).collect();
        }
    }

    let scene_records = parallel_indexed(order.len(), jobs, |scene_idx| {
        let scene_id = &order[scene_idx];
        let items = &groups[scene_id];
        let scene = load_scene(items[0].scene.to_string().as_bytes())
            .expect("dataset scenes are validated on read");
        let mut backend = make_backend();

        let mut records = Vec::with_capacity(items.len());
        // Multi-round state persists across the scene's questions.
        let mut world = scene.clone();
        let mut robot = default_start(&scene);
        let mut mem = EnvironmentMemory::new(scene.bounds, ablation.memory_flags());
        let mut history = Vec::new();

        for item in items {
            if mode == EqaMode::SingleRound {
                world = scene.clone();
                robot = default_start(&scene);
                mem = EnvironmentMemory::new(scene.bounds, ablation.memory_flags());
                history = Vec::new();
            }
            let record = match run_eqa_episode(
                &item.question,
                &mut world,
                &mut robot,
                &mut mem,
                &mut history,
                backend.as_mut(),
                &caps,
            ) {
                Ok(outcome) => EqaCaseRecord {
                    scene_id: item.scene_id.clone(),
                    question: item.question.clone(),
                    expected: item.answer.clone(),
                    answer: outcome.answer.clone(),
                    correct: normalize_answer(&outcome.answer)
                        == normalize_answer(&item.answer),
                    exploration_count: outcome.exploration_count,
                    unreachable_count: outcome.unreachable_count,
                    path_length_cm: outcome.path_length_m * 100.0,
                    error: None,
                },
                Err(err) => EqaCaseRecord {
                    scene_id: item.scene_id.clone(),
                    question: item.question.clone(),
                    expected: item.answer.clone(),
                    answer: String::new(),
                    correct: false,
                    exploration_count: 0,
                    unreachable_count: 0,
                    path_length_cm: 0.0,
                    error: Some(err.to_string()),
                },
            };
            records.push(record);
        }
        records
    });

    let cases: Vec<EqaCaseRecord> = scene_records.into_iter().flatten().collect();
    EqaReport::new(config, cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqa::{default_bounds, randomize_scene};
    use crate::eval::instructions::{generate_instructions, InstructionLength};
    use crate::planner::ScriptedOracle;
    use crate::simworld::ALL_CATEGORIES;

    fn scripted() -> Box<dyn PlannerBackend> {
        Box::new(ScriptedOracle::new())
    }

    #[test]
    fn tour_builds_memory_and_travels() {
        let scene = randomize_scene(3, &ALL_CATEGORIES, default_bounds());
        let mut robot = default_start(&scene);
        let mut mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
        let path = exploration_tour(&scene, &mut robot, &mut mem, TOUR_WAYPOINTS);
        assert!(path > 5.0, "tour should cover the room, got {path}");
        assert!(mem.language.len() >= scene.objects.len() / 2, "saw {} of {}", mem.language.len(), scene.objects.len());
        assert!(mem.plan.occupied_count() > 0);
    }

    #[test]
    fn scripted_eval_with_memory_succeeds_on_every_case() {
        let scene = randomize_scene(3, &ALL_CATEGORIES, default_bounds());
        let cases = generate_instructions(11, InstructionLength::Short, 4, &scene).unwrap();
        let report = run_instruction_eval(
            &scene,
            &cases,
            AblationFlags::default(),
            2,
            &scripted,
            serde_json::json!({"test": "with-memory"}),
        );
        assert_eq!(report.aggregates.esr_instruction, 1.0, "{}", report.summary());
        assert!(report.aggregates.ssl > 0.9);
        assert!(report.metric_chain_holds());
    }

    #[test]
    fn ablated_eval_scores_strictly_lower() {
        let scene = randomize_scene(3, &ALL_CATEGORIES, default_bounds());
        let cases = generate_instructions(11, InstructionLength::Short, 8, &scene).unwrap();
        let full = run_instruction_eval(
            &scene,
            &cases,
            AblationFlags::default(),
            2,
            &scripted,
            serde_json::json!({}),
        );
        let ablated = run_instruction_eval(
            &scene,
            &cases,
            AblationFlags::no_mem(),
            2,
            &scripted,
            serde_json::json!({}),
        );
        assert!(ablated.aggregates.esr_instruction < full.aggregates.esr_instruction);
        assert!(ablated.metric_chain_holds());
    }

    #[test]
    fn parallel_lanes_do_not_change_the_report() {
        let scene = randomize_scene(5, &ALL_CATEGORIES, default_bounds());
        let cases = generate_instructions(13, InstructionLength::Short, 6, &scene).unwrap();
        let config = serde_json::json!({"jobs": "x"});
        let one = run_instruction_eval(
            &scene, &cases, AblationFlags::default(), 1, &scripted, config.clone(),
        );
        let four = run_instruction_eval(
            &scene, &cases, AblationFlags::default(), 4, &scripted, config,
        );
        assert_eq!(one, four);
    }
}
