//! Seeded generation of colloquial instructions with validated grounding
//! plans.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::harness::{default_start, exploration_tour, TOUR_WAYPOINTS};
use crate::mem::{EnvironmentMemory, MemoryFlags};
use crate::simworld::{RobotState, WorldScene};
use crate::skills::{execute, SkillAction};
use crate::tasks::{SubtaskKind, ALL_SUBTASKS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionLength {
    /// 2 to 3 sub-tasks.
    Short,
    /// 3 to 5 sub-tasks.
    Long,
}

impl InstructionLength {
    pub fn subtask_range(self) -> std::ops::RangeInclusive<usize> {
        match self {
            InstructionLength::Short => 2..=3,
            InstructionLength::Long => 3..=5,
        }
    }
}

impl std::str::FromStr for InstructionLength {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(InstructionLength::Short),
            "long" => Ok(InstructionLength::Long),
            other => Err(format!("instruction length must be short or long, got {other:?}")),
        }
    }
}

/// One evaluation case: colloquial text plus the reference decomposition
/// that is known to execute from the episode start state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionCase {
    pub text: String,
    pub subtasks: Vec<SubtaskKind>,
    pub grounding_plan: Vec<SkillAction>,
}

#[derive(Debug, Error)]
pub enum InstructionError {
    #[error("no executable subtasks are available in this scene")]
    NoEligibleSubtasks,
    #[error("could not assemble a validated instruction after {0} attempts")]
    ValidationExhausted(usize),
}

const WRAPPERS: [(&str, &str); 4] = [
    ("Could you ", "?"),
    ("Hey, please ", "."),
    ("Hi! Would you ", "?"),
    ("When you get a moment, ", "."),
];

fn join_phrases(phrases: &[&str]) -> String {
    match phrases {
        [] => String::new(),
        [one] => (*one).to_string(),
        [head @ .., last] => format!("{}, and then {}", head.join(", then "), last),
    }
}

/// Dry-run a grounding plan from the canonical episode start (exploration
/// tour first, then step-by-step execution).
fn grounding_executes(scene: &WorldScene, start: &RobotState, plan: &[SkillAction]) -> bool {
    let mut world = scene.clone();
    let mut robot = start.clone();
    let mut mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
    exploration_tour(&world, &mut robot, &mut mem, TOUR_WAYPOINTS);
    plan.iter().all(|step| execute(step, &mut world, &mut robot, &mem).success)
}

/// Seeded sampling of sub-task sequences rendered to colloquial text.
/// Each case's grounding plan is validated by dry-run execution; cases whose
/// plans cannot run from the start state are resampled.
pub fn generate_instructions(
    seed: u64,
    length: InstructionLength,
    count: usize,
    scene: &WorldScene,
) -> Result<Vec<InstructionCase>, InstructionError> {
    let start = default_start(scene);
    let eligible: Vec<SubtaskKind> = ALL_SUBTASKS
        .into_iter()
        .filter(|k| {
            k.required_categories()
                .iter()
                .all(|c| scene.objects_of(*c).next().is_some())
        })
        .collect();
    if eligible.len() < *length.subtask_range().end() {
        return Err(InstructionError::NoEligibleSubtasks);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    let max_attempts = count * 200;
    let mut attempts = 0;

    while cases.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(InstructionError::ValidationExhausted(max_attempts));
        }

        let k = rng.random_range(length.subtask_range());
        let mut pool = eligible.clone();
        pool.shuffle(&mut rng);
        let picked: Vec<SubtaskKind> = pool.into_iter().take(k).collect();
        // At most one subtask may end with the robot's hand occupied.
        if picked.iter().filter(|s| s.occupies_hand()).count() > 1 {
            continue;
        }

        let phrases: Vec<&str> = picked
            .iter()
            .map(|s| *s.phrases().choose(&mut rng).expect("every subtask has phrases"))
            .collect();
        let (prefix, suffix) = WRAPPERS[rng.random_range(0..WRAPPERS.len())];
        let text = format!("{prefix}{}{suffix}", join_phrases(&phrases));

        let grounding_plan: Vec<SkillAction> =
            picked.iter().flat_map(|s| s.reference_plan()).collect();
        if !grounding_executes(scene, &start, &grounding_plan) {
            continue;
        }
        cases.push(InstructionCase { text, subtasks: picked, grounding_plan });
    }
    Ok(cases)
}
