//! Evaluation reports: per-case records plus aggregates, with the seed and
//! config hash for replay. Serialization is deterministic (fixed field
//! order, no timestamps).

use serde::{Deserialize, Serialize};

use super::metrics::{esr, ssl, PlanScore};
use crate::tasks::SubtaskKind;
use crate::util::stable_hash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Rendered grammar line of the executed step.
    pub action: String,
    pub success: bool,
    /// Failure or no-op note, when present.
    pub reason: Option<String>,
    pub distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskRecord {
    pub kind: SubtaskKind,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionCaseRecord {
    pub instruction: String,
    pub grounding_plan: Vec<String>,
    /// The planner's verbatim output.
    pub plan_text: String,
    /// Planner-level failure (transport or unparsable output).
    pub planner_error: Option<String>,
    pub steps: Vec<StepRecord>,
    pub subtasks: Vec<SubtaskRecord>,
    pub score: PlanScore,
}

impl InstructionCaseRecord {
    /// Whole-task success: every step executed and every subtask satisfied.
    pub fn instruction_success(&self) -> bool {
        self.score.success
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionAggregates {
    pub cases: usize,
    /// ESR over whole instructions.
    pub esr_instruction: f64,
    /// ESR pooled over all sub-tasks.
    pub esr_subtask: f64,
    pub ssl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub prompt_version: String,
    pub cases: Vec<InstructionCaseRecord>,
    pub aggregates: InstructionAggregates,
}

pub fn compute_instruction_aggregates(cases: &[InstructionCaseRecord]) -> InstructionAggregates {
    let n = cases.len();
    let successes = cases.iter().filter(|c| c.instruction_success()).count();
    let subtask_total: usize = cases.iter().map(|c| c.subtasks.len()).sum();
    let subtask_ok: usize = cases
        .iter()
        .map(|c| c.subtasks.iter().filter(|s| s.success).count())
        .sum();
    let scores: Vec<PlanScore> = cases.iter().map(|c| c.score).collect();
    let ssl_value = ssl(&scores).expect("grounding plans are never empty");
    let esr_instruction = if n == 0 { 0.0 } else { esr(successes, n) };
    let esr_subtask = if subtask_total == 0 { 0.0 } else { esr(subtask_ok, subtask_total) };
    // Success is gated on whole-task completion, so the weighted rate can
    // never exceed the plain instruction rate.
    assert!(
        ssl_value <= esr_instruction + 1e-12,
        "SSL {ssl_value} exceeds instruction ESR {esr_instruction}"
    );
    InstructionAggregates { cases: n, esr_instruction, esr_subtask, ssl: ssl_value }
}

impl InstructionReport {
    pub fn new(config: serde_json::Value, cases: Vec<InstructionCaseRecord>) -> Self {
        let aggregates = compute_instruction_aggregates(&cases);
        let config_hash = stable_hash(&config);
        InstructionReport {
            config,
            config_hash,
            prompt_version: crate::planner::PROMPT_VERSION.to_string(),
            cases,
            aggregates,
        }
    }

    /// The chain `SSL <= ESR(a) <= ESR(b)` with pooled sub-task weighting.
    pub fn metric_chain_holds(&self) -> bool {
        let a = &self.aggregates;
        a.ssl <= a.esr_instruction + 1e-12 && a.esr_instruction <= a.esr_subtask + 1e-12
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serialization");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// Plain-text summary table.
    pub fn summary(&self) -> String {
        let a = &self.aggregates;
        format!(
            "cases: {}\nESR(a) instruction: {:.4}\nESR(b) sub-task:    {:.4}\nSSL:                {:.4}\n",
            a.cases, a.esr_instruction, a.esr_subtask, a.ssl
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqaCaseRecord {
    pub scene_id: String,
    pub question: String,
    pub expected: String,
    pub answer: String,
    pub correct: bool,
    pub exploration_count: u32,
    pub unreachable_count: u32,
    pub path_length_cm: f64,
    /// Planner-level failure, when the episode could not complete.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqaAggregates {
    pub questions: usize,
    pub accuracy: f64,
    pub mean_exploration_count: f64,
    pub mean_unreachable_count: f64,
    pub mean_path_length_cm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqaReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub prompt_version: String,
    pub cases: Vec<EqaCaseRecord>,
    pub aggregates: EqaAggregates,
}

pub fn compute_eqa_aggregates(cases: &[EqaCaseRecord]) -> EqaAggregates {
    let n = cases.len();
    if n == 0 {
        return EqaAggregates {
            questions: 0,
            accuracy: 0.0,
            mean_exploration_count: 0.0,
            mean_unreachable_count: 0.0,
            mean_path_length_cm: 0.0,
        };
    }
    let correct = cases.iter().filter(|c| c.correct).count();
    let ec: f64 = cases.iter().map(|c| c.exploration_count as f64).sum();
    let upc: f64 = cases.iter().map(|c| c.unreachable_count as f64).sum();
    let pl: f64 = cases.iter().map(|c| c.path_length_cm).sum();
    EqaAggregates {
        questions: n,
        accuracy: correct as f64 / n as f64,
        mean_exploration_count: ec / n as f64,
        mean_unreachable_count: upc / n as f64,
        mean_path_length_cm: pl / n as f64,
    }
}

impl EqaReport {
    pub fn new(config: serde_json::Value, cases: Vec<EqaCaseRecord>) -> Self {
        let aggregates = compute_eqa_aggregates(&cases);
        let config_hash = stable_hash(&config);
        EqaReport {
            config,
            config_hash,
            prompt_version: crate::planner::PROMPT_VERSION.to_string(),
            cases,
            aggregates,
        }
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serialization");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    pub fn summary(&self) -> String {
        let a = &self.aggregates;
        format!(
            "questions: {}\nACC: {:.4}\nmean EC:  {:.3}\nmean UPC: {:.3}\nmean PL:  {:.1} cm\n",
            a.questions, a.accuracy, a.mean_exploration_count, a.mean_unreachable_count,
            a.mean_path_length_cm
        )
    }
}
