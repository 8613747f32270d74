//! Evaluation: instruction generation, the closed-loop pipeline, metric
//! computation (ESR, SSL and the question-answering ACC/EC/UPC/PL), ablation
//! switches and report emission.

mod harness;
mod instructions;
mod metrics;
mod report;

pub use harness::{
    default_start, exploration_tour, run_eqa_eval, run_instruction_eval, AblationFlags, EqaMode,
    TOUR_WAYPOINTS,
};
pub use instructions::{generate_instructions, InstructionCase, InstructionError, InstructionLength};
pub use metrics::{esr, lcs_len, score_plan, ssl, MetricError, PlanScore};
pub use report::{
    compute_eqa_aggregates, compute_instruction_aggregates, EqaAggregates, EqaCaseRecord,
    EqaReport, InstructionAggregates, InstructionCaseRecord, InstructionReport, StepRecord,
    SubtaskRecord,
};
