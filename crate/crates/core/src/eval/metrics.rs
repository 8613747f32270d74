//! Executable success rate and step-length-weighted success scoring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skills::SkillAction;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("invalid case: grounding plan is empty")]
    EmptyGrounding,
}

/// Fraction of successful executions.
pub fn esr(n_e: usize, n: usize) -> f64 {
    assert!(n > 0, "total task count must be positive");
    assert!(n_e <= n, "successes cannot exceed the total");
    n_e as f64 / n as f64
}

/// Per-case score feeding the step-length-weighted success rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanScore {
    /// Whole-task success: the plan executed fully and completed the task.
    pub success: bool,
    /// Grounding (reference) plan length.
    pub grounding_len: usize,
    /// Generated plan length.
    pub plan_len: usize,
    /// Correct steps: longest common subsequence with the grounding plan.
    pub correct_len: usize,
}

/// Longest common subsequence length over skill steps (arguments compared by
/// their target names).
pub fn lcs_len(a: &[SkillAction], b: &[SkillAction]) -> usize {
    let mut table = vec![0usize; (a.len() + 1) * (b.len() + 1)];
    let idx = |i: usize, j: usize| i * (b.len() + 1) + j;
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            table[idx(i, j)] = if a[i - 1] == b[j - 1] {
                table[idx(i - 1, j - 1)] + 1
            } else {
                table[idx(i - 1, j)].max(table[idx(i, j - 1)])
            };
        }
    }
    table[idx(a.len(), b.len())]
}

pub fn score_plan(
    grounding: &[SkillAction],
    generated: &[SkillAction],
    success: bool,
) -> PlanScore {
    PlanScore {
        success,
        grounding_len: grounding.len(),
        plan_len: generated.len(),
        correct_len: lcs_len(grounding, generated),
    }
}

/// Success rate weighted by step length:
/// `(1/N) * sum(s_i * l_c / max(l_g, l_p))`.
pub fn ssl(scores: &[PlanScore]) -> Result<f64, MetricError> {
    if scores.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for score in scores {
        if score.grounding_len == 0 {
            return Err(MetricError::EmptyGrounding);
        }
        if score.success {
            let denom = score.grounding_len.max(score.plan_len) as f64;
            total += score.correct_len as f64 / denom;
        }
    }
    Ok(total / scores.len() as f64)
}
