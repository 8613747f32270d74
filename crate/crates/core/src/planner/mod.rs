//! Planning orchestration: the plan grammar, the planner request protocol,
//! pluggable text backends (scripted rule table, recorded transcripts,
//! remote chat-completion endpoint), and the closed-loop question-answering
//! episode driver.

mod episode;
mod grammar;
mod prompt;
mod recorded;
mod remote;
mod scripted;

pub use episode::{run_eqa_episode, EpisodeCaps, EqaEpisodeOutcome};
pub use grammar::{parse_plan, render_plan, Plan, PlanParseError};
pub use prompt::{
    build_eqa_messages, build_planner_messages, parse_language_memory, render_floor_summary,
    render_language_memory, PROMPT_VERSION,
};
pub use recorded::RecordedBackend;
pub use remote::{parse_chat_response, ChatMessage, MessageContent, RemoteBackend};
pub use scripted::ScriptedOracle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One previously unsuccessful plan with why it failed, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedPlan {
    pub plan_text: String,
    pub reason: String,
}

/// Everything a planner sees when asked for a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerRequest {
    pub instruction: String,
    /// Skill catalog text (the robot's capabilities).
    pub catalog: String,
    /// Rendered language-memory block; absent when ablated.
    pub language_memory: Option<String>,
    /// Floor-plan summary line; absent when ablated.
    pub floor_plan_summary: Option<String>,
    pub failed_plans: Vec<FailedPlan>,
    /// Parse feedback appended on the automatic retry.
    pub retry_note: Option<String>,
}

/// One exploration attempt in an episode, chronological.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreRecord {
    /// Target description: "x y" for points, a name for objects.
    pub target: String,
    pub reached: bool,
}

/// Everything a backend sees for one question-answering turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqaRequest {
    pub question: String,
    pub language_memory: Option<String>,
    pub floor_plan_summary: Option<String>,
    pub exploration: Vec<ExploreRecord>,
    /// The episode cap is exhausted; the backend must answer now.
    pub force_answer: bool,
    pub retry_note: Option<String>,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend transport error: {0}")]
    Transport(String),
    #[error("backend protocol error: {0}")]
    Protocol(String),
    #[error("no recorded transcript for request {0}")]
    MissingTranscript(String),
    #[error("backend configuration error: {0}")]
    Config(String),
}

/// A planner backend maps structured requests to raw text; the callers parse
/// that text under the plan or verdict grammar.
pub trait PlannerBackend: Send {
    fn name(&self) -> &'static str;
    fn plan_text(&mut self, req: &PlannerRequest) -> Result<String, BackendError>;
    fn eqa_text(&mut self, req: &EqaRequest) -> Result<String, BackendError>;
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("plan unparsable after retry: first: {first}; second: {second}")]
    PlanParse { first: PlanParseError, second: PlanParseError },
    #[error("verdict unparsable after retry: first: {first}; second: {second}")]
    VerdictParse { first: VerdictParseError, second: VerdictParseError },
}

/// Ask a backend for a plan. On a parse failure the backend is queried once
/// more with the parse error appended to the request, then the error is
/// surfaced.
pub fn plan(req: &PlannerRequest, backend: &mut dyn PlannerBackend) -> Result<Plan, PlannerError> {
    let text = backend.plan_text(req)?;
    match parse_plan(&text) {
        Ok(plan) => Ok(plan),
        Err(first) => {
            let mut retry = req.clone();
            retry.retry_note = Some(format!(
                "previous output was not valid plan grammar ({first}); emit one skill_name(arg) per line"
            ));
            let text2 = backend.plan_text(&retry)?;
            match parse_plan(&text2) {
                Ok(plan) => Ok(plan),
                Err(second) => Err(PlannerError::PlanParse { first, second }),
            }
        }
    }
}

/// Exploration target named by a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExploreTarget {
    Point(f64, f64),
    Object(String),
}

impl ExploreTarget {
    pub fn describe(&self) -> String {
        match self {
            ExploreTarget::Point(x, y) => format!("{x:.2} {y:.2}"),
            ExploreTarget::Object(name) => name.clone(),
        }
    }
}

/// One closed-loop turn: either the information suffices and the question is
/// answered, or the robot is sent somewhere new.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EqaVerdict {
    Sufficient { answer: String },
    Explore { target: ExploreTarget },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("verdict parse error: {reason}")]
pub struct VerdictParseError {
    pub reason: String,
}

/// Verdict grammar: the first meaningful line is either `ANSWER: <text>` or
/// `EXPLORE: <x> <y>` / `EXPLORE: <object_name>`.
pub fn parse_eqa_verdict(text: &str) -> Result<EqaVerdict, VerdictParseError> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| VerdictParseError { reason: "empty verdict".into() })?;
    if let Some(rest) = line.strip_prefix("ANSWER:") {
        let answer = rest.trim();
        if answer.is_empty() {
            return Err(VerdictParseError { reason: "empty answer".into() });
        }
        return Ok(EqaVerdict::Sufficient { answer: answer.to_string() });
    }
    if let Some(rest) = line.strip_prefix("EXPLORE:") {
        let rest = rest.trim();
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() == 2 {
            if let (Ok(x), Ok(y)) = (parts[0].parse::<f64>(), parts[1].parse::<f64>()) {
                if x.is_finite() && y.is_finite() {
                    return Ok(EqaVerdict::Explore { target: ExploreTarget::Point(x, y) });
                }
                return Err(VerdictParseError { reason: "non-finite coordinates".into() });
            }
        }
        if parts.len() == 1 && !parts[0].is_empty() {
            return Ok(EqaVerdict::Explore {
                target: ExploreTarget::Object(parts[0].to_string()),
            });
        }
        return Err(VerdictParseError {
            reason: format!("EXPLORE expects 'x y' or an object name, got {rest:?}"),
        });
    }
    Err(VerdictParseError {
        reason: format!("expected ANSWER: or EXPLORE:, got {line:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FlakyBackend {
        outputs: Vec<String>,
        calls: usize,
    }

    impl PlannerBackend for FlakyBackend {
        fn name(&self) -> &'static str {
            "flaky"
        }
        fn plan_text(&mut self, _req: &PlannerRequest) -> Result<String, BackendError> {
            let out = self.outputs[self.calls.min(self.outputs.len() - 1)].clone();
            self.calls += 1;
            Ok(out)
        }
        fn eqa_text(&mut self, _req: &EqaRequest) -> Result<String, BackendError> {
            self.plan_text(&empty_request())
        }
    }

    fn empty_request() -> PlannerRequest {
        PlannerRequest {
            instruction: String::new(),
            catalog: String::new(),
            language_memory: None,
            floor_plan_summary: None,
            failed_plans: Vec::new(),
            retry_note: None,
        }
    }

    #[test]
    fn plan_retries_once_on_parse_failure() {
        let mut backend = FlakyBackend {
            outputs: vec!["1. go somewhere".into(), "make_coffee()".into()],
            calls: 0,
        };
        let plan = plan(&empty_request(), &mut backend).unwrap();
        assert_eq!(backend.calls, 2);
        assert_eq!(plan.len(), 1);
    }

    #[test]
    fn plan_fails_after_two_bad_outputs() {
        let mut backend = FlakyBackend { outputs: vec!["nonsense".into()], calls: 0 };
        let err = plan(&empty_request(), &mut backend).unwrap_err();
        assert!(matches!(err, PlannerError::PlanParse { .. }));
        assert_eq!(backend.calls, 2);
    }

    #[test]
    fn verdict_grammar_parses_both_forms() {
        assert_eq!(
            parse_eqa_verdict("ANSWER: yes"),
            Ok(EqaVerdict::Sufficient { answer: "yes".into() })
        );
        assert_eq!(
            parse_eqa_verdict("\n# note\nEXPLORE: 2.50 1.00\n"),
            Ok(EqaVerdict::Explore { target: ExploreTarget::Point(2.5, 1.0) })
        );
        assert_eq!(
            parse_eqa_verdict("EXPLORE: kettle"),
            Ok(EqaVerdict::Explore { target: ExploreTarget::Object("kettle".into()) })
        );
        assert!(parse_eqa_verdict("maybe?").is_err());
        assert!(parse_eqa_verdict("ANSWER:").is_err());
        assert!(parse_eqa_verdict("EXPLORE: 1 2 3").is_err());
        assert!(parse_eqa_verdict("EXPLORE: nan nan").is_err());
        assert!(parse_eqa_verdict("").is_err());
    }
}
