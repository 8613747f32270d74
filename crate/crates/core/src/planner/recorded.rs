//! Transcript-replay backend. Each request is keyed by a stable hash of its
//! canonical JSON and served from one JSON file per key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BackendError, EqaRequest, PlannerBackend, PlannerRequest};
use crate::util::stable_hash;

#[derive(Debug, Serialize, Deserialize)]
struct Transcript {
    kind: String,
    request: serde_json::Value,
    response: String,
}

/// Read-only transcript store; shareable across episodes.
#[derive(Debug, Clone)]
pub struct RecordedBackend {
    dir: PathBuf,
}

impl RecordedBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        RecordedBackend { dir: dir.into() }
    }

    pub fn plan_key(req: &PlannerRequest) -> String {
        stable_hash(&("plan", req))
    }

    pub fn eqa_key(req: &EqaRequest) -> String {
        stable_hash(&("eqa", req))
    }

    fn lookup(&self, key: &str) -> Result<String, BackendError> {
        let path = self.dir.join(format!("{key}.json"));
        let bytes = std::fs::read(&path)
            .map_err(|_| BackendError::MissingTranscript(key.to_string()))?;
        let transcript: Transcript = serde_json::from_slice(&bytes).map_err(|e| {
            BackendError::Protocol(format!("transcript {} is malformed: {e}", path.display()))
        })?;
        Ok(transcript.response)
    }

    /// Write one transcript; used to build stores for replay.
    pub fn store_plan(
        dir: &Path,
        req: &PlannerRequest,
        response: &str,
    ) -> std::io::Result<PathBuf> {
        Self::store(dir, "plan", Self::plan_key(req), serde_json::to_value(req).unwrap(), response)
    }

    pub fn store_eqa(dir: &Path, req: &EqaRequest, response: &str) -> std::io::Result<PathBuf> {
        Self::store(dir, "eqa", Self::eqa_key(req), serde_json::to_value(req).unwrap(), response)
    }

    fn store(
        dir: &Path,
        kind: &str,
        key: String,
        request: serde_json::Value,
        response: &str,
    ) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{key}.json"));
        let transcript = Transcript {
            kind: kind.to_string(),
            request,
            response: response.to_string(),
        };
        std::fs::write(&path, serde_json::to_string_pretty(&transcript)?)?;
        Ok(path)
    }
}

impl PlannerBackend for RecordedBackend {
    fn name(&self) -> &'static str {
        "recorded"
    }

    fn plan_text(&mut self, req: &PlannerRequest) -> Result<String, BackendError> {
        self.lookup(&Self::plan_key(req))
    }

    fn eqa_text(&mut self, req: &EqaRequest) -> Result<String, BackendError> {
        self.lookup(&Self::eqa_key(req))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> PlannerRequest {
        PlannerRequest {
            instruction: "please make a cup of coffee".into(),
            catalog: "make_coffee()\n".into(),
            language_memory: None,
            floor_plan_summary: None,
            failed_plans: Vec::new(),
            retry_note: None,
        }
    }

    #[test]
    fn replay_returns_the_recorded_plan() {
        let dir = tempfile::tempdir().unwrap();
        let req = request();
        RecordedBackend::store_plan(dir.path(), &req, "move_to(coffee_machine)\nmake_coffee()\n")
            .unwrap();
        let mut backend = RecordedBackend::new(dir.path());
        let text = backend.plan_text(&req).unwrap();
        assert_eq!(text, "move_to(coffee_machine)\nmake_coffee()\n");
        // Replay is exact: the same request hashes to the same file.
        assert_eq!(backend.plan_text(&req).unwrap(), text);
    }

    #[test]
    fn missing_transcript_is_reported_with_its_key() {
        let dir = tempfile::tempdir().unwrap();
        let mut backend = RecordedBackend::new(dir.path());
        let err = backend.plan_text(&request()).unwrap_err();
        match err {
            BackendError::MissingTranscript(key) => {
                assert_eq!(key, RecordedBackend::plan_key(&request()));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn different_requests_use_different_keys() {
        let a = request();
        let mut b = request();
        b.instruction = "wipe the table".into();
        assert_ne!(RecordedBackend::plan_key(&a), RecordedBackend::plan_key(&b));
        // Keys do not depend on field mutation order, only content.
        let c = request();
        assert_eq!(RecordedBackend::plan_key(&a), RecordedBackend::plan_key(&c));
    }
}
