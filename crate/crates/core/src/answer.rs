//! Grounded answer generation, shared by both engines.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::gateway::payload::{AnswerPayload, MemoryView};
use crate::gateway::schema::AnswerResponse;
use crate::gateway::{prompts, ChatRequest, Gateway, GatewayError, SchemaId};
use crate::model::MemoryId;

pub const NO_EVIDENCE_ANSWER: &str = "No relevant memories were found for this question.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub answer: String,
    pub explanation: String,
    pub memory_ids: Vec<MemoryId>,
}

impl Answer {
    pub fn no_evidence() -> Self {
        Self {
            answer: NO_EVIDENCE_ANSWER.into(),
            explanation: "Retrieval returned no memories or knowledge for this question.".into(),
            memory_ids: Vec::new(),
        }
    }
}

/// What the answer model gets to see.
#[derive(Debug, Clone, Copy)]
pub struct Evidence<'a> {
    pub query: &'a str,
    pub declarative: &'a str,
    pub filters: &'a [String],
    pub statements: &'a [String],
    /// In capture-time order.
    pub memories: &'a [MemoryView],
}

/// Asks the chat model to answer from `evidence`, keyed for fixtures by
/// `lookup_key`. Cited ids that were not part of the evidence are removed.
/// With no evidence at all the model is not consulted.
pub fn generate_grounded_answer(
    gateway: &Gateway,
    evidence: Evidence<'_>,
    lookup_key: &str,
) -> Result<Answer, GatewayError> {
    if evidence.memories.is_empty() && evidence.statements.is_empty() {
        return Ok(Answer::no_evidence());
    }
    let payload = AnswerPayload {
        query: evidence.query.to_string(),
        declarative: evidence.declarative.to_string(),
        filters: evidence.filters.to_vec(),
        knowledge: evidence.statements.to_vec(),
        memories: evidence.memories.to_vec(),
    };
    let request = ChatRequest::new(SchemaId::Answer, prompts::ANSWER, &payload, lookup_key);
    let r: AnswerResponse = gateway.chat(&request)?;

    let allowed: HashSet<&str> = evidence.memories.iter().map(|m| m.id.as_str()).collect();
    let mut seen = HashSet::new();
    let mut memory_ids = Vec::new();
    for id in r.memory_ids {
        let id = id.trim();
        if !allowed.contains(id) {
            warn!(memory_id = id, "answer cited a memory that was not retrieved; dropping it");
            continue;
        }
        if seen.insert(id.to_string()) {
            memory_ids.push(MemoryId::new(id));
        }
    }
    Ok(Answer {
        answer: r.answer.trim().to_string(),
        explanation: r.explanation.trim().to_string(),
        memory_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::scripted::ScriptedBackend;
    use crate::model::{validate_memory, CapturedMemory, MediaKind, SidecarRecord};
    use serde_json::json;
    use std::sync::Arc;

    fn mem(id: &str) -> CapturedMemory {
        let raw = SidecarRecord {
            id: id.into(),
            kind: MediaKind::Photo,
            media_path: format!("{id}.png"),
            capture_time: Some("2024-05-01T08:00:00Z".into()),
            lat: None,
            lon: None,
            address: None,
            caption: Some("A stairmaster display".into()),
            visible_text: None,
            transcript: None,
        };
        validate_memory(&raw, &mut Default::default()).unwrap()
    }

    #[test]
    fn empty_evidence_skips_the_model() {
        let gw = Gateway::new(Arc::new(ScriptedBackend::new(8)), 8);
        let e = Evidence {
            query: "q",
            declarative: "q",
            filters: &[],
            statements: &[],
            memories: &[],
        };
        assert_eq!(generate_grounded_answer(&gw, e, "q").unwrap(), Answer::no_evidence());
    }

    #[test]
    fn unretrieved_citations_are_stripped() {
        let backend = ScriptedBackend::new(8)
            .with_response(
                SchemaId::Answer,
                "How many?",
                json!({"answer": "2 sessions", "explanation": "", "memory_ids": ["a", "ghost", "b", "a"]}),
            )
            .unwrap();
        let gw = Gateway::new(Arc::new(backend), 8);
        let views = [MemoryView::from(&mem("a")), MemoryView::from(&mem("b"))];
        let e = Evidence {
            query: "How many?",
            declarative: "How many",
            filters: &[],
            statements: &[],
            memories: &views,
        };
        let answer = generate_grounded_answer(&gw, e, "How many?").unwrap();
        assert_eq!(answer.answer, "2 sessions");
        assert_eq!(answer.memory_ids, vec![MemoryId::from("a"), MemoryId::from("b")]);
    }
}
