//! Typed chat response schemas.
//!
//! A response is accepted when it deserializes into the schema type and
//! passes the type's structural [`SchemaResponse::check`]. Semantic checks
//! that depend on pipeline state (dates inside a window, ids that exist)
//! happen later and drop individual candidates instead of failing the call.

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::AtomicContextCategory;

use super::SchemaId;

pub trait SchemaResponse: DeserializeOwned + Serialize {
    const SCHEMA: SchemaId;

    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

/// Strips a Markdown code fence some models wrap around JSON.
fn strip_fence(raw: &str) -> &str {
    let trimmed = raw.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let rest = rest.trim_start_matches(|c: char| c.is_ascii_alphanumeric());
    rest.strip_suffix("```").unwrap_or(rest).trim()
}

pub fn parse_response<T: SchemaResponse>(raw: &str) -> Result<T, String> {
    let parsed: T = serde_json::from_str(strip_fence(raw)).map_err(|e| e.to_string())?;
    parsed.check()?;
    Ok(parsed)
}

/// Validates `value` against `schema` without keeping the typed result.
pub fn validate_value(schema: SchemaId, value: &serde_json::Value) -> Result<(), String> {
    fn go<T: SchemaResponse>(value: &serde_json::Value) -> Result<(), String> {
        let parsed: T = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        parsed.check()
    }
    match schema {
        SchemaId::AtomicContexts => go::<AtomicContextsResponse>(value),
        SchemaId::CompositeContexts => go::<CompositeContextsResponse>(value),
        SchemaId::Knowledge => go::<KnowledgeResponse>(value),
        SchemaId::QueryAugmentation => go::<QueryAugmentationResponse>(value),
        SchemaId::Answer => go::<AnswerResponse>(value),
        SchemaId::TranscriptValidation => go::<TranscriptValidationResponse>(value),
        SchemaId::TemporalStrictness => go::<TemporalStrictnessResponse>(value),
    }
}

fn parse_date(field: &str, value: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(value.trim(), "%Y-%m-%d")
        .map_err(|_| format!("{field} {value:?} is not a YYYY-MM-DD date"))
}

/// Per-memory annotation pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicContextsResponse {
    #[serde(default)]
    pub people: Vec<String>,
    #[serde(default)]
    pub visual_elements: Vec<String>,
    #[serde(default)]
    pub environment: Vec<String>,
    #[serde(default)]
    pub activities: Vec<String>,
    /// Phrases naming composite contexts (events) rather than atomic ones.
    #[serde(default)]
    pub composite_mentions: Vec<String>,
}

impl SchemaResponse for AtomicContextsResponse {
    const SCHEMA: SchemaId = SchemaId::AtomicContexts;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextCandidate {
    pub event_name: String,
    pub memory_ids: Vec<String>,
    pub start_date: String,
    pub end_date: String,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub is_multi_days: bool,
    pub importance: i64,
}

impl ContextCandidate {
    pub fn dates(&self) -> Result<(NaiveDate, NaiveDate), String> {
        Ok((
            parse_date("start_date", &self.start_date)?,
            parse_date("end_date", &self.end_date)?,
        ))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompositeContextsResponse {
    pub composite_context: Vec<ContextCandidate>,
}

impl SchemaResponse for CompositeContextsResponse {
    const SCHEMA: SchemaId = SchemaId::CompositeContexts;

    fn check(&self) -> Result<(), String> {
        for c in &self.composite_context {
            c.dates()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeCandidate {
    pub knowledge: String,
    #[serde(default)]
    pub memory_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeResponse {
    pub knowledge: Vec<KnowledgeCandidate>,
}

impl SchemaResponse for KnowledgeResponse {
    const SCHEMA: SchemaId = SchemaId::Knowledge;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicFilterSpec {
    pub category: String,
    pub value: String,
}

impl AtomicFilterSpec {
    pub fn category(&self) -> Option<AtomicContextCategory> {
        AtomicContextCategory::parse(&self.category)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSpec {
    /// The event as it would be named, e.g. "CHI 2024".
    pub name: String,
    /// The words of the query that refer to it, e.g. "during CHI 2024".
    #[serde(default)]
    pub phrase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAugmentationResponse {
    pub declarative: String,
    #[serde(default)]
    pub atomic_contexts: Vec<AtomicFilterSpec>,
    #[serde(default)]
    pub composite_contexts: Vec<CompositeSpec>,
    #[serde(default)]
    pub inferred_contexts: Vec<AtomicFilterSpec>,
    /// Explicit temporal expression such as "last week", if any.
    #[serde(default)]
    pub temporal_phrase: Option<String>,
}

impl SchemaResponse for QueryAugmentationResponse {
    const SCHEMA: SchemaId = SchemaId::QueryAugmentation;

    fn check(&self) -> Result<(), String> {
        if self.declarative.trim().is_empty() {
            return Err("declarative query is empty".into());
        }
        for spec in self.atomic_contexts.iter().chain(&self.inferred_contexts) {
            if spec.category().is_none() {
                return Err(format!("unknown atomic category {:?}", spec.category));
            }
        }
        if self.composite_contexts.iter().any(|c| c.name.trim().is_empty()) {
            return Err("composite context with empty name".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub answer: String,
    #[serde(default)]
    pub explanation: String,
    pub memory_ids: Vec<String>,
}

impl SchemaResponse for AnswerResponse {
    const SCHEMA: SchemaId = SchemaId::Answer;

    fn check(&self) -> Result<(), String> {
        if self.answer.trim().is_empty() {
            return Err("answer is empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptValidationResponse {
    pub keep: bool,
}

impl SchemaResponse for TranscriptValidationResponse {
    const SCHEMA: SchemaId = SchemaId::TranscriptValidation;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalStrictnessResponse {
    pub strict: bool,
}

impl SchemaResponse for TemporalStrictnessResponse {
    const SCHEMA: SchemaId = SchemaId::TemporalStrictness;
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn composite_contexts_shape() {
        let raw = r#"```json
        {"composite_context": [{"event_name": "Lab retreat at Lake Tahoe",
          "memory_ids": ["m1", "m2"], "start_date": "2024-03-22",
          "end_date": "2024-03-24", "location": "Lake Tahoe, CA",
          "is_multi_days": true, "importance": 2}]}
        ```"#;
        let r: CompositeContextsResponse = parse_response(raw).unwrap();
        assert_eq!(r.composite_context[0].memory_ids, vec!["m1", "m2"]);
        let bad = r#"{"composite_context": [{"event_name": "x", "memory_ids": [],
          "start_date": "March 3", "end_date": "2024-03-24", "importance": 1}]}"#;
        assert!(parse_response::<CompositeContextsResponse>(bad).is_err());
    }

    #[test]
    fn answer_shape() {
        let ok = json!({"answer": "18 sessions", "explanation": "counted", "memory_ids": ["a"]});
        validate_value(SchemaId::Answer, &ok).unwrap();
        let missing = json!({"answer": "18 sessions"});
        assert!(validate_value(SchemaId::Answer, &missing).is_err());
        let blank = json!({"answer": " ", "memory_ids": []});
        assert!(validate_value(SchemaId::Answer, &blank).is_err());
    }

    #[test]
    fn augmentation_rejects_unknown_categories() {
        let bad = json!({"declarative": "x", "atomic_contexts": [{"category": "mood", "value": "happy"}]});
        assert!(validate_value(SchemaId::QueryAugmentation, &bad).is_err());
        let ok = json!({"declarative": "x", "atomic_contexts": [{"category": "Visual elements", "value": "boba tea"}]});
        validate_value(SchemaId::QueryAugmentation, &ok).unwrap();
    }
}
