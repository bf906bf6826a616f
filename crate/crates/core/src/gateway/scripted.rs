//! Deterministic, fixture-driven backend for offline runs and tests.
//!
//! A fixture directory holds:
//!
//! * `media.json`: per memory id: caption, visible text, transcript,
//!   visual tags (hashed into image embeddings), an optional annotation,
//!   and the event/habit tags the rule fallbacks group by.
//! * `rules.json`: event tag → event name, location, importance; habit
//!   tag → knowledge statement and minimum support per window.
//! * `<schema>.json` for any chat schema: a list of canned responses, each
//!   matched either by the exact request `payload` or by the request's
//!   `key` (see [`ChatRequest::lookup_key`]).
//!
//! Every call is a pure function of the fixtures and the input.
//! Perception requests for unknown memories fail (the fixture world is
//! closed); chat requests without a canned response fall back to rules.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::payload::{AnswerPayload, AnnotationPayload, QueryPayload, StrictnessPayload, WindowPayload};
use super::schema::{
    self, AnswerResponse, AtomicContextsResponse, CompositeContextsResponse, ContextCandidate,
    KnowledgeCandidate, KnowledgeResponse, QueryAugmentationResponse,
    TemporalStrictnessResponse, TranscriptValidationResponse,
};
use super::{ChatRequest, GatewayError, MediaInput, ModelBackend, SchemaId};
use crate::embedding::{embed_text_hashed, fnv1a64, hashed_embedding};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MediaFixture {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub visual_tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<AtomicContextsResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub habits: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRule {
    pub name: String,
    #[serde(default)]
    pub location: Option<String>,
    pub importance: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HabitRule {
    pub statement: String,
    #[serde(default = "default_support")]
    pub min_support: usize,
}

fn default_support() -> usize {
    2
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Rules {
    #[serde(default)]
    pub events: BTreeMap<String, EventRule>,
    #[serde(default)]
    pub habits: BTreeMap<String, HabitRule>,
}

/// One canned chat response as stored in `<schema>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
    pub response: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Fingerprint {
    Payload(u64),
    Key(u64),
}

#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    dim: usize,
    media: BTreeMap<String, MediaFixture>,
    rules: Rules,
    responses: HashMap<(SchemaId, Fingerprint), String>,
}

impl ScriptedBackend {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            media: BTreeMap::new(),
            rules: Rules::default(),
            responses: HashMap::new(),
        }
    }

    /// Loads a fixture directory. Every canned response must validate
    /// against its schema.
    pub fn load(dir: &Path, dim: usize) -> Result<Self, GatewayError> {
        let read = |name: &str| -> Result<Option<String>, GatewayError> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(None);
            }
            fs::read_to_string(&path)
                .map(Some)
                .map_err(|e| GatewayError::Backend(format!("reading {}: {e}", path.display())))
        };
        let parse_err = |name: &str, e: serde_json::Error| {
            GatewayError::Backend(format!("fixture {name} is malformed: {e}"))
        };

        let mut backend = Self::new(dim);
        if let Some(text) = read("media.json")? {
            backend.media = serde_json::from_str(&text).map_err(|e| parse_err("media.json", e))?;
        }
        if let Some(text) = read("rules.json")? {
            backend.rules = serde_json::from_str(&text).map_err(|e| parse_err("rules.json", e))?;
        }
        for schema in SchemaId::ALL {
            let name = format!("{}.json", schema.as_str());
            let Some(text) = read(&name)? else { continue };
            let entries: Vec<FixtureEntry> =
                serde_json::from_str(&text).map_err(|e| parse_err(&name, e))?;
            for entry in entries {
                backend.insert_entry(schema, entry)?;
            }
        }
        Ok(backend)
    }

    pub fn with_media(mut self, id: impl Into<String>, fixture: MediaFixture) -> Self {
        self.media.insert(id.into(), fixture);
        self
    }

    pub fn with_rules(mut self, rules: Rules) -> Self {
        self.rules = rules;
        self
    }

    /// Adds a canned response keyed by lookup key, validating it first.
    pub fn with_response(
        mut self,
        schema: SchemaId,
        key: impl Into<String>,
        response: Value,
    ) -> Result<Self, GatewayError> {
        self.insert_entry(
            schema,
            FixtureEntry {
                key: Some(key.into()),
                payload: None,
                response,
            },
        )?;
        Ok(self)
    }

    /// Adds a canned response without validation, for negative tests.
    pub fn with_raw_response(
        mut self,
        schema: SchemaId,
        key: impl Into<String>,
        raw: impl Into<String>,
    ) -> Self {
        let key = key.into();
        self.responses
            .insert((schema, Fingerprint::Key(fnv1a64(key.as_bytes()))), raw.into());
        self
    }

    fn insert_entry(&mut self, schema: SchemaId, entry: FixtureEntry) -> Result<(), GatewayError> {
        schema::validate_value(schema, &entry.response).map_err(|detail| {
            GatewayError::SchemaViolation { schema, detail }
        })?;
        let text = entry.response.to_string();
        let fingerprint = match (&entry.payload, &entry.key) {
            (Some(payload), _) => Fingerprint::Payload(fnv1a64(payload.as_bytes())),
            (None, Some(key)) => Fingerprint::Key(fnv1a64(key.as_bytes())),
            (None, None) => {
                return Err(GatewayError::Backend(format!(
                    "{schema} fixture entry has neither key nor payload"
                )))
            }
        };
        self.responses.insert((schema, fingerprint), text);
        Ok(())
    }

    pub fn media_fixture(&self, id: &str) -> Option<&MediaFixture> {
        self.media.get(id)
    }

    fn known(&self, media: &MediaInput<'_>, what: &str) -> Result<&MediaFixture, GatewayError> {
        self.media.get(media.memory_id.as_str()).ok_or_else(|| {
            GatewayError::EmptyResponse(format!("{what} of {} (no fixture)", media.memory_id))
        })
    }

    fn canned(&self, request: &ChatRequest) -> Option<&String> {
        let schema = request.response_schema;
        self.responses
            .get(&(schema, Fingerprint::Payload(fnv1a64(request.user_payload.as_bytes()))))
            .or_else(|| {
                self.responses
                    .get(&(schema, Fingerprint::Key(fnv1a64(request.lookup_key.as_bytes()))))
            })
    }

    fn fallback(&self, request: &ChatRequest) -> Result<Value, GatewayError> {
        let bad = |e: serde_json::Error| {
            GatewayError::InvalidRequest(format!(
                "{} payload unreadable: {e}",
                request.response_schema
            ))
        };
        let payload = &request.user_payload;
        let value = match request.response_schema {
            SchemaId::AtomicContexts => {
                let p: AnnotationPayload = serde_json::from_str(payload).map_err(bad)?;
                let annotation = self
                    .media
                    .get(&p.memory_id)
                    .and_then(|m| m.annotation.clone())
                    .unwrap_or_default();
                serde_json::to_value(annotation)
            }
            SchemaId::CompositeContexts => {
                let p: WindowPayload = serde_json::from_str(payload).map_err(bad)?;
                serde_json::to_value(self.group_events(&p))
            }
            SchemaId::Knowledge => {
                let p: WindowPayload = serde_json::from_str(payload).map_err(bad)?;
                serde_json::to_value(self.habit_knowledge(&p))
            }
            SchemaId::QueryAugmentation => {
                let p: QueryPayload = serde_json::from_str(payload).map_err(bad)?;
                serde_json::to_value(plain_augmentation(&p.query))
            }
            SchemaId::Answer => {
                let p: AnswerPayload = serde_json::from_str(payload).map_err(bad)?;
                serde_json::to_value(listing_answer(&p))
            }
            SchemaId::TranscriptValidation => {
                serde_json::to_value(TranscriptValidationResponse { keep: true })
            }
            SchemaId::TemporalStrictness => {
                let p: StrictnessPayload = serde_json::from_str(payload).map_err(bad)?;
                serde_json::to_value(TemporalStrictnessResponse {
                    strict: strict_by_preposition(&p.phrase),
                })
            }
        };
        value.map_err(|e| GatewayError::Backend(e.to_string()))
    }

    /// Groups the window's memories by their fixture event tag.
    fn group_events(&self, payload: &WindowPayload) -> CompositeContextsResponse {
        let mut groups: BTreeMap<&str, Vec<(String, NaiveDate)>> = BTreeMap::new();
        for m in &payload.memories {
            if let Some(tag) = self.media.get(&m.id).and_then(|f| f.event.as_deref()) {
                groups
                    .entry(tag)
                    .or_default()
                    .push((m.id.clone(), m.capture_time.date_naive()));
            }
        }
        let mut contexts: Vec<ContextCandidate> = groups
            .into_iter()
            .map(|(tag, members)| {
                let start = members.iter().map(|(_, d)| *d).min().expect("non-empty group");
                let end = members.iter().map(|(_, d)| *d).max().expect("non-empty group");
                let rule = self.rules.events.get(tag);
                ContextCandidate {
                    event_name: rule.map_or_else(|| tag.to_string(), |r| r.name.clone()),
                    memory_ids: members.into_iter().map(|(id, _)| id).collect(),
                    start_date: start.to_string(),
                    end_date: end.to_string(),
                    location: rule.and_then(|r| r.location.clone()),
                    is_multi_days: start < end,
                    importance: rule.map_or(1, |r| r.importance),
                }
            })
            .collect();
        contexts.sort_by(|a, b| (&a.start_date, &a.event_name).cmp(&(&b.start_date, &b.event_name)));
        CompositeContextsResponse {
            composite_context: contexts,
        }
    }

    fn habit_knowledge(&self, payload: &WindowPayload) -> KnowledgeResponse {
        let mut support: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for m in &payload.memories {
            if let Some(f) = self.media.get(&m.id) {
                for habit in &f.habits {
                    support.entry(habit.as_str()).or_default().push(m.id.clone());
                }
            }
        }
        let knowledge = support
            .into_iter()
            .filter_map(|(tag, ids)| {
                let rule = self.rules.habits.get(tag)?;
                (ids.len() >= rule.min_support.max(1)).then(|| KnowledgeCandidate {
                    knowledge: rule.statement.clone(),
                    memory_ids: ids,
                })
            })
            .collect();
        KnowledgeResponse { knowledge }
    }
}

const TEMPORAL_MARKERS: [&str; 8] = [
    "yesterday",
    "today",
    "last week",
    "this week",
    "last month",
    "this month",
    "last year",
    "this year",
];

const MONTH_NAMES: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

/// Rule fallback for query augmentation: no filters beyond an explicit
/// relative-time phrase.
fn plain_augmentation(query: &str) -> QueryAugmentationResponse {
    let declarative = query.trim().trim_end_matches('?').trim().to_string();
    let lower = format!(" {} ", query.to_lowercase().replace('?', " "));
    let temporal_phrase = TEMPORAL_MARKERS
        .iter()
        .find(|m| lower.contains(&format!(" {m} ")))
        .map(|m| m.to_string())
        .or_else(|| {
            MONTH_NAMES
                .iter()
                .find(|m| lower.contains(&format!(" in {m} ")))
                .map(|m| format!("in {m}"))
        });
    QueryAugmentationResponse {
        declarative: if declarative.is_empty() {
            query.to_string()
        } else {
            declarative
        },
        atomic_contexts: Vec::new(),
        composite_contexts: Vec::new(),
        inferred_contexts: Vec::new(),
        temporal_phrase,
    }
}

/// Rule fallback for answers: cite every memory handed over.
fn listing_answer(p: &AnswerPayload) -> AnswerResponse {
    let ids: Vec<String> = p.memories.iter().map(|m| m.id.clone()).collect();
    let answer = if ids.is_empty() {
        "No relevant memories were found.".to_string()
    } else {
        format!("Found {} memories related to \"{}\".", ids.len(), p.declarative)
    };
    AnswerResponse {
        answer,
        explanation: "Listed every retrieved memory.".into(),
        memory_ids: ids,
    }
}

fn strict_by_preposition(phrase: &str) -> bool {
    let first = phrase.split_whitespace().next().unwrap_or("").to_lowercase();
    matches!(
        first.as_str(),
        "during" | "at" | "in" | "on" | "while" | "throughout" | "from"
    )
}

impl ModelBackend for ScriptedBackend {
    fn caption(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        self.known(media, "caption")?
            .caption
            .clone()
            .ok_or_else(|| GatewayError::EmptyResponse(format!("caption of {}", media.memory_id)))
    }

    fn extract_text(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        Ok(self.known(media, "text")?.visible_text.clone().unwrap_or_default())
    }

    fn transcribe(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        Ok(self.known(media, "transcript")?.transcript.clone().unwrap_or_default())
    }

    fn chat(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        if let Some(text) = self.canned(request) {
            return Ok(text.clone());
        }
        self.fallback(request).map(|v| v.to_string())
    }

    fn embed_text(&self, text: &str) -> Result<Vec<f32>, GatewayError> {
        Ok(embed_text_hashed(text, self.dim).as_slice().to_vec())
    }

    /// Hashes the fixture's visual tags (each tag is one token). Media
    /// without tags hash the eight 4-byte chunks of their SHA-256 digest as
    /// tokens, so equal bytes give equal vectors and unrelated bytes are
    /// nearly orthogonal.
    fn embed_image(&self, media: &MediaInput<'_>) -> Result<Vec<f32>, GatewayError> {
        let tags: Vec<String> = match self.media.get(media.memory_id.as_str()) {
            Some(f) if !f.visual_tags.is_empty() => {
                f.visual_tags.iter().map(|t| t.to_lowercase()).collect()
            }
            _ => {
                let digest = Sha256::digest(media.primary_image());
                digest
                    .chunks(4)
                    .map(|c| c.iter().map(|b| format!("{b:02x}")).collect())
                    .collect()
            }
        };
        Ok(hashed_embedding(tags.iter().map(String::as_str), self.dim)
            .as_slice()
            .to_vec())
    }
}
