//! JSON payloads sent to the chat capability.
//!
//! Both the pipeline (which builds them) and the scripted backend's rule
//! fallbacks (which read them) use these types, so the wire shape lives in
//! one place.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{AtomicContextCategory, CapturedMemory, MediaKind};

use super::schema::ContextCandidate;

/// A structured memory as the models see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryView {
    pub id: String,
    pub kind: MediaKind,
    pub capture_time: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub caption: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub visible_text: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub transcript: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub people: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub visual_elements: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub environment: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub activities: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentioned_contexts: Vec<String>,
}

impl From<&CapturedMemory> for MemoryView {
    fn from(m: &CapturedMemory) -> Self {
        let values = |c| m.values(c).map(str::to_string).collect();
        Self {
            id: m.id.0.clone(),
            kind: m.kind,
            capture_time: m.capture_time(),
            location: m.metadata.place(),
            caption: m.content.caption.clone(),
            visible_text: m.content.visible_text.clone(),
            transcript: m.content.transcript.clone(),
            people: values(AtomicContextCategory::People),
            visual_elements: values(AtomicContextCategory::VisualElements),
            environment: values(AtomicContextCategory::Environment),
            activities: values(AtomicContextCategory::Activities),
            mentioned_contexts: m.mentioned_contexts.clone(),
        }
    }
}

impl MemoryView {
    /// Only what a caption-level index knows: caption, time and place.
    pub fn caption_only(m: &CapturedMemory) -> Self {
        Self {
            id: m.id.0.clone(),
            kind: m.kind,
            capture_time: m.capture_time(),
            location: m.metadata.place(),
            caption: m.content.caption.clone(),
            visible_text: String::new(),
            transcript: String::new(),
            people: Vec::new(),
            visual_elements: Vec::new(),
            environment: Vec::new(),
            activities: Vec::new(),
            mentioned_contexts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationPayload {
    pub memory_id: String,
    pub kind: MediaKind,
    pub capture_time: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub caption: String,
    #[serde(default)]
    pub visible_text: String,
    #[serde(default)]
    pub transcript: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpan {
    pub index: usize,
    pub start_date: NaiveDate,
    /// Exclusive.
    pub end_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPayload {
    pub window: WindowSpan,
    pub memories: Vec<MemoryView>,
    /// Present on the knowledge request: contexts found in this window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite_contexts: Option<Vec<ContextCandidate>>,
}

impl WindowPayload {
    pub fn lookup_key(&self) -> String {
        window_key(self.memories.iter().map(|m| m.id.as_str()))
    }
}

/// Fixture key of a window request: its memory ids joined by commas.
pub fn window_key<'a>(ids: impl IntoIterator<Item = &'a str>) -> String {
    ids.into_iter().collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPayload {
    pub query: String,
    pub reference_time: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerPayload {
    pub query: String,
    /// The rewritten query; equal to `query` for the baseline.
    pub declarative: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<String>,
    pub knowledge: Vec<String>,
    pub memories: Vec<MemoryView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptPayload {
    pub caption: String,
    pub transcript: String,
}

impl TranscriptPayload {
    /// `<caption>\n<transcript>`.
    pub fn lookup_key(&self) -> String {
        format!("{}\n{}", self.caption, self.transcript)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictnessPayload {
    pub phrase: String,
}
