//! Domain types shared by every pipeline stage.

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, NaiveDate, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

string_id!(
    /// Opaque identifier of a captured memory, unique within a corpus.
    MemoryId
);
string_id!(ContextId);
string_id!(KnowledgeId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Photo,
    Screenshot,
    Video,
}

impl MediaKind {
    pub fn is_still(self) -> bool {
        !matches!(self, MediaKind::Video)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub capture_time: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub longitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
}

impl Metadata {
    /// Human-readable place: the address when known, otherwise coordinates.
    pub fn place(&self) -> Option<String> {
        if let Some(addr) = self.address.as_deref().filter(|a| !a.trim().is_empty()) {
            return Some(addr.to_string());
        }
        match (self.latitude, self.longitude) {
            (Some(lat), Some(lon)) => Some(format!("{lat:.5},{lon:.5}")),
            _ => None,
        }
    }
}

/// Processed content of one memory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Content {
    pub caption: String,
    #[serde(default)]
    pub visible_text: String,
    /// Empty for anything but videos.
    #[serde(default)]
    pub transcript: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicContextCategory {
    Temporal,
    Geographical,
    People,
    VisualElements,
    Environment,
    Activities,
    /// Representable for completeness; never produced by inference.
    Emotion,
}

impl AtomicContextCategory {
    pub const ALL: [AtomicContextCategory; 7] = [
        Self::Temporal,
        Self::Geographical,
        Self::People,
        Self::VisualElements,
        Self::Environment,
        Self::Activities,
        Self::Emotion,
    ];

    /// Categories filled in by the annotation model call.
    pub const INFERRED: [AtomicContextCategory; 4] = [
        Self::People,
        Self::VisualElements,
        Self::Environment,
        Self::Activities,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Temporal => "temporal",
            Self::Geographical => "geographical",
            Self::People => "people",
            Self::VisualElements => "visual_elements",
            Self::Environment => "environment",
            Self::Activities => "activities",
            Self::Emotion => "emotion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Self::ALL.into_iter().find(|c| c.as_str() == norm)
    }
}

impl fmt::Display for AtomicContextCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicAnnotation {
    pub category: AtomicContextCategory,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturedMemory {
    pub id: MemoryId,
    pub kind: MediaKind,
    /// Path relative to the corpus root.
    pub media_path: String,
    pub metadata: Metadata,
    #[serde(default)]
    pub content: Content,
    #[serde(default)]
    pub annotations: Vec<AtomicAnnotation>,
    /// Phrases the annotator flagged as references to composite contexts.
    #[serde(default)]
    pub mentioned_contexts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<MemoryId>,
}

impl CapturedMemory {
    pub fn capture_time(&self) -> DateTime<Utc> {
        self.metadata.capture_time
    }

    pub fn capture_date(&self) -> NaiveDate {
        self.metadata.capture_time.date_naive()
    }

    pub fn is_duplicate(&self) -> bool {
        self.duplicate_of.is_some()
    }

    pub fn values(&self, category: AtomicContextCategory) -> impl Iterator<Item = &str> + '_ {
        self.annotations
            .iter()
            .filter(move |a| a.category == category)
            .map(|a| a.value.as_str())
    }

    /// Checks the annotation-level invariants.
    pub fn check(&self) -> Result<(), ModelError> {
        let count = |c| self.annotations.iter().filter(|a| a.category == c).count();
        if count(AtomicContextCategory::Temporal) != 1 {
            return Err(ModelError::Invariant(format!(
                "memory {} must carry exactly one temporal annotation",
                self.id
            )));
        }
        if count(AtomicContextCategory::Geographical) > 1 {
            return Err(ModelError::Invariant(format!(
                "memory {} carries more than one geographical annotation",
                self.id
            )));
        }
        if count(AtomicContextCategory::Emotion) > 0 {
            return Err(ModelError::Invariant(format!(
                "memory {} carries an emotion annotation",
                self.id
            )));
        }
        if self.annotations.iter().any(|a| a.value.trim().is_empty()) {
            return Err(ModelError::Invariant(format!(
                "memory {} has an empty annotation value",
                self.id
            )));
        }
        if self.kind != MediaKind::Video && !self.content.transcript.is_empty() {
            return Err(ModelError::Invariant(format!(
                "memory {} is not a video but has a transcript",
                self.id
            )));
        }
        Ok(())
    }
}

/// A named event synthesized from several memories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeContext {
    pub id: ContextId,
    pub event_name: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub memory_ids: Vec<MemoryId>,
    /// Subset of `memory_ids` linked only because they mention the event.
    /// Their capture dates may fall anywhere on the timeline.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mention_ids: Vec<MemoryId>,
    pub importance: u8,
    pub is_multi_days: bool,
}

impl CompositeContext {
    pub fn check(&self) -> Result<(), ModelError> {
        if self.event_name.trim().is_empty() {
            return Err(ModelError::Invariant(format!("context {} has no name", self.id)));
        }
        if self.start_date > self.end_date {
            return Err(ModelError::Invariant(format!(
                "context {} starts after it ends",
                self.id
            )));
        }
        if self.is_multi_days != (self.start_date < self.end_date) {
            return Err(ModelError::Invariant(format!(
                "context {} has inconsistent is_multi_days",
                self.id
            )));
        }
        if self.memory_ids.is_empty() {
            return Err(ModelError::Invariant(format!(
                "context {} links no memories",
                self.id
            )));
        }
        if !(1..=3).contains(&self.importance) {
            return Err(ModelError::Invariant(format!(
                "context {} importance {} outside 1..=3",
                self.id, self.importance
            )));
        }
        if let Some(stray) = self.mention_ids.iter().find(|m| !self.memory_ids.contains(m)) {
            return Err(ModelError::Invariant(format!(
                "context {} mention {} missing from memory_ids",
                self.id, stray
            )));
        }
        Ok(())
    }

    pub fn covers(&self, date: NaiveDate) -> bool {
        self.start_date <= date && date <= self.end_date
    }
}

/// A declarative statement inferred across several memories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub id: KnowledgeId,
    pub statement: String,
    pub memory_ids: Vec<MemoryId>,
}

const DANGLING_REFERENCES: [&str; 6] = [
    "this photo",
    "this image",
    "this picture",
    "this video",
    "this screenshot",
    "this memory",
];

impl KnowledgeEntry {
    /// A statement must be non-empty and readable without the media at hand.
    pub fn is_self_contained(statement: &str) -> bool {
        let lower = statement.trim().to_lowercase();
        !lower.is_empty() && !DANGLING_REFERENCES.iter().any(|d| lower.contains(d))
    }
}

/// Inclusive time interval; `strict` ranges exclude everything outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub strict: bool,
}

impl TimeRange {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t <= self.end
    }

    /// Whole UTC days `[start 00:00:00, end 23:59:59]`.
    pub fn from_dates(start: NaiveDate, end: NaiveDate, strict: bool) -> Self {
        let start = start.and_hms_opt(0, 0, 0).unwrap().and_utc();
        let end = end.and_hms_opt(23, 59, 59).unwrap().and_utc();
        Self { start, end, strict }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("record {id} has no capture_time")]
    MissingTimestamp { id: MemoryId },
    #[error("record {id} has an unparseable capture_time {value:?}")]
    BadTimestamp { id: MemoryId, value: String },
    #[error("duplicate memory id {0}")]
    DuplicateId(MemoryId),
    #[error("record {id} has malformed coordinates: {reason}")]
    MalformedCoordinates { id: MemoryId, reason: String },
    #[error("record has an empty id")]
    EmptyId,
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// One line of the corpus `manifest.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarRecord {
    pub id: String,
    pub kind: MediaKind,
    pub media_path: String,
    /// RFC 3339; any offset is normalized to UTC.
    #[serde(default)]
    pub capture_time: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
}

pub fn temporal_phrase(t: DateTime<Utc>) -> String {
    t.format("%A, %B %-d, %Y, %H:%M UTC").to_string()
}

/// Turns a sidecar record into a memory carrying its metadata-derived
/// annotations. `seen` accumulates ids across one corpus.
pub fn validate_memory(
    raw: &SidecarRecord,
    seen: &mut HashSet<MemoryId>,
) -> Result<CapturedMemory, ModelError> {
    if raw.id.trim().is_empty() {
        return Err(ModelError::EmptyId);
    }
    let id = MemoryId::new(raw.id.clone());
    let stamp = raw
        .capture_time
        .as_deref()
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| ModelError::MissingTimestamp { id: id.clone() })?;
    let capture_time = DateTime::parse_from_rfc3339(stamp.trim())
        .map_err(|_| ModelError::BadTimestamp {
            id: id.clone(),
            value: stamp.to_string(),
        })?
        .with_timezone(&Utc);
    let capture_time = capture_time.with_nanosecond(0).unwrap_or(capture_time);

    match (raw.lat, raw.lon) {
        (Some(lat), Some(lon)) => {
            if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
                return Err(ModelError::MalformedCoordinates {
                    id,
                    reason: format!("latitude {lat} outside [-90, 90]"),
                });
            }
            if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
                return Err(ModelError::MalformedCoordinates {
                    id,
                    reason: format!("longitude {lon} outside [-180, 180]"),
                });
            }
        }
        (None, None) => {}
        _ => {
            return Err(ModelError::MalformedCoordinates {
                id,
                reason: "latitude and longitude must be given together".into(),
            })
        }
    }

    if !seen.insert(id.clone()) {
        return Err(ModelError::DuplicateId(id));
    }

    let metadata = Metadata {
        capture_time,
        latitude: raw.lat,
        longitude: raw.lon,
        address: raw.address.clone().filter(|a| !a.trim().is_empty()),
    };
    let mut annotations = vec![AtomicAnnotation {
        category: AtomicContextCategory::Temporal,
        value: temporal_phrase(capture_time),
    }];
    if let Some(place) = metadata.place() {
        annotations.push(AtomicAnnotation {
            category: AtomicContextCategory::Geographical,
            value: place,
        });
    }
    let content = Content {
        caption: raw.caption.clone().unwrap_or_default(),
        visible_text: raw.visible_text.clone().unwrap_or_default(),
        transcript: if raw.kind == MediaKind::Video {
            raw.transcript.clone().unwrap_or_default()
        } else {
            String::new()
        },
    };

    Ok(CapturedMemory {
        id,
        kind: raw.kind,
        media_path: raw.media_path.clone(),
        metadata,
        content,
        annotations,
        mentioned_contexts: Vec::new(),
        duplicate_of: None,
    })
}
