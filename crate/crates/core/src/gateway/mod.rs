//! Single entry point to every external model capability.
//!
//! A [`ModelBackend`] does the raw work (remote HTTP service or the
//! deterministic [`ScriptedBackend`]); [`Gateway`] wraps it with the
//! contract checks every caller relies on: unit-norm embeddings of the
//! configured dimension, non-empty captions, and schema-validated chat
//! responses with one retry.

pub mod payload;
pub mod prompts;
pub mod remote;
pub mod schema;
pub mod scripted;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::embedding::Vector;
use crate::model::{MediaKind, MemoryId};

pub use remote::RemoteBackend;
pub use schema::SchemaResponse;
pub use scripted::ScriptedBackend;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("model backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("model backend returned an empty response for {0}")]
    EmptyResponse(String),
    #[error("response for schema {schema} violates it: {detail}")]
    SchemaViolation { schema: SchemaId, detail: String },
    #[error("{operation} is not applicable to {kind:?} media")]
    WrongMediaKind { operation: &'static str, kind: MediaKind },
    #[error("embedding has dimension {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("backend returned a degenerate embedding")]
    DegenerateEmbedding,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend error: {0}")]
    Backend(String),
}

/// Response schemas the chat capability can be asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaId {
    AtomicContexts,
    CompositeContexts,
    Knowledge,
    QueryAugmentation,
    Answer,
    TranscriptValidation,
    TemporalStrictness,
}

impl SchemaId {
    pub const ALL: [SchemaId; 7] = [
        Self::AtomicContexts,
        Self::CompositeContexts,
        Self::Knowledge,
        Self::QueryAugmentation,
        Self::Answer,
        Self::TranscriptValidation,
        Self::TemporalStrictness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::AtomicContexts => "atomic_contexts",
            Self::CompositeContexts => "composite_contexts",
            Self::Knowledge => "knowledge",
            Self::QueryAugmentation => "query_augmentation",
            Self::Answer => "answer",
            Self::TranscriptValidation => "transcript_validation",
            Self::TemporalStrictness => "temporal_strictness",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_instruction: String,
    /// JSON document with the request's inputs.
    pub user_payload: String,
    pub response_schema: SchemaId,
    /// The part of the payload that identifies the request to a fixture
    /// author (a query, a memory id, a window's ids). Remote backends
    /// ignore it.
    pub lookup_key: String,
}

impl ChatRequest {
    pub fn new(
        schema: SchemaId,
        system_instruction: impl Into<String>,
        payload: &impl Serialize,
        lookup_key: impl Into<String>,
    ) -> Self {
        Self {
            system_instruction: system_instruction.into(),
            user_payload: serde_json::to_string(payload).expect("payloads serialize"),
            response_schema: schema,
            lookup_key: lookup_key.into(),
        }
    }
}

/// One sampled video frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub timestamp_secs: f64,
    pub bytes: Vec<u8>,
}

/// Media handed to a perception capability.
#[derive(Debug, Clone, Copy)]
pub struct MediaInput<'a> {
    pub memory_id: &'a MemoryId,
    pub kind: MediaKind,
    pub bytes: &'a [u8],
    pub frames: &'a [Frame],
}

impl<'a> MediaInput<'a> {
    pub fn new(memory_id: &'a MemoryId, kind: MediaKind, bytes: &'a [u8]) -> Self {
        Self {
            memory_id,
            kind,
            bytes,
            frames: &[],
        }
    }

    pub fn with_frames(mut self, frames: &'a [Frame]) -> Self {
        self.frames = frames;
        self
    }

    /// Bytes of the image to look at: the media itself for stills, the
    /// first sampled frame for videos.
    pub fn primary_image(&self) -> &'a [u8] {
        match self.frames.first() {
            Some(f) if self.kind == MediaKind::Video => &f.bytes,
            _ => self.bytes,
        }
    }
}

/// Raw model capabilities.
pub trait ModelBackend: Send + Sync {
    fn caption(&self, media: &MediaInput<'_>) -> Result<String, GatewayError>;
    fn extract_text(&self, media: &MediaInput<'_>) -> Result<String, GatewayError>;
    fn transcribe(&self, media: &MediaInput<'_>) -> Result<String, GatewayError>;
    /// Returns the raw response text; the gateway parses it.
    fn chat(&self, request: &ChatRequest) -> Result<String, GatewayError>;
    fn embed_text(&self, text: &str) -> Result<Vec<f32>, GatewayError>;
    fn embed_image(&self, media: &MediaInput<'_>) -> Result<Vec<f32>, GatewayError>;
}

#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn ModelBackend>,
    dim: usize,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway").field("dim", &self.dim).finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn ModelBackend>, dim: usize) -> Self {
        Self { backend, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn caption_media(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        let caption = self.backend.caption(media)?;
        let caption = caption.trim();
        if caption.is_empty() {
            return Err(GatewayError::EmptyResponse(format!(
                "caption of {}",
                media.memory_id
            )));
        }
        Ok(caption.to_string())
    }

    /// Visible text; an empty string is a valid answer.
    pub fn extract_text(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        self.backend.extract_text(media)
    }

    pub fn transcribe(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        if media.kind != MediaKind::Video {
            return Err(GatewayError::WrongMediaKind {
                operation: "transcribe",
                kind: media.kind,
            });
        }
        self.backend.transcribe(media)
    }

    /// Keeps `transcript` only if the chat model judges it plausible for a
    /// clip described by `caption`; speech-to-text models tend to invent
    /// phrases for silent audio.
    pub fn validate_transcript(
        &self,
        transcript: &str,
        caption: &str,
    ) -> Result<String, GatewayError> {
        if transcript.trim().is_empty() {
            return Ok(String::new());
        }
        let payload = payload::TranscriptPayload {
            caption: caption.to_string(),
            transcript: transcript.to_string(),
        };
        let request = ChatRequest::new(
            SchemaId::TranscriptValidation,
            prompts::TRANSCRIPT_VALIDATION,
            &payload,
            payload.lookup_key(),
        );
        let verdict: schema::TranscriptValidationResponse = self.chat(&request)?;
        Ok(if verdict.keep {
            transcript.to_string()
        } else {
            String::new()
        })
    }

    /// Sends `request` and parses the reply as `T`. A reply that fails to
    /// parse or validate is retried once before giving up.
    pub fn chat<T: SchemaResponse>(&self, request: &ChatRequest) -> Result<T, GatewayError> {
        if request.response_schema != T::SCHEMA {
            return Err(GatewayError::InvalidRequest(format!(
                "request asks for {} but caller expects {}",
                request.response_schema,
                T::SCHEMA
            )));
        }
        if request.user_payload.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("empty payload".into()));
        }
        let mut last_detail = String::new();
        for attempt in 0..2 {
            let raw = self.backend.chat(request)?;
            match schema::parse_response::<T>(&raw) {
                Ok(parsed) => return Ok(parsed),
                Err(detail) => {
                    warn!(schema = %T::SCHEMA, attempt, %detail, "chat response failed validation");
                    last_detail = detail;
                }
            }
        }
        Err(GatewayError::SchemaViolation {
            schema: T::SCHEMA,
            detail: last_detail,
        })
    }

    pub fn embed_text(&self, text: &str) -> Result<Vector, GatewayError> {
        let raw = self.backend.embed_text(text)?;
        self.finish_embedding(raw)
    }

    pub fn embed_image(&self, media: &MediaInput<'_>) -> Result<Vector, GatewayError> {
        let raw = self.backend.embed_image(media)?;
        self.finish_embedding(raw)
    }

    fn finish_embedding(&self, raw: Vec<f32>) -> Result<Vector, GatewayError> {
        if raw.len() != self.dim {
            return Err(GatewayError::DimensionMismatch {
                expected: self.dim,
                actual: raw.len(),
            });
        }
        Vector::normalized(&raw).ok_or(GatewayError::DegenerateEmbedding)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Returns the queued chat replies in order, then repeats the last.
    struct Sequenced {
        replies: Vec<&'static str>,
        calls: AtomicUsize,
    }

    impl ModelBackend for Sequenced {
        fn caption(&self, _: &MediaInput<'_>) -> Result<String, GatewayError> {
            Ok("   ".into())
        }
        fn extract_text(&self, _: &MediaInput<'_>) -> Result<String, GatewayError> {
            Ok(String::new())
        }
        fn transcribe(&self, _: &MediaInput<'_>) -> Result<String, GatewayError> {
            Ok("hello".into())
        }
        fn chat(&self, _: &ChatRequest) -> Result<String, GatewayError> {
            let i = self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(self.replies[i.min(self.replies.len() - 1)].to_string())
        }
        fn embed_text(&self, _: &str) -> Result<Vec<f32>, GatewayError> {
            Ok(vec![3.0, 4.0])
        }
        fn embed_image(&self, _: &MediaInput<'_>) -> Result<Vec<f32>, GatewayError> {
            Ok(vec![0.0, 0.0])
        }
    }

    fn gateway(replies: Vec<&'static str>) -> (Gateway, Arc<Sequenced>) {
        let backend = Arc::new(Sequenced {
            replies,
            calls: AtomicUsize::new(0),
        });
        (Gateway::new(backend.clone(), 2), backend)
    }

    fn strictness_request() -> ChatRequest {
        ChatRequest::new(
            SchemaId::TemporalStrictness,
            "sys",
            &serde_json::json!({"phrase": "during CHI 2024"}),
            "during CHI 2024",
        )
    }

    #[test]
    fn retries_once_then_succeeds() {
        let (gw, backend) = gateway(vec!["not json", r#"{"strict": true}"#]);
        let r: schema::TemporalStrictnessResponse = gw.chat(&strictness_request()).unwrap();
        assert!(r.strict);
        assert_eq!(backend.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn second_failure_is_schema_violation() {
        let (gw, backend) = gateway(vec![r#"{"strict": "maybe"}"#]);
        let err = gw
            .chat::<schema::TemporalStrictnessResponse>(&strictness_request())
            .unwrap_err();
        assert!(matches!(
            err,
            GatewayError::SchemaViolation {
                schema: SchemaId::TemporalStrictness,
                ..
            }
        ));
        assert_eq!(backend.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn schema_mismatch_is_rejected_before_calling() {
        let (gw, backend) = gateway(vec![r#"{"keep": true}"#]);
        let err = gw
            .chat::<schema::TranscriptValidationResponse>(&strictness_request())
            .unwrap_err();
        assert!(matches!(err, GatewayError::InvalidRequest(_)));
        assert_eq!(backend.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn embedding_contract() {
        let (gw, _) = gateway(vec![]);
        let v = gw.embed_text("x").unwrap();
        assert_eq!(v.as_slice(), &[0.6, 0.8]);
        let id = MemoryId::new("m");
        let media = MediaInput::new(&id, MediaKind::Photo, b"");
        assert_eq!(gw.embed_image(&media), Err(GatewayError::DegenerateEmbedding));
        let gw3 = Gateway::new(Arc::new(Sequenced { replies: vec![""], calls: AtomicUsize::new(0) }), 3);
        assert!(matches!(
            gw3.embed_text("x"),
            Err(GatewayError::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn blank_caption_is_empty_response_and_photos_cannot_be_transcribed() {
        let (gw, _) = gateway(vec![]);
        let id = MemoryId::new("m");
        let media = MediaInput::new(&id, MediaKind::Photo, b"");
        assert!(matches!(gw.caption_media(&media), Err(GatewayError::EmptyResponse(_))));
        assert!(matches!(
            gw.transcribe(&media),
            Err(GatewayError::WrongMediaKind { .. })
        ));
    }
}
