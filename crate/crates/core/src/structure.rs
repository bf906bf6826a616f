//! Per-memory annotation and indexing.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gateway::payload::AnnotationPayload;
use crate::gateway::schema::AtomicContextsResponse;
use crate::gateway::{prompts, ChatRequest, Gateway, GatewayError, SchemaId};
use crate::model::{AtomicAnnotation, AtomicContextCategory, CapturedMemory, MemoryId};
use crate::store::{IndexedEntry, SearchField};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("memory {0} is a duplicate and is not structured")]
    Duplicate(MemoryId),
    #[error("memory {0} has no caption")]
    MissingCaption(MemoryId),
    #[error("memory {id}: {source}")]
    Gateway { id: MemoryId, source: GatewayError },
}

/// Trims, drops empties and removes repeats (case-insensitively),
/// keeping first occurrences.
fn clean(values: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for v in values {
        let v = v.trim();
        if !v.is_empty() && !out.iter().any(|o| o.eq_ignore_ascii_case(v)) {
            out.push(v.to_string());
        }
    }
    out
}

/// Annotates a memory with inferred atomic contexts and the composite
/// contexts it mentions. Metadata-derived annotations are kept; anything
/// inferred by an earlier run is replaced.
pub fn structure_memory(
    gateway: &Gateway,
    memory: &CapturedMemory,
) -> Result<CapturedMemory, StructureError> {
    if memory.is_duplicate() {
        return Err(StructureError::Duplicate(memory.id.clone()));
    }
    if memory.content.caption.trim().is_empty() {
        return Err(StructureError::MissingCaption(memory.id.clone()));
    }
    let payload = AnnotationPayload {
        memory_id: memory.id.0.clone(),
        kind: memory.kind,
        capture_time: memory.capture_time(),
        location: memory.metadata.place(),
        caption: memory.content.caption.clone(),
        visible_text: memory.content.visible_text.clone(),
        transcript: memory.content.transcript.clone(),
    };
    let request = ChatRequest::new(
        SchemaId::AtomicContexts,
        prompts::ATOMIC_CONTEXTS,
        &payload,
        memory.id.as_str(),
    );
    let r: AtomicContextsResponse =
        gateway
            .chat(&request)
            .map_err(|source| StructureError::Gateway {
                id: memory.id.clone(),
                source,
            })?;

    let mut out = memory.clone();
    out.annotations.retain(|a| {
        matches!(
            a.category,
            AtomicContextCategory::Temporal | AtomicContextCategory::Geographical
        )
    });
    for (category, values) in [
        (AtomicContextCategory::People, r.people),
        (AtomicContextCategory::VisualElements, r.visual_elements),
        (AtomicContextCategory::Environment, r.environment),
        (AtomicContextCategory::Activities, r.activities),
    ] {
        out.annotations.extend(
            clean(values)
                .into_iter()
                .map(|value| AtomicAnnotation { category, value }),
        );
    }
    out.mentioned_contexts = clean(r.composite_mentions);
    Ok(out)
}

/// The text indexed under `field`, if the memory has any. Annotation
/// fields join their values with ", ".
pub fn field_text(memory: &CapturedMemory, field: SearchField) -> Option<String> {
    let text = match field {
        SearchField::Caption => memory.content.caption.clone(),
        SearchField::VisibleText => memory.content.visible_text.clone(),
        SearchField::Transcript => memory.content.transcript.clone(),
        SearchField::People => join(memory, AtomicContextCategory::People),
        SearchField::VisualElements => join(memory, AtomicContextCategory::VisualElements),
        SearchField::Environment => join(memory, AtomicContextCategory::Environment),
        SearchField::Activities => join(memory, AtomicContextCategory::Activities),
        SearchField::ContextName | SearchField::KnowledgeStatement => return None,
    };
    (!text.trim().is_empty()).then_some(text)
}

fn join(memory: &CapturedMemory, category: AtomicContextCategory) -> String {
    memory.values(category).collect::<Vec<_>>().join(", ")
}

/// Embeds every non-empty searchable field of a memory.
pub fn index_annotation(
    gateway: &Gateway,
    memory: &CapturedMemory,
) -> Result<IndexedEntry, StructureError> {
    if memory.is_duplicate() {
        return Err(StructureError::Duplicate(memory.id.clone()));
    }
    let mut field_vectors = BTreeMap::new();
    for field in SearchField::MEMORY_FIELDS {
        if let Some(text) = field_text(memory, field) {
            let v = gateway
                .embed_text(&text)
                .map_err(|source| StructureError::Gateway {
                    id: memory.id.clone(),
                    source,
                })?;
            field_vectors.insert(field, v);
        }
    }
    Ok(IndexedEntry {
        memory_id: memory.id.clone(),
        capture_time: memory.capture_time(),
        field_vectors,
    })
}
