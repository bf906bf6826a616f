//! Query augmentation, multi-source retrieval and answering.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

use crate::answer::{generate_grounded_answer, Answer, Evidence};
use crate::gateway::payload::{MemoryView, QueryPayload, StrictnessPayload};
use crate::gateway::schema::{QueryAugmentationResponse, TemporalStrictnessResponse};
use crate::gateway::{prompts, ChatRequest, Gateway, GatewayError, SchemaId};
use crate::model::{AtomicContextCategory, CapturedMemory, ContextId, KnowledgeId, MemoryId, TimeRange};
use crate::store::{MemoryStore, SearchField, StoreError};
use crate::time::resolve_relative_time;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("the store holds no indexed memories")]
    EmptyStore,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterOrigin {
    Extracted,
    Inferred,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicFilter {
    pub category: AtomicContextCategory,
    pub value: String,
    pub origin: FilterOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeFilter {
    /// Event name to match against mined contexts.
    pub name: String,
    /// Query wording around the event, used to judge strictness.
    pub phrase: String,
    /// `Some(true)`: only memories inside the event's dates count.
    pub strict_temporal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedQuery {
    pub raw: String,
    pub declarative: String,
    pub atomic_filters: Vec<AtomicFilter>,
    pub composite_filters: Vec<CompositeFilter>,
    pub temporal_phrase: Option<String>,
    pub temporal_filter: Option<TimeRange>,
    pub reference_time: DateTime<Utc>,
}

impl AugmentedQuery {
    /// One line per filter, for the answer prompt and for display.
    pub fn describe_filters(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(r) = &self.temporal_filter {
            out.push(format!(
                "time: {} to {}{}",
                r.start.to_rfc3339(),
                r.end.to_rfc3339(),
                self.temporal_phrase
                    .as_deref()
                    .map(|p| format!(" ({p})"))
                    .unwrap_or_default()
            ));
        }
        for f in &self.atomic_filters {
            let origin = match f.origin {
                FilterOrigin::Extracted => "stated",
                FilterOrigin::Inferred => "inferred",
            };
            out.push(format!("{}: {} ({origin})", f.category, f.value));
        }
        for c in &self.composite_filters {
            let scope = match c.strict_temporal {
                Some(true) => "only during the event",
                _ => "anything related",
            };
            out.push(format!("event: {} ({scope})", c.name));
        }
        out
    }
}

/// Rewrites `raw`, extracts and infers context filters, resolves the
/// explicit temporal phrase and judges each composite filter's strictness.
pub fn augment_query(
    gateway: &Gateway,
    raw: &str,
    reference_time: DateTime<Utc>,
) -> Result<AugmentedQuery, QueryError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    let payload = QueryPayload {
        query: raw.to_string(),
        reference_time,
    };
    let request = ChatRequest::new(
        SchemaId::QueryAugmentation,
        prompts::QUERY_AUGMENTATION,
        &payload,
        raw,
    );
    let r: QueryAugmentationResponse = gateway.chat(&request)?;

    let mut temporal_phrase = r
        .temporal_phrase
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty());
    let mut atomic_filters = Vec::new();
    let specs = r
        .atomic_contexts
        .into_iter()
        .map(|s| (s, FilterOrigin::Extracted))
        .chain(r.inferred_contexts.into_iter().map(|s| (s, FilterOrigin::Inferred)));
    for (spec, origin) in specs {
        let value = spec.value.trim().to_string();
        let Some(category) = spec.category() else { continue };
        if value.is_empty() {
            continue;
        }
        match category {
            AtomicContextCategory::Emotion => {
                debug!(%value, "ignoring emotion filter");
            }
            AtomicContextCategory::Temporal => {
                if temporal_phrase.is_none() && origin == FilterOrigin::Extracted {
                    temporal_phrase = Some(value);
                }
            }
            _ => {
                if !atomic_filters
                    .iter()
                    .any(|f: &AtomicFilter| f.category == category && f.value.eq_ignore_ascii_case(&value))
                {
                    atomic_filters.push(AtomicFilter {
                        category,
                        value,
                        origin,
                    });
                }
            }
        }
    }

    let temporal_filter = match temporal_phrase.as_deref() {
        Some(p) => match resolve_relative_time(p, reference_time) {
            Ok(range) => Some(range),
            Err(e) => {
                debug!(%e, "temporal phrase left as content");
                None
            }
        },
        None => None,
    };

    let mut composite_filters = Vec::new();
    for spec in r.composite_contexts {
        let name = spec.name.trim().to_string();
        let phrase = match spec.phrase.trim() {
            "" => name.clone(),
            p => p.to_string(),
        };
        let strict = assess_temporal_strictness(gateway, &phrase)?;
        composite_filters.push(CompositeFilter {
            name,
            phrase,
            strict_temporal: Some(strict),
        });
    }

    Ok(AugmentedQuery {
        raw: raw.to_string(),
        declarative: r.declarative.trim().to_string(),
        atomic_filters,
        composite_filters,
        temporal_phrase,
        temporal_filter,
        reference_time,
    })
}

/// Whether `phrase` confines results to the time of the event it names.
pub fn assess_temporal_strictness(gateway: &Gateway, phrase: &str) -> Result<bool, GatewayError> {
    let payload = StrictnessPayload {
        phrase: phrase.to_string(),
    };
    let request = ChatRequest::new(
        SchemaId::TemporalStrictness,
        prompts::TEMPORAL_STRICTNESS,
        &payload,
        phrase,
    );
    let r: TemporalStrictnessResponse = gateway.chat(&request)?;
    Ok(r.strict)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedMemory {
    pub memory_id: MemoryId,
    pub capture_time: DateTime<Utc>,
    /// Sources that produced this memory, e.g. `caption`,
    /// `atomic:activities`, `inferred:people`, `context:ctx-004`.
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievalBundle {
    /// Time-ordered, without repeats.
    pub memories: Vec<RetrievedMemory>,
    pub knowledge: Vec<KnowledgeId>,
    /// Contexts matched by composite filters.
    pub contexts: Vec<ContextId>,
}

impl RetrievalBundle {
    pub fn memory_ids(&self) -> impl Iterator<Item = &MemoryId> {
        self.memories.iter().map(|m| &m.memory_id)
    }

    pub fn contains(&self, id: &MemoryId) -> bool {
        self.memories.iter().any(|m| &m.memory_id == id)
    }
}

/// Case-insensitive containment of every token of `value` in `place`.
fn place_matches(place: &str, value: &str) -> bool {
    let place = place.to_lowercase();
    let mut tokens = crate::embedding::tokenize(value).peekable();
    tokens.peek().is_some() && tokens.all(|t| place.contains(&t))
}

/// Searches every source the augmented query points at and unions the
/// hits. A strict temporal filter excludes memories outside it from every
/// source, composite expansion included.
pub fn retrieve(
    store: &MemoryStore,
    gateway: &Gateway,
    aq: &AugmentedQuery,
) -> Result<RetrievalBundle, QueryError> {
    if store.indexed_entries().next().is_none() {
        return Err(QueryError::EmptyStore);
    }
    let cfg = store.config();
    let k = cfg.retrieval_k;
    let tf = aq.temporal_filter.as_ref().filter(|r| r.strict);
    let in_range = |m: &CapturedMemory| tf.is_none_or(|r| r.contains(m.capture_time()));

    let mut found: BTreeMap<MemoryId, Vec<String>> = BTreeMap::new();
    let mut add = |id: &MemoryId, tag: String| {
        let tags = found.entry(id.clone()).or_default();
        if !tags.contains(&tag) {
            tags.push(tag);
        }
    };

    let q = gateway.embed_text(&aq.declarative)?;
    let knowledge = store
        .search(&q, SearchField::KnowledgeStatement, k, None)?
        .into_iter()
        .map(|h| KnowledgeId::new(h.target_id))
        .collect();
    for field in SearchField::CONTENT_FIELDS {
        for hit in store.search(&q, field, k, tf)? {
            add(&MemoryId::new(hit.target_id), field.to_string());
        }
    }

    for filter in &aq.atomic_filters {
        let prefix = match filter.origin {
            FilterOrigin::Extracted => "atomic",
            FilterOrigin::Inferred => "inferred",
        };
        let tag = format!("{prefix}:{}", filter.category.as_str());
        if filter.category == AtomicContextCategory::Geographical {
            let mut hits: Vec<&CapturedMemory> = store
                .timeline()
                .into_iter()
                .filter(|m| store.indexed(&m.id).is_some() && in_range(m))
                .filter(|m| m.metadata.place().is_some_and(|p| place_matches(&p, &filter.value)))
                .collect();
            hits.truncate(k);
            for m in hits {
                add(&m.id, tag.clone());
            }
            continue;
        }
        let Some(field) = SearchField::for_category(filter.category) else {
            continue;
        };
        let v = gateway.embed_text(&filter.value)?;
        for hit in store.search(&v, field, k, tf)? {
            if hit.score >= cfg.atomic_noise_floor {
                add(&MemoryId::new(hit.target_id), tag.clone());
            }
        }
    }

    let mut contexts = Vec::new();
    let all_contexts = store.contexts().count();
    for filter in &aq.composite_filters {
        let v = gateway.embed_text(&filter.name)?;
        for hit in store.search(&v, SearchField::ContextName, all_contexts, None)? {
            if hit.score < cfg.name_merge_threshold {
                break;
            }
            let id = ContextId::new(hit.target_id);
            let Some(ctx) = store.context(&id) else { continue };
            let event_range = (filter.strict_temporal == Some(true))
                .then(|| TimeRange::from_dates(ctx.start_date, ctx.end_date, true));
            for mid in &ctx.memory_ids {
                let Some(m) = store.memory(mid) else { continue };
                if !in_range(m) || event_range.is_some_and(|r| !r.contains(m.capture_time())) {
                    continue;
                }
                add(mid, format!("context:{id}"));
            }
            if !contexts.contains(&id) {
                contexts.push(id);
            }
        }
    }

    let mut memories: Vec<RetrievedMemory> = found
        .into_iter()
        .filter_map(|(id, provenance)| {
            let m = store.memory(&id)?;
            if m.is_duplicate() || !in_range(m) {
                warn!(memory_id = %id, "retrieved memory failed the final filter");
                return None;
            }
            Some(RetrievedMemory {
                capture_time: m.capture_time(),
                memory_id: id,
                provenance,
            })
        })
        .collect();
    memories.sort_by(|a, b| (a.capture_time, &a.memory_id).cmp(&(b.capture_time, &b.memory_id)));
    Ok(RetrievalBundle {
        memories,
        knowledge,
        contexts,
    })
}

/// Answers from the retrieved memories and knowledge.
pub fn generate_answer(
    store: &MemoryStore,
    gateway: &Gateway,
    aq: &AugmentedQuery,
    bundle: &RetrievalBundle,
) -> Result<Answer, QueryError> {
    let memories: Vec<MemoryView> = bundle
        .memory_ids()
        .filter_map(|id| store.memory(id))
        .map(MemoryView::from)
        .collect();
    let statements: Vec<String> = bundle
        .knowledge
        .iter()
        .filter_map(|id| store.knowledge_entry(id))
        .map(|k| k.statement.clone())
        .collect();
    let filters = aq.describe_filters();
    let evidence = Evidence {
        query: &aq.raw,
        declarative: &aq.declarative,
        filters: &filters,
        statements: &statements,
        memories: &memories,
    };
    Ok(generate_grounded_answer(gateway, evidence, &aq.raw)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub augmented: AugmentedQuery,
    pub bundle: RetrievalBundle,
    pub answer: Answer,
}

/// Augment, retrieve, answer.
pub fn answer_query(
    store: &MemoryStore,
    gateway: &Gateway,
    raw: &str,
    reference_time: DateTime<Utc>,
) -> Result<QueryOutcome, QueryError> {
    let augmented = augment_query(gateway, raw, reference_time)?;
    let bundle = retrieve(store, gateway, &augmented)?;
    let answer = generate_answer(store, gateway, &augmented, &bundle)?;
    Ok(QueryOutcome {
        augmented,
        bundle,
        answer,
    })
}
