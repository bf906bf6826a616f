//! Caption-only retrieval baseline.
//!
//! Every memory is one chunk: its caption followed by its capture time and
//! place. The raw question is embedded as-is, the top-k chunks by cosine
//! are put in time order, and the shared answer step runs over them. The
//! baseline sees nothing beyond captions and metadata.

use std::collections::HashMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use memq_core::answer::{generate_grounded_answer, Answer, Evidence};
use memq_core::embedding::Vector;
use memq_core::gateway::payload::MemoryView;
use memq_core::gateway::{Gateway, GatewayError};
use memq_core::model::{CapturedMemory, MemoryId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub memory_id: MemoryId,
    pub capture_time: DateTime<Utc>,
    pub combined_text: String,
    pub vector: Vector,
}

/// `<caption> Taken on <RFC 3339>. Location: <place>.`, without the
/// location clause when the memory has no place.
pub fn combined_text(memory: &CapturedMemory) -> String {
    let mut text = format!(
        "{} Taken on {}.",
        memory.content.caption.trim(),
        memory
            .capture_time()
            .to_rfc3339_opts(SecondsFormat::Secs, true)
    );
    if let Some(place) = memory.metadata.place() {
        text.push_str(&format!(" Location: {place}."));
    }
    text
}

#[derive(Debug, Clone, Default)]
pub struct BaselineIndex {
    entries: Vec<BaselineEntry>,
    views: HashMap<MemoryId, MemoryView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHit {
    pub memory_id: MemoryId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOutcome {
    /// Retrieved ids in capture-time order.
    pub retrieved: Vec<MemoryId>,
    pub answer: Answer,
}

/// Fixture key of a baseline answer request.
pub fn answer_key(query: &str) -> String {
    format!("baseline\n{}", query.trim())
}

/// Builds one entry per non-duplicate memory.
pub fn baseline_index(
    gateway: &Gateway,
    memories: &[CapturedMemory],
) -> Result<BaselineIndex, GatewayError> {
    let mut index = BaselineIndex::default();
    for m in memories.iter().filter(|m| !m.is_duplicate()) {
        let combined_text = combined_text(m);
        index.entries.push(BaselineEntry {
            memory_id: m.id.clone(),
            capture_time: m.capture_time(),
            vector: gateway.embed_text(&combined_text)?,
            combined_text,
        });
        index.views.insert(m.id.clone(), MemoryView::caption_only(m));
    }
    Ok(index)
}

impl BaselineIndex {
    pub fn entries(&self) -> &[BaselineEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact top-`k` by cosine, ties by ascending id.
    pub fn search(&self, query: &Vector, k: usize) -> Vec<BaselineHit> {
        let mut hits: Vec<BaselineHit> = self
            .entries
            .iter()
            .map(|e| BaselineHit {
                memory_id: e.memory_id.clone(),
                score: e.vector.cosine(query),
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.memory_id.cmp(&b.memory_id))
        });
        hits.truncate(k);
        hits
    }

    /// Embeds the raw query and returns the top-`k` ids in time order.
    pub fn retrieve(&self, gateway: &Gateway, query: &str, k: usize) -> Result<Vec<MemoryId>, GatewayError> {
        let q = gateway.embed_text(query)?;
        let times: HashMap<&MemoryId, DateTime<Utc>> = self
            .entries
            .iter()
            .map(|e| (&e.memory_id, e.capture_time))
            .collect();
        let mut ids: Vec<MemoryId> = self.search(&q, k).into_iter().map(|h| h.memory_id).collect();
        ids.sort_by_key(|id| (times[id], id.clone()));
        Ok(ids)
    }
}

/// Retrieves the top-`k` captions for `query` and answers from them.
/// The reference time is only shown to the model; the baseline applies
/// no time filtering.
pub fn baseline_answer(
    index: &BaselineIndex,
    gateway: &Gateway,
    query: &str,
    reference_time: DateTime<Utc>,
    k: usize,
) -> Result<BaselineOutcome, GatewayError> {
    let query = query.trim();
    let retrieved = index.retrieve(gateway, query, k)?;
    let views: Vec<MemoryView> = retrieved.iter().map(|id| index.views[id].clone()).collect();
    let filters = [format!(
        "question asked at {}",
        reference_time.to_rfc3339_opts(SecondsFormat::Secs, true)
    )];
    let evidence = Evidence {
        query,
        declarative: query,
        filters: &filters,
        statements: &[],
        memories: &views,
    };
    let answer = generate_grounded_answer(gateway, evidence, &answer_key(query))?;
    Ok(BaselineOutcome { retrieved, answer })
}
