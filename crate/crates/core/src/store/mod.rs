//! Persistent store of memories, their field embeddings, composite
//! contexts and knowledge, with exact field-scoped top-k cosine search.
//!
//! The store is a plain value: wrap it in a lock for shared use (many
//! readers, one writer).

mod snapshot;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::embedding::{cosine, Vector};
use crate::model::{
    AtomicContextCategory, CapturedMemory, CompositeContext, ContextId, KnowledgeEntry,
    KnowledgeId, MemoryId, TimeRange,
};

pub use snapshot::{FORMAT_VERSION, MAGIC};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("unknown search field {0:?}")]
    UnknownField(String),
    #[error("vector has dimension {actual}, store expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid record: {0}")]
    Invalid(String),
    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Searchable fields. The first seven belong to memories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchField {
    Caption,
    VisibleText,
    Transcript,
    People,
    VisualElements,
    Environment,
    Activities,
    ContextName,
    KnowledgeStatement,
}

impl SearchField {
    pub const MEMORY_FIELDS: [SearchField; 7] = [
        Self::Caption,
        Self::VisibleText,
        Self::Transcript,
        Self::People,
        Self::VisualElements,
        Self::Environment,
        Self::Activities,
    ];

    pub const CONTENT_FIELDS: [SearchField; 3] =
        [Self::Caption, Self::VisibleText, Self::Transcript];

    const ALL: [SearchField; 9] = [
        Self::Caption,
        Self::VisibleText,
        Self::Transcript,
        Self::People,
        Self::VisualElements,
        Self::Environment,
        Self::Activities,
        Self::ContextName,
        Self::KnowledgeStatement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Caption => "caption",
            Self::VisibleText => "visible_text",
            Self::Transcript => "transcript",
            Self::People => "people",
            Self::VisualElements => "visual_elements",
            Self::Environment => "environment",
            Self::Activities => "activities",
            Self::ContextName => "context_name",
            Self::KnowledgeStatement => "knowledge_statement",
        }
    }

    pub fn is_memory_field(self) -> bool {
        !matches!(self, Self::ContextName | Self::KnowledgeStatement)
    }

    /// The annotation field an atomic category is indexed under, if any.
    pub fn for_category(category: AtomicContextCategory) -> Option<Self> {
        match category {
            AtomicContextCategory::People => Some(Self::People),
            AtomicContextCategory::VisualElements => Some(Self::VisualElements),
            AtomicContextCategory::Environment => Some(Self::Environment),
            AtomicContextCategory::Activities => Some(Self::Activities),
            _ => None,
        }
    }

    fn code(self) -> u8 {
        Self::ALL.iter().position(|f| *f == self).unwrap() as u8
    }

    fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code)).copied()
    }
}

impl fmt::Display for SearchField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchField {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| StoreError::UnknownField(s.to_string()))
    }
}

/// Field embeddings of one memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedEntry {
    pub memory_id: MemoryId,
    pub capture_time: DateTime<Utc>,
    pub field_vectors: BTreeMap<SearchField, Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub target_id: String,
    pub score: f64,
    pub field: SearchField,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Memory(CapturedMemory),
    Indexed(IndexedEntry),
    Context {
        context: CompositeContext,
        name_vector: Vector,
    },
    Knowledge {
        entry: KnowledgeEntry,
        statement_vector: Vector,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub config: EngineConfig,
    /// Directory the memories' `media_path`s are relative to.
    #[serde(default)]
    pub corpus_root: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryStore {
    meta: StoreMeta,
    memories: BTreeMap<MemoryId, CapturedMemory>,
    indexed: BTreeMap<MemoryId, IndexedEntry>,
    contexts: BTreeMap<ContextId, (CompositeContext, Vector)>,
    knowledge: BTreeMap<KnowledgeId, (KnowledgeEntry, Vector)>,
}

impl MemoryStore {
    pub fn new(config: EngineConfig) -> Self {
        Self {
            meta: StoreMeta {
                config,
                corpus_root: None,
            },
            memories: BTreeMap::new(),
            indexed: BTreeMap::new(),
            contexts: BTreeMap::new(),
            knowledge: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.meta.config
    }

    pub fn set_config(&mut self, config: EngineConfig) {
        self.meta.config = config;
    }

    pub fn corpus_root(&self) -> Option<&str> {
        self.meta.corpus_root.as_deref()
    }

    pub fn set_corpus_root(&mut self, root: Option<String>) {
        self.meta.corpus_root = root;
    }

    pub fn memory(&self, id: &MemoryId) -> Option<&CapturedMemory> {
        self.memories.get(id)
    }

    /// All memories, duplicates included, ordered by id.
    pub fn memories(&self) -> impl Iterator<Item = &CapturedMemory> {
        self.memories.values()
    }

    /// Non-duplicate memories ordered by (capture time, id).
    pub fn timeline(&self) -> Vec<&CapturedMemory> {
        let mut v: Vec<_> = self.memories.values().filter(|m| !m.is_duplicate()).collect();
        v.sort_by(|a, b| (a.capture_time(), &a.id).cmp(&(b.capture_time(), &b.id)));
        v
    }

    pub fn indexed(&self, id: &MemoryId) -> Option<&IndexedEntry> {
        self.indexed.get(id)
    }

    pub fn indexed_entries(&self) -> impl Iterator<Item = &IndexedEntry> {
        self.indexed.values()
    }

    pub fn context(&self, id: &ContextId) -> Option<&CompositeContext> {
        self.contexts.get(id).map(|(c, _)| c)
    }

    pub fn contexts(&self) -> impl Iterator<Item = &CompositeContext> {
        self.contexts.values().map(|(c, _)| c)
    }

    pub fn knowledge_entry(&self, id: &KnowledgeId) -> Option<&KnowledgeEntry> {
        self.knowledge.get(id).map(|(k, _)| k)
    }

    pub fn knowledge(&self) -> impl Iterator<Item = &KnowledgeEntry> {
        self.knowledge.values().map(|(k, _)| k)
    }

    pub fn is_empty(&self) -> bool {
        self.memories.is_empty()
    }

    /// Drops everything derived by augmentation, keeping memories.
    pub fn clear_augmentation(&mut self) {
        self.indexed.clear();
        self.contexts.clear();
        self.knowledge.clear();
    }

    fn check_dim(&self, v: &Vector) -> Result<(), StoreError> {
        let expected = self.meta.config.embedding_dim;
        if v.dim() != expected {
            return Err(StoreError::DimensionMismatch {
                expected,
                actual: v.dim(),
            });
        }
        Ok(())
    }

    fn live_memory(&self, id: &MemoryId, referrer: &str) -> Result<&CapturedMemory, StoreError> {
        match self.memories.get(id) {
            Some(m) if !m.is_duplicate() => Ok(m),
            Some(_) => Err(StoreError::DanglingReference(format!(
                "{referrer} references duplicate memory {id}"
            ))),
            None => Err(StoreError::DanglingReference(format!(
                "{referrer} references unknown memory {id}"
            ))),
        }
    }

    /// Inserts or replaces a record by id.
    pub fn upsert(&mut self, record: Record) -> Result<(), StoreError> {
        match record {
            Record::Memory(memory) => {
                memory
                    .check()
                    .map_err(|e| StoreError::Invalid(e.to_string()))?;
                if let Some(rep) = &memory.duplicate_of {
                    if rep == &memory.id {
                        return Err(StoreError::Invalid(format!(
                            "memory {} is marked a duplicate of itself",
                            memory.id
                        )));
                    }
                    self.live_memory(rep, &format!("duplicate {}", memory.id))?;
                    let referenced = self
                        .contexts
                        .values()
                        .any(|(c, _)| c.memory_ids.contains(&memory.id))
                        || self
                            .knowledge
                            .values()
                            .any(|(k, _)| k.memory_ids.contains(&memory.id));
                    if referenced {
                        return Err(StoreError::DanglingReference(format!(
                            "memory {} is still referenced and cannot become a duplicate",
                            memory.id
                        )));
                    }
                    self.indexed.remove(&memory.id);
                }
                self.memories.insert(memory.id.clone(), memory);
            }
            Record::Indexed(entry) => {
                let memory = self.live_memory(&entry.memory_id, "index entry")?;
                if memory.capture_time() != entry.capture_time {
                    return Err(StoreError::Invalid(format!(
                        "index entry for {} disagrees on capture time",
                        entry.memory_id
                    )));
                }
                for (field, v) in &entry.field_vectors {
                    if !field.is_memory_field() {
                        return Err(StoreError::Invalid(format!(
                            "{field} is not a memory field"
                        )));
                    }
                    self.check_dim(v)?;
                }
                self.indexed.insert(entry.memory_id.clone(), entry);
            }
            Record::Context {
                context,
                name_vector,
            } => {
                context
                    .check()
                    .map_err(|e| StoreError::Invalid(e.to_string()))?;
                self.check_dim(&name_vector)?;
                for id in &context.memory_ids {
                    self.live_memory(id, &format!("context {}", context.id))?;
                }
                self.contexts
                    .insert(context.id.clone(), (context, name_vector));
            }
            Record::Knowledge {
                entry,
                statement_vector,
            } => {
                if entry.statement.trim().is_empty() {
                    return Err(StoreError::Invalid(format!(
                        "knowledge {} has an empty statement",
                        entry.id
                    )));
                }
                self.check_dim(&statement_vector)?;
                for id in &entry.memory_ids {
                    self.live_memory(id, &format!("knowledge {}", entry.id))?;
                }
                self.knowledge
                    .insert(entry.id.clone(), (entry, statement_vector));
            }
        }
        Ok(())
    }

    /// Exact top-`k` cosine search over `field`. Hits are ordered by
    /// descending score, ties by ascending id. A strict `time_filter`
    /// removes memories captured outside it (and contexts not overlapping
    /// it) before ranking; knowledge is timeless and unaffected.
    pub fn search(
        &self,
        query: &Vector,
        field: SearchField,
        k: usize,
        time_filter: Option<&TimeRange>,
    ) -> Result<Vec<SearchHit>, StoreError> {
        self.check_dim(query)?;
        let filter = time_filter.filter(|r| r.strict);
        let q = query.as_slice();
        let mut hits: Vec<SearchHit> = match field {
            SearchField::ContextName => self
                .contexts
                .values()
                .filter(|(c, _)| {
                    filter.is_none_or(|r| {
                        c.start_date <= r.end.date_naive() && r.start.date_naive() <= c.end_date
                    })
                })
                .map(|(c, v)| SearchHit {
                    target_id: c.id.0.clone(),
                    score: cosine(q, v.as_slice()),
                    field,
                })
                .collect(),
            SearchField::KnowledgeStatement => self
                .knowledge
                .values()
                .map(|(e, v)| SearchHit {
                    target_id: e.id.0.clone(),
                    score: cosine(q, v.as_slice()),
                    field,
                })
                .collect(),
            _ => self
                .indexed
                .values()
                .filter(|e| filter.is_none_or(|r| r.contains(e.capture_time)))
                .filter_map(|e| {
                    e.field_vectors.get(&field).map(|v| SearchHit {
                        target_id: e.memory_id.0.clone(),
                        score: cosine(q, v.as_slice()),
                        field,
                    })
                })
                .collect(),
        };
        hits.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.target_id.cmp(&b.target_id))
        });
        hits.truncate(k);
        Ok(hits)
    }

    fn check_integrity(&self) -> Result<(), StoreError> {
        for m in self.memories.values() {
            m.check().map_err(|e| StoreError::Invalid(e.to_string()))?;
            if let Some(rep) = &m.duplicate_of {
                self.live_memory(rep, &format!("duplicate {}", m.id))?;
            }
        }
        for e in self.indexed.values() {
            self.live_memory(&e.memory_id, "index entry")?;
            for v in e.field_vectors.values() {
                self.check_dim(v)?;
            }
        }
        for (c, v) in self.contexts.values() {
            c.check().map_err(|e| StoreError::Invalid(e.to_string()))?;
            self.check_dim(v)?;
            for id in &c.memory_ids {
                self.live_memory(id, &format!("context {}", c.id))?;
            }
        }
        for (k, v) in self.knowledge.values() {
            self.check_dim(v)?;
            for id in &k.memory_ids {
                self.live_memory(id, &format!("knowledge {}", k.id))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_text_hashed;
    use crate::model::{validate_memory, MediaKind, SidecarRecord};
    use std::collections::HashSet;

    pub(crate) fn memory(id: &str, time: &str) -> CapturedMemory {
        let raw = SidecarRecord {
            id: id.into(),
            kind: MediaKind::Photo,
            media_path: format!("{id}.png"),
            capture_time: Some(time.into()),
            lat: None,
            lon: None,
            address: None,
            caption: Some(format!("caption of {id}")),
            visible_text: None,
            transcript: None,
        };
        validate_memory(&raw, &mut HashSet::new()).unwrap()
    }

    fn store_with(n: usize) -> MemoryStore {
        let cfg = EngineConfig {
            embedding_dim: 32,
            ..Default::default()
        };
        let mut store = MemoryStore::new(cfg);
        for i in 0..n {
            let m = memory(&format!("m{i:02}"), &format!("2024-05-{:02}T10:00:00Z", i + 1));
            let entry = IndexedEntry {
                memory_id: m.id.clone(),
                capture_time: m.capture_time(),
                field_vectors: [(
                    SearchField::Caption,
                    embed_text_hashed(&m.content.caption, 32),
                )]
                .into(),
            };
            store.upsert(Record::Memory(m)).unwrap();
            store.upsert(Record::Indexed(entry)).unwrap();
        }
        store
    }

    #[test]
    fn upsert_replaces_by_id() {
        let mut store = store_with(1);
        let mut m = store.memory(&"m00".into()).unwrap().clone();
        m.content.caption = "second".into();
        store.upsert(Record::Memory(m.clone())).unwrap();
        assert_eq!(store.memories().count(), 1);
        assert_eq!(store.memory(&"m00".into()), Some(&m));
    }

    #[test]
    fn context_with_unknown_memory_dangles() {
        let mut store = store_with(1);
        let ctx = CompositeContext {
            id: "ctx-1".into(),
            event_name: "Dentist appointment".into(),
            start_date: "2024-05-01".parse().unwrap(),
            end_date: "2024-05-01".parse().unwrap(),
            location: None,
            memory_ids: vec!["ghost".into()],
            mention_ids: vec![],
            importance: 1,
            is_multi_days: false,
        };
        let err = store
            .upsert(Record::Context {
                context: ctx,
                name_vector: embed_text_hashed("Dentist appointment", 32),
            })
            .unwrap_err();
        assert!(matches!(err, StoreError::DanglingReference(_)));
    }

    #[test]
    fn self_match_scores_one() {
        let store = store_with(5);
        let q = embed_text_hashed("caption of m03", 32);
        let hits = store.search(&q, SearchField::Caption, 1, None).unwrap();
        assert_eq!(hits[0].target_id, "m03");
        assert!((hits[0].score - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fewer_hits_than_k_and_empty_filters() {
        let store = store_with(3);
        let q = embed_text_hashed("caption", 32);
        assert_eq!(store.search(&q, SearchField::Caption, 10, None).unwrap().len(), 3);
        let nothing = TimeRange::from_dates(
            "2030-01-01".parse().unwrap(),
            "2030-01-02".parse().unwrap(),
            true,
        );
        assert!(store
            .search(&q, SearchField::Caption, 10, Some(&nothing))
            .unwrap()
            .is_empty());
        assert!(store.search(&q, SearchField::People, 10, None).unwrap().is_empty());
    }

    #[test]
    fn strict_filter_excludes_outside_entries() {
        let store = store_with(10);
        let q = embed_text_hashed("caption", 32);
        let range = TimeRange::from_dates(
            "2024-05-03".parse().unwrap(),
            "2024-05-05".parse().unwrap(),
            true,
        );
        let ids: Vec<_> = store
            .search(&q, SearchField::Caption, 10, Some(&range))
            .unwrap()
            .into_iter()
            .map(|h| h.target_id)
            .collect();
        assert_eq!(ids.len(), 3);
        assert!(ids.iter().all(|id| ["m02", "m03", "m04"].contains(&id.as_str())));
    }

    #[test]
    fn unknown_field_name() {
        assert!(matches!(
            "colour".parse::<SearchField>(),
            Err(StoreError::UnknownField(_))
        ));
        assert_eq!("context_name".parse::<SearchField>().unwrap(), SearchField::ContextName);
    }

    #[test]
    fn duplicates_cannot_be_indexed() {
        let mut store = store_with(2);
        let mut dup = store.memory(&"m01".into()).unwrap().clone();
        dup.duplicate_of = Some("m00".into());
        store.upsert(Record::Memory(dup)).unwrap();
        assert!(store.indexed(&"m01".into()).is_none());
        let entry = IndexedEntry {
            memory_id: "m01".into(),
            capture_time: store.memory(&"m01".into()).unwrap().capture_time(),
            field_vectors: BTreeMap::new(),
        };
        assert!(matches!(
            store.upsert(Record::Indexed(entry)),
            Err(StoreError::DanglingReference(_))
        ));
    }
}
