//! Store ownership and the operations shared by the CLI and the HTTP API.
//!
//! The store sits behind an `RwLock<Arc<_>>`: readers clone the `Arc` and
//! release the lock at once, writers (ingest, augment) work on a private
//! copy and swap it in when done. Writers are serialized by their own mutex
//! so a long augmentation never blocks queries.

use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

use memq_baseline::{baseline_answer, baseline_index, BaselineIndex};
use memq_core::answer::Answer;
use memq_core::eval::EngineKind;
use memq_core::gateway::{Gateway, GatewayError};
use memq_core::ingest::{DedupCluster, FrameStripDecoder, IngestError};
use memq_core::miner::{MinerError, WindowOrder};
use memq_core::model::{CapturedMemory, CompositeContext, ContextId, KnowledgeEntry, MediaKind, MemoryId};
use memq_core::pipeline::{augment_store, ingest_corpus, AugmentReport, PipelineError};
use memq_core::query::{answer_query, QueryError};
use memq_core::store::{MemoryStore, StoreError};
use memq_core::structure::StructureError;
use memq_core::EngineConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Unavailable(String),
    /// The model backend answered, but not usefully.
    #[error("{0}")]
    Upstream(String),
    #[error("{0}")]
    Internal(String),
}

impl From<GatewayError> for ServiceError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::BackendUnavailable(_) => Self::Unavailable(e.to_string()),
            GatewayError::InvalidRequest(_) => Self::BadRequest(e.to_string()),
            _ => Self::Upstream(e.to_string()),
        }
    }
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        Self::Internal(e.to_string())
    }
}

impl From<QueryError> for ServiceError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::EmptyQuery => Self::BadRequest(e.to_string()),
            QueryError::EmptyStore => Self::Conflict(e.to_string()),
            QueryError::Gateway(g) => g.into(),
            QueryError::Store(s) => s.into(),
        }
    }
}

impl From<PipelineError> for ServiceError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(c) => Self::BadRequest(c.to_string()),
            PipelineError::Ingest(IngestError::Gateway { id, source }) => match Self::from(source) {
                Self::Unavailable(m) => Self::Unavailable(format!("memory {id}: {m}")),
                other => Self::Upstream(format!("memory {id}: {other}")),
            },
            PipelineError::Ingest(i @ IngestError::Io { .. }) => Self::Internal(i.to_string()),
            PipelineError::Ingest(i) => Self::BadRequest(i.to_string()),
            PipelineError::Structure(StructureError::Gateway { source, .. }) => source.into(),
            PipelineError::Structure(s) => Self::Upstream(s.to_string()),
            PipelineError::Miner(MinerError::EmptyCorpus) => {
                Self::Conflict(MinerError::EmptyCorpus.to_string())
            }
            PipelineError::Miner(MinerError::Gateway { source, .. })
            | PipelineError::Miner(MinerError::Embedding { source, .. }) => source.into(),
            PipelineError::Miner(m) => Self::BadRequest(m.to_string()),
            PipelineError::Store(s) => s.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub corpus_root: String,
    pub memories: usize,
    pub kept: usize,
    pub merged: usize,
    /// Clusters that absorbed at least one duplicate.
    pub clusters: Vec<DedupCluster>,
}

/// Display data for a memory cited by an answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub memory_id: MemoryId,
    pub kind: MediaKind,
    pub capture_time: DateTime<Utc>,
    pub caption: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub media_url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub engine: EngineKind,
    pub query: String,
    pub reference_time: DateTime<Utc>,
    pub answer: String,
    pub explanation: String,
    pub references: Vec<Reference>,
    /// Everything handed to the answer step, in time order.
    pub retrieved: Vec<MemoryId>,
    /// Augmented engine only: filters and knowledge used.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub knowledge: Vec<String>,
}

impl QueryResponse {
    pub fn to_answer(&self) -> Answer {
        Answer {
            answer: self.answer.clone(),
            explanation: self.explanation.clone(),
            memory_ids: self.references.iter().map(|r| r.memory_id.clone()).collect(),
        }
    }

    /// The parts of a response that are safe to show under a blind label.
    pub fn blinded(&self, label: &str) -> BlindedAnswer {
        BlindedAnswer {
            label: label.to_string(),
            answer: self.answer.clone(),
            explanation: self.explanation.clone(),
            references: self.references.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindedAnswer {
    pub label: String,
    pub answer: String,
    pub explanation: String,
    pub references: Vec<Reference>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryDetail {
    pub memory: CapturedMemory,
    pub media_url: String,
    /// Contexts listing this memory as a member or a mention.
    pub contexts: Vec<ContextId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreStatus {
    pub memories: usize,
    pub duplicates: usize,
    pub indexed: usize,
    pub contexts: usize,
    pub knowledge: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_root: Option<String>,
}

pub fn media_url(memory: &CapturedMemory) -> String {
    format!("/media/{}", memory.media_path)
}

/// Current time at whole-second precision.
pub fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(0)
}

pub struct Service {
    gateway: Gateway,
    db: Option<PathBuf>,
    store: RwLock<Arc<MemoryStore>>,
    /// Baseline index together with the store it was built from.
    baseline: Mutex<Option<(Arc<MemoryStore>, Arc<BaselineIndex>)>>,
    writer: Mutex<()>,
}

impl Service {
    /// Opens the snapshot at `db` if it exists, otherwise starts empty.
    /// A `config` replaces the stored one; its embedding dimension must
    /// match the gateway's.
    pub fn open(
        gateway: Gateway,
        db: Option<PathBuf>,
        config: Option<EngineConfig>,
    ) -> Result<Self, ServiceError> {
        let mut store = match &db {
            Some(path) if path.exists() => {
                info!(path = %path.display(), "loading store");
                MemoryStore::load(path)?
            }
            _ => MemoryStore::new(EngineConfig {
                embedding_dim: gateway.dim(),
                ..EngineConfig::default()
            }),
        };
        if let Some(config) = config {
            config
                .validate()
                .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
            store.set_config(config);
        }
        if store.config().embedding_dim != gateway.dim() {
            return Err(ServiceError::BadRequest(format!(
                "store uses {}-dimensional embeddings but the backend produces {}",
                store.config().embedding_dim,
                gateway.dim()
            )));
        }
        Ok(Self::with_store(gateway, store, db))
    }

    pub fn with_store(gateway: Gateway, store: MemoryStore, db: Option<PathBuf>) -> Self {
        Self {
            gateway,
            db,
            store: RwLock::new(Arc::new(store)),
            baseline: Mutex::new(None),
            writer: Mutex::new(()),
        }
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    /// A consistent view of the store at this instant.
    pub fn store(&self) -> Arc<MemoryStore> {
        self.store.read().expect("store lock poisoned").clone()
    }

    fn install(&self, store: MemoryStore) -> Result<(), ServiceError> {
        if let Some(path) = &self.db {
            store.persist(path)?;
        }
        *self.store.write().expect("store lock poisoned") = Arc::new(store);
        Ok(())
    }

    /// Replaces the store with a fresh ingestion of `corpus`.
    pub fn ingest(&self, corpus: &Path) -> Result<IngestSummary, ServiceError> {
        let _writer = self.writer.lock().expect("writer lock poisoned");
        let config = self.store().config().clone();
        let (store, dedup) = ingest_corpus(corpus, &self.gateway, &FrameStripDecoder, &config)?;
        let summary = IngestSummary {
            corpus_root: store.corpus_root().unwrap_or_default().to_string(),
            memories: store.memories().count(),
            kept: dedup.kept_count,
            merged: dedup.merged_count,
            clusters: dedup
                .clusters
                .into_iter()
                .filter(|c| !c.duplicate_ids.is_empty())
                .collect(),
        };
        self.install(store)?;
        info!(memories = summary.memories, merged = summary.merged, "ingested");
        Ok(summary)
    }

    pub fn augment(&self, order: WindowOrder) -> Result<AugmentReport, ServiceError> {
        let _writer = self.writer.lock().expect("writer lock poisoned");
        let mut store = (*self.store()).clone();
        if store.is_empty() {
            return Err(ServiceError::Conflict("nothing ingested yet".into()));
        }
        let report = augment_store(&mut store, &self.gateway, order)?;
        self.install(store)?;
        info!(?report, "augmented");
        Ok(report)
    }

    fn baseline_index(&self, store: &Arc<MemoryStore>) -> Result<Arc<BaselineIndex>, ServiceError> {
        let mut cached = self.baseline.lock().expect("baseline lock poisoned");
        if let Some((built_from, index)) = cached.as_ref() {
            if Arc::ptr_eq(built_from, store) {
                return Ok(index.clone());
            }
        }
        let memories: Vec<CapturedMemory> = store.memories().cloned().collect();
        let index = Arc::new(baseline_index(&self.gateway, &memories)?);
        *cached = Some((store.clone(), index.clone()));
        Ok(index)
    }

    /// Runs one engine. `reference_time` defaults to now.
    pub fn query(
        &self,
        engine: EngineKind,
        query: &str,
        reference_time: Option<DateTime<Utc>>,
    ) -> Result<QueryResponse, ServiceError> {
        let query = query.trim();
        if query.is_empty() {
            return Err(QueryError::EmptyQuery.into());
        }
        let reference_time = reference_time.unwrap_or_else(now);
        let store = self.store();
        if store.is_empty() {
            return Err(ServiceError::Conflict("nothing ingested yet".into()));
        }
        let (answer, retrieved, filters, knowledge) = match engine {
            EngineKind::Augmented => {
                if store.indexed_entries().next().is_none() {
                    return Err(ServiceError::Conflict("memories are not augmented yet".into()));
                }
                let out = answer_query(&store, &self.gateway, query, reference_time)?;
                let knowledge = out
                    .bundle
                    .knowledge
                    .iter()
                    .filter_map(|id| store.knowledge_entry(id))
                    .map(|k| k.statement.clone())
                    .collect();
                let retrieved = out.bundle.memory_ids().cloned().collect();
                (out.answer, retrieved, out.augmented.describe_filters(), knowledge)
            }
            EngineKind::Baseline => {
                let index = self.baseline_index(&store)?;
                let k = store.config().baseline_k;
                let out = baseline_answer(&index, &self.gateway, query, reference_time, k)?;
                (out.answer, out.retrieved, Vec::new(), Vec::new())
            }
        };
        let references = answer
            .memory_ids
            .iter()
            .filter_map(|id| store.memory(id))
            .map(|m| Reference {
                memory_id: m.id.clone(),
                kind: m.kind,
                capture_time: m.capture_time(),
                caption: m.content.caption.clone(),
                location: m.metadata.place(),
                media_url: media_url(m),
            })
            .collect();
        Ok(QueryResponse {
            engine,
            query: query.to_string(),
            reference_time,
            answer: answer.answer,
            explanation: answer.explanation,
            references,
            retrieved,
            filters,
            knowledge,
        })
    }

    pub fn memory(&self, id: &MemoryId) -> Result<MemoryDetail, ServiceError> {
        let store = self.store();
        let memory = store
            .memory(id)
            .ok_or_else(|| ServiceError::NotFound(format!("no memory {id}")))?;
        let contexts = store
            .contexts()
            .filter(|c| c.memory_ids.contains(id) || c.mention_ids.contains(id))
            .map(|c| c.id.clone())
            .collect();
        Ok(MemoryDetail {
            media_url: media_url(memory),
            memory: memory.clone(),
            contexts,
        })
    }

    pub fn contexts(&self) -> Vec<CompositeContext> {
        self.store().contexts().cloned().collect()
    }

    pub fn knowledge(&self) -> Vec<KnowledgeEntry> {
        self.store().knowledge().cloned().collect()
    }

    pub fn status(&self) -> StoreStatus {
        let store = self.store();
        StoreStatus {
            memories: store.memories().count(),
            duplicates: store.memories().filter(|m| m.is_duplicate()).count(),
            indexed: store.indexed_entries().count(),
            contexts: store.contexts().count(),
            knowledge: store.knowledge().count(),
            corpus_root: store.corpus_root().map(str::to_string),
        }
    }

    /// Maps a `/media/` path to a file under the corpus root. Only files
    /// referenced by a stored memory are served.
    pub fn media_file(&self, relative: &str) -> Result<PathBuf, ServiceError> {
        let not_found = || ServiceError::NotFound(format!("no media at {relative}"));
        let path = Path::new(relative);
        if relative.is_empty() || !path.components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(not_found());
        }
        let store = self.store();
        let root = store.corpus_root().ok_or_else(not_found)?;
        if !store.memories().any(|m| m.media_path == relative) {
            return Err(not_found());
        }
        Ok(Path::new(root).join(path))
    }
}
