//! End-to-end ingestion and augmentation of a store.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

use crate::config::{ConfigError, EngineConfig};
use crate::gateway::Gateway;
use crate::ingest::{DedupResult, IngestError, Ingestor, VideoDecoder};
use crate::miner::{mine, MinerError, WindowOrder};
use crate::model::CapturedMemory;
use crate::store::{MemoryStore, Record, StoreError};
use crate::structure::{index_annotation, structure_memory, StructureError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Miner(#[from] MinerError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Builds a store holding every memory of the corpus at `root`, with
/// content processed and near-duplicates flagged.
pub fn ingest_corpus(
    root: &Path,
    gateway: &Gateway,
    decoder: &dyn VideoDecoder,
    config: &EngineConfig,
) -> Result<(MemoryStore, DedupResult), PipelineError> {
    config.validate()?;
    let outcome = Ingestor {
        gateway,
        decoder,
        dedup_threshold: config.dedup_threshold,
    }
    .run(root)?;
    let mut store = MemoryStore::new(config.clone());
    let root = std::fs::canonicalize(root).unwrap_or_else(|_| root.to_path_buf());
    store.set_corpus_root(Some(root.to_string_lossy().into_owned()));
    // Representatives precede their duplicates in time order.
    for m in outcome.memories {
        store.upsert(Record::Memory(m))?;
    }
    Ok((store, outcome.dedup))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentReport {
    pub structured: usize,
    pub windows: usize,
    pub contexts: usize,
    pub knowledge: usize,
    pub dropped_candidates: usize,
}

/// Structures and indexes every kept memory, then mines contexts and
/// knowledge. Earlier augmentation results are replaced.
pub fn augment_store(
    store: &mut MemoryStore,
    gateway: &Gateway,
    order: WindowOrder,
) -> Result<AugmentReport, PipelineError> {
    let config = store.config().clone();
    config.validate()?;
    store.clear_augmentation();

    let live: Vec<CapturedMemory> = store.timeline().into_iter().cloned().collect();
    let structured: Vec<_> = live
        .par_iter()
        .map(|m| {
            let s = structure_memory(gateway, m)?;
            let entry = index_annotation(gateway, &s)?;
            Ok((s, entry))
        })
        .collect::<Result<_, StructureError>>()?;
    for (m, entry) in &structured {
        store.upsert(Record::Memory(m.clone()))?;
        store.upsert(Record::Indexed(entry.clone()))?;
    }

    let refs: Vec<&CapturedMemory> = structured.iter().map(|(m, _)| m).collect();
    let report = if refs.is_empty() {
        AugmentReport {
            structured: 0,
            windows: 0,
            contexts: 0,
            knowledge: 0,
            dropped_candidates: 0,
        }
    } else {
        let mined = mine(gateway, &refs, &config, order)?;
        let report = AugmentReport {
            structured: refs.len(),
            windows: mined.windows,
            contexts: mined.contexts.len(),
            knowledge: mined.knowledge.len(),
            dropped_candidates: mined.dropped,
        };
        for (context, name_vector) in mined.contexts {
            store.upsert(Record::Context {
                context,
                name_vector,
            })?;
        }
        for (entry, statement_vector) in mined.knowledge {
            store.upsert(Record::Knowledge {
                entry,
                statement_vector,
            })?;
        }
        report
    };
    info!(?report, "augmented store");
    Ok(report)
}
