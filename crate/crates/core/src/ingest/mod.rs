//! Corpus scanning, near-duplicate merging and content processing.
//!
//! A corpus is a directory holding `manifest.jsonl` (one sidecar record per
//! line) and the media files the records point at.

mod video;

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, info};

use crate::embedding::Vector;
use crate::gateway::{Frame, Gateway, GatewayError, MediaInput};
use crate::model::{validate_memory, CapturedMemory, Content, MediaKind, MemoryId, ModelError, SidecarRecord};

pub use video::{
    encode_frame_strip, frame_timestamps, sample_video_frames, DecodedVideo, FrameStripDecoder,
    VideoDecoder, FRAME_STRIP_MAGIC, SAMPLED_FRAMES, SAMPLED_SECONDS,
};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no {MANIFEST_FILE} in {0}")]
    ManifestMissing(PathBuf),
    #[error("manifest line {line}: {reason}")]
    ManifestParse { line: usize, reason: String },
    #[error("memory {id}: media file {path} does not exist")]
    DanglingPath { id: MemoryId, path: PathBuf },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("undecodable video{}: {reason}", id.as_ref().map(|i| format!(" {i}")).unwrap_or_default())]
    UndecodableVideo { id: Option<MemoryId>, reason: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("memory {id}: {source}")]
    Gateway { id: MemoryId, source: GatewayError },
}

impl IngestError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A manifest record that passed validation and whose file exists.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMedia {
    /// Metadata-only memory; content is filled in by processing.
    pub memory: CapturedMemory,
    pub path: PathBuf,
}

impl RawMedia {
    pub fn id(&self) -> &MemoryId {
        &self.memory.id
    }

    pub fn kind(&self) -> MediaKind {
        self.memory.kind
    }

    pub fn read(&self) -> Result<Vec<u8>, IngestError> {
        std::fs::read(&self.path).map_err(|e| IngestError::io(&self.path, e))
    }
}

/// Reads the manifest under `root`, ordered by (capture time, id).
pub fn scan_corpus(root: &Path) -> Result<Vec<RawMedia>, IngestError> {
    let manifest = root.join(MANIFEST_FILE);
    if !manifest.is_file() {
        return Err(IngestError::ManifestMissing(root.to_path_buf()));
    }
    let text = std::fs::read_to_string(&manifest).map_err(|e| IngestError::io(&manifest, e))?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: SidecarRecord =
            serde_json::from_str(line).map_err(|e| IngestError::ManifestParse {
                line: i + 1,
                reason: e.to_string(),
            })?;
        let memory = validate_memory(&record, &mut seen)?;
        let path = root.join(&memory.media_path);
        if !path.is_file() {
            return Err(IngestError::DanglingPath {
                id: memory.id,
                path,
            });
        }
        out.push(RawMedia { memory, path });
    }
    out.sort_by(|a, b| {
        (a.memory.capture_time(), &a.memory.id).cmp(&(b.memory.capture_time(), &b.memory.id))
    });
    Ok(out)
}

/// Input to [`deduplicate`]. Items without an embedding (videos) pass
/// through unclustered.
#[derive(Debug, Clone)]
pub struct DedupItem {
    pub id: MemoryId,
    pub capture_time: DateTime<Utc>,
    pub embedding: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupCluster {
    pub representative_id: MemoryId,
    pub duplicate_ids: Vec<MemoryId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupResult {
    pub clusters: Vec<DedupCluster>,
    pub kept_count: usize,
    pub merged_count: usize,
}

impl DedupResult {
    /// Duplicate id to representative id.
    pub fn duplicate_map(&self) -> HashMap<MemoryId, MemoryId> {
        self.clusters
            .iter()
            .flat_map(|c| {
                c.duplicate_ids
                    .iter()
                    .map(|d| (d.clone(), c.representative_id.clone()))
            })
            .collect()
    }
}

/// Greedy single-linkage clustering in (capture time, id) order: an item
/// joins the first cluster whose representative has cosine strictly above
/// `threshold`, otherwise it founds a new cluster.
pub fn deduplicate(items: &[DedupItem], threshold: f64) -> DedupResult {
    let mut order: Vec<&DedupItem> = items.iter().collect();
    order.sort_by(|a, b| (a.capture_time, &a.id).cmp(&(b.capture_time, &b.id)));

    let mut reps: Vec<&Vector> = Vec::new();
    let mut clusters: Vec<DedupCluster> = Vec::new();
    let mut merged = 0;
    for item in order {
        let Some(emb) = &item.embedding else {
            continue;
        };
        match reps.iter().position(|r| r.cosine(emb) > threshold) {
            Some(c) => {
                clusters[c].duplicate_ids.push(item.id.clone());
                merged += 1;
            }
            None => {
                reps.push(emb);
                clusters.push(DedupCluster {
                    representative_id: item.id.clone(),
                    duplicate_ids: Vec::new(),
                });
            }
        }
    }
    DedupResult {
        clusters,
        kept_count: items.len() - merged,
        merged_count: merged,
    }
}

/// Captions, reads and (for videos) transcribes one memory. `frames` are
/// the sampled frames of a video and empty otherwise.
pub fn process_content(
    gateway: &Gateway,
    raw: &RawMedia,
    bytes: &[u8],
    frames: &[Frame],
) -> Result<Content, IngestError> {
    let wrap = |source| IngestError::Gateway {
        id: raw.id().clone(),
        source,
    };
    let media = MediaInput::new(raw.id(), raw.kind(), bytes).with_frames(frames);
    let caption = gateway.caption_media(&media).map_err(wrap)?;
    let visible_text = gateway.extract_text(&media).map_err(wrap)?;
    let transcript = if raw.kind() == MediaKind::Video {
        let heard = gateway.transcribe(&media).map_err(wrap)?;
        gateway
            .validate_transcript(&heard, &caption)
            .map_err(wrap)?
    } else {
        String::new()
    };
    Ok(Content {
        caption,
        visible_text: visible_text.trim().to_string(),
        transcript,
    })
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    /// Every manifest record, time-ordered; duplicates carry `duplicate_of`
    /// and no content.
    pub memories: Vec<CapturedMemory>,
    pub dedup: DedupResult,
}

pub struct Ingestor<'a> {
    pub gateway: &'a Gateway,
    pub decoder: &'a dyn VideoDecoder,
    pub dedup_threshold: f64,
}

impl Ingestor<'_> {
    /// Scans, deduplicates on image embeddings, then processes the content
    /// of every kept memory. Records that arrive with a caption in the
    /// manifest keep their supplied content.
    pub fn run(&self, root: &Path) -> Result<IngestOutcome, IngestError> {
        let raws = scan_corpus(root)?;
        info!(count = raws.len(), root = %root.display(), "scanned corpus");

        let items: Vec<DedupItem> = raws
            .par_iter()
            .map(|raw| {
                let embedding = if raw.kind().is_still() {
                    let bytes = raw.read()?;
                    let media = MediaInput::new(raw.id(), raw.kind(), &bytes);
                    Some(self.gateway.embed_image(&media).map_err(|source| {
                        IngestError::Gateway {
                            id: raw.id().clone(),
                            source,
                        }
                    })?)
                } else {
                    None
                };
                Ok(DedupItem {
                    id: raw.id().clone(),
                    capture_time: raw.memory.capture_time(),
                    embedding,
                })
            })
            .collect::<Result<_, IngestError>>()?;
        let dedup = deduplicate(&items, self.dedup_threshold);
        info!(kept = dedup.kept_count, merged = dedup.merged_count, "deduplicated");
        let dups = dedup.duplicate_map();

        let memories = raws
            .into_par_iter()
            .map(|raw| {
                let mut memory = raw.memory.clone();
                if let Some(rep) = dups.get(&memory.id) {
                    memory.duplicate_of = Some(rep.clone());
                    memory.content = Content::default();
                    return Ok(memory);
                }
                if !memory.content.caption.trim().is_empty() {
                    debug!(id = %memory.id, "using supplied content");
                    return Ok(memory);
                }
                let bytes = raw.read()?;
                let frames = if raw.kind() == MediaKind::Video {
                    sample_video_frames(self.decoder, &bytes).map_err(|e| match e {
                        IngestError::UndecodableVideo { reason, .. } => {
                            IngestError::UndecodableVideo {
                                id: Some(memory.id.clone()),
                                reason,
                            }
                        }
                        other => other,
                    })?
                } else {
                    Vec::new()
                };
                memory.content = process_content(self.gateway, &raw, &bytes, &frames)?;
                Ok(memory)
            })
            .collect::<Result<Vec<_>, IngestError>>()?;
        Ok(IngestOutcome { memories, dedup })
    }
}
