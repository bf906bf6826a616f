//! Binary snapshot format (all integers little-endian):
//!
//! ```text
//! magic         8 bytes  "MEMQSNAP"
//! version       u32
//! record_count  u64
//! records       record_count x { tag u8, len u32, body[len] }
//! checksum      32 bytes SHA-256 over every preceding byte
//! ```
//!
//! Record tags: `1` meta, `2` memory, `3` composite context, `4` knowledge
//! (JSON bodies), `5` vector (binary body):
//!
//! ```text
//! owner u8 (1 memory, 2 context, 3 knowledge)
//! field u8 (SearchField code)
//! secs i64, nanos u32 (capture time; zero unless owner is memory)
//! id_len u16, id bytes (UTF-8)
//! dim u32, dim x f32
//! ```
//!
//! Records are written in a fixed order (meta, then memories, contexts and
//! knowledge by id, then vectors by owner, id and field), so persisting the
//! same store always yields the same bytes.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::DateTime;
use sha2::{Digest, Sha256};

use super::{IndexedEntry, MemoryStore, SearchField, StoreError, StoreMeta};
use crate::embedding::Vector;
use crate::model::{CapturedMemory, CompositeContext, ContextId, KnowledgeEntry, KnowledgeId, MemoryId};

pub const MAGIC: &[u8; 8] = b"MEMQSNAP";
pub const FORMAT_VERSION: u32 = 1;

const TAG_META: u8 = 1;
const TAG_MEMORY: u8 = 2;
const TAG_CONTEXT: u8 = 3;
const TAG_KNOWLEDGE: u8 = 4;
const TAG_VECTOR: u8 = 5;

const OWNER_MEMORY: u8 = 1;
const OWNER_CONTEXT: u8 = 2;
const OWNER_KNOWLEDGE: u8 = 3;

const HEADER_LEN: usize = 8 + 4 + 8;
const CHECKSUM_LEN: usize = 32;

fn corrupt(msg: impl Into<String>) -> StoreError {
    StoreError::CorruptSnapshot(msg.into())
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("store records serialize")
}

struct Writer {
    buf: Vec<u8>,
    count: u64,
}

impl Writer {
    fn record(&mut self, tag: u8, body: &[u8]) {
        self.buf.push(tag);
        self.buf
            .extend_from_slice(&u32::try_from(body.len()).expect("record fits u32").to_le_bytes());
        self.buf.extend_from_slice(body);
        self.count += 1;
    }

    fn vector(&mut self, owner: u8, field: SearchField, time: Option<DateTime<chrono::Utc>>, id: &str, v: &Vector) {
        let mut body = Vec::with_capacity(20 + id.len() + 4 * v.dim());
        body.push(owner);
        body.push(field.code());
        let (secs, nanos) = time.map_or((0, 0), |t| (t.timestamp(), t.timestamp_subsec_nanos()));
        body.extend_from_slice(&secs.to_le_bytes());
        body.extend_from_slice(&nanos.to_le_bytes());
        body.extend_from_slice(&u16::try_from(id.len()).expect("id fits u16").to_le_bytes());
        body.extend_from_slice(id.as_bytes());
        body.extend_from_slice(&(v.dim() as u32).to_le_bytes());
        for x in v.as_slice() {
            body.extend_from_slice(&x.to_le_bytes());
        }
        self.record(TAG_VECTOR, &body);
    }
}

impl MemoryStore {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer {
            buf: Vec::new(),
            count: 0,
        };
        w.record(TAG_META, &json(&self.meta));
        for m in self.memories.values() {
            w.record(TAG_MEMORY, &json(m));
        }
        for (c, _) in self.contexts.values() {
            w.record(TAG_CONTEXT, &json(c));
        }
        for (k, _) in self.knowledge.values() {
            w.record(TAG_KNOWLEDGE, &json(k));
        }
        for e in self.indexed.values() {
            for (field, v) in &e.field_vectors {
                w.vector(OWNER_MEMORY, *field, Some(e.capture_time), e.memory_id.as_str(), v);
            }
        }
        for (c, v) in self.contexts.values() {
            w.vector(OWNER_CONTEXT, SearchField::ContextName, None, c.id.as_str(), v);
        }
        for (k, v) in self.knowledge.values() {
            w.vector(OWNER_KNOWLEDGE, SearchField::KnowledgeStatement, None, k.id.as_str(), v);
        }

        let mut out = Vec::with_capacity(HEADER_LEN + w.buf.len() + CHECKSUM_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&w.count.to_le_bytes());
        out.extend_from_slice(&w.buf);
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StoreError> {
        if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
            return Err(corrupt("file is shorter than header and checksum"));
        }
        if &bytes[..8] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(StoreError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let (payload, checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
        if Sha256::digest(payload).as_slice() != checksum {
            return Err(corrupt("checksum mismatch"));
        }
        let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap());

        let mut r = Reader {
            data: &payload[HEADER_LEN..],
        };
        let mut meta: Option<StoreMeta> = None;
        let mut memories = BTreeMap::new();
        let mut contexts: BTreeMap<ContextId, CompositeContext> = BTreeMap::new();
        let mut knowledge: BTreeMap<KnowledgeId, KnowledgeEntry> = BTreeMap::new();
        let mut indexed: BTreeMap<MemoryId, IndexedEntry> = BTreeMap::new();
        let mut context_vecs: BTreeMap<ContextId, Vector> = BTreeMap::new();
        let mut knowledge_vecs: BTreeMap<KnowledgeId, Vector> = BTreeMap::new();

        for _ in 0..count {
            let tag = r.u8()?;
            let len = r.u32()? as usize;
            let body = r.take(len)?;
            match tag {
                TAG_META => meta = Some(from_json(body)?),
                TAG_MEMORY => {
                    let m: CapturedMemory = from_json(body)?;
                    if memories.insert(m.id.clone(), m).is_some() {
                        return Err(corrupt("repeated memory record"));
                    }
                }
                TAG_CONTEXT => {
                    let c: CompositeContext = from_json(body)?;
                    contexts.insert(c.id.clone(), c);
                }
                TAG_KNOWLEDGE => {
                    let k: KnowledgeEntry = from_json(body)?;
                    knowledge.insert(k.id.clone(), k);
                }
                TAG_VECTOR => {
                    let mut b = Reader { data: body };
                    let owner = b.u8()?;
                    let field = SearchField::from_code(b.u8()?)
                        .ok_or_else(|| corrupt("unknown field code"))?;
                    let secs = i64::from_le_bytes(b.take(8)?.try_into().unwrap());
                    let nanos = b.u32()?;
                    let id_len = u16::from_le_bytes(b.take(2)?.try_into().unwrap()) as usize;
                    let id = std::str::from_utf8(b.take(id_len)?)
                        .map_err(|_| corrupt("vector id is not UTF-8"))?
                        .to_string();
                    let dim = b.u32()? as usize;
                    let raw = b.take(dim * 4)?;
                    if !b.data.is_empty() {
                        return Err(corrupt("trailing bytes in vector record"));
                    }
                    let values = raw
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                        .collect();
                    let v = Vector::from_raw(values);
                    match owner {
                        OWNER_MEMORY => {
                            let capture_time = DateTime::from_timestamp(secs, nanos)
                                .ok_or_else(|| corrupt("capture time out of range"))?;
                            let entry = indexed.entry(MemoryId(id.clone())).or_insert_with(|| {
                                IndexedEntry {
                                    memory_id: MemoryId(id),
                                    capture_time,
                                    field_vectors: BTreeMap::new(),
                                }
                            });
                            entry.field_vectors.insert(field, v);
                        }
                        OWNER_CONTEXT => {
                            context_vecs.insert(ContextId(id), v);
                        }
                        OWNER_KNOWLEDGE => {
                            knowledge_vecs.insert(KnowledgeId(id), v);
                        }
                        _ => return Err(corrupt("unknown vector owner")),
                    }
                }
                other => return Err(corrupt(format!("unknown record tag {other}"))),
            }
        }
        if !r.data.is_empty() {
            return Err(corrupt("bytes after the last record"));
        }

        let meta = meta.ok_or_else(|| corrupt("missing meta record"))?;
        let mut store = MemoryStore::new(meta.config.clone());
        store.meta = meta;
        store.memories = memories;
        store.indexed = indexed;
        for (id, c) in contexts {
            let v = context_vecs
                .remove(&id)
                .ok_or_else(|| corrupt(format!("context {id} has no name vector")))?;
            store.contexts.insert(id, (c, v));
        }
        for (id, k) in knowledge {
            let v = knowledge_vecs
                .remove(&id)
                .ok_or_else(|| corrupt(format!("knowledge {id} has no statement vector")))?;
            store.knowledge.insert(id, (k, v));
        }
        if !context_vecs.is_empty() || !knowledge_vecs.is_empty() {
            return Err(corrupt("vector without an owner record"));
        }
        store.check_integrity()?;
        Ok(store)
    }

    /// Writes the snapshot atomically (temp file, then rename).
    pub fn persist(&self, path: &Path) -> Result<(), StoreError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_bytes())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn from_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, StoreError> {
    serde_json::from_slice(body).map_err(|e| corrupt(format!("bad record body: {e}")))
}

struct Reader<'a> {
    data: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        if self.data.len() < n {
            return Err(corrupt("truncated record"));
        }
        let (head, rest) = self.data.split_at(n);
        self.data = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, StoreError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::memory;
    use super::super::Record;
    use super::*;
    use crate::config::EngineConfig;
    use crate::embedding::embed_text_hashed;

    fn sample() -> MemoryStore {
        let mut store = MemoryStore::new(EngineConfig {
            embedding_dim: 16,
            ..Default::default()
        });
        store.set_corpus_root(Some("/data/corpus".into()));
        for (id, t) in [("a", "2024-05-01T09:00:00Z"), ("b", "2024-05-02T09:30:15Z")] {
            let m = memory(id, t);
            let entry = IndexedEntry {
                memory_id: m.id.clone(),
                capture_time: m.capture_time(),
                field_vectors: [
                    (SearchField::Caption, embed_text_hashed(id, 16)),
                    (SearchField::People, embed_text_hashed("me", 16)),
                ]
                .into(),
            };
            store.upsert(Record::Memory(m)).unwrap();
            store.upsert(Record::Indexed(entry)).unwrap();
        }
        let mut dup = memory("c", "2024-05-02T09:30:16Z");
        dup.duplicate_of = Some("b".into());
        store.upsert(Record::Memory(dup)).unwrap();
        store
            .upsert(Record::Context {
                context: CompositeContext {
                    id: "ctx-001".into(),
                    event_name: "Weekend visit".into(),
                    start_date: "2024-05-01".parse().unwrap(),
                    end_date: "2024-05-02".parse().unwrap(),
                    location: Some("Portland".into()),
                    memory_ids: vec!["a".into(), "b".into()],
                    mention_ids: vec![],
                    importance: 2,
                    is_multi_days: true,
                },
                name_vector: embed_text_hashed("Weekend visit", 16),
            })
            .unwrap();
        store
            .upsert(Record::Knowledge {
                entry: KnowledgeEntry {
                    id: "kn-001".into(),
                    statement: "The user visits Portland.".into(),
                    memory_ids: vec!["a".into()],
                },
                statement_vector: embed_text_hashed("The user visits Portland.", 16),
            })
            .unwrap();
        store
    }

    #[test]
    fn round_trip_is_exact() {
        let store = sample();
        let bytes = store.to_bytes();
        let back = MemoryStore::from_bytes(&bytes).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn round_trip_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.mq");
        sample().persist(&path).unwrap();
        assert_eq!(MemoryStore::load(&path).unwrap(), sample());
    }

    #[test]
    fn detects_version_and_corruption() {
        let bytes = sample().to_bytes();
        let mut wrong_version = bytes.clone();
        wrong_version[8] = 9;
        assert!(matches!(
            MemoryStore::from_bytes(&wrong_version),
            Err(StoreError::VersionMismatch { found: 9, .. })
        ));
        let mut flipped = bytes.clone();
        let mid = bytes.len() / 2;
        flipped[mid] ^= 0x40;
        assert!(matches!(
            MemoryStore::from_bytes(&flipped),
            Err(StoreError::CorruptSnapshot(_))
        ));
        assert!(matches!(
            MemoryStore::from_bytes(&bytes[..bytes.len() - 1]),
            Err(StoreError::CorruptSnapshot(_))
        ));
        assert!(matches!(
            MemoryStore::from_bytes(b"not a snapshot at all, clearly not one..."),
            Err(StoreError::CorruptSnapshot(_))
        ));
    }
}
