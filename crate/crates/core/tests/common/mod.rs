//! Builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::Rng;

use memq_core::embedding::Vector;
use memq_core::model::{validate_memory, CapturedMemory, MediaKind, SidecarRecord};
use memq_core::store::{IndexedEntry, MemoryStore, Record, SearchField};
use memq_core::EngineConfig;

pub fn memory(id: &str, time: DateTime<Utc>) -> CapturedMemory {
    let raw = SidecarRecord {
        id: id.into(),
        kind: MediaKind::Photo,
        media_path: format!("{id}.png"),
        capture_time: Some(time.to_rfc3339()),
        lat: None,
        lon: None,
        address: None,
        caption: Some(format!("caption of {id}")),
        visible_text: None,
        transcript: None,
    };
    validate_memory(&raw, &mut HashSet::new()).unwrap()
}

pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 0, 0, 0).unwrap()
}

/// Components drawn from a few levels so that equal vectors (and exact
/// score ties) are common.
pub fn coarse_vector(rng: &mut impl Rng, dim: usize) -> Vector {
    loop {
        let raw: Vec<f32> = (0..dim).map(|_| f32::from(rng.random_range(-2i8..=2))).collect();
        if let Some(v) = Vector::normalized(&raw) {
            return v;
        }
    }
}

pub fn fine_vector(rng: &mut impl Rng, dim: usize) -> Vector {
    loop {
        let raw: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        if let Some(v) = Vector::normalized(&raw) {
            return v;
        }
    }
}

pub fn draw(rng: &mut impl Rng, dim: usize, coarse: bool) -> Vector {
    if coarse {
        coarse_vector(rng, dim)
    } else {
        fine_vector(rng, dim)
    }
}

/// `n` memories spread over 60 days, each indexed on caption and, for
/// some, on people.
pub fn random_store(rng: &mut impl Rng, n: usize, dim: usize, coarse: bool) -> MemoryStore {
    let mut store = MemoryStore::new(EngineConfig {
        embedding_dim: dim,
        ..EngineConfig::default()
    });
    for i in 0..n {
        let t = epoch() + Duration::seconds(rng.random_range(0..60 * 86_400));
        let m = memory(&format!("m{i:05}"), t);
        let mut field_vectors = BTreeMap::new();
        field_vectors.insert(SearchField::Caption, draw(rng, dim, coarse));
        if rng.random_bool(0.5) {
            field_vectors.insert(SearchField::People, draw(rng, dim, coarse));
        }
        let entry = IndexedEntry {
            memory_id: m.id.clone(),
            capture_time: m.capture_time(),
            field_vectors,
        };
        store.upsert(Record::Memory(m)).unwrap();
        store.upsert(Record::Indexed(entry)).unwrap();
    }
    store
}

/// Plain cosine, written out independently of the library.
pub fn oracle_cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let na: f64 = a.iter().map(|x| f64::from(*x) * f64::from(*x)).sum();
    let nb: f64 = b.iter().map(|x| f64::from(*x) * f64::from(*x)).sum();
    dot / (na.sqrt() * nb.sqrt())
}

/// Scan every entry, sort by score then id, keep `k`.
pub fn brute_force(
    store: &MemoryStore,
    q: &Vector,
    field: SearchField,
    k: usize,
    range: Option<(DateTime<Utc>, DateTime<Utc>)>,
) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = store
        .indexed_entries()
        .filter(|e| range.is_none_or(|(s, t)| s <= e.capture_time && e.capture_time <= t))
        .filter_map(|e| {
            e.field_vectors
                .get(&field)
                .map(|v| (e.memory_id.0.clone(), oracle_cosine(q.as_slice(), v.as_slice())))
        })
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}
