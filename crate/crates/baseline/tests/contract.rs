use std::collections::{BTreeSet, HashSet};
use std::path::Path;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Duration, SecondsFormat, TimeZone, Utc};
use proptest::prelude::*;
use serde_json::Value;

use memq_baseline::{answer_key, baseline_answer, baseline_index};
use memq_core::embedding::embed_text_hashed;
use memq_core::gateway::{ChatRequest, Gateway, GatewayError, MediaInput, ModelBackend, ScriptedBackend};
use memq_core::model::{
    validate_memory, AtomicAnnotation, AtomicContextCategory, CapturedMemory, MediaKind,
    MemoryId, SidecarRecord,
};

const WORDS: [&str; 10] = [
    "beach", "sunset", "hike", "dinner", "friends", "poster", "gym", "boba", "dog", "park",
];

fn memory(i: usize, caption: &str, minutes: i64, address: Option<&str>) -> CapturedMemory {
    let t = Utc.with_ymd_and_hms(2024, 4, 1, 0, 0, 0).unwrap() + Duration::minutes(minutes);
    let raw = SidecarRecord {
        id: format!("m{i:04}"),
        kind: MediaKind::Photo,
        media_path: format!("m{i:04}.png"),
        capture_time: Some(t.to_rfc3339()),
        lat: None,
        lon: None,
        address: address.map(str::to_string),
        caption: Some(caption.to_string()),
        visible_text: None,
        transcript: None,
    };
    validate_memory(&raw, &mut HashSet::new()).unwrap()
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let n = |v: &[f32]| v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    dot / (n(a) * n(b))
}

/// Full scan over `caption + time + place` texts, top `k` by score then
/// id, returned in time order.
fn oracle(memories: &[CapturedMemory], query: &str, k: usize, dim: usize) -> Vec<(MemoryId, f64)> {
    let q = embed_text_hashed(query, dim);
    let mut scored: Vec<(DateTime<Utc>, MemoryId, f64)> = memories
        .iter()
        .filter(|m| !m.is_duplicate())
        .map(|m| {
            let mut text = format!(
                "{} Taken on {}.",
                m.content.caption,
                m.capture_time().to_rfc3339_opts(SecondsFormat::Secs, true)
            );
            if let Some(a) = &m.metadata.address {
                text += &format!(" Location: {a}.");
            }
            let v = embed_text_hashed(&text, dim);
            (m.capture_time(), m.id.clone(), cosine(q.as_slice(), v.as_slice()))
        })
        .collect();
    scored.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    scored.into_iter().map(|(_, id, s)| (id, s)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn retrieval_equals_brute_force_top_k(
        captions in prop::collection::vec(prop::collection::vec(0usize..WORDS.len(), 1..5), 1..120),
        query in prop::collection::vec(0usize..WORDS.len(), 1..4),
        k in prop::sample::select(vec![1usize, 10, 50]),
    ) {
        let dim = 256;
        let memories: Vec<CapturedMemory> = captions
            .iter()
            .enumerate()
            .map(|(i, words)| {
                let caption: Vec<&str> = words.iter().map(|w| WORDS[*w]).collect();
                // Repeated minutes make equal texts, hence exact ties.
                let address = (i % 3 == 0).then_some("Honolulu, HI");
                memory(i, &caption.join(" "), (i % 7) as i64 * 90, address)
            })
            .collect();
        let query: Vec<&str> = query.iter().map(|w| WORDS[*w]).collect();
        let query = query.join(" ");

        let gw = Gateway::new(Arc::new(ScriptedBackend::new(dim)), dim);
        let index = baseline_index(&gw, &memories).unwrap();
        let want = oracle(&memories, &query, k, dim);
        let got = index.retrieve(&gw, &query, k).unwrap();
        prop_assert_eq!(&got, &want.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>());

        let q = gw.embed_text(&query).unwrap();
        let hits = index.search(&q, k);
        let ranked: BTreeSet<&MemoryId> = hits.iter().map(|h| &h.memory_id).collect();
        prop_assert_eq!(ranked, got.iter().collect::<BTreeSet<_>>());
        for h in &hits {
            let (_, s) = want.iter().find(|(id, _)| id == &h.memory_id).unwrap();
            prop_assert!((h.score - s).abs() < 1e-9);
        }
    }
}

#[test]
fn duplicates_are_not_indexed() {
    let mut ms = vec![memory(0, "beach sunset", 0, None), memory(1, "beach sunset", 1, None)];
    ms[1].duplicate_of = Some(ms[0].id.clone());
    let gw = Gateway::new(Arc::new(ScriptedBackend::new(32)), 32);
    let index = baseline_index(&gw, &ms).unwrap();
    assert_eq!(index.len(), 1);
}

/// Answers every chat with an empty answer and keeps the payloads.
struct Recorder {
    chats: Mutex<Vec<ChatRequest>>,
}

impl ModelBackend for Recorder {
    fn caption(&self, _: &MediaInput<'_>) -> Result<String, GatewayError> {
        unreachable!("baseline never captions")
    }
    fn extract_text(&self, _: &MediaInput<'_>) -> Result<String, GatewayError> {
        unreachable!("baseline never reads text")
    }
    fn transcribe(&self, _: &MediaInput<'_>) -> Result<String, GatewayError> {
        unreachable!("baseline never transcribes")
    }
    fn chat(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        self.chats.lock().unwrap().push(request.clone());
        Ok(r#"{"answer": "ok", "explanation": "", "memory_ids": []}"#.into())
    }
    fn embed_text(&self, text: &str) -> Result<Vec<f32>, GatewayError> {
        Ok(embed_text_hashed(text, 32).as_slice().to_vec())
    }
    fn embed_image(&self, _: &MediaInput<'_>) -> Result<Vec<f32>, GatewayError> {
        unreachable!("baseline never embeds images")
    }
}

#[test]
fn answer_model_sees_captions_time_and_place_only() {
    let mut m = memory(0, "A stairmaster display", 30, Some("Berkeley, CA"));
    m.content.visible_text = "32:10 elapsed".into();
    m.annotations.push(AtomicAnnotation {
        category: AtomicContextCategory::Activities,
        value: "cardio workout".into(),
    });
    m.mentioned_contexts.push("CHI 2024".into());
    let recorder = Arc::new(Recorder { chats: Mutex::new(Vec::new()) });
    let gw = Gateway::new(recorder.clone(), 32);
    let index = baseline_index(&gw, &[m]).unwrap();
    let t = Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap();
    baseline_answer(&index, &gw, "  how often do I work out? ", t, 50).unwrap();

    let chats = recorder.chats.lock().unwrap();
    assert_eq!(chats.len(), 1);
    assert_eq!(chats[0].lookup_key, answer_key("how often do I work out?"));
    assert_eq!(chats[0].lookup_key, "baseline\nhow often do I work out?");
    let payload: Value = serde_json::from_str(&chats[0].user_payload).unwrap();
    assert_eq!(payload["knowledge"], Value::Array(vec![]));
    let view = payload["memories"][0].as_object().unwrap();
    let keys: BTreeSet<&str> = view.keys().map(String::as_str).collect();
    assert_eq!(keys, BTreeSet::from(["id", "kind", "capture_time", "location", "caption"]));
}

/// The crate may only reach memories, captions, embeddings and the shared
/// answer step; nothing produced by augmentation.
#[test]
fn source_never_touches_augmentation_state() {
    const FORBIDDEN: [&str; 14] = [
        "context", "Context", "knowledge", "Knowledge", "annotation", "Annotation",
        "MemoryStore", "store::", "miner", "query::", "structure", "values(", "SearchField",
        "mention",
    ];
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("src");
    let mut scanned = 0;
    for entry in std::fs::read_dir(&src).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "rs") {
            let text = std::fs::read_to_string(&path).unwrap();
            for word in FORBIDDEN {
                assert!(!text.contains(word), "{} mentions {word:?}", path.display());
            }
            scanned += 1;
        }
    }
    assert!(scanned > 0);

    let manifest = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("Cargo.toml")).unwrap();
    let deps = manifest
        .split("[dependencies]")
        .nth(1)
        .unwrap()
        .split("\n[")
        .next()
        .unwrap();
    let names: BTreeSet<&str> = deps
        .lines()
        .filter_map(|l| l.split('=').next())
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .collect();
    assert_eq!(names, BTreeSet::from(["chrono", "memq-core", "serde"]));
}
