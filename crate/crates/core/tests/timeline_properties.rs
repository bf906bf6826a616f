mod common;

use chrono::{DateTime, Duration, Utc};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{epoch, fine_vector, memory};
use memq_core::embedding::Vector;
use memq_core::ingest::{deduplicate, DedupItem};
use memq_core::miner::segment_timeline;
use memq_core::model::{CapturedMemory, MemoryId};

fn corpus(seed: u64, n: usize, days: i64) -> Vec<CapturedMemory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = epoch() + Duration::seconds(rng.random_range(0..days * 86_400));
            let mut m = memory(&format!("m{i:04}"), t);
            if i > 0 && rng.random_bool(0.1) {
                m.duplicate_of = Some(MemoryId::new("m0000"));
            }
            m
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn window_laws(
        seed in any::<u64>(),
        n in 1usize..120,
        days in 1i64..200,
        w in 1u32..=30,
        s_frac in 0.0f64..1.0,
    ) {
        let s = 1 + ((f64::from(w) * s_frac) as u32).min(w - 1);
        let memories = corpus(seed, n, days);
        let refs: Vec<&CapturedMemory> = memories.iter().collect();
        let live: Vec<&CapturedMemory> = refs.iter().copied().filter(|m| !m.is_duplicate()).collect();
        let windows = segment_timeline(&refs, w, s).unwrap();

        let first = live.iter().map(|m| m.capture_date()).min().unwrap();
        let last = live.iter().map(|m| m.capture_date()).max().unwrap();
        prop_assert_eq!(windows[0].start_date, first);
        let tail = windows.last().unwrap();
        prop_assert!(tail.start_date <= last && last < tail.start_date + Duration::days(i64::from(s)));

        for (k, win) in windows.iter().enumerate() {
            prop_assert_eq!(win.index, k);
            prop_assert_eq!(win.end_date - win.start_date, Duration::days(i64::from(w)));
            if let Some(next) = windows.get(k + 1) {
                prop_assert_eq!(next.start_date - win.start_date, Duration::days(i64::from(s)));
                prop_assert_eq!(win.end_date - next.start_date, Duration::days(i64::from(w - s)));
            }
            // Membership iff start <= date < start + W, duplicates excluded.
            for m in &refs {
                let inside = !m.is_duplicate() && win.start_date <= m.capture_date() && m.capture_date() < win.end_date;
                prop_assert_eq!(win.memory_ids.contains(&m.id), inside, "{} in window {}", m.id, k);
            }
            let mut times: Vec<(DateTime<Utc>, &MemoryId)> = win.memory_ids.iter()
                .map(|id| (memories.iter().find(|m| &m.id == id).unwrap().capture_time(), id))
                .collect();
            let sorted = { let mut t = times.clone(); t.sort(); t };
            prop_assert_eq!(&mut times, &sorted);
        }
        for m in &live {
            prop_assert!(windows.iter().any(|win| win.memory_ids.contains(&m.id)));
        }
    }

    #[test]
    fn dedup_laws(seed in any::<u64>(), n in 1usize..80, threshold in 0.5f64..0.99) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 12;
        let mut bases: Vec<Vector> = Vec::new();
        let items: Vec<DedupItem> = (0..n)
            .map(|i| {
                // Bursts: perturbations of an earlier vector.
                let embedding = if rng.random_bool(0.1) {
                    None
                } else if !bases.is_empty() && rng.random_bool(0.5) {
                    let base = &bases[rng.random_range(0..bases.len())];
                    let noisy: Vec<f32> = base.as_slice().iter()
                        .map(|v| v + rng.random_range(-0.15f32..0.15))
                        .collect();
                    Vector::normalized(&noisy)
                } else {
                    let v = fine_vector(&mut rng, dim);
                    bases.push(v.clone());
                    Some(v)
                };
                DedupItem {
                    id: MemoryId::new(format!("d{i:03}")),
                    capture_time: epoch() + Duration::minutes(rng.random_range(0..600)),
                    embedding,
                }
            })
            .collect();
        let by_id = |id: &MemoryId| items.iter().find(|it| &it.id == id).unwrap();
        let result = deduplicate(&items, threshold);

        let stills = items.iter().filter(|i| i.embedding.is_some()).count();
        let clustered: usize = result.clusters.iter().map(|c| 1 + c.duplicate_ids.len()).sum();
        prop_assert_eq!(clustered, stills);
        prop_assert_eq!(result.kept_count + result.merged_count, n);

        for c in &result.clusters {
            let rep = by_id(&c.representative_id);
            for d in &c.duplicate_ids {
                let dup = by_id(d);
                // Earliest member represents, ties to the smaller id.
                prop_assert!((rep.capture_time, &rep.id) < (dup.capture_time, &dup.id));
                let cos = rep.embedding.as_ref().unwrap().cosine(dup.embedding.as_ref().unwrap());
                prop_assert!(cos > threshold);
            }
        }
        // Representatives are pairwise at or below the threshold, so a
        // second pass merges nothing.
        let reps: Vec<DedupItem> = result.clusters.iter().map(|c| by_id(&c.representative_id).clone()).collect();
        let again = deduplicate(&reps, threshold);
        prop_assert_eq!(again.merged_count, 0);
    }
}
