mod common;

use chrono::Duration;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force, coarse_vector, epoch, fine_vector, random_store};
use memq_core::model::TimeRange;
use memq_core::store::{MemoryStore, SearchField};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_equals_brute_force(
        seed in any::<u64>(),
        n in 0usize..400,
        dim in prop::sample::select(vec![3usize, 8, 32]),
        coarse in any::<bool>(),
        k in 0usize..60,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = random_store(&mut rng, n, dim, coarse);
        let q = if coarse { coarse_vector(&mut rng, dim) } else { fine_vector(&mut rng, dim) };
        for field in [SearchField::Caption, SearchField::People] {
            let got = store.search(&q, field, k, None).unwrap();
            let want = brute_force(&store, &q, field, k, None);
            prop_assert_eq!(got.len(), want.len());
            for (g, (id, score)) in got.iter().zip(&want) {
                prop_assert_eq!(&g.target_id, id);
                prop_assert!((g.score - score).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn strict_filter_never_leaks(
        seed in any::<u64>(),
        n in 1usize..300,
        start_day in 0i64..60,
        span_hours in 0i64..(24 * 20),
        k in 1usize..80,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coarse = rng.random_bool(0.5);
        let store = random_store(&mut rng, n, 16, coarse);
        let start = epoch() + Duration::days(start_day) + Duration::minutes(rng.random_range(0..1440));
        let range = TimeRange { start, end: start + Duration::hours(span_hours), strict: true };
        let q = fine_vector(&mut rng, 16);
        let got = store.search(&q, SearchField::Caption, k, Some(&range)).unwrap();
        for hit in &got {
            let t = store.memory(&hit.target_id.as_str().into()).unwrap().capture_time();
            prop_assert!(range.contains(t), "{} at {} outside {:?}", hit.target_id, t, range);
        }
        let want = brute_force(&store, &q, SearchField::Caption, k, Some((range.start, range.end)));
        let ids: Vec<&str> = got.iter().map(|h| h.target_id.as_str()).collect();
        let want_ids: Vec<&str> = want.iter().map(|(id, _)| id.as_str()).collect();
        prop_assert_eq!(ids, want_ids);

        // A non-strict range filters nothing.
        let loose = TimeRange { strict: false, ..range };
        prop_assert_eq!(
            store.search(&q, SearchField::Caption, k, Some(&loose)).unwrap(),
            store.search(&q, SearchField::Caption, k, None).unwrap()
        );
    }

    #[test]
    fn persist_then_load_is_identity(seed in any::<u64>(), n in 0usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = random_store(&mut rng, n, 24, false);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.db");
        store.persist(&path).unwrap();
        let loaded = MemoryStore::load(&path).unwrap();
        prop_assert_eq!(&loaded, &store);
        prop_assert_eq!(loaded.to_bytes(), store.to_bytes());
    }
}

#[test]
fn wrong_dimension_query_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let store = random_store(&mut rng, 5, 8, false);
    let q = fine_vector(&mut rng, 9);
    assert!(store.search(&q, SearchField::Caption, 3, None).is_err());
}
