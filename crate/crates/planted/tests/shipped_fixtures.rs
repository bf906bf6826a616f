use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// The checked-in corpus is exactly what the generator writes, so it can
/// be rebuilt with `cargo run -p memq-planted --example regenerate`.
#[test]
fn shipped_fixtures_match_the_generator() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/planted");
    let dir = tempfile::tempdir().unwrap();
    memq_planted::generate(dir.path()).unwrap();
    let fresh = files(dir.path());
    let shipped = files(&shipped);
    assert_eq!(
        fresh.keys().collect::<Vec<_>>(),
        shipped.keys().collect::<Vec<_>>(),
        "file sets differ"
    );
    for (path, bytes) in &fresh {
        assert!(bytes == &shipped[path], "{} differs", path.display());
    }
}

#[test]
fn truth_round_trips_from_disk() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/planted");
    let truth = memq_planted::Truth::load(&shipped).unwrap();
    assert_eq!(truth, memq_planted::build().truth);
    assert_eq!(truth.memory_count, 308);
    assert_eq!(truth.events.len(), 6);
    assert_eq!(truth.queries.len(), 12);
}
