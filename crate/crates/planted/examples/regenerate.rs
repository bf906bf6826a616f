//! Rewrites the shipped planted corpus: `cargo run -p memq-planted --example regenerate -- <dir>`.

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures/planted"));
    if out.exists() {
        std::fs::remove_dir_all(&out)?;
    }
    let truth = memq_planted::generate(&out)?;
    println!("wrote {} memories to {}", truth.memory_count, out.display());
    Ok(())
}
