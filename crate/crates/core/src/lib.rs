//! Contextual augmentation and question answering over a corpus of captured
//! personal memories (photos, screenshots, videos).

pub mod answer;
pub mod config;
pub mod embedding;
pub mod eval;
pub mod gateway;
pub mod ingest;
pub mod miner;
pub mod model;
pub mod pipeline;
pub mod query;
pub mod store;
pub mod structure;
pub mod time;

pub use config::EngineConfig;
pub use embedding::Vector;
pub use model::*;
