//! HTTP API and command line around the memq engines.
//!
//! [`Service`] owns the store and the model gateway and is shared by the
//! `memq` binary and the axum router in [`http`].

pub mod backend;
pub mod engine;
pub mod http;
pub mod sessions;

pub use backend::{build_gateway, BackendKind};
pub use engine::{BlindedAnswer, QueryResponse, Reference, Service, ServiceError};
pub use sessions::{SessionBook, SessionError, Side};
