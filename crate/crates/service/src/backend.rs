//! Model backend selection.

use std::path::Path;
use std::sync::Arc;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use memq_core::gateway::{Gateway, GatewayError, ModelBackend, RemoteBackend, ScriptedBackend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Deterministic fixtures, no network.
    #[default]
    Scripted,
    /// HTTP model service named by `MEMQ_REMOTE_URL`.
    Remote,
}

/// Scripted backends read `fixtures` when given; without it they can only
/// embed and answer schema requests with their defaults.
pub fn build_gateway(
    kind: BackendKind,
    fixtures: Option<&Path>,
    dim: usize,
) -> Result<Gateway, GatewayError> {
    let backend: Arc<dyn ModelBackend> = match kind {
        BackendKind::Scripted => match fixtures {
            Some(dir) => Arc::new(ScriptedBackend::load(dir, dim)?),
            None => Arc::new(ScriptedBackend::new(dim)),
        },
        BackendKind::Remote => Arc::new(RemoteBackend::from_env()?),
    };
    Ok(Gateway::new(backend, dim))
}
