//! Unit-norm embedding vectors and the deterministic bag-of-tokens encoder
//! used by the scripted backend.

use serde::{Deserialize, Serialize};

/// A dense embedding with unit L2 norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f32>);

impl Vector {
    /// Normalizes `values`. Returns `None` for an empty, non-finite or zero
    /// vector.
    pub fn normalized(values: &[f32]) -> Option<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let norm = values
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return None;
        }
        Some(Self(
            values.iter().map(|&v| (f64::from(v) / norm) as f32).collect(),
        ))
    }

    /// Wraps values that are already unit norm (e.g. read back from a
    /// snapshot). No renormalization happens, so bytes are preserved.
    pub fn from_raw(values: Vec<f32>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt()
    }

    pub fn cosine(&self, other: &Vector) -> f64 {
        cosine(&self.0, &other.0)
    }
}

/// Cosine similarity accumulated in f64, in index order.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the UTF-8 bytes of `bytes`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |hash, &b| {
        (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

pub fn token_bucket(token: &str, dim: usize) -> usize {
    (fnv1a64(token.as_bytes()) % dim as u64) as usize
}

/// Bag-of-tokens embedding: every token increments its hashed bucket,
/// then the counts are L2-normalized. Text without tokens maps to the
/// first basis vector.
pub fn hashed_embedding<'a, I>(tokens: I, dim: usize) -> Vector
where
    I: IntoIterator<Item = &'a str>,
{
    assert!(dim > 0, "embedding dimension must be positive");
    let mut counts = vec![0f32; dim];
    for token in tokens {
        counts[token_bucket(token, dim)] += 1.0;
    }
    Vector::normalized(&counts).unwrap_or_else(|| {
        let mut basis = vec![0f32; dim];
        basis[0] = 1.0;
        Vector(basis)
    })
}

pub fn embed_text_hashed(text: &str, dim: usize) -> Vector {
    let tokens: Vec<String> = tokenize(text).collect();
    hashed_embedding(tokens.iter().map(String::as_str), dim)
}
