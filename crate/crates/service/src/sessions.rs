//! Blinded A/B comparison sessions.
//!
//! A session holds both engines' answers behind the labels `A` and `B`.
//! Once both sides are rated the session is finalized: it is appended to
//! the log exactly once and refuses further ratings.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use memq_core::answer::Answer;
use memq_core::eval::{
    append_record, read_log, Assignment, EngineKind, EvalError, QueryCategory, Rating,
    SessionRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("session {0} is already finalized")]
    Finalized(String),
    #[error(transparent)]
    Log(#[from] EvalError),
}

/// Draws an assignment: augmented is shown as A on `true`.
fn draw(rng: &mut impl Rng) -> Assignment {
    let a = if rng.random_bool(0.5) {
        EngineKind::Augmented
    } else {
        EngineKind::Baseline
    };
    Assignment { a }
}

/// The assignment a request carrying `seed` receives.
pub fn seeded_assignment(seed: u64) -> Assignment {
    draw(&mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone)]
struct Pending {
    query: String,
    category: Option<QueryCategory>,
    assignment: Assignment,
    answer_a: Answer,
    answer_b: Answer,
    rating_a: Option<Rating>,
    rating_b: Option<Rating>,
    created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatingStatus {
    Awaiting(Side),
    Finalized(Box<SessionRecord>),
}

#[derive(Debug)]
pub struct SessionBook {
    rng: ChaCha8Rng,
    pending: HashMap<String, Pending>,
    finalized: HashSet<String>,
    log: PathBuf,
}

impl SessionBook {
    /// Sessions already in `log` count as finalized.
    pub fn open(log: impl Into<PathBuf>, seed: u64) -> Result<Self, EvalError> {
        let log = log.into();
        let finalized = read_log(&log)?.into_iter().map(|r| r.session_id).collect();
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending: HashMap::new(),
            finalized,
            log,
        })
    }

    pub fn log_path(&self) -> &Path {
        &self.log
    }

    /// Per-request seeds are independent of the book's own stream.
    pub fn assign(&mut self, seed: Option<u64>) -> Assignment {
        match seed {
            Some(seed) => seeded_assignment(seed),
            None => draw(&mut self.rng),
        }
    }

    /// Stores both answers under their blind labels and returns the new
    /// session id.
    pub fn start(
        &mut self,
        query: &str,
        category: Option<QueryCategory>,
        assignment: Assignment,
        augmented: Answer,
        baseline: Answer,
        created_at: DateTime<Utc>,
    ) -> String {
        let (answer_a, answer_b) = match assignment.a {
            EngineKind::Augmented => (augmented, baseline),
            EngineKind::Baseline => (baseline, augmented),
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.pending.insert(
            id.clone(),
            Pending {
                query: query.to_string(),
                category,
                assignment,
                answer_a,
                answer_b,
                rating_a: None,
                rating_b: None,
                created_at,
            },
        );
        id
    }

    pub fn is_pending(&self, id: &str) -> bool {
        self.pending.contains_key(id)
    }

    /// Records a rating, overwriting an earlier one for the same side.
    /// The second side finalizes the session and appends it to the log.
    pub fn rate(
        &mut self,
        id: &str,
        side: Side,
        rating: Rating,
        now: DateTime<Utc>,
    ) -> Result<RatingStatus, SessionError> {
        if self.finalized.contains(id) {
            return Err(SessionError::Finalized(id.to_string()));
        }
        let session = self
            .pending
            .get_mut(id)
            .ok_or_else(|| SessionError::NotFound(id.to_string()))?;
        match side {
            Side::A => session.rating_a = Some(rating),
            Side::B => session.rating_b = Some(rating),
        }
        let (rating_a, rating_b) = match (session.rating_a, session.rating_b) {
            (Some(a), Some(b)) => (a, b),
            (None, _) => return Ok(RatingStatus::Awaiting(Side::A)),
            (_, None) => return Ok(RatingStatus::Awaiting(Side::B)),
        };
        let record = SessionRecord {
            session_id: id.to_string(),
            query: session.query.clone(),
            category: session.category,
            assignment: session.assignment,
            answer_a: session.answer_a.clone(),
            answer_b: session.answer_b.clone(),
            rating_a,
            rating_b,
            created_at: session.created_at,
            finalized_at: now,
        };
        // Only a record that reached the log finalizes the session.
        append_record(&self.log, &record)?;
        self.pending.remove(id);
        self.finalized.insert(id.to_string());
        Ok(RatingStatus::Finalized(Box::new(record)))
    }
}
