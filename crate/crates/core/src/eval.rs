//! Rating scales, head-to-head comparison and report aggregation over a
//! log of blinded comparison sessions.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::Answer;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ratings must lie in 1..=5 (got upa {upa}, upc {upc})")]
    BadRating { upa: u8, upc: u8 },
    #[error("no ratings given")]
    EmptyList,
    #[error("session log line {line}: {reason}")]
    BadLog { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// User-perceived accuracy and completeness, each 1 to 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRating")]
pub struct Rating {
    upa: u8,
    upc: u8,
}

#[derive(Deserialize)]
struct RawRating {
    upa: u8,
    upc: u8,
}

impl TryFrom<RawRating> for Rating {
    type Error = EvalError;

    fn try_from(r: RawRating) -> Result<Self, EvalError> {
        Rating::new(r.upa, r.upc)
    }
}

impl Rating {
    pub fn new(upa: u8, upc: u8) -> Result<Self, EvalError> {
        if (1..=5).contains(&upa) && (1..=5).contains(&upc) {
            Ok(Self { upa, upc })
        } else {
            Err(EvalError::BadRating { upa, upc })
        }
    }

    pub fn upa(self) -> u8 {
        self.upa
    }

    pub fn upc(self) -> u8 {
        self.upc
    }

    /// Mostly correct or better.
    pub fn is_accurate(self) -> bool {
        self.upa >= 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryCategory {
    DirectContent,
    ContextualFilter,
    Hybrid,
    Other,
}

impl QueryCategory {
    pub const ALL: [QueryCategory; 4] = [
        Self::DirectContent,
        Self::ContextualFilter,
        Self::Hybrid,
        Self::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DirectContent => "direct_content",
            Self::ContextualFilter => "contextual_filter",
            Self::Hybrid => "hybrid",
            Self::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonOutcome {
    AWins,
    BWins,
    Tie,
    BothBad,
}

impl ComparisonOutcome {
    pub fn swapped(self) -> Self {
        match self {
            Self::AWins => Self::BWins,
            Self::BWins => Self::AWins,
            other => other,
        }
    }
}

/// Both at UPA 2 or lower is "both bad"; otherwise the higher UPA wins,
/// then the higher UPC; full equality is a tie.
pub fn compare_ratings(a: Rating, b: Rating) -> ComparisonOutcome {
    use std::cmp::Ordering::*;
    if a.upa <= 2 && b.upa <= 2 {
        return ComparisonOutcome::BothBad;
    }
    match a.upa.cmp(&b.upa).then(a.upc.cmp(&b.upc)) {
        Greater => ComparisonOutcome::AWins,
        Less => ComparisonOutcome::BWins,
        Equal => ComparisonOutcome::Tie,
    }
}

/// Share of ratings with UPA at least 4.
pub fn accuracy(ratings: &[Rating]) -> Result<f64, EvalError> {
    if ratings.is_empty() {
        return Err(EvalError::EmptyList);
    }
    let hits = ratings.iter().filter(|r| r.is_accurate()).count();
    Ok(hits as f64 / ratings.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Augmented,
    Baseline,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Augmented => "augmented",
            Self::Baseline => "baseline",
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::Augmented => Self::Baseline,
            Self::Baseline => Self::Augmented,
        }
    }
}

impl std::str::FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "augmented" => Ok(Self::Augmented),
            "baseline" => Ok(Self::Baseline),
            other => Err(format!("unknown engine {other:?} (expected augmented or baseline)")),
        }
    }
}

/// Which engine was shown as answer A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub a: EngineKind,
}

impl Assignment {
    pub fn b(self) -> EngineKind {
        self.a.other()
    }

    /// Outcome from the augmented engine's point of view.
    pub fn unblind(self, outcome: ComparisonOutcome) -> ComparisonOutcome {
        match self.a {
            EngineKind::Augmented => outcome,
            EngineKind::Baseline => outcome.swapped(),
        }
    }
}

/// One finalized comparison: both answers, both ratings and the blinding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<QueryCategory>,
    pub assignment: Assignment,
    pub answer_a: Answer,
    pub answer_b: Answer,
    pub rating_a: Rating,
    pub rating_b: Rating,
    pub created_at: DateTime<Utc>,
    pub finalized_at: DateTime<Utc>,
}

impl SessionRecord {
    pub fn rating_of(&self, engine: EngineKind) -> Rating {
        if self.assignment.a == engine {
            self.rating_a
        } else {
            self.rating_b
        }
    }

    /// Outcome from the augmented engine's point of view: `AWins` means
    /// the augmented engine won.
    pub fn outcome(&self) -> ComparisonOutcome {
        self.assignment
            .unblind(compare_ratings(self.rating_a, self.rating_b))
    }
}

/// Appends one record as a JSON line.
pub fn append_record(path: &Path, record: &SessionRecord) -> Result<(), EvalError> {
    let mut line = serde_json::to_string(record).expect("session records serialize");
    line.push('\n');
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    file.write_all(line.as_bytes())?;
    file.flush()?;
    Ok(())
}

/// Reads a session log; a missing file is an empty log.
pub fn read_log(path: &Path) -> Result<Vec<SessionRecord>, EvalError> {
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| EvalError::BadLog {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineStats {
    pub mean_upa: f64,
    pub mean_upc: f64,
    pub accuracy: f64,
}

impl EngineStats {
    fn of(ratings: &[Rating]) -> Self {
        if ratings.is_empty() {
            return Self::default();
        }
        let n = ratings.len() as f64;
        Self {
            mean_upa: ratings.iter().map(|r| f64::from(r.upa)).sum::<f64>() / n,
            mean_upc: ratings.iter().map(|r| f64::from(r.upc)).sum::<f64>() / n,
            accuracy: accuracy(ratings).unwrap_or(0.0),
        }
    }
}

/// Percentages of sessions by unblinded outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WinRates {
    pub augmented_wins: f64,
    pub baseline_wins: f64,
    pub tie: f64,
    pub both_bad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// A category name, or `overall`.
    pub label: String,
    pub sessions: usize,
    pub augmented: EngineStats,
    pub baseline: EngineStats,
    pub win_rates: WinRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// One row per category, then `overall`.
    pub rows: Vec<ReportRow>,
}

fn row(label: &str, records: &[&SessionRecord]) -> ReportRow {
    let ratings = |e| records.iter().map(|r| r.rating_of(e)).collect::<Vec<_>>();
    let mut win_rates = WinRates::default();
    if !records.is_empty() {
        let pct = |o| {
            100.0 * records.iter().filter(|r| r.outcome() == o).count() as f64
                / records.len() as f64
        };
        win_rates = WinRates {
            augmented_wins: pct(ComparisonOutcome::AWins),
            baseline_wins: pct(ComparisonOutcome::BWins),
            tie: pct(ComparisonOutcome::Tie),
            both_bad: pct(ComparisonOutcome::BothBad),
        };
    }
    ReportRow {
        label: label.to_string(),
        sessions: records.len(),
        augmented: EngineStats::of(&ratings(EngineKind::Augmented)),
        baseline: EngineStats::of(&ratings(EngineKind::Baseline)),
        win_rates,
    }
}

/// Per-category and overall statistics. Sessions without a category
/// count as `other`.
pub fn aggregate_report(records: &[SessionRecord]) -> Report {
    let mut rows: Vec<ReportRow> = QueryCategory::ALL
        .iter()
        .map(|c| {
            let subset: Vec<&SessionRecord> = records
                .iter()
                .filter(|r| r.category.unwrap_or(QueryCategory::Other) == *c)
                .collect();
            row(c.as_str(), &subset)
        })
        .collect();
    rows.push(row("overall", &records.iter().collect::<Vec<_>>()));
    Report { rows }
}

impl Report {
    const HEADER: [&'static str; 12] = [
        "category",
        "sessions",
        "aug_upa",
        "aug_upc",
        "aug_acc",
        "base_upa",
        "base_upc",
        "base_acc",
        "aug_win_pct",
        "base_win_pct",
        "tie_pct",
        "both_bad_pct",
    ];

    fn cells(r: &ReportRow) -> [String; 12] {
        [
            r.label.clone(),
            r.sessions.to_string(),
            format!("{:.3}", r.augmented.mean_upa),
            format!("{:.3}", r.augmented.mean_upc),
            format!("{:.3}", r.augmented.accuracy),
            format!("{:.3}", r.baseline.mean_upa),
            format!("{:.3}", r.baseline.mean_upc),
            format!("{:.3}", r.baseline.accuracy),
            format!("{:.1}", r.win_rates.augmented_wins),
            format!("{:.1}", r.win_rates.baseline_wins),
            format!("{:.1}", r.win_rates.tie),
            format!("{:.1}", r.win_rates.both_bad),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&Self::cells(r).join(","));
            out.push('\n');
        }
        out
    }

    /// Column-aligned table.
    pub fn to_text(&self) -> String {
        let body: Vec<[String; 12]> = self.rows.iter().map(Self::cells).collect();
        let widths: Vec<usize> = (0..12)
            .map(|i| {
                body.iter()
                    .map(|c| c[i].len())
                    .chain([Self::HEADER[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |cells: &[&str], out: &mut String| {
            for (i, c) in cells.iter().enumerate() {
                if i == 0 {
                    let _ = write!(out, "{c:<w$}", w = widths[i]);
                } else {
                    let _ = write!(out, "  {c:>w$}", w = widths[i]);
                }
            }
            out.push('\n');
        };
        line(&Self::HEADER, &mut out);
        for cells in &body {
            let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
            line(&refs, &mut out);
        }
        out
    }
}
