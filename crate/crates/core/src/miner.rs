//! Sliding-window mining of composite contexts and knowledge.
//!
//! The timeline is cut into overlapping windows anchored at the earliest
//! capture date. Each window is mined independently; the per-window
//! findings are then folded into one context list and one knowledge list,
//! merging entries whose names (or statements) embed close together.
//! Finally, explicit mentions are attached to the contexts they name.

use std::collections::{BTreeSet, HashMap};

use chrono::{Duration, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{info, warn};

use crate::config::EngineConfig;
use crate::embedding::Vector;
use crate::gateway::payload::{window_key, MemoryView, WindowPayload, WindowSpan};
use crate::gateway::schema::{
    CompositeContextsResponse, ContextCandidate, KnowledgeResponse,
};
use crate::gateway::{prompts, ChatRequest, Gateway, GatewayError, SchemaId};
use crate::model::{CapturedMemory, CompositeContext, ContextId, KnowledgeEntry, KnowledgeId, MemoryId};

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("no memories to mine")]
    EmptyCorpus,
    #[error("step_days must be in 1..=window_days (got step {step}, window {window})")]
    BadWindow { window: u32, step: u32 },
    #[error("window {window}: {source}")]
    Gateway { window: usize, source: GatewayError },
    #[error("embedding {what}: {source}")]
    Embedding { what: String, source: GatewayError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub index: usize,
    pub start_date: NaiveDate,
    /// Exclusive.
    pub end_date: NaiveDate,
    /// Ids captured in `[start_date, end_date)`, in time order.
    pub memory_ids: Vec<MemoryId>,
}

impl Window {
    pub fn covers(&self, date: NaiveDate) -> bool {
        self.start_date <= date && date < self.end_date
    }
}

/// Cuts the timeline into windows of `window_days` starting every
/// `step_days` from the earliest capture date, until a window starts after
/// the last capture date. Duplicates are skipped.
pub fn segment_timeline(
    memories: &[&CapturedMemory],
    window_days: u32,
    step_days: u32,
) -> Result<Vec<Window>, MinerError> {
    if step_days == 0 || step_days > window_days {
        return Err(MinerError::BadWindow {
            window: window_days,
            step: step_days,
        });
    }
    let mut live: Vec<&CapturedMemory> = memories.iter().copied().filter(|m| !m.is_duplicate()).collect();
    if live.is_empty() {
        return Err(MinerError::EmptyCorpus);
    }
    live.sort_by(|a, b| (a.capture_time(), &a.id).cmp(&(b.capture_time(), &b.id)));
    let anchor = live[0].capture_date();
    let last = live[live.len() - 1].capture_date();

    let mut windows = Vec::new();
    let mut start = anchor;
    while start <= last {
        let end = start + Duration::days(i64::from(window_days));
        let memory_ids = live
            .iter()
            .filter(|m| (start..end).contains(&m.capture_date()))
            .map(|m| m.id.clone())
            .collect();
        windows.push(Window {
            index: windows.len(),
            start_date: start,
            end_date: end,
            memory_ids,
        });
        start += Duration::days(i64::from(step_days));
    }
    Ok(windows)
}

/// A composite context while mining is in progress.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextDraft {
    pub event_name: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub location: Option<String>,
    pub memory_ids: BTreeSet<MemoryId>,
    pub mention_ids: BTreeSet<MemoryId>,
    pub importance: u8,
    pub name_vector: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeDraft {
    pub statement: String,
    pub memory_ids: BTreeSet<MemoryId>,
    pub statement_vector: Vector,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowFindings {
    pub contexts: Vec<ContextDraft>,
    pub knowledge: Vec<KnowledgeDraft>,
    /// Candidates rejected by validation.
    pub dropped: usize,
}

fn embed(gateway: &Gateway, text: &str) -> Result<Vector, MinerError> {
    gateway.embed_text(text).map_err(|source| MinerError::Embedding {
        what: format!("{text:?}"),
        source,
    })
}

/// Checks a context candidate against its window. Dates outside the
/// window (give or take a day) are clamped to it; everything else that is
/// wrong rejects the candidate.
fn validate_context(
    window: &Window,
    candidate: &ContextCandidate,
    members: &HashMap<&MemoryId, &CapturedMemory>,
) -> Result<(String, NaiveDate, NaiveDate, u8, BTreeSet<MemoryId>), String> {
    let name = candidate.event_name.trim();
    if name.is_empty() {
        return Err("empty event name".into());
    }
    let importance = u8::try_from(candidate.importance)
        .ok()
        .filter(|i| (1..=3).contains(i))
        .ok_or_else(|| format!("importance {} outside 1..=3", candidate.importance))?;
    if candidate.memory_ids.is_empty() {
        return Err("no memory ids".into());
    }
    let mut ids = BTreeSet::new();
    for id in &candidate.memory_ids {
        let id = MemoryId::new(id.trim());
        if !members.contains_key(&id) {
            return Err(format!("memory {id} is not in the window"));
        }
        ids.insert(id);
    }
    let (mut start, mut end) = candidate.dates()?;
    if start > end {
        return Err(format!("start {start} after end {end}"));
    }
    let lo = window.start_date - Duration::days(1);
    let hi = window.end_date; // last day of the window plus one
    if start < lo || end > hi {
        warn!(window = window.index, event = name, %start, %end, "clamping context dates to window");
        start = start.clamp(lo, hi);
        end = end.clamp(lo, hi);
    }
    for id in &ids {
        let d = members[id].capture_date();
        if d < start - Duration::days(1) || d > end + Duration::days(1) {
            return Err(format!("memory {id} captured on {d}, outside {start}..{end}"));
        }
    }
    Ok((name.to_string(), start, end, importance, ids))
}

/// Asks for the window's composite contexts, then for knowledge given
/// those contexts. Invalid candidates are dropped and logged.
pub fn mine_window(
    gateway: &Gateway,
    window: &Window,
    memories: &HashMap<&MemoryId, &CapturedMemory>,
) -> Result<WindowFindings, MinerError> {
    let members: HashMap<&MemoryId, &CapturedMemory> = window
        .memory_ids
        .iter()
        .filter_map(|id| memories.get(id).map(|m| (id, *m)))
        .collect();
    let mut findings = WindowFindings::default();
    if members.is_empty() {
        return Ok(findings);
    }
    let wrap = |source| MinerError::Gateway {
        window: window.index,
        source,
    };
    let mut payload = WindowPayload {
        window: WindowSpan {
            index: window.index,
            start_date: window.start_date,
            end_date: window.end_date,
        },
        memories: window
            .memory_ids
            .iter()
            .filter_map(|id| members.get(id))
            .map(|m| MemoryView::from(*m))
            .collect(),
        composite_contexts: None,
    };
    let key = window_key(window.memory_ids.iter().map(MemoryId::as_str));

    let request = ChatRequest::new(
        SchemaId::CompositeContexts,
        prompts::COMPOSITE_CONTEXTS,
        &payload,
        key.clone(),
    );
    let found: CompositeContextsResponse = gateway.chat(&request).map_err(wrap)?;
    let mut accepted = Vec::new();
    for candidate in found.composite_context {
        match validate_context(window, &candidate, &members) {
            Ok((event_name, start_date, end_date, importance, memory_ids)) => {
                findings.contexts.push(ContextDraft {
                    name_vector: embed(gateway, &event_name)?,
                    event_name,
                    start_date,
                    end_date,
                    location: candidate
                        .location
                        .as_deref()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(str::to_string),
                    memory_ids,
                    mention_ids: BTreeSet::new(),
                    importance,
                });
                accepted.push(candidate);
            }
            Err(reason) => {
                warn!(window = window.index, event = %candidate.event_name, %reason, "dropping context candidate");
                findings.dropped += 1;
            }
        }
    }

    payload.composite_contexts = Some(accepted);
    let request = ChatRequest::new(SchemaId::Knowledge, prompts::KNOWLEDGE, &payload, key);
    let inferred: KnowledgeResponse = gateway.chat(&request).map_err(wrap)?;
    for candidate in inferred.knowledge {
        let statement = candidate.knowledge.trim();
        let ids: Option<BTreeSet<MemoryId>> = candidate
            .memory_ids
            .iter()
            .map(|id| MemoryId::new(id.trim()))
            .map(|id| members.contains_key(&id).then_some(id))
            .collect();
        let reason = if !KnowledgeEntry::is_self_contained(statement) {
            Some("statement is empty or refers to a specific item")
        } else if ids.is_none() {
            Some("cites a memory outside the window")
        } else {
            None
        };
        if let Some(reason) = reason {
            warn!(window = window.index, statement, reason, "dropping knowledge candidate");
            findings.dropped += 1;
            continue;
        }
        findings.knowledge.push(KnowledgeDraft {
            statement: statement.to_string(),
            memory_ids: ids.unwrap_or_default(),
            statement_vector: embed(gateway, statement)?,
        });
    }
    Ok(findings)
}

fn near_in_time(a: &ContextDraft, b: &ContextDraft) -> bool {
    let one = Duration::days(1);
    a.start_date <= b.end_date + one && b.start_date <= a.end_date + one
}

fn same_event(a: &ContextDraft, b: &ContextDraft, threshold: f64) -> bool {
    near_in_time(a, b) && a.name_vector.cosine(&b.name_vector) >= threshold
}

/// Folds `other` into `into`; `into` was seen first and keeps its name.
fn absorb(into: &mut ContextDraft, other: ContextDraft) {
    into.start_date = into.start_date.min(other.start_date);
    into.end_date = into.end_date.max(other.end_date);
    into.importance = into.importance.max(other.importance);
    if into.location.is_none() {
        into.location = other.location;
    }
    into.memory_ids.extend(other.memory_ids);
    into.mention_ids.extend(other.mention_ids);
}

/// Merges each candidate into the first accumulated context naming the
/// same event (name cosine at least `threshold`, date ranges overlapping
/// or a day apart), else appends it. A merge that widens a context can
/// make it meet another accumulated one, so merging repeats until stable.
pub fn merge_contexts(accumulated: &mut Vec<ContextDraft>, candidates: Vec<ContextDraft>, threshold: f64) {
    for candidate in candidates {
        let Some(mut i) = accumulated
            .iter()
            .position(|a| same_event(a, &candidate, threshold))
        else {
            accumulated.push(candidate);
            continue;
        };
        absorb(&mut accumulated[i], candidate);
        while let Some(j) = (0..accumulated.len())
            .find(|&j| j != i && same_event(&accumulated[i], &accumulated[j], threshold))
        {
            let (keep, gone) = if j < i { (j, i) } else { (i, j) };
            let other = accumulated.remove(gone);
            absorb(&mut accumulated[keep], other);
            i = keep;
        }
    }
}

/// Merges each candidate into the first accumulated statement embedding at
/// least `threshold` close to it, keeping the longer wording.
pub fn merge_knowledge(accumulated: &mut Vec<KnowledgeDraft>, candidates: Vec<KnowledgeDraft>, threshold: f64) {
    for candidate in candidates {
        match accumulated
            .iter_mut()
            .find(|a| a.statement_vector.cosine(&candidate.statement_vector) >= threshold)
        {
            Some(a) => {
                a.memory_ids.extend(candidate.memory_ids);
                if candidate.statement.chars().count() > a.statement.chars().count() {
                    a.statement = candidate.statement;
                    a.statement_vector = candidate.statement_vector;
                }
            }
            None => accumulated.push(candidate),
        }
    }
}

/// Attaches every explicit mention to the best-matching context by name
/// cosine (at least `threshold`), regardless of dates: a flyer announces
/// an event weeks ahead. Unmatched mentions become new one-day contexts.
pub fn incorporate_mentions(
    gateway: &Gateway,
    contexts: &mut Vec<ContextDraft>,
    memories: &[&CapturedMemory],
    threshold: f64,
) -> Result<(), MinerError> {
    let mut ordered: Vec<&CapturedMemory> = memories.iter().copied().filter(|m| !m.is_duplicate()).collect();
    ordered.sort_by(|a, b| (a.capture_time(), &a.id).cmp(&(b.capture_time(), &b.id)));
    for memory in ordered {
        for phrase in &memory.mentioned_contexts {
            let v = embed(gateway, phrase)?;
            let best = contexts
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.name_vector.cosine(&v)))
                .filter(|(_, s)| *s >= threshold)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            match best {
                Some((i, _)) => {
                    let c = &mut contexts[i];
                    if c.memory_ids.insert(memory.id.clone()) {
                        c.mention_ids.insert(memory.id.clone());
                    }
                }
                None => {
                    let date = memory.capture_date();
                    contexts.push(ContextDraft {
                        event_name: phrase.clone(),
                        start_date: date,
                        end_date: date,
                        location: None,
                        memory_ids: BTreeSet::from([memory.id.clone()]),
                        mention_ids: BTreeSet::from([memory.id.clone()]),
                        importance: 1,
                        name_vector: v,
                    });
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowOrder {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningOutcome {
    pub contexts: Vec<(CompositeContext, Vector)>,
    pub knowledge: Vec<(KnowledgeEntry, Vector)>,
    pub windows: usize,
    pub dropped: usize,
}

/// Runs the whole mining stage over structured, non-duplicate memories.
/// Windows are mined in parallel and folded in `order`. Output contexts
/// are numbered `ctx-001`... by (start date, name), knowledge `kn-001`...
/// by statement.
pub fn mine(
    gateway: &Gateway,
    memories: &[&CapturedMemory],
    config: &EngineConfig,
    order: WindowOrder,
) -> Result<MiningOutcome, MinerError> {
    let live: Vec<&CapturedMemory> = memories.iter().copied().filter(|m| !m.is_duplicate()).collect();
    let windows = segment_timeline(&live, config.window_days, config.step_days)?;
    let by_id: HashMap<&MemoryId, &CapturedMemory> = live.iter().map(|m| (&m.id, *m)).collect();

    let mut findings: Vec<WindowFindings> = windows
        .par_iter()
        .map(|w| mine_window(gateway, w, &by_id))
        .collect::<Result<_, _>>()?;
    if order == WindowOrder::Reverse {
        findings.reverse();
    }

    let threshold = config.name_merge_threshold;
    let mut contexts = Vec::new();
    let mut knowledge = Vec::new();
    let mut dropped = 0;
    for f in findings {
        dropped += f.dropped;
        merge_contexts(&mut contexts, f.contexts, threshold);
        merge_knowledge(&mut knowledge, f.knowledge, threshold);
    }
    incorporate_mentions(gateway, &mut contexts, &live, threshold)?;
    info!(
        windows = windows.len(),
        contexts = contexts.len(),
        knowledge = knowledge.len(),
        dropped,
        "mined timeline"
    );

    let time_order = |ids: BTreeSet<MemoryId>| -> Vec<MemoryId> {
        let mut v: Vec<MemoryId> = ids.into_iter().collect();
        v.sort_by_key(|id| (by_id.get(id).map(|m| m.capture_time()), id.clone()));
        v
    };
    contexts.sort_by(|a, b| {
        (a.start_date, &a.event_name, a.end_date).cmp(&(b.start_date, &b.event_name, b.end_date))
    });
    let contexts = contexts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let mention_ids: Vec<MemoryId> = time_order(d.mention_ids);
            (
                CompositeContext {
                    id: ContextId::new(format!("ctx-{:03}", i + 1)),
                    is_multi_days: d.start_date < d.end_date,
                    event_name: d.event_name,
                    start_date: d.start_date,
                    end_date: d.end_date,
                    location: d.location,
                    memory_ids: time_order(d.memory_ids),
                    mention_ids,
                    importance: d.importance,
                },
                d.name_vector,
            )
        })
        .collect();
    knowledge.sort_by(|a, b| a.statement.cmp(&b.statement));
    let knowledge = knowledge
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            (
                KnowledgeEntry {
                    id: KnowledgeId::new(format!("kn-{:03}", i + 1)),
                    statement: d.statement,
                    memory_ids: time_order(d.memory_ids),
                },
                d.statement_vector,
            )
        })
        .collect();
    Ok(MiningOutcome {
        contexts,
        knowledge,
        windows: windows.len(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_text_hashed;
    use crate::gateway::scripted::ScriptedBackend;
    use crate::model::{validate_memory, MediaKind, SidecarRecord};
    use std::collections::HashSet;
    use std::sync::Arc;

    fn day(n: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 4, 1).unwrap() + Duration::days(n)
    }

    fn mem(id: &str, d: i64) -> CapturedMemory {
        let raw = SidecarRecord {
            id: id.into(),
            kind: MediaKind::Photo,
            media_path: format!("{id}.png"),
            capture_time: Some(format!("{}T12:00:00Z", day(d))),
            lat: None,
            lon: None,
            address: None,
            caption: Some(format!("photo {id}")),
            visible_text: None,
            transcript: None,
        };
        validate_memory(&raw, &mut HashSet::new()).unwrap()
    }

    fn draft(name: &str, start: i64, end: i64, ids: &[&str]) -> ContextDraft {
        ContextDraft {
            event_name: name.into(),
            start_date: day(start),
            end_date: day(end),
            location: None,
            memory_ids: ids.iter().map(|i| MemoryId::from(*i)).collect(),
            mention_ids: BTreeSet::new(),
            importance: 1,
            name_vector: embed_text_hashed(name, 256),
        }
    }

    #[test]
    fn ten_days_make_three_windows() {
        let ms: Vec<CapturedMemory> = (0..10).map(|d| mem(&format!("d{d}"), d)).collect();
        let refs: Vec<&CapturedMemory> = ms.iter().collect();
        let ws = segment_timeline(&refs, 7, 4).unwrap();
        let spans: Vec<_> = ws.iter().map(|w| (w.start_date, w.end_date)).collect();
        assert_eq!(spans, [(day(0), day(7)), (day(4), day(11)), (day(8), day(15))]);
        let holding: Vec<usize> = ws
            .iter()
            .filter(|w| w.memory_ids.contains(&"d5".into()))
            .map(|w| w.index)
            .collect();
        assert_eq!(holding, [0, 1]);
    }

    #[test]
    fn single_memory_and_disjoint_tiling() {
        let one = [mem("only", 3)];
        let refs: Vec<&CapturedMemory> = one.iter().collect();
        let ws = segment_timeline(&refs, 7, 4).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!((ws[0].start_date, ws[0].end_date), (day(3), day(10)));
        let ms: Vec<CapturedMemory> = (0..20).map(|d| mem(&format!("d{d}"), d)).collect();
        let refs: Vec<&CapturedMemory> = ms.iter().collect();
        let ws = segment_timeline(&refs, 7, 7).unwrap();
        assert!(ws.windows(2).all(|p| p[0].end_date == p[1].start_date));
        assert_eq!(ws.iter().map(|w| w.memory_ids.len()).sum::<usize>(), 20);
        assert!(matches!(segment_timeline(&[], 7, 4), Err(MinerError::EmptyCorpus)));
        assert!(matches!(segment_timeline(&refs, 4, 7), Err(MinerError::BadWindow { .. })));
    }

    #[test]
    fn overlapping_segments_of_one_trip_merge() {
        let mut acc = vec![draft("Trip to Hawaii", 10, 16, &["a", "b"])];
        merge_contexts(&mut acc, vec![draft("Trip to Hawaii", 14, 20, &["b", "c"])], 0.8);
        assert_eq!(acc.len(), 1);
        assert_eq!((acc[0].start_date, acc[0].end_date), (day(10), day(20)));
        assert_eq!(acc[0].memory_ids.len(), 3);
    }

    #[test]
    fn different_names_stay_apart() {
        let mut acc = vec![draft("Trip to Hawaii", 10, 16, &["a"])];
        merge_contexts(&mut acc, vec![draft("Dentist appointment", 12, 12, &["d"])], 0.8);
        assert_eq!(acc.len(), 2);
    }

    #[test]
    fn same_name_a_year_apart_stays_apart() {
        let mut acc = vec![draft("Birthday party", 0, 0, &["a"])];
        merge_contexts(&mut acc, vec![draft("Birthday party", 365, 365, &["b"])], 0.8);
        assert_eq!(acc.len(), 2);
    }

    #[test]
    fn bridging_candidate_joins_two_contexts() {
        let mut acc = vec![
            draft("Trip to Hawaii", 0, 2, &["a"]),
            draft("Trip to Hawaii", 6, 8, &["c"]),
        ];
        merge_contexts(&mut acc, vec![draft("Trip to Hawaii", 3, 5, &["b"])], 0.8);
        assert_eq!(acc.len(), 1);
        assert_eq!((acc[0].start_date, acc[0].end_date), (day(0), day(8)));
    }

    #[test]
    fn knowledge_keeps_longer_statement() {
        let k = |s: &str, id: &str| KnowledgeDraft {
            statement: s.into(),
            memory_ids: BTreeSet::from([MemoryId::from(id)]),
            statement_vector: embed_text_hashed(s, 256),
        };
        let mut acc = vec![k("The user goes to the gym.", "a")];
        merge_knowledge(
            &mut acc,
            vec![
                k("The user goes to the gym often.", "b"),
                k("The user likes boba tea.", "c"),
            ],
            0.8,
        );
        assert_eq!(acc.len(), 2);
        assert_eq!(acc[0].statement, "The user goes to the gym often.");
        assert_eq!(acc[0].memory_ids.len(), 2);
    }

    #[test]
    fn mentions_attach_or_create() {
        let gw = Gateway::new(Arc::new(ScriptedBackend::new(256)), 256);
        let mut flyer = mem("flyer", 0);
        flyer.mentioned_contexts = vec!["CHI 2024".into()];
        let mut poster = mem("poster", 2);
        poster.mentioned_contexts = vec!["Spring Gala".into()];
        let mut ticket = mem("ticket", 3);
        ticket.mentioned_contexts = vec!["spring gala".into()];
        let mut contexts = vec![draft("CHI 2024", 40, 45, &["talk"])];
        incorporate_mentions(&gw, &mut contexts, &[&flyer, &poster, &ticket], 0.8).unwrap();
        assert_eq!(contexts.len(), 2);
        assert!(contexts[0].memory_ids.contains(&"flyer".into()));
        assert!(contexts[0].mention_ids.contains(&"flyer".into()));
        assert_eq!(contexts[0].start_date, day(40));
        let gala = &contexts[1];
        assert_eq!((gala.start_date, gala.end_date, gala.importance), (day(2), day(2), 1));
        assert_eq!(gala.memory_ids.len(), 2);
    }

    #[test]
    fn out_of_window_dates_are_clamped() {
        let ms = [mem("a", 5), mem("b", 6)];
        let members: HashMap<&MemoryId, &CapturedMemory> = ms.iter().map(|m| (&m.id, m)).collect();
        let window = Window {
            index: 1,
            start_date: day(4),
            end_date: day(11),
            memory_ids: vec!["a".into(), "b".into()],
        };
        let cand = |start: NaiveDate, end: NaiveDate, ids: &[&str], importance| ContextCandidate {
            event_name: "Visit".into(),
            memory_ids: ids.iter().map(|s| s.to_string()).collect(),
            start_date: start.to_string(),
            end_date: end.to_string(),
            location: None,
            is_multi_days: true,
            importance,
        };
        let (_, s, e, _, _) = validate_context(&window, &cand(day(-20), day(6), &["a"], 2), &members).unwrap();
        assert_eq!((s, e), (day(3), day(6)));
        assert!(validate_context(&window, &cand(day(5), day(6), &["zzz"], 2), &members).is_err());
        assert!(validate_context(&window, &cand(day(5), day(6), &["a"], 4), &members).is_err());
        assert!(validate_context(&window, &cand(day(6), day(5), &["a"], 1), &members).is_err());
    }
}
