//! Minimal occurrences under a maximum-time-duration constraint, episode
//! utilities and the episode-weighted utilization bounds.
//!
//! The indexed procedure works on event-set position lists: for every end
//! position of the last set it walks backwards to the latest feasible start,
//! drops windows that violate the duration constraint, and keeps only the
//! earliest end per start (any later end with the same start strictly
//! contains it). Each retained window is priced at its leftmost embedding:
//! interior sets at the earliest positions after the start.

use serde::{Deserialize, Serialize};

use crate::episode::Episode;
use crate::event::{ComplexEventSequence, EventId, ModelError, RuMode, Timestamp, Utility};

/// How the maximum time duration is compared against `T_e - T_s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MtdSemantics {
    /// `T_e - T_s <= MTD`; bound windows end at `T_s + MTD`.
    #[default]
    Inclusive,
    /// `T_e - T_s < MTD`; bound windows end at `T_s + MTD - 1`.
    Exclusive,
}

/// Maximum time duration constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mtd {
    pub duration: u64,
    pub semantics: MtdSemantics,
}

impl Mtd {
    pub fn inclusive(duration: u64) -> Self {
        Mtd {
            duration,
            semantics: MtdSemantics::Inclusive,
        }
    }

    pub fn exclusive(duration: u64) -> Self {
        Mtd {
            duration,
            semantics: MtdSemantics::Exclusive,
        }
    }

    /// Whether a window spanning `span` time units is admitted.
    pub fn admits(&self, span: u64) -> bool {
        match self.semantics {
            MtdSemantics::Inclusive => span <= self.duration,
            MtdSemantics::Exclusive => span < self.duration,
        }
    }

    /// Last timestamp an occurrence starting at `start` may reach, or `None`
    /// when no window is admitted at all.
    pub fn window_end(&self, start: Timestamp) -> Option<Timestamp> {
        match self.semantics {
            MtdSemantics::Inclusive => Some(start.saturating_add(self.duration)),
            MtdSemantics::Exclusive => self
                .duration
                .checked_sub(1)
                .map(|d| start.saturating_add(d)),
        }
    }
}

/// Which upper bound drives pruning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Utility plus remaining utility at `T_e` plus `tu` over `(T_e, end]`.
    #[default]
    Opt,
    /// Utility plus `tu` over `[T_e, end]`.
    Original,
}

/// An occurrence window with the embedding used to price it: one timestamp
/// per episode set, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub start: Timestamp,
    pub end: Timestamp,
    pub embedding: Vec<Timestamp>,
}

/// Minimal occurrences sorted by `(start, end)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoSet(Vec<Occurrence>);

impl MoSet {
    pub fn new(mut occurrences: Vec<Occurrence>) -> Self {
        occurrences.sort_by_key(|o| (o.start, o.end));
        MoSet(occurrences)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Occurrence> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Occurrence] {
        &self.0
    }

    pub fn intervals(&self) -> Vec<(Timestamp, Timestamp)> {
        self.0.iter().map(|o| (o.start, o.end)).collect()
    }
}

impl<'a> IntoIterator for &'a MoSet {
    type Item = &'a Occurrence;
    type IntoIter = std::slice::Iter<'a, Occurrence>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Positions where every event of a set occurs, with the set's utility there.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct SetIndex {
    pub positions: Vec<u32>,
    pub utilities: Vec<Utility>,
}

impl AsRef<SetIndex> for SetIndex {
    fn as_ref(&self) -> &SetIndex {
        self
    }
}

impl SetIndex {
    pub fn for_event(ces: &ComplexEventSequence, event: EventId) -> SetIndex {
        let occ = ces.occurrences(event);
        SetIndex {
            positions: occ.iter().map(|o| o.position).collect(),
            utilities: occ.iter().map(|o| o.utility).collect(),
        }
    }

    pub fn for_set(ces: &ComplexEventSequence, events: &[EventId]) -> SetIndex {
        let (&first, rest) = events.split_first().expect("event sets are non-empty");
        rest.iter()
            .fold(SetIndex::for_event(ces, first), |acc, &e| {
                acc.with_event(ces, e)
            })
    }

    /// Restricts to positions where `event` also occurs.
    pub fn with_event(&self, ces: &ComplexEventSequence, event: EventId) -> SetIndex {
        let occ = ces.occurrences(event);
        let mut out = SetIndex::default();
        let (mut i, mut j) = (0, 0);
        while i < self.positions.len() && j < occ.len() {
            let (p, q) = (self.positions[i], occ[j].position);
            if p < q {
                i += 1;
            } else if q < p {
                j += 1;
            } else {
                out.positions.push(p);
                out.utilities.push(self.utilities[i] + occ[j].utility);
                i += 1;
                j += 1;
            }
        }
        out
    }

    fn utility_at(&self, idx: usize) -> Utility {
        self.utilities[idx]
    }
}

/// One minimal occurrence in position space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct MoEntry {
    pub start: u32,
    pub end: u32,
    /// Utility at the leftmost embedding.
    pub utility: Utility,
    /// Utility of the last set at `end`.
    pub last_utility: Utility,
}

pub(crate) fn minimal_entries<S: AsRef<SetIndex>>(
    sets: &[S],
    ces: &ComplexEventSequence,
    mtd: Mtd,
) -> Vec<MoEntry> {
    let mut out = Vec::new();
    let Some(last) = sets.last().map(AsRef::as_ref) else {
        return out;
    };
    let k = sets.len();
    let mut last_kept_start: Option<u32> = None;
    'ends: for (end_idx, &end) in last.positions.iter().enumerate() {
        // Latest feasible start for this end.
        let mut cur = end;
        let mut first_idx = end_idx;
        for set in sets[..k - 1].iter().rev() {
            let set = set.as_ref();
            let n = set.positions.partition_point(|&p| p < cur);
            if n == 0 {
                continue 'ends;
            }
            first_idx = n - 1;
            cur = set.positions[first_idx];
        }
        let start = cur;
        let span = ces.timestamp_at(end as usize) - ces.timestamp_at(start as usize);
        if !mtd.admits(span) || last_kept_start == Some(start) {
            continue;
        }
        last_kept_start = Some(start);

        let last_utility = last.utility_at(end_idx);
        let utility = if k == 1 {
            last_utility
        } else {
            let mut utility = sets[0].as_ref().utility_at(first_idx);
            let mut cur = start;
            for set in &sets[1..k - 1] {
                let set = set.as_ref();
                let idx = set.positions.partition_point(|&p| p <= cur);
                cur = set.positions[idx];
                utility += set.utility_at(idx);
            }
            debug_assert!(cur < end);
            utility + last_utility
        };
        out.push(MoEntry {
            start,
            end,
            utility,
            last_utility,
        });
    }
    out
}

/// Leftmost embedding of a retained window, as timestamps.
fn embedding_of<S: AsRef<SetIndex>>(
    sets: &[S],
    entry: &MoEntry,
    ces: &ComplexEventSequence,
) -> Vec<Timestamp> {
    let k = sets.len();
    let mut emb = Vec::with_capacity(k);
    emb.push(ces.timestamp_at(entry.start as usize));
    if k > 1 {
        let mut cur = entry.start;
        for set in &sets[1..k - 1] {
            let set = set.as_ref();
            cur = set.positions[set.positions.partition_point(|&p| p <= cur)];
            emb.push(ces.timestamp_at(cur as usize));
        }
        emb.push(ces.timestamp_at(entry.end as usize));
    }
    emb
}

pub(crate) fn entries_to_moset<S: AsRef<SetIndex>>(
    sets: &[S],
    entries: &[MoEntry],
    ces: &ComplexEventSequence,
) -> MoSet {
    MoSet::new(
        entries
            .iter()
            .map(|e| Occurrence {
                start: ces.timestamp_at(e.start as usize),
                end: ces.timestamp_at(e.end as usize),
                embedding: embedding_of(sets, e, ces),
            })
            .collect(),
    )
}

/// Last position inside the bound window of an occurrence starting at
/// position `start`.
pub(crate) fn window_end_position(
    ces: &ComplexEventSequence,
    mtd: Mtd,
    start: u32,
) -> Option<usize> {
    let limit = mtd.window_end(ces.timestamp_at(start as usize))?;
    ces.last_position_at_or_before(limit)
}

/// Bound contribution of one minimal occurrence.
pub(crate) fn entry_bound(
    ces: &ComplexEventSequence,
    mtd: Mtd,
    last_event: EventId,
    entry: &MoEntry,
    kind: BoundKind,
    ru_mode: RuMode,
) -> Utility {
    let end = entry.end as usize;
    let wend = window_end_position(ces, mtd, entry.start)
        .unwrap_or(end)
        .max(end);
    match kind {
        BoundKind::Original => entry.utility + ces.tu_range(end, wend),
        BoundKind::Opt => {
            let ru = match ru_mode {
                RuMode::Strict => ces.utility_after(end, last_event),
                RuMode::Compat => ces.tu_at(end) - entry.last_utility,
            };
            entry.utility + ru + ces.tu_range(end + 1, wend)
        }
    }
}

pub(crate) fn set_indexes(episode: &Episode, ces: &ComplexEventSequence) -> Vec<SetIndex> {
    episode
        .sets()
        .iter()
        .map(|s| SetIndex::for_set(ces, s))
        .collect()
}

/// Minimal occurrences of `alpha` satisfying `mtd`, each with its leftmost
/// embedding.
pub fn minimal_occurrences(alpha: &Episode, ces: &ComplexEventSequence, mtd: Mtd) -> MoSet {
    let sets = set_indexes(alpha, ces);
    let entries = minimal_entries(&sets, ces, mtd);
    entries_to_moset(&sets, &entries, ces)
}

/// Utility of `alpha` at one occurrence: the sum of its set utilities at
/// the embedding's timestamps.
pub fn episode_utility_at(
    alpha: &Episode,
    mo: &Occurrence,
    ces: &ComplexEventSequence,
) -> Result<Utility, ModelError> {
    if mo.embedding.len() != alpha.size()
        || mo.embedding.first() != Some(&mo.start)
        || mo.embedding.last() != Some(&mo.end)
        || mo.embedding.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(ModelError::EmbeddingMismatch);
    }
    alpha
        .sets()
        .iter()
        .zip(&mo.embedding)
        .map(|(set, &t)| ces.set_utility(set, t))
        .sum()
}

/// Total utility over all minimal occurrences; zero when there are none.
pub fn episode_utility(alpha: &Episode, ces: &ComplexEventSequence, mtd: Mtd) -> Utility {
    let sets = set_indexes(alpha, ces);
    minimal_entries(&sets, ces, mtd)
        .iter()
        .map(|e| e.utility)
        .sum()
}

fn window_positions(
    mo: &Occurrence,
    ces: &ComplexEventSequence,
    mtd: Mtd,
) -> Result<(usize, usize), ModelError> {
    let end = ces
        .position_of(mo.end)
        .ok_or(ModelError::UnknownTimestamp(mo.end))?;
    let wend = mtd
        .window_end(mo.start)
        .and_then(|limit| ces.last_position_at_or_before(limit))
        .unwrap_or(end)
        .max(end);
    Ok((end, wend))
}

/// Original episode-weighted utilization of one occurrence: its utility plus
/// `tu` over `[T_e, window end]`, clamped to the sequence.
pub fn ewu(
    alpha: &Episode,
    mo: &Occurrence,
    ces: &ComplexEventSequence,
    mtd: Mtd,
) -> Result<Utility, ModelError> {
    let (end, wend) = window_positions(mo, ces, mtd)?;
    Ok(episode_utility_at(alpha, mo, ces)? + ces.tu_range(end, wend))
}

/// Optimized bound of one occurrence: utility, remaining utility of the last
/// set at `T_e`, and `tu` over `(T_e, window end]`.
pub fn ewu_opt(
    alpha: &Episode,
    mo: &Occurrence,
    ces: &ComplexEventSequence,
    mtd: Mtd,
    ru_mode: RuMode,
) -> Result<Utility, ModelError> {
    let (end, wend) = window_positions(mo, ces, mtd)?;
    let ru = ces.remaining_utility(alpha.last_set(), mo.end, ru_mode)?;
    Ok(episode_utility_at(alpha, mo, ces)? + ru + ces.tu_range(end + 1, wend))
}

pub fn ewu_total(alpha: &Episode, ces: &ComplexEventSequence, mtd: Mtd) -> Utility {
    bound_total(alpha, ces, mtd, BoundKind::Original, RuMode::Strict)
}

pub fn ewu_opt_total(
    alpha: &Episode,
    ces: &ComplexEventSequence,
    mtd: Mtd,
    ru_mode: RuMode,
) -> Utility {
    bound_total(alpha, ces, mtd, BoundKind::Opt, ru_mode)
}

/// Sum of the per-occurrence bound over the minimal occurrences.
pub fn bound_total(
    alpha: &Episode,
    ces: &ComplexEventSequence,
    mtd: Mtd,
    kind: BoundKind,
    ru_mode: RuMode,
) -> Utility {
    let sets = set_indexes(alpha, ces);
    minimal_entries(&sets, ces, mtd)
        .iter()
        .map(|e| entry_bound(ces, mtd, alpha.last_event(), e, kind, ru_mode))
        .sum()
}
