//! Input data model: event catalog, simultaneous event sets and the indexed
//! complex event sequence.
//!
//! Utilities are exact non-negative integers. Every event at a timestamp
//! carries its resolved utility `p(e) * q(e, t)`, or an explicit
//! per-occurrence override when the source gives no `(p, q)` factorization
//! (transaction-format input).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Utility in the smallest currency unit.
pub type Utility = u64;

/// Occurrence time point. Strictly positive; gaps between consecutive
/// timestamps are allowed.
pub type Timestamp = u64;

/// Dense event identifier.
///
/// Ids are assigned in ascending order of the event name, so comparing two
/// ids is the same as comparing the names under the catalog's total order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventId(u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(index: usize) -> Self {
        EventId(index as u32)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate catalog entry for event `{0}`")]
    DuplicateCatalogEntry(String),
    #[error("invalid event name `{0}`")]
    InvalidEventName(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("timestamps must be positive")]
    ZeroTimestamp,
    #[error("non-increasing timestamp: {got} does not follow {prev}")]
    NonIncreasingTimestamp { prev: Timestamp, got: Timestamp },
    #[error("quantity of `{0}` must be at least 1")]
    ZeroQuantity(String),
    #[error("event `{0}` listed twice in one simultaneous event set")]
    DuplicateEvent(String),
    #[error("simultaneous event set at {0} is empty")]
    EmptySet(Timestamp),
    #[error("event set must not be empty")]
    EmptyEventSet,
    #[error("no occurrence of `{event}` at timestamp {timestamp}")]
    NoOccurrence { event: String, timestamp: Timestamp },
    #[error("unknown timestamp {0}")]
    UnknownTimestamp(Timestamp),
    #[error("occurrence embedding does not match the episode")]
    EmbeddingMismatch,
    #[error("utility overflow")]
    Overflow,
}

/// Event types and their external utilities `p(e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventCatalog {
    names: Vec<String>,
    external: Vec<Utility>,
    lookup: HashMap<String, EventId>,
}

impl EventCatalog {
    /// Builds a catalog from `(name, external utility)` pairs. Ids follow
    /// ascending lexicographic order of the names.
    pub fn new<I, S>(entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (S, Utility)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, Utility)> =
            entries.into_iter().map(|(n, p)| (n.into(), p)).collect();
        for (name, _) in &entries {
            if !is_valid_name(name) {
                return Err(ModelError::InvalidEventName(name.clone()));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ModelError::DuplicateCatalogEntry(pair[0].0.clone()));
            }
        }
        let lookup = entries
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.clone(), EventId::from_index(i)))
            .collect();
        let (names, external) = entries.into_iter().unzip();
        Ok(EventCatalog {
            names,
            external,
            lookup,
        })
    }

    pub fn empty() -> Self {
        EventCatalog {
            names: Vec::new(),
            external: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, id: EventId) -> &str {
        &self.names[id.index()]
    }

    pub fn external_utility(&self, id: EventId) -> Utility {
        self.external[id.index()]
    }

    /// All ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.names.len()).map(EventId::from_index)
    }

    pub fn contains(&self, id: EventId) -> bool {
        id.index() < self.names.len()
    }
}

/// Event names are non-empty and free of whitespace and of the characters
/// used by the text formats.
pub(crate) fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '|' | ':' | '=' | '(' | ')' | '#' | '@'))
}

/// One event inside a simultaneous event set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Item {
    pub event: EventId,
    pub quantity: u32,
    /// Resolved utility `u(e, t)`.
    pub utility: Utility,
}

/// The events sharing one timestamp, sorted by event id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimultaneousEventSet {
    timestamp: Timestamp,
    items: Vec<Item>,
}

impl SimultaneousEventSet {
    pub fn timestamp(&self) -> Timestamp {
        self.timestamp
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn get(&self, event: EventId) -> Option<&Item> {
        self.items
            .binary_search_by(|it| it.event.cmp(&event))
            .ok()
            .map(|i| &self.items[i])
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        self.items.iter().map(|it| it.event)
    }
}

/// How the remaining utility of an event set at a timestamp is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuMode {
    /// Utilities of the events ordered strictly after the set's last event.
    #[default]
    Strict,
    /// `tu(t)` minus the utility of the set itself.
    Compat,
}

/// One entry of the per-event occurrence index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventOccurrence {
    /// Index of the simultaneous event set inside the sequence.
    pub position: u32,
    pub timestamp: Timestamp,
    pub utility: Utility,
}

/// Timestamp-ordered simultaneous event sets plus derived indexes.
///
/// Immutable once built.
#[derive(Clone, Debug)]
pub struct ComplexEventSequence {
    catalog: EventCatalog,
    sets: Vec<SimultaneousEventSet>,
    timestamps: Vec<Timestamp>,
    tu: Vec<Utility>,
    /// `tu_prefix[i]` is the sum of `tu` over positions `< i`.
    tu_prefix: Vec<Utility>,
    /// Per set, prefix sums of item utilities in event order.
    item_prefix: Vec<Vec<Utility>>,
    occurrences: Vec<Vec<EventOccurrence>>,
}

impl PartialEq for ComplexEventSequence {
    fn eq(&self, other: &Self) -> bool {
        self.catalog == other.catalog && self.sets == other.sets
    }
}

impl Eq for ComplexEventSequence {}

impl ComplexEventSequence {
    pub fn catalog(&self) -> &EventCatalog {
        &self.catalog
    }

    pub fn sets(&self) -> &[SimultaneousEventSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    /// Grand total utility `TU`.
    pub fn total_utility(&self) -> Utility {
        *self.tu_prefix.last().unwrap_or(&0)
    }

    /// Per-timestamp totals `tu(T_i)` in sequence order.
    pub fn timestamp_utilities(&self) -> &[Utility] {
        &self.tu
    }

    /// Occurrence index for one event, in timestamp order.
    pub fn occurrences(&self, event: EventId) -> &[EventOccurrence] {
        &self.occurrences[event.index()]
    }

    pub fn position_of(&self, timestamp: Timestamp) -> Option<usize> {
        self.timestamps.binary_search(&timestamp).ok()
    }

    fn set_at(&self, timestamp: Timestamp) -> Result<(usize, &SimultaneousEventSet), ModelError> {
        let pos = self
            .position_of(timestamp)
            .ok_or(ModelError::UnknownTimestamp(timestamp))?;
        Ok((pos, &self.sets[pos]))
    }

    /// `u(e, t) = p(e) * q(e, t)`.
    pub fn event_utility(
        &self,
        event: EventId,
        timestamp: Timestamp,
    ) -> Result<Utility, ModelError> {
        let (_, set) = self
            .set_at(timestamp)
            .map_err(|_| self.no_occurrence(event, timestamp))?;
        set.get(event)
            .map(|it| it.utility)
            .ok_or_else(|| self.no_occurrence(event, timestamp))
    }

    /// Sum of `u(e, t)` over the events of `events`.
    pub fn set_utility(
        &self,
        events: &[EventId],
        timestamp: Timestamp,
    ) -> Result<Utility, ModelError> {
        events
            .iter()
            .map(|&e| self.event_utility(e, timestamp))
            .sum()
    }

    /// `tu(t)`.
    pub fn timestamp_utility(&self, timestamp: Timestamp) -> Result<Utility, ModelError> {
        self.set_at(timestamp).map(|(pos, _)| self.tu[pos])
    }

    /// Remaining utility of a non-empty event set at `timestamp`.
    pub fn remaining_utility(
        &self,
        events: &[EventId],
        timestamp: Timestamp,
        mode: RuMode,
    ) -> Result<Utility, ModelError> {
        let own = self.set_utility(events, timestamp)?;
        let last = *events.iter().max().ok_or(ModelError::EmptyEventSet)?;
        let pos = self
            .position_of(timestamp)
            .expect("timestamp checked by set_utility");
        Ok(match mode {
            RuMode::Strict => self.utility_after(pos, last),
            RuMode::Compat => self.tu[pos] - own,
        })
    }

    fn no_occurrence(&self, event: EventId, timestamp: Timestamp) -> ModelError {
        let event = if self.catalog.contains(event) {
            self.catalog.name(event).to_string()
        } else {
            format!("#{}", event.index())
        };
        ModelError::NoOccurrence { event, timestamp }
    }

    // Position-level accessors used by the mining code.

    pub(crate) fn timestamp_at(&self, pos: usize) -> Timestamp {
        self.timestamps[pos]
    }

    pub(crate) fn tu_at(&self, pos: usize) -> Utility {
        self.tu[pos]
    }

    /// Sum of `tu` over positions in `from..=to`; zero when the range is empty.
    pub(crate) fn tu_range(&self, from: usize, to: usize) -> Utility {
        if from > to {
            return 0;
        }
        self.tu_prefix[to + 1] - self.tu_prefix[from]
    }

    /// Utility of the events at `pos` ordered strictly after `event`.
    pub(crate) fn utility_after(&self, pos: usize, event: EventId) -> Utility {
        let items = &self.sets[pos].items;
        let cut = items.partition_point(|it| it.event <= event);
        let prefix = &self.item_prefix[pos];
        prefix[items.len()] - prefix[cut]
    }

    /// Last position whose timestamp is `<= limit`, if any.
    pub(crate) fn last_position_at_or_before(&self, limit: Timestamp) -> Option<usize> {
        self.timestamps
            .partition_point(|&t| t <= limit)
            .checked_sub(1)
    }

    pub(crate) fn items_at(&self, pos: usize) -> &[Item] {
        &self.sets[pos].items
    }
}

/// Incremental constructor for [`ComplexEventSequence`].
#[derive(Clone, Debug)]
pub struct SequenceBuilder {
    catalog: EventCatalog,
    sets: Vec<SimultaneousEventSet>,
}

impl SequenceBuilder {
    pub fn new(catalog: EventCatalog) -> Self {
        SequenceBuilder {
            catalog,
            sets: Vec::new(),
        }
    }

    pub fn catalog(&self) -> &EventCatalog {
        &self.catalog
    }

    /// Appends a set whose utilities are `p(e) * q`.
    pub fn push_set<I>(&mut self, timestamp: Timestamp, items: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = (EventId, u32)>,
    {
        let catalog = &self.catalog;
        let mut resolved = Vec::new();
        for (event, quantity) in items {
            if !catalog.contains(event) {
                return Err(ModelError::UnknownEvent(format!("#{}", event.index())));
            }
            let utility = catalog
                .external_utility(event)
                .checked_mul(Utility::from(quantity))
                .ok_or(ModelError::Overflow)?;
            resolved.push(Item {
                event,
                quantity,
                utility,
            });
        }
        self.push_resolved(timestamp, resolved)
    }

    /// Appends a set with explicit per-occurrence utilities.
    pub fn push_set_with_utilities<I>(
        &mut self,
        timestamp: Timestamp,
        items: I,
    ) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = (EventId, u32, Utility)>,
    {
        let mut resolved = Vec::new();
        for (event, quantity, utility) in items {
            if !self.catalog.contains(event) {
                return Err(ModelError::UnknownEvent(format!("#{}", event.index())));
            }
            resolved.push(Item {
                event,
                quantity,
                utility,
            });
        }
        self.push_resolved(timestamp, resolved)
    }

    fn push_resolved(
        &mut self,
        timestamp: Timestamp,
        mut items: Vec<Item>,
    ) -> Result<(), ModelError> {
        if timestamp == 0 {
            return Err(ModelError::ZeroTimestamp);
        }
        if let Some(prev) = self.sets.last() {
            if timestamp <= prev.timestamp {
                return Err(ModelError::NonIncreasingTimestamp {
                    prev: prev.timestamp,
                    got: timestamp,
                });
            }
        }
        if items.is_empty() {
            return Err(ModelError::EmptySet(timestamp));
        }
        items.sort_by_key(|it| it.event);
        for it in &items {
            if it.quantity == 0 {
                return Err(ModelError::ZeroQuantity(
                    self.catalog.name(it.event).to_string(),
                ));
            }
        }
        for pair in items.windows(2) {
            if pair[0].event == pair[1].event {
                return Err(ModelError::DuplicateEvent(
                    self.catalog.name(pair[0].event).to_string(),
                ));
            }
        }
        self.sets.push(SimultaneousEventSet { timestamp, items });
        Ok(())
    }

    pub fn build(self) -> Result<ComplexEventSequence, ModelError> {
        let SequenceBuilder { catalog, sets } = self;
        let mut timestamps = Vec::with_capacity(sets.len());
        let mut tu = Vec::with_capacity(sets.len());
        let mut tu_prefix = Vec::with_capacity(sets.len() + 1);
        let mut item_prefix = Vec::with_capacity(sets.len());
        let mut occurrences = vec![Vec::new(); catalog.len()];
        let mut running: Utility = 0;
        tu_prefix.push(0);
        for (pos, set) in sets.iter().enumerate() {
            let mut prefix = Vec::with_capacity(set.items.len() + 1);
            let mut acc: Utility = 0;
            prefix.push(0);
            for it in &set.items {
                acc = acc.checked_add(it.utility).ok_or(ModelError::Overflow)?;
                prefix.push(acc);
                occurrences[it.event.index()].push(EventOccurrence {
                    position: pos as u32,
                    timestamp: set.timestamp,
                    utility: it.utility,
                });
            }
            running = running.checked_add(acc).ok_or(ModelError::Overflow)?;
            timestamps.push(set.timestamp);
            tu.push(acc);
            tu_prefix.push(running);
            item_prefix.push(prefix);
        }
        Ok(ComplexEventSequence {
            catalog,
            sets,
            timestamps,
            tu,
            tu_prefix,
            item_prefix,
            occurrences,
        })
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
