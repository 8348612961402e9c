//! Episodes: ordered lists of simultaneous event sets.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::event::{EventCatalog, EventId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpisodeError {
    #[error("an episode needs at least one event set")]
    NoSets,
    #[error("event sets must be non-empty and strictly ascending")]
    UnorderedSet,
    #[error("event {event} is not after the last event {last} of the final set")]
    OrderViolation { event: EventId, last: EventId },
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("malformed episode text: {0}")]
    Malformed(String),
}

/// A non-empty list of non-empty event sets, each strictly ascending.
///
/// Episodes are ordered canonically by size, then set by set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Episode {
    sets: Vec<Vec<EventId>>,
}

impl Episode {
    /// The 1-episode `<(e)>`.
    pub fn single(event: EventId) -> Self {
        Episode {
            sets: vec![vec![event]],
        }
    }

    pub fn from_sets(sets: Vec<Vec<EventId>>) -> Result<Self, EpisodeError> {
        if sets.is_empty() {
            return Err(EpisodeError::NoSets);
        }
        for set in &sets {
            if set.is_empty() || set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(EpisodeError::UnorderedSet);
            }
        }
        Ok(Episode { sets })
    }

    pub fn sets(&self) -> &[Vec<EventId>] {
        &self.sets
    }

    pub fn last_set(&self) -> &[EventId] {
        self.sets.last().expect("episodes are non-empty")
    }

    pub fn last_event(&self) -> EventId {
        *self.last_set().last().expect("sets are non-empty")
    }

    /// Number of event sets.
    pub fn size(&self) -> usize {
        self.sets.len()
    }

    /// Total number of events.
    pub fn length(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Appends `event` to the last set (I-concatenation).
    pub fn simult_concatenate(&self, event: EventId) -> Result<Episode, EpisodeError> {
        let last = self.last_event();
        if event <= last {
            return Err(EpisodeError::OrderViolation { event, last });
        }
        let mut sets = self.sets.clone();
        sets.last_mut().expect("non-empty").push(event);
        Ok(Episode { sets })
    }

    /// Appends the singleton set `{event}` (S-concatenation).
    pub fn serial_concatenate(&self, event: EventId) -> Episode {
        let mut sets = Vec::with_capacity(self.sets.len() + 1);
        sets.extend(self.sets.iter().cloned());
        sets.push(vec![event]);
        Episode { sets }
    }

    /// The episode with its last event removed; `None` for 1-episodes.
    pub fn parent(&self) -> Option<Episode> {
        if self.length() == 1 {
            return None;
        }
        let mut sets = self.sets.clone();
        let last = sets.last_mut().expect("non-empty");
        last.pop();
        if last.is_empty() {
            sets.pop();
        }
        Some(Episode { sets })
    }

    pub fn display<'a>(&'a self, catalog: &'a EventCatalog) -> EpisodeDisplay<'a> {
        EpisodeDisplay {
            episode: self,
            catalog,
        }
    }

    /// Parses `(B D)->(A C)`. Events inside a set may be listed in any
    /// order; they are sorted on the way in.
    pub fn parse(text: &str, catalog: &EventCatalog) -> Result<Episode, EpisodeError> {
        let mut sets = Vec::new();
        for part in text.split("->") {
            let part = part.trim();
            let inner = part
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| EpisodeError::Malformed(part.to_string()))?;
            let mut set = inner
                .split_whitespace()
                .map(|name| {
                    catalog
                        .id(name)
                        .ok_or_else(|| EpisodeError::UnknownEvent(name.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            set.sort();
            sets.push(set);
        }
        Episode::from_sets(sets)
    }
}

impl Ord for Episode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.sets.cmp(&other.sets))
    }
}

impl PartialOrd for Episode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct EpisodeDisplay<'a> {
    episode: &'a Episode,
    catalog: &'a EventCatalog,
}

impl fmt::Display for EpisodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, set) in self.episode.sets.iter().enumerate() {
            if i > 0 {
                f.write_str("->")?;
            }
            f.write_str("(")?;
            for (j, &e) in set.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(self.catalog.name(e))?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
