//! Threshold raising: initial witnesses, k-th value selection and the
//! rising top-k buffer.
//!
//! Initialization soundness. Every value that raises the floor must be
//! witnessed by a distinct episode whose true utility is at least that
//! value; otherwise the floor can overshoot the real k-th utility and the
//! search silently truncates its results. In `safe` mode:
//!
//! * a 1-episode witness carries its exact utility (each occurrence is its
//!   own point window, so this needs the duration constraint to admit a
//!   zero-length window),
//! * timestamps with identical full event sets are grouped, because they
//!   all witness the same episode `<(S)>`, whose utility is at least the
//!   group's summed `tu`,
//! * witnesses shared between the two lists are merged keeping the larger
//!   value, and
//! * fewer than `k` witnesses leave the floor at zero.
//!
//! The `unchecked` mode keeps one entry per timestamp, concatenates the lists and
//! falls back to the smallest value when fewer than `k` entries exist.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::episode::Episode;
use crate::event::{ComplexEventSequence, EventId, Utility};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitSoundness {
    #[default]
    Safe,
    Unchecked,
}

/// A value proposed for the initial floor and the episode that witnesses it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub episode: Episode,
    pub utility: Utility,
}

/// Exact utility of every 1-episode, in event order.
pub fn riu_list(ces: &ComplexEventSequence) -> Vec<Witness> {
    ces.catalog()
        .ids()
        .filter(|&e| !ces.occurrences(e).is_empty())
        .map(|e| Witness {
            episode: Episode::single(e),
            utility: ces.occurrences(e).iter().map(|o| o.utility).sum(),
        })
        .collect()
}

/// Per-timestamp totals, witnessed by the episode made of the full set.
pub fn rtu_list(ces: &ComplexEventSequence, soundness: InitSoundness) -> Vec<Witness> {
    let full = |pos: usize| -> Episode {
        Episode::from_sets(vec![ces.sets()[pos].events().collect::<Vec<EventId>>()])
            .expect("stored sets are non-empty and sorted")
    };
    match soundness {
        InitSoundness::Unchecked => (0..ces.len())
            .map(|pos| Witness {
                episode: full(pos),
                utility: ces.timestamp_utilities()[pos],
            })
            .collect(),
        InitSoundness::Safe => {
            let mut order: Vec<Episode> = Vec::new();
            let mut sums: HashMap<Episode, Utility> = HashMap::new();
            for pos in 0..ces.len() {
                let ep = full(pos);
                let tu = ces.timestamp_utilities()[pos];
                match sums.get_mut(&ep) {
                    Some(sum) => *sum += tu,
                    None => {
                        sums.insert(ep.clone(), tu);
                        order.push(ep);
                    }
                }
            }
            order
                .into_iter()
                .map(|ep| {
                    let utility = sums[&ep];
                    Witness {
                        episode: ep,
                        utility,
                    }
                })
                .collect()
        }
    }
}

/// Selects the k-th highest value of `values`.
///
/// With fewer than `k` values the unchecked mode returns the smallest value and
/// the safe mode returns zero.
pub fn rus(values: &[Utility], k: usize, soundness: InitSoundness) -> Utility {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    if k >= 1 && sorted.len() >= k {
        sorted[k - 1]
    } else {
        match soundness {
            InitSoundness::Unchecked => sorted.last().copied().unwrap_or(0),
            InitSoundness::Safe => 0,
        }
    }
}

/// Merges witness lists for [`rus`]. Safe mode keeps one value per witness
/// episode.
pub fn combine_witnesses(lists: &[Vec<Witness>], soundness: InitSoundness) -> Vec<Utility> {
    match soundness {
        InitSoundness::Unchecked => lists.iter().flatten().map(|w| w.utility).collect(),
        InitSoundness::Safe => {
            let mut best: HashMap<&Episode, Utility> = HashMap::new();
            for w in lists.iter().flatten() {
                let slot = best.entry(&w.episode).or_insert(0);
                *slot = (*slot).max(w.utility);
            }
            best.into_values().collect()
        }
    }
}

/// Outcome of [`TopKBuffer::offer`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Offer {
    /// Below the floor; the buffer is unchanged.
    Rejected,
    Inserted,
    /// Inserted and the floor rose to the given value.
    Raised(Utility),
}

/// Capacity-k store ordered by utility descending, then canonical episode
/// order. The floor only ever rises.
#[derive(Clone, Debug)]
pub struct TopKBuffer {
    capacity: usize,
    floor: Utility,
    entries: BTreeMap<(Reverse<Utility>, Episode), usize>,
}

impl TopKBuffer {
    pub fn new(capacity: usize, floor: Utility) -> Self {
        TopKBuffer {
            capacity,
            floor,
            entries: BTreeMap::new(),
        }
    }

    /// A buffer that never trims and keeps a static floor.
    pub fn unbounded(floor: Utility) -> Self {
        TopKBuffer::new(usize::MAX, floor)
    }

    pub fn floor(&self) -> Utility {
        self.floor
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(episode, utility, mo count)` in rank order.
    pub fn entries(&self) -> impl Iterator<Item = (&Episode, Utility, usize)> {
        self.entries
            .iter()
            .map(|((Reverse(u), ep), &n)| (ep, *u, n))
    }

    /// Inserts a candidate whose utility is at least the floor, trims to
    /// capacity and raises the floor to the k-th utility once full.
    pub fn offer(&mut self, episode: Episode, utility: Utility, mo_count: usize) -> Offer {
        if utility < self.floor {
            return Offer::Rejected;
        }
        self.entries.insert((Reverse(utility), episode), mo_count);
        while self.entries.len() > self.capacity {
            self.entries.pop_last();
        }
        if self.entries.len() == self.capacity {
            let kth = self
                .entries
                .last_key_value()
                .map(|((Reverse(u), _), _)| *u)
                .unwrap_or(0);
            if kth > self.floor {
                self.floor = kth;
                return Offer::Raised(kth);
            }
        }
        Offer::Inserted
    }
}
