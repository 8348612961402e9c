//! Depth-first expansion with an explicit stack.
//!
//! Extension events are collected per minimal occurrence of the parent.
//! Serial candidates are the events at positions after the occurrence end
//! and inside its bound window. Simultaneous candidates are the events after
//! the last event of the final set, taken at every position of the final set
//! between the occurrence end and its window end. For a 1-episode this is
//! just the occurrence position itself.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{
    ExpansionOrder, MineError, MiningConfig, MiningStats, Offer, ThresholdRaise, TopKBuffer,
};
use crate::episode::Episode;
use crate::event::{ComplexEventSequence, EventId, Utility};
use crate::occurrence::{
    entry_bound, minimal_entries, set_indexes, window_end_position, MoEntry, Mtd, SetIndex,
};

const DEADLINE_STRIDE: u64 = 1024;

pub(crate) struct SearchState {
    buffer: Mutex<TopKBuffer>,
    floor: AtomicU64,
    candidates: AtomicU64,
    trace: Mutex<Vec<ThresholdRaise>>,
    abort: AtomicBool,
    error: Mutex<Option<MineError>>,
    started: Instant,
    timeout: Option<Duration>,
}

impl SearchState {
    pub fn new(buffer: TopKBuffer, started: Instant, timeout: Option<Duration>) -> Self {
        SearchState {
            floor: AtomicU64::new(buffer.floor()),
            buffer: Mutex::new(buffer),
            candidates: AtomicU64::new(0),
            trace: Mutex::new(Vec::new()),
            abort: AtomicBool::new(false),
            error: Mutex::new(None),
            started,
            timeout,
        }
    }

    pub fn finish(self) -> (TopKBuffer, MiningStats) {
        let stats = MiningStats {
            candidates_generated: self.candidates.into_inner(),
            threshold_trace: self.trace.into_inner().expect("trace lock"),
            ..MiningStats::default()
        };
        (self.buffer.into_inner().expect("buffer lock"), stats)
    }

    fn floor(&self) -> Utility {
        self.floor.load(Ordering::Acquire)
    }

    fn fail(&self, err: MineError) {
        let mut slot = self.error.lock().expect("error lock");
        if slot.is_none() {
            *slot = Some(err);
        }
        self.abort.store(true, Ordering::Release);
    }

    fn aborted(&self) -> bool {
        self.abort.load(Ordering::Acquire)
    }

    /// Counts one materialized candidate and checks the deadline.
    fn count_candidate(&self) {
        let n = self.candidates.fetch_add(1, Ordering::Relaxed);
        if n.is_multiple_of(DEADLINE_STRIDE) {
            if let Some(limit) = self.timeout {
                let elapsed = self.started.elapsed();
                if elapsed >= limit {
                    self.fail(MineError::Timeout { elapsed });
                }
            }
        }
    }

    fn offer(&self, episode: &Episode, utility: Utility, mo_count: usize) {
        if utility < self.floor() {
            return;
        }
        let mut buffer = self.buffer.lock().expect("buffer lock");
        if let Offer::Raised(u) = buffer.offer(episode.clone(), utility, mo_count) {
            self.floor.store(u, Ordering::Release);
            self.trace.lock().expect("trace lock").push(ThresholdRaise {
                candidate: self.candidates.load(Ordering::Relaxed),
                min_util: u,
            });
        }
    }
}

struct Node {
    episode: Episode,
    sets: Vec<Arc<SetIndex>>,
    entries: Vec<MoEntry>,
    bound: Utility,
}

struct Frame {
    node: Node,
    candidates: Vec<(bool, EventId)>,
    next: usize,
}

pub(crate) struct Search<'a> {
    ces: &'a ComplexEventSequence,
    config: &'a MiningConfig,
    state: &'a SearchState,
    singles: Vec<Arc<SetIndex>>,
}

impl<'a> Search<'a> {
    pub fn new(
        ces: &'a ComplexEventSequence,
        config: &'a MiningConfig,
        state: &'a SearchState,
    ) -> Self {
        let singles = ces
            .catalog()
            .ids()
            .map(|e| Arc::new(SetIndex::for_event(ces, e)))
            .collect();
        Search {
            ces,
            config,
            state,
            singles,
        }
    }

    pub fn run(&self) -> Result<(), MineError> {
        let mut roots = Vec::new();
        for e in self.ces.catalog().ids() {
            let sets = vec![Arc::clone(&self.singles[e.index()])];
            if let Some(node) = self.materialize(Episode::single(e), sets) {
                roots.push(node);
            }
            if self.state.aborted() {
                break;
            }
        }
        let roots: Vec<Node> = roots
            .into_iter()
            .filter(|n| n.bound >= self.state.floor())
            .collect();
        if self.config.parallel {
            roots.into_par_iter().for_each(|root| self.expand(root));
        } else {
            for root in roots {
                self.expand(root);
            }
        }
        match self.state.error.lock().expect("error lock").take() {
            Some(err) => Err(err),
            None => Ok(()),
        }
    }

    /// Computes the minimal occurrences of a candidate and offers it.
    /// Returns the node when it has occurrences.
    fn materialize(&self, episode: Episode, sets: Vec<Arc<SetIndex>>) -> Option<Node> {
        self.state.count_candidate();
        let entries = minimal_entries(&sets, self.ces, self.config.mtd);
        if entries.is_empty() {
            return None;
        }
        let utility: Utility = entries.iter().map(|e| e.utility).sum();
        self.state.offer(&episode, utility, entries.len());
        let bound = self.bound(episode.last_event(), &entries);
        Some(Node {
            episode,
            sets,
            entries,
            bound,
        })
    }

    fn bound(&self, last: EventId, entries: &[MoEntry]) -> Utility {
        entries
            .iter()
            .map(|e| {
                entry_bound(
                    self.ces,
                    self.config.mtd,
                    last,
                    e,
                    self.config.bound,
                    self.config.ru_mode,
                )
            })
            .sum()
    }

    fn frame(&self, node: Node) -> Frame {
        let simult = simult_candidates(
            self.ces,
            self.config.mtd,
            &node.episode,
            &node.sets,
            &node.entries,
        );
        let serial = serial_candidates(self.ces, self.config.mtd, &node.entries);
        let simult = simult.into_iter().map(|e| (false, e));
        let serial = serial.into_iter().map(|e| (true, e));
        let candidates = match self.config.order {
            ExpansionOrder::SimultFirst => simult.chain(serial).collect(),
            ExpansionOrder::SerialFirst => serial.chain(simult).collect(),
        };
        Frame {
            node,
            candidates,
            next: 0,
        }
    }

    fn expand(&self, root: Node) {
        let mut stack = vec![self.frame(root)];
        while let Some(top) = stack.last_mut() {
            if self.state.aborted() {
                return;
            }
            // The floor may have risen past the bound since the push.
            if top.node.bound < self.state.floor() {
                stack.pop();
                continue;
            }
            let Some(&(serial, event)) = top.candidates.get(top.next) else {
                stack.pop();
                continue;
            };
            top.next += 1;
            let parent = &top.node;
            if parent.episode.length() >= self.config.depth_cap {
                self.state.fail(MineError::DepthCapExceeded {
                    cap: self.config.depth_cap,
                });
                return;
            }
            let (episode, sets) = if serial {
                let mut sets = parent.sets.clone();
                sets.push(Arc::clone(&self.singles[event.index()]));
                (parent.episode.serial_concatenate(event), sets)
            } else {
                let mut sets = parent.sets.clone();
                let last = sets.pop().expect("non-empty");
                sets.push(Arc::new(last.with_event(self.ces, event)));
                let episode = parent
                    .episode
                    .simult_concatenate(event)
                    .expect("candidates follow the last event");
                (episode, sets)
            };
            if let Some(child) = self.materialize(episode, sets) {
                if child.bound >= self.state.floor() {
                    let frame = self.frame(child);
                    stack.push(frame);
                }
            }
        }
    }
}

fn collect_events(
    ces: &ComplexEventSequence,
    marks: &mut [bool],
    pos: usize,
    after: Option<EventId>,
) {
    for item in ces.items_at(pos) {
        if after.is_none_or(|last| item.event > last) {
            marks[item.event.index()] = true;
        }
    }
}

fn marked(marks: &[bool]) -> Vec<EventId> {
    marks
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| EventId::from_index(i))
        .collect()
}

fn simult_candidates(
    ces: &ComplexEventSequence,
    mtd: Mtd,
    episode: &Episode,
    sets: &[Arc<SetIndex>],
    entries: &[MoEntry],
) -> Vec<EventId> {
    let last_event = episode.last_event();
    let mut marks = vec![false; ces.catalog().len()];
    if episode.size() == 1 {
        for entry in entries {
            collect_events(ces, &mut marks, entry.end as usize, Some(last_event));
        }
        return marked(&marks);
    }
    let last = sets.last().expect("non-empty");
    let mut covered: Option<usize> = None;
    for entry in entries {
        let end = entry.end as usize;
        let wend = window_end_position(ces, mtd, entry.start)
            .unwrap_or(end)
            .max(end);
        let from = covered.map_or(end, |c| end.max(c + 1));
        let mut i = last.positions.partition_point(|&p| (p as usize) < from);
        while let Some(&p) = last.positions.get(i) {
            if p as usize > wend {
                break;
            }
            collect_events(ces, &mut marks, p as usize, Some(last_event));
            i += 1;
        }
        covered = Some(covered.map_or(wend, |c| c.max(wend)));
    }
    marked(&marks)
}

fn serial_candidates(ces: &ComplexEventSequence, mtd: Mtd, entries: &[MoEntry]) -> Vec<EventId> {
    let mut marks = vec![false; ces.catalog().len()];
    let mut covered: Option<usize> = None;
    for entry in entries {
        let end = entry.end as usize;
        let Some(wend) = window_end_position(ces, mtd, entry.start) else {
            continue;
        };
        let from = covered.map_or(end + 1, |c| (end + 1).max(c + 1));
        for pos in from..=wend {
            collect_events(ces, &mut marks, pos, None);
        }
        covered = Some(covered.map_or(wend, |c| c.max(wend)));
    }
    marked(&marks)
}

/// Events `e` for which the simultaneous extension of `episode` by `e` can
/// have a minimal occurrence.
pub fn simult_extension_events(
    episode: &Episode,
    ces: &ComplexEventSequence,
    mtd: Mtd,
) -> Vec<EventId> {
    let sets: Vec<Arc<SetIndex>> = set_indexes(episode, ces)
        .into_iter()
        .map(Arc::new)
        .collect();
    let entries = minimal_entries(&sets, ces, mtd);
    simult_candidates(ces, mtd, episode, &sets, &entries)
}

/// Events `e` for which the serial extension of `episode` by `e` can have a
/// minimal occurrence.
pub fn serial_extension_events(
    episode: &Episode,
    ces: &ComplexEventSequence,
    mtd: Mtd,
) -> Vec<EventId> {
    let sets = set_indexes(episode, ces);
    let entries = minimal_entries(&sets, ces, mtd);
    serial_candidates(ces, mtd, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::io::parse_native;
    use crate::occurrence::minimal_occurrences;

    fn names(ces: &ComplexEventSequence, events: &[EventId]) -> Vec<String> {
        events
            .iter()
            .map(|&e| ces.catalog().name(e).to_string())
            .collect()
    }

    #[test]
    fn serial_candidates_cover_the_window() {
        let ces = running_example();
        let b = Episode::parse("(B)", ces.catalog()).unwrap();
        // B at 2 and 3; windows reach 4 and 5.
        let got = serial_extension_events(&b, &ces, Mtd::inclusive(2));
        assert_eq!(names(&ces, &got), ["A", "B", "C", "D"]);
        let got = serial_extension_events(&b, &ces, Mtd::exclusive(1));
        assert!(got.is_empty());
    }

    #[test]
    fn simult_candidates_of_one_episode() {
        let ces = running_example();
        let b = Episode::parse("(B)", ces.catalog()).unwrap();
        let got = simult_extension_events(&b, &ces, Mtd::inclusive(2));
        assert_eq!(names(&ces, &got), ["C", "D"]);
    }

    #[test]
    fn simult_candidates_reach_past_the_occurrence_end() {
        let ces =
            parse_native("@EVENT A 1\n@EVENT B 1\n@EVENT C 1\n1|A:1\n2|B:1\n3|B:1 C:1\n").unwrap();
        let ab = Episode::parse("(A)->(B)", ces.catalog()).unwrap();
        assert_eq!(
            minimal_occurrences(&ab, &ces, Mtd::inclusive(2)).intervals(),
            vec![(1, 2)]
        );
        let got = simult_extension_events(&ab, &ces, Mtd::inclusive(2));
        assert_eq!(names(&ces, &got), ["C"]);
        let abc = Episode::parse("(A)->(B C)", ces.catalog()).unwrap();
        assert_eq!(
            minimal_occurrences(&abc, &ces, Mtd::inclusive(2)).intervals(),
            vec![(1, 3)]
        );
    }
}
