//! Exhaustive reference enumeration for small instances.
//!
//! Minimal occurrences are found here by listing every embedding of an
//! episode, keeping the windows that satisfy the duration constraint and
//! discarding any window that strictly contains another. The expansion tries
//! every event at every node with no pruning beyond empty occurrence sets.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::episode::Episode;
use crate::event::{ComplexEventSequence, EventId, RuMode, Timestamp, Utility};
use crate::occurrence::{episode_utility_at, ewu_opt_total, MoSet, Mtd, Occurrence};

pub const MAX_TIMESTAMPS: usize = 16;
pub const MAX_EVENT_TYPES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for exhaustive enumeration: {timestamps} timestamps, {event_types} event types (limits {MAX_TIMESTAMPS} and {MAX_EVENT_TYPES})")]
    TooLarge {
        timestamps: usize,
        event_types: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEntry {
    pub episode: Episode,
    pub utility: Utility,
    pub mo_set: MoSet,
}

/// Every episode with a non-empty minimal occurrence set, sorted by utility
/// descending, then canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub episodes: Vec<OracleEntry>,
}

impl OracleReport {
    pub fn top_k(&self, k: usize) -> &[OracleEntry] {
        &self.episodes[..k.min(self.episodes.len())]
    }

    pub fn utility_of(&self, episode: &Episode) -> Option<Utility> {
        self.episodes
            .iter()
            .find(|e| &e.episode == episode)
            .map(|e| e.utility)
    }

    /// Entries whose utility reaches `threshold`.
    pub fn at_least(&self, threshold: Utility) -> impl Iterator<Item = &OracleEntry> {
        self.episodes
            .iter()
            .take_while(move |e| e.utility >= threshold)
    }
}

fn guard(ces: &ComplexEventSequence) -> Result<(), OracleError> {
    if ces.len() > MAX_TIMESTAMPS || ces.catalog().len() > MAX_EVENT_TYPES {
        return Err(OracleError::TooLarge {
            timestamps: ces.len(),
            event_types: ces.catalog().len(),
        });
    }
    Ok(())
}

pub fn enumerate_all(ces: &ComplexEventSequence, mtd: Mtd) -> Result<OracleReport, OracleError> {
    guard(ces)?;
    Ok(enumerate_all_forced(ces, mtd))
}

/// [`enumerate_all`] without the size guard.
pub fn enumerate_all_forced(ces: &ComplexEventSequence, mtd: Mtd) -> OracleReport {
    let mut out = Vec::new();
    let mut stack: Vec<Episode> = ces.catalog().ids().map(Episode::single).collect();
    while let Some(alpha) = stack.pop() {
        let mo_set = naive_minimal_occurrences(&alpha, ces, mtd);
        if mo_set.is_empty() {
            continue;
        }
        let utility = mo_set
            .iter()
            .map(|mo| episode_utility_at(&alpha, mo, ces).expect("naive embeddings are valid"))
            .sum();
        for e in ces.catalog().ids() {
            stack.push(alpha.serial_concatenate(e));
            if let Ok(child) = alpha.simult_concatenate(e) {
                stack.push(child);
            }
        }
        out.push(OracleEntry {
            episode: alpha,
            utility,
            mo_set,
        });
    }
    out.sort_by(|a, b| {
        b.utility
            .cmp(&a.utility)
            .then_with(|| a.episode.cmp(&b.episode))
    });
    OracleReport { episodes: out }
}

pub fn oracle_topk(
    ces: &ComplexEventSequence,
    k: usize,
    mtd: Mtd,
) -> Result<Vec<(Episode, Utility)>, OracleError> {
    let report = enumerate_all(ces, mtd)?;
    Ok(report
        .top_k(k)
        .iter()
        .map(|e| (e.episode.clone(), e.utility))
        .collect())
}

fn contains_set(ces: &ComplexEventSequence, pos: usize, set: &[EventId]) -> bool {
    let here = &ces.sets()[pos];
    set.iter().all(|&e| here.get(e).is_some())
}

fn embeddings(ces: &ComplexEventSequence, alpha: &Episode) -> Vec<Vec<usize>> {
    fn walk(
        ces: &ComplexEventSequence,
        sets: &[Vec<EventId>],
        from: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some((set, rest)) = sets.split_first() else {
            out.push(cur.clone());
            return;
        };
        for pos in from..ces.len() {
            if contains_set(ces, pos, set) {
                cur.push(pos);
                walk(ces, rest, pos + 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(ces, alpha.sets(), 0, &mut Vec::new(), &mut out);
    out
}

/// Minimal occurrences by full embedding enumeration. Each window is priced
/// at its lexicographically smallest embedding.
pub fn naive_minimal_occurrences(alpha: &Episode, ces: &ComplexEventSequence, mtd: Mtd) -> MoSet {
    let ts = |p: usize| -> Timestamp { ces.sets()[p].timestamp() };
    let all = embeddings(ces, alpha);
    let windows: BTreeSet<(usize, usize)> = all
        .iter()
        .map(|emb| (emb[0], *emb.last().expect("non-empty")))
        .filter(|&(s, e)| mtd.admits(ts(e) - ts(s)))
        .collect();
    let minimal = windows.iter().filter(|&&(s, e)| {
        !windows
            .iter()
            .any(|&(s2, e2)| (s2, e2) != (s, e) && s <= s2 && e2 <= e)
    });
    let occurrences = minimal
        .map(|&(s, e)| {
            let emb = all
                .iter()
                .filter(|emb| emb[0] == s && *emb.last().expect("non-empty") == e)
                .min()
                .expect("window comes from an embedding");
            Occurrence {
                start: ts(s),
                end: ts(e),
                embedding: emb.iter().map(|&p| ts(p)).collect(),
            }
        })
        .collect();
    MoSet::new(occurrences)
}

/// A descendant whose utility exceeds an ancestor's bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub ancestor: Episode,
    pub descendant: Episode,
    pub bound: Utility,
    pub utility: Utility,
}

/// Checks the optimized bound of every enumerated episode against its own
/// utility and the utility of every enumerated descendant.
pub fn check_bound_soundness(
    ces: &ComplexEventSequence,
    mtd: Mtd,
    ru_mode: RuMode,
) -> Result<Vec<Violation>, OracleError> {
    let report = enumerate_all(ces, mtd)?;
    Ok(check_bound_soundness_with(&report, |alpha| {
        ewu_opt_total(alpha, ces, mtd, ru_mode)
    }))
}

/// Soundness check against an arbitrary bound function.
pub fn check_bound_soundness_with<F>(report: &OracleReport, bound: F) -> Vec<Violation>
where
    F: Fn(&Episode) -> Utility,
{
    let mut violations = Vec::new();
    for entry in &report.episodes {
        let mut ancestor = Some(entry.episode.clone());
        while let Some(alpha) = ancestor {
            let b = bound(&alpha);
            if entry.utility > b {
                violations.push(Violation {
                    ancestor: alpha.clone(),
                    descendant: entry.episode.clone(),
                    bound: b,
                    utility: entry.utility,
                });
            }
            ancestor = alpha.parent();
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::io::parse_native;
    use crate::occurrence::{ewu_total, minimal_occurrences, MtdSemantics};

    fn shown(ces: &ComplexEventSequence, entries: &[OracleEntry]) -> Vec<(String, Utility, usize)> {
        entries
            .iter()
            .map(|e| {
                (
                    e.episode.display(ces.catalog()).to_string(),
                    e.utility,
                    e.mo_set.len(),
                )
            })
            .collect()
    }

    #[test]
    fn running_example_threshold_set() {
        let ces = running_example();
        let report = enumerate_all(&ces, Mtd::exclusive(2)).unwrap();
        let got: Vec<_> = report.at_least(10).cloned().collect();
        let expected = [
            ("(B C)->(A C)", 13, 1),
            ("(B)->(C)", 11, 2),
            ("(A)->(D)", 10, 2),
            ("(B)->(A C)", 10, 1),
            ("(B C)->(A)", 10, 1),
            ("(C)->(A C)", 10, 1),
            ("(B D)->(B C)", 10, 1),
        ];
        let mut got = shown(&ces, &got);
        got.sort();
        let mut expected: Vec<_> = expected
            .iter()
            .map(|&(e, u, n)| (e.to_string(), u, n))
            .collect();
        expected.sort();
        assert_eq!(got, expected);
        // <(A)->(C)> only spans two time units, which the exclusive bound rejects.
        assert_eq!(
            report.utility_of(&Episode::parse("(A)->(C)", ces.catalog()).unwrap()),
            None
        );
    }

    #[test]
    fn running_example_top_k() {
        let ces = running_example();
        let top: Vec<_> = oracle_topk(&ces, 2, Mtd::exclusive(2)).unwrap();
        let shown: Vec<_> = top
            .iter()
            .map(|(e, u)| (e.display(ces.catalog()).to_string(), *u))
            .collect();
        assert_eq!(
            shown,
            [
                ("(B C)->(A C)".to_string(), 13),
                ("(B)->(C)".to_string(), 11)
            ]
        );

        // Two episodes tie at 19; the canonical order puts the one starting with (A) first.
        let report = enumerate_all(&ces, Mtd::inclusive(3)).unwrap();
        let best: Vec<_> = report
            .at_least(19)
            .map(|e| (e.episode.display(ces.catalog()).to_string(), e.utility))
            .collect();
        assert_eq!(
            best,
            [
                ("(A)->(B D)->(B C)->(A C)".to_string(), 19),
                ("(B D)->(B C)->(A C)->(D)".to_string(), 19)
            ]
        );
        assert_eq!(oracle_topk(&ces, 1, Mtd::inclusive(3)).unwrap()[0].1, 19);
        assert!(oracle_topk(&ces, 1, Mtd::exclusive(3)).unwrap()[0].1 < 19);

        let top4: Vec<_> = oracle_topk(&ces, 4, Mtd::exclusive(3))
            .unwrap()
            .iter()
            .map(|t| t.1)
            .collect();
        assert_eq!(top4, [17, 15, 15, 15]);
    }

    #[test]
    fn single_timestamp() {
        let ces = parse_native("@EVENT A 2\n1|A:1\n").unwrap();
        let report = enumerate_all(&ces, Mtd::inclusive(3)).unwrap();
        assert_eq!(report.episodes.len(), 1);
        assert_eq!(report.episodes[0].utility, 2);
    }

    #[test]
    fn zero_duration_gives_only_simultaneous_episodes() {
        let ces = running_example();
        let report = enumerate_all(&ces, Mtd::inclusive(0)).unwrap();
        assert!(report.episodes.iter().all(|e| e.episode.size() == 1));
        assert!(enumerate_all(&ces, Mtd::exclusive(0))
            .unwrap()
            .episodes
            .is_empty());
    }

    #[test]
    fn large_k_returns_everything() {
        let ces = running_example();
        let report = enumerate_all(&ces, Mtd::inclusive(1)).unwrap();
        assert_eq!(report.top_k(100_000).len(), report.episodes.len());
    }

    #[test]
    fn closed_under_parent_and_sorted() {
        let ces = running_example();
        let report = enumerate_all(&ces, Mtd::inclusive(3)).unwrap();
        let set: BTreeSet<&Episode> = report.episodes.iter().map(|e| &e.episode).collect();
        assert_eq!(set.len(), report.episodes.len());
        for e in &report.episodes {
            if let Some(p) = e.episode.parent() {
                assert!(set.contains(&p));
            }
        }
        assert!(report
            .episodes
            .windows(2)
            .all(|w| w[0].utility >= w[1].utility));
    }

    #[test]
    fn naive_and_indexed_occurrences_agree_on_fixture() {
        let ces = running_example();
        for sem in [MtdSemantics::Inclusive, MtdSemantics::Exclusive] {
            for d in 0..5 {
                let mtd = Mtd {
                    duration: d,
                    semantics: sem,
                };
                for e in enumerate_all(&ces, Mtd::inclusive(4)).unwrap().episodes {
                    assert_eq!(
                        naive_minimal_occurrences(&e.episode, &ces, mtd),
                        minimal_occurrences(&e.episode, &ces, mtd)
                    );
                }
            }
        }
    }

    #[test]
    fn bounds_are_sound_on_fixture() {
        let ces = running_example();
        for mtd in [
            Mtd::inclusive(2),
            Mtd::exclusive(2),
            Mtd::inclusive(3),
            Mtd::exclusive(3),
        ] {
            for mode in [RuMode::Strict, RuMode::Compat] {
                assert!(check_bound_soundness(&ces, mtd, mode).unwrap().is_empty());
            }
            let report = enumerate_all(&ces, mtd).unwrap();
            assert!(check_bound_soundness_with(&report, |a| ewu_total(a, &ces, mtd)).is_empty());
        }
    }

    #[test]
    fn corrupted_bound_is_caught() {
        let ces = running_example();
        let mtd = Mtd::inclusive(2);
        let report = enumerate_all(&ces, mtd).unwrap();
        let violations = check_bound_soundness_with(&report, |a| {
            ewu_opt_total(a, &ces, mtd, RuMode::Strict).saturating_sub(1)
        });
        assert!(!violations.is_empty());
    }

    #[test]
    fn guard_rejects_large_instances() {
        let ces = crate::datagen::generate(&crate::datagen::GenParams {
            timestamps: 17,
            event_types: 3,
            min_set_size: 1,
            max_set_size: 2,
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(
            enumerate_all(&ces, Mtd::inclusive(1)),
            Err(OracleError::TooLarge { .. })
        ));
        assert!(!enumerate_all_forced(&ces, Mtd::inclusive(1))
            .episodes
            .is_empty());
    }
}
