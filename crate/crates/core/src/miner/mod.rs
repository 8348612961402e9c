//! Top-k high-utility episode search with automatic threshold raising.
//!
//! A run has two phases. Phase I sets the initial floor from the enabled
//! witness lists, then materializes every 1-episode in event order, offering
//! each to the top-k buffer. Phase II expands every 1-episode whose bound
//! still clears the floor, depth first, by simultaneous and serial
//! concatenation. A child is offered to the buffer when its utility clears
//! the floor and expanded when its bound does; the floor rises whenever the
//! buffer is full and its k-th utility grows.

mod buffer;
mod search;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use buffer::{
    combine_witnesses, riu_list, rtu_list, rus, InitSoundness, Offer, TopKBuffer, Witness,
};
pub use search::{serial_extension_events, simult_extension_events};

use crate::episode::Episode;
use crate::event::{ComplexEventSequence, RuMode, Utility};
use crate::occurrence::{minimal_occurrences, BoundKind, MoSet, Mtd};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("search depth exceeded the cap of {cap} events")]
    DepthCapExceeded { cap: usize },
    #[error("mining run timed out after {elapsed:?}")]
    Timeout { elapsed: Duration },
}

/// Order of the two expansion procedures at each node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionOrder {
    #[default]
    SimultFirst,
    SerialFirst,
}

/// Which witness lists seed the initial floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InitStrategies {
    pub riu: bool,
    pub rtu: bool,
}

impl InitStrategies {
    pub const ALL: InitStrategies = InitStrategies {
        riu: true,
        rtu: true,
    };
    pub const NONE: InitStrategies = InitStrategies {
        riu: false,
        rtu: false,
    };
}

/// A utility ratio held as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UtilityRatio {
    pub numerator: u64,
    pub denominator: u64,
}

impl UtilityRatio {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self, MineError> {
        if denominator == 0 || numerator > denominator {
            return Err(MineError::InvalidConfig(format!(
                "ratio {numerator}/{denominator} is not in [0, 1]"
            )));
        }
        Ok(UtilityRatio {
            numerator,
            denominator,
        })
    }

    /// Smallest integer utility `u` with `u >= ratio * total`.
    pub fn threshold(&self, total: Utility) -> Utility {
        let num = u128::from(self.numerator) * u128::from(total);
        let den = u128::from(self.denominator);
        num.div_ceil(den) as Utility
    }
}

impl FromStr for UtilityRatio {
    type Err = MineError;

    /// Accepts `0.45`, `45%` and `9/20`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MineError::InvalidConfig(format!("invalid ratio `{s}`"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            return UtilityRatio::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            );
        }
        let (body, percent) = match s.strip_suffix('%') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || frac.len() > 12
        {
            return Err(bad());
        }
        let mut den: u64 = 10u64.pow(frac.len() as u32);
        let num: u64 = format!("{int}{frac}")
            .trim_start_matches('0')
            .parse()
            .unwrap_or(0);
        if percent {
            den = den.checked_mul(100).ok_or_else(bad)?;
        }
        UtilityRatio::new(num, den)
    }
}

impl fmt::Display for UtilityRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Static threshold for the fixed-threshold mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinUtil {
    Absolute(Utility),
    Ratio(UtilityRatio),
}

impl MinUtil {
    pub fn threshold(&self, total: Utility) -> Utility {
        match self {
            MinUtil::Absolute(u) => *u,
            MinUtil::Ratio(r) => r.threshold(total),
        }
    }
}

/// Named configurations for comparison runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Optimized bound with both witness lists.
    Thue,
    /// Optimized bound without the 1-episode witness list.
    ThueEwu,
    /// Original bound with both witness lists.
    ThueRus,
    /// Original bound, no witness lists, unchecked initialization.
    Baseline,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Thue,
        Variant::ThueEwu,
        Variant::ThueRus,
        Variant::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Thue => "thue",
            Variant::ThueEwu => "thue-ewu",
            Variant::ThueRus => "thue-rus",
            Variant::Baseline => "baseline",
        }
    }
}

impl FromStr for Variant {
    type Err = MineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thue" | "full" => Ok(Variant::Thue),
            "thue-ewu" | "no-riu" => Ok(Variant::ThueEwu),
            "thue-rus" | "original-bound" => Ok(Variant::ThueRus),
            "baseline" => Ok(Variant::Baseline),
            _ => Err(MineError::InvalidConfig(format!("unknown variant `{s}`"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_DEPTH_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub k: usize,
    pub mtd: Mtd,
    pub ru_mode: RuMode,
    pub bound: BoundKind,
    pub init: InitStrategies,
    pub init_soundness: InitSoundness,
    pub order: ExpansionOrder,
    pub fixed_min_util: Option<MinUtil>,
    /// Maximum episode length the search may reach.
    pub depth_cap: usize,
    /// Wall-clock budget for one run.
    #[serde(skip)]
    pub timeout: Option<Duration>,
    /// Expand distinct 1-episode prefixes on the rayon pool.
    pub parallel: bool,
}

impl MiningConfig {
    /// The full configuration: optimized bound, strict remaining utility,
    /// both witness lists, safe initialization.
    pub fn new(k: usize, mtd: Mtd) -> Self {
        MiningConfig {
            k,
            mtd,
            ru_mode: RuMode::Strict,
            bound: BoundKind::Opt,
            init: InitStrategies::ALL,
            init_soundness: InitSoundness::Safe,
            order: ExpansionOrder::SimultFirst,
            fixed_min_util: None,
            depth_cap: DEFAULT_DEPTH_CAP,
            timeout: None,
            parallel: false,
        }
    }

    pub fn variant(variant: Variant, k: usize, mtd: Mtd) -> Self {
        let mut cfg = MiningConfig::new(k, mtd);
        match variant {
            Variant::Thue => {}
            Variant::ThueEwu => {
                cfg.init = InitStrategies {
                    riu: false,
                    rtu: true,
                }
            }
            Variant::ThueRus => cfg.bound = BoundKind::Original,
            Variant::Baseline => {
                cfg.bound = BoundKind::Original;
                cfg.init = InitStrategies::NONE;
                cfg.init_soundness = InitSoundness::Unchecked;
            }
        }
        cfg
    }

    /// Configuration for the static-threshold search.
    pub fn fixed(min_util: MinUtil, mtd: Mtd) -> Self {
        let mut cfg = MiningConfig::new(1, mtd);
        cfg.fixed_min_util = Some(min_util);
        cfg.init = InitStrategies::NONE;
        cfg
    }

    pub fn validate(&self) -> Result<(), MineError> {
        if self.k == 0 && self.fixed_min_util.is_none() {
            return Err(MineError::InvalidConfig("k must be at least 1".into()));
        }
        if let Some(MinUtil::Ratio(r)) = self.fixed_min_util {
            UtilityRatio::new(r.numerator, r.denominator)?;
        }
        if self.depth_cap == 0 {
            return Err(MineError::InvalidConfig(
                "depth cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One floor increase: the candidate count at the time and the new floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdRaise {
    pub candidate: u64,
    pub min_util: Utility,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningStats {
    /// Episodes whose minimal occurrences were materialized, 1-episodes
    /// included.
    pub candidates_generated: u64,
    pub threshold_trace: Vec<ThresholdRaise>,
    pub initial_min_util: Utility,
    pub final_min_util: Utility,
    pub elapsed_us: u64,
    /// Filled in by callers that track allocations; not comparable across
    /// machines or runtimes.
    pub peak_tracked_bytes: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HueEntry {
    pub episode: Episode,
    pub utility: Utility,
    pub mo_set: MoSet,
}

impl HueEntry {
    pub fn mo_count(&self) -> usize {
        self.mo_set.len()
    }
}

/// Mined episodes sorted by utility descending, then canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HueResult {
    pub episodes: Vec<HueEntry>,
    pub stats: MiningStats,
}

impl HueResult {
    pub fn utilities(&self) -> Vec<Utility> {
        self.episodes.iter().map(|e| e.utility).collect()
    }
}

/// Runs the fixed-threshold search when `fixed_min_util` is set, the top-k
/// search otherwise.
pub fn mine(ces: &ComplexEventSequence, config: &MiningConfig) -> Result<HueResult, MineError> {
    if config.fixed_min_util.is_some() {
        mine_fixed_threshold(ces, config)
    } else {
        mine_topk(ces, config)
    }
}

pub fn mine_topk(
    ces: &ComplexEventSequence,
    config: &MiningConfig,
) -> Result<HueResult, MineError> {
    config.validate()?;
    if config.k == 0 {
        return Err(MineError::InvalidConfig("k must be at least 1".into()));
    }
    let floor = initial_floor(ces, config);
    run(ces, config, TopKBuffer::new(config.k, floor))
}

/// Every episode whose utility reaches the configured static threshold.
pub fn mine_fixed_threshold(
    ces: &ComplexEventSequence,
    config: &MiningConfig,
) -> Result<HueResult, MineError> {
    config.validate()?;
    let min_util = config.fixed_min_util.ok_or_else(|| {
        MineError::InvalidConfig("fixed threshold mode needs a minimum utility".into())
    })?;
    run(
        ces,
        config,
        TopKBuffer::unbounded(min_util.threshold(ces.total_utility())),
    )
}

/// Initial floor from the enabled witness lists.
pub fn initial_floor(ces: &ComplexEventSequence, config: &MiningConfig) -> Utility {
    let sound = config.init_soundness;
    // Witness values are utilities of point-window episodes.
    if sound == InitSoundness::Safe && !config.mtd.admits(0) {
        return 0;
    }
    let mut lists = Vec::new();
    if config.init.riu {
        lists.push(riu_list(ces));
    }
    if config.init.rtu {
        lists.push(rtu_list(ces, sound));
    }
    if lists.is_empty() {
        return 0;
    }
    rus(&combine_witnesses(&lists, sound), config.k, sound)
}

fn run(
    ces: &ComplexEventSequence,
    config: &MiningConfig,
    buffer: TopKBuffer,
) -> Result<HueResult, MineError> {
    let started = Instant::now();
    let initial = buffer.floor();
    let state = search::SearchState::new(buffer, started, config.timeout);
    search::Search::new(ces, config, &state).run()?;
    let (buffer, mut stats) = state.finish();
    let episodes = buffer
        .entries()
        .map(|(ep, utility, _)| HueEntry {
            episode: ep.clone(),
            utility,
            mo_set: minimal_occurrences(ep, ces, config.mtd),
        })
        .collect();
    stats.initial_min_util = initial;
    stats.final_min_util = buffer.floor();
    stats.elapsed_us = started.elapsed().as_micros() as u64;
    Ok(HueResult { episodes, stats })
}
