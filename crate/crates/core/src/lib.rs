//! Top-k high-utility episode mining over a single complex event sequence.
//!
//! The crate is organised around the data flow of a mining run:
//!
//! * [`event`] and [`io`] hold the input model and its text formats,
//! * [`episode`] and [`occurrence`] define episodes, minimal occurrences under
//!   a maximum time duration, utilities and the utilization upper bounds,
//! * [`miner`] is the top-k search with threshold raising,
//! * [`oracle`] is an exhaustive reference used to verify the miner,
//! * [`datagen`] produces seeded synthetic sequences.

pub mod datagen;
pub mod episode;
pub mod event;
pub mod fixtures;
pub mod io;
pub mod miner;
pub mod occurrence;
pub mod oracle;
pub mod report;

pub use episode::{Episode, EpisodeError};
pub use event::{
    ComplexEventSequence, EventCatalog, EventId, ModelError, RuMode, SequenceBuilder, Timestamp,
    Utility,
};
pub use miner::{
    mine, mine_fixed_threshold, mine_topk, HueEntry, HueResult, InitSoundness, MinUtil, MineError,
    MiningConfig, MiningStats, Variant,
};
pub use occurrence::{BoundKind, MoSet, Mtd, MtdSemantics, Occurrence};
