//! Serializable views of mining and oracle results.

use serde::{Deserialize, Serialize};

use crate::event::{EventCatalog, Utility};
use crate::miner::{HueResult, MiningStats};
use crate::occurrence::Occurrence;
use crate::oracle::OracleEntry;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: String,
    pub utility: Utility,
    pub mo_count: usize,
    pub mo_set: Vec<Occurrence>,
}

/// Shared JSON shape for miner and oracle output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultReport {
    pub episodes: Vec<EpisodeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<MiningStats>,
}

impl ResultReport {
    pub fn from_hue(result: &HueResult, catalog: &EventCatalog) -> Self {
        ResultReport {
            episodes: result
                .episodes
                .iter()
                .map(|e| EpisodeRecord {
                    episode: e.episode.display(catalog).to_string(),
                    utility: e.utility,
                    mo_count: e.mo_count(),
                    mo_set: e.mo_set.as_slice().to_vec(),
                })
                .collect(),
            stats: Some(result.stats.clone()),
        }
    }

    pub fn from_oracle(entries: &[OracleEntry], catalog: &EventCatalog) -> Self {
        ResultReport {
            episodes: entries
                .iter()
                .map(|e| EpisodeRecord {
                    episode: e.episode.display(catalog).to_string(),
                    utility: e.utility,
                    mo_count: e.mo_set.len(),
                    mo_set: e.mo_set.as_slice().to_vec(),
                })
                .collect(),
            stats: None,
        }
    }

    pub fn utilities(&self) -> Vec<Utility> {
        self.episodes.iter().map(|e| e.utility).collect()
    }
}
