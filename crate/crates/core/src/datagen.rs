//! Seeded synthetic sequences.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`) and
//! every draw goes through `next_u64`:
//!
//! * an integer in `lo..=hi` is `lo + next_u64() % (hi - lo + 1)`,
//! * a float in `[0, 1)` is `(next_u64() >> 11) * 2^-53`,
//! * a standard normal is Box-Muller on two floats,
//!   `sqrt(-2 ln(1 - f1)) * cos(2 pi f2)`.
//!
//! Draw order: all external utilities by event index, then for each
//! timestamp the duplicate-set coin (only when the probability is positive
//! and a previous set exists), the set size, a partial Fisher-Yates shuffle
//! over event indices and one quantity per chosen event in ascending event
//! order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::event::{ComplexEventSequence, EventCatalog, EventId, SequenceBuilder, Utility};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

/// Distribution of external utilities, clamped to `1..=1000` and rounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UtilityDistribution {
    /// `scale * exp(mu + sigma * z)`.
    LogNormal {
        mu: f64,
        sigma: f64,
        scale: f64,
    },
    Uniform {
        min: Utility,
        max: Utility,
    },
}

impl Default for UtilityDistribution {
    fn default() -> Self {
        UtilityDistribution::LogNormal {
            mu: 0.0,
            sigma: 1.0,
            scale: 100.0,
        }
    }
}

pub const MIN_EXTERNAL_UTILITY: Utility = 1;
pub const MAX_EXTERNAL_UTILITY: Utility = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub timestamps: usize,
    pub event_types: usize,
    pub min_set_size: usize,
    pub max_set_size: usize,
    pub min_quantity: u32,
    pub max_quantity: u32,
    pub utility: UtilityDistribution,
    /// Chance that a timestamp repeats the previous set verbatim.
    pub duplicate_set_probability: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            timestamps: 1000,
            event_types: 50,
            min_set_size: 1,
            max_set_size: 5,
            min_quantity: 1,
            max_quantity: 5,
            utility: UtilityDistribution::default(),
            duplicate_set_probability: 0.0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidParams(m.to_string()));
        if self.timestamps == 0 || self.event_types == 0 {
            return bad("timestamps and event types must be at least 1");
        }
        if self.min_set_size == 0 || self.min_set_size > self.max_set_size {
            return bad("set size range must be non-empty and start at 1 or more");
        }
        if self.event_types < self.max_set_size {
            return bad("event types must be at least the maximum set size");
        }
        if self.min_quantity == 0 || self.min_quantity > self.max_quantity {
            return bad("quantity range must be non-empty and start at 1 or more");
        }
        if !(0.0..=1.0).contains(&self.duplicate_set_probability) {
            return bad("duplicate set probability must be in [0, 1]");
        }
        match self.utility {
            UtilityDistribution::LogNormal { mu, sigma, scale } => {
                if !(mu.is_finite() && sigma.is_finite() && scale.is_finite())
                    || sigma < 0.0
                    || scale <= 0.0
                {
                    return bad(
                        "log-normal parameters must be finite with sigma >= 0 and scale > 0",
                    );
                }
            }
            UtilityDistribution::Uniform { min, max } => {
                if min < MIN_EXTERNAL_UTILITY || max > MAX_EXTERNAL_UTILITY || min > max {
                    return bad("uniform utility range must lie within 1..=1000");
                }
            }
        }
        Ok(())
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    fn int(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.0.next_u64() % (hi - lo + 1)
    }

    fn float(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn normal(&mut self) -> f64 {
        let (f1, f2) = (self.float(), self.float());
        (-2.0 * (1.0 - f1).ln()).sqrt() * (std::f64::consts::TAU * f2).cos()
    }

    fn utility(&mut self, dist: UtilityDistribution) -> Utility {
        match dist {
            UtilityDistribution::LogNormal { mu, sigma, scale } => {
                let v = (scale * (mu + sigma * self.normal()).exp()).round();
                (v.clamp(MIN_EXTERNAL_UTILITY as f64, MAX_EXTERNAL_UTILITY as f64)) as Utility
            }
            UtilityDistribution::Uniform { min, max } => self.int(min, max),
        }
    }
}

/// Event names: `A` to `Z` for up to 26 types, otherwise `e` and a
/// zero-padded index.
pub fn event_names(count: usize) -> Vec<String> {
    if count <= 26 {
        (0..count)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect()
    } else {
        let width = (count - 1).to_string().len();
        (0..count).map(|i| format!("e{i:0width$}")).collect()
    }
}

pub fn generate(params: &GenParams) -> Result<ComplexEventSequence, GenError> {
    params.validate()?;
    let mut rng = Draw(ChaCha8Rng::seed_from_u64(params.seed));
    let names = event_names(params.event_types);
    let utilities: Vec<Utility> = (0..params.event_types)
        .map(|_| rng.utility(params.utility))
        .collect();
    let catalog =
        EventCatalog::new(names.iter().cloned().zip(utilities)).expect("generated names are valid");
    // Catalog ids follow name order, which matches index order for both naming schemes.
    let mut builder = SequenceBuilder::new(catalog);
    let mut pool: Vec<usize> = (0..params.event_types).collect();
    let mut previous: Option<Vec<(EventId, u32)>> = None;
    for t in 1..=params.timestamps as u64 {
        if let Some(prev) = &previous {
            if params.duplicate_set_probability > 0.0
                && rng.float() < params.duplicate_set_probability
            {
                builder
                    .push_set(t, prev.iter().copied())
                    .expect("valid set");
                continue;
            }
        }
        let size = rng.int(params.min_set_size as u64, params.max_set_size as u64) as usize;
        for i in 0..size {
            let j = rng.int(i as u64, (pool.len() - 1) as u64) as usize;
            pool.swap(i, j);
        }
        let mut chosen: Vec<usize> = pool[..size].to_vec();
        chosen.sort_unstable();
        let items: Vec<(EventId, u32)> = chosen
            .into_iter()
            .map(|e| {
                let q = rng.int(
                    u64::from(params.min_quantity),
                    u64::from(params.max_quantity),
                ) as u32;
                (EventId::from_index(e), q)
            })
            .collect();
        builder
            .push_set(t, items.iter().copied())
            .expect("valid set");
        previous = Some(items);
    }
    Ok(builder.build().expect("generated sequences are valid"))
}

/// Limits of [`small_random_instance`].
pub const SMALL_MAX_TIMESTAMPS: usize = 12;
pub const SMALL_MAX_EVENT_TYPES: usize = 5;
pub const SMALL_MAX_QUANTITY: u32 = 3;

/// A tiny instance for exhaustive comparisons: up to 12 timestamps, 5 event
/// types, 3 events per set, quantities up to 3 and external utilities 1..=5.
pub fn small_random_instance(seed: u64) -> ComplexEventSequence {
    small_random_instance_with(seed, 0.15)
}

pub fn small_random_instance_with(
    seed: u64,
    duplicate_set_probability: f64,
) -> ComplexEventSequence {
    let mut rng = Draw(ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5A11));
    let timestamps = rng.int(1, SMALL_MAX_TIMESTAMPS as u64) as usize;
    let event_types = rng.int(1, SMALL_MAX_EVENT_TYPES as u64) as usize;
    let params = GenParams {
        seed,
        timestamps,
        event_types,
        min_set_size: 1,
        max_set_size: event_types.min(3),
        min_quantity: 1,
        max_quantity: SMALL_MAX_QUANTITY,
        utility: UtilityDistribution::Uniform { min: 1, max: 5 },
        duplicate_set_probability,
    };
    generate(&params).expect("small parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_native;

    #[test]
    fn deterministic_for_a_seed() {
        let p = GenParams {
            seed: 7,
            timestamps: 200,
            event_types: 30,
            ..Default::default()
        };
        let a = write_native(&generate(&p).unwrap());
        let b = write_native(&generate(&p).unwrap());
        assert_eq!(a, b);
        let c = write_native(&generate(&GenParams { seed: 8, ..p }).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn pinned_stream() {
        // First draws of the pinned generator for seed 0; guards against
        // accidental changes to the draw order or the generator.
        let ces = generate(&GenParams {
            seed: 0,
            timestamps: 3,
            event_types: 4,
            max_set_size: 2,
            ..Default::default()
        })
        .unwrap();
        let frozen = write_native(&ces);
        assert_eq!(frozen, PINNED_SEED0);
    }

    const PINNED_SEED0: &str =
        "@EVENT A 22\n@EVENT B 422\n@EVENT C 14\n@EVENT D 562\n1|A:1\n2|C:2 D:1\n3|B:3\n";

    #[test]
    fn ranges_are_respected() {
        let p = GenParams {
            seed: 3,
            timestamps: 2000,
            event_types: 60,
            max_set_size: 6,
            ..Default::default()
        };
        let ces = generate(&p).unwrap();
        let mut seen = [false; 6];
        for set in ces.sets() {
            assert!((1..=6).contains(&set.items().len()));
            for item in set.items() {
                assert!((1..=5).contains(&item.quantity));
                seen[item.quantity as usize] = true;
            }
        }
        assert!(seen[1..].iter().all(|&s| s));
        for e in ces.catalog().ids() {
            assert!((1..=1000).contains(&ces.catalog().external_utility(e)));
        }
        assert_eq!(
            ces.catalog().name(ces.catalog().ids().next().unwrap()),
            "e00"
        );
    }

    #[test]
    fn quantity_distribution_covers_range() {
        let mut rng = Draw(ChaCha8Rng::seed_from_u64(1));
        let mut seen = [0usize; 6];
        for _ in 0..10_000 {
            seen[rng.int(1, 5) as usize] += 1;
        }
        assert!(seen[1..].iter().all(|&n| n > 1500));
    }

    #[test]
    fn rejects_bad_params() {
        let p = GenParams {
            event_types: 2,
            max_set_size: 5,
            ..Default::default()
        };
        assert!(generate(&p).is_err());
        assert!(generate(&GenParams {
            timestamps: 0,
            ..Default::default()
        })
        .is_err());
        assert!(generate(&GenParams {
            min_quantity: 0,
            ..Default::default()
        })
        .is_err());
        assert!(generate(&GenParams {
            duplicate_set_probability: 1.5,
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn small_instances_stay_within_limits() {
        let mut distinct = std::collections::HashSet::new();
        for seed in 1..=200 {
            let ces = small_random_instance(seed);
            assert!(
                ces.len() <= SMALL_MAX_TIMESTAMPS && ces.catalog().len() <= SMALL_MAX_EVENT_TYPES
            );
            assert!(ces
                .sets()
                .iter()
                .flat_map(|s| s.items())
                .all(|i| i.quantity <= SMALL_MAX_QUANTITY));
            distinct.insert(write_native(&ces));
        }
        assert_eq!(distinct.len(), 200);
    }

    #[test]
    fn forced_duplicate_sets() {
        for seed in 0..20 {
            let ces = small_random_instance_with(seed, 1.0);
            if ces.len() >= 2 {
                let first: Vec<_> = ces.sets()[0]
                    .items()
                    .iter()
                    .map(|i| (i.event, i.quantity))
                    .collect();
                let second: Vec<_> = ces.sets()[1]
                    .items()
                    .iter()
                    .map(|i| (i.event, i.quantity))
                    .collect();
                assert_eq!(first, second);
            }
        }
    }
}
