//! Text formats.
//!
//! Native format (UTF-8, LF-terminated):
//!
//! ```text
//! # comment
//! @EVENT A 2
//! @EVENT B 1
//! 1|A:1
//! 2|A:2 B:3
//! ```
//!
//! A data item may carry an explicit utility, `A:1=7`, which overrides
//! `p(e) * q` for that occurrence. Converted transaction databases use it.
//!
//! Transaction format: `<items>:<transaction utility>:<item utilities>` per
//! line; line `n` becomes the simultaneous event set at timestamp `n`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::event::{
    is_valid_name, ComplexEventSequence, EventCatalog, ModelError, SequenceBuilder, Timestamp,
    Utility,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {kind}")]
    Line { line: usize, kind: LineError },
    #[error("empty sequence")]
    EmptySequence,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LineError {
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{items} items but {utilities} utilities")]
    UtilityCountMismatch { items: usize, utilities: usize },
    #[error("transaction utility {declared} does not match item utilities summing to {computed}")]
    TransactionUtilityMismatch {
        declared: Utility,
        computed: Utility,
    },
}

fn line_err(line: usize, kind: impl Into<LineError>) -> ParseError {
    ParseError::Line {
        line,
        kind: kind.into(),
    }
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    line_err(line, LineError::Malformed(msg.into()))
}

struct DataLine<'a> {
    line: usize,
    timestamp: Timestamp,
    items: Vec<(&'a str, u32, Option<Utility>)>,
}

/// Parses a sequence in the native format.
pub fn parse_native(text: &str) -> Result<ComplexEventSequence, ParseError> {
    let mut catalog_entries: Vec<(String, Utility)> = Vec::new();
    let mut catalog_lines: HashMap<String, usize> = HashMap::new();
    let mut data = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("@EVENT") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if !rest.starts_with(char::is_whitespace) || fields.len() != 2 {
                return Err(malformed(line, "expected `@EVENT <id> <external-utility>`"));
            }
            let name = fields[0];
            if !is_valid_name(name) {
                return Err(line_err(
                    line,
                    ModelError::InvalidEventName(name.to_string()),
                ));
            }
            let p: Utility = fields[1].parse().map_err(|_| {
                malformed(line, format!("invalid external utility `{}`", fields[1]))
            })?;
            if catalog_lines.insert(name.to_string(), line).is_some() {
                return Err(line_err(
                    line,
                    ModelError::DuplicateCatalogEntry(name.to_string()),
                ));
            }
            catalog_entries.push((name.to_string(), p));
            continue;
        }
        data.push(parse_data_line(line, trimmed)?);
    }

    let catalog = EventCatalog::new(catalog_entries).map_err(|e| line_err(0, e))?;
    let mut builder = SequenceBuilder::new(catalog);
    for dl in data {
        let mut resolved = Vec::with_capacity(dl.items.len());
        for (name, qty, explicit) in dl.items {
            let id = builder
                .catalog()
                .id(name)
                .ok_or_else(|| line_err(dl.line, ModelError::UnknownEvent(name.to_string())))?;
            let utility = match explicit {
                Some(u) => u,
                None => builder
                    .catalog()
                    .external_utility(id)
                    .checked_mul(Utility::from(qty))
                    .ok_or_else(|| line_err(dl.line, ModelError::Overflow))?,
            };
            resolved.push((id, qty, utility));
        }
        builder
            .push_set_with_utilities(dl.timestamp, resolved)
            .map_err(|e| line_err(dl.line, e))?;
    }
    builder.build().map_err(|e| line_err(0, e))
}

fn parse_data_line(line: usize, text: &str) -> Result<DataLine<'_>, ParseError> {
    let (ts, rest) = text
        .split_once('|')
        .ok_or_else(|| malformed(line, "expected `<timestamp>|<id>:<qty> ...`"))?;
    let timestamp: Timestamp = ts
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("invalid timestamp `{}`", ts.trim())))?;
    let mut items = Vec::new();
    for tok in rest.split_whitespace() {
        let (name, qty_part) = tok
            .split_once(':')
            .ok_or_else(|| malformed(line, format!("item `{tok}` is not `<id>:<qty>`")))?;
        let (qty, explicit) = match qty_part.split_once('=') {
            Some((q, u)) => {
                let u: Utility = u
                    .parse()
                    .map_err(|_| malformed(line, format!("invalid utility in `{tok}`")))?;
                (q, Some(u))
            }
            None => (qty_part, None),
        };
        let qty: u32 = qty
            .parse()
            .map_err(|_| malformed(line, format!("invalid quantity in `{tok}`")))?;
        if qty == 0 {
            return Err(line_err(line, ModelError::ZeroQuantity(name.to_string())));
        }
        items.push((name, qty, explicit));
    }
    if items.is_empty() {
        return Err(line_err(line, ModelError::EmptySet(timestamp)));
    }
    Ok(DataLine {
        line,
        timestamp,
        items,
    })
}

/// Serializes a sequence in the native format. Utilities that differ from
/// `p(e) * q` are written as explicit overrides.
pub fn write_native(ces: &ComplexEventSequence) -> String {
    let catalog = ces.catalog();
    let mut out = String::new();
    for id in catalog.ids() {
        let _ = writeln!(
            out,
            "@EVENT {} {}",
            catalog.name(id),
            catalog.external_utility(id)
        );
    }
    for set in ces.sets() {
        let _ = write!(out, "{}|", set.timestamp());
        for (i, it) in set.items().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}:{}", catalog.name(it.event), it.quantity);
            let natural = catalog
                .external_utility(it.event)
                .checked_mul(Utility::from(it.quantity));
            if natural != Some(it.utility) {
                let _ = write!(out, "={}", it.utility);
            }
        }
        out.push('\n');
    }
    out
}

/// Parses an SPMF-style high-utility transaction database. Each item becomes
/// an event with quantity 1 and its absolute utility as a per-occurrence
/// override; the catalog's external utility of an item is its utility at its
/// first occurrence.
pub fn parse_transactions(text: &str) -> Result<ComplexEventSequence, ParseError> {
    let mut rows: Vec<(usize, Vec<(&str, Utility)>)> = Vec::new();
    let mut first_seen: BTreeMap<&str, Utility> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with(['#', '%', '@']) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(':').collect();
        if fields.len() != 3 {
            return Err(malformed(
                line,
                "expected `<items>:<transaction-utility>:<item-utilities>`",
            ));
        }
        let items: Vec<&str> = fields[0].split_whitespace().collect();
        let declared: Utility = fields[1].trim().parse().map_err(|_| {
            malformed(
                line,
                format!("invalid transaction utility `{}`", fields[1].trim()),
            )
        })?;
        let utilities = fields[2]
            .split_whitespace()
            .map(|u| {
                u.parse::<Utility>()
                    .map_err(|_| malformed(line, format!("invalid item utility `{u}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if items.len() != utilities.len() {
            return Err(line_err(
                line,
                LineError::UtilityCountMismatch {
                    items: items.len(),
                    utilities: utilities.len(),
                },
            ));
        }
        if items.is_empty() {
            return Err(malformed(line, "transaction without items"));
        }
        let computed = utilities
            .iter()
            .try_fold(0 as Utility, |acc, &u| acc.checked_add(u))
            .ok_or_else(|| line_err(line, ModelError::Overflow))?;
        if computed != declared {
            return Err(line_err(
                line,
                LineError::TransactionUtilityMismatch { declared, computed },
            ));
        }
        for (&name, &u) in items.iter().zip(&utilities) {
            if !is_valid_name(name) {
                return Err(line_err(
                    line,
                    ModelError::InvalidEventName(name.to_string()),
                ));
            }
            first_seen.entry(name).or_insert(u);
        }
        rows.push((line, items.into_iter().zip(utilities).collect()));
    }
    if rows.is_empty() {
        return Err(ParseError::EmptySequence);
    }
    let catalog = EventCatalog::new(first_seen.iter().map(|(n, u)| (n.to_string(), *u)))
        .map_err(|e| line_err(0, e))?;
    let mut builder = SequenceBuilder::new(catalog);
    for (n, (line, row)) in rows.into_iter().enumerate() {
        let resolved: Vec<_> = row
            .into_iter()
            .map(|(name, u)| (builder.catalog().id(name).expect("collected above"), 1, u))
            .collect();
        builder
            .push_set_with_utilities(n as Timestamp + 1, resolved)
            .map_err(|e| line_err(line, e))?;
    }
    builder.build().map_err(|e| line_err(0, e))
}
