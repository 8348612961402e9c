//! Report types and their JSON, CSV and text renderings.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thue::miner::MiningStats;
use thue::report::ResultReport;
use thue::{MiningConfig, Utility, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    pub mining: MiningConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

impl ConfigEcho {
    pub fn new(cfg: &MiningConfig, variant: Option<Variant>) -> Self {
        ConfigEcho {
            variant,
            mining: MiningConfig {
                timeout: None,
                ..cfg.clone()
            },
            timeout_ms: cfg.timeout.map(|t| t.as_millis() as u64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub host: String,
    pub build: String,
    pub threads: usize,
    pub note: String,
}

impl Environment {
    pub fn current() -> Self {
        let host = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
            .map(|h| h.trim().to_string())
            .filter(|h| !h.is_empty())
            .unwrap_or_else(|| "unknown".into());
        let profile = if cfg!(debug_assertions) {
            "debug"
        } else {
            "release"
        };
        Environment {
            host,
            build: format!("thue {} ({profile})", env!("CARGO_PKG_VERSION")),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            note: "elapsed and peak_tracked_bytes are timing fields; peak bytes count live heap requests only".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub input: String,
    pub config: ConfigEcho,
    pub total_utility: Utility,
    pub result: ResultReport,
    pub environment: Environment,
}

impl RunReport {
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => json(self),
            ReportFormat::Csv => episodes_csv(&self.result),
            ReportFormat::Text => {
                let mut out = String::new();
                for (i, e) in self.result.episodes.iter().enumerate() {
                    out.push_str(&format!(
                        "{:>4}  {:>10}  {:>4}  {}\n",
                        i + 1,
                        e.utility,
                        e.mo_count,
                        e.episode
                    ));
                }
                if let Some(s) = &self.result.stats {
                    out.push_str(&format!(
                        "episodes {}  total utility {}  candidates {}  min util {} -> {}  elapsed {} us\n",
                        self.result.episodes.len(),
                        self.total_utility,
                        s.candidates_generated,
                        s.initial_min_util,
                        s.final_min_util,
                        s.elapsed_us
                    ));
                }
                out
            }
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn episodes_csv(result: &ResultReport) -> String {
    let rows = result
        .episodes
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mos: Vec<String> = e
                .mo_set
                .iter()
                .map(|o| format!("[{},{}]", o.start, o.end))
                .collect();
            vec![
                (i + 1).to_string(),
                e.episode.clone(),
                e.utility.to_string(),
                e.mo_count.to_string(),
                mos.join(" "),
            ]
        })
        .collect();
    csv_text(&["rank", "episode", "utility", "mo_count", "mo_set"], rows)
}

/// Outcome of comparing the miner with the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub agree: bool,
    pub miner: ResultReport,
    pub oracle: ResultReport,
    pub bound_violations: Vec<String>,
    pub diff: Vec<String>,
}

impl CheckReport {
    pub fn new(miner: ResultReport, oracle: ResultReport, bound_violations: Vec<String>) -> Self {
        let (m, o) = (miner.utilities(), oracle.utilities());
        let mut diff = Vec::new();
        for i in 0..m.len().max(o.len()) {
            let show = |v: Option<&Utility>| v.map_or("-".to_string(), |u| u.to_string());
            if m.get(i) != o.get(i) {
                diff.push(format!(
                    "rank {}: miner {} oracle {}",
                    i + 1,
                    show(m.get(i)),
                    show(o.get(i))
                ));
            }
        }
        diff.extend(bound_violations.iter().cloned());
        CheckReport {
            agree: diff.is_empty(),
            miner,
            oracle,
            bound_violations,
            diff,
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => json(self),
            ReportFormat::Csv => {
                let (m, o) = (self.miner.utilities(), self.oracle.utilities());
                let rows = (0..m.len().max(o.len()))
                    .map(|i| {
                        let cell =
                            |v: Option<&Utility>| v.map_or("-".to_string(), |u| u.to_string());
                        vec![(i + 1).to_string(), cell(m.get(i)), cell(o.get(i))]
                    })
                    .collect();
                csv_text(&["rank", "miner", "oracle"], rows)
            }
            ReportFormat::Text => {
                let mut out = format!(
                    "{}: miner {:?}, oracle {:?}, {} bound violations\n",
                    if self.agree { "agree" } else { "MISMATCH" },
                    self.miner.utilities(),
                    self.oracle.utilities(),
                    self.bound_violations.len()
                );
                for line in &self.diff {
                    out.push_str(&format!("  {line}\n"));
                }
                out
            }
        }
    }
}

/// One (variant, k) run of the bench command. Timed-out runs leave the
/// measurement fields empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub variant: Variant,
    pub k: usize,
    pub status: String,
    pub candidates: Option<u64>,
    pub initial_min_util: Option<Utility>,
    pub final_min_util: Option<Utility>,
    pub elapsed_us: Option<u64>,
    pub peak_tracked_bytes: Option<u64>,
    pub utilities: Option<Vec<Utility>>,
}

impl BenchRow {
    pub fn finished(
        variant: Variant,
        k: usize,
        stats: &MiningStats,
        utilities: Vec<Utility>,
        peak: u64,
    ) -> Self {
        BenchRow {
            variant,
            k,
            status: "ok".into(),
            candidates: Some(stats.candidates_generated),
            initial_min_util: Some(stats.initial_min_util),
            final_min_util: Some(stats.final_min_util),
            elapsed_us: Some(stats.elapsed_us),
            peak_tracked_bytes: Some(peak),
            utilities: Some(utilities),
        }
    }

    pub fn timed_out(variant: Variant, k: usize) -> Self {
        BenchRow {
            variant,
            k,
            status: "timeout".into(),
            candidates: None,
            initial_min_util: None,
            final_min_util: None,
            elapsed_us: None,
            peak_tracked_bytes: None,
            utilities: None,
        }
    }
}

/// JSON shape of the bench command: per-variant stats plus the environment.
#[derive(Serialize)]
struct BenchReport<'a> {
    rows: &'a [BenchRow],
    environment: Environment,
}

pub fn render_bench(rows: &[BenchRow], format: ReportFormat) -> String {
    let cell = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.variant.to_string(),
                r.k.to_string(),
                r.status.clone(),
                cell(r.candidates),
                cell(r.initial_min_util),
                cell(r.final_min_util),
                cell(r.elapsed_us),
                cell(r.peak_tracked_bytes),
            ]
        })
        .collect();
    let header = [
        "variant",
        "k",
        "status",
        "candidates",
        "initial_min_util",
        "final_min_util",
        "elapsed_us",
        "peak_tracked_bytes",
    ];
    match format {
        ReportFormat::Json => json(&BenchReport {
            rows,
            environment: Environment::current(),
        }),
        ReportFormat::Csv => csv_text(&header, table),
        ReportFormat::Text => {
            let mut out = header.join("\t");
            out.push('\n');
            for row in table {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
            out
        }
    }
}
