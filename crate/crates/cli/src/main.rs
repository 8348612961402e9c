mod alloc;
mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thue::datagen::{generate, GenParams, UtilityDistribution};
use thue::io::{parse_native, parse_transactions, write_native};
use thue::miner::{ExpansionOrder, InitStrategies, UtilityRatio, DEFAULT_DEPTH_CAP};
use thue::occurrence::{ewu_opt_total, MtdSemantics};
use thue::oracle::{check_bound_soundness_with, enumerate_all, enumerate_all_forced, OracleError};
use thue::report::ResultReport;
use thue::{
    mine, BoundKind, ComplexEventSequence, InitSoundness, MinUtil, MineError, MiningConfig, Mtd,
    RuMode, Variant,
};

use report::{BenchRow, CheckReport, ConfigEcho, Environment, ReportFormat, RunReport};

#[global_allocator]
static GLOBAL: alloc::Counting = alloc::Counting;

#[derive(Parser)]
#[command(name = "thue", version, about = "Top-k high-utility episode mining")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the top-k episodes, or every episode above a fixed threshold.
    Mine(MineArgs),
    /// Compare the miner with the exhaustive oracle on a small instance.
    OracleCheck(OracleArgs),
    /// Run several variants over a list of k values and tabulate the stats.
    Bench(BenchArgs),
    /// Convert a transaction file to the native format.
    Convert(ConvertArgs),
    /// Write a seeded synthetic sequence in the native format.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Native,
    Spmf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitFlag {
    Riu,
    Rtu,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsFlag {
    Inclusive,
    Exclusive,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuFlag {
    Strict,
    Compat,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundFlag {
    Opt,
    Original,
}

#[derive(Clone, Copy, ValueEnum)]
enum SoundnessFlag {
    Safe,
    /// Undeduplicated witness lists; may overshoot the true k-th utility.
    #[value(name = "paper", alias = "unchecked")]
    Unchecked,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderFlag {
    SerialFirst,
    SimultFirst,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    /// Drop the lowest-ranked miner result before comparing.
    DropLast,
}

#[derive(Args)]
struct InputArgs {
    /// Sequence file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "native")]
    format: InputFormat,
}

#[derive(Args)]
struct SearchArgs {
    /// Maximum time duration.
    #[arg(long, default_value_t = 2)]
    mtd: u64,
    #[arg(long, value_enum, default_value = "inclusive")]
    mtd_semantics: SemanticsFlag,
    #[arg(long, value_enum)]
    ru_mode: Option<RuFlag>,
    #[arg(long, value_enum)]
    bound: Option<BoundFlag>,
    /// Witness lists for the initial threshold, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    init: Option<Vec<InitFlag>>,
    #[arg(long, value_enum)]
    init_soundness: Option<SoundnessFlag>,
    #[arg(long, value_enum)]
    order: Option<OrderFlag>,
    /// Maximum episode length.
    #[arg(long, default_value_t = DEFAULT_DEPTH_CAP)]
    depth_cap: usize,
    /// Expand 1-episode subtrees on a thread pool.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    report: ReportFormat,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of episodes to return.
    #[arg(long, conflicts_with_all = ["min_util", "min_util_ratio"])]
    k: Option<usize>,
    /// Absolute utility threshold.
    #[arg(long, conflicts_with = "min_util_ratio")]
    min_util: Option<u64>,
    /// Threshold as a fraction of the total utility: 0.45, 45% or 9/20.
    #[arg(long)]
    min_util_ratio: Option<String>,
    /// Preset: thue, thue-ewu, thue-rus or baseline. Other flags override it.
    #[arg(long)]
    variant: Option<String>,
    #[command(flatten)]
    search: SearchArgs,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    search: SearchArgs,
    /// Skip the instance size guard.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, hide = true)]
    fault: Option<Fault>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    /// k values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Variants, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "thue,thue-ewu,thue-rus")]
    variants: Vec<String>,
    #[arg(long, default_value_t = 2)]
    mtd: u64,
    #[arg(long, value_enum, default_value = "inclusive")]
    mtd_semantics: SemanticsFlag,
    #[arg(long, value_enum, default_value = "strict")]
    ru_mode: RuFlag,
    /// Per-run wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    timestamps: usize,
    #[arg(long, default_value_t = 50)]
    event_types: usize,
    #[arg(long, default_value_t = 1)]
    min_set_size: usize,
    #[arg(long, default_value_t = 5)]
    max_set_size: usize,
    #[arg(long, default_value_t = 1)]
    min_quantity: u32,
    #[arg(long, default_value_t = 5)]
    max_quantity: u32,
    #[arg(long, default_value_t = 0.0)]
    lognormal_mu: f64,
    #[arg(long, default_value_t = 1.0)]
    lognormal_sigma: f64,
    #[arg(long, default_value_t = 100.0)]
    utility_scale: f64,
    #[arg(long, default_value_t = 0.0)]
    duplicate_prob: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Mismatch(String),
    Usage(String),
    Parse(String),
    Guard(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Guard(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Mismatch(m) | Failure::Usage(m) | Failure::Parse(m) | Failure::Guard(m) => m,
        }
    }
}

impl From<MineError> for Failure {
    fn from(e: MineError) -> Self {
        match e {
            MineError::InvalidConfig(_) => Failure::Usage(e.to_string()),
            MineError::DepthCapExceeded { .. } | MineError::Timeout { .. } => {
                Failure::Guard(e.to_string())
            }
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::Guard(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mine(a) => cmd_mine(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("thue: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn read_input(input: &InputArgs) -> Result<ComplexEventSequence, Failure> {
    let text = fs::read_to_string(&input.input)
        .map_err(|e| Failure::Parse(format!("{}: {e}", input.input.display())))?;
    let parsed = match input.format {
        InputFormat::Native => parse_native(&text),
        InputFormat::Spmf => parse_transactions(&text),
    };
    parsed.map_err(|e| Failure::Parse(format!("{}: {e}", input.input.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

fn parse_timeout(secs: Option<f64>) -> Result<Option<Duration>, Failure> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s).map_err(|_| Failure::Usage(format!("invalid timeout {s}")))
    })
    .transpose()
}

fn mtd_of(duration: u64, sem: SemanticsFlag) -> Mtd {
    Mtd {
        duration,
        semantics: match sem {
            SemanticsFlag::Inclusive => MtdSemantics::Inclusive,
            SemanticsFlag::Exclusive => MtdSemantics::Exclusive,
        },
    }
}

fn ru_of(flag: RuFlag) -> RuMode {
    match flag {
        RuFlag::Strict => RuMode::Strict,
        RuFlag::Compat => RuMode::Compat,
    }
}

/// Applies explicit search flags over a preset configuration.
fn apply_search(cfg: &mut MiningConfig, s: &SearchArgs) {
    if let Some(r) = s.ru_mode {
        cfg.ru_mode = ru_of(r);
    }
    if let Some(b) = s.bound {
        cfg.bound = match b {
            BoundFlag::Opt => BoundKind::Opt,
            BoundFlag::Original => BoundKind::Original,
        };
    }
    if let Some(init) = &s.init {
        cfg.init = InitStrategies {
            riu: init.contains(&InitFlag::Riu),
            rtu: init.contains(&InitFlag::Rtu),
        };
    }
    if let Some(sound) = s.init_soundness {
        cfg.init_soundness = match sound {
            SoundnessFlag::Safe => InitSoundness::Safe,
            SoundnessFlag::Unchecked => InitSoundness::Unchecked,
        };
    }
    if let Some(o) = s.order {
        cfg.order = match o {
            OrderFlag::SerialFirst => ExpansionOrder::SerialFirst,
            OrderFlag::SimultFirst => ExpansionOrder::SimultFirst,
        };
    }
    cfg.depth_cap = s.depth_cap;
    cfg.parallel = s.parallel;
}

fn parse_variant(name: &str) -> Result<Variant, Failure> {
    name.parse()
        .map_err(|e: MineError| Failure::Usage(e.to_string()))
}

fn cmd_mine(a: MineArgs) -> Result<(), Failure> {
    let mtd = mtd_of(a.search.mtd, a.search.mtd_semantics);
    let variant = a.variant.as_deref().map(parse_variant).transpose()?;
    let fixed = match (a.min_util, &a.min_util_ratio) {
        (Some(u), _) => Some(MinUtil::Absolute(u)),
        (None, Some(r)) => Some(MinUtil::Ratio(
            r.parse::<UtilityRatio>()
                .map_err(|e| Failure::Usage(e.to_string()))?,
        )),
        (None, None) => None,
    };
    let mut cfg = match (fixed, a.k) {
        (Some(m), _) => {
            let mut cfg = MiningConfig::variant(variant.unwrap_or(Variant::Thue), 1, mtd);
            cfg.fixed_min_util = Some(m);
            cfg.init = InitStrategies::NONE;
            cfg
        }
        (None, Some(k)) => MiningConfig::variant(variant.unwrap_or(Variant::Thue), k, mtd),
        (None, None) => {
            return Err(Failure::Usage(
                "either --k or a minimum utility is required".into(),
            ))
        }
    };
    apply_search(&mut cfg, &a.search);
    cfg.timeout = parse_timeout(a.timeout)?;
    cfg.validate()?;
    let ces = read_input(&a.input)?;

    let baseline = alloc::reset();
    let mut result = mine(&ces, &cfg)?;
    result.stats.peak_tracked_bytes = Some(alloc::peak_since(baseline));

    let run = RunReport {
        command: "mine".into(),
        input: a.input.input.display().to_string(),
        config: ConfigEcho::new(&cfg, variant),
        total_utility: ces.total_utility(),
        result: ResultReport::from_hue(&result, ces.catalog()),
        environment: Environment::current(),
    };
    write_output(a.output.out.as_deref(), &run.render(a.output.report))
}

fn cmd_oracle_check(a: OracleArgs) -> Result<(), Failure> {
    let mtd = mtd_of(a.search.mtd, a.search.mtd_semantics);
    let mut cfg = MiningConfig::new(a.k, mtd);
    apply_search(&mut cfg, &a.search);
    cfg.validate()?;
    let ces = read_input(&a.input)?;
    let report = if a.force {
        enumerate_all_forced(&ces, mtd)
    } else {
        enumerate_all(&ces, mtd)?
    };
    let mut mined = mine(&ces, &cfg)?;
    if let Some(Fault::DropLast) = a.fault {
        mined.episodes.pop();
    }
    let miner = ResultReport::from_hue(&mined, ces.catalog());
    let oracle = ResultReport::from_oracle(report.top_k(a.k), ces.catalog());
    let violations: Vec<String> = check_bound_soundness_with(&report, |alpha| {
        ewu_opt_total(alpha, &ces, mtd, cfg.ru_mode)
    })
    .into_iter()
    .map(|v| {
        format!(
            "{} exceeds the bound of {}: {} > {}",
            v.descendant.display(ces.catalog()),
            v.ancestor.display(ces.catalog()),
            v.utility,
            v.bound
        )
    })
    .collect();
    let check = CheckReport::new(miner, oracle, violations);
    write_output(a.output.out.as_deref(), &check.render(a.output.report))?;
    if check.agree {
        Ok(())
    } else {
        Err(Failure::Mismatch(check.diff.join("; ")))
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let mtd = mtd_of(a.mtd, a.mtd_semantics);
    let variants = a
        .variants
        .iter()
        .map(|v| parse_variant(v))
        .collect::<Result<Vec<_>, _>>()?;
    let timeout = parse_timeout(a.timeout)?;
    if a.k.contains(&0) {
        return Err(Failure::Usage("k must be at least 1".into()));
    }
    let ces = read_input(&a.input)?;
    let mut rows = Vec::new();
    for &v in &variants {
        for &k in &a.k {
            let mut cfg = MiningConfig::variant(v, k, mtd);
            cfg.ru_mode = ru_of(a.ru_mode);
            cfg.timeout = timeout;
            let baseline = alloc::reset();
            let outcome = mine(&ces, &cfg);
            let peak = alloc::peak_since(baseline);
            rows.push(match outcome {
                Ok(r) => BenchRow::finished(v, k, &r.stats, r.utilities(), peak),
                Err(MineError::Timeout { .. }) => BenchRow::timed_out(v, k),
                Err(e) => return Err(e.into()),
            });
        }
    }
    write_output(
        a.output.out.as_deref(),
        &report::render_bench(&rows, a.output.report),
    )
}

fn cmd_convert(a: ConvertArgs) -> Result<(), Failure> {
    let ces = read_input(&a.input)?;
    write_output(a.out.as_deref(), &write_native(&ces))
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let params = GenParams {
        seed: a.seed,
        timestamps: a.timestamps,
        event_types: a.event_types,
        min_set_size: a.min_set_size,
        max_set_size: a.max_set_size,
        min_quantity: a.min_quantity,
        max_quantity: a.max_quantity,
        utility: UtilityDistribution::LogNormal {
            mu: a.lognormal_mu,
            sigma: a.lognormal_sigma,
            scale: a.utility_scale,
        },
        duplicate_set_probability: a.duplicate_prob,
    };
    let ces = generate(&params).map_err(|e| Failure::Usage(e.to_string()))?;
    write_output(a.out.as_deref(), &write_native(&ces))
}
