mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vuza_core::model::cuts_for_solution;
use vuza_core::polynomial::CandidateRange;
use vuza_core::rhythm::parse_element_list;
use vuza_core::{
    build_master_problem, classify_order, cm_report, export_lp, BuildOptions, CsaOptions, CutBatch, EquivalenceMode,
    Existence, Limits, Rhythm, Status,
};

use output::{write_output, CheckDoc, EnumerationDoc, ExistsDoc};

#[derive(Parser, Debug)]
#[command(name = "vuza", version, about = "Aperiodic tiling complements in cyclic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every aperiodic complement of a rhythm, up to equivalence.
    Enumerate(EnumerateArgs),
    /// Decide whether a rhythm has an aperiodic complement.
    Exists(ExistsArgs),
    /// Coven-Meyerowitz report for a rhythm, or good/bad class of a group order.
    Check(CheckArgs),
    /// Write the binary model as LP text.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone)]
struct RhythmArgs {
    /// Period of the cyclic group.
    #[arg(long)]
    n: Option<usize>,
    /// Comma separated elements, e.g. 0,8,16.
    #[arg(long, conflicts_with = "rhythm_file")]
    rhythm: Option<String>,
    /// File holding `n: e1,e2,...` or a bare element list.
    #[arg(long)]
    rhythm_file: Option<PathBuf>,
}

impl RhythmArgs {
    fn present(&self) -> bool {
        self.rhythm.is_some() || self.rhythm_file.is_some()
    }

    fn load(&self) -> anyhow::Result<Rhythm> {
        let text = match (&self.rhythm, &self.rhythm_file) {
            (Some(list), _) => list.clone(),
            (None, Some(path)) => {
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
            }
            (None, None) => bail!("a rhythm is required (--rhythm or --rhythm-file)"),
        };
        let text = text.trim();
        if text.contains(':') {
            let r: Rhythm = text.parse()?;
            if let Some(n) = self.n {
                if n != r.period() {
                    bail!("--n {n} disagrees with the period {} in the rhythm file", r.period());
                }
            }
            return Ok(r);
        }
        let Some(n) = self.n else { bail!("--n is required with a bare element list") };
        Ok(Rhythm::new(n, parse_element_list(text)?)?)
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelArgs {
    /// Drop the aperiodicity rows (diagnostic: also finds periodic complements).
    #[arg(long)]
    no_aperiodicity: bool,
    /// Drop the cardinality row.
    #[arg(long)]
    no_cardinality: bool,
    /// Replace the first aperiodicity family with one aggregated row.
    #[arg(long, conflicts_with = "keep_first_family")]
    replace_first_family: bool,
    /// Keep every aperiodicity family in full (the default).
    #[arg(long)]
    keep_first_family: bool,
}

impl ModelArgs {
    fn build_options(self) -> BuildOptions {
        BuildOptions {
            include_cardinality: !self.no_cardinality,
            replace_first_family: self.replace_first_family,
            aperiodicity: !self.no_aperiodicity,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct LimitArgs {
    /// Stop after this many solutions.
    #[arg(long)]
    max_solutions: Option<usize>,
    /// Wall-clock cap in seconds.
    #[arg(long, default_value_t = 3600.0)]
    max_time: f64,
}

impl LimitArgs {
    fn limits(self) -> anyhow::Result<Limits> {
        if !(self.max_time.is_finite() && self.max_time > 0.0) {
            bail!("--max-time must be a positive number of seconds");
        }
        Ok(Limits { max_solutions: self.max_solutions, max_time: Some(Duration::from_secs_f64(self.max_time)) })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EnumerateFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ExistsFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    rhythm: RhythmArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long, default_value_t = EquivalenceMode::Affine)]
    mode: EquivalenceMode,
    /// Cut only the solution found instead of its whole orbit.
    #[arg(long)]
    single_cuts: bool,
    #[arg(long, value_enum, default_value_t = EnumerateFormat::Json)]
    format: EnumerateFormat,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExistsArgs {
    #[command(flatten)]
    rhythm: RhythmArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long, value_enum, default_value_t = ExistsFormat::Text)]
    format: ExistsFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    rhythm: RhythmArgs,
    /// Classify a group order instead of a rhythm.
    #[arg(long, conflicts_with_all = ["rhythm", "rhythm_file"])]
    order: Option<u64>,
    /// Test every cyclotomic factor up to the degree, not only divisors of n.
    #[arg(long)]
    full_range: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    rhythm: RhythmArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Enumeration JSON whose solutions are added as cut rows.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Exists(args) => cmd_exists(args),
        Command::Check(args) => cmd_check(args),
        Command::Export(args) => cmd_export(args),
    }
}

fn cmd_enumerate(args: EnumerateArgs) -> anyhow::Result<u8> {
    let a = args.rhythm.load()?;
    let opts = CsaOptions {
        build: args.model.build_options(),
        batch: if args.single_cuts { CutBatch::Single } else { CutBatch::FullOrbit },
        ..Default::default()
    };
    let limits = args.limits.limits()?;
    let e = vuza_core::run_csa_with(&a, args.mode, limits, opts)?;
    let doc = EnumerationDoc::new(&e, &opts, &limits);
    let text = match args.format {
        EnumerateFormat::Json => doc.to_json()?,
        EnumerateFormat::Csv => doc.times_csv()?,
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(match e.status {
        Status::Complete => 0,
        Status::LimitReached => 2,
    })
}

fn cmd_exists(args: ExistsArgs) -> anyhow::Result<u8> {
    let a = args.rhythm.load()?;
    let opts = CsaOptions { build: args.model.build_options(), ..Default::default() };
    let (answer, stats) = vuza_core::exists_aperiodic_complement_with(&a, args.limits.limits()?, opts)?;
    let text = match args.format {
        ExistsFormat::Text => match &answer {
            Existence::Yes(b) => format!("yes\n{b}\n"),
            Existence::No => "no\n".to_string(),
            Existence::Unknown => "unknown\n".to_string(),
        },
        ExistsFormat::Json => ExistsDoc::new(&a, &answer, &stats).to_json()?,
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(match answer {
        Existence::Yes(_) => 0,
        Existence::No => 3,
        Existence::Unknown => 2,
    })
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<u8> {
    let doc = if let Some(order) = args.order {
        if order == 0 {
            bail!("--order must be positive");
        }
        CheckDoc::order_only(classify_order(order))
    } else {
        let r = args.rhythm.load()?;
        let range = if args.full_range { CandidateRange::Full } else { CandidateRange::DivisorsOfPeriod };
        let report = cm_report(&r, range);
        CheckDoc::rhythm(&r, report, classify_order(r.period() as u64))
    };
    write_output(args.out.as_deref(), &doc.to_json()?)?;
    Ok(0)
}

fn cmd_export(args: ExportArgs) -> anyhow::Result<u8> {
    let state = match &args.state {
        Some(path) => Some(EnumerationDoc::load(path)?),
        None => None,
    };
    let a = match (&state, args.rhythm.present()) {
        (Some(doc), false) => doc.inner_rhythm()?,
        (Some(doc), true) => {
            let a = args.rhythm.load()?;
            if a != doc.inner_rhythm()? {
                bail!("the rhythm differs from the one recorded in the state file");
            }
            a
        }
        (None, _) => args.rhythm.load()?,
    };
    let mut sys = build_master_problem(&a, args.model.build_options())?;
    if let Some(doc) = &state {
        for b in doc.solution_rhythms()? {
            for cut in cuts_for_solution(&b, doc.mode)? {
                sys.push_row(cut)?;
            }
        }
    }
    write_output(args.out.as_deref(), &export_lp(&sys))?;
    Ok(0)
}
