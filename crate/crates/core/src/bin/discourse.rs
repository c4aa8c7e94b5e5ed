use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use discourse::report::{self, RunConfig, Stage};
use discourse::synthetic;

#[derive(Parser)]
#[command(
    name = "discourse",
    version,
    about = "Discourse analytics pipeline over a line-delimited tweet corpus"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(short, long, global = true, default_value = "run.toml")]
    config: PathBuf,
    /// Output directory; overrides the config file and DISCOURSE_OUT_DIR.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    begin: Option<NaiveDate>,
    #[arg(long, global = true)]
    end: Option<NaiveDate>,
    #[arg(long, global = true)]
    lang: Option<String>,
    #[arg(long, global = true)]
    query: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    penalty: Option<f64>,
    #[arg(long, global = true)]
    peak_multiplier: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest the corpus and build the seed list.
    Expand,
    /// Keep documents that match the seed list.
    Filter,
    /// Score documents and aggregate the daily series.
    Sentiment,
    /// Cluster documents into topics and map them to themes.
    Topics,
    /// Trend, peak and change-point detection with event alignment.
    Analyze,
    /// Plots, section CSVs and the run manifest.
    Report,
    /// All stages in order.
    RunAll,
    /// Write one section of an existing run as CSV.
    Emit {
        #[arg(long)]
        section: String,
    },
    /// Write the synthetic fixture (corpus, vectors, lexicon, run.toml) into DIR.
    GenerateFixture {
        dir: PathBuf,
        #[arg(long, default_value_t = synthetic::DEFAULT_SEED)]
        fixture_seed: u64,
        /// Directory with the phase and event tables, as written into run.toml.
        #[arg(long)]
        data_dir: String,
    },
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            writeln!(
                buf,
                "{} [{}] {} {}",
                chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.3fZ"),
                record.target(),
                record.level(),
                record.args()
            )
        })
        .init();
}

fn load_config(cli: &Cli) -> discourse::Result<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)?.with_env_overrides();
    if let Some(d) = &cli.out_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(b) = cli.begin {
        cfg.begin = b;
    }
    if let Some(e) = cli.end {
        cfg.end = e;
    }
    if let Some(l) = &cli.lang {
        cfg.lang = l.clone();
    }
    if let Some(q) = &cli.query {
        cfg.query = q.clone();
    }
    if let Some(s) = cli.seed {
        cfg.random_seed = s;
    }
    if let Some(p) = cli.penalty {
        cfg.analytics.penalty = Some(p);
    }
    if let Some(m) = cli.peak_multiplier {
        cfg.analytics.peak_multiplier = m;
    }
    if let Some(a) = cli.alpha {
        cfg.analytics.alpha = a;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> discourse::Result<()> {
    if let Command::GenerateFixture {
        dir,
        fixture_seed,
        data_dir,
    } = &cli.command
    {
        let planted = synthetic::write_fixture(dir, *fixture_seed, data_dir)?;
        log::info!(
            target: "fixture",
            "written dir={} relevant={} clusters={:?}",
            dir.display(),
            planted.relevant,
            planted.cluster_sizes
        );
        return Ok(());
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Expand => report::run_stage(&cfg, Stage::Expand),
        Command::Filter => report::run_stage(&cfg, Stage::Filter),
        Command::Sentiment => report::run_stage(&cfg, Stage::Sentiment),
        Command::Topics => report::run_stage(&cfg, Stage::Topics),
        Command::Analyze => report::run_stage(&cfg, Stage::Analyze),
        Command::Report => report::run_stage(&cfg, Stage::Report),
        Command::RunAll => report::run(&cfg).map(|_| ()),
        Command::Emit { section } => {
            cfg.validate()?;
            let bundle = report::load_bundle(&cfg)?;
            let path = report::emit_csv(&bundle, section, &cfg.output_dir)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::GenerateFixture { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!(target: "main", "aborted exit_code={} error=\"{e}\"", e.exit_code());
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
