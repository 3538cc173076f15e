use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use eponym::config::RunConfig;
use eponym::error::Error;
use eponym::pipeline::{
    build_index_cmd, evaluate_cmd, ingest_kg_cmd, ingest_osm_cmd, link_cmd, stats_cmd, train_cmd,
    Baseline, BoundarySource, BuildIndexArgs, EvaluateArgs, IngestKgArgs, IngestOsmArgs, LinkArgs,
    StatsArgs, TrainArgs,
};

/// Link named streets to the persons they were named after.
///
/// Configuration precedence: command-line flags, then the STP_DATA_DIR
/// environment variable (data directory only), then the --config file, then
/// built-in defaults.
#[derive(Parser)]
#[command(name = "eponym", version, about, long_about = None)]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for batch stages (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Log errors only
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonTuning {
    /// Directory with prefixes.txt / suffixes.txt (default: shipped lists)
    #[arg(long, value_name = "DIR")]
    affix_dir: Option<PathBuf>,

    /// Decision threshold in (0, 1)
    #[arg(long)]
    threshold: Option<f64>,

    /// Random seed
    #[arg(long)]
    seed: Option<u64>,

    /// Gradient-descent learning rate
    #[arg(long)]
    learning_rate: Option<f64>,

    /// L2 regularization strength
    #[arg(long)]
    l2: Option<f64>,

    /// Training epochs
    #[arg(long)]
    epochs: Option<u32>,

    /// Hard negatives sampled per street
    #[arg(long, value_name = "K")]
    negatives: Option<usize>,
}

impl CommonTuning {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(dir) = &self.affix_dir {
            config.affix_dir = Some(dir.clone());
        }
        if let Some(threshold) = self.threshold {
            config.threshold = threshold;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
            config.hyper.seed = seed;
        }
        if let Some(lr) = self.learning_rate {
            config.hyper.learning_rate = lr;
        }
        if let Some(l2) = self.l2 {
            config.hyper.l2 = l2;
        }
        if let Some(epochs) = self.epochs {
            config.hyper.epochs = epochs;
        }
        if let Some(negatives) = self.negatives {
            config.negatives_per_street = negatives;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stream a knowledge-graph dump into person, location and ground-truth
    /// record files
    #[command(name = "ingest-kg")]
    IngestKg {
        /// Entity dump (newline-delimited JSON, optionally .gz)
        #[arg(long, value_name = "PATH")]
        dump: PathBuf,

        /// Two-column TSV: entity id, incoming-link count
        #[arg(long, value_name = "PATH")]
        link_counts: Option<PathBuf>,

        /// Output directory for the record files
        #[arg(long, value_name = "DIR")]
        out: PathBuf,

        /// Primary label language
        #[arg(long, value_name = "CODE")]
        language: Option<String>,
    },

    /// Build the index bundle from person and location records
    #[command(name = "build-index")]
    BuildIndex {
        #[arg(long, value_name = "PATH")]
        persons: PathBuf,

        #[arg(long, value_name = "PATH")]
        locations: PathBuf,

        /// Bundle output path
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },

    /// Extract named streets from an OSM XML extract and anchor them into
    /// the location hierarchy
    #[command(name = "ingest-osm")]
    IngestOsm {
        /// OSM XML extract (optionally .gz)
        #[arg(long, value_name = "PATH")]
        extract: PathBuf,

        /// GeoJSON boundary file, or "auto" to assemble polygons from the
        /// extract's boundary relations
        #[arg(long, value_name = "PATH|auto", default_value = "auto")]
        boundaries: String,

        /// Index bundle (for the location hierarchy)
        #[arg(long, value_name = "PATH")]
        bundle: PathBuf,

        /// Two-column TSV (region name, entity id) fallback for streets no
        /// polygon matched
        #[arg(long, value_name = "PATH")]
        region_map: Option<PathBuf>,

        /// Street records output file
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },

    /// Train the street-to-person classifier on ground-truth streets
    Train {
        /// Street records with person references (the ground truth)
        #[arg(long, value_name = "PATH")]
        ground_truth: PathBuf,

        #[arg(long, value_name = "PATH")]
        bundle: PathBuf,

        /// Model output path
        #[arg(long, value_name = "PATH")]
        out: PathBuf,

        /// Also dump the 32-column feature TSV for inspection
        #[arg(long, value_name = "PATH")]
        dump_features: Option<PathBuf>,

        #[command(flatten)]
        tuning: CommonTuning,
    },

    /// Link streets to persons with a trained model
    Link {
        #[arg(long, value_name = "PATH")]
        streets: PathBuf,

        #[arg(long, value_name = "PATH")]
        model: PathBuf,

        #[arg(long, value_name = "PATH")]
        bundle: PathBuf,

        /// links.tsv output path
        #[arg(long, value_name = "PATH")]
        out: PathBuf,

        /// Union candidates over all truncation variants (ablation)
        #[arg(long)]
        union_retrieval: bool,

        /// Keep only the N candidates with the highest link counts
        #[arg(long, value_name = "N")]
        candidate_cap: Option<usize>,

        #[command(flatten)]
        tuning: CommonTuning,
    },

    /// Cross-validate the pipeline (or a baseline) on ground-truth streets
    Evaluate {
        #[arg(long, value_name = "PATH")]
        ground_truth: PathBuf,

        #[arg(long, value_name = "PATH")]
        bundle: PathBuf,

        /// Evaluate a baseline instead of the classifier
        #[arg(long, value_enum)]
        baseline: Option<BaselineArg>,

        /// Cross-validation folds
        #[arg(long, default_value_t = 10)]
        folds: usize,

        /// Report output path (a .tsv twin is written alongside)
        #[arg(long, value_name = "PATH", default_value = "report.txt")]
        report: PathBuf,

        #[command(flatten)]
        tuning: CommonTuning,
    },

    /// Per-region application statistics over streets and links
    Stats {
        #[arg(long, value_name = "PATH")]
        streets: PathBuf,

        #[arg(long, value_name = "PATH")]
        links: PathBuf,

        #[arg(long, value_name = "PATH")]
        bundle: PathBuf,

        /// Region entity ids (comma-separated; falls back to the config)
        #[arg(long, value_delimiter = ',', value_name = "IDS")]
        regions: Vec<String>,

        /// Table output path
        #[arg(long, value_name = "PATH")]
        out: PathBuf,

        #[command(flatten)]
        tuning: CommonTuning,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum BaselineArg {
    Poprank,
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut config = RunConfig::load(cli.config.as_deref())?;

    match cli.command {
        Command::IngestKg {
            dump,
            link_counts,
            out,
            language,
        } => {
            if let Some(language) = language {
                config.language = language;
            }
            config.validate()?;
            ingest_kg_cmd(
                &config,
                &IngestKgArgs {
                    dump: &dump,
                    link_counts: link_counts.as_deref(),
                    out_dir: &out,
                },
            )
        }
        Command::BuildIndex {
            persons,
            locations,
            out,
        } => build_index_cmd(&BuildIndexArgs {
            persons: &persons,
            locations: &locations,
            out: &out,
        }),
        Command::IngestOsm {
            extract,
            boundaries,
            bundle,
            region_map,
            out,
        } => {
            let source = if boundaries == "auto" {
                BoundarySource::Auto
            } else {
                BoundarySource::GeoJson(std::path::Path::new(&boundaries))
            };
            ingest_osm_cmd(&IngestOsmArgs {
                extract: &extract,
                boundaries: source,
                bundle: &bundle,
                region_map: region_map.as_deref(),
                out: &out,
            })
        }
        Command::Train {
            ground_truth,
            bundle,
            out,
            dump_features,
            tuning,
        } => {
            tuning.apply(&mut config);
            config.validate()?;
            train_cmd(
                &config,
                &TrainArgs {
                    ground_truth: &ground_truth,
                    bundle: &bundle,
                    out: &out,
                    dump_features: dump_features.as_deref(),
                },
            )
        }
        Command::Link {
            streets,
            model,
            bundle,
            out,
            union_retrieval,
            candidate_cap,
            tuning,
        } => {
            tuning.apply(&mut config);
            config.validate()?;
            link_cmd(
                &config,
                &LinkArgs {
                    streets: &streets,
                    model: &model,
                    bundle: &bundle,
                    out: &out,
                    union_retrieval,
                    candidate_cap,
                },
            )
        }
        Command::Evaluate {
            ground_truth,
            bundle,
            baseline,
            folds,
            report,
            tuning,
        } => {
            tuning.apply(&mut config);
            config.validate()?;
            evaluate_cmd(
                &config,
                &EvaluateArgs {
                    ground_truth: &ground_truth,
                    bundle: &bundle,
                    baseline: baseline.map(|BaselineArg::Poprank| Baseline::PopRank),
                    folds,
                    report: &report,
                },
            )
        }
        Command::Stats {
            streets,
            links,
            bundle,
            regions,
            out,
            tuning,
        } => {
            tuning.apply(&mut config);
            config.validate()?;
            stats_cmd(
                &config,
                &StatsArgs {
                    streets: &streets,
                    links: &links,
                    bundle: &bundle,
                    regions: regions.into_iter().map(Into::into).collect(),
                    out: &out,
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
            return ExitCode::from(code);
        }
    };

    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            log::warn!("thread pool already initialized: {e}");
        }
    }

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
