use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gasf_eeg::eval::MetricsReport;
use gasf_eeg_cli::pipeline::select_from_csv;
use gasf_eeg_cli::{run_pipeline, CliError, Pipeline, RunConfig, RunReport};

#[derive(Parser)]
#[command(name = "gasf-eeg", version, about = "GASF and texture-feature EEG classification")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Data root with `normal/` and `focal/` recordings; falls back to the
    /// config file, then the GASF_EEG_DATA environment variable.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Cnn,
    Ann,
}

#[derive(Subcommand)]
enum Command {
    /// Write the two-class synthetic dataset into the data root.
    Synth {
        #[arg(long)]
        records: Option<usize>,
        #[arg(long)]
        len: Option<usize>,
    },
    /// GASF PNG per epoch.
    Encode,
    /// Spectrum dumps and images per epoch.
    Tfr,
    /// Texture feature CSVs.
    Features,
    /// Swarm feature selection over a feature CSV.
    Select {
        /// Defaults to `<out>/features_train.csv`.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Train and evaluate one classifier.
    Train {
        #[arg(long, value_enum, default_value = "cnn")]
        model: Model,
    },
    /// Evaluate a stored checkpoint on the validation split.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run any pipeline by name.
    Pipeline {
        #[arg(long, value_enum, default_value = "gasf-cnn")]
        kind: Pipeline,
    },
    /// Print a metrics JSON as a table.
    Report {
        /// Defaults to `<out>/metrics.json`.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if let Some(data) = &cli.data {
        config.data.root = Some(data.clone());
    }
    Ok(config)
}

fn summarize(report: &RunReport) {
    if let Some(m) = &report.metrics {
        print!("{}", m.to_table());
        println!("confusion (focal positive): {:?}", m.counts);
    }
    println!("run manifest: {}", report.manifest_path.display());
}

fn execute(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let mut config = resolve(&cli)?;
    match cli.command {
        Command::Synth { records, len } => {
            if let Some(r) = records {
                config.synth.records_per_class = r;
            }
            if let Some(l) = len {
                config.synth.record_len = l;
            }
            config.validate()?;
            let root = config.data.resolved_root();
            let paths = gasf_eeg::synth::write_dataset(&root, &config.synth)?;
            println!("wrote {} records under {}", paths.len(), root.display());
        }
        Command::Encode => summarize(&run_pipeline(&config, Pipeline::EncodeOnly)?),
        Command::Tfr => summarize(&run_pipeline(&config, Pipeline::Spectra)?),
        Command::Features => summarize(&run_pipeline(&config, Pipeline::FeaturesOnly)?),
        Command::Select { features } => {
            let csv = features.unwrap_or_else(|| config.out_dir.join("features_train.csv"));
            std::fs::create_dir_all(&config.out_dir)?;
            let out = config.out_dir.join("selection.json");
            let report = select_from_csv(&config, &csv, &out)?;
            println!("selected {:?} (fitness {:.4})", report.mask.selected(), report.mask.fitness);
            println!("selection: {}", out.display());
        }
        Command::Train { model } => {
            let pipeline = match model {
                Model::Cnn => Pipeline::GasfCnn,
                Model::Ann => Pipeline::FeatureAnn,
            };
            summarize(&run_pipeline(&config, pipeline)?);
        }
        Command::Eval { checkpoint } => {
            if checkpoint.is_some() {
                config.eval.checkpoint = checkpoint;
            }
            summarize(&run_pipeline(&config, Pipeline::EvalOnly)?);
        }
        Command::Pipeline { kind } => summarize(&run_pipeline(&config, kind)?),
        Command::Report { metrics } => {
            let path = metrics.unwrap_or_else(|| config.out_dir.join("metrics.json"));
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let report: MetricsReport = serde_json::from_str(&text)?;
            print!("{}", report.to_table());
            println!("accuracy {:.4}, counts {:?}", report.accuracy, report.counts);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
