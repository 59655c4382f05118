use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use modspace::run::{apply_overrides, exit_code, run, Command, OutputFormat, OutputSpec};
use modspace::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    WeightCheck,
    Stft,
    Modnorm,
    BargmannCompare,
    TwistedCheck,
    EmbedAnalyze,
    CorollaryCheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::WeightCheck => Command::WeightCheck,
            Cmd::Stft => Command::Stft,
            Cmd::Modnorm => Command::Modnorm,
            Cmd::BargmannCompare => Command::BargmannCompare,
            Cmd::TwistedCheck => Command::TwistedCheck,
            Cmd::EmbedAnalyze => Command::EmbedAnalyze,
            Cmd::CorollaryCheck => Command::CorollaryCheck,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Modulation-space numerics driven by JSON configs.
///
/// Exit status: 0 success, 1 failed assertion, 2 config or parameter
/// error, 3 I/O error. MODSPACE_THREADS sets the worker count.
#[derive(Debug, Parser)]
#[command(name = "modspace", version)]
struct Cli {
    command: Cmd,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Dotted override `key.path=value`; value parsed as JSON, else string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; falls back to `output.path` in the config, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; falls back to `output.format`, then json.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("MODSPACE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("MODSPACE_THREADS = '{v}' is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<bool, Error> {
    configure_threads()?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", cli.config.display())))?;
    let mut config: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", cli.config.display())))?;
    apply_overrides(&mut config, &cli.set)?;
    let spec = OutputSpec::from_config(&config)?;
    let out = run(cli.command.into(), &config)?;
    let format = match cli.format {
        Some(Format::Json) => OutputFormat::Json,
        Some(Format::Csv) => OutputFormat::Csv,
        None => spec.output_format()?.unwrap_or(OutputFormat::Json),
    };
    let rendered = out.render(format);
    match cli.out.as_ref().or(spec.path.as_ref()) {
        Some(p) => std::fs::write(p, rendered)?,
        None => std::io::stdout().lock().write_all(rendered.as_bytes())?,
    }
    for f in &out.failures {
        eprintln!("assertion failed: {f}");
    }
    Ok(out.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
