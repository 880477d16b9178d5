use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loopresp_core::scan::{default_range, PRESETS};
use loopresp_core::{run_point, run_scan, run_verify, validate, Axis, Config, Mode, Output, Range, ScanSpec, Suite};

const EXIT_VERIFY: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Linear electric/magnetic response of a closed-loop three-level atom.
#[derive(Parser)]
#[command(name = "loopresp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every coefficient and response at one parameter point.
    Point {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write a single-row CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and write a CSV.
    Scan {
        #[command(flatten)]
        config: ConfigArgs,
        /// Figure preset; see --list-presets.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, conflicts_with = "preset", required_unless_present_any = ["preset", "list_presets"])]
        axis: Option<Axis>,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        range: Option<Range>,
        /// Comma-separated outputs.
        #[arg(long, value_delimiter = ',', default_value = "d21,d32")]
        outputs: Vec<Output>,
        /// Report direct terms at the detuning of maximal |Im|.
        #[arg(long)]
        extremal: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "LOOPRESP_PARALLELISM")]
        parallelism: Option<usize>,
        #[arg(long)]
        list_presets: bool,
    },
    /// Run the seeded verification suite.
    Verify {
        #[arg(long, default_value = "fast")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "LOOPRESP_PARALLELISM")]
        parallelism: Option<usize>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration; missing keys take the closed-loop defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    /// Override one key, e.g. --set drive.delta2=0.5
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

type Failure = (u8, String);

fn fail(e: impl std::fmt::Display) -> Failure {
    (EXIT_ERROR, e.to_string())
}

impl ConfigArgs {
    fn resolve(&self, base: Option<Config>) -> Result<Config, Failure> {
        let mut config = match (&self.config, base) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
                let mut c = Config::from_json(&text).map_err(fail)?;
                if let Some(mode) = self.mode {
                    c.mode = mode;
                }
                c
            }
            (None, Some(mut c)) => {
                if let Some(mode) = self.mode {
                    c.mode = mode;
                }
                c
            }
            (None, None) => Config::preset(self.mode.unwrap_or(Mode::ClosedLoop)),
        };
        for item in &self.overrides {
            let (path, value) = item
                .split_once('=')
                .ok_or_else(|| fail(format!("--set expects PATH=VALUE, got `{item}`")))?;
            config.set(path.trim(), value.trim()).map_err(fail)?;
        }
        Ok(config)
    }
}

fn warn_config(config: &Config) {
    for w in validate(&config.system, &config.drive, &config.medium).warnings() {
        eprintln!("warning: {}", w.message);
    }
}

/// Write to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(fail(e)),
        _ => Ok(()),
    }
}

fn open_out(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| fail(format!("{}: {e}", path.display())))?,
    ))
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn point(args: &ConfigArgs, out: Option<&Path>) -> Result<(), Failure> {
    let config = args.resolve(None)?;
    let result = run_point(&config).map_err(fail)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    emit(&result.to_string())?;
    if let Some(path) = out {
        let mut w = open_out(path)?;
        result.write_csv(&config, &mut w).and_then(|_| w.flush()).map_err(fail)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn scan(
    args: &ConfigArgs,
    preset: Option<&str>,
    axis: Option<Axis>,
    range: Option<Range>,
    outputs: Vec<Output>,
    extremal: bool,
    out: Option<&Path>,
    parallelism: Option<usize>,
) -> Result<(), Failure> {
    let mut spec = match preset {
        Some(name) => ScanSpec::preset(name).ok_or_else(|| fail(format!("unknown preset `{name}`; known: {}", PRESETS.join(", "))))?,
        None => {
            let axis = axis.expect("clap requires --axis without --preset");
            ScanSpec {
                extremal,
                ..ScanSpec::new(Config::default(), axis, outputs)
            }
        }
    };
    spec.config = args.resolve(preset.map(|_| spec.config))?;
    if let Some(r) = range {
        spec.range = r;
    } else if preset.is_none() {
        spec.range = default_range(spec.axis);
    }
    spec.extremal |= extremal;
    warn_config(&spec.config);

    let result = run_scan(&spec, parallelism.unwrap_or_else(default_threads)).map_err(fail)?;
    for row in result.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} = {:e}: {}",
            spec.axis.name(),
            row.axis_value,
            row.error.as_deref().unwrap_or_default()
        );
    }
    match out {
        Some(path) => {
            let mut w = open_out(path)?;
            result.write_csv(&mut w).and_then(|_| w.flush()).map_err(fail)?;
        }
        None => emit(&result.to_csv_string())?,
    }

    let failed = result.failures();
    if failed * 10 > result.rows.len() {
        return Err((EXIT_PARTIAL, format!("{failed} of {} rows failed", result.rows.len())));
    }
    Ok(())
}

fn verify(suite: Suite, seed: u64, parallelism: Option<usize>) -> Result<(), Failure> {
    let pool = rayon_pool(parallelism)?;
    let report = pool.install(|| run_verify(suite, seed));
    emit(&format!("{report}\n"))?;
    if report.passed() {
        Ok(())
    } else {
        Err((EXIT_VERIFY, "verification failed".into()))
    }
}

fn rayon_pool(parallelism: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.unwrap_or_else(default_threads).max(1))
        .build()
        .map_err(fail)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Point { config, out } => point(&config, out.as_deref()),
        Command::Scan { list_presets: true, .. } => emit(&PRESETS.map(|p| format!("{p}\n")).concat()),
        Command::Scan {
            config,
            preset,
            axis,
            range,
            outputs,
            extremal,
            out,
            parallelism,
            ..
        } => scan(
            &config,
            preset.as_deref(),
            axis,
            range,
            outputs,
            extremal,
            out.as_deref(),
            parallelism,
        ),
        Command::Verify { suite, seed, parallelism } => verify(suite, seed, parallelism),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
