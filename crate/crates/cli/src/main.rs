use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use dnazue::commands;
use dnazue::config::{ChannelFile, EndToEndConfig, ExponentSweepConfig, InnerErasureConfig};
use dnazue::report::{render_document, CsvTable, Header};
use dnazue::selfcheck;
use dnazue::Error;

#[derive(Parser, Debug)]
#[command(name = "dnazue", version, about = "Short-molecule DNA storage code simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed, overriding any `seed` in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Leave the timestamp line out of the header.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Symmetry verdict, maximal rate and related bounds of a channel.
    ChannelInfo,
    /// Erasure exponent over a rate grid.
    ExponentSweep,
    /// Ensemble erasure probability of random inner codes.
    InnerErasure,
    /// Full storage and retrieval simulation over a grid of pool sizes.
    EndToEnd {
        /// Also write one CSV row per trial to this path.
        #[arg(long)]
        trial_log: Option<PathBuf>,
    },
    /// Fast invariant suite.
    Selfcheck,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ChannelInfo => "channel-info",
            Command::ExponentSweep => "exponent-sweep",
            Command::InnerErasure => "inner-erasure",
            Command::EndToEnd { .. } => "end-to-end",
            Command::Selfcheck => "selfcheck",
        }
    }
}

enum Failure {
    Core(Error),
    Io(String),
    Checks(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Invariant(_)) | Failure::Checks(_) => 1,
            Failure::Core(Error::Capability(_)) => 3,
            Failure::Core(_) | Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) => m.clone(),
            Failure::Checks(names) => format!("failed checks: {}", names.join(", ")),
        }
    }
}

struct Output {
    main: CsvTable,
    trial_log: Option<(PathBuf, CsvTable)>,
    seed: u64,
}

fn read_config(path: Option<&Path>) -> Result<(String, String), Failure> {
    let path = path.ok_or_else(|| Failure::Io("--config is required for this command".into()))?;
    let bytes = fs::read(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Io(format!("{} is not valid UTF-8", path.display())))?;
    Ok((text, digest))
}

fn run(cli: &Cli) -> Result<(Output, String), Failure> {
    if matches!(cli.command, Command::Selfcheck) {
        let outcomes = selfcheck::run_standard()?;
        let mut t = CsvTable::new(["check", "passed", "detail"]);
        for c in &outcomes {
            t.push(vec![c.name.into(), c.passed.into(), c.detail.clone().into()]);
        }
        let failed: Vec<String> = outcomes.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
        if !failed.is_empty() {
            eprint!("{}", t.render());
            return Err(Failure::Checks(failed));
        }
        let out = Output {
            main: t,
            trial_log: None,
            seed: cli.seed.unwrap_or(0),
        };
        return Ok((out, "none".into()));
    }

    let (text, digest) = read_config(cli.config.as_deref())?;
    let out = match &cli.command {
        Command::ChannelInfo => {
            let cfg = ChannelFile::from_toml(&text)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            Output {
                main: commands::channel_info(&cfg)?,
                trial_log: None,
                seed,
            }
        }
        Command::ExponentSweep => {
            let cfg = ExponentSweepConfig::from_toml(&text)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            Output {
                main: commands::exponent_sweep(&cfg)?,
                trial_log: None,
                seed,
            }
        }
        Command::InnerErasure => {
            let cfg = InnerErasureConfig::from_toml(&text)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            Output {
                main: commands::inner_erasure(&cfg, seed)?,
                trial_log: None,
                seed,
            }
        }
        Command::EndToEnd { trial_log } => {
            let cfg = EndToEndConfig::from_toml(&text)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            let res = commands::end_to_end(&cfg, seed)?;
            Output {
                main: res.summary,
                trial_log: trial_log.clone().map(|p| (p, res.trial_log)),
                seed,
            }
        }
        Command::Selfcheck => unreachable!("handled above"),
    };
    Ok((out, digest))
}

/// Write through a temporary file in the target directory and rename, so a
/// failed run never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let (out, digest) = run(cli)?;
    let timestamp = (!cli.no_timestamp).then(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("{secs} (unix seconds)")
    });
    let header = |command: String| Header {
        tool: "dnazue".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        config_sha256: digest.clone(),
        seed: out.seed,
        timestamp: timestamp.clone(),
    };
    let name = cli.command.name().to_string();
    let doc = render_document(&header(name.clone()), &out.main);
    let log = out
        .trial_log
        .as_ref()
        .map(|(p, t)| (p, render_document(&header(format!("{name} trial-log")), t)));

    match &cli.out {
        Some(p) => write_atomic(p, &doc)?,
        None => stdout
            .write_all(doc.as_bytes())
            .map_err(|e| Failure::Io(format!("cannot write to standard output: {e}")))?,
    }
    if let Some((p, text)) = log {
        write_atomic(p, &text)?;
    }
    Ok(())
}

/// Parse `args`, run the command and return the process exit code.
fn dispatch<I, T>(args: I, stdout: &mut (dyn Write + Send)) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::Io("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, stdout)),
            Err(e) => Err(Failure::Io(format!("cannot start thread pool: {e}"))),
        },
        None => execute(&cli, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("dnazue {}: {}", cli.command.name(), f.message());
            f.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let code = dispatch(std::env::args_os(), &mut std::io::stdout());
    ExitCode::from(code)
}
