use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spdc::cli::{cmd_bench, cmd_run, cmd_trace, cmd_verify, RunConfig, TraceFormat};
use spdc::client::Method;
use spdc::netsim::FaultSpec;
use spdc::obfuscation::Mode;

#[derive(Parser)]
#[command(name = "spdc", version, about = "Blinded multi-server determinant computation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol on a matrix file and write a report.
    Run {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2)]
        servers: usize,
        #[command(flatten)]
        common: Common,
        /// Tampering, e.g. "server=2,block=U_22,rel=1e-2".
        #[arg(long, value_parser = parse_fault)]
        fault: Option<FaultSpec>,
        #[arg(long, value_parser = parse_method, default_value = "Q2")]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        trace_format: Format,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Sweep sizes and server counts, writing one metrics row per run.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4])]
        servers: Vec<usize>,
        #[arg(long = "method", value_delimiter = ',', value_parser = parse_method, default_value = "Q2,Q3")]
        methods: Vec<Method>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Validate a stored trace.
    Trace {
        trace: PathBuf,
        #[arg(long)]
        servers: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_parser = parse_mode, default_value = "EWD")]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Hex secret for the seed hash.
    #[arg(long)]
    lambda1: Option<String>,
    /// Hex secret for the blinding vector.
    #[arg(long)]
    lambda2: Option<String>,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    /// One thread per server instead of the single-threaded scheduler.
    #[arg(long)]
    concurrent: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn parse_fault(s: &str) -> Result<FaultSpec, String> {
    s.parse()
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

impl Common {
    fn into_config(self, servers: usize) -> RunConfig {
        RunConfig {
            servers,
            mode: self.mode,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            rng_seed: self.seed,
            max_retries: self.max_retries,
            concurrent: self.concurrent,
            ..RunConfig::default()
        }
    }
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run {
            matrix,
            servers,
            common,
            fault,
            method,
            out,
            trace_out,
            trace_format,
            metrics_out,
        } => {
            let cfg = RunConfig {
                method,
                fault,
                out,
                trace_out,
                trace_format: match trace_format {
                    Format::Text => TraceFormat::Text,
                    Format::Csv => TraceFormat::Csv,
                },
                metrics_out,
                ..common.into_config(servers)
            };
            cmd_run(&cfg, &matrix)
        }
        Command::Bench {
            sizes,
            servers,
            methods,
            common,
            metrics_out,
        } => {
            let cfg = RunConfig {
                metrics_out,
                ..common.into_config(2)
            };
            cmd_bench(&cfg, &sizes, &servers, &methods)
        }
        Command::Verify { seed } => cmd_verify(seed),
        Command::Trace { trace, servers } => cmd_trace(&trace, servers),
    };
    ExitCode::from(code as u8)
}
