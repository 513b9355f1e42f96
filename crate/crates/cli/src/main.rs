use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hexstab::{
    check_command, freqresp_command, load_config, run_command, sweep_command, CliError, CliResult,
    Config, Outcome, Overrides,
};

#[derive(Parser)]
#[command(
    name = "hexstab",
    version,
    about = "Heat-exchanger boundary stabilization with delayed observation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario; writes norms.csv, snapshots.csv, summary.txt.
    Run(Common),
    /// Run the Cartesian product of the [sweep] axes; writes sweep.csv.
    Sweep(Common),
    /// Measure the delay-free frequency response; writes freqresp.csv.
    Freqresp(Common),
    /// Print the condition report without simulating.
    Check(Common),
}

/// Config file plus flags that override the file's top-level keys.
#[derive(Args)]
struct Common {
    /// TOML configuration file.
    config: Option<PathBuf>,
    #[arg(long)]
    h1: Option<f64>,
    #[arg(long)]
    h2: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long = "n_cells", alias = "n-cells")]
    n_cells: Option<i64>,
    /// observer_predictor, sano_static or open_loop.
    #[arg(long)]
    controller: Option<String>,
    /// Static gain for sano_static.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    seed: Option<i64>,
    /// Snapshot spacing in time units; 0 disables snapshots.
    #[arg(long = "snapshot_stride", alias = "snapshot-stride")]
    snapshot_stride: Option<f64>,
    /// Worker threads for sweep and freqresp (default: available parallelism).
    #[arg(long)]
    threads: Option<i64>,
    #[arg(long = "output_dir", short = 'o', alias = "output-dir")]
    output_dir: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides::new();
        let reals = [
            ("h1", self.h1),
            ("h2", self.h2),
            ("l", self.l),
            ("tau", self.tau),
            ("k1", self.k1),
            ("k2", self.k2),
            ("T", self.t_final),
            ("k", self.k),
            ("snapshot_stride", self.snapshot_stride),
        ];
        for (key, v) in reals {
            if let Some(v) = v {
                o.set(key, v);
            }
        }
        for (key, v) in [
            ("n_cells", self.n_cells),
            ("seed", self.seed),
            ("threads", self.threads),
        ] {
            if let Some(v) = v {
                o.set(key, v);
            }
        }
        if let Some(c) = &self.controller {
            o.set("controller", c.as_str());
        }
        if let Some(d) = &self.output_dir {
            o.set("output_dir", d.to_string_lossy().as_ref());
        }
        o
    }

    fn load(&self) -> CliResult<Config> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?,
            None => String::new(),
        };
        load_config(&text, &self.overrides())
    }
}

fn execute(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Run(c) => run_command(&c.load()?),
        Command::Sweep(c) => sweep_command(&c.load()?),
        Command::Freqresp(c) => freqresp_command(&c.load()?),
        Command::Check(c) => check_command(&c.load()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", outcome.report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
