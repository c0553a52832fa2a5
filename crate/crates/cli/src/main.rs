use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use interfold::indep::Mode;
use interfold_cli::{render_corpus, run_analyze, run_corpus, Format, RunConfig, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "interfold", version, about = "Unfolding-based static analysis of concurrent programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze one program.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Analyze every *.prog in a directory against its .expect sidecar.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sync,
    Heap,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

#[derive(Args)]
struct Opts {
    #[arg(long, value_enum, default_value = "heap")]
    mode: ModeArg,
    #[arg(long, default_value_t = 15)]
    widening_level: usize,
    #[arg(long)]
    no_cutoffs: bool,
    #[arg(long)]
    no_tla: bool,
    /// Write the unfolding as a Graphviz file.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Cross-check against exhaustive concrete enumeration.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    #[arg(long, default_value_t = 10_000)]
    max_events: usize,
    #[arg(long, default_value_t = 200_000)]
    max_configs: usize,
    /// Use arbitrary-precision integers.
    #[arg(long)]
    exact: bool,
}

impl Opts {
    fn config(&self, input: PathBuf) -> RunConfig {
        RunConfig {
            input,
            mode: match self.mode {
                ModeArg::Sync => Mode::Sync,
                ModeArg::Heap => Mode::Heap,
            },
            widening_level: self.widening_level,
            cutoffs: !self.no_cutoffs,
            tla: !self.no_tla,
            dot: self.dot.clone(),
            oracle: self.oracle,
            format: match self.format {
                FormatArg::Text => Format::Text,
                FormatArg::Machine => Format::Machine,
            },
            max_events: self.max_events,
            max_configs: self.max_configs,
            exact: self.exact,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match cli.cmd {
        Cmd::Analyze { file, opts } => {
            let cfg = opts.config(file);
            let (code, out) = run_analyze(&cfg);
            if code == EXIT_USAGE {
                eprint!("{out}");
            } else {
                print!("{out}");
            }
            ExitCode::from(code as u8)
        }
        Cmd::Corpus { dir, opts } => {
            let cfg = opts.config(PathBuf::new());
            match run_corpus(&dir, &cfg) {
                Ok(rows) => {
                    print!("{}", render_corpus(&rows, cfg.format));
                    ExitCode::from(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE as u8)
                }
            }
        }
    }
}
