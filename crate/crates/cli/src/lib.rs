//! The `basenp` command-line tool and HTTP service.
//!
//! Every subcommand reads corpora in any of the three formats (guessed from
//! the file extension unless `--from` is given; `-` reads stdin) and writes
//! to stdout unless `-o` names a file. Exit status is 0 on success, 1 on a
//! usage error and 2 on a data error (unreadable or malformed input).

mod commands;
pub mod server;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use basenp_core::eval::ReportFormat;
use basenp_core::CorpusFormat;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "basenp", version, about = "Base noun phrase chunking workbench")]
pub struct Cli {
    /// Output style of reports.
    #[arg(long, global = true, default_value = "table", value_parser = parse_report_format)]
    pub format: ReportFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Corpus file, or `-` for stdin.
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub from: Option<CorpusFormat>,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Output format; the input format when omitted.
    #[arg(long)]
    pub to: Option<CorpusFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rewrite a corpus in another format.
    Convert {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Remove every bracketing from a corpus.
    Strip {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Run a rule list over a corpus.
    Apply {
        /// Rule list file.
        #[arg(long)]
        rules: PathBuf,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Learn a transformation-based chunker from an annotated corpus.
    Learn {
        #[command(flatten)]
        input: Input,
        /// Directory that receives baseline.tsv and rules.tbl.
        #[arg(long)]
        out: PathBuf,
        /// Stop when the best rule's net gain falls below this.
        #[arg(long, default_value_t = 2)]
        min_gain: u32,
        #[arg(long, default_value_t = 500)]
        max_rules: usize,
        /// Template file, one template per line (e.g. `pos[0] pos[1] chunk[-1]`).
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Chunk a corpus with a learned model.
    Tag {
        /// Directory written by `learn`.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Score a predicted corpus against the truth.
    Eval { truth: PathBuf, predicted: PathBuf },
    /// Recall of test base NPs grouped by how often their POS sequence
    /// occurs among training base NPs.
    Freq {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
    },
    /// Print the flat-text substitution expression of each rule in a file.
    CompileRule {
        /// Rule list file, or `-` for stdin.
        rules: PathBuf,
    },
    /// Serve editing sessions over HTTP.
    Serve {
        /// Directory holding the session store.
        #[arg(long)]
        root: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

fn parse_report_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

/// Parses `args` and runs the chosen command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
