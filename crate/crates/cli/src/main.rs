use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use diffeolab::dsl::{self, Report, RunConfig};

#[derive(Parser)]
#[command(name = "diffeolab", version, about = "Run diffeolab documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a document and report every command.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Degree bound of the metric search.
        #[arg(long, env = "DIFFEOLAB_DEGREE", default_value_t = diffeolab::metric::DEFAULT_DEGREE)]
        degree: u32,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the shipped regression document and compare with its golden report.
    CheckPaper {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    }
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(file: &PathBuf, format: Format, degree: u32, out: Option<&PathBuf>) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    let doc = dsl::parse(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let report = dsl::run_document(&doc, &RunConfig { degree });
    write_output(&render(&report, format), out)?;
    let bad = report.mismatches();
    if bad > 0 {
        eprintln!("{bad} command(s) did not produce the expected outcome");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn check_paper(format: Format) -> Result<ExitCode, String> {
    let doc = dsl::parse(dsl::PAPER_DOCUMENT).map_err(|e| format!("regression document: {e}"))?;
    let report = dsl::run_document(&doc, &RunConfig::default());
    print!("{}", render(&report, format));
    let bad = report.mismatches();
    let golden_ok = report.to_json() + "\n" == dsl::PAPER_GOLDEN;
    if !golden_ok {
        eprintln!("report differs from the golden file");
    }
    if bad > 0 {
        eprintln!("{bad} command(s) did not produce the expected outcome");
    }
    Ok(if bad == 0 && golden_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { file, format, degree, out } => run(file, *format, *degree, out.as_ref()),
        Command::CheckPaper { format } => check_paper(*format),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
