//! `safescope` command-line tool.
//!
//! Exit codes: 0 success, 1 domain finding or rejected input, 2 I/O, parse
//! or environment failure.

use std::fs;
use std::io::{self, IsTerminal, Write as _};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use safescope_core::fixtures::write_demo_project;
use safescope_core::funnel::{default_stages, parse_stages, run_funnel};
use safescope_core::heuristics::TriageError;
use safescope_core::project::{
    load_inputs, parse_answer_lines, Project, ProjectError, ANSWERS_FILE, SPEC_FILE,
};
use safescope_core::propagation::{build_graph, trace_all, MinConfigOptions};
use safescope_core::report::{render, AnalysisOptions, RenderFormat, ReportError};
use safescope_core::requirements::{
    estimate_frequency, frequencies_csv, generate_requirements, DEFAULT_BENCHMARK_RATE_PER_HOUR,
};
use safescope_core::spec_model::validate;

#[derive(Parser)]
#[command(
    name = "safescope",
    version,
    about = "Triage a subsystem's diagnostic specification for functional safety"
)]
struct Cli {
    /// Project directory holding spec.csv and platform.json.
    #[arg(long, global = true, default_value = ".")]
    project: PathBuf,
    /// Write the output under <project>/out/ instead of stdout.
    #[arg(long, global = true)]
    out: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

impl From<Format> for RenderFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => RenderFormat::Json,
            Format::Markdown => RenderFormat::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Status {
    All,
    Pending,
    Answered,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-check the spec against the platform model.
    Validate,
    /// List the generated questions as JSON.
    Questions {
        #[arg(long, value_enum, default_value_t = Status::All)]
        status: Status,
    },
    /// Append the answers in a JSON-lines file to the journal.
    Answer { file: PathBuf },
    /// Run the funnel.
    Funnel {
        /// Stage configuration (defaults to stages.json, then the built-in stages).
        #[arg(long)]
        stages: Option<PathBuf>,
        /// Print the built-in stage configuration and exit.
        #[arg(long)]
        print_default_stages: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build the subsystem report.
    Report {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        stages: Option<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Derive the ADI requirements.
    Requirements {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        stages: Option<PathBuf>,
    },
    /// Estimate failure rates per DTC from field_data.csv, as CSV.
    Frequencies {
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Trace failure propagation, or export the dependency graph.
    Propagation {
        /// Print the platform dependency graph in DOT format.
        #[arg(long)]
        dot: bool,
        /// Monitors to trace (default: all).
        #[arg(long = "monitor")]
        monitors: Vec<String>,
    },
    /// Serve the HTTP API for this project.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Write the bundled demo project into --project.
    InitDemo {
        /// Overwrite an existing project.
        #[arg(long)]
        force: bool,
    },
}

#[derive(clap::Args)]
struct AnalysisArgs {
    /// Failure-rate benchmark in failures per hour.
    #[arg(long, default_value_t = DEFAULT_BENCHMARK_RATE_PER_HOUR)]
    benchmark_rate: f64,
}

impl AnalysisArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            benchmark_rate_per_hour: self.benchmark_rate,
            min_config: MinConfigOptions::default(),
        }
    }
}

enum CliError {
    /// Exit 1.
    Domain(String),
    /// Exit 2.
    Env(String),
}

impl From<ProjectError> for CliError {
    fn from(e: ProjectError) -> Self {
        let label = match &e {
            ProjectError::Triage(TriageError::UnknownQuestion(_)) => "UnknownQuestion: ",
            ProjectError::Triage(TriageError::TypeMismatch { .. }) => "TypeMismatch: ",
            ProjectError::Triage(TriageError::Inconsistent(_)) => "Inconsistent: ",
            ProjectError::StaleRevision { .. } => "StaleRevision: ",
            _ => "",
        };
        let msg = format!("{label}{e}");
        if e.is_domain() {
            CliError::Domain(msg)
        } else {
            CliError::Env(msg)
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        ProjectError::from(e).into()
    }
}

fn env_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Env(format!("{}: {e}", path.display()))
}

fn color_enabled() -> bool {
    std::env::var_os("SAFESCOPE_NO_COLOR").is_none() && io::stderr().is_terminal()
}

fn paint(code: &str, text: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_owned()
    }
}

/// Where command output goes.
struct Sink<'a> {
    project: &'a Path,
    out: bool,
}

impl Sink<'_> {
    fn emit(&self, name: &str, text: &str) -> Result<(), CliError> {
        if !self.out {
            let mut stdout = io::stdout().lock();
            return stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Env(format!("stdout: {e}")));
        }
        let dir = self.project.join("out");
        fs::create_dir_all(&dir).map_err(|e| env_err(&dir, e))?;
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| env_err(&path, e))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Markdown => "md",
    }
}

fn pretty<T: serde::Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).unwrap_or_default() + "\n"
}

fn open(root: &Path, stages: Option<&Path>) -> Result<Project, CliError> {
    let mut project = Project::open(root)?;
    project.refresh_cache()?;
    if let Some(path) = stages {
        let text = fs::read_to_string(path).map_err(|e| env_err(path, e))?;
        project.set_stages(parse_stages(&text).map_err(|e| env_err(path, e))?);
    }
    Ok(project)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let root = cli.project.as_path();
    let sink = Sink {
        project: root,
        out: cli.out,
    };
    match cli.command {
        Command::Validate => {
            let (spec, platform) = load_inputs(root)?;
            let report = validate(&spec, &platform).map_err(|e| CliError::Domain(e.to_string()))?;
            let mut text = String::new();
            for f in &report.findings {
                text.push_str(&format!("{f}\n"));
            }
            text.push_str(&format!(
                "{} monitor(s) checked, {} unknown part(s), {} undeclared function(s)\n",
                report.summary.monitors_checked,
                report.summary.unknown_parts,
                report.summary.undeclared_functions
            ));
            sink.emit("validation.txt", &text)?;
            if report.is_empty() {
                eprintln!("{}", paint("32", "consistent"));
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "{}",
                    paint("31", &format!("{} finding(s)", report.findings.len()))
                );
                Ok(ExitCode::from(1))
            }
        }
        Command::Questions { status } => {
            let project = open(root, None)?;
            let state = project.state();
            let list: Vec<_> = state
                .questions()
                .iter()
                .filter(|q| match status {
                    Status::All => true,
                    Status::Pending => state.answer(&q.id).is_none(),
                    Status::Answered => state.answer(&q.id).is_some(),
                })
                .collect();
            sink.emit("questions.json", &pretty(&list))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Answer { file } => {
            let text = fs::read_to_string(&file).map_err(|e| env_err(&file, e))?;
            let answers = parse_answer_lines(&text, &file)?;
            let mut project = open(root, None)?;
            let revision = project.append_answers(&answers)?;
            for w in project.state().answer_warnings() {
                eprintln!(
                    "{}: {}: {}",
                    paint("33", "warning"),
                    w.question_id,
                    w.message
                );
            }
            eprintln!(
                "applied {} answer(s) to {}; revision {revision}",
                answers.len(),
                root.join(ANSWERS_FILE).display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Funnel {
            stages,
            print_default_stages,
            format,
        } => {
            if print_default_stages {
                sink.emit("stages.json", &pretty(&default_stages()))?;
                return Ok(ExitCode::SUCCESS);
            }
            let project = open(root, stages.as_deref())?;
            let funnel =
                run_funnel(project.state(), project.stages()).map_err(ReportError::from)?;
            let text = match format {
                Format::Json => pretty(&funnel),
                Format::Markdown => funnel.markdown_table(),
            };
            sink.emit(&format!("funnel.{}", ext(format)), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            format,
            stages,
            analysis,
        } => {
            let project = open(root, stages.as_deref())?;
            let report = project.report(&analysis.options())?;
            sink.emit(
                &format!("report.{}", ext(format)),
                &render(&report, format.into()),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Requirements { format, stages } => {
            let project = open(root, stages.as_deref())?;
            let funnel =
                run_funnel(project.state(), project.stages()).map_err(ReportError::from)?;
            let reqs =
                generate_requirements(project.state(), Some(&funnel)).map_err(ReportError::from)?;
            let text = match format {
                Format::Json => pretty(&reqs.requirements),
                Format::Markdown => reqs.markdown_table(),
            };
            sink.emit(&format!("requirements.{}", ext(format)), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Frequencies { analysis } => {
            let project = open(root, None)?;
            let estimates = estimate_frequency(project.field_data(), analysis.benchmark_rate)
                .map_err(ReportError::from)?;
            sink.emit("frequencies.csv", &frequencies_csv(&estimates))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Propagation { dot, monitors } => {
            let project = open(root, None)?;
            let graph = build_graph(project.state().platform());
            if dot {
                sink.emit("platform.dot", &graph.to_dot())?;
                return Ok(ExitCode::SUCCESS);
            }
            let ids: Vec<&str> = if monitors.is_empty() {
                project
                    .state()
                    .spec()
                    .monitors
                    .iter()
                    .map(|m| m.id.as_str())
                    .collect()
            } else {
                monitors.iter().map(String::as_str).collect()
            };
            let traces = trace_all(project.state(), &graph, ids).map_err(ReportError::from)?;
            sink.emit("propagation.json", &pretty(&traces))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            port,
            host,
            analysis,
        } => serve(root, &host, port, analysis.options()),
        Command::InitDemo { force } => {
            if root.join(SPEC_FILE).exists() && !force {
                return Err(CliError::Env(format!(
                    "{} already holds a project; pass --force to overwrite",
                    root.display()
                )));
            }
            write_demo_project(root).map_err(|e| env_err(root, e))?;
            Project::open(root)?.refresh_cache()?;
            eprintln!("demo project written to {}", root.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn serve(
    root: &Path,
    host: &str,
    port: u16,
    options: AnalysisOptions,
) -> Result<ExitCode, CliError> {
    let app = safescope_service::AppState::open(root, options)?;
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| CliError::Env(format!("invalid address {host}:{port}: {e}")))?;
    let runtime =
        tokio::runtime::Runtime::new().map_err(|e| CliError::Env(format!("runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Env(format!("cannot bind {addr}: {e}")))?;
        let bound = listener
            .local_addr()
            .map_err(|e| CliError::Env(e.to_string()))?;
        println!("listening on http://{bound}");
        let _ = io::stdout().flush();
        axum::serve(listener, safescope_service::router(app))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Env(format!("server: {e}")))?;
        Ok(ExitCode::SUCCESS)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Domain(msg)) => {
            eprintln!("{}: {msg}", paint("31", "error"));
            ExitCode::from(1)
        }
        Err(CliError::Env(msg)) => {
            eprintln!("{}: {msg}", paint("31", "error"));
            ExitCode::from(2)
        }
    }
}
