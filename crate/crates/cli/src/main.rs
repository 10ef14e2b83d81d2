//! `revis`: batch entry points for scripts and CI.
//!
//! Exit codes: 0 ok, 1 validation dirty (or an unusable model response),
//! 2 I/O, 3 configuration or network.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use revis_core::datagen::{apply_user_tables, mock_table, UserTable};
use revis_core::dsl::{parse_document, serialize, validate, ContainerId, DslDocument};
use revis_core::eval::{run_gallery, score, AccuracyReport, GalleryError};
use revis_core::pipeline::{
    ChatTransport, FixtureTransport, ImageInput, LiveTransport, MllmEndpointConfig, Pipeline, PipelineError, Recorder,
};
use revis_core::render::{render_document, RenderOptions};

#[derive(Debug, Parser)]
#[command(name = "revis", version, about = "Hierarchical-container visualization DSL tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn a chart image into a DSL document.
    Reproduce {
        image: PathBuf,
        /// Output path; `-` for stdout.
        #[arg(short, long)]
        output: PathBuf,
        /// Replay recorded responses from this case directory instead of
        /// calling the endpoint configured by REVIS_MLLM_* variables.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Write every raw response to `<dir>/<label>.txt`.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Check a document; exits 0 only when it has no errors.
    Validate { dsl: PathBuf },
    /// Render a document to SVG.
    Render {
        dsl: PathBuf,
        /// Output path; `-` for stdout.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 800.0)]
        width: f64,
        #[arg(long, default_value_t = 600.0)]
        height: f64,
        /// Worker threads; 0 lets the pool decide.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Replace the mock data of a container with a JSON or CSV table,
        /// as `cid=path`. Repeatable.
        #[arg(long = "data", value_name = "CID=FILE")]
        data: Vec<String>,
    },
    /// Print the mock table of one container, the template for uploads.
    Mockdata {
        dsl: PathBuf,
        #[arg(long)]
        container: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// Score a generated document against its ground truth.
    Diff {
        ground_truth: PathBuf,
        generated: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
    /// Score every case under `<dir>/<name>/`.
    Gallery {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
    /// Start the HTTP service. Other settings come from REVIS_* variables.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Csv,
    Json,
}

enum Failure {
    Dirty(String),
    Io(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Dirty(_) => 1,
            Failure::Io(_) => 2,
            Failure::Config(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<DslDocument, Failure> {
    parse_document(&read(path)?).map_err(|e| Failure::Dirty(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Outcome {
    if path.as_os_str() == "-" {
        std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}")))
    } else {
        std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }
}

fn container(s: &str) -> Result<ContainerId, Failure> {
    ContainerId::parse(s).map_err(|e| Failure::Config(e.to_string()))
}

fn reproduce(image: &Path, output: &Path, fixtures: Option<&Path>, record: Option<&Path>) -> Outcome {
    let bytes = std::fs::read(image).map_err(|e| Failure::Io(format!("{}: {e}", image.display())))?;
    let image = ImageInput::from_bytes(bytes).map_err(|e| Failure::Io(e.to_string()))?;
    let (transport, parallel): (Box<dyn ChatTransport>, usize) = match fixtures {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(Failure::Io(format!("{}: not a directory", dir.display())));
            }
            (Box::new(FixtureTransport::new(dir)), 4)
        }
        None => {
            let cfg = MllmEndpointConfig::from_env().map_err(|e| Failure::Config(e.to_string()))?;
            let parallel = cfg.max_parallel;
            (Box::new(LiveTransport::new(cfg).map_err(|e| Failure::Config(e.to_string()))?), parallel)
        }
    };
    let mut rec = Recorder::new(image.media_type, None);
    if let Some(dir) = record {
        rec = rec.persist_to(dir);
    }
    let doc = Pipeline::new(transport.as_ref(), parallel).run(&image, &rec).map_err(|e| match &e {
        PipelineError::Input(_) | PipelineError::Io(_) => Failure::Io(e.to_string()),
        PipelineError::Config(_) => Failure::Config(e.to_string()),
        PipelineError::Transport { source, .. } if !matches!(source, revis_core::pipeline::TransportError::MissingFixture(_)) => {
            Failure::Config(e.to_string())
        }
        PipelineError::Transport { .. } => Failure::Io(e.to_string()),
        _ => Failure::Dirty(e.to_string()),
    })?;
    for w in rec.snapshot().warnings {
        eprintln!("warning: {w}");
    }
    write_out(output, &serialize(&doc))
}

fn validate_cmd(path: &Path) -> Outcome {
    let doc = load(path)?;
    let report = validate(&doc);
    for issue in &report.issues {
        println!("{issue}");
    }
    let errors = report.errors().count();
    println!("{}: {errors} error(s), {} warning(s)", path.display(), report.issues.len() - errors);
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Dirty(format!("{} is not valid", path.display())))
    }
}

fn user_tables(specs: &[String]) -> Result<BTreeMap<ContainerId, UserTable>, Failure> {
    let mut out = BTreeMap::new();
    for s in specs {
        let (cid, file) = s.split_once('=').ok_or_else(|| Failure::Config(format!("--data expects CID=FILE, got `{s}`")))?;
        let table = UserTable::parse(&read(Path::new(file))?).map_err(|e| Failure::Dirty(format!("{file}: {e}")))?;
        if out.insert(container(cid)?, table).is_some() {
            return Err(Failure::Config(format!("container `{cid}` has two --data tables")));
        }
    }
    Ok(out)
}

fn render_cmd(dsl: &Path, output: &Path, opts: RenderOptions, data: &[String]) -> Outcome {
    let doc = load(dsl)?;
    let tables = user_tables(data)?;
    let (doc, overrides) = apply_user_tables(&doc, &tables, opts.seed).map_err(|e| Failure::Dirty(e.to_string()))?;
    let svg = render_document(&doc, &opts, &overrides).map_err(|e| match e {
        revis_core::error::RenderError::Canvas(..) => Failure::Config(e.to_string()),
        e => Failure::Dirty(e.to_string()),
    })?;
    write_out(output, &svg)
}

fn mockdata(dsl: &Path, cid: &str, seed: u64, format: TableFormat) -> Outcome {
    let doc = load(dsl)?;
    let table = mock_table(&doc, &container(cid)?, seed).map_err(|e| Failure::Dirty(e.to_string()))?;
    let text = match format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Json => format!("{:#}\n", table.to_json()),
    };
    write_out(Path::new("-"), &text)
}

fn print_report(report: &AccuracyReport, format: ReportFormat) {
    let text = match format {
        ReportFormat::Table => report.to_table(),
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json(),
    };
    print!("{text}");
}

fn diff(gt: &Path, generated: &Path, format: ReportFormat) -> Outcome {
    let name = generated.file_stem().map_or_else(|| "case".into(), |s| s.to_string_lossy().into_owned());
    let case = score(name.trim_end_matches(".revis"), &load(gt)?, &load(generated)?);
    if matches!(format, ReportFormat::Table) {
        for m in &case.mismatches {
            println!("{}: expected {}, found {}", m.attribute, m.expected, m.actual);
        }
    }
    print_report(&AccuracyReport { cases: vec![case] }, format);
    Ok(())
}

fn gallery(dir: &Path, format: ReportFormat) -> Outcome {
    let report = run_gallery(dir).map_err(|e| match e {
        GalleryError::Io(..) => Failure::Io(e.to_string()),
        e => Failure::Dirty(e.to_string()),
    })?;
    print_report(&report, format);
    Ok(())
}

fn serve(port: Option<u16>) -> Outcome {
    let mut cfg = revis_service::ServiceConfig::from_env().map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(p) = port {
        cfg.port = p;
    }
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    eprintln!("listening on 0.0.0.0:{}", cfg.port);
    rt.block_on(revis_service::serve(cfg)).map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Reproduce { image, output, fixtures, record } => {
            reproduce(&image, &output, fixtures.as_deref(), record.as_deref())
        }
        Command::Validate { dsl } => validate_cmd(&dsl),
        Command::Render { dsl, output, seed, width, height, threads, data } => {
            render_cmd(&dsl, &output, RenderOptions { width, height, seed, threads }, &data)
        }
        Command::Mockdata { dsl, container, seed, format } => mockdata(&dsl, &container, seed, format),
        Command::Diff { ground_truth, generated, format } => diff(&ground_truth, &generated, format),
        Command::Gallery { dir, format } => gallery(&dir, format),
        Command::Serve { port } => serve(port),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Dirty(m) | Failure::Io(m) | Failure::Config(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
