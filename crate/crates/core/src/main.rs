use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geostory::camera::Viewport;
use geostory::shot::{DefaultShotTable, SHOT_TABLE_ENV};
use geostory::story::{compile_story, export_script, parse_story, storyboard, Story, StoryError};

#[derive(Parser)]
#[command(name = "geostory", version, about = "Compile geographic story documents into camera scripts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a story to a canonical JSON camera script.
    Compile {
        #[command(flatten)]
        input: Input,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a story and its data without writing anything.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Render the compiled story as an SVG storyboard.
    Storyboard {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory holding project files.
        #[arg(long)]
        projects: PathBuf,
    },
}

#[derive(Args)]
struct Input {
    /// Story document (JSON).
    story: PathBuf,
    /// Dataset file as ID=PATH; overrides the path in the story.
    #[arg(long = "data", value_name = "ID=PATH")]
    data: Vec<String>,
    /// Output size as WIDTHxHEIGHT.
    #[arg(long)]
    viewport: Option<String>,
    #[arg(long)]
    fps: Option<u32>,
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<StoryError> for Failure {
    fn from(e: StoryError) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn parse_viewport(s: &str) -> Result<Viewport, Failure> {
    let bad = || Failure::Validation(format!("--viewport expects WIDTHxHEIGHT, got '{s}'"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let (w, h) = (w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?);
    Viewport::new(w, h).map_err(|e| Failure::Validation(e.to_string()))
}

fn table() -> Result<DefaultShotTable, Failure> {
    DefaultShotTable::from_env().map_err(|e| Failure::Validation(format!("{SHOT_TABLE_ENV}: {e}")))
}

/// Parses the story, applies overrides and reads every dataset.
fn load(input: &Input) -> Result<(Story, BTreeMap<String, String>), Failure> {
    let text = read(&input.story)?;
    let mut story = parse_story(&text)?;
    if input.viewport.is_some() || input.fps.is_some() {
        let mut doc = story.document.clone();
        if let Some(v) = &input.viewport {
            doc.defaults.viewport = Some(parse_viewport(v)?);
        }
        if input.fps.is_some() {
            doc.defaults.fps = input.fps;
        }
        story = Story::from_document(doc)?;
    }
    let mut paths: BTreeMap<String, PathBuf> = BTreeMap::new();
    for arg in &input.data {
        let (id, path) = arg
            .split_once('=')
            .ok_or_else(|| Failure::Validation(format!("--data expects ID=PATH, got '{arg}'")))?;
        paths.insert(id.to_string(), PathBuf::from(path));
    }
    let base = input.story.parent().unwrap_or(Path::new("."));
    let mut texts = BTreeMap::new();
    for d in &story.document.data {
        let path = match (paths.remove(&d.id), &d.path) {
            (Some(p), _) => p,
            (None, Some(p)) => base.join(p),
            (None, None) => return Err(Failure::Io(format!("no file given for dataset '{}'", d.id))),
        };
        texts.insert(d.id.clone(), read(&path)?);
    }
    if let Some(id) = paths.keys().next() {
        return Err(Failure::Validation(format!("--data names unknown dataset '{id}'")));
    }
    Ok((story, texts))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile { input, out } => {
            let (story, texts) = load(&input)?;
            let (_, compiled) = compile_story(&story, &texts, &table()?)?;
            write(out.as_deref(), &export_script(&compiled.script))
        }
        Command::Validate { input } => {
            let (story, texts) = load(&input)?;
            let (_, compiled) = compile_story(&story, &texts, &table()?)?;
            let movements = compiled.timeline.movements().count();
            println!("ok: {} scenes, {movements} movements, {}s", story.scenes.len(), compiled.script.duration);
            for d in &story.injected {
                println!("default {d}");
            }
            Ok(())
        }
        Command::Storyboard { input, out } => {
            let (story, texts) = load(&input)?;
            let (resolved, compiled) = compile_story(&story, &texts, &table()?)?;
            write(out.as_deref(), storyboard(&resolved, &compiled).as_bytes())
        }
        Command::Serve { port, projects } => {
            let table = table()?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            eprintln!("serving {} on port {port}", projects.display());
            rt.block_on(geostory::service::serve(port, &projects, table)).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
