//! Batch subcommands: read a workbook, run one task, write the result.

use std::fs;
use std::path::PathBuf;

use chromasheet::engine::{run_task, TaskConfig, TaskKind};
use chromasheet::error::Category;
use chromasheet::io::{self, Document};
use chromasheet::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "chromasheet", version, about = "Sketch-driven spreadsheet tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize a reshaping program from group colors
    Wrangle(TaskArgs),
    /// Induce selection queries from positive and negative colors
    Select(TaskArgs),
    /// Constrained clustering from group colors
    Cluster(TaskArgs),
    /// Discover formulas and constraints
    Constraints(TaskArgs),
    /// Predict missing cells with the ensemble only
    Predict(TaskArgs),
    /// Fill missing cells using formulas, constraints and predictions
    Autocomplete(TaskArgs),
    /// Start the HTTP service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Args, Debug)]
pub struct TaskArgs {
    /// Workbook file (.vsw.json) or directory of CSV files
    #[arg(short = 'i', long = "input")]
    pub input: PathBuf,
    /// Output workbook; stdout when omitted
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// Sketch file, replacing the workbook's own sketch
    #[arg(long)]
    pub sketch: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config document with wrangle/select/cluster/predict/autocomplete sections
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the model summary to stderr
    #[arg(long)]
    pub explain: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e.category() {
        Category::Infeasible => 3,
        Category::Io => 1,
        _ => 2,
    }
}

pub fn run(kind: TaskKind, a: &TaskArgs) -> Result<()> {
    let mut doc = io::load(&a.input)?;
    if let Some(p) = &a.sketch {
        doc.sketch = io::sketch_from_json_str(&fs::read_to_string(p)?)?;
    }
    let mut cfg = match &a.config {
        Some(p) => TaskConfig::from_json_str(&fs::read_to_string(p)?)?,
        None => TaskConfig::default(),
    };
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    let out = run_task(kind, &doc.workbook, &doc.sketch, &cfg)?;
    let text = io::to_json_string(&Document { workbook: out.workbook, sketch: out.sketch });
    match &a.output {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    if a.explain {
        eprintln!("{}", serde_json::to_string_pretty(&out.summary)?);
    }
    Ok(())
}
