//! Task dispatch and sessions with a linear history.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::autocomplete::{self, AutocompleteConfig, Completion};
use crate::cluster::{self, ClusterConfig};
use crate::constraints;
use crate::error::{Error, Result};
use crate::io::{self, Document, FileCellRef};
use crate::predict::PredictConfig;
use crate::select::{self, SelectConfig};
use crate::sheet::{CellRef, CellValue, Role, Sketch, Table, Workbook};
use crate::wrangle::{self, WrangleConfig, WranglingSketch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Wrangle,
    Select,
    Cluster,
    LearnConstraints,
    Predict,
    Autocomplete,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::Wrangle,
        TaskKind::Select,
        TaskKind::Cluster,
        TaskKind::LearnConstraints,
        TaskKind::Predict,
        TaskKind::Autocomplete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Wrangle => "wrangle",
            TaskKind::Select => "select",
            TaskKind::Cluster => "cluster",
            TaskKind::LearnConstraints => "learn_constraints",
            TaskKind::Predict => "predict",
            TaskKind::Autocomplete => "autocomplete",
        }
    }

    /// Sketch roles the task accepts.
    pub fn roles(self) -> &'static [Role] {
        match self {
            TaskKind::Wrangle | TaskKind::Cluster => &[Role::Group],
            TaskKind::Select => &[Role::Positive, Role::Negative],
            _ => &[Role::Input, Role::Target, Role::Exclude],
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<TaskKind> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "constraints" && *k == TaskKind::LearnConstraints))
            .ok_or_else(|| Error::NotFound(format!("unknown task kind '{s}'")))
    }
}

/// Every tunable of every task in one document.
///
/// A top-level `seed` overrides the per-section seeds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub seed: Option<u64>,
    pub wrangle: WrangleConfig,
    pub select: SelectConfig,
    pub cluster: ClusterConfig,
    pub predict: PredictConfig,
    pub autocomplete: AutocompleteConfig,
}

impl TaskConfig {
    pub fn from_json_str(s: &str) -> Result<TaskConfig> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Config with the top-level seed pushed into each section.
    pub fn resolved(&self) -> TaskConfig {
        let mut c = self.clone();
        if let Some(seed) = self.seed {
            c.select.seed = seed;
            c.cluster.seed = seed;
            c.predict.seed = seed;
            c.autocomplete.seed = seed;
        }
        c
    }

    fn completion(&self) -> AutocompleteConfig {
        self.autocomplete.clone()
    }

    fn prediction(&self) -> AutocompleteConfig {
        AutocompleteConfig { seed: self.predict.seed, members: self.predict.members, ..self.autocomplete.clone() }
    }
}

/// Result of one task: the new state plus a model summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutput {
    pub workbook: Workbook,
    pub sketch: Sketch,
    pub summary: Value,
    pub completion: Option<Completion>,
}

fn colored_table<'a>(wb: &'a Workbook, s: &Sketch, role: Role, what: &str) -> Result<&'a Table> {
    let cell = s
        .with_role(role)
        .flat_map(|c| c.cells.iter())
        .next()
        .ok_or_else(|| Error::TaskRole(format!("{what} requires {role} cells")))?;
    wb.require_table(&cell.table)
}

fn run_wrangle(wb: &Workbook, s: &Sketch, cfg: &WrangleConfig) -> Result<TaskOutput> {
    let table = colored_table(wb, s, Role::Group, "wrangle")?;
    let ws = WranglingSketch::from_sketch(s, table)?;
    let syn = wrangle::synthesize_program(table, &ws, cfg)?;
    let name = format!("{}_wrangled", table.name());
    let out = syn.grid.to_table(&name)?;
    let summary = json!({
        "table": table.name(),
        "output_table": name,
        "program": syn.program,
        "score": syn.score,
    });
    Ok(TaskOutput { workbook: wb.with_table(out), sketch: s.clone(), summary, completion: None })
}

fn run_select(wb: &Workbook, s: &Sketch, cfg: &SelectConfig) -> Result<TaskOutput> {
    colored_table(wb, s, Role::Positive, "select")?;
    let (sel, sketch) = select::select(wb, s, cfg)?;
    let summary = json!({ "queries": sel.rendered(), "warnings": sel.warnings });
    Ok(TaskOutput { workbook: wb.clone(), sketch, summary, completion: None })
}

fn run_cluster(wb: &Workbook, s: &Sketch, cfg: &ClusterConfig) -> Result<TaskOutput> {
    let table = colored_table(wb, s, Role::Group, "cluster")?;
    let out = cluster::cluster_table(table, s, cfg)?;
    let clusters: BTreeMap<&str, Vec<usize>> = out
        .assignment
        .members()
        .iter()
        .enumerate()
        .map(|(i, rows)| (out.colors[i].as_str(), rows.iter().map(|r| r + 1).collect()))
        .collect();
    let summary = json!({
        "table": table.name(),
        "constraints": out.constraints.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "k": out.assignment.k,
        "clusters": clusters,
    });
    Ok(TaskOutput { workbook: wb.with_table(out.table), sketch: out.sketch, summary, completion: None })
}

fn run_constraints(wb: &Workbook, s: &Sketch) -> Result<TaskOutput> {
    let found = constraints::learn_constraints(wb, s)?;
    let summary = json!({
        "constraints": found.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "instances": found,
    });
    Ok(TaskOutput { workbook: wb.clone(), sketch: s.clone(), summary, completion: None })
}

fn from_completion(c: Completion) -> Result<TaskOutput> {
    Ok(TaskOutput {
        workbook: c.workbook.clone(),
        sketch: c.sketch.clone(),
        summary: serde_json::to_value(&c.result)?,
        completion: Some(c),
    })
}

/// Runs `kind` on a workbook and sketch. Pure: the output depends only on the arguments.
pub fn run_task(kind: TaskKind, wb: &Workbook, s: &Sketch, cfg: &TaskConfig) -> Result<TaskOutput> {
    let cfg = cfg.resolved();
    let run = || -> Result<TaskOutput> {
        s.validate(wb)?;
        s.require_roles(kind.roles(), kind.name())?;
        match kind {
            TaskKind::Wrangle => run_wrangle(wb, s, &cfg.wrangle),
            TaskKind::Select => run_select(wb, s, &cfg.select),
            TaskKind::Cluster => run_cluster(wb, s, &cfg.cluster),
            TaskKind::LearnConstraints => run_constraints(wb, s),
            TaskKind::Predict => from_completion(autocomplete::predict_missing(wb, s, &cfg.prediction())?),
            TaskKind::Autocomplete => from_completion(autocomplete::complete(wb, s, &cfg.completion())?),
        }
    };
    run().map_err(|e| e.context(kind.name()))
}

/// One state of a session. `kind` is None for the loaded state and sketch edits.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub workbook: Workbook,
    pub sketch: Sketch,
    pub kind: Option<TaskKind>,
    pub summary: Value,
    pub config: TaskConfig,
    pub completion: Option<Completion>,
}

impl HistoryEntry {
    pub fn document(&self) -> Document {
        Document { workbook: self.workbook.clone(), sketch: self.sketch.clone() }
    }

    fn brief(&self, index: usize) -> Value {
        json!({
            "index": index,
            "kind": self.kind.map_or("edit", TaskKind::name),
            "summary": self.summary,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    history: Vec<HistoryEntry>,
    current: usize,
}

impl Session {
    pub fn new(id: impl Into<String>, wb: Workbook, sketch: Sketch) -> Result<Session> {
        sketch.validate(&wb)?;
        let first = HistoryEntry {
            workbook: wb,
            sketch,
            kind: None,
            summary: json!({ "loaded": true }),
            config: TaskConfig::default(),
            completion: None,
        };
        Ok(Session { id: id.into(), history: vec![first], current: 0 })
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn current_index(&self) -> usize {
        self.current
    }

    pub fn current(&self) -> &HistoryEntry {
        &self.history[self.current]
    }

    fn push(&mut self, entry: HistoryEntry) -> &HistoryEntry {
        self.history.truncate(self.current + 1);
        self.history.push(entry);
        self.current = self.history.len() - 1;
        &self.history[self.current]
    }

    /// Replaces the sketch of the current state, recorded as a new entry.
    pub fn set_sketch(&mut self, sketch: Sketch) -> Result<()> {
        sketch.validate(&self.current().workbook)?;
        let cur = self.current();
        let entry = HistoryEntry {
            workbook: cur.workbook.clone(),
            sketch,
            kind: None,
            summary: json!({ "sketch": true }),
            config: TaskConfig::default(),
            completion: None,
        };
        self.push(entry);
        Ok(())
    }

    pub fn run_task(&mut self, kind: TaskKind, cfg: &TaskConfig) -> Result<&HistoryEntry> {
        let cur = self.current();
        let out = run_task(kind, &cur.workbook, &cur.sketch, cfg)?;
        Ok(self.push(HistoryEntry {
            workbook: out.workbook,
            sketch: out.sketch,
            kind: Some(kind),
            summary: out.summary,
            config: cfg.clone(),
            completion: out.completion,
        }))
    }

    /// Corrects cells of the current auto-completion and reruns it from the
    /// state it was computed on.
    pub fn correct(&mut self, corrections: &BTreeMap<CellRef, CellValue>) -> Result<&HistoryEntry> {
        let cur = self.current();
        let prev = match (&cur.completion, cur.kind) {
            (Some(c), Some(TaskKind::Autocomplete)) if self.current > 0 => c,
            _ => return Err(Error::InvalidArgs("the current state is not an auto-completion".into())),
        };
        let base = &self.history[self.current - 1];
        let cfg = cur.config.clone();
        let done = autocomplete::correct_and_rerun(prev, corrections, &base.workbook, &base.sketch, &cfg.resolved().autocomplete)
            .map_err(|e| e.context("corrections"))?;
        let out = from_completion(done)?;
        // the rerun replaces the completion it corrects
        self.current -= 1;
        Ok(self.push(HistoryEntry {
            workbook: out.workbook,
            sketch: out.sketch,
            kind: Some(TaskKind::Autocomplete),
            summary: out.summary,
            config: cfg,
            completion: out.completion,
        }))
    }

    pub fn revert(&mut self, index: usize) -> Result<()> {
        if index >= self.history.len() {
            return Err(Error::Index(format!("history index {index} out of range 0..{}", self.history.len())));
        }
        self.current = index;
        Ok(())
    }

    /// Current workbook and sketch plus a summary of every history entry.
    pub fn snapshot(&self) -> Value {
        json!({
            "id": self.id,
            "current": self.current,
            "document": io::to_json_value(&self.current().document()),
            "history": self.history.iter().enumerate().map(|(i, h)| h.brief(i)).collect::<Vec<_>>(),
        })
    }
}

/// Parses `{"corrections": [{"cell": {"table", "row", "col"}, "value": v}]}`
/// with 1-based addresses and workbook cell syntax.
pub fn corrections_from_json(v: &Value) -> Result<BTreeMap<CellRef, CellValue>> {
    #[derive(Deserialize)]
    struct Item {
        cell: FileCellRef,
        value: CellValue,
    }
    #[derive(Deserialize)]
    struct Body {
        corrections: Vec<Item>,
    }
    let body: Body = serde_json::from_value(v.clone()).map_err(|e| Error::InvalidArgs(e.to_string()))?;
    let mut out = BTreeMap::new();
    for item in body.corrections {
        out.insert(item.cell.to_internal()?, item.value);
    }
    Ok(out)
}
