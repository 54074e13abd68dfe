//! Predictive auto-completion under discovered formulas and constraints.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::constraints::{check_constraint, find_constraints, restricted_blocks, ConstraintInstance, Orientation, Template};
use crate::error::{Error, Result};
use crate::io::FileCellRef;
use crate::predict::{derive_prediction_task, train_ensemble, Ensemble, MemberSummary, PredictConfig, PredictionTask};
use crate::sheet::{CellRef, CellValue, Coloring, Role, Sketch, Table, Workbook};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutocompleteConfig {
    pub seed: u64,
    pub members: usize,
    /// Members whose normalized weight falls below this are ignored.
    pub min_weight: f64,
}

impl Default for AutocompleteConfig {
    fn default() -> Self {
        AutocompleteConfig { seed: 0, members: 7, min_weight: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Formula(ConstraintInstance),
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub col: usize,
    pub name: String,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionPlan {
    pub steps: Vec<PlanStep>,
}

impl CompletionPlan {
    pub fn order(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.name.as_str()).collect()
    }
}

/// Formulas computing a column of `table` from other columns of it.
fn column_formulas<'a>(table: &str, constraints: &'a [ConstraintInstance]) -> Vec<&'a ConstraintInstance> {
    constraints
        .iter()
        .filter(|c| c.template.is_formula())
        .filter(|c| c.args.iter().all(|a| a.table == table && a.orientation == Orientation::Column))
        .collect()
}

/// Orders targets so each formula's inputs precede the column it computes;
/// ties go left to right.
pub fn plan_completion(wb: &Workbook, task: &PredictionTask, constraints: &[ConstraintInstance]) -> Result<CompletionPlan> {
    let t = wb.require_table(&task.table)?;
    let targets: BTreeSet<usize> = task.target_cols.iter().copied().collect();
    let formulas = column_formulas(&task.table, constraints);
    let chosen: BTreeMap<usize, &ConstraintInstance> = targets
        .iter()
        .filter_map(|&c| formulas.iter().find(|f| f.args[0].index == c).map(|f| (c, *f)))
        .collect();
    let deps: BTreeMap<usize, BTreeSet<usize>> = targets
        .iter()
        .map(|&c| {
            let d = chosen
                .get(&c)
                .map(|f| f.args[1..].iter().map(|a| a.index).filter(|i| targets.contains(i)).collect())
                .unwrap_or_default();
            (c, d)
        })
        .collect();
    let mut done: BTreeSet<usize> = BTreeSet::new();
    let mut steps = Vec::new();
    while done.len() < targets.len() {
        let next = targets.iter().find(|c| !done.contains(c) && deps[c].is_subset(&done));
        let Some(&c) = next else {
            let rest: Vec<usize> = targets.iter().copied().filter(|c| !done.contains(c)).collect();
            return Err(Error::Cycle(find_cycle(&rest, &deps).iter().map(|&c| t.header()[c].clone()).collect()));
        };
        done.insert(c);
        let strategy = chosen.get(&c).map_or(Strategy::Ensemble, |f| Strategy::Formula((*f).clone()));
        steps.push(PlanStep { col: c, name: t.header()[c].clone(), strategy });
    }
    Ok(CompletionPlan { steps })
}

fn find_cycle(rest: &[usize], deps: &BTreeMap<usize, BTreeSet<usize>>) -> Vec<usize> {
    let mut path = vec![rest[0]];
    loop {
        let last = *path.last().unwrap();
        let next = *deps[&last].iter().find(|d| rest.contains(d)).expect("every remaining target waits on another");
        if let Some(i) = path.iter().position(|&p| p == next) {
            let mut cycle = path[i..].to_vec();
            cycle.push(next);
            return cycle;
        }
        path.push(next);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Formula,
    Predicted,
    Corrected,
}

pub const CONSTRAINT_VIOLATING: &str = "constraint_violating";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilledCell {
    pub cell: FileCellRef,
    pub value: CellValue,
    pub provenance: Provenance,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub target: String,
    pub members: Vec<MemberSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub filled: Vec<FilledCell>,
    pub models: Vec<ModelSummary>,
    pub formulas: Vec<String>,
    pub plan: Vec<String>,
    pub unfillable: Vec<FileCellRef>,
}

/// A completion together with what is needed to rerun it after corrections.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub result: CompletionResult,
    pub workbook: Workbook,
    pub sketch: Sketch,
    pub corrections: BTreeMap<CellRef, CellValue>,
}

/// Fills the Missing target cells of the sketch's prediction task.
pub fn complete(wb: &Workbook, s: &Sketch, cfg: &AutocompleteConfig) -> Result<Completion> {
    complete_with(wb, s, &BTreeMap::new(), cfg, true)
}

/// Fills Missing target cells from the ensembles alone, without formulas or
/// constraint filtering.
pub fn predict_missing(wb: &Workbook, s: &Sketch, cfg: &AutocompleteConfig) -> Result<Completion> {
    complete_with(wb, s, &BTreeMap::new(), cfg, false)
}

/// Applies user corrections to `prev` and reruns from the original workbook.
/// Corrected cells stay fixed and join the training data.
pub fn correct_and_rerun(
    prev: &Completion,
    corrections: &BTreeMap<CellRef, CellValue>,
    wb: &Workbook,
    s: &Sketch,
    cfg: &AutocompleteConfig,
) -> Result<Completion> {
    let task = derive_prediction_task(wb, s)?;
    let t = wb.require_table(&task.table)?;
    for (cell, v) in corrections {
        let filled = prev.result.filled.iter().any(|f| f.cell.to_internal().ok().as_ref() == Some(cell));
        let open = cell.table == task.table
            && task.target_cols.contains(&cell.col)
            && !task.excluded_rows.contains(&cell.row)
            && t.cell(cell.row, cell.col).is_some_and(|c| c.is_missing());
        if !filled && !open {
            return Err(Error::InvalidArgs(format!("cell {cell} is outside the completed region")));
        }
        if !v.is_observed() {
            return Err(Error::InvalidArgs(format!("correction for {cell} must be a value")));
        }
    }
    let mut all = prev.corrections.clone();
    all.extend(corrections.iter().map(|(c, v)| (c.clone(), v.clone())));
    complete_with(wb, s, &all, cfg, true)
}

fn single_row(c: &ConstraintInstance, row: usize) -> Option<ConstraintInstance> {
    if !(c.template.is_formula() || c.template == Template::Equal) {
        return None;
    }
    let mut one = c.clone();
    for a in one.args.iter_mut() {
        if a.orientation != Orientation::Column {
            return None;
        }
        a.positions = vec![row];
    }
    Some(one)
}

fn touches(c: &ConstraintInstance, table: &str, col: usize) -> bool {
    c.args.iter().any(|a| a.table == table && a.orientation == Orientation::Column && a.index == col)
}

/// Whether every applicable constraint holds after writing `v` at (`row`, `col`).
fn admissible(wb: &Workbook, t: &Table, constraints: &[&ConstraintInstance], row: usize, col: usize, v: &CellValue) -> Result<bool> {
    let trial = wb.with_table(t.with_cell(row, col, v.clone())?);
    for c in constraints {
        let probe = single_row(c, row);
        let c = probe.as_ref().unwrap_or(c);
        if !check_constraint(c, &trial)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn complete_with(
    wb: &Workbook,
    s: &Sketch,
    corrections: &BTreeMap<CellRef, CellValue>,
    cfg: &AutocompleteConfig,
    use_constraints: bool,
) -> Result<Completion> {
    let task = derive_prediction_task(wb, s)?;
    let original = wb.require_table(&task.table)?.clone();
    let mut t = original.clone();
    for (cell, v) in corrections {
        t = t.with_cell(cell.row, cell.col, v.clone())?;
    }
    let mut cur = wb.with_table(t.clone());

    let rows: Vec<usize> = (0..t.n_rows()).filter(|r| !task.excluded_rows.contains(r)).collect();
    let mut cols: Vec<usize> = task.input_cols.iter().chain(&task.target_cols).copied().collect();
    cols.sort_unstable();
    let constraints = if use_constraints { find_constraints(&restricted_blocks(&t, &rows, &cols)) } else { Vec::new() };
    let plan = plan_completion(&cur, &task, &constraints)?;

    let mut provenance: BTreeMap<(usize, usize), Provenance> = BTreeMap::new();
    for cell in corrections.keys() {
        provenance.insert((cell.row, cell.col), Provenance::Corrected);
    }
    let mut flags: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut unfillable = Vec::new();
    let mut models = Vec::new();
    let pcfg = PredictConfig { seed: cfg.seed, members: cfg.members };

    for step in &plan.steps {
        let c = step.col;
        let open: Vec<usize> = rows.iter().copied().filter(|&r| t.rows()[r][c].is_missing()).collect();
        if open.is_empty() {
            continue;
        }
        let applicable: Vec<&ConstraintInstance> = constraints.iter().filter(|k| touches(k, &task.table, c)).collect();
        let mut ensemble: Option<Ensemble> = None;
        for r in open {
            if let Strategy::Formula(f) = &step.strategy {
                let xs: Option<Vec<f64>> = f.args[1..].iter().map(|a| t.rows()[r][a.index].as_f64()).collect();
                if let Some(v) = xs.and_then(|xs| f.compute(&xs)).and_then(CellValue::number) {
                    t = t.with_cell(r, c, v)?;
                    provenance.insert((r, c), Provenance::Formula);
                    continue;
                }
            }
            if ensemble.is_none() {
                let mut e = train_ensemble(&cur, &task, c, &pcfg).map_err(|e| e.context(format!("column '{}'", step.name)))?;
                e.prune(cfg.min_weight);
                models.push(ModelSummary { target: step.name.clone(), members: e.summary(&t) });
                ensemble = Some(e);
            }
            let e = ensemble.as_ref().unwrap();
            let cands = match e.predict_candidates(&t.rows()[r]) {
                Ok(c) => c,
                Err(Error::NoPrediction(_)) => {
                    unfillable.push(FileCellRef::from(&CellRef::new(t.name(), r, c)));
                    continue;
                }
                Err(err) => return Err(err),
            };
            let mut pick = None;
            for (v, _) in &cands {
                if admissible(&cur, &t, &applicable, r, c, v)? {
                    pick = Some(v.clone());
                    break;
                }
            }
            let v = pick.unwrap_or_else(|| {
                flags.insert((r, c));
                cands[0].0.clone()
            });
            t = t.with_cell(r, c, v)?;
            provenance.insert((r, c), Provenance::Predicted);
        }
        cur = wb.with_table(t.clone());
    }

    // formulas must hold on every touched row unless flagged
    for f in column_formulas(&task.table, &constraints) {
        let touched: BTreeSet<usize> = provenance.keys().map(|&(r, _)| r).collect();
        for r in touched {
            let one = single_row(f, r).expect("formula over columns");
            if !check_constraint(&one, &cur)? {
                for a in &f.args {
                    if provenance.contains_key(&(r, a.index)) {
                        flags.insert((r, a.index));
                    }
                }
            }
        }
    }

    let filled: Vec<FilledCell> = provenance
        .iter()
        .map(|(&(r, c), &p)| FilledCell {
            cell: FileCellRef::from(&CellRef::new(t.name(), r, c)),
            value: t.rows()[r][c].clone(),
            provenance: p,
            flags: if flags.contains(&(r, c)) { vec![CONSTRAINT_VIOLATING.to_string()] } else { vec![] },
        })
        .collect();
    let sketch = output_sketch(s, &task, &t, &provenance);
    let result = CompletionResult {
        filled,
        models,
        formulas: column_formulas(&task.table, &constraints).iter().map(|f| f.to_string()).collect(),
        plan: plan.order().iter().map(|s| s.to_string()).collect(),
        unfillable,
    };
    Ok(Completion { result, workbook: cur, sketch, corrections: corrections.clone() })
}

/// The input sketch with an explicit target coloring covering the target
/// columns; machine-filled cells are marked machine-generated.
fn output_sketch(s: &Sketch, task: &PredictionTask, t: &Table, provenance: &BTreeMap<(usize, usize), Provenance>) -> Sketch {
    let mut out = s.clone();
    let taken: BTreeSet<CellRef> = s.colorings.iter().filter(|c| c.role != Role::Target).flat_map(|c| c.cells.iter().cloned()).collect();
    let cells: Vec<CellRef> = task
        .target_cols
        .iter()
        .flat_map(|&c| (0..t.n_rows()).filter(|r| !task.excluded_rows.contains(r)).map(move |r| CellRef::new(t.name(), r, c)))
        .filter(|c| !taken.contains(c))
        .collect();
    match out.colorings.iter_mut().find(|c| c.role == Role::Target) {
        Some(target) => target.cells.extend(cells),
        None => {
            let mut name = "target".to_string();
            while out.colorings.iter().any(|c| c.color == name) {
                name.push('_');
            }
            out.colorings.push(Coloring::new(name, Role::Target, cells));
        }
    }
    let colored: BTreeSet<CellRef> = out.colorings.iter().flat_map(|c| c.cells.iter().cloned()).collect();
    out.machine_generated.extend(
        provenance
            .iter()
            .filter(|(_, p)| **p != Provenance::Corrected)
            .map(|(&(r, c), _)| CellRef::new(t.name(), r, c))
            .filter(|c| colored.contains(c)),
    );
    for (&(r, c), p) in provenance {
        if *p == Provenance::Corrected {
            out.machine_generated.remove(&CellRef::new(t.name(), r, c));
        }
    }
    out
}
