//! Prediction tasks and calibrated ensembles of simple predictors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{gower_distance, Feature, FeatureSpace};
use crate::error::{Error, Result};
use crate::par;
use crate::sheet::{CellValue, Role, Sketch, Table, TypeTag, Workbook};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Rmse,
    Accuracy,
}

/// What to predict from what, on one table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionTask {
    pub table: String,
    pub input_cols: Vec<usize>,
    pub target_cols: Vec<usize>,
    pub excluded_rows: BTreeSet<usize>,
    /// One per target.
    pub losses: Vec<Loss>,
}

impl PredictionTask {
    pub fn loss_of(&self, target: usize) -> Loss {
        let i = self.target_cols.iter().position(|&c| c == target).expect("target column");
        self.losses[i]
    }
}

/// Maps input, target and exclude colorings onto a task, applying the defaults
/// for missing inputs (all other columns) and targets (columns with Missing cells).
pub fn derive_prediction_task(wb: &Workbook, s: &Sketch) -> Result<PredictionTask> {
    s.require_roles(&[Role::Input, Role::Target, Role::Exclude], "prediction")?;
    let tables: BTreeSet<&str> = s.colorings.iter().flat_map(|c| c.cells.iter()).map(|c| c.table.as_str()).collect();
    let t = match tables.len() {
        0 => wb
            .tables()
            .iter()
            .find(|t| t.rows().iter().flatten().any(|c| c.is_missing()))
            .or_else(|| wb.tables().first())
            .ok_or_else(|| Error::InvalidArgs("workbook has no tables".into()))?,
        1 => wb.require_table(tables.first().unwrap())?,
        _ => {
            let names: Vec<&str> = tables.into_iter().collect();
            return Err(Error::InvalidSketch(format!("prediction sketch spans several tables: {}", names.join(", "))));
        }
    };
    let cols_of = |role: Role| -> BTreeSet<usize> { s.with_role(role).flat_map(|c| c.cells.iter()).map(|c| c.col).collect() };
    let mut inputs = cols_of(Role::Input);
    let mut targets = cols_of(Role::Target);
    let excluded: BTreeSet<usize> = s.with_role(Role::Exclude).flat_map(|c| c.cells.iter()).map(|c| c.row).collect();
    if let Some(c) = inputs.intersection(&targets).next() {
        return Err(Error::InvalidSketch(format!("column '{}' is colored both input and target", t.header()[*c])));
    }
    if targets.is_empty() {
        targets = (0..t.n_cols())
            .filter(|c| !inputs.contains(c))
            .filter(|&c| t.rows().iter().enumerate().any(|(r, row)| !excluded.contains(&r) && row[c].is_missing()))
            .collect();
        if targets.is_empty() {
            return Err(Error::InvalidArgs(format!("table '{}' has no Missing cells to predict", t.name())));
        }
    }
    if inputs.is_empty() {
        inputs = (0..t.n_cols()).filter(|c| !targets.contains(c)).collect();
    }
    let mut losses = Vec::new();
    for &c in &targets {
        let observed: Vec<&CellValue> = t
            .rows()
            .iter()
            .enumerate()
            .filter(|(r, _)| !excluded.contains(r))
            .map(|(_, row)| &row[c])
            .filter(|v| v.is_observed())
            .collect();
        if observed.is_empty() {
            return Err(Error::UntrainableTarget(format!("target column '{}' has no observed values", t.header()[c])));
        }
        losses.push(if TypeTag::infer(observed) == TypeTag::Numeric { Loss::Rmse } else { Loss::Accuracy });
    }
    Ok(PredictionTask {
        table: t.name().to_string(),
        input_cols: inputs.into_iter().collect(),
        target_cols: targets.into_iter().collect(),
        excluded_rows: excluded,
        losses,
    })
}

/// Training data for one member: feature rows and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub x: Vec<Vec<CellValue>>,
    pub y: Vec<CellValue>,
    pub numeric_target: bool,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn without(&self, i: usize) -> Frame {
        let mut f = self.clone();
        f.x.remove(i);
        f.y.remove(i);
        f
    }

    fn numeric_feature(&self, j: usize) -> bool {
        !self.x.is_empty() && self.x.iter().all(|r| r[j].as_f64().is_some())
    }
}

/// Rows of `t` usable for training on `inputs` → `target`.
pub fn training_frame(t: &Table, inputs: &[usize], target: usize, excluded: &BTreeSet<usize>, numeric_target: bool) -> Frame {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (r, row) in t.rows().iter().enumerate() {
        if excluded.contains(&r) || !row[target].is_observed() || inputs.iter().any(|&c| !row[c].is_observed()) {
            continue;
        }
        x.push(inputs.iter().map(|&c| row[c].clone()).collect());
        y.push(row[target].clone());
    }
    Frame { x, y, numeric_target }
}

/// A fitted model over a member's input subset; `None` means abstain.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &[CellValue]) -> Option<CellValue>;
}

/// Something that can be fit to a frame.
pub trait Learner: Sync {
    fn name(&self) -> String;
    fn fit(&self, data: &Frame) -> Box<dyn Predictor>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Baseline,
    Knn,
    LinearLsq,
    Tree,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Baseline => "baseline",
            Family::Knn => "knn",
            Family::LinearLsq => "linear_lsq",
            Family::Tree => "tree",
        })
    }
}

pub const KNN_K: usize = 3;
pub const TREE_DEPTH: usize = 3;

impl Learner for Family {
    fn name(&self) -> String {
        self.to_string()
    }

    fn fit(&self, data: &Frame) -> Box<dyn Predictor> {
        match self {
            Family::Baseline => Box::new(Constant(central(&data.y, data.numeric_target))),
            Family::Knn => Box::new(Knn::fit(data)),
            Family::LinearLsq => Box::new(Linear::fit(data)),
            Family::Tree => Box::new(Tree { root: grow(data, &(0..data.len()).collect::<Vec<_>>(), TREE_DEPTH) }),
        }
    }
}

/// Mean of numeric targets or the most frequent value (ties to the smallest).
fn central(ys: &[CellValue], numeric: bool) -> Option<CellValue> {
    if ys.is_empty() {
        return None;
    }
    if numeric {
        let xs: Vec<f64> = ys.iter().filter_map(|v| v.as_f64()).collect();
        return CellValue::number(xs.iter().sum::<f64>() / xs.len() as f64);
    }
    let mut counts: BTreeMap<&CellValue, usize> = BTreeMap::new();
    for y in ys {
        *counts.entry(y).or_default() += 1;
    }
    let best = *counts.values().max().unwrap();
    counts.into_iter().find(|(_, n)| *n == best).map(|(v, _)| v.clone())
}

struct Constant(Option<CellValue>);

impl Predictor for Constant {
    fn predict(&self, _: &[CellValue]) -> Option<CellValue> {
        self.0.clone()
    }
}

struct Knn {
    data: Frame,
    fs: FeatureSpace,
}

impl Knn {
    fn fit(data: &Frame) -> Knn {
        let width = data.x.first().map_or(0, |r| r.len());
        let features = (0..width)
            .map(|j| {
                if data.numeric_feature(j) {
                    let xs = data.x.iter().map(|r| r[j].as_f64().unwrap());
                    let (min, max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                    Feature::Numeric { min, max }
                } else {
                    Feature::Categorical
                }
            })
            .collect();
        Knn { data: data.clone(), fs: FeatureSpace { features } }
    }
}

impl Predictor for Knn {
    fn predict(&self, x: &[CellValue]) -> Option<CellValue> {
        if x.iter().any(|v| !v.is_observed()) {
            return None;
        }
        let mut d: Vec<(f64, usize)> =
            self.data.x.iter().enumerate().map(|(i, r)| (gower_distance(x, r, &self.fs), i)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let near: Vec<CellValue> = d.iter().take(KNN_K).map(|&(_, i)| self.data.y[i].clone()).collect();
        central(&near, self.data.numeric_target)
    }
}

/// Encoded design: numeric inputs as is, categorical inputs one-hot.
#[derive(Debug, Clone)]
enum Column {
    Numeric(usize),
    Indicator(usize, CellValue),
}

struct Linear {
    columns: Vec<Column>,
    coef: Option<DVector<f64>>,
}

impl Linear {
    fn encode(columns: &[Column], x: &[CellValue]) -> Option<Vec<f64>> {
        let mut out = vec![1.0];
        for c in columns {
            out.push(match c {
                Column::Numeric(j) => x[*j].as_f64()?,
                Column::Indicator(j, v) => f64::from(u8::from(x[*j] == *v)),
            });
        }
        Some(out)
    }

    fn fit(data: &Frame) -> Linear {
        let width = data.x.first().map_or(0, |r| r.len());
        let mut columns = Vec::new();
        for j in 0..width {
            if data.numeric_feature(j) {
                columns.push(Column::Numeric(j));
            } else {
                let levels: BTreeSet<&CellValue> = data.x.iter().map(|r| &r[j]).collect();
                columns.extend(levels.into_iter().map(|v| Column::Indicator(j, v.clone())));
            }
        }
        let ys: Option<Vec<f64>> = data.y.iter().map(|v| v.as_f64()).collect();
        let coef = ys.filter(|ys| !ys.is_empty()).and_then(|ys| {
            let rows: Vec<Vec<f64>> = data.x.iter().filter_map(|r| Linear::encode(&columns, r)).collect();
            let a = DMatrix::from_fn(rows.len(), columns.len() + 1, |i, j| rows[i][j]);
            let b = DVector::from_vec(ys);
            a.svd(true, true).solve(&b, 1e-9).ok()
        });
        Linear { columns, coef }
    }
}

impl Predictor for Linear {
    fn predict(&self, x: &[CellValue]) -> Option<CellValue> {
        let coef = self.coef.as_ref()?;
        let row = Linear::encode(&self.columns, x)?;
        CellValue::number(row.iter().zip(coef.iter()).map(|(a, b)| a * b).sum())
    }
}

#[derive(Debug, Clone)]
enum Test {
    Le(f64),
    Eq(CellValue),
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Option<CellValue>),
    Split { feature: usize, test: Test, yes: Box<Node>, no: Box<Node> },
}

struct Tree {
    root: Node,
}

fn impurity(data: &Frame, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    if data.numeric_target {
        let ys: Vec<f64> = idx.iter().filter_map(|&i| data.y[i].as_f64()).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        ys.iter().map(|y| (y - mean).powi(2)).sum()
    } else {
        let mut counts: BTreeMap<&CellValue, usize> = BTreeMap::new();
        for &i in idx {
            *counts.entry(&data.y[i]).or_default() += 1;
        }
        let n = idx.len() as f64;
        n * (1.0 - counts.values().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
    }
}

fn passes(test: &Test, v: &CellValue) -> bool {
    match test {
        Test::Le(t) => v.as_f64().is_some_and(|x| x <= *t),
        Test::Eq(c) => v == c,
    }
}

/// Exhaustive best-split tree; leaves hold the mean or majority.
fn grow(data: &Frame, idx: &[usize], depth: usize) -> Node {
    let leaf = || Node::Leaf(central(&idx.iter().map(|&i| data.y[i].clone()).collect::<Vec<_>>(), data.numeric_target));
    let base = impurity(data, idx);
    if depth == 0 || idx.len() < 2 || base <= 1e-12 {
        return leaf();
    }
    let width = data.x.first().map_or(0, |r| r.len());
    let mut best: Option<(f64, usize, Test)> = None;
    for j in 0..width {
        let tests: Vec<Test> = if data.numeric_feature(j) {
            let vals: BTreeSet<CellValue> = idx.iter().map(|&i| data.x[i][j].clone()).collect();
            let xs: Vec<f64> = vals.iter().filter_map(|v| v.as_f64()).collect();
            xs.windows(2).map(|w| Test::Le((w[0] + w[1]) / 2.0)).collect()
        } else {
            let vals: BTreeSet<CellValue> = idx.iter().map(|&i| data.x[i][j].clone()).collect();
            if vals.len() < 2 {
                continue;
            }
            vals.into_iter().map(Test::Eq).collect()
        };
        for test in tests {
            let (yes, no): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| passes(&test, &data.x[i][j]));
            if yes.is_empty() || no.is_empty() {
                continue;
            }
            let cost = impurity(data, &yes) + impurity(data, &no);
            if best.as_ref().is_none_or(|b| cost < b.0 - 1e-12) {
                best = Some((cost, j, test));
            }
        }
    }
    match best {
        Some((cost, feature, test)) if cost < base - 1e-12 => {
            let (yes, no): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| passes(&test, &data.x[i][feature]));
            Node::Split {
                feature,
                test,
                yes: Box::new(grow(data, &yes, depth - 1)),
                no: Box::new(grow(data, &no, depth - 1)),
            }
        }
        _ => leaf(),
    }
}

impl Predictor for Tree {
    fn predict(&self, x: &[CellValue]) -> Option<CellValue> {
        if x.iter().any(|v| !v.is_observed()) {
            return None;
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(v) => return v.clone(),
                Node::Split { feature, test, yes, no } => node = if passes(test, &x[*feature]) { yes } else { no },
            }
        }
    }
}

/// Leave-one-out calibration of a learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMap {
    /// `matrix[p][t]` = P(true = classes[t] | predicted = classes[p]).
    Classifier { classes: Vec<CellValue>, matrix: Vec<Vec<f64>> },
    Regressor { bias: f64, sigma: f64 },
}

impl CalibrationMap {
    /// P(true = `truth` | predicted = `pred`); unknown predictions are taken at face value.
    pub fn prob(&self, truth: &CellValue, pred: &CellValue) -> f64 {
        match self {
            CalibrationMap::Classifier { classes, matrix } => {
                match (classes.iter().position(|c| c == pred), classes.iter().position(|c| c == truth)) {
                    (Some(p), Some(t)) => matrix[p][t],
                    (None, _) => f64::from(u8::from(truth == pred)),
                    _ => 0.0,
                }
            }
            CalibrationMap::Regressor { .. } => f64::from(u8::from(truth == pred)),
        }
    }
}

/// Calibrates `learner` on `data` by leave-one-out; returns the map and the LOO
/// score (accuracy, or 1/(1+RMSE) for numeric targets).
pub fn calibrate(learner: &dyn Learner, data: &Frame) -> (CalibrationMap, f64) {
    let n = data.len();
    let preds: Vec<Option<CellValue>> = (0..n).map(|i| learner.fit(&data.without(i)).predict(&data.x[i])).collect();
    if data.numeric_target {
        let res: Vec<f64> = preds
            .iter()
            .zip(&data.y)
            .filter_map(|(p, y)| Some(y.as_f64()? - p.as_ref()?.as_f64()?))
            .collect();
        if res.is_empty() {
            return (CalibrationMap::Regressor { bias: 0.0, sigma: 0.0 }, 0.0);
        }
        let k = res.len() as f64;
        let bias = res.iter().sum::<f64>() / k;
        let sigma = if res.len() < 2 { 0.0 } else { (res.iter().map(|r| (r - bias).powi(2)).sum::<f64>() / (k - 1.0)).sqrt() };
        let rmse = (res.iter().map(|r| r * r).sum::<f64>() / k).sqrt();
        // abstentions count against the score
        let score = (k / n as f64) / (1.0 + rmse);
        (CalibrationMap::Regressor { bias, sigma }, score)
    } else {
        let classes: Vec<CellValue> = data.y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let q = classes.len();
        let mut counts = vec![vec![0usize; q]; q];
        let mut correct = 0usize;
        for (p, y) in preds.iter().zip(&data.y) {
            let Some(p) = p else { continue };
            correct += usize::from(p == y);
            if let (Some(pi), Some(ti)) = (classes.iter().position(|c| c == p), classes.iter().position(|c| c == y)) {
                counts[pi][ti] += 1;
            }
        }
        let matrix = counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter().map(|&c| (c + 1) as f64 / (total + q) as f64).collect()
            })
            .collect();
        (CalibrationMap::Classifier { classes, matrix }, correct as f64 / n.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictConfig {
    pub seed: u64,
    pub members: usize,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig { seed: 0, members: 7 }
    }
}

pub struct Member {
    pub family: Family,
    pub inputs: Vec<usize>,
    pub model: Box<dyn Predictor>,
    pub calibration: CalibrationMap,
    pub score: f64,
    pub weight: f64,
    pub training_rows: usize,
}

/// Per-member description for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub family: Family,
    pub inputs: Vec<String>,
    pub loo_score: f64,
    pub weight: f64,
    pub training_rows: usize,
    pub calibration: CalibrationMap,
}

pub struct Ensemble {
    pub table: String,
    pub target: usize,
    pub target_name: String,
    pub numeric: bool,
    pub members: Vec<Member>,
}

impl fmt::Debug for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ensemble").field("target", &self.target_name).field("members", &self.members.len()).finish()
    }
}

fn normalize(ms: &mut [Member]) {
    let total: f64 = ms.iter().map(|m| m.score).sum();
    let n = ms.len() as f64;
    for m in ms.iter_mut() {
        m.weight = if total > 0.0 { m.score / total } else { 1.0 / n };
    }
}

impl Ensemble {
    pub fn summary(&self, t: &Table) -> Vec<MemberSummary> {
        self.members
            .iter()
            .map(|m| MemberSummary {
                family: m.family,
                inputs: m.inputs.iter().map(|&c| t.header()[c].clone()).collect(),
                loo_score: m.score,
                weight: m.weight,
                training_rows: m.training_rows,
                calibration: m.calibration.clone(),
            })
            .collect()
    }

    /// Drops members below `min_weight` and renormalizes; keeps the best member if all fall below.
    pub fn prune(&mut self, min_weight: f64) {
        if self.members.iter().all(|m| m.weight < min_weight) {
            let best = self
                .members
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.weight.total_cmp(&b.1.weight).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i);
            let mut i = 0;
            self.members.retain(|_| {
                i += 1;
                Some(i - 1) == best
            });
        } else {
            self.members.retain(|m| m.weight >= min_weight);
        }
        normalize(&mut self.members);
    }

    /// Ranked candidate values for the target of `row` (a full table row).
    pub fn predict_candidates(&self, row: &[CellValue]) -> Result<Vec<(CellValue, f64)>> {
        let votes: Vec<(&Member, CellValue)> = self
            .members
            .iter()
            .filter_map(|m| {
                let x: Vec<CellValue> = m.inputs.iter().map(|&c| row[c].clone()).collect();
                if x.iter().any(|v| !v.is_observed()) {
                    return None;
                }
                m.model.predict(&x).map(|p| (m, p))
            })
            .collect();
        if votes.is_empty() {
            return Err(Error::NoPrediction(format!("every member abstains on '{}'", self.target_name)));
        }
        let mut out: Vec<(CellValue, f64)> = if self.numeric {
            // (value, score, sigma)
            let mut merged: Vec<(f64, f64, f64)> = Vec::new();
            for (m, p) in &votes {
                let CalibrationMap::Regressor { bias, sigma } = m.calibration else { continue };
                let Some(v) = p.as_f64().map(|x| x + bias) else { continue };
                match merged.iter_mut().find(|c| (c.0 - v).abs() <= 0.5 * c.2.min(sigma)) {
                    Some(c) => {
                        let w = c.1 + m.weight;
                        if w > 0.0 {
                            c.0 = (c.0 * c.1 + v * m.weight) / w;
                        }
                        c.1 = w;
                        c.2 = c.2.min(sigma);
                    }
                    None => merged.push((v, m.weight, sigma)),
                }
            }
            merged.into_iter().filter_map(|(v, s, _)| Some((CellValue::number(v)?, s))).collect()
        } else {
            let mut scores: BTreeMap<CellValue, f64> = BTreeMap::new();
            for (m, p) in &votes {
                match &m.calibration {
                    CalibrationMap::Classifier { classes, .. } if classes.contains(p) => {
                        for c in classes {
                            *scores.entry(c.clone()).or_default() += m.weight * m.calibration.prob(c, p);
                        }
                    }
                    _ => *scores.entry(p.clone()).or_default() += m.weight,
                }
            }
            scores.into_iter().collect()
        };
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if out.is_empty() {
            return Err(Error::NoPrediction(format!("no usable vote for '{}'", self.target_name)));
        }
        Ok(out)
    }
}

fn random_subset(rng: &mut ChaCha8Rng, items: &[usize]) -> Vec<usize> {
    let n = items.len();
    if n == 0 {
        return Vec::new();
    }
    if n < 64 {
        let mask: u64 = rng.gen_range(1..(1u64 << n));
        return items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c).collect();
    }
    loop {
        let pick: Vec<usize> = items.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if !pick.is_empty() {
            return pick;
        }
    }
}

/// Trains `cfg.members` calibrated members for one target column.
pub fn train_ensemble(wb: &Workbook, task: &PredictionTask, target: usize, cfg: &PredictConfig) -> Result<Ensemble> {
    let t = wb.require_table(&task.table)?;
    let numeric = task.loss_of(target) == Loss::Rmse;
    let target_name = t.header()[target].clone();
    let all = training_frame(t, &[], target, &task.excluded_rows, numeric);
    if all.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "target '{target_name}' has {} trainable rows, at least 3 are needed",
            all.len()
        )));
    }
    let cycle: &[Family] = if numeric {
        &[Family::Baseline, Family::Knn, Family::LinearLsq, Family::Tree]
    } else {
        &[Family::Baseline, Family::Knn, Family::Tree]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(target as u64);
    let plans: Vec<(Family, Vec<usize>)> =
        (0..cfg.members.max(1)).map(|i| (cycle[i % cycle.len()], random_subset(&mut rng, &task.input_cols))).collect();
    let mut members: Vec<Member> = par::map(&plans, |(family, inputs)| {
        let mut family = *family;
        let mut inputs = inputs.clone();
        let mut frame = training_frame(t, &inputs, target, &task.excluded_rows, numeric);
        if frame.len() < 3 || inputs.is_empty() {
            family = Family::Baseline;
            inputs.clear();
            frame = all.clone();
        }
        let (calibration, score) = calibrate(&family, &frame);
        Member { family, inputs, model: family.fit(&frame), calibration, score, weight: 0.0, training_rows: frame.len() }
    });
    normalize(&mut members);
    Ok(Ensemble { table: task.table.clone(), target, target_name, numeric, members })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(x: f64) -> CellValue {
        CellValue::number(x).unwrap()
    }

    #[test]
    fn tree_separates_classes() {
        let data = Frame {
            x: (0..6).map(|i| vec![n(i as f64)]).collect(),
            y: (0..6).map(|i| CellValue::text(if i < 3 { "lo" } else { "hi" })).collect(),
            numeric_target: false,
        };
        let m = Family::Tree.fit(&data);
        assert_eq!(m.predict(&[n(1.0)]), Some(CellValue::text("lo")));
        assert_eq!(m.predict(&[n(4.5)]), Some(CellValue::text("hi")));
    }

    #[test]
    fn majority_ties_go_to_smallest() {
        let ys = [CellValue::text("b"), CellValue::text("a")];
        assert_eq!(central(&ys, false), Some(CellValue::text("a")));
    }

    #[test]
    fn subsets_are_nonempty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let s = random_subset(&mut rng, &[3, 4, 7]);
            assert!(!s.is_empty() && s.iter().all(|c| [3, 4, 7].contains(c)));
        }
    }
}
