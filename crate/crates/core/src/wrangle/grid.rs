//! Provenanced grids and the transform interpreter.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sheet::{CellValue, Table};

/// Position of a cell in the original input table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Origin {
    pub row: usize,
    pub col: usize,
}

/// A cell plus where it came from.
///
/// `merged` holds further origins collapsed into this cell by a pivot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PCell {
    pub value: CellValue,
    pub origin: Option<Origin>,
    pub merged: Vec<Origin>,
}

impl PCell {
    pub fn empty() -> PCell {
        PCell { value: CellValue::Empty, origin: None, merged: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    /// All origins carried by this cell; Empty cells carry none.
    pub fn origins(&self) -> impl Iterator<Item = Origin> + '_ {
        let live = !self.is_empty();
        self.origin.iter().chain(self.merged.iter()).copied().filter(move |_| live)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProvenancedGrid {
    pub n_cols: usize,
    pub rows: Vec<Vec<PCell>>,
    pub header_row: Option<usize>,
}

impl ProvenancedGrid {
    /// Body cells of `t`, each carrying its own position as origin.
    pub fn from_table(t: &Table) -> ProvenancedGrid {
        let rows = t
            .rows()
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(c, v)| PCell {
                        value: v.clone(),
                        origin: (!v.is_empty()).then_some(Origin { row: r, col: c }),
                        merged: Vec::new(),
                    })
                    .collect()
            })
            .collect();
        ProvenancedGrid { n_cols: t.n_cols(), rows, header_row: None }
    }

    pub fn from_values(rows: Vec<Vec<CellValue>>) -> ProvenancedGrid {
        let n_cols = rows.first().map_or(0, Vec::len);
        let t = Table::new("grid", vec![String::new(); n_cols], rows).expect("rectangular grid");
        ProvenancedGrid::from_table(&t)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn values(&self) -> Vec<Vec<CellValue>> {
        self.rows.iter().map(|r| r.iter().map(|c| c.value.clone()).collect()).collect()
    }

    /// Converts to a table: the header row (if any) becomes the header.
    pub fn to_table(&self, name: &str) -> Result<Table> {
        let (header, body): (Vec<String>, Vec<Vec<CellValue>>) = match self.header_row {
            Some(h) => (
                self.rows[h].iter().map(|c| c.value.to_string()).collect(),
                self.rows
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != h)
                    .map(|(_, r)| r.iter().map(|c| c.value.clone()).collect())
                    .collect(),
            ),
            None => ((1..=self.n_cols).map(|i| format!("C{i}")).collect(), self.values()),
        };
        Table::new(name, header, body)
    }
}

/// One wrangling step. Columns are 0-based; JSON uses 1-based columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transform {
    Split(usize),
    ForwardFill(usize),
    Pivot(usize, usize),
    DropEmptyRows,
    DropEmptyColumns,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Split(c) => write!(f, "Split({})", c + 1),
            Transform::ForwardFill(c) => write!(f, "ForwardFill({})", c + 1),
            Transform::Pivot(k, v) => write!(f, "Pivot({},{})", k + 1, v + 1),
            Transform::DropEmptyRows => f.write_str("DropEmptyRows"),
            Transform::DropEmptyColumns => f.write_str("DropEmptyColumns"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum WireTransform {
    Split { col: usize },
    Ffill { col: usize },
    Pivot { key: usize, value: usize },
    DropEmptyRows,
    DropEmptyCols,
}

impl Serialize for Transform {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let w = match *self {
            Transform::Split(c) => WireTransform::Split { col: c + 1 },
            Transform::ForwardFill(c) => WireTransform::Ffill { col: c + 1 },
            Transform::Pivot(k, v) => WireTransform::Pivot { key: k + 1, value: v + 1 },
            Transform::DropEmptyRows => WireTransform::DropEmptyRows,
            Transform::DropEmptyColumns => WireTransform::DropEmptyCols,
        };
        w.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Transform {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let one = |c: usize| c.checked_sub(1).ok_or_else(|| D::Error::custom("columns are 1-based"));
        Ok(match WireTransform::deserialize(d)? {
            WireTransform::Split { col } => Transform::Split(one(col)?),
            WireTransform::Ffill { col } => Transform::ForwardFill(one(col)?),
            WireTransform::Pivot { key, value } => Transform::Pivot(one(key)?, one(value)?),
            WireTransform::DropEmptyRows => Transform::DropEmptyRows,
            WireTransform::DropEmptyCols => Transform::DropEmptyColumns,
        })
    }
}

fn check_col(g: &ProvenancedGrid, c: usize, t: &Transform) -> Result<()> {
    if c >= g.n_cols {
        return Err(Error::InvalidArgs(format!("{t}: grid has {} columns", g.n_cols)));
    }
    Ok(())
}

/// Applies one transform, returning a new grid.
pub fn apply_transform(g: &ProvenancedGrid, t: Transform) -> Result<ProvenancedGrid> {
    match t {
        Transform::Split(c) => {
            check_col(g, c, &t)?;
            Ok(split(g, c))
        }
        Transform::ForwardFill(c) => {
            check_col(g, c, &t)?;
            Ok(forward_fill(g, c))
        }
        Transform::Pivot(k, v) => {
            check_col(g, k, &t)?;
            check_col(g, v, &t)?;
            if k == v {
                return Err(Error::InvalidArgs(format!("{t}: key and value column coincide")));
            }
            Ok(pivot(g, k, v))
        }
        Transform::DropEmptyRows => Ok(drop_empty_rows(g)),
        Transform::DropEmptyColumns => Ok(drop_empty_columns(g)),
    }
}

/// Replays a whole program.
pub fn apply_program(g: &ProvenancedGrid, program: &[Transform]) -> Result<ProvenancedGrid> {
    let mut cur = g.clone();
    for t in program {
        cur = apply_transform(&cur, *t)?;
    }
    Ok(cur)
}

fn split(g: &ProvenancedGrid, c: usize) -> ProvenancedGrid {
    let rows = g
        .rows
        .iter()
        .map(|row| {
            let rest_empty = row[c + 1..].iter().all(PCell::is_empty);
            let mut out = Vec::with_capacity(row.len() + 1);
            out.extend_from_slice(&row[..c]);
            if rest_empty {
                out.push(PCell::empty());
                out.push(row[c].clone());
            } else {
                out.push(row[c].clone());
                out.push(PCell::empty());
            }
            out.extend_from_slice(&row[c + 1..]);
            out
        })
        .collect();
    ProvenancedGrid { n_cols: g.n_cols + 1, rows, header_row: g.header_row }
}

fn forward_fill(g: &ProvenancedGrid, c: usize) -> ProvenancedGrid {
    let mut out = g.clone();
    let mut last: Option<PCell> = None;
    for row in out.rows.iter_mut() {
        if row[c].is_empty() {
            if let Some(src) = &last {
                row[c] = src.clone();
            }
        } else {
            last = Some(row[c].clone());
        }
    }
    out
}

fn pivot(g: &ProvenancedGrid, k: usize, v: usize) -> ProvenancedGrid {
    let others: Vec<usize> = (0..g.n_cols).filter(|&c| c != k && c != v).collect();
    let mut group_index: HashMap<Vec<CellValue>, usize> = HashMap::new();
    let mut groups: Vec<(Vec<PCell>, HashMap<usize, PCell>)> = Vec::new();
    let mut key_index: HashMap<CellValue, usize> = HashMap::new();
    let mut keys: Vec<PCell> = Vec::new();
    for (ri, row) in g.rows.iter().enumerate() {
        if Some(ri) == g.header_row || row[k].is_empty() {
            continue;
        }
        let kv = row[k].value.clone();
        let ki = match key_index.get(&kv) {
            Some(&i) => {
                merge_into(&mut keys[i], &row[k]);
                i
            }
            None => {
                key_index.insert(kv, keys.len());
                keys.push(row[k].clone());
                keys.len() - 1
            }
        };
        let gk: Vec<CellValue> = others.iter().map(|&c| row[c].value.clone()).collect();
        let gi = match group_index.get(&gk) {
            Some(&i) => {
                for (slot, &c) in groups[i].0.iter_mut().zip(&others) {
                    merge_into(slot, &row[c]);
                }
                i
            }
            None => {
                group_index.insert(gk, groups.len());
                groups.push((others.iter().map(|&c| row[c].clone()).collect(), HashMap::new()));
                groups.len() - 1
            }
        };
        groups[gi].1.insert(ki, row[v].clone());
    }
    let mut header: Vec<PCell> = vec![PCell::empty(); others.len()];
    header.extend(keys.iter().cloned());
    let mut rows = vec![header];
    for (prefix, cells) in groups {
        let mut r = prefix;
        r.extend((0..keys.len()).map(|i| cells.get(&i).cloned().unwrap_or_else(PCell::empty)));
        rows.push(r);
    }
    ProvenancedGrid { n_cols: others.len() + keys.len(), rows, header_row: Some(0) }
}

/// Adds `src`'s origins to `dst` when both hold the same value.
fn merge_into(dst: &mut PCell, src: &PCell) {
    if dst.is_empty() {
        return;
    }
    let have: HashSet<Origin> = dst.origins().collect();
    for o in src.origins() {
        if !have.contains(&o) && !dst.merged.contains(&o) {
            dst.merged.push(o);
        }
    }
}

fn drop_empty_rows(g: &ProvenancedGrid) -> ProvenancedGrid {
    let mut header_row = None;
    let mut rows = Vec::new();
    for (i, r) in g.rows.iter().enumerate() {
        if r.iter().all(PCell::is_empty) {
            continue;
        }
        if Some(i) == g.header_row {
            header_row = Some(rows.len());
        }
        rows.push(r.clone());
    }
    ProvenancedGrid { n_cols: g.n_cols, rows, header_row }
}

fn drop_empty_columns(g: &ProvenancedGrid) -> ProvenancedGrid {
    let keep: Vec<usize> = (0..g.n_cols).filter(|&c| g.rows.iter().any(|r| !r[c].is_empty())).collect();
    let rows = g.rows.iter().map(|r| keep.iter().map(|&c| r[c].clone()).collect()).collect();
    ProvenancedGrid { n_cols: keep.len(), rows, header_row: g.header_row }
}
