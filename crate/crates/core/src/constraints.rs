//! Formula and constraint discovery over typed vectors and blocks.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::sheet::{CellValue, Role, Sketch, Table, TypeTag, Workbook};

/// Relative tolerance for numeric equality.
pub const TOLERANCE: f64 = 1e-6;
/// Largest number of addends in an aggregate.
pub const MAX_AGGREGATE_ARITY: usize = 4;
/// Fully observed positions a discovered constraint must be checked on.
pub const MIN_SUPPORT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Column,
    Row,
}

/// Location of a vector: a column over some rows, or a row over some columns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VectorRef {
    pub table: String,
    pub orientation: Orientation,
    pub index: usize,
    pub positions: Vec<usize>,
}

impl VectorRef {
    fn parallel(&self, other: &VectorRef) -> bool {
        self.table == other.table && self.orientation == other.orientation && self.positions == other.positions
    }

    /// Current cell values, or a stale-reference error.
    pub fn resolve(&self, wb: &Workbook) -> Result<Vec<CellValue>> {
        let t = wb
            .table(&self.table)
            .ok_or_else(|| Error::StaleReference(format!("table '{}' no longer exists", self.table)))?;
        self.positions
            .iter()
            .map(|&p| {
                let (r, c) = match self.orientation {
                    Orientation::Column => (p, self.index),
                    Orientation::Row => (self.index, p),
                };
                t.cell(r, c).cloned().ok_or_else(|| {
                    Error::StaleReference(format!("cell ({}, {}) of '{}' does not resolve", r + 1, c + 1, self.table))
                })
            })
            .collect()
    }
}

/// A type-consistent row or column.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    pub at: VectorRef,
    pub name: String,
    pub cells: Vec<CellValue>,
    pub tag: TypeTag,
}

/// Adjacent vectors of one orientation and type.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub vectors: Vec<Vector>,
}

impl Block {
    pub fn tag(&self) -> TypeTag {
        self.vectors[0].tag
    }

    pub fn orientation(&self) -> Orientation {
        self.vectors[0].at.orientation
    }

    pub fn names(&self) -> Vec<&str> {
        self.vectors.iter().map(|v| v.name.as_str()).collect()
    }
}

fn vector_name(t: &Table, o: Orientation, index: usize) -> String {
    match o {
        Orientation::Column => t.header()[index].clone(),
        Orientation::Row => format!("R{}", index + 1),
    }
}

fn orient_blocks(t: &Table, o: Orientation, indices: &[usize], positions: &[usize]) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut prev: Option<usize> = None;
    for &i in indices {
        let full: Vec<&CellValue> = match o {
            Orientation::Column => t.column(i).collect(),
            Orientation::Row => t.rows()[i].iter().collect(),
        };
        let tag = TypeTag::infer(full.iter().copied());
        let cells: Vec<CellValue> = positions.iter().map(|&p| full[p].clone()).collect();
        let observed = cells.iter().filter(|c| c.is_observed()).count();
        if tag == TypeTag::Mixed || cells.len() < 2 || observed < 2 {
            prev = None;
            continue;
        }
        let v = Vector {
            at: VectorRef { table: t.name().to_string(), orientation: o, index: i, positions: positions.to_vec() },
            name: vector_name(t, o, i),
            cells,
            tag,
        };
        match blocks.last_mut() {
            Some(b) if prev == Some(i.wrapping_sub(1)) && b.tag() == tag => b.vectors.push(v),
            _ => blocks.push(Block { vectors: vec![v] }),
        }
        prev = Some(i);
    }
    blocks
}

/// Blocks of a table restricted to `rows` and `cols`.
///
/// Vectors are typed on the full table, so only sub-vectors of originally
/// type-consistent vectors survive. Vectors are grouped only when adjacent in
/// the full table.
pub fn restricted_blocks(t: &Table, rows: &[usize], cols: &[usize]) -> Vec<Block> {
    let mut out = orient_blocks(t, Orientation::Column, cols, rows);
    out.extend(orient_blocks(t, Orientation::Row, rows, cols));
    out
}

/// Column and row blocks of a whole table.
pub fn partition_blocks(t: &Table) -> Vec<Block> {
    let rows: Vec<usize> = (0..t.n_rows()).collect();
    let cols: Vec<usize> = (0..t.n_cols()).collect();
    restricted_blocks(t, &rows, &cols)
}

/// Rows and columns kept from one table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedTable {
    pub name: String,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub tables: Vec<RestrictedTable>,
}

impl Restriction {
    pub fn blocks(&self, wb: &Workbook) -> Result<Vec<Block>> {
        let mut out = Vec::new();
        for r in &self.tables {
            out.extend(restricted_blocks(wb.require_table(&r.name)?, &r.rows, &r.cols));
        }
        Ok(out)
    }
}

/// Collapses uncolored rows and columns and drops rows carrying an exclude color.
/// Without input or target cells every table is kept whole, minus excluded rows.
pub fn restrict_by_sketch(wb: &Workbook, s: &Sketch) -> Result<Restriction> {
    s.require_roles(&[Role::Input, Role::Target, Role::Exclude], "constraint learning")?;
    let excluded: BTreeSet<(&str, usize)> =
        s.with_role(Role::Exclude).flat_map(|c| c.cells.iter()).map(|c| (c.table.as_str(), c.row)).collect();
    let colored: Vec<_> =
        s.colorings.iter().filter(|c| c.role != Role::Exclude).flat_map(|c| c.cells.iter()).collect();
    let mut tables = Vec::new();
    for t in wb.tables() {
        let (rows, cols): (BTreeSet<usize>, BTreeSet<usize>) = if colored.is_empty() {
            ((0..t.n_rows()).collect(), (0..t.n_cols()).collect())
        } else {
            let mine: Vec<_> = colored.iter().filter(|c| c.table == t.name()).collect();
            (mine.iter().map(|c| c.row).collect(), mine.iter().map(|c| c.col).collect())
        };
        let rows: Vec<usize> = rows.into_iter().filter(|r| !excluded.contains(&(t.name(), *r))).collect();
        if !rows.is_empty() && !cols.is_empty() {
            tables.push(RestrictedTable { name: t.name().to_string(), rows, cols: cols.into_iter().collect() });
        }
    }
    if tables.is_empty() {
        return Err(Error::EmptySelection("no cells remain after restricting to the sketch".into()));
    }
    Ok(Restriction { tables })
}

/// The template catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Template {
    /// `v = SUM(b1, .., bk)` per position.
    RowSum,
    RowMax,
    RowMin,
    RowAverage,
    /// `v1 = v2 - v3`.
    Difference,
    /// `v1 = v2 * v3`.
    Product,
    Equal,
    /// Non-decreasing over observed cells.
    Ascending,
    #[serde(rename = "ALLDIFFERENT")]
    AllDifferent,
    /// Observed values of `v1` appear in `v2`, whose values are distinct.
    #[serde(rename = "FOREIGNKEY")]
    ForeignKey,
}

pub const CATALOG: [Template; 10] = [
    Template::RowSum,
    Template::RowMax,
    Template::RowMin,
    Template::RowAverage,
    Template::Difference,
    Template::Product,
    Template::Equal,
    Template::Ascending,
    Template::AllDifferent,
    Template::ForeignKey,
];

impl Template {
    pub fn name(self) -> &'static str {
        match self {
            Template::RowSum => "ROW_SUM",
            Template::RowMax => "ROW_MAX",
            Template::RowMin => "ROW_MIN",
            Template::RowAverage => "ROW_AVERAGE",
            Template::Difference => "DIFFERENCE",
            Template::Product => "PRODUCT",
            Template::Equal => "EQUAL",
            Template::Ascending => "ASCENDING",
            Template::AllDifferent => "ALLDIFFERENT",
            Template::ForeignKey => "FOREIGNKEY",
        }
    }

    fn function(self) -> &'static str {
        match self {
            Template::RowSum => "SUM",
            Template::RowMax => "MAX",
            Template::RowMin => "MIN",
            Template::RowAverage => "AVERAGE",
            other => other.name(),
        }
    }

    fn aggregate(self) -> bool {
        matches!(self, Template::RowSum | Template::RowMax | Template::RowMin | Template::RowAverage)
    }

    /// Whether the first argument is computed from the others.
    pub fn is_formula(self) -> bool {
        self.aggregate() || matches!(self, Template::Difference | Template::Product)
    }
}

/// A satisfied template instance. For formulas `args[0]` is the computed vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConstraintInstance {
    pub template: Template,
    pub args: Vec<VectorRef>,
    pub names: Vec<String>,
}

impl ConstraintInstance {
    fn new(template: Template, vs: &[&Vector]) -> ConstraintInstance {
        ConstraintInstance {
            template,
            args: vs.iter().map(|v| v.at.clone()).collect(),
            names: vs.iter().map(|v| v.name.clone()).collect(),
        }
    }

    /// Value of the formula at one position from its input values.
    pub fn compute(&self, inputs: &[f64]) -> Option<f64> {
        let x = match self.template {
            Template::RowSum => inputs.iter().sum(),
            Template::RowMax => inputs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Template::RowMin => inputs.iter().copied().fold(f64::INFINITY, f64::min),
            Template::RowAverage => inputs.iter().sum::<f64>() / inputs.len() as f64,
            Template::Difference => inputs[0] - inputs[1],
            Template::Product => inputs[0] * inputs[1],
            _ => return None,
        };
        x.is_finite().then_some(x)
    }
}

impl fmt::Display for ConstraintInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = &self.names;
        match self.template {
            t if t.aggregate() => write!(f, "{} = {}({})", n[0], t.function(), n[1..].join(", ")),
            Template::Difference => write!(f, "{} = {} - {}", n[0], n[1], n[2]),
            Template::Product => write!(f, "{} = {} * {}", n[0], n[1], n[2]),
            Template::Equal => write!(f, "{} = {}", n[0], n[1]),
            Template::ForeignKey if self.args[0].table != self.args[1].table => write!(
                f,
                "FOREIGNKEY({}.{}, {}.{})",
                self.args[0].table, n[0], self.args[1].table, n[1]
            ),
            t => write!(f, "{}({})", t.name(), n.join(", ")),
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

fn num_rows(args: &[&[CellValue]]) -> Option<Vec<Vec<f64>>> {
    let n = args[0].len();
    let mut out = Vec::new();
    for p in 0..n {
        if args.iter().any(|a| !a[p].is_observed()) {
            continue;
        }
        let xs: Option<Vec<f64>> = args.iter().map(|a| a[p].as_f64()).collect();
        out.push(xs?);
    }
    Some(out)
}

fn all_different(a: &[CellValue]) -> bool {
    let obs: Vec<&CellValue> = a.iter().filter(|c| c.is_observed()).collect();
    obs.iter().collect::<BTreeSet<_>>().len() == obs.len()
}

/// Whether `t` holds on the given cell sequences, judged on fully observed
/// positions only and requiring at least `min_support` of them.
pub fn holds(t: Template, args: &[&[CellValue]], min_support: usize) -> bool {
    if args.is_empty() || (t != Template::ForeignKey && args.iter().any(|a| a.len() != args[0].len())) {
        return false;
    }
    match t {
        Template::RowSum | Template::RowMax | Template::RowMin | Template::RowAverage | Template::Difference | Template::Product => {
            let Some(rows) = num_rows(args) else { return false };
            let c = ConstraintInstance { template: t, args: vec![], names: vec![] };
            rows.len() >= min_support && rows.iter().all(|r| c.compute(&r[1..]).is_some_and(|x| close(r[0], x)))
        }
        Template::Equal => {
            let n = args[0].len();
            let both: Vec<usize> = (0..n).filter(|&p| args[0][p].is_observed() && args[1][p].is_observed()).collect();
            both.len() >= min_support
                && both.iter().all(|&p| match (args[0][p].as_f64(), args[1][p].as_f64()) {
                    (Some(a), Some(b)) => close(a, b),
                    _ => args[0][p] == args[1][p],
                })
        }
        Template::Ascending => {
            let Some(xs) = num_rows(&args[..1]) else { return false };
            xs.len() >= min_support && xs.windows(2).all(|w| w[0][0] <= w[1][0])
        }
        Template::AllDifferent => args[0].iter().filter(|c| c.is_observed()).count() >= min_support && all_different(args[0]),
        Template::ForeignKey => {
            let keys: BTreeSet<&CellValue> = args[1].iter().filter(|c| c.is_observed()).collect();
            let refs: Vec<&CellValue> = args[0].iter().filter(|c| c.is_observed()).collect();
            refs.len() >= min_support && all_different(args[1]) && refs.iter().all(|v| keys.contains(v))
        }
    }
}

fn eval(t: Template, vs: &[&Vector]) -> Option<ConstraintInstance> {
    let cells: Vec<&[CellValue]> = vs.iter().map(|v| v.cells.as_slice()).collect();
    holds(t, &cells, MIN_SUPPORT).then(|| ConstraintInstance::new(t, vs))
}

fn search(t: Template, blocks: &[Block], all: &[&Vector]) -> Vec<ConstraintInstance> {
    let numeric: Vec<&Vector> = all.iter().copied().filter(|v| v.tag == TypeTag::Numeric).collect();
    let mut out = Vec::new();
    match t {
        Template::RowSum | Template::RowMax | Template::RowMin | Template::RowAverage => {
            for b in blocks.iter().filter(|b| b.tag() == TypeTag::Numeric) {
                let n = b.vectors.len();
                for len in 2..=MAX_AGGREGATE_ARITY.min(n) {
                    for start in 0..=n - len {
                        let sub = &b.vectors[start..start + len];
                        for v in numeric.iter().filter(|v| v.at.parallel(&sub[0].at) && !sub.iter().any(|s| s.at == v.at)) {
                            let mut args = vec![*v];
                            args.extend(sub.iter());
                            out.extend(eval(t, &args));
                        }
                    }
                }
            }
        }
        Template::Difference | Template::Product => {
            for v1 in &numeric {
                for v2 in numeric.iter().filter(|v| v.at.parallel(&v1.at) && v.at != v1.at) {
                    for v3 in numeric.iter().filter(|v| v.at.parallel(&v1.at) && v.at != v1.at && v.at != v2.at) {
                        if t == Template::Product && v2.at > v3.at {
                            continue;
                        }
                        out.extend(eval(t, &[v1, v2, v3]));
                    }
                }
            }
        }
        Template::Equal => {
            for (i, a) in all.iter().enumerate() {
                for b in all[i + 1..].iter().filter(|b| b.tag == a.tag && b.at.parallel(&a.at)) {
                    let (x, y) = if a.at < b.at { (a, b) } else { (b, a) };
                    out.extend(eval(t, &[x, y]));
                }
            }
        }
        Template::Ascending => out.extend(numeric.iter().filter_map(|v| eval(t, &[v]))),
        Template::AllDifferent => out.extend(all.iter().filter_map(|v| eval(t, &[v]))),
        Template::ForeignKey => {
            let keys: Vec<&Vector> = all.iter().copied().filter(|v| all_different(&v.cells)).collect();
            for a in all {
                for k in keys.iter().filter(|k| k.tag == a.tag && k.at != a.at) {
                    out.extend(eval(t, &[a, k]));
                }
            }
        }
    }
    out
}

/// All satisfied template instances over sub-blocks of `blocks`, sorted and deduplicated.
pub fn find_constraints(blocks: &[Block]) -> Vec<ConstraintInstance> {
    let all: Vec<&Vector> = blocks.iter().flat_map(|b| b.vectors.iter()).collect();
    let found: Vec<Vec<ConstraintInstance>> = par::map(&CATALOG, |t| search(*t, blocks, &all));
    let set: BTreeSet<ConstraintInstance> = found.into_iter().flatten().collect();
    set.into_iter().collect()
}

/// Re-evaluates `c` on current values; rows with unobserved cells are skipped.
pub fn check_constraint(c: &ConstraintInstance, wb: &Workbook) -> Result<bool> {
    let cells: Vec<Vec<CellValue>> = c.args.iter().map(|a| a.resolve(wb)).collect::<Result<_>>()?;
    let refs: Vec<&[CellValue]> = cells.iter().map(|v| v.as_slice()).collect();
    Ok(holds(c.template, &refs, 0))
}

/// Restricts the workbook to the sketch and discovers constraints on what remains.
pub fn learn_constraints(wb: &Workbook, s: &Sketch) -> Result<Vec<ConstraintInstance>> {
    let r = restrict_by_sketch(wb, s)?;
    Ok(find_constraints(&r.blocks(wb)?))
}
