//! Sketch satisfaction and candidate scoring.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::sheet::{Role, Sketch, Table, TypeTag};

use super::grid::{Origin, ProvenancedGrid};

/// Per color, the input cells that must end up in one row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WranglingSketch {
    pub colors: Vec<(String, BTreeSet<Origin>)>,
}

impl WranglingSketch {
    pub fn new(colors: Vec<(String, BTreeSet<Origin>)>) -> WranglingSketch {
        WranglingSketch { colors }
    }

    /// Group colorings on `table`. Empty input cells carry no data and are ignored.
    pub fn from_sketch(s: &Sketch, table: &Table) -> Result<WranglingSketch> {
        s.require_roles(&[Role::Group], "wrangle")?;
        let mut colors = Vec::new();
        for c in s.with_role(Role::Group) {
            let mut set = BTreeSet::new();
            for cell in &c.cells {
                if cell.table != table.name() {
                    return Err(Error::InvalidSketch(format!(
                        "wrangling sketch cell {cell} is outside table '{}'",
                        table.name()
                    )));
                }
                match table.cell(cell.row, cell.col) {
                    None => return Err(Error::InvalidSketch(format!("cell {cell} does not resolve"))),
                    Some(v) if v.is_empty() => {}
                    Some(_) => {
                        set.insert(Origin { row: cell.row, col: cell.col });
                    }
                }
            }
            if !set.is_empty() {
                colors.push((c.color.clone(), set));
            }
        }
        Ok(WranglingSketch { colors })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchCheck {
    pub satisfied: bool,
    pub violations: usize,
}

/// Same-color cells must share a row; no row may mix colors.
///
/// Each color claims the row holding most of its cells (colors with more hits
/// choose first, a row is claimed at most once). Violations count the color's
/// cells outside its row, lost cells included, plus foreign cells inside it.
pub fn check_sketch(g: &ProvenancedGrid, s: &WranglingSketch) -> SketchCheck {
    let mut color_of: HashMap<Origin, usize> = HashMap::new();
    for (ci, (_, set)) in s.colors.iter().enumerate() {
        for o in set {
            color_of.insert(*o, ci);
        }
    }
    // hits[color][row] = distinct origins of that color in the row
    let mut hits: Vec<BTreeMap<usize, BTreeSet<Origin>>> = vec![BTreeMap::new(); s.colors.len()];
    for (ri, row) in g.rows.iter().enumerate() {
        for cell in row {
            for o in cell.origins() {
                if let Some(&ci) = color_of.get(&o) {
                    hits[ci].entry(ri).or_default().insert(o);
                }
            }
        }
    }
    let best = |ci: usize| hits[ci].values().map(BTreeSet::len).max().unwrap_or(0);
    let mut order: Vec<usize> = (0..s.colors.len()).collect();
    order.sort_by_key(|&ci| (std::cmp::Reverse(best(ci)), ci));
    let mut claimed: BTreeMap<usize, usize> = BTreeMap::new();
    let mut row_of: Vec<Option<usize>> = vec![None; s.colors.len()];
    for &ci in &order {
        let pick = hits[ci]
            .iter()
            .filter(|(r, _)| !claimed.contains_key(r))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
            .map(|(r, _)| *r);
        if let Some(r) = pick {
            claimed.insert(r, ci);
            row_of[ci] = Some(r);
        }
    }
    let mut violations = 0;
    let mut stray = false;
    for (ci, (_, set)) in s.colors.iter().enumerate() {
        let own = row_of[ci].map_or(0, |r| hits[ci].get(&r).map_or(0, BTreeSet::len));
        violations += set.len() - own;
        if let Some(r) = row_of[ci] {
            for (cj, h) in hits.iter().enumerate() {
                if cj != ci {
                    violations += h.get(&r).map_or(0, BTreeSet::len);
                }
            }
        }
        if hits[ci].keys().any(|r| Some(*r) != row_of[ci]) {
            stray = true;
        }
    }
    SketchCheck { satisfied: violations == 0 && !stray, violations }
}

/// `10·violations + empty_fraction + type_inconsistency`; lower is better.
pub fn score_candidate(g: &ProvenancedGrid, s: &WranglingSketch) -> f64 {
    score_with(g, check_sketch(g, s).violations)
}

pub(crate) fn score_with(g: &ProvenancedGrid, violations: usize) -> f64 {
    let total = g.n_rows() * g.n_cols;
    let empty = g.rows.iter().flatten().filter(|c| c.is_empty()).count();
    let empty_fraction = if total == 0 { 0.0 } else { empty as f64 / total as f64 };
    let mixed = (0..g.n_cols)
        .filter(|&c| {
            let body = g
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != g.header_row)
                .map(|(_, r)| &r[c].value);
            TypeTag::infer(body) == TypeTag::Mixed
        })
        .count();
    let type_inconsistency = if g.n_cols == 0 { 0.0 } else { mixed as f64 / g.n_cols as f64 };
    10.0 * violations as f64 + empty_fraction + type_inconsistency
}
