//! Unpruned evaluation of every template on every argument tuple.

use std::collections::BTreeSet;

use chromasheet::constraints::*;
use chromasheet::{CellValue, Table, TypeTag};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone)]
pub struct V {
    pub o: Orientation,
    pub i: usize,
    pub cells: Vec<CellValue>,
    pub tag: Option<TypeTag>,
}

pub fn oracle_vectors(t: &Table) -> Vec<V> {
    let mut out = Vec::new();
    for (o, n, m) in [(Orientation::Column, t.n_cols(), t.n_rows()), (Orientation::Row, t.n_rows(), t.n_cols())] {
        for i in 0..n {
            let cells: Vec<CellValue> = (0..m)
                .map(|p| match o {
                    Orientation::Column => t.rows()[p][i].clone(),
                    Orientation::Row => t.rows()[i][p].clone(),
                })
                .collect();
            let kinds: BTreeSet<u8> = cells
                .iter()
                .filter_map(|c| match c {
                    CellValue::Number(_) => Some(0),
                    CellValue::Text(_) => Some(1),
                    CellValue::Bool(_) => Some(2),
                    _ => None,
                })
                .collect();
            let observed = cells.iter().filter(|c| !matches!(c, CellValue::Missing | CellValue::Empty)).count();
            let tag = if kinds.len() == 1 && cells.len() >= 2 && observed >= 2 {
                Some([TypeTag::Numeric, TypeTag::Textual, TypeTag::Boolean][*kinds.first().unwrap() as usize])
            } else {
                None
            };
            out.push(V { o, i, cells, tag });
        }
    }
    out
}

pub fn obs(c: &CellValue) -> bool {
    !matches!(c, CellValue::Missing | CellValue::Empty)
}

pub fn eq_tol(a: f64, b: f64) -> bool {
    let s = [1.0, a.abs(), b.abs()].into_iter().fold(0.0, f64::max);
    (a - b).abs() <= 1e-6 * s
}

/// Numeric positions where every argument is observed; None if a non-number appears.
pub fn complete(args: &[&V]) -> Option<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for p in 0..args[0].cells.len() {
        if args.iter().all(|a| obs(&a.cells[p])) {
            let mut row = Vec::new();
            for a in args {
                match a.cells[p] {
                    CellValue::Number(x) => row.push(x),
                    _ => return None,
                }
            }
            out.push(row);
        }
    }
    Some(out)
}

pub fn formula_holds(kind: &str, args: &[&V]) -> bool {
    if args.iter().any(|a| a.tag != Some(TypeTag::Numeric) || a.o != args[0].o || a.cells.len() != args[0].cells.len()) {
        return false;
    }
    let Some(rows) = complete(args) else { return false };
    rows.len() >= 2
        && rows.iter().all(|r| {
            let xs = &r[1..];
            let y = match kind {
                "ROW_SUM" => xs.iter().sum::<f64>(),
                "ROW_MAX" => xs.iter().cloned().fold(f64::MIN, f64::max),
                "ROW_MIN" => xs.iter().cloned().fold(f64::MAX, f64::min),
                "ROW_AVERAGE" => xs.iter().sum::<f64>() / xs.len() as f64,
                "DIFFERENCE" => xs[0] - xs[1],
                "PRODUCT" => xs[0] * xs[1],
                _ => unreachable!(),
            };
            eq_tol(r[0], y)
        })
}

pub fn distinct(v: &V) -> bool {
    let o: Vec<&CellValue> = v.cells.iter().filter(|c| obs(c)).collect();
    (0..o.len()).all(|i| (i + 1..o.len()).all(|j| o[i] != o[j]))
}

pub fn key(kind: &str, args: &[&V]) -> String {
    let a: Vec<String> = args.iter().map(|v| format!("{:?}{}", v.o, v.i)).collect();
    format!("{kind}({})", a.join(","))
}

/// Evaluates every template on every argument tuple, with no signature pruning.
pub fn brute_force(t: &Table) -> BTreeSet<String> {
    let vs = oracle_vectors(t);
    let mut out = BTreeSet::new();
    let n = vs.len();
    for kind in ["ROW_SUM", "ROW_MAX", "ROW_MIN", "ROW_AVERAGE"] {
        for v in &vs {
            for start in 0..n {
                for len in 2..=4 {
                    if start + len > n {
                        continue;
                    }
                    let run: Vec<&V> = vs[start..start + len].iter().collect();
                    // a run must be adjacent vectors of one orientation and one type
                    let ok = run.iter().all(|r| r.o == run[0].o && r.tag.is_some() && r.tag == run[0].tag)
                        && run.windows(2).all(|w| w[1].i == w[0].i + 1)
                        && !run.iter().any(|r| r.o == v.o && r.i == v.i);
                    if !ok {
                        continue;
                    }
                    let mut args = vec![v];
                    args.extend(run);
                    if formula_holds(kind, &args) {
                        out.insert(key(kind, &args));
                    }
                }
            }
        }
    }
    for a in &vs {
        for b in &vs {
            for c in &vs {
                let same = |x: &V, y: &V| x.o == y.o && x.i == y.i;
                if same(a, b) || same(a, c) || same(b, c) {
                    continue;
                }
                if formula_holds("DIFFERENCE", &[a, b, c]) {
                    out.insert(key("DIFFERENCE", &[a, b, c]));
                }
                if (b.o, b.i) < (c.o, c.i) && formula_holds("PRODUCT", &[a, b, c]) {
                    out.insert(key("PRODUCT", &[a, b, c]));
                }
            }
            if (a.o, a.i) < (b.o, b.i) && a.tag.is_some() && a.tag == b.tag && a.o == b.o {
                let both: Vec<usize> = (0..a.cells.len()).filter(|&p| obs(&a.cells[p]) && obs(&b.cells[p])).collect();
                let eq = both.iter().all(|&p| match (&a.cells[p], &b.cells[p]) {
                    (CellValue::Number(x), CellValue::Number(y)) => eq_tol(*x, *y),
                    (x, y) => x == y,
                });
                if both.len() >= 2 && eq {
                    out.insert(key("EQUAL", &[a, b]));
                }
            }
            if (a.o, a.i) != (b.o, b.i) && a.tag.is_some() && a.tag == b.tag && distinct(b) {
                let refs: Vec<&CellValue> = a.cells.iter().filter(|c| obs(c)).collect();
                if refs.len() >= 2 && refs.iter().all(|r| b.cells.contains(r)) {
                    out.insert(key("FOREIGNKEY", &[a, b]));
                }
            }
        }
        if a.tag == Some(TypeTag::Numeric) {
            let xs: Vec<f64> = a.cells.iter().filter_map(|c| c.as_f64()).collect();
            if xs.len() >= 2 && xs.windows(2).all(|w| w[0] <= w[1]) {
                out.insert(key("ASCENDING", &[a]));
            }
        }
        if a.tag.is_some() && distinct(a) {
            out.insert(key("ALLDIFFERENT", &[a]));
        }
    }
    out
}

pub fn found_keys(t: &Table) -> BTreeSet<String> {
    find_constraints(&partition_blocks(t))
        .iter()
        .map(|c| {
            let a: Vec<String> = c.args.iter().map(|v| format!("{:?}{}", v.orientation, v.index)).collect();
            format!("{}({})", c.template.name(), a.join(","))
        })
        .collect()
}

pub fn random_table(rng: &mut ChaCha8Rng) -> Table {
    let n_rows = rng.gen_range(2..=6);
    let n_cols = rng.gen_range(2..=6);
    let mut cols: Vec<Vec<CellValue>> = Vec::new();
    let num = |x: f64| CellValue::number(x).unwrap();
    for c in 0..n_cols {
        let kind = rng.gen_range(0..10);
        let col: Vec<CellValue> = match kind {
            // planted sum, difference or product of the two previous columns
            0..=2 if c >= 2 && cols[c - 1].iter().chain(&cols[c - 2]).all(|v| v.as_f64().is_some()) => (0..n_rows)
                .map(|r| {
                    let (a, b) = (cols[c - 2][r].as_f64().unwrap(), cols[c - 1][r].as_f64().unwrap());
                    num([a + b, a - b, a * b][kind])
                })
                .collect(),
            3 if c >= 1 => cols[c - 1].clone(),
            4 => (0..n_rows).map(|_| CellValue::text(["a", "b", "c"][rng.gen_range(0..3)])).collect(),
            5 => (0..n_rows).map(|r| num(r as f64 + rng.gen_range(0..2) as f64)).collect(),
            _ => (0..n_rows).map(|_| num(rng.gen_range(0..5) as f64)).collect(),
        };
        cols.push(col);
    }
    let mut rows: Vec<Vec<CellValue>> = (0..n_rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    for _ in 0..rng.gen_range(0..3) {
        let (r, c) = (rng.gen_range(0..n_rows), rng.gen_range(0..n_cols));
        rows[r][c] = if rng.gen_bool(0.7) { CellValue::Missing } else { CellValue::text("z") };
    }
    let header = (0..n_cols).map(|c| format!("C{c}")).collect();
    Table::new("r", header, rows).unwrap()
}
