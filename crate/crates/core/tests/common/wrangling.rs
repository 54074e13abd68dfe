//! Exhaustive program search and random staircase grids.

use std::collections::BTreeSet;

use chromasheet::wrangle::*;
use chromasheet::CellValue;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn e() -> CellValue {
    CellValue::Empty
}
fn t(s: &str) -> CellValue {
    CellValue::text(s)
}
fn n(x: f64) -> CellValue {
    CellValue::Number(x)
}

pub fn every_transform(g: &ProvenancedGrid) -> Vec<Transform> {
    let mut out = Vec::new();
    for c in 0..g.n_cols {
        out.push(Transform::Split(c));
        out.push(Transform::ForwardFill(c));
        for v in 0..g.n_cols {
            if v != c {
                out.push(Transform::Pivot(c, v));
            }
        }
    }
    out.push(Transform::DropEmptyRows);
    out.push(Transform::DropEmptyColumns);
    out
}

pub struct Best {
    pub any: f64,
    pub sat: Option<f64>,
    pub prog: Vec<Transform>,
}

pub fn exhaustive(g: &ProvenancedGrid, s: &WranglingSketch, depth: usize, path: &mut Vec<Transform>, best: &mut Best) {
    let c = check_sketch(g, s);
    let sc = score_candidate(g, s);
    best.any = best.any.min(sc);
    if c.satisfied && best.sat.is_none_or(|b| sc < b) {
        best.sat = Some(sc);
        best.prog = path.clone();
    }
    if depth == 0 {
        return;
    }
    for tr in every_transform(g) {
        if let Ok(next) = apply_transform(g, tr) {
            path.push(tr);
            exhaustive(&next, s, depth - 1, path, best);
            path.pop();
        }
    }
}

/// Groups of rows whose key sits only on the group's first row.
pub fn staircase(rng: &mut ChaCha8Rng) -> (ProvenancedGrid, WranglingSketch) {
    let sizes: &[usize] = [&[3, 3][..], &[2, 2, 2], &[2, 4], &[4, 2], &[3, 2, 1]][rng.gen_range(0..5)];
    let labels = ["a", "b", "c", "d"];
    let keys = ["K", "L", "M"];
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for (gi, &size) in sizes.iter().enumerate() {
        let start = rows.len();
        for i in 0..size {
            let key = if i == 0 { t(keys[gi]) } else { e() };
            let label = if rng.gen_bool(0.9) { t(labels[i]) } else { e() };
            let value = match rng.gen_range(0..10) {
                0 => e(),
                1 => CellValue::Missing,
                _ => n(rng.gen_range(1..50) as f64),
            };
            rows.push(vec![key, label, value]);
        }
        groups.push(start..start + size);
    }
    let g = ProvenancedGrid::from_values(rows.clone());
    let live = |r: usize, c: usize| !rows[r][c].is_empty();
    let mut colors = Vec::new();
    let g0 = groups[0].clone();
    let mut blue: BTreeSet<Origin> = BTreeSet::new();
    blue.insert(Origin { row: g0.start, col: 0 });
    for r in g0.clone() {
        if live(r, 2) && rng.gen_bool(0.8) {
            blue.insert(Origin { row: r, col: 2 });
        }
    }
    colors.push(("blue".to_string(), blue));
    if groups.len() > 1 && rng.gen_bool(0.7) {
        let g1 = groups[rng.gen_range(1..groups.len())].clone();
        let red: BTreeSet<Origin> = g1.filter(|&r| live(r, 1)).map(|r| Origin { row: r, col: 1 }).collect();
        if !red.is_empty() {
            colors.push(("red".to_string(), red));
        }
    }
    (g, WranglingSketch::new(colors))
}
