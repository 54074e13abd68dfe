//! Beam search over transform programs.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::sheet::Table;

use super::grid::{apply_transform, Origin, PCell, ProvenancedGrid, Transform};
use super::sketch::{check_sketch, score_with, WranglingSketch};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct WrangleConfig {
    pub beam: usize,
    pub max_depth: usize,
    /// Cell evaluations allowed for expanding a level in full before the beam truncates it.
    pub full_level_budget: usize,
}

impl Default for WrangleConfig {
    fn default() -> Self {
        WrangleConfig { beam: 5, max_depth: 6, full_level_budget: 150_000 }
    }
}

/// A synthesized program with its output grid.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub program: Vec<Transform>,
    pub grid: ProvenancedGrid,
    pub score: f64,
}

#[derive(Debug, Clone)]
struct Candidate {
    program: Vec<Transform>,
    grid: ProvenancedGrid,
    score: f64,
    violations: usize,
    satisfied: bool,
}

impl Candidate {
    fn new(program: Vec<Transform>, grid: ProvenancedGrid, s: &WranglingSketch) -> Candidate {
        let check = check_sketch(&grid, s);
        let score = score_with(&grid, check.violations);
        Candidate { program, grid, score, violations: check.violations, satisfied: check.satisfied }
    }

    fn key_cmp(&self, other: &Candidate) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then(self.program.len().cmp(&other.program.len()))
            .then_with(|| self.program.cmp(&other.program))
    }
}

/// Beam state with the best score reachable by a fill-then-pivot lookahead.
struct Ranked {
    cand: Candidate,
    outlook: f64,
    lookahead: Vec<Candidate>,
}

/// Candidate transforms in priority order.
pub fn propose(g: &ProvenancedGrid, s: &WranglingSketch) -> Vec<Transform> {
    let mut out = Vec::new();
    let cues = pivot_cues(g, s);
    out.extend(cues.iter().copied());
    for k in 0..g.n_cols {
        if !g.rows.iter().any(|r| !r[k].is_empty()) {
            continue;
        }
        for v in 0..g.n_cols {
            let t = Transform::Pivot(k, v);
            if k != v && !cues.contains(&t) {
                out.push(t);
            }
        }
    }
    for c in 0..g.n_cols {
        let mut tail_empty = false;
        let mut tail_full = false;
        for r in &g.rows {
            if r[c].is_empty() {
                continue;
            }
            if r[c + 1..].iter().all(PCell::is_empty) {
                tail_empty = true;
            } else {
                tail_full = true;
            }
        }
        if tail_empty && tail_full {
            out.push(Transform::Split(c));
        }
    }
    out.extend(fill_candidates(g));
    if g.rows.iter().any(|r| r.iter().all(PCell::is_empty)) {
        out.push(Transform::DropEmptyRows);
    }
    if (0..g.n_cols).any(|c| g.rows.iter().all(|r| r[c].is_empty())) {
        out.push(Transform::DropEmptyColumns);
    }
    out
}

fn fill_candidates(g: &ProvenancedGrid) -> Vec<Transform> {
    (0..g.n_cols)
        .filter(|&c| {
            let mut seen = false;
            g.rows.iter().any(|r| {
                if r[c].is_empty() {
                    seen
                } else {
                    seen = true;
                    false
                }
            })
        })
        .map(Transform::ForwardFill)
        .collect()
}

/// Adjacent column pairs holding equally long vertical runs of same-colored cells.
pub fn pivot_cues(g: &ProvenancedGrid, s: &WranglingSketch) -> Vec<Transform> {
    let color_of: HashMap<Origin, usize> =
        s.colors.iter().enumerate().flat_map(|(ci, (_, set))| set.iter().map(move |o| (*o, ci))).collect();
    let runs: Vec<BTreeSet<usize>> = (0..g.n_cols)
        .map(|c| {
            let mut lens = BTreeSet::new();
            let mut cur: Option<(usize, usize)> = None;
            for r in &g.rows {
                let col = r[c].origins().find_map(|o| color_of.get(&o).copied());
                cur = match (col, cur) {
                    (Some(x), Some((y, n))) if x == y => Some((x, n + 1)),
                    (Some(x), prev) => {
                        if let Some((_, n)) = prev {
                            lens.insert(n);
                        }
                        Some((x, 1))
                    }
                    (None, prev) => {
                        if let Some((_, n)) = prev {
                            lens.insert(n);
                        }
                        None
                    }
                };
            }
            if let Some((_, n)) = cur {
                lens.insert(n);
            }
            lens.retain(|&n| n >= 2);
            lens
        })
        .collect();
    (0..g.n_cols.saturating_sub(1))
        .filter(|&c| runs[c].intersection(&runs[c + 1]).next().is_some())
        .map(|c| Transform::Pivot(c, c + 1))
        .collect()
}

fn lookahead(base: &Candidate, s: &WranglingSketch, max_depth: usize) -> Vec<Candidate> {
    let mut out = Vec::new();
    if base.program.len() + 1 > max_depth {
        return out;
    }
    let mut prefixes = vec![(base.program.clone(), base.grid.clone())];
    if base.program.len() + 2 <= max_depth {
        for t in fill_candidates(&base.grid) {
            if let Ok(g) = apply_transform(&base.grid, t) {
                let mut p = base.program.clone();
                p.push(t);
                prefixes.push((p, g));
            }
        }
    }
    for (p, g) in prefixes {
        for t in pivot_cues(&g, s) {
            if let Ok(out_g) = apply_transform(&g, t) {
                let mut prog = p.clone();
                prog.push(t);
                out.push(Candidate::new(prog, out_g, s));
            }
        }
    }
    out
}

fn rank(c: Candidate, s: &WranglingSketch, max_depth: usize) -> Ranked {
    let look = lookahead(&c, s, max_depth);
    let outlook = look.iter().map(|x| x.score).fold(c.score, f64::min);
    Ranked { cand: c, outlook, lookahead: look }
}

fn consider(best: &mut Option<Candidate>, c: &Candidate) {
    if best.as_ref().is_none_or(|b| c.key_cmp(b) == Ordering::Less) {
        *best = Some(c.clone());
    }
}

/// Every syntactically valid transform for `g`.
pub fn all_transforms(g: &ProvenancedGrid) -> Vec<Transform> {
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

fn level_cost(states: &[Candidate]) -> usize {
    states
        .iter()
        .map(|c| {
            let n = c.grid.n_cols;
            (n * (n + 1) + 2) * (c.grid.n_rows() * n).max(1)
        })
        .sum()
}

/// Finds the best sketch-satisfying program by beam search.
///
/// Levels are expanded in full over every transform while their evaluation
/// cost fits `full_level_budget`; from then on the level is truncated to the
/// `beam` best states and expanded with prioritized proposals. States are
/// ranked by their own score improved by a short fill-then-pivot lookahead.
/// Every evaluated program, lookahead included, competes for the final answer
/// by (score, length, transform order).
pub fn synthesize_program(input: &Table, s: &WranglingSketch, cfg: &WrangleConfig) -> Result<Synthesis> {
    synthesize_from_grid(&ProvenancedGrid::from_table(input), s, cfg)
}

pub fn synthesize_from_grid(start: &ProvenancedGrid, s: &WranglingSketch, cfg: &WrangleConfig) -> Result<Synthesis> {
    let root = Candidate::new(Vec::new(), start.clone(), s);
    let mut best_sat: Option<Candidate> = None;
    let mut best_any: Option<Candidate> = None;
    let note = |c: &Candidate, best_sat: &mut Option<Candidate>, best_any: &mut Option<Candidate>| {
        if c.satisfied {
            consider(best_sat, c);
        }
        consider(best_any, c);
    };
    note(&root, &mut best_sat, &mut best_any);
    let mut seen: HashSet<ProvenancedGrid> = HashSet::new();
    seen.insert(root.grid.clone());
    let mut full = level_cost(std::slice::from_ref(&root)) <= cfg.full_level_budget;
    let mut level = vec![root];
    for _ in 0..cfg.max_depth {
        let expansions: Vec<(usize, Transform)> = level
            .iter()
            .enumerate()
            .flat_map(|(i, b)| {
                let ts = if full { all_transforms(&b.grid) } else { propose(&b.grid, s) };
                ts.into_iter().map(move |t| (i, t))
            })
            .collect();
        let children: Vec<Option<Candidate>> = par::map(&expansions, |(i, t)| {
            let b = &level[*i];
            let out = apply_transform(&b.grid, *t).ok()?;
            let mut prog = b.program.clone();
            prog.push(*t);
            Some(Candidate::new(prog, out, s))
        });
        let mut children: Vec<Candidate> = children.into_iter().flatten().collect();
        children.sort_by(|a, b| a.key_cmp(b));
        let mut fresh = Vec::new();
        for c in children {
            note(&c, &mut best_sat, &mut best_any);
            if seen.insert(c.grid.clone()) {
                fresh.push(c);
            }
        }
        full = full && level_cost(&fresh) <= cfg.full_level_budget;
        if full {
            level = fresh;
        } else {
            let mut ranked: Vec<Ranked> = par::map(&fresh, |c| rank(c.clone(), s, cfg.max_depth));
            for r in &ranked {
                for l in &r.lookahead {
                    note(l, &mut best_sat, &mut best_any);
                }
            }
            ranked.sort_by(|a, b| a.outlook.total_cmp(&b.outlook).then_with(|| a.cand.key_cmp(&b.cand)));
            level = ranked.into_iter().take(cfg.beam).map(|r| r.cand).collect();
        }
        if level.is_empty() {
            break;
        }
    }
    match best_sat {
        Some(c) => Ok(Synthesis { program: c.program, grid: c.grid, score: c.score }),
        None => {
            let b = best_any.expect("root is always evaluated");
            Err(Error::Exhausted { best: b.program, violations: b.violations })
        }
    }
}
