//! Constrained clustering from group-colored rows.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::sheet::{CellRef, CellValue, Coloring, Role, Sketch, Table, TypeTag};

pub const CLUSTER_COLUMN: &str = "Cluster";

/// Ordered scales recognized without configuration, trimmed to the observed span.
const BUILTIN_SCALES: &[&[&str]] = &[&["Very Low", "Low", "Medium", "High", "Very High"]];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub seed: u64,
    /// Column name to ordered levels.
    pub ordinals: BTreeMap<String, Vec<String>>,
    /// Explicit identifier columns; replaces auto-detection when set.
    pub identifiers: Option<Vec<String>>,
    pub max_iterations: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { seed: 0, ordinals: BTreeMap::new(), identifiers: None, max_iterations: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    MustLink,
    CannotLink,
}

/// Pair of 0-based rows with `a < b`; displayed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairConstraint {
    pub kind: LinkKind,
    pub a: usize,
    pub b: usize,
}

impl PairConstraint {
    pub fn new(kind: LinkKind, x: usize, y: usize) -> PairConstraint {
        PairConstraint { kind, a: x.min(y), b: x.max(y) }
    }
}

impl fmt::Display for PairConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            LinkKind::MustLink => "mustlink",
            LinkKind::CannotLink => "cannotlink",
        };
        write!(f, "{name}({}, {})", self.a + 1, self.b + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    Categorical,
    Ordinal(Vec<String>),
    Numeric { min: f64, max: f64 },
    Identifier,
}

/// Per-column feature kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    pub features: Vec<Feature>,
}

impl FeatureSpace {
    /// Numeric columns by range, configured or recognized scales as ordinals,
    /// all-distinct text as identifiers, everything else categorical.
    pub fn infer(t: &Table, cfg: &ClusterConfig) -> Result<FeatureSpace> {
        let mut features = Vec::new();
        for (c, name) in t.header().iter().enumerate() {
            let observed: Vec<&CellValue> = t.column(c).filter(|v| v.is_observed()).collect();
            let f = if name == CLUSTER_COLUMN {
                Feature::Identifier
            } else if let Some(order) = cfg.ordinals.get(name) {
                for v in &observed {
                    let s = v.to_string();
                    if !order.contains(&s) {
                        return Err(Error::Config(format!("ordinal '{name}' does not list observed value '{s}'")));
                    }
                }
                Feature::Ordinal(order.clone())
            } else if let Some(ids) = &cfg.identifiers {
                if ids.contains(name) {
                    Feature::Identifier
                } else {
                    Self::auto_kind(t, c, &observed, false)
                }
            } else {
                Self::auto_kind(t, c, &observed, true)
            };
            features.push(f);
        }
        if let Some(ids) = &cfg.identifiers {
            if let Some(bad) = ids.iter().find(|n| t.col_index(n).is_none()) {
                return Err(Error::Config(format!("identifier column '{bad}' not in table '{}'", t.name())));
            }
        }
        if let Some(bad) = cfg.ordinals.keys().find(|n| t.col_index(n).is_none()) {
            return Err(Error::Config(format!("ordinal column '{bad}' not in table '{}'", t.name())));
        }
        if features.iter().all(|f| *f == Feature::Identifier) {
            return Err(Error::Config(format!("table '{}' has no feature columns", t.name())));
        }
        Ok(FeatureSpace { features })
    }

    fn auto_kind(t: &Table, c: usize, observed: &[&CellValue], detect_ids: bool) -> Feature {
        match t.col_types()[c] {
            TypeTag::Numeric if !observed.is_empty() => {
                let xs = observed.iter().filter_map(|v| v.as_f64());
                let (min, max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                Feature::Numeric { min, max }
            }
            TypeTag::Textual => {
                let distinct: BTreeSet<String> = observed.iter().map(|v| v.to_string()).collect();
                for scale in BUILTIN_SCALES {
                    let ranks: Option<Vec<usize>> = distinct.iter().map(|s| scale.iter().position(|l| l == s)).collect();
                    if let Some(r) = ranks.filter(|r| r.len() >= 2) {
                        let (lo, hi) = (*r.iter().min().unwrap(), *r.iter().max().unwrap());
                        return Feature::Ordinal(scale[lo..=hi].iter().map(|s| s.to_string()).collect());
                    }
                }
                if detect_ids && observed.len() >= 2 && distinct.len() == observed.len() && observed.len() == t.n_rows() {
                    return Feature::Identifier;
                }
                Feature::Categorical
            }
            _ => Feature::Categorical,
        }
    }
}

/// Mean per-feature distance over non-identifier columns; 0.5 when either side is unobserved.
pub fn gower_distance(r1: &[CellValue], r2: &[CellValue], fs: &FeatureSpace) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, f) in fs.features.iter().enumerate() {
        if *f == Feature::Identifier {
            continue;
        }
        n += 1;
        let (x, y) = (&r1[i], &r2[i]);
        if !x.is_observed() || !y.is_observed() {
            sum += 0.5;
            continue;
        }
        sum += match f {
            Feature::Categorical => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
            Feature::Ordinal(order) => {
                let rank = |v: &CellValue| order.iter().position(|l| *l == v.to_string());
                match (rank(x), rank(y)) {
                    (Some(a), Some(b)) if order.len() > 1 => a.abs_diff(b) as f64 / (order.len() - 1) as f64,
                    (Some(_), Some(_)) => 0.0,
                    _ => 0.5,
                }
            }
            Feature::Numeric { min, max } => match (x.as_f64(), y.as_f64()) {
                (Some(a), Some(b)) if max > min => ((a - b).abs() / (max - min)).min(1.0),
                (Some(a), Some(b)) if a == b => 0.0,
                (Some(_), Some(_)) => 0.0,
                _ => 0.5,
            },
            Feature::Identifier => unreachable!(),
        };
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Group colorings on a single table, ignoring machine-generated cells.
pub fn color_rows(s: &Sketch, table: &Table) -> Result<Vec<(String, BTreeSet<usize>)>> {
    s.require_roles(&[Role::Group], "cluster")?;
    let mut out = Vec::new();
    let mut owner: BTreeMap<usize, &str> = BTreeMap::new();
    for c in s.with_role(Role::Group) {
        let mut rows = BTreeSet::new();
        for cell in c.cells.iter().filter(|x| !s.machine_generated.contains(x)) {
            if cell.table != table.name() {
                return Err(Error::InvalidSketch(format!("cluster sketch cell {cell} is outside table '{}'", table.name())));
            }
            if cell.row >= table.n_rows() {
                return Err(Error::InvalidSketch(format!("cell {cell} does not resolve")));
            }
            if let Some(prev) = owner.insert(cell.row, &c.color) {
                if prev != c.color {
                    return Err(Error::Contradiction(format!(
                        "row {} carries colors '{prev}' and '{}'",
                        cell.row + 1,
                        c.color
                    )));
                }
            }
            rows.insert(cell.row);
        }
        if !rows.is_empty() {
            out.push((c.color.clone(), rows));
        }
    }
    Ok(out)
}

/// Must-links within a color, cannot-links across colors; sorted.
pub fn sketch_to_constraints(s: &Sketch, table: &Table) -> Result<Vec<PairConstraint>> {
    let colors = color_rows(s, table)?;
    Ok(constraints_from_colors(&colors))
}

pub fn constraints_from_colors(colors: &[(String, BTreeSet<usize>)]) -> Vec<PairConstraint> {
    let mut out = BTreeSet::new();
    for (i, (_, rows)) in colors.iter().enumerate() {
        let rows: Vec<usize> = rows.iter().copied().collect();
        for (x, &a) in rows.iter().enumerate() {
            for &b in &rows[x + 1..] {
                out.insert(PairConstraint::new(LinkKind::MustLink, a, b));
            }
        }
        for (_, other) in &colors[i + 1..] {
            for &a in &rows {
                for &b in other {
                    out.insert(PairConstraint::new(LinkKind::CannotLink, a, b));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Cluster id (0-based) per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub cluster_of: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    /// Rows per cluster.
    pub fn members(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.k];
        for (r, &c) in self.cluster_of.iter().enumerate() {
            out[c].insert(r);
        }
        out
    }

    pub fn violations(&self, constraints: &[PairConstraint]) -> usize {
        constraints
            .iter()
            .filter(|c| {
                let same = self.cluster_of[c.a] == self.cluster_of[c.b];
                match c.kind {
                    LinkKind::MustLink => !same,
                    LinkKind::CannotLink => same,
                }
            })
            .count()
    }
}

struct Components {
    of: Vec<usize>,
    members: Vec<Vec<usize>>,
    cannot: Vec<BTreeSet<usize>>,
}

fn components(n: usize, constraints: &[PairConstraint]) -> Result<Components> {
    let mut adj = vec![Vec::new(); n];
    for c in constraints {
        if c.a >= n || c.b >= n || c.a == c.b {
            return Err(Error::InvalidArgs(format!("constraint {c} is out of range for {n} rows")));
        }
        if c.kind == LinkKind::MustLink {
            adj[c.a].push(c.b);
            adj[c.b].push(c.a);
        }
    }
    let mut of = vec![usize::MAX; n];
    let mut members = Vec::new();
    for start in 0..n {
        if of[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        of[start] = id;
        while let Some(x) = queue.pop_front() {
            comp.push(x);
            for &y in &adj[x] {
                if of[y] == usize::MAX {
                    of[y] = id;
                    queue.push_back(y);
                }
            }
        }
        comp.sort_unstable();
        members.push(comp);
    }
    let mut cannot = vec![BTreeSet::new(); members.len()];
    for c in constraints.iter().filter(|c| c.kind == LinkKind::CannotLink) {
        let (x, y) = (of[c.a], of[c.b]);
        if x == y {
            let path = must_path(&adj, c.a, c.b);
            let steps: Vec<String> = path.iter().map(|r| (r + 1).to_string()).collect();
            return Err(Error::Infeasible(format!(
                "inconsistent constraints: must-link chain {} contradicts {c}",
                steps.join(" - ")
            )));
        }
        cannot[x].insert(y);
        cannot[y].insert(x);
    }
    Ok(Components { of, members, cannot })
}

fn must_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        let mut next = adj[x].clone();
        next.sort_unstable();
        for y in next {
            if prev[y] == usize::MAX {
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut path = vec![to];
    let mut x = to;
    while x != from {
        x = prev[x];
        path.push(x);
    }
    path.reverse();
    path
}

struct Problem<'a> {
    dist: &'a [Vec<f64>],
    comps: &'a Components,
    k: usize,
}

impl Problem<'_> {
    /// Single linkage between a component and a set of rows.
    fn link(&self, comp: usize, rows: &BTreeSet<usize>) -> f64 {
        let mut best = f64::INFINITY;
        for &a in &self.comps.members[comp] {
            for &b in rows {
                best = best.min(self.dist[a][b]);
            }
        }
        best
    }

    fn allowed(&self, comp: usize, cluster: usize, assign: &[Option<usize>]) -> bool {
        self.comps.cannot[comp].iter().all(|&o| assign[o] != Some(cluster))
    }

    /// Greedy placement in ascending nearest-cluster distance, falling back to
    /// exhaustive search when a component has no admissible cluster.
    fn assign(&self, anchors: &[usize], reps: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
        let nc = self.comps.members.len();
        let mut assign: Vec<Option<usize>> = vec![None; nc];
        for (c, &a) in anchors.iter().enumerate() {
            assign[a] = Some(c);
        }
        let mut free: Vec<usize> = (0..nc).filter(|c| assign[*c].is_none()).collect();
        let dists: Vec<Vec<f64>> = (0..nc).map(|c| (0..self.k).map(|k| self.link(c, &reps[k])).collect()).collect();
        while !free.is_empty() {
            let mut pick: Option<(f64, usize, usize)> = None;
            for &c in &free {
                for k in 0..self.k {
                    if !self.allowed(c, k, &assign) {
                        continue;
                    }
                    let cand = (dists[c][k], c, k);
                    if pick.is_none_or(|p| cand.0 < p.0 || (cand.0 == p.0 && (cand.1, cand.2) < (p.1, p.2))) {
                        pick = Some(cand);
                    }
                }
            }
            let Some((_, c, k)) = pick else {
                return self.exhaustive(anchors, &dists);
            };
            assign[c] = Some(k);
            free.retain(|&x| x != c);
        }
        Some(assign.into_iter().map(|a| a.unwrap()).collect())
    }

    fn exhaustive(&self, anchors: &[usize], dists: &[Vec<f64>]) -> Option<Vec<usize>> {
        let nc = self.comps.members.len();
        let mut assign: Vec<Option<usize>> = vec![None; nc];
        for (c, &a) in anchors.iter().enumerate() {
            assign[a] = Some(c);
        }
        let order: Vec<usize> = (0..nc).filter(|c| assign[*c].is_none()).collect();
        fn go(p: &Problem, order: &[usize], i: usize, assign: &mut Vec<Option<usize>>, dists: &[Vec<f64>]) -> bool {
            let Some(&c) = order.get(i) else {
                let used: BTreeSet<usize> = assign.iter().flatten().copied().collect();
                return used.len() == p.k;
            };
            let mut ks: Vec<usize> = (0..p.k).collect();
            ks.sort_by(|a, b| dists[c][*a].total_cmp(&dists[c][*b]).then(a.cmp(b)));
            for k in ks {
                if p.allowed(c, k, assign) {
                    assign[c] = Some(k);
                    if go(p, order, i + 1, assign, dists) {
                        return true;
                    }
                    assign[c] = None;
                }
            }
            false
        }
        if go(self, &order, 0, &mut assign, dists) {
            Some(assign.into_iter().map(|a| a.unwrap()).collect())
        } else {
            None
        }
    }
}

/// Distance matrix over all rows.
pub fn distance_matrix(table: &Table, fs: &FeatureSpace) -> Vec<Vec<f64>> {
    let rows = table.rows();
    par::map_range(rows.len(), |i| rows.iter().map(|r| gower_distance(&rows[i], r, fs)).collect())
}

/// Constrained k-medoids over must-link components.
///
/// Anchors are fixed components, one per cluster. A component's distance to
/// a cluster is the single-linkage distance to the cluster's anchor rows and
/// current medoid. Free components are placed greedily, medoids updated, and
/// the two steps repeated until the assignment stops changing.
pub fn cluster_with_anchors(
    table: &Table,
    constraints: &[PairConstraint],
    anchors_rows: &[BTreeSet<usize>],
    fs: &FeatureSpace,
    max_iterations: usize,
) -> Result<ClusterAssignment> {
    let n = table.n_rows();
    let k = anchors_rows.len();
    let comps = components(n, constraints)?;
    let dist = distance_matrix(table, fs);
    let anchors: Vec<usize> = anchors_rows
        .iter()
        .map(|rows| {
            let cs: BTreeSet<usize> = rows.iter().map(|&r| comps.of[r]).collect();
            if cs.len() != 1 {
                Err(Error::InvalidArgs("anchor rows must form one must-link component".into()))
            } else {
                Ok(*cs.first().unwrap())
            }
        })
        .collect::<Result<_>>()?;
    solve(&dist, &comps, &anchors, k, max_iterations)
}

fn solve(dist: &[Vec<f64>], comps: &Components, anchors: &[usize], k: usize, max_iterations: usize) -> Result<ClusterAssignment> {
    let n = dist.len();
    if k > comps.members.len() {
        return Err(Error::Infeasible(format!(
            "{k} clusters requested but only {} must-link components exist",
            comps.members.len()
        )));
    }
    let p = Problem { dist, comps, k };
    let base: Vec<BTreeSet<usize>> = anchors.iter().map(|&a| comps.members[a].iter().copied().collect()).collect();
    let mut reps = base.clone();
    let mut last: Option<Vec<usize>> = None;
    for _ in 0..max_iterations.max(1) {
        let assign = p
            .assign(anchors, &reps)
            .ok_or_else(|| Error::Infeasible(format!("no assignment into {k} clusters satisfies the cannot-links")))?;
        if last.as_ref() == Some(&assign) {
            break;
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (c, &cl) in assign.iter().enumerate() {
            members[cl].extend(&comps.members[c]);
        }
        reps = base.clone();
        for (cl, rows) in members.iter_mut().enumerate() {
            rows.sort_unstable();
            let medoid = rows
                .iter()
                .map(|&r| (rows.iter().map(|&o| dist[r][o]).sum::<f64>(), r))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, r)| r);
            reps[cl].extend(medoid);
        }
        last = Some(assign);
    }
    let assign = last.expect("at least one iteration");
    let mut cluster_of = vec![0; n];
    for (c, &cl) in assign.iter().enumerate() {
        for &r in &comps.members[c] {
            cluster_of[r] = cl;
        }
    }
    Ok(ClusterAssignment { cluster_of, k })
}

/// Constrained clustering from raw constraints: anchors are a greedy clique of
/// mutually cannot-linked components, completed by farthest-point picks.
pub fn constrained_cluster(
    table: &Table,
    constraints: &[PairConstraint],
    k: usize,
    fs: &FeatureSpace,
    seed: u64,
) -> Result<ClusterAssignment> {
    if k == 0 {
        return Err(Error::InvalidArgs("k must be positive".into()));
    }
    let comps = components(table.n_rows(), constraints)?;
    if k > comps.members.len() {
        return Err(Error::Infeasible(format!(
            "{k} clusters requested but only {} must-link components exist",
            comps.members.len()
        )));
    }
    let dist = distance_matrix(table, fs);
    let nc = comps.members.len();
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(comps.cannot[c].len()), c));
    let mut anchors: Vec<usize> = Vec::new();
    for &c in &order {
        if anchors.len() < k && anchors.iter().all(|a| comps.cannot[c].contains(a)) {
            anchors.push(c);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let link = |a: usize, b: usize| {
        let mut best = f64::INFINITY;
        for &x in &comps.members[a] {
            for &y in &comps.members[b] {
                best = best.min(dist[x][y]);
            }
        }
        best
    };
    while anchors.len() < k {
        let rest: Vec<usize> = (0..nc).filter(|c| !anchors.contains(c)).collect();
        let score = |c: usize| anchors.iter().map(|&a| link(c, a)).fold(f64::INFINITY, f64::min);
        let best = rest.iter().map(|&c| score(c)).fold(f64::NEG_INFINITY, f64::max);
        let mut ties: Vec<usize> = rest.into_iter().filter(|&c| score(c) == best).collect();
        ties.shuffle(&mut rng);
        anchors.push(ties[0]);
    }
    match solve(&dist, &comps, &anchors, k, 100) {
        Ok(a) => Ok(a),
        Err(_) => {
            // seeds can make a feasible instance look infeasible; search all partitions
            let p = Problem { dist: &dist, comps: &comps, k };
            let zero: Vec<Vec<f64>> = vec![vec![0.0; k]; nc];
            let first = (0..nc).find(|_| true).unwrap();
            let assign = p
                .exhaustive(&[first], &zero)
                .ok_or_else(|| Error::Infeasible(format!("no assignment into {k} clusters satisfies the cannot-links")))?;
            let mut cluster_of = vec![0; table.n_rows()];
            for (c, &cl) in assign.iter().enumerate() {
                for &r in &comps.members[c] {
                    cluster_of[r] = cl;
                }
            }
            Ok(ClusterAssignment { cluster_of, k })
        }
    }
}

/// Result of a sketch-driven clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutcome {
    pub constraints: Vec<PairConstraint>,
    pub assignment: ClusterAssignment,
    pub colors: Vec<String>,
    pub table: Table,
    pub sketch: Sketch,
}

/// One cluster per color; the colored rows anchor their cluster.
pub fn cluster_table(table: &Table, s: &Sketch, cfg: &ClusterConfig) -> Result<ClusterOutcome> {
    let colors = color_rows(s, table)?;
    if colors.len() < 2 {
        return Err(Error::TaskRole("cluster needs at least two group colors".into()));
    }
    let constraints = constraints_from_colors(&colors);
    let fs = FeatureSpace::infer(table, cfg)?;
    let anchors: Vec<BTreeSet<usize>> = colors.iter().map(|(_, r)| r.clone()).collect();
    let assignment = cluster_with_anchors(table, &constraints, &anchors, &fs, cfg.max_iterations)?;
    let names: Vec<String> = colors.iter().map(|(c, _)| c.clone()).collect();
    let (table, sketch) = emit_cluster_sketch(&assignment, &names, table, s)?;
    Ok(ClusterOutcome { constraints, assignment, colors: names, table, sketch })
}

/// Appends (or replaces) the Cluster column and colors every row by its cluster.
/// Cells not colored in `original` are marked machine-generated.
pub fn emit_cluster_sketch(
    assignment: &ClusterAssignment,
    colors: &[String],
    table: &Table,
    original: &Sketch,
) -> Result<(Table, Sketch)> {
    let values: Vec<CellValue> = assignment.cluster_of.iter().map(|&c| CellValue::text(colors[c].clone())).collect();
    let out = match table.col_index(CLUSTER_COLUMN) {
        Some(c) => {
            let mut out = table.clone();
            for (r, v) in values.into_iter().enumerate() {
                out = out.with_cell(r, c, v)?;
            }
            out
        }
        None => table.with_column(CLUSTER_COLUMN, values)?,
    };
    let user: BTreeSet<CellRef> = original
        .with_role(Role::Group)
        .flat_map(|c| c.cells.iter())
        .filter(|c| !original.machine_generated.contains(c))
        .cloned()
        .collect();
    let members = assignment.members();
    let mut colorings = Vec::new();
    let mut machine = BTreeSet::new();
    for (cl, rows) in members.iter().enumerate() {
        let mut cells = Vec::new();
        for &r in rows {
            for c in 0..out.n_cols() {
                let cell = CellRef::new(out.name(), r, c);
                if !user.contains(&cell) {
                    machine.insert(cell.clone());
                }
                cells.push(cell);
            }
        }
        colorings.push(Coloring::new(colors[cl].clone(), Role::Group, cells));
    }
    let mut sketch = Sketch::new(colorings);
    sketch.machine_generated = machine;
    Ok((out, sketch))
}
