//! Data selection: relational query induction from positive and negative rows.

mod query;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sheet::{CellRef, CellValue, Coloring, Role, Sketch, Workbook};

pub use query::{
    canonical, lgg, lgg_capped, parse_query, reduce, subsumes, Atom, PredSig, Query, Signature, Term,
    DEFAULT_MAX_ATOMS,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectConfig {
    pub seed: u64,
    pub pair_samples: usize,
    pub max_atoms: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig { seed: 0, pair_samples: 20, max_atoms: DEFAULT_MAX_ATOMS }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateAtom {
    pub table: String,
    /// Retained column indices in the source table.
    pub cols: Vec<usize>,
    /// Variable per retained column; foreign-key columns share variables.
    pub vars: Vec<u32>,
}

/// Join template over the colored tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub atoms: Vec<TemplateAtom>,
    pub sig: Signature,
}

impl Template {
    pub fn query(&self) -> Query {
        Query::new(
            self.atoms
                .iter()
                .map(|a| Atom { pred: a.table.clone(), args: a.vars.iter().map(|v| Term::Var(*v)).collect() })
                .collect(),
        )
    }

    fn atom(&self, table: &str) -> Option<(usize, &TemplateAtom)> {
        self.atoms.iter().enumerate().find(|(_, a)| a.table == table)
    }

    /// Retained values of one row.
    pub fn fact(&self, wb: &Workbook, table: &str, row: usize) -> Result<Fact> {
        let (_, a) = self.atom(table).ok_or_else(|| Error::NotFound(format!("table '{table}' in template")))?;
        let t = wb.require_table(table)?;
        let r = t
            .rows()
            .get(row)
            .ok_or_else(|| Error::Index(format!("row {} of '{table}'", row + 1)))?;
        Ok(Fact { pred: table.to_string(), row, values: a.cols.iter().map(|&c| r[c].clone()).collect() })
    }

    /// Every row of every template table.
    pub fn database(&self, wb: &Workbook) -> Result<Vec<Fact>> {
        let mut out = Vec::new();
        for a in &self.atoms {
            for r in 0..wb.require_table(&a.table)?.n_rows() {
                out.push(self.fact(wb, &a.table, r)?);
            }
        }
        Ok(out)
    }
}

/// A ground row restricted to the template's retained columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: String,
    pub row: usize,
    pub values: Vec<CellValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelExample {
    pub facts: Vec<Fact>,
    pub seed: usize,
    pub polarity: Polarity,
}

impl RelExample {
    pub fn seed_fact(&self) -> &Fact {
        &self.facts[self.seed]
    }

    /// The facts as a query; Missing values become fresh variables.
    pub fn to_query(&self) -> Query {
        let mut next = 0u32;
        Query::new(
            self.facts
                .iter()
                .map(|f| Atom {
                    pred: f.pred.clone(),
                    args: f
                        .values
                        .iter()
                        .map(|v| {
                            if v.is_missing() {
                                next += 1;
                                Term::Var(next - 1)
                            } else {
                                Term::Const(v.clone())
                            }
                        })
                        .collect(),
                })
                .collect(),
        )
    }

    fn describe(&self) -> String {
        let f = self.seed_fact();
        format!("{} row {}", f.pred, f.row + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Examples {
    pub positives: Vec<RelExample>,
    pub negatives: Vec<RelExample>,
    pub warnings: Vec<String>,
}

fn polarity_rows(s: &Sketch, role: Role) -> BTreeMap<String, BTreeSet<usize>> {
    let mut out: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for c in s.with_role(role) {
        for cell in &c.cells {
            out.entry(cell.table.clone()).or_default().insert(cell.row);
        }
    }
    out
}

/// One atom per colored table (workbook order) over its colored columns plus
/// foreign-key columns; foreign-key-linked columns share a variable.
pub fn build_template(wb: &Workbook, s: &Sketch) -> Result<Template> {
    s.require_roles(&[Role::Positive, Role::Negative], "select")?;
    let mut colored: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for c in s.colorings.iter().filter(|c| matches!(c.role, Role::Positive | Role::Negative)) {
        for cell in &c.cells {
            colored.entry(cell.table.as_str()).or_default().insert(cell.col);
        }
    }
    if colored.is_empty() {
        return Err(Error::TaskRole("select needs positive (and optionally negative) cells".into()));
    }
    let tables: Vec<&str> = wb.tables().iter().map(|t| t.name()).filter(|n| colored.contains_key(n)).collect();
    // union-find over (table, column) and over tables
    let mut parent: HashMap<(String, usize), (String, usize)> = HashMap::new();
    fn find(p: &mut HashMap<(String, usize), (String, usize)>, x: (String, usize)) -> (String, usize) {
        let up = p.get(&x).cloned().unwrap_or_else(|| x.clone());
        if up == x {
            return x;
        }
        let r = find(p, up);
        p.insert(x, r.clone());
        r
    }
    let mut comp: Vec<usize> = (0..tables.len()).collect();
    fn root(c: &mut [usize], i: usize) -> usize {
        if c[i] == i {
            i
        } else {
            let r = root(c, c[i]);
            c[i] = r;
            r
        }
    }
    for fk in wb.schema() {
        let (Some(a), Some(b)) = (
            tables.iter().position(|t| *t == fk.from_table),
            tables.iter().position(|t| *t == fk.to_table),
        ) else {
            continue;
        };
        let ta = wb.require_table(&fk.from_table)?;
        let tb = wb.require_table(&fk.to_table)?;
        for (ca, cb) in fk.from_cols.iter().zip(&fk.to_cols) {
            let ia = ta.col_index(ca).expect("validated foreign key");
            let ib = tb.col_index(cb).expect("validated foreign key");
            colored.get_mut(fk.from_table.as_str()).unwrap().insert(ia);
            colored.get_mut(fk.to_table.as_str()).unwrap().insert(ib);
            let ra = find(&mut parent, (fk.from_table.clone(), ia));
            let rb = find(&mut parent, (fk.to_table.clone(), ib));
            if ra != rb {
                parent.insert(rb, ra);
            }
        }
        let (ra, rb) = (root(&mut comp, a), root(&mut comp, b));
        comp[rb] = ra;
    }
    let mut groups: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for i in 0..tables.len() {
        groups.entry(root(&mut comp, i)).or_default().push(tables[i]);
    }
    if groups.len() > 1 {
        let parts: Vec<String> = groups.values().map(|g| format!("{{{}}}", g.join(", "))).collect();
        return Err(Error::Schema(format!(
            "colored tables are not connected by foreign keys: {}",
            parts.join(" | ")
        )));
    }
    let mut var_of: HashMap<(String, usize), u32> = HashMap::new();
    let mut atoms = Vec::new();
    let mut preds = Vec::new();
    for name in &tables {
        let t = wb.require_table(name)?;
        let cols: Vec<usize> = colored[name].iter().copied().collect();
        let vars = cols
            .iter()
            .map(|&c| {
                let r = find(&mut parent, (name.to_string(), c));
                let n = var_of.len() as u32;
                *var_of.entry(r).or_insert(n)
            })
            .collect();
        preds.push(PredSig { name: name.to_string(), columns: cols.iter().map(|&c| t.header()[c].clone()).collect() });
        atoms.push(TemplateAtom { table: name.to_string(), cols, vars });
    }
    Ok(Template { atoms, sig: Signature { preds } })
}

/// Positive examples are each positive row plus every join partner that is
/// not a negative row; negatives are single unexpanded rows.
pub fn extend_examples(wb: &Workbook, s: &Sketch, template: &Template) -> Result<Examples> {
    let pos = polarity_rows(s, Role::Positive);
    let neg = polarity_rows(s, Role::Negative);
    for (t, rows) in &pos {
        if let Some(both) = neg.get(t).map(|n| rows.intersection(n).copied().collect::<Vec<_>>()) {
            if !both.is_empty() {
                let rows: Vec<String> = both.iter().map(|r| (r + 1).to_string()).collect();
                return Err(Error::Inconsistent(format!(
                    "rows {} of '{t}' carry both positive and negative colors",
                    rows.join(", ")
                )));
            }
        }
    }
    let shared: BTreeSet<u32> = {
        let mut count: HashMap<u32, usize> = HashMap::new();
        for a in &template.atoms {
            for v in &a.vars {
                *count.entry(*v).or_default() += 1;
            }
        }
        count.into_iter().filter(|(_, n)| *n > 1).map(|(v, _)| v).collect()
    };
    let candidates: Vec<Vec<Fact>> = template
        .atoms
        .iter()
        .map(|a| {
            let excluded = neg.get(&a.table);
            let n = wb.table(&a.table).map_or(0, |t| t.n_rows());
            (0..n)
                .filter(|r| excluded.is_none_or(|e| !e.contains(r)))
                .map(|r| template.fact(wb, &a.table, r))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut ex = Examples::default();
    for (ai, a) in template.atoms.iter().enumerate() {
        for &row in pos.get(&a.table).into_iter().flatten() {
            let seed = template.fact(wb, &a.table, row)?;
            let missing_join = a.vars.iter().zip(&seed.values).any(|(v, x)| shared.contains(v) && x.is_missing());
            if missing_join {
                ex.warnings.push(format!(
                    "skipped positive {} row {}: missing value in a join column",
                    a.table,
                    row + 1
                ));
                continue;
            }
            let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
            let mut binding: HashMap<u32, CellValue> = HashMap::new();
            for (v, x) in a.vars.iter().zip(&seed.values) {
                binding.insert(*v, x.clone());
            }
            let others: Vec<usize> = (0..template.atoms.len()).filter(|&i| i != ai).collect();
            join_answers(template, &candidates, &others, 0, &mut binding, &mut Vec::new(), &mut used);
            let mut facts = vec![seed];
            for (i, k) in used {
                facts.push(candidates[i][k].clone());
            }
            ex.positives.push(RelExample { facts, seed: 0, polarity: Polarity::Positive });
        }
    }
    for a in &template.atoms {
        for &row in neg.get(&a.table).into_iter().flatten() {
            let f = template.fact(wb, &a.table, row)?;
            ex.negatives.push(RelExample { facts: vec![f], seed: 0, polarity: Polarity::Negative });
        }
    }
    for p in &ex.positives {
        if p.facts.len() == 1 {
            if let Some(n) = ex.negatives.iter().find(|n| n.facts[0].pred == p.facts[0].pred && n.facts[0].values == p.facts[0].values) {
                return Err(Error::Inconsistent(format!(
                    "positive {} equals negative {}",
                    p.describe(),
                    n.describe()
                )));
            }
        }
    }
    Ok(ex)
}

fn join_answers(
    template: &Template,
    candidates: &[Vec<Fact>],
    others: &[usize],
    k: usize,
    binding: &mut HashMap<u32, CellValue>,
    chosen: &mut Vec<(usize, usize)>,
    used: &mut BTreeSet<(usize, usize)>,
) {
    let Some(&ai) = others.get(k) else {
        used.extend(chosen.iter().copied());
        return;
    };
    let a = &template.atoms[ai];
    for (fi, f) in candidates[ai].iter().enumerate() {
        let mut added = Vec::new();
        let mut ok = true;
        for (v, x) in a.vars.iter().zip(&f.values) {
            match binding.get(v) {
                Some(b) => {
                    if b.is_missing() || x.is_missing() || b != x {
                        ok = false;
                        break;
                    }
                }
                None => {
                    binding.insert(*v, x.clone());
                    added.push(*v);
                }
            }
        }
        if ok {
            chosen.push((ai, fi));
            join_answers(template, candidates, others, k + 1, binding, chosen, used);
            chosen.pop();
        }
        for v in added {
            binding.remove(&v);
        }
    }
}

/// How Missing data values match query arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// Missing is an unknown value equal only to itself; constants never match it.
    Strict,
    /// Missing may be anything: it matches every constant and binds nothing.
    Possible,
}

#[derive(Clone, PartialEq)]
enum Bound<'a> {
    Val(&'a CellValue),
    Unknown(usize, usize),
}

/// Finds a substitution under which some atom binds `seed` and every atom
/// maps onto a fact.
pub fn covers(q: &Query, facts: &[Fact], seed: &Fact, mode: MatchMode) -> bool {
    let mut all: Vec<&Fact> = facts.iter().collect();
    if !facts.contains(seed) {
        all.push(seed);
    }
    let seed_ix = all.iter().position(|f| *f == seed).expect("seed present");
    for (si, a) in q.atoms.iter().enumerate() {
        if a.pred != seed.pred {
            continue;
        }
        let mut theta = HashMap::new();
        let mut added = Vec::new();
        if !match_atom(a, seed_ix, all[seed_ix], mode, &mut theta, &mut added) {
            continue;
        }
        let rest: Vec<&Atom> = q.atoms.iter().enumerate().filter(|(i, _)| *i != si).map(|(_, a)| a).collect();
        if match_rest(&rest, 0, &all, mode, &mut theta) {
            return true;
        }
    }
    false
}

fn match_atom<'a>(
    a: &Atom,
    fi: usize,
    f: &'a Fact,
    mode: MatchMode,
    theta: &mut HashMap<u32, Bound<'a>>,
    added: &mut Vec<u32>,
) -> bool {
    if a.args.len() != f.values.len() {
        return false;
    }
    for (j, (t, x)) in a.args.iter().zip(&f.values).enumerate() {
        match t {
            Term::Const(c) => {
                if x.is_missing() {
                    if mode == MatchMode::Strict {
                        return false;
                    }
                } else if c != x {
                    return false;
                }
            }
            Term::Var(v) => {
                let b = if x.is_missing() {
                    if mode == MatchMode::Possible {
                        continue;
                    }
                    Bound::Unknown(fi, j)
                } else {
                    Bound::Val(x)
                };
                match theta.get(v) {
                    Some(old) => {
                        if *old != b {
                            return false;
                        }
                    }
                    None => {
                        theta.insert(*v, b);
                        added.push(*v);
                    }
                }
            }
        }
    }
    true
}

fn match_rest<'a>(
    rest: &[&Atom],
    k: usize,
    all: &[&'a Fact],
    mode: MatchMode,
    theta: &mut HashMap<u32, Bound<'a>>,
) -> bool {
    let Some(a) = rest.get(k) else { return true };
    for (fi, f) in all.iter().enumerate() {
        if f.pred != a.pred {
            continue;
        }
        let mut added = Vec::new();
        if match_atom(a, fi, f, mode, theta, &mut added) && match_rest(rest, k + 1, all, mode, theta) {
            return true;
        }
        for v in added {
            theta.remove(&v);
        }
    }
    false
}

/// Queries plus the template they are expressed over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub template: Template,
    pub queries: Vec<Query>,
    pub warnings: Vec<String>,
}

impl Selection {
    pub fn rendered(&self) -> Vec<String> {
        self.queries.iter().map(|q| q.render(&self.template.sig)).collect()
    }
}

struct Inducer<'a> {
    sig: &'a Signature,
    cfg: &'a SelectConfig,
    pos: &'a [RelExample],
    pos_q: Vec<Query>,
    negatives: &'a [RelExample],
    db: &'a [Fact],
    consistent: HashMap<String, bool>,
}

impl Inducer<'_> {
    fn lgg(&self, a: &Query, b: &Query) -> Query {
        lgg_capped(a, &b.apart_from(a), self.sig, self.cfg.max_atoms)
    }

    fn is_consistent(&mut self, q: &Query) -> bool {
        let key = q.render(self.sig);
        if let Some(&c) = self.consistent.get(&key) {
            return c;
        }
        let ok = !self.negatives.iter().any(|n| covers(q, self.db, n.seed_fact(), MatchMode::Possible));
        self.consistent.insert(key, ok);
        ok
    }

    fn covered(&self, q: &Query, among: &[usize]) -> Vec<usize> {
        among
            .iter()
            .copied()
            .filter(|&i| covers(q, &self.pos[i].facts, self.pos[i].seed_fact(), MatchMode::Strict))
            .collect()
    }

    /// Best consistent candidate by (coverage, text).
    fn best(&mut self, cands: Vec<Query>, among: &[usize]) -> Option<(Query, Vec<usize>)> {
        let mut best: Option<(Query, Vec<usize>, String)> = None;
        for q in cands {
            if q.atoms.is_empty() || !self.is_consistent(&q) {
                continue;
            }
            let cov = self.covered(&q, among);
            let text = q.render(self.sig);
            let better = match &best {
                None => true,
                Some((_, bc, bt)) => cov.len() > bc.len() || (cov.len() == bc.len() && text < *bt),
            };
            if better {
                best = Some((q, cov, text));
            }
        }
        best.map(|(q, c, _)| (q, c))
    }
}

/// Covering loop: the best consistent lgg of sampled pairs of uncovered
/// positives is greedily generalized with further positives while it stays
/// consistent; positives left over become ground queries.
pub fn induce_queries(
    positives: &[RelExample],
    negatives: &[RelExample],
    db: &[Fact],
    sig: &Signature,
    cfg: &SelectConfig,
) -> Result<Vec<Query>> {
    if positives.is_empty() {
        return Err(Error::EmptySelection("no positive examples".into()));
    }
    let mut ind = Inducer {
        sig,
        cfg,
        pos: positives,
        pos_q: positives.iter().map(|p| canonical(&p.to_query(), sig)).collect(),
        negatives,
        db,
        consistent: HashMap::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut uncovered: Vec<usize> = (0..positives.len()).collect();
    let mut out: Vec<Query> = Vec::new();
    while uncovered.len() >= 2 {
        let mut pairs = Vec::new();
        for (x, &i) in uncovered.iter().enumerate() {
            for &j in &uncovered[x + 1..] {
                pairs.push((i, j));
            }
        }
        if pairs.len() > cfg.pair_samples {
            let mut idx = sample(&mut rng, pairs.len(), cfg.pair_samples).into_vec();
            idx.sort_unstable();
            pairs = idx.into_iter().map(|k| pairs[k]).collect();
        }
        let cands: Vec<Query> = pairs.iter().map(|&(i, j)| ind.lgg(&ind.pos_q[i], &ind.pos_q[j])).collect();
        let Some((mut clause, mut cov)) = ind.best(cands, &uncovered) else { break };
        loop {
            let mut rest: Vec<usize> = uncovered.iter().copied().filter(|i| !cov.contains(i)).collect();
            if rest.is_empty() {
                break;
            }
            if rest.len() > cfg.pair_samples {
                let mut idx = sample(&mut rng, rest.len(), cfg.pair_samples).into_vec();
                idx.sort_unstable();
                rest = idx.into_iter().map(|k| rest[k]).collect();
            }
            let cands: Vec<Query> = rest.iter().map(|&e| ind.lgg(&clause, &ind.pos_q[e])).collect();
            match ind.best(cands, &uncovered) {
                Some((q, c)) if c.len() > cov.len() => {
                    clause = q;
                    cov = c;
                }
                _ => break,
            }
        }
        if cov.is_empty() {
            break;
        }
        uncovered.retain(|i| !cov.contains(i));
        out.push(clause);
    }
    for &e in &uncovered {
        let q = ind.pos_q[e].clone();
        if !ind.is_consistent(&q) {
            let n = negatives
                .iter()
                .filter(|n| covers(&q, db, n.seed_fact(), MatchMode::Possible))
                .map(|n| n.describe())
                .collect::<Vec<_>>();
            return Err(Error::Inconsistent(format!(
                "positive {} cannot be separated from negative {}",
                positives[e].describe(),
                n.join(", ")
            )));
        }
        out.push(q);
    }
    let mut keyed: Vec<(String, Query)> = out.into_iter().map(|q| (q.render(sig), q)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    Ok(keyed.into_iter().map(|(_, q)| q).collect())
}

/// Rows taking part in some answer of some query, per table.
pub fn answer_rows(queries: &[Query], db: &[Fact]) -> BTreeMap<String, BTreeSet<usize>> {
    let mut out: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for q in queries {
        let mut theta = HashMap::new();
        let atoms: Vec<&Atom> = q.atoms.iter().collect();
        let all: Vec<&Fact> = db.iter().collect();
        collect_answers(&atoms, 0, &all, &mut theta, &mut Vec::new(), &mut out);
    }
    out
}

fn collect_answers<'a>(
    atoms: &[&Atom],
    k: usize,
    all: &[&'a Fact],
    theta: &mut HashMap<u32, Bound<'a>>,
    chosen: &mut Vec<&'a Fact>,
    out: &mut BTreeMap<String, BTreeSet<usize>>,
) {
    let Some(a) = atoms.get(k) else {
        for f in chosen.iter() {
            out.entry(f.pred.clone()).or_default().insert(f.row);
        }
        return;
    };
    for (fi, f) in all.iter().enumerate() {
        if f.pred != a.pred {
            continue;
        }
        let mut added = Vec::new();
        if match_atom(a, fi, f, MatchMode::Strict, theta, &mut added) {
            chosen.push(f);
            collect_answers(atoms, k + 1, all, theta, chosen, out);
            chosen.pop();
        }
        for v in added {
            theta.remove(&v);
        }
    }
}

/// Colors every answer row positively over the retained columns. Negative
/// cells keep their color; newly colored cells are machine-generated.
pub fn apply_selection(queries: &[Query], wb: &Workbook, template: &Template, original: &Sketch) -> Result<Sketch> {
    if queries.is_empty() {
        return Ok(Sketch::default());
    }
    let db = template.database(wb)?;
    let rows = answer_rows(queries, &db);
    let negative: BTreeSet<CellRef> = original.with_role(Role::Negative).flat_map(|c| c.cells.iter().cloned()).collect();
    let user_pos: BTreeSet<CellRef> = original.with_role(Role::Positive).flat_map(|c| c.cells.iter().cloned()).collect();
    let mut cells: BTreeSet<CellRef> = user_pos.clone();
    for a in &template.atoms {
        for &r in rows.get(&a.table).into_iter().flatten() {
            for &c in &a.cols {
                let cell = CellRef::new(a.table.clone(), r, c);
                if !negative.contains(&cell) {
                    cells.insert(cell);
                }
            }
        }
    }
    let color = original.with_role(Role::Positive).next().map_or_else(|| "blue".to_string(), |c| c.color.clone());
    let mut colorings = vec![Coloring::new(color, Role::Positive, cells.iter().cloned())];
    colorings.extend(original.with_role(Role::Negative).cloned());
    let mut out = Sketch::new(colorings);
    out.machine_generated = cells.difference(&user_pos).cloned().collect();
    Ok(out)
}

/// Template, examples, induction and recoloring in one step.
pub fn select(wb: &Workbook, s: &Sketch, cfg: &SelectConfig) -> Result<(Selection, Sketch)> {
    s.validate(wb)?;
    let template = build_template(wb, s)?;
    let ex = extend_examples(wb, s, &template)?;
    let db = template.database(wb)?;
    let queries = induce_queries(&ex.positives, &ex.negatives, &db, &template.sig, cfg)?;
    let sketch = apply_selection(&queries, wb, &template, s)?;
    Ok((Selection { template, queries, warnings: ex.warnings }, sketch))
}
