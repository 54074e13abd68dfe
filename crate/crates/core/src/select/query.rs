//! Conjunctive queries: lgg, theta-subsumption, canonical form, text syntax.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sheet::{format_number, CellValue};

/// Query argument. The leading row-identifier of every atom is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(u32),
    Const(CellValue),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

/// Conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Query {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredSig {
    pub name: String,
    pub columns: Vec<String>,
}

/// Ordered predicates with their column names; fixes atom order and variable names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Signature {
    pub preds: Vec<PredSig>,
}

impl Signature {
    pub fn rank(&self, pred: &str) -> usize {
        self.preds.iter().position(|p| p.name == pred).unwrap_or(self.preds.len())
    }

    pub fn columns(&self, pred: &str) -> Option<&[String]> {
        self.preds.iter().find(|p| p.name == pred).map(|p| p.columns.as_slice())
    }
}

pub const DEFAULT_MAX_ATOMS: usize = 12;

impl Query {
    pub fn new(atoms: Vec<Atom>) -> Query {
        Query { atoms }
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Var(v) => Some(*v),
                Term::Const(_) => None,
            })
            .collect()
    }

    fn next_var(&self) -> u32 {
        self.vars().last().map_or(0, |v| v + 1)
    }

    /// Renders in the `?- p(I0,X,'c'), q(I1,X).` syntax.
    pub fn render(&self, sig: &Signature) -> String {
        let mut used: BTreeSet<String> = (0..self.atoms.len()).map(|i| format!("I{i}")).collect();
        let mut names: HashMap<u32, String> = HashMap::new();
        let mut out = String::from("?- ");
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}(I{i}", a.pred);
            for (j, t) in a.args.iter().enumerate() {
                out.push(',');
                match t {
                    Term::Const(c) => out.push_str(&render_const(c)),
                    Term::Var(v) => {
                        let name = names.entry(*v).or_insert_with(|| {
                            let base = sig
                                .columns(&a.pred)
                                .and_then(|c| c.get(j))
                                .map(|c| var_name(c))
                                .unwrap_or_else(|| "X".to_string());
                            let mut name = base.clone();
                            let mut k = 2;
                            while used.contains(&name) {
                                name = format!("{base}{k}");
                                k += 1;
                            }
                            used.insert(name.clone());
                            name
                        });
                        out.push_str(name);
                    }
                }
            }
            out.push(')');
        }
        out.push('.');
        out
    }

    /// Alpha-equivalence, up to atom order and duplicates.
    pub fn alpha_eq(&self, other: &Query, sig: &Signature) -> bool {
        canonical(self, sig).atoms == canonical(other, sig).atoms
    }
}

fn var_name(col: &str) -> String {
    let mut s: String = col.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    match s.chars().next() {
        Some(c) if c.is_ascii_uppercase() => {}
        Some(c) if c.is_ascii_lowercase() => s.replace_range(0..1, &c.to_ascii_uppercase().to_string()),
        _ => s.insert(0, 'V'),
    }
    s
}

fn render_const(c: &CellValue) -> String {
    match c {
        CellValue::Number(x) => format_number(*x),
        CellValue::Text(s) => format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
        CellValue::Bool(b) => b.to_string(),
        CellValue::Empty => "null".to_string(),
        CellValue::Missing => "_".to_string(),
    }
}

/// Canonical form: duplicates removed, atoms sorted by predicate rank then
/// arguments, variables numbered by first occurrence. Ties between atoms that
/// differ only in variables are resolved by searching for the smallest encoding.
pub fn canonical(q: &Query, sig: &Signature) -> Query {
    let mut atoms: Vec<Atom> = q.atoms.clone();
    atoms.sort();
    atoms.dedup();
    let key = |a: &Atom| {
        let pattern: Vec<Option<CellValue>> = a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(_) => None,
                Term::Const(c) => Some(c.clone()),
            })
            .collect();
        (sig.rank(&a.pred), a.pred.clone(), pattern)
    };
    atoms.sort_by_cached_key(key);
    let mut groups: Vec<Vec<Atom>> = Vec::new();
    let mut last = None;
    for a in atoms {
        let k = key(&a);
        if last.as_ref() != Some(&k) {
            groups.push(Vec::new());
            last = Some(k);
        }
        groups.last_mut().unwrap().push(a);
    }
    let mut used: Vec<Vec<bool>> = groups.iter().map(|g| vec![false; g.len()]).collect();
    let mut search = Canon { groups, best: None, budget: 20_000 };
    search.run(0, &mut Vec::new(), &mut used, &HashMap::new(), 0);
    Query { atoms: search.best.unwrap_or_default() }
}

struct Canon {
    groups: Vec<Vec<Atom>>,
    best: Option<Vec<Atom>>,
    budget: usize,
}

impl Canon {
    fn encode(a: &Atom, map: &HashMap<u32, u32>, next: u32) -> (Atom, HashMap<u32, u32>, u32) {
        let mut map = map.clone();
        let mut next = next;
        let args = a
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Term::Const(c.clone()),
                Term::Var(v) => Term::Var(*map.entry(*v).or_insert_with(|| {
                    next += 1;
                    next - 1
                })),
            })
            .collect();
        (Atom { pred: a.pred.clone(), args }, map, next)
    }

    fn run(&mut self, g: usize, out: &mut Vec<Atom>, used: &mut Vec<Vec<bool>>, map: &HashMap<u32, u32>, next: u32) {
        if g == self.groups.len() {
            if self.best.as_ref().is_none_or(|b| out.as_slice() < b.as_slice()) {
                self.best = Some(out.clone());
            }
            return;
        }
        if let Some(b) = &self.best {
            if out.as_slice() > &b[..out.len()] {
                return;
            }
        }
        let remaining: Vec<usize> = (0..self.groups[g].len()).filter(|&i| !used[g][i]).collect();
        if remaining.is_empty() {
            return self.run(g + 1, out, used, map, next);
        }
        let encoded: Vec<(usize, (Atom, HashMap<u32, u32>, u32))> =
            remaining.iter().map(|&i| (i, Self::encode(&self.groups[g][i], map, next))).collect();
        let min = encoded.iter().map(|(_, e)| &e.0).min().unwrap().clone();
        for (i, (atom, m, n)) in encoded {
            if atom != min {
                continue;
            }
            if self.budget == 0 && self.best.is_some() {
                return;
            }
            self.budget = self.budget.saturating_sub(1);
            used[g][i] = true;
            out.push(atom);
            self.run(g, out, used, &m, n);
            out.pop();
            used[g][i] = false;
        }
    }
}

/// True iff some substitution maps every atom of `general` onto an atom of
/// `specific`, whose variables are treated as constants.
pub fn subsumes(general: &Query, specific: &Query) -> bool {
    let mut order: Vec<&Atom> = general.atoms.iter().collect();
    let cands = |a: &Atom| specific.atoms.iter().filter(|b| b.pred == a.pred).count();
    order.sort_by_key(|a| cands(a));
    fn go(i: usize, order: &[&Atom], specific: &Query, theta: &mut HashMap<u32, Term>) -> bool {
        let Some(a) = order.get(i) else { return true };
        for b in specific.atoms.iter().filter(|b| b.pred == a.pred && b.args.len() == a.args.len()) {
            let mut bound = Vec::new();
            let mut ok = true;
            for (x, y) in a.args.iter().zip(&b.args) {
                match x {
                    Term::Const(_) => {
                        if x != y {
                            ok = false;
                        }
                    }
                    Term::Var(v) => match theta.get(v) {
                        Some(t) => {
                            if t != y {
                                ok = false;
                            }
                        }
                        None => {
                            theta.insert(*v, y.clone());
                            bound.push(*v);
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok && go(i + 1, order, specific, theta) {
                return true;
            }
            for v in bound {
                theta.remove(&v);
            }
        }
        false
    }
    go(0, &order, specific, &mut HashMap::new())
}

/// Removes atoms whose absence leaves an equivalent query.
pub fn reduce(q: &Query) -> Query {
    let mut cur = q.clone();
    let mut i = cur.atoms.len();
    while i > 0 {
        i -= 1;
        if cur.atoms.len() == 1 {
            break;
        }
        let mut smaller = cur.clone();
        smaller.atoms.remove(i);
        if subsumes(&cur, &smaller) {
            cur = smaller;
        }
    }
    cur
}

/// Plotkin lgg: pairwise atom lgg with one variable per distinct term pair,
/// then reduced, capped at `max_atoms` and canonicalized.
pub fn lgg_capped(a: &Query, b: &Query, sig: &Signature, max_atoms: usize) -> Query {
    let mut pairs: HashMap<(Term, Term), u32> = HashMap::new();
    let mut atoms = Vec::new();
    for x in &a.atoms {
        for y in &b.atoms {
            if x.pred != y.pred || x.args.len() != y.args.len() {
                continue;
            }
            let args = x
                .args
                .iter()
                .zip(&y.args)
                .map(|(s, t)| match (s, t) {
                    (Term::Const(c), Term::Const(d)) if c == d => Term::Const(c.clone()),
                    _ => {
                        let n = pairs.len() as u32;
                        Term::Var(*pairs.entry((s.clone(), t.clone())).or_insert(n))
                    }
                })
                .collect();
            atoms.push(Atom { pred: x.pred.clone(), args });
        }
    }
    atoms.sort();
    atoms.dedup();
    let mut q = canonical(&reduce(&canonical(&Query { atoms }, sig)), sig);
    if q.atoms.len() > max_atoms {
        q = cap_atoms(q, max_atoms);
        q = canonical(&q, sig);
    }
    q
}

pub fn lgg(a: &Query, b: &Query, sig: &Signature) -> Query {
    lgg_capped(a, b, sig, DEFAULT_MAX_ATOMS)
}

/// Drops atoms whose variables occur nowhere else first, then trailing atoms.
fn cap_atoms(mut q: Query, max_atoms: usize) -> Query {
    let mut count: HashMap<u32, usize> = HashMap::new();
    for a in &q.atoms {
        for t in &a.args {
            if let Term::Var(v) = t {
                *count.entry(*v).or_default() += 1;
            }
        }
    }
    while q.atoms.len() > max_atoms {
        let isolated = q
            .atoms
            .iter()
            .rposition(|a| a.args.iter().all(|t| matches!(t, Term::Var(v) if count[v] == 1)));
        let i = isolated.unwrap_or(q.atoms.len() - 1);
        q.atoms.remove(i);
    }
    q
}

/// Parses the text syntax produced by [`Query::render`].
pub fn parse_query(text: &str, sig: &Signature) -> Result<Query> {
    let mut p = Parser { s: text.as_bytes(), i: 0, vars: HashMap::new(), next: 0 };
    p.ws();
    p.expect("?-")?;
    let mut atoms = Vec::new();
    loop {
        p.ws();
        let pred = p.ident()?;
        let cols = sig
            .columns(&pred)
            .ok_or_else(|| Error::InvalidArgs(format!("unknown predicate '{pred}'")))?
            .len();
        p.ws();
        p.expect("(")?;
        let mut args = Vec::new();
        loop {
            p.ws();
            args.push(p.term()?);
            p.ws();
            if p.eat(",") {
                continue;
            }
            p.expect(")")?;
            break;
        }
        match args.first() {
            Some(Term::Var(_)) => {
                args.remove(0);
            }
            _ => return Err(Error::InvalidArgs(format!("atom '{pred}' must start with a row variable"))),
        }
        if args.len() != cols {
            return Err(Error::InvalidArgs(format!("'{pred}' takes {cols} columns, got {}", args.len())));
        }
        atoms.push(Atom { pred, args });
        p.ws();
        if p.eat(",") {
            continue;
        }
        p.expect(".")?;
        break;
    }
    p.ws();
    if p.i != p.s.len() {
        return Err(Error::InvalidArgs("trailing input after query".into()));
    }
    Ok(Query { atoms })
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    vars: HashMap<String, u32>,
    next: u32,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        if self.s[self.i..].starts_with(tok.as_bytes()) {
            self.i += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(Error::InvalidArgs(format!("expected '{tok}' at offset {}", self.i)))
        }
    }

    fn ident(&mut self) -> Result<String> {
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        if start == self.i {
            return Err(Error::InvalidArgs(format!("expected identifier at offset {start}")));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.i]).into_owned())
    }

    fn fresh(&mut self) -> u32 {
        self.next += 1;
        self.next - 1
    }

    fn term(&mut self) -> Result<Term> {
        let Some(&c) = self.s.get(self.i) else {
            return Err(Error::InvalidArgs("unexpected end of query".into()));
        };
        if c == b'\'' || c == b'"' {
            self.i += 1;
            let mut out = Vec::new();
            loop {
                match self.s.get(self.i) {
                    None => return Err(Error::InvalidArgs("unterminated string".into())),
                    Some(b'\\') => {
                        out.push(*self.s.get(self.i + 1).unwrap_or(&b'\\'));
                        self.i += 2;
                    }
                    Some(&d) if d == c => {
                        self.i += 1;
                        break;
                    }
                    Some(&d) => {
                        out.push(d);
                        self.i += 1;
                    }
                }
            }
            return Ok(Term::Const(CellValue::Text(String::from_utf8_lossy(&out).into_owned())));
        }
        if c == b'-' || c == b'.' || c.is_ascii_digit() {
            let start = self.i;
            self.i += 1;
            while self.i < self.s.len()
                && (self.s[self.i].is_ascii_digit() || matches!(self.s[self.i], b'.' | b'e' | b'E' | b'+' | b'-'))
            {
                self.i += 1;
            }
            let raw = String::from_utf8_lossy(&self.s[start..self.i]).into_owned();
            return match raw.parse::<f64>().ok().and_then(CellValue::number) {
                Some(v) => Ok(Term::Const(v)),
                None => Err(Error::InvalidArgs(format!("bad number '{raw}'"))),
            };
        }
        let id = self.ident()?;
        Ok(match id.as_str() {
            "_" => Term::Var(self.fresh()),
            "true" => Term::Const(CellValue::Bool(true)),
            "false" => Term::Const(CellValue::Bool(false)),
            "null" => Term::Const(CellValue::Empty),
            _ if id.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') => {
                let next = self.next;
                let v = *self.vars.entry(id).or_insert(next);
                if v == next {
                    self.next += 1;
                }
                Term::Var(v)
            }
            _ => return Err(Error::InvalidArgs(format!("unexpected token '{id}'"))),
        })
    }
}

impl Query {
    /// Copy with variables shifted past those of `other`.
    pub fn apart_from(&self, other: &Query) -> Query {
        let off = other.next_var();
        Query {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    pred: a.pred.clone(),
                    args: a
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => Term::Var(v + off),
                            c => c.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}
