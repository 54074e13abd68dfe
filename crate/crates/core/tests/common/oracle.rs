//! Brute-force reference implementations used as test oracles.

use std::collections::HashMap;

use chromasheet::select::{Atom, Fact, Query, Term};
use chromasheet::CellValue;

/// Every assignment of general atoms to specific atoms, checked for a consistent binding.
pub fn subsumes_brute(general: &Query, specific: &Query) -> bool {
    let n = general.atoms.len();
    let m = specific.atoms.len();
    if n == 0 {
        return true;
    }
    if m == 0 {
        return false;
    }
    let mut choice = vec![0usize; n];
    loop {
        let mut theta: HashMap<u32, &Term> = HashMap::new();
        let ok = general.atoms.iter().zip(&choice).all(|(a, &k)| {
            let b = &specific.atoms[k];
            a.pred == b.pred
                && a.args.len() == b.args.len()
                && a.args.iter().zip(&b.args).all(|(x, y)| match x {
                    Term::Const(_) => x == y,
                    Term::Var(v) => *theta.entry(*v).or_insert(y) == y,
                })
        });
        if ok {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            choice[i] += 1;
            if choice[i] < m {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
enum B {
    Val(CellValue),
    Unknown(usize, usize),
}

/// Every assignment of query atoms to facts; `possible` lets Missing match anything.
pub fn covers_brute(q: &Query, facts: &[Fact], seed: &Fact, possible: bool) -> bool {
    let mut all: Vec<&Fact> = facts.iter().collect();
    if !facts.contains(seed) {
        all.push(seed);
    }
    let n = q.atoms.len();
    if n == 0 {
        return false;
    }
    let m = all.len();
    let mut choice = vec![0usize; n];
    loop {
        if choice.iter().any(|&k| all[k] == seed) && consistent(&q.atoms, &choice, &all, possible) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            choice[i] += 1;
            if choice[i] < m {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn consistent(atoms: &[Atom], choice: &[usize], all: &[&Fact], possible: bool) -> bool {
    let mut theta: HashMap<u32, B> = HashMap::new();
    for (a, &k) in atoms.iter().zip(choice) {
        let f = all[k];
        if a.pred != f.pred || a.args.len() != f.values.len() {
            return false;
        }
        for (j, (t, x)) in a.args.iter().zip(&f.values).enumerate() {
            match t {
                Term::Const(c) => {
                    if x.is_missing() {
                        if !possible {
                            return false;
                        }
                    } else if c != x {
                        return false;
                    }
                }
                Term::Var(v) => {
                    let b = if x.is_missing() {
                        if possible {
                            continue;
                        }
                        B::Unknown(k, j)
                    } else {
                        B::Val(x.clone())
                    };
                    if *theta.entry(*v).or_insert_with(|| b.clone()) != b {
                        return false;
                    }
                }
            }
        }
    }
    true
}
