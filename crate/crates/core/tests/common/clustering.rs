//! Brute-force feasibility of pairwise constraints.

use std::collections::BTreeSet;

use chromasheet::cluster::*;
use chromasheet::{CellValue, Table};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Exhaustive search over all labelings using every one of `k` clusters.
pub fn feasible_brute(n: usize, k: usize, cs: &[PairConstraint]) -> bool {
    let total = k.pow(n as u32);
    (0..total).any(|mut code| {
        let mut lab = vec![0; n];
        for l in lab.iter_mut() {
            *l = code % k;
            code /= k;
        }
        let used: BTreeSet<usize> = lab.iter().copied().collect();
        used.len() == k
            && cs.iter().all(|c| match c.kind {
                LinkKind::MustLink => lab[c.a] == lab[c.b],
                LinkKind::CannotLink => lab[c.a] != lab[c.b],
            })
    })
}

pub fn random_table(rng: &mut ChaCha8Rng, n: usize) -> Table {
    let rows = (0..n)
        .map(|_| {
            vec![
                CellValue::text(["x", "y", "z"][rng.gen_range(0..3)]),
                CellValue::number(rng.gen_range(0..10) as f64).unwrap(),
            ]
        })
        .collect();
    Table::new("r", vec!["A".into(), "B".into()], rows).unwrap()
}
