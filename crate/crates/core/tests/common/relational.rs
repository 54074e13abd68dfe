//! Random relational examples over a two-predicate signature.

use chromasheet::select::*;
use chromasheet::CellValue;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sig2() -> Signature {
    Signature {
        preds: vec![
            PredSig { name: "p".into(), columns: vec!["A".into(), "B".into()] },
            PredSig { name: "q".into(), columns: vec!["A".into(), "C".into(), "D".into()] },
        ],
    }
}

pub fn value(rng: &mut ChaCha8Rng, missing: bool) -> CellValue {
    match rng.gen_range(0..if missing { 6 } else { 5 }) {
        0 => CellValue::text("a"),
        1 => CellValue::text("b"),
        2 => CellValue::text("c"),
        3 => CellValue::Number(1.0),
        4 => CellValue::Number(2.0),
        _ => CellValue::Missing,
    }
}

pub fn random_example(rng: &mut ChaCha8Rng, missing: bool) -> RelExample {
    let n = rng.gen_range(1..=3);
    let mut facts = Vec::new();
    for i in 0..n {
        let (pred, arity) = if rng.gen_bool(0.5) { ("p", 2) } else { ("q", 3) };
        facts.push(Fact { pred: pred.into(), row: i, values: (0..arity).map(|_| value(rng, missing)).collect() });
    }
    facts.sort();
    facts.dedup_by(|a, b| a.pred == b.pred && a.values == b.values);
    RelExample { facts, seed: 0, polarity: Polarity::Positive }
}
