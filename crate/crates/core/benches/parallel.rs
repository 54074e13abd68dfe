use chromasheet::cluster::{distance_matrix, ClusterConfig, FeatureSpace};
use chromasheet::constraints::{find_constraints, partition_blocks};
use chromasheet::engine::{run_task, TaskConfig, TaskKind};
use chromasheet::io::{self, Document};
use chromasheet::{par, CellValue, Table};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> Document {
    let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    io::load(&p).unwrap()
}

fn numeric_table(rows: usize, cols: usize) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let body = (0..rows)
        .map(|_| {
            let mut r: Vec<CellValue> = (0..cols - 1).map(|_| CellValue::Number(rng.gen_range(0..100) as f64)).collect();
            let s: f64 = r.iter().take(3).filter_map(|c| c.as_f64()).sum();
            r.push(CellValue::Number(s));
            r
        })
        .collect();
    Table::new("bench", (0..cols).map(|c| format!("C{c}")).collect(), body).unwrap()
}

fn mixed_table(rows: usize) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let body = (0..rows)
        .map(|_| {
            vec![
                CellValue::text(["a", "b", "c", "d"][rng.gen_range(0..4)]),
                CellValue::Number(rng.gen_range(0..1000) as f64),
                CellValue::text(["Low", "Medium", "High"][rng.gen_range(0..3)]),
            ]
        })
        .collect();
    Table::new("mixed", vec!["K".into(), "V".into(), "L".into()], body).unwrap()
}

fn both<F: Fn() + Send + Sync>(c: &mut Criterion, name: &str, f: F) {
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(&f));
    g.bench_function("sequential", |b| b.iter(|| par::sequential(&f)));
    g.finish();
}

fn benches(c: &mut Criterion) {
    let wide = numeric_table(40, 9);
    both(c, "find_constraints", || {
        find_constraints(&partition_blocks(&wide));
    });

    let mixed = mixed_table(300);
    let fs = FeatureSpace::infer(&mixed, &ClusterConfig::default()).unwrap();
    both(c, "distance_matrix", || {
        distance_matrix(&mixed, &fs);
    });

    let raw = fixture("icecream_raw.vsw.json");
    both(c, "wrangle", || {
        run_task(TaskKind::Wrangle, &raw.workbook, &raw.sketch, &TaskConfig::default()).unwrap();
    });

    let sales = fixture("sales.vsw.json");
    both(c, "autocomplete", || {
        run_task(TaskKind::Autocomplete, &sales.workbook, &sales.sketch, &TaskConfig::default()).unwrap();
    });
}

criterion_group!(parallel, benches);
criterion_main!(parallel);
