//! Lookup and nearest-pattern latency at the production scale claimed for
//! the database (924 patterns, 5,246 sentences).

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fflgen_bench::production_scale_database;
use fflgen_core::generator::nearest_pattern;
use fflgen_core::patterndb::PatternVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn bench_retrieval(c: &mut Criterion) {
    let db = production_scale_database();
    let stored: Vec<PatternVector> = db.patterns().cloned().collect();
    let mut rng = StdRng::seed_from_u64(9);

    c.bench_function("exact_lookup_924_patterns", |b| {
        b.iter(|| {
            let q = &stored[rng.random_range(0..stored.len())];
            black_box(db.lookup(black_box(q)).len())
        })
    });

    let mut rng = StdRng::seed_from_u64(10);
    let queries: Vec<PatternVector> = (0..256)
        .map(|_| {
            let bits: Vec<usize> =
                (0..db.space.len()).filter(|_| rng.random_bool(0.015)).collect();
            PatternVector::from_indices(db.space.len(), &bits)
        })
        .collect();
    let mut i = 0;
    c.bench_function("nearest_pattern_scan_924_patterns", |b| {
        b.iter(|| {
            let q = &queries[i % queries.len()];
            i += 1;
            black_box(nearest_pattern(black_box(q), &db).unwrap().1)
        })
    });
}

criterion_group!(benches, bench_retrieval);
criterion_main!(benches);
