//! Wall-clock benchmarks for the three solvers and the remainder operator.
//!
//! Run with `cargo bench -p stokes-bench`; the grids match the sizes the
//! verification suite uses, so these numbers bound what a full sweep costs.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use stokes_bench::{iteration_state, slab_problem, torus_problem, unit_lambda};
use stokes_core::graph::{remainder_rhs, GraphProfile};
use stokes_core::halfspace::{solve_half_space, ExtensionMode};
use stokes_core::sector::ResolventParam;
use stokes_core::wholespace::solve_whole_space;

fn bench_whole_space(c: &mut Criterion) {
    let param = ResolventParam::new(unit_lambda()).unwrap();
    for (d, n) in [(2usize, 64usize), (3, 32)] {
        let (_, rhs) = torus_problem(d, n);
        c.bench_function(&format!("whole_space_d{d}_n{n}"), |b| {
            b.iter(|| solve_whole_space(black_box(&rhs), black_box(&param)).unwrap())
        });
    }
}

fn bench_half_space(c: &mut Criterion) {
    let param = ResolventParam::new(unit_lambda()).unwrap();
    let (_, rhs) = slab_problem(2, 64, 65);
    c.bench_function("half_space_d2_n64x65", |b| {
        b.iter(|| {
            solve_half_space(black_box(&rhs), black_box(&param), ExtensionMode::Strict).unwrap()
        })
    });
}

fn bench_remainder(c: &mut Criterion) {
    let (slab, _) = slab_problem(2, 64, 65);
    let profile = GraphProfile::cosine(&slab.horizontal, 0.05, 1).unwrap();
    let (u, p) = iteration_state(&slab);
    c.bench_function("graph_remainder_d2_n64x65", |b| {
        b.iter(|| remainder_rhs(black_box(&profile), black_box(&u), black_box(&p)).unwrap())
    });
}

criterion_group!(benches, bench_whole_space, bench_half_space, bench_remainder);
criterion_main!(benches);
