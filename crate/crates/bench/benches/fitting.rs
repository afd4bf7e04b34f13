use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hypergrowth_bench::excerpt;
use hypergrowth_core::diagnostics::{runs_null_distribution, DEFAULT_CANDIDATES, EXACT_RUNS_LIMIT};
use hypergrowth_core::{
    diagnose_per_capita, fit_hyperbolic, fit_piecewise, Breakpoint, DiagnosticConfig, PiecewiseConfig, RegionConfig,
    SeriesKind,
};

fn fitting(c: &mut Criterion) {
    let world = excerpt("World", SeriesKind::Population);
    let window = "1000:1950".parse().unwrap();
    c.bench_function("fit_hyperbolic/world_population", |b| {
        b.iter(|| fit_hyperbolic(black_box(&world), &window).unwrap())
    });

    let africa = excerpt("Africa", SeriesKind::Gdp);
    let cfg = PiecewiseConfig {
        window: "1:1950".parse().unwrap(),
        breakpoint: Breakpoint::Auto,
        ..PiecewiseConfig::default()
    };
    c.bench_function("fit_piecewise/africa_gdp_auto", |b| {
        b.iter(|| fit_piecewise(black_box(&africa), &cfg).unwrap())
    });
}

fn diagnostics(c: &mut Criterion) {
    c.bench_function("runs_null/exact_limit", |b| {
        b.iter(|| runs_null_distribution(black_box(EXACT_RUNS_LIMIT), 0, 0))
    });
    c.bench_function("runs_null/simulated_n40", |b| {
        b.iter(|| runs_null_distribution(black_box(40), 10_000, 7))
    });

    let gdp = excerpt("Western Europe", SeriesKind::Gdp);
    let pop = excerpt("Western Europe", SeriesKind::Population);
    let fit = RegionConfig::builtin()
        .get("Western Europe")
        .fit_ratio(&gdp, &pop)
        .unwrap();
    let cfg = DiagnosticConfig::default();
    c.bench_function("diagnose_per_capita/western_europe", |b| {
        b.iter(|| diagnose_per_capita(&gdp, &pop, black_box(&fit), &DEFAULT_CANDIDATES, &cfg).unwrap())
    });
}

criterion_group!(benches, fitting, diagnostics);
criterion_main!(benches);
