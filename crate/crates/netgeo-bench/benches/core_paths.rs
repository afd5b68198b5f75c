use criterion::{black_box, criterion_group, criterion_main, Criterion};
use netgeo_bench::{complete_graph, edgeless, interior_theta};
use netgeo_core::{bessel_k0, estimate_volume, v2_diag_quadrature, CoreEvaluator, McConfig};

fn bench_integrand(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrand_core");
    for n in [2usize, 4, 6] {
        let net = complete_graph(n);
        let theta = interior_theta(n);
        let mut eval = CoreEvaluator::new(&net);
        group.bench_function(format!("clique_n{n}"), |b| {
            b.iter(|| eval.eval(black_box(theta.values())))
        });
    }
    let net = edgeless(6);
    let theta = interior_theta(6);
    let mut eval = CoreEvaluator::new(&net);
    group.bench_function("edgeless_n6", |b| b.iter(|| eval.eval(black_box(theta.values()))));
    group.finish();
}

fn bench_volume(c: &mut Criterion) {
    let net = complete_graph(4);
    let cfg = McConfig::new(20_000, 1);
    c.bench_function("estimate_volume_k4_20k", |b| {
        b.iter(|| estimate_volume(black_box(&net), 1.0, &cfg).unwrap())
    });
}

fn bench_analytic(c: &mut Criterion) {
    c.bench_function("bessel_k0_mixed", |b| {
        b.iter(|| {
            black_box(bessel_k0(black_box(0.7)).unwrap());
            black_box(bessel_k0(black_box(7.3)).unwrap());
        })
    });
    c.bench_function("v2_diag_quadrature", |b| {
        b.iter(|| v2_diag_quadrature(black_box(false), 0.0).unwrap())
    });
}

criterion_group!(benches, bench_integrand, bench_volume, bench_analytic);
criterion_main!(benches);
