use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use memwalk::closed_form::{self, ratio, GenFuncSpec};
use memwalk::fitlab::{ModelCurve, RegimeParams};
use memwalk::lattice::{self, CouplingProfile};
use memwalk::sampler::Ensemble;

fn evolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve");
    for n in [100usize, 1000, 10_000] {
        let profile = CouplingProfile::renormalized(0.4, n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| lattice::evolve(black_box(n), &profile).unwrap())
        });
    }
    g.finish();
}

fn closed_form_checks(c: &mut Criterion) {
    let spec = GenFuncSpec::new(12, ratio(1, 10)).unwrap();
    let q = ratio(3, 2);
    c.bench_function("z_closed_eval/n12", |b| {
        b.iter(|| closed_form::z_closed_eval(black_box(&spec), &q).unwrap())
    });
    c.bench_function("z_dp_eval/n12", |b| {
        b.iter(|| closed_form::z_dp_eval_spec(black_box(&spec), &q).unwrap())
    });
    c.bench_function("variance_exact/n200", |b| {
        b.iter(|| closed_form::variance_exact(black_box(200), 0.002).unwrap())
    });
}

fn sampler(c: &mut Criterion) {
    let ens = Ensemble::new(100, CouplingProfile::renormalized(0.4, 100), 10_000, 7).unwrap();
    c.bench_function("ensemble/n100_m1e4", |b| {
        b.iter(|| ens.terminal_displacements().unwrap())
    });
}

fn model(c: &mut Criterion) {
    let params = RegimeParams {
        b: 0.38,
        delta_sigma: 13.8,
        kappa: 3.0,
    };
    c.bench_function("model_curve/n1000", |b| {
        b.iter(|| ModelCurve::build(black_box(params), 1000).unwrap())
    });
}

criterion_group!(benches, evolve, closed_form_checks, sampler, model);
criterion_main!(benches);
