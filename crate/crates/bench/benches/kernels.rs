use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use symlab::acs::acs_gap;
use symlab::discretization::{build_family, Construction, MatrixFamilySpec, Restriction};
use symlab::spectral::{alpha_functionals, eigs, standard_bank, DistributionTarget, Mode, QuadratureOptions};
use symlab::{assemble_toeplitz, catalog_get, toeplitz::default_table, MultiIndex};

fn toeplitz_assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_toeplitz");
    for name in ["p1_1d", "fd_p1_2d", "p2_2d"] {
        let sym = catalog_get(name).unwrap();
        let table = default_table(&sym).unwrap();
        let n = if sym.d() == 1 { 400 } else { 16 };
        g.bench_function(BenchmarkId::new(name, n), |b| {
            b.iter(|| assemble_toeplitz(&table, &MultiIndex::splat(sym.d(), n as i64)).unwrap())
        });
    }
    g.finish();
}

fn restricted_eigs(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigs_omega");
    g.sample_size(10);
    for n in [8, 16] {
        let a = build_family(&MatrixFamilySpec::new(Construction::FdP1, n, Restriction::Omega)).unwrap();
        g.bench_function(BenchmarkId::new("fd_p1", a.size()), |b| b.iter(|| eigs(black_box(&a)).unwrap()));
    }
    g.finish();
}

fn gap_1d(c: &mut Criterion) {
    let a = build_family(&MatrixFamilySpec::new(Construction::P1_1d, 200, Restriction::FullRectangle)).unwrap();
    let b = build_family(&MatrixFamilySpec::new(Construction::P1_1dScaled { t: 4.0 }, 200, Restriction::FullRectangle))
        .unwrap();
    c.bench_function("acs_gap_n200", |bch| bch.iter(|| acs_gap(a.as_ref(), b.as_ref()).unwrap()));
}

fn alpha(c: &mut Criterion) {
    let target = DistributionTarget::new(catalog_get("q1_2d").unwrap());
    let bank = standard_bank(target.rearrangement(64, Mode::Eigen).max());
    let opts = QuadratureOptions { max_samples: 1 << 16, ..QuadratureOptions::default() };
    let mut g = c.benchmark_group("alpha_functionals");
    g.sample_size(10);
    g.bench_function("q1_2d", |b| b.iter(|| alpha_functionals(&target, &bank, Mode::Eigen, &opts)));
    g.finish();
}

criterion_group!(benches, toeplitz_assembly, restricted_eigs, gap_1d, alpha);
criterion_main!(benches);
