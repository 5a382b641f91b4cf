//! Sequential against rayon execution for the heavy kernels.

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mourre_lab::experiment::{default_profile, ggt_conjugate};
use mourre_lab::ggt::build_ggt;
use mourre_lab::lattice::laurent_op;
use mourre_lab::linalg::matmul;
use mourre_lab::mourre::mourre_constant;
use mourre_lab::par::{set_execution, Execution};
use mourre_lab::spectra::{arc_filter, lap_probe, radial_ladder, unitary_eig_uncached, UnitaryEigOptions};
use mourre_lab::symbol::{derived_symbols, ggt_symbol};
use mourre_lab::{Boundary, LatticeBox, PhaseArc};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_matmul(c: &mut Criterion) {
    let mut g = c.benchmark_group("matmul");
    for n in [127usize, 255] {
        let lbox = LatticeBox::line(n, Boundary::Periodic).unwrap();
        let u = laurent_op(&lbox, &ggt_symbol(2.0).unwrap()).unwrap();
        for (name, mode) in MODES {
            set_execution(mode);
            g.bench_with_input(BenchmarkId::new(name, n), &u, |b, u| b.iter(|| matmul(black_box(u.matrix()), u.matrix())));
        }
    }
    g.finish();
}

fn bench_spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("unitary_eig_arc_filter");
    g.sample_size(10);
    let lbox = LatticeBox::line(127, Boundary::Periodic).unwrap();
    let u = build_ggt(&lbox, &default_profile(2.0).unwrap().sequence().unwrap()).unwrap();
    let arc = PhaseArc::new(PI - 0.3, PI + 0.3).unwrap();
    for (name, mode) in MODES {
        set_execution(mode);
        g.bench_function(name, |b| {
            b.iter(|| {
                let s = unitary_eig_uncached(black_box(&u), UnitaryEigOptions::default()).unwrap();
                arc_filter(&s, &arc, 0.29).unwrap()
            })
        });
    }
    g.finish();
}

fn bench_lap(c: &mut Criterion) {
    let mut g = c.benchmark_group("lap_probe");
    g.sample_size(10);
    let p = LatticeBox::line(127, Boundary::Periodic).unwrap();
    let u = build_ggt(&p, &default_profile(2.0).unwrap().sequence().unwrap()).unwrap();
    let a = ggt_conjugate(&p.with_boundary(Boundary::Open), 2.0).unwrap();
    let thetas = [PI - 0.4, PI];
    let radii = radial_ladder(5);
    for (name, mode) in MODES {
        set_execution(mode);
        g.bench_function(name, |b| b.iter(|| lap_probe(black_box(&u), &a, &thetas, &radii).unwrap()));
    }
    g.finish();
}

fn bench_constant(c: &mut Criterion) {
    let mut g = c.benchmark_group("mourre_constant");
    let f = ggt_symbol(2.0).unwrap();
    let w = derived_symbols(&f).unwrap().grad_sq;
    let arc = PhaseArc::new(2.6, 3.6).unwrap();
    for (name, mode) in MODES {
        set_execution(mode);
        g.bench_function(name, |b| b.iter(|| mourre_constant(black_box(&f), &arc, &w, 4096).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_matmul, bench_spectrum, bench_lap, bench_constant);
criterion_main!(benches);
