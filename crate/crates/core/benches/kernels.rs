use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lmglab::evolve::{eigensystem, observable_series_many, TimeGrid};
use lmglab::model::{build_hamiltonian, LmgParams};
use lmglab::par::Exec;
use lmglab::spinspace::collective_operators;
use lmglab::ssb::{gamma0_gap_scan_with, localize_ground_state};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("observable_series");
    group.sample_size(10);
    for n in [100usize, 400] {
        let params = LmgParams::isotropic(n, 0.716).unwrap();
        let sector = params.sector();
        let eig = eigensystem(&build_hamiltonian(&params, &sector, 0.0, 0.0).unwrap()).unwrap();
        let psi = localize_ground_state(&params, 1.0 / (n * n) as f64, 0.0).unwrap().state;
        let ops = collective_operators(&sector);
        let grid = TimeGrid::new(40.0 * PI * n as f64, 4096).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| observable_series_many(&eig, &psi, &[(&ops.sx, "sx"), (&ops.sy, "sy")], &grid, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn gap_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("gamma0_gap_scan");
    group.sample_size(10);
    let n_list: Vec<usize> = (20..=200).step_by(20).collect();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| gamma0_gap_scan_with(black_box(&n_list), 0.5, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, series, gap_scan);
criterion_main!(benches);
