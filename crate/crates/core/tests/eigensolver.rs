use lmglab::eigen::{hermitian_banded, hermitian_dense};
use lmglab::evolve::eigensystem;
use lmglab::oracle::jacobi_eigenvalues;
use lmglab::spinspace::BandedHermitianOperator;
use lmglab::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_band(rng: &mut ChaCha8Rng, dim: usize, bw: usize) -> BandedHermitianOperator {
    BandedHermitianOperator::from_upper(dim, bw, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn ql_matches_jacobi_on_random_bands() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..60 {
        let dim = 1 + trial % 50;
        let bw = trial % 3;
        let op = random_band(&mut rng, dim, bw);
        let ql = hermitian_banded(&op, false).unwrap().values;
        let jac = jacobi_eigenvalues(dim, &op.to_dense()).unwrap();
        for (a, b) in ql.iter().zip(&jac) {
            assert!((a - b).abs() <= 1e-11, "dim {dim} bw {bw}: {a} vs {b}");
        }
    }
}

#[test]
fn dense_path_matches_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [1, 2, 5, 17, 40] {
        let mut a = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            a[i * dim + i] = C64::new(rng.gen_range(-2.0..2.0), 0.0);
            for j in i + 1..dim {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[i * dim + j] = z;
                a[j * dim + i] = z.conj();
            }
        }
        let ql = hermitian_dense(dim, &a, true).unwrap();
        let jac = jacobi_eigenvalues(dim, &a).unwrap();
        for (x, y) in ql.values.iter().zip(&jac) {
            assert!((x - y).abs() <= 1e-11);
        }
        for (k, v) in ql.vectors.iter().enumerate() {
            for i in 0..dim {
                let av: C64 = (0..dim).map(|j| a[i * dim + j] * v[j]).sum();
                assert!((av - v[i] * ql.values[k]).norm() <= 1e-10 * dim as f64);
            }
        }
    }
}

#[test]
fn eigensystem_residuals_and_orthonormality() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in [3, 30, 120] {
        let op = random_band(&mut rng, dim, 2);
        let eig = eigensystem(&op).unwrap();
        let norm = op.max_abs() * 5.0;
        for k in 0..dim {
            let v = eig.vector(k);
            let hv = op.apply_slice(v).unwrap();
            let res = hv.iter().zip(v).map(|(a, b)| (a - b * eig.energies()[k]).norm_sqr()).sum::<f64>().sqrt();
            assert!(res <= 1e-10 * norm);
            for l in 0..=k {
                let ip: C64 = eig.vector(l).iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let want = if l == k { 1.0 } else { 0.0 };
                assert!((ip - want).norm() <= 1e-11);
            }
        }
        assert!(eig.energies().windows(2).all(|w| w[0] <= w[1]));
    }
}
