use std::f64::consts::PI;

use lmglab::evolve::{TimeGrid, TimeSeries};
use lmglab::spectra::{periodogram, windowed_dft, Window};
use lmglab::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn naive_dft(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|q| x.iter().enumerate().map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * q % n) as f64 / n as f64)).sum())
        .collect()
}

fn noise(len: usize, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = TimeGrid::new(len as f64, len).unwrap();
    TimeSeries::new(grid, (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(), "noise").unwrap()
}

#[test]
fn fft_matches_direct_dft() {
    for (len, seed) in [(16, 1), (17, 2), (64, 3), (100, 4), (243, 5)] {
        let s = noise(len, seed);
        for w in [Window::None, Window::Hann] {
            let wts = w.weights(len);
            let windowed: Vec<C64> = s.values.iter().zip(&wts).map(|(x, w)| x * w).collect();
            let reference = naive_dft(&windowed);
            for (a, b) in windowed_dft(&s, w).iter().zip(&reference) {
                assert!((a - b).norm() <= 1e-10 * len as f64);
            }
        }
    }
}

#[test]
fn parseval() {
    for (len, seed) in [(4096, 9), (1000, 10)] {
        let s = noise(len, seed);
        for w in [Window::None, Window::Hann] {
            let x = windowed_dft(&s, w);
            let spectral: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let energy: f64 = s.values.iter().zip(w.weights(len)).map(|(v, w)| (v * w).norm_sqr()).sum();
            assert!((spectral / (len as f64 * energy) - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn one_sided_magnitudes_recover_amplitude() {
    let grid = TimeGrid::default_for(100);
    let v: Vec<f64> = grid.points().iter().map(|&t| 0.3 + 2.0 * (0.01 * t).cos()).collect();
    let s = periodogram(&TimeSeries::real(grid, &v, "x").unwrap(), Window::Hann, 100).unwrap();
    assert!((s.magnitudes[0] - 0.3).abs() < 1e-12);
    assert_eq!(s.freq_bins.len(), 2049);
    assert_eq!(s.peaks.len(), 1);
    assert!((s.peaks[0].height - 2.0).abs() < 1e-9);
}
