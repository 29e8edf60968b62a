//! Thin wrapper around `rustfft`: cached plans and in-place transforms along
//! the axes of a row-major d-dimensional array (last axis fastest).

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);
type PlanCache = (FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>);

fn planner_cache() -> &'static Mutex<PlanCache> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())))
}

/// Fetch a (cached) plan of the given length. `forward` uses the e^{-2pi i jk/n}
/// kernel; the inverse is unnormalized.
pub fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = planner_cache().lock().unwrap();
    let (planner, map) = &mut *guard;
    map.entry((len, forward))
        .or_insert_with(|| {
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(len, dir)
        })
        .clone()
}

/// In-place unnormalized 1-d transform of a contiguous buffer.
pub fn transform_1d(data: &mut [Complex64], forward: bool) {
    let fft = plan(data.len(), forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
}

/// In-place unnormalized transform along every axis of a row-major array with
/// `d` axes of length `n` each. No 1/n^d factor is applied in either direction.
pub fn transform_nd(data: &mut [Complex64], d: usize, n: usize, forward: bool) {
    debug_assert_eq!(data.len(), n.pow(d as u32));
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::default(); n];
    let total = data.len();
    for axis in 0..d {
        // stride between consecutive elements along `axis`
        let stride = n.pow((d - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(n) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * n; // span of one full line group along this axis
        let mut base = 0;
        while base < total {
            for off in 0..stride {
                let start = base + off;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
            base += block;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_direct_dft_2d() {
        let n = 4;
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new(i as f64 * 0.3 - 1.0, (i * i % 7) as f64 * 0.1))
            .collect();
        let orig = data.clone();
        transform_nd(&mut data, 2, n, true);
        // direct sum for a couple of modes
        for &(k0, k1) in &[(0usize, 0usize), (1, 3), (2, 2)] {
            let mut acc = Complex64::default();
            for l0 in 0..n {
                for l1 in 0..n {
                    let phase = -2.0 * std::f64::consts::PI * ((k0 * l0 + k1 * l1) as f64)
                        / n as f64;
                    acc += orig[l0 * n + l1] * Complex64::from_polar(1.0, phase);
                }
            }
            let got = data[k0 * n + k1];
            assert!((got - acc).norm() < 1e-12, "mode ({k0},{k1}): {got} vs {acc}");
        }
    }

    #[test]
    fn round_trip_3d() {
        let n = 4;
        let mut data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        let orig = data.clone();
        transform_nd(&mut data, 3, n, true);
        transform_nd(&mut data, 3, n, false);
        let scale = (n * n * n) as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-13);
        }
    }
}
