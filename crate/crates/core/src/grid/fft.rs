//! Multi-dimensional FFTs over row-major cubes, with optional pruning of
//! lines known to be zero.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

/// Columns gathered per pass when transforming a strided axis.
const BLOCK: usize = 16;

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((len, inverse))
        .or_insert_with(|| {
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            FftPlanner::new().plan_fft(len, dir)
        })
        .clone()
}

/// Unscaled in-place DFT of a `dim`-dimensional cube with side `m`.
///
/// When `nonzero` is given it lists the flat indices that may be nonzero on
/// entry (every other entry must be zero); lines and blocks that are
/// entirely zero are then skipped in all but the final axis pass.
pub(crate) fn fft_nd(
    buf: &mut [Complex64],
    dim: usize,
    m: usize,
    inverse: bool,
    nonzero: Option<&[u32]>,
) {
    debug_assert_eq!(buf.len(), m.pow(dim as u32));
    let fft = plan(m, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut gather = vec![Complex64::new(0.0, 0.0); BLOCK * m];
    for axis in (0..dim).rev() {
        let groups = m.pow(axis as u32);
        let active = match nonzero {
            Some(idx) if axis > 0 => {
                let span = m.pow((dim - axis) as u32);
                let mut mask = vec![false; groups];
                for &i in idx {
                    mask[i as usize / span] = true;
                }
                Some(mask)
            }
            _ => None,
        };
        if axis + 1 == dim {
            match &active {
                None => fft.process_with_scratch(buf, &mut scratch),
                Some(mask) => {
                    for (line, chunk) in buf.chunks_exact_mut(m).enumerate() {
                        if mask[line] {
                            fft.process_with_scratch(chunk, &mut scratch);
                        }
                    }
                }
            }
            continue;
        }
        let stride = m.pow((dim - 1 - axis) as u32);
        let block_len = m * stride;
        for (g, block) in buf.chunks_exact_mut(block_len).enumerate() {
            if let Some(mask) = &active {
                if !mask[g] {
                    continue;
                }
            }
            let mut c0 = 0;
            while c0 < stride {
                let w = BLOCK.min(stride - c0);
                let tmp = &mut gather[..w * m];
                for r in 0..m {
                    let row = &block[r * stride + c0..r * stride + c0 + w];
                    for (b, v) in row.iter().enumerate() {
                        tmp[b * m + r] = *v;
                    }
                }
                fft.process_with_scratch(tmp, &mut scratch);
                for r in 0..m {
                    let row = &mut block[r * stride + c0..r * stride + c0 + w];
                    for (b, v) in row.iter_mut().enumerate() {
                        *v = tmp[b * m + r];
                    }
                }
                c0 += w;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(x: &[Complex64], m: usize, inverse: bool) -> Vec<Complex64> {
        let sign = if inverse { 1.0 } else { -1.0 };
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        for k0 in 0..m {
            for k1 in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..m {
                    for j1 in 0..m {
                        let ph = sign * 2.0 * std::f64::consts::PI * ((j0 * k0 + j1 * k1) % m) as f64
                            / m as f64;
                        acc += x[j0 * m + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k0 * m + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let m = 8;
        let x: Vec<Complex64> = (0..m * m)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        for inverse in [false, true] {
            let mut y = x.clone();
            fft_nd(&mut y, 2, m, inverse, None);
            let z = naive_dft_2d(&x, m, inverse);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pruned_equals_dense_3d() {
        let m = 8;
        let n = m * m * m;
        let idx: Vec<u32> = vec![3, 77, 78, 200, 201, 450];
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (t, &i) in idx.iter().enumerate() {
            x[i as usize] = Complex64::new(1.0 + t as f64, -(t as f64));
        }
        let mut dense = x.clone();
        fft_nd(&mut dense, 3, m, true, None);
        let mut pruned = x;
        fft_nd(&mut pruned, 3, m, true, Some(&idx));
        for (a, b) in dense.iter().zip(&pruned) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
