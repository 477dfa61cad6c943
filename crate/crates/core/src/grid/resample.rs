//! Composition with planar maps via bicubic interpolation.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Space, TorusField, TorusGrid, ZERO};
use crate::error::{invalid, Error, Result};

/// Band-limited interpolation of `f` onto a grid with `factor` times as many
/// points per axis (zero padding of the spectrum). Nodal values of the
/// original grid are preserved.
pub fn oversample(f: &TorusField, factor: usize) -> Result<TorusField> {
    if factor == 0 || !factor.is_power_of_two() {
        return invalid("oversampling factor must be a power of two");
    }
    let g = *f.grid();
    let fine = TorusGrid::new(g.dim(), g.points() * factor, g.side())?.with_origin(g.origin())?;
    if factor == 1 {
        return Ok(f.to_physical());
    }
    let spec = f.to_frequency();
    let mut out = TorusField::zeros(fine, Space::Frequency);
    let half = (g.points() / 2) as i64;
    let vals = out.values_mut();
    for (i, v) in spec.values().iter().enumerate() {
        if *v == ZERO {
            continue;
        }
        let ix = g.unflatten(i);
        // Nyquist entries are split evenly between +M/2 and -M/2.
        let mut targets: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 1.0)];
        for &iy in ix.iter().take(g.dim()) {
            let k = g.wavenumber(iy);
            let mut next = Vec::with_capacity(targets.len() * 2);
            for (ks, w) in targets {
                if k == -half {
                    let mut a = ks.clone();
                    a.push(-half);
                    next.push((a, w * 0.5));
                    let mut b = ks;
                    b.push(half);
                    next.push((b, w * 0.5));
                } else {
                    let mut a = ks;
                    a.push(k);
                    next.push((a, w));
                }
            }
            targets = next;
        }
        for (ks, w) in targets {
            let fi: Vec<usize> = ks
                .iter()
                .map(|&k| fine.index_of_wavenumber(k).expect("fine grid holds coarse band"))
                .collect();
            vals[fine.flatten(&fi)] += v * w;
        }
    }
    Ok(out.into_physical())
}

/// Keys cubic convolution kernel with `a = -1/2`.
#[inline]
fn keys(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

fn bicubic(fine: &TorusField, u: f64, v: f64) -> Complex64 {
    let g = fine.grid();
    let m = g.points() as i64;
    let vals = fine.values();
    let i0 = u.floor() as i64;
    let j0 = v.floor() as i64;
    let mut wu = [0.0; 4];
    let mut wv = [0.0; 4];
    for t in 0..4 {
        wu[t] = keys(u - (i0 - 1 + t as i64) as f64);
        wv[t] = keys(v - (j0 - 1 + t as i64) as f64);
    }
    let mut acc = ZERO;
    for a in 0..4 {
        if wu[a] == 0.0 {
            continue;
        }
        let row = (i0 - 1 + a as i64).rem_euclid(m) as usize * m as usize;
        let mut r = ZERO;
        for b in 0..4 {
            if wv[b] == 0.0 {
                continue;
            }
            let col = (j0 - 1 + b as i64).rem_euclid(m) as usize;
            r += vals[row + col] * wv[b];
        }
        acc += r * wu[a];
    }
    acc
}

/// `T f(x) = k(x) f(ψ(x))` on the grid of `k`.
///
/// `f` is oversampled twice spectrally and interpolated bicubically. The
/// map is only evaluated where `k(x) != 0`, and every such image must lie
/// in the fundamental domain of `f`'s grid.
pub fn resample_compose<M>(f: &TorusField, map: M, k: &TorusField) -> Result<TorusField>
where
    M: Fn([f64; 2]) -> [f64; 2] + Sync,
{
    let gs = *f.grid();
    let gt = *k.grid();
    if gs.dim() != 2 || gt.dim() != 2 {
        return invalid("composition is implemented in two dimensions only");
    }
    let fine = oversample(f, 2)?;
    let kp = k.to_physical();
    let h = fine.grid().spacing();
    let (o0, o1) = (gs.origin()[0], gs.origin()[1]);
    let side = gs.side();
    let out: Vec<std::result::Result<Complex64, Vec<f64>>> = kp
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, kv)| {
            if *kv == ZERO {
                return Ok(ZERO);
            }
            let x = gt.point(i);
            let y = map([x[0], x[1]]);
            let (d0, d1) = (y[0] - o0, y[1] - o1);
            if !(d0 >= 0.0 && d0 < side && d1 >= 0.0 && d1 < side) {
                return Err(y.to_vec());
            }
            Ok(kv * bicubic(&fine, d0 / h, d1 / h))
        })
        .collect();
    let mut values = Vec::with_capacity(out.len());
    for v in out {
        values.push(v.map_err(Error::DomainExit)?);
    }
    TorusField::new(gt, values, Space::Physical)
}
