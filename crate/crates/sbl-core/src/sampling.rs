//! Seeded sampling of bundle points.
//!
//! Base points are uniform in a safe sub-box of the chart domain; fiber
//! directions are Gaussian in a g-orthonormal basis and rescaled to radius
//! `s`, so they are uniform on the g-sphere. All draws flow from a single
//! ChaCha stream: identical seeds give identical samples on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::BundlePoint;
use crate::metric::ChartMetric;
use crate::Result;

/// `count` seeded bundle points of radius `s`.
pub fn sample_points(m: &ChartMetric, s: f64, count: usize, seed: u64) -> Result<Vec<BundlePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = m.domain.sample_box(m.dim);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut x = [0.0; 3];
        for i in 0..m.dim {
            x[i] = rng.gen_range(lo[i]..hi[i]);
        }
        if !m.contains(&x) {
            continue;
        }
        let dir = gaussian_direction(&mut rng, m, &x);
        out.push(BundlePoint::from_direction(m, x, dir, s)?);
    }
    Ok(out)
}

/// Seeded base points only.
pub fn sample_base_points(m: &ChartMetric, count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let (lo, hi) = m.domain.sample_box(m.dim);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut x = [0.0; 3];
        for i in 0..m.dim {
            x[i] = rng.gen_range(lo[i]..hi[i]);
        }
        if m.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn gaussian_direction(rng: &mut ChaCha8Rng, m: &ChartMetric, x: &[f64; 3]) -> [f64; 3] {
    // g-orthonormal basis by Gram-Schmidt over the chart basis
    let g = m.g(x);
    let mut basis: Vec<[f64; 3]> = Vec::with_capacity(m.dim);
    for i in 0..m.dim {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        for prev in &basis {
            let c = crate::scalar::g_inner(&g, &v, prev, m.dim);
            for k in 0..m.dim {
                v[k] -= c * prev[k];
            }
        }
        let n = crate::scalar::g_inner(&g, &v, &v, m.dim).sqrt();
        for k in 0..m.dim {
            v[k] /= n;
        }
        basis.push(v);
    }
    loop {
        let mut dir = [0.0; 3];
        let mut norm2 = 0.0;
        for b in &basis {
            // Box-Muller
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = (-2.0 * u1.ln()).sqrt() * u2.cos();
            norm2 += z * z;
            for k in 0..m.dim {
                dir[k] += z * b[k];
            }
        }
        if norm2 > 1e-8 {
            return dir;
        }
    }
}
