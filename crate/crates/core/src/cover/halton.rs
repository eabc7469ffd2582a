//! Low-discrepancy point sets.

use std::f64::consts::PI;

use crate::matgroup::Vector;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Van der Corput radical inverse of `n` in base `b`.
pub fn radical_inverse(mut n: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while n > 0 {
        r += f * (n % b) as f64;
        n /= b;
        f *= inv;
    }
    r
}

/// The `n`-th Halton point in `[0, 1)^dims`, `dims ≤ 8`. Index 0 is skipped
/// so no coordinate is exactly zero.
pub fn halton(n: u64, dims: usize) -> Vec<f64> {
    PRIMES[..dims].iter().map(|&p| radical_inverse(n + 1, p)).collect()
}

/// Maps a point of the unit cube onto the unit sphere S^{d-1}.
pub fn cube_to_sphere(u: &[f64], dim: usize) -> Vector {
    match dim {
        1 => Vector::from_slice(&[if u[0] < 0.5 { -1.0 } else { 1.0 }]),
        2 => {
            let t = 2.0 * PI * u[0];
            Vector::from_slice(&[t.cos(), t.sin()])
        }
        3 => {
            let z = 2.0 * u[0] - 1.0;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = 2.0 * PI * u[1];
            Vector::from_slice(&[r * t.cos(), r * t.sin(), z])
        }
        _ => {
            // Box-Muller pairs, then normalize.
            let mut g = Vec::with_capacity(dim);
            for k in 0..dim.div_ceil(2) {
                let r = (-2.0 * (1.0 - u[2 * k]).ln()).sqrt();
                let t = 2.0 * PI * u[2 * k + 1];
                g.push(r * t.cos());
                g.push(r * t.sin());
            }
            g.truncate(dim);
            let v = Vector::from_slice(&g);
            let n = v.norm();
            if n > 0.0 {
                v.scale(1.0 / n)
            } else {
                Vector::basis(dim, 0)
            }
        }
    }
}

/// Number of cube coordinates consumed by `cube_to_sphere`.
pub fn sphere_dims(dim: usize) -> usize {
    match dim {
        1 | 2 => 1,
        3 => 2,
        _ => 2 * dim.div_ceil(2),
    }
}

/// `n`-th low-discrepancy direction on S^{d-1}.
pub fn sphere_point(n: u64, dim: usize) -> Vector {
    cube_to_sphere(&halton(n, sphere_dims(dim)), dim)
}
