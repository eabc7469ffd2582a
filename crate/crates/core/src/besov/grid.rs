//! Sampled functions on a periodic grid and their discrete Fourier transforms.
//!
//! The spatial grid is `x_n = −L + n·2L/N` per axis and the frequency grid is
//! `ξ_k = offset + k/(2L)` with signed `k ∈ [−N/2, N/2)`. A nonzero offset
//! describes a modulated function `e^{2πi offset·x} g(x)`; spatial samples
//! store the envelope `g`, which has the same modulus.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matgroup::Vector;

pub const MAX_GRID_DIM: usize = 3;
pub const MAX_GRID_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Layout {
    Spatial,
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub dim: usize,
    pub n: usize,
    /// Half-width L of the spatial box.
    pub extent: f64,
    /// Frequency of the grid center.
    pub offset: Vector,
    pub layout: Layout,
    pub samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(
        dim: usize,
        n: usize,
        extent: f64,
        offset: Vector,
        layout: Layout,
        samples: Vec<Complex64>,
    ) -> Result<Self> {
        check_shape(dim, n, extent)?;
        if offset.dim() != dim {
            return Err(Error::Dimension { expected: dim, found: offset.dim() });
        }
        let len = n.pow(dim as u32);
        if samples.len() != len {
            return Err(Error::Dimension { expected: len, found: samples.len() });
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(GridFunction { dim, n, extent, offset, layout, samples })
    }

    pub fn zeros(dim: usize, n: usize, extent: f64) -> Result<Self> {
        check_shape(dim, n, extent)?;
        Ok(GridFunction {
            dim,
            n,
            extent,
            offset: Vector::zeros(dim),
            layout: Layout::Spatial,
            samples: vec![Complex64::new(0.0, 0.0); n.pow(dim as u32)],
        })
    }

    pub fn from_spatial(
        dim: usize,
        n: usize,
        extent: f64,
        f: impl Fn(&Vector) -> Complex64,
    ) -> Result<Self> {
        let mut g = GridFunction::zeros(dim, n, extent)?;
        for i in 0..g.len() {
            g.samples[i] = f(&g.position(i));
        }
        GridFunction::new(dim, n, extent, g.offset, Layout::Spatial, g.samples)
    }

    /// Samples `f̂` at the frequency grid centered at `offset`.
    pub fn from_frequency(
        dim: usize,
        n: usize,
        extent: f64,
        offset: Vector,
        f: impl Fn(&Vector) -> Complex64,
    ) -> Result<Self> {
        let mut g = GridFunction::zeros(dim, n, extent)?;
        g.offset = offset;
        g.layout = Layout::Frequency;
        for i in 0..g.len() {
            g.samples[i] = f(&g.frequency(i));
        }
        GridFunction::new(dim, n, extent, g.offset, Layout::Frequency, g.samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        0.5 / self.extent
    }

    fn multi_index(&self, flat: usize) -> [usize; MAX_GRID_DIM] {
        let mut out = [0; MAX_GRID_DIM];
        let mut r = flat;
        for a in (0..self.dim).rev() {
            out[a] = r % self.n;
            r /= self.n;
        }
        out
    }

    pub fn position(&self, flat: usize) -> Vector {
        let m = self.multi_index(flat);
        let dx = self.dx();
        let mut v = Vector::zeros(self.dim);
        for a in 0..self.dim {
            v[a] = -self.extent + m[a] as f64 * dx;
        }
        v
    }

    /// Signed frequency index per axis.
    pub fn wave_number(&self, flat: usize) -> [i64; MAX_GRID_DIM] {
        let m = self.multi_index(flat);
        let mut k = [0i64; MAX_GRID_DIM];
        for a in 0..self.dim {
            k[a] = signed(m[a], self.n);
        }
        k
    }

    pub fn frequency(&self, flat: usize) -> Vector {
        let k = self.wave_number(flat);
        let dxi = self.dxi();
        let mut v = self.offset;
        for a in 0..self.dim {
            v[a] += k[a] as f64 * dxi;
        }
        v
    }

    pub fn to_frequency(&self) -> GridFunction {
        match self.layout {
            Layout::Frequency => self.clone(),
            Layout::Spatial => {
                let mut data = self.samples.clone();
                fft_nd(&mut data, self.dim, self.n, false);
                let c = self.dx().powi(self.dim as i32);
                for (i, z) in data.iter_mut().enumerate() {
                    *z *= c * self.parity(i);
                }
                GridFunction { samples: data, layout: Layout::Frequency, ..self.clone() }
            }
        }
    }

    pub fn to_spatial(&self) -> GridFunction {
        match self.layout {
            Layout::Spatial => self.clone(),
            Layout::Frequency => GridFunction {
                samples: inverse_samples(self, &self.samples),
                layout: Layout::Spatial,
                ..self.clone()
            },
        }
    }

    fn parity(&self, flat: usize) -> f64 {
        let m = self.multi_index(flat);
        if m[..self.dim].iter().sum::<usize>() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// L² norm by quadrature in the current layout.
    pub fn l2_norm(&self) -> f64 {
        let cell = match self.layout {
            Layout::Spatial => self.dx(),
            Layout::Frequency => self.dxi(),
        }
        .powi(self.dim as i32);
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    /// Spatial L^p norm; `p = ∞` gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s = self.to_spatial();
        lp_quadrature(&s.samples, s.dx().powi(self.dim as i32), p)
    }

    pub fn scaled(&self, c: Complex64) -> GridFunction {
        GridFunction { samples: self.samples.iter().map(|z| z * c).collect(), ..self.clone() }
    }
}

fn check_shape(dim: usize, n: usize, extent: f64) -> Result<()> {
    if dim == 0 || dim > MAX_GRID_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    if !n.is_power_of_two() || !(4..=MAX_GRID_SIZE).contains(&n) {
        return Err(Error::Config(format!("grid size {n} must be a power of two in 4..={MAX_GRID_SIZE}")));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::Config(format!("grid extent {extent} must be positive")));
    }
    Ok(())
}

fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Spatial envelope samples of the frequency samples `data` laid out like `grid`.
pub(crate) fn inverse_samples(grid: &GridFunction, data: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> =
        data.iter().enumerate().map(|(i, z)| z * grid.parity(i)).collect();
    fft_nd(&mut out, grid.dim, grid.n, true);
    let c = grid.dxi().powi(grid.dim as i32);
    for z in out.iter_mut() {
        *z *= c;
    }
    out
}

/// `(Σ |z|^p · cell)^{1/p}`, or the maximum modulus for `p = ∞`.
pub fn lp_quadrature(samples: &[Complex64], cell: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    if p == 1.0 {
        return samples.iter().map(|z| z.norm()).sum::<f64>() * cell;
    }
    if p == 2.0 {
        return (samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt();
    }
    (samples.iter().map(|z| z.norm().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
}

/// Unnormalized multi-dimensional FFT, axis by axis.
pub fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> =
        if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = data.len();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(dim: usize, n: usize, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = n.pow(dim as u32);
        let samples = (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        GridFunction::new(dim, n, 3.0, Vector::zeros(dim), Layout::Spatial, samples).unwrap()
    }

    #[test]
    fn parseval_and_round_trip() {
        for dim in 1..=3 {
            let f = random(dim, 16, dim as u64);
            let fh = f.to_frequency();
            let rel = (f.l2_norm() - fh.l2_norm()).abs() / f.l2_norm();
            assert!(rel < 1e-12, "dim {dim}: {rel}");
            let back = fh.to_spatial();
            let err = back
                .samples
                .iter()
                .zip(&f.samples)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "dim {dim}: {err}");
        }
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        // e^{-π|x|²} is its own Fourier transform.
        let f = GridFunction::from_spatial(2, 64, 4.0, |x| {
            Complex64::new((-std::f64::consts::PI * x.dot(x)).exp(), 0.0)
        })
        .unwrap();
        let fh = f.to_frequency();
        for i in [0usize, 1, 65, 130, 64 * 5 + 3] {
            let xi = fh.frequency(i);
            let want = (-std::f64::consts::PI * xi.dot(&xi)).exp();
            assert!((fh.samples[i].re - want).abs() < 1e-10, "{i}");
            assert!(fh.samples[i].im.abs() < 1e-10);
        }
    }

    #[test]
    fn offset_grid_keeps_modulus() {
        let bump = |xi: &Vector| Complex64::new((-xi.dot(xi)).exp(), 0.0);
        let centered = GridFunction::from_frequency(2, 32, 8.0, Vector::zeros(2), bump).unwrap();
        let c = Vector::from_slice(&[5.0, -2.0]);
        let shifted =
            GridFunction::from_frequency(2, 32, 8.0, c, |xi| bump(&(*xi - c))).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            assert!((centered.lp_norm(p) - shifted.lp_norm(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridFunction::zeros(4, 8, 1.0).is_err());
        assert!(GridFunction::zeros(2, 12, 1.0).is_err());
        assert!(GridFunction::zeros(2, 512, 1.0).is_err());
        assert!(GridFunction::zeros(2, 8, 0.0).is_err());
    }
}
