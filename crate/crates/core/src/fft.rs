//! Unnormalized n-dimensional FFT on cubic grids (n = 2, 3).
//!
//! Layout is row-major with x fastest: `idx = ix + N*(iy + N*iz)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct FftNd {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("n", &self.n).field("dim", &self.dim).finish()
    }
}

impl FftNd {
    pub fn new(n: usize, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            dim,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `X_k = sum_j x_j exp(-2 pi i j k / N)` along every axis.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward);
    }

    /// `x_j = sum_k X_k exp(+2 pi i j k / N)` along every axis, no scaling.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse);
    }

    fn apply(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len());
        let n = self.n;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // x axis: contiguous rows
        plan.process_with_scratch(data, &mut scratch);

        let mut line = vec![Complex64::default(); n];
        let planes = if self.dim == 3 { n } else { 1 };
        // y axis
        for z in 0..planes {
            let base = z * n * n;
            for x in 0..n {
                for (y, v) in line.iter_mut().enumerate() {
                    *v = data[base + x + n * y];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (y, v) in line.iter().enumerate() {
                    data[base + x + n * y] = *v;
                }
            }
        }
        if self.dim == 3 {
            // z axis
            for xy in 0..n * n {
                for (z, v) in line.iter_mut().enumerate() {
                    *v = data[xy + n * n * z];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (z, v) in line.iter().enumerate() {
                    data[xy + n * n * z] = *v;
                }
            }
        }
    }

    /// Signed wavenumber stored at FFT index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index for a signed wavenumber (wrapped modulo N).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of an integer wavevector (third component ignored in 2D).
    pub fn flat_index(&self, k: &[i64; 3]) -> usize {
        let n = self.n;
        let mut idx = self.index_of(k[0]) + n * self.index_of(k[1]);
        if self.dim == 3 {
            idx += n * n * self.index_of(k[2]);
        }
        idx
    }

    /// Inverse of `flat_index`, using signed wavenumbers.
    pub fn wavevector_at(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        let ix = idx % n;
        let iy = (idx / n) % n;
        let iz = if self.dim == 3 { idx / (n * n) } else { 0 };
        [
            self.wavenumber(ix),
            self.wavenumber(iy),
            if self.dim == 3 { self.wavenumber(iz) } else { 0 },
        ]
    }
}
