//! Multi-dimensional FFTs on uniform boxes, one axis at a time.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::{czero, from_usize, Real};

/// Forward/inverse transforms for a `n^dim` row-major array.
///
/// The inverse is normalized, so `inverse(forward(x)) == x` up to rounding.
pub struct FftNd<T: Real> {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Clone for FftNd<T> {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            dim: self.dim,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
        }
    }
}

impl<T: Real> FftNd<T> {
    pub fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            dim,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
        let scale = from_usize::<T>(self.len()).recip();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        assert_eq!(data.len(), self.len(), "FFT buffer length mismatch");
        let n = self.n;
        let mut scratch = vec![czero(); plan.get_inplace_scratch_len()];
        // last axis: contiguous lines
        plan.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let mut line = vec![czero(); n];
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }
}
