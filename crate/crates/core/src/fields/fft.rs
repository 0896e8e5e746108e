//! Three-dimensional complex FFT by axis passes.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::par;

/// Planned forward and inverse transforms for a fixed `n0 × n1 × n2` shape
/// stored row-major (last index fastest).
pub struct Fft3 {
    shape: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("shape", &self.shape).finish()
    }
}

impl Fft3 {
    pub fn new(shape: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.map(|n| planner.plan_fft(n, FftDirection::Forward));
        let inverse = shape.map(|n| planner.plan_fft(n, FftDirection::Inverse));
        Self { shape, forward, inverse }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform in place, normalized by `1 / (n0 n1 n2)`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        par::for_each_row(data, self.shape[2], |_, row| {
            row.iter_mut().for_each(|z| *z *= scale)
        });
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        assert_eq!(data.len(), self.len());
        let [n0, n1, n2] = self.shape;

        par::for_each_row(data, n2, |_, row| plans[2].process(row));

        let p1 = &plans[1];
        par::for_each_row(data, n1 * n2, |_, slab| {
            let mut line = vec![Complex64::default(); n1];
            for k in 0..n2 {
                for j in 0..n1 {
                    line[j] = slab[j * n2 + k];
                }
                p1.process(&mut line);
                for j in 0..n1 {
                    slab[j * n2 + k] = line[j];
                }
            }
        });

        // axis 0 through a transposed scratch buffer
        let stride = n1 * n2;
        let mut scratch = vec![Complex64::default(); data.len()];
        {
            let src = &*data;
            par::for_each_row(&mut scratch, n0, |col, line| {
                for i in 0..n0 {
                    line[i] = src[i * stride + col];
                }
                plans[0].process(line);
            });
        }
        let src = &scratch;
        par::for_each_row(data, stride, |i, slab| {
            for (col, z) in slab.iter_mut().enumerate() {
                *z = src[col * n0 + i];
            }
        });
    }
}

impl Fft3 {
    /// Linear convolution through this (padded) transform: `input` of shape
    /// `inner` is zero-padded to [`Self::shape`], multiplied by `symbol` in
    /// Fourier space, and the `inner` block of the result is returned.
    ///
    /// Transforms of all-zero lines are skipped and the forward and inverse
    /// passes along the first axis are fused with the multiplication.
    pub fn padded_convolve(&self, input: &[f64], inner: [usize; 3], symbol: &[f64]) -> Vec<f64> {
        let [p0, p1, p2] = self.shape;
        let [n0, n1, n2] = inner;
        assert!(n0 <= p0 && n1 <= p1 && n2 <= p2);
        assert_eq!(input.len(), n0 * n1 * n2);
        assert_eq!(symbol.len(), self.len());

        // last axis on the n0 × n1 nonzero rows
        let mut rows = vec![Complex64::default(); n0 * n1 * p2];
        par::for_each_row(&mut rows, p2, |r, line| {
            for (z, &x) in line.iter_mut().zip(&input[r * n2..(r + 1) * n2]) {
                *z = Complex64::new(x, 0.0);
            }
            self.forward[2].process(line);
        });

        // middle axis on the n0 nonzero slabs, written j-major
        let mut slabs = vec![Complex64::default(); n0 * p1 * p2];
        par::for_each_row(&mut slabs, p1 * p2, |i, slab| {
            let mut line = vec![Complex64::default(); p1];
            for k in 0..p2 {
                line.iter_mut().for_each(|z| *z = Complex64::default());
                for j in 0..n1 {
                    line[j] = rows[(i * n1 + j) * p2 + k];
                }
                self.forward[1].process(&mut line);
                for j in 0..p1 {
                    slab[j * p2 + k] = line[j];
                }
            }
        });
        let mut planes = vec![Complex64::default(); p1 * n0 * p2];
        par::for_each_row(&mut planes, n0 * p2, |j, plane| {
            for i in 0..n0 {
                plane[i * p2..(i + 1) * p2].copy_from_slice(&slabs[(i * p1 + j) * p2..(i * p1 + j + 1) * p2]);
            }
        });

        // first axis: forward, multiply, inverse, keep i < n0
        par::for_each_row(&mut planes, n0 * p2, |j, plane| {
            let mut line = vec![Complex64::default(); p0];
            for k in 0..p2 {
                line.iter_mut().for_each(|z| *z = Complex64::default());
                for i in 0..n0 {
                    line[i] = plane[i * p2 + k];
                }
                self.forward[0].process(&mut line);
                for (i, z) in line.iter_mut().enumerate() {
                    *z *= symbol[(i * p1 + j) * p2 + k];
                }
                self.inverse[0].process(&mut line);
                for i in 0..n0 {
                    plane[i * p2 + k] = line[i];
                }
            }
        });

        // back to i-major, inverse middle axis, keep j < n1
        par::for_each_row(&mut rows, n1 * p2, |i, slab| {
            let mut line = vec![Complex64::default(); p1];
            for k in 0..p2 {
                for j in 0..p1 {
                    line[j] = planes[(j * n0 + i) * p2 + k];
                }
                self.inverse[1].process(&mut line);
                for j in 0..n1 {
                    slab[j * p2 + k] = line[j];
                }
            }
        });

        let scale = 1.0 / self.len() as f64;
        let mut out = vec![0.0; input.len()];
        par::for_each_row(&mut out, n2, |r, dst| {
            let mut line = rows[r * p2..(r + 1) * p2].to_vec();
            self.inverse[2].process(&mut line);
            for (d, z) in dst.iter_mut().zip(&line) {
                *d = z.re * scale;
            }
        });
        out
    }
}

/// Angular frequency of index `j` on an `n`-point periodic lattice with
/// spacing `h`, in the symmetric range `[-π/h, π/h)`.
pub fn frequency(j: usize, n: usize, h: f64) -> f64 {
    let m = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
    2.0 * std::f64::consts::PI * m / (n as f64 * h)
}
