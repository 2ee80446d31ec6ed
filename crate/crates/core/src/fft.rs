//! Row-major 2-D FFT on top of rustfft.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

/// Smallest length `>= n` whose only prime factors are 2, 3 and 5.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Planned forward/inverse transforms for one `width`x`height` grid.
///
/// Buffers stay in natural row-major order on both sides; the inverse is
/// normalized by `1 / (width * height)`.
pub struct Fft2d {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2d {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.width * self.height) as f64;
        par::for_each_chunk_mut(data, self.width, |_, row| {
            for v in row {
                *v *= scale;
            }
        });
    }

    /// Forward transform of a buffer whose rows outside `nonzero_rows` are
    /// zero; those row passes are skipped.
    pub fn forward_sparse_rows(&self, data: &mut [Complex64], nonzero_rows: &[usize]) {
        let mut scratch = vec![Complex64::default(); self.row_fwd.get_inplace_scratch_len()];
        for &y in nonzero_rows {
            self.row_fwd
                .process_with_scratch(&mut data[y * self.width..(y + 1) * self.width], &mut scratch);
        }
        self.columns(data, &self.col_fwd);
    }

    fn transform(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.width * self.height, "buffer size");
        process_rows(data, self.width, rows);
        self.columns(data, cols);
    }

    fn columns(&self, data: &mut [Complex64], cols: &Arc<dyn Fft<f64>>) {
        let (w, h) = (self.width, self.height);
        let mut transposed = transpose(data, w, h);
        process_rows(&mut transposed, h, cols);
        let back = transpose(&transposed, h, w);
        data.copy_from_slice(&back);
    }
}

/// Runs `plan` over every `len`-long row of `data`.
pub(crate) fn process_rows(data: &mut [Complex64], len: usize, plan: &Arc<dyn Fft<f64>>) {
    let scratch_len = plan.get_inplace_scratch_len();
    // Batch rows so each task amortizes its scratch allocation.
    let batch = len * 16;
    par::for_each_chunk_mut(data, batch, |_, chunk| {
        let mut scratch = vec![Complex64::default(); scratch_len];
        plan.process_with_scratch(chunk, &mut scratch);
    });
}

fn transpose(data: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    par::for_each_chunk_mut(&mut out, height, |x, col| {
        for (y, v) in col.iter_mut().enumerate() {
            *v = data[y * width + x];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); w * h];
        for ky in 0..h {
            for kx in 0..w {
                let mut acc = Complex64::default();
                for y in 0..h {
                    for x in 0..w {
                        let ang = -2.0
                            * std::f64::consts::PI
                            * ((kx * x) as f64 / w as f64 + (ky * y) as f64 / h as f64);
                        acc += data[y * w + x] * Complex64::from_polar(1.0, ang);
                    }
                }
                out[ky * w + kx] = acc;
            }
        }
        out
    }

    #[test]
    fn fast_len_is_smooth() {
        assert_eq!(fast_len(1), 1);
        assert_eq!(fast_len(7), 8);
        assert_eq!(fast_len(31), 32);
        assert_eq!(fast_len(546), 576);
        assert_eq!(fast_len(101), 108);
    }

    #[test]
    fn matches_naive_dft_and_inverts() {
        let (w, h) = (6, 5);
        let data: Vec<Complex64> = (0..w * h)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut buf = data.clone();
        let fft = Fft2d::new(w, h);
        fft.forward(&mut buf);
        let want = naive_dft(&data, w, h);
        for (a, b) in buf.iter().zip(&want) {
            assert!((a - b).norm() < 1e-9);
        }
        fft.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sparse_rows_agree_with_dense() {
        let (w, h) = (8, 9);
        let mut data = vec![Complex64::default(); w * h];
        for x in 0..w {
            data[2 * w + x] = Complex64::new(x as f64, 1.0);
            data[7 * w + x] = Complex64::new(-1.0, x as f64);
        }
        let fft = Fft2d::new(w, h);
        let mut dense = data.clone();
        fft.forward(&mut dense);
        fft.forward_sparse_rows(&mut data, &[2, 7]);
        assert_eq!(dense, data);
    }
}
