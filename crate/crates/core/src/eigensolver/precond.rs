use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::field::Grid;
use crate::Scalar;

/// One-dimensional DST-I through a complex FFT of the odd extension.
struct Dst<T: Scalar> {
    n: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Dst<T> {
    fn new(planner: &mut FftPlanner<T>, n: usize) -> Self {
        Self { n, fft: planner.plan_fft_forward(2 * (n + 1)) }
    }

    /// `x_k <- sum_j x_j sin(pi j k / (n + 1))`, `j, k = 1..=n`.
    fn apply(&self, x: &mut [T], buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        let n = self.n;
        let m = 2 * (n + 1);
        buf[0] = Complex::new(T::zero(), T::zero());
        buf[n + 1] = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            buf[j + 1] = Complex::new(x[j], T::zero());
            buf[m - 1 - j] = Complex::new(-x[j], T::zero());
        }
        self.fft.process_with_scratch(buf, scratch);
        let half = T::lit(-0.5);
        for k in 0..n {
            x[k] = buf[k + 1].im * half;
        }
    }
}

/// Inverse of the dimensionless 5-point operator `4 u - sum of neighbours` on
/// the lattice rectangle with zero Dirichlet frame, restricted to the mask.
pub struct PoissonPreconditioner<T: Scalar> {
    nx: usize,
    ny: usize,
    row: Dst<T>,
    col: Dst<T>,
    inv_eig: Vec<T>,
    inside: Vec<bool>,
}

impl<T: Scalar> PoissonPreconditioner<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let (n1, n2) = (grid.nx - 2, grid.ny - 2);
        let mut planner = FftPlanner::new();
        let row = Dst::new(&mut planner, n1);
        let col = Dst::new(&mut planner, n2);
        let two = T::lit(2.0);
        let norm = (two / T::from_usize_lossy(n1 + 1)) * (two / T::from_usize_lossy(n2 + 1));
        let mut inv_eig = vec![T::zero(); n1 * n2];
        for l in 0..n2 {
            let ml = two - two * (T::PI() * T::from_usize_lossy(l + 1) / T::from_usize_lossy(n2 + 1)).cos();
            for k in 0..n1 {
                let mk = two - two * (T::PI() * T::from_usize_lossy(k + 1) / T::from_usize_lossy(n1 + 1)).cos();
                inv_eig[l * n1 + k] = norm / (mk + ml);
            }
        }
        let inside = (0..grid.len()).map(|k| grid.inside(k)).collect();
        Self { nx: grid.nx, ny: grid.ny, row, col, inv_eig, inside }
    }

    /// `out = R K^-1 R^T r` on full-lattice vectors.
    pub fn apply(&self, r: &[T], out: &mut [T]) {
        let (n1, n2) = (self.nx - 2, self.ny - 2);
        let mut w = vec![T::zero(); n1 * n2];
        for l in 0..n2 {
            for k in 0..n1 {
                let g = (l + 1) * self.nx + k + 1;
                if self.inside[g] {
                    w[l * n1 + k] = r[g];
                }
            }
        }
        self.transform(&mut w);
        for (v, s) in w.iter_mut().zip(&self.inv_eig) {
            *v *= *s;
        }
        self.transform(&mut w);
        for v in out.iter_mut() {
            *v = T::zero();
        }
        for l in 0..n2 {
            for k in 0..n1 {
                let g = (l + 1) * self.nx + k + 1;
                if self.inside[g] {
                    out[g] = w[l * n1 + k];
                }
            }
        }
    }

    fn transform(&self, w: &mut [T]) {
        let (n1, n2) = (self.nx - 2, self.ny - 2);
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; 2 * (n1.max(n2) + 1)];
        let mut scratch = vec![zero; self.row.fft.get_inplace_scratch_len().max(self.col.fft.get_inplace_scratch_len())];
        let (bl, sl) = (2 * (n1 + 1), self.row.fft.get_inplace_scratch_len());
        for l in 0..n2 {
            self.row.apply(&mut w[l * n1..(l + 1) * n1], &mut buf[..bl], &mut scratch[..sl]);
        }
        let (bl, sl) = (2 * (n2 + 1), self.col.fft.get_inplace_scratch_len());
        let mut column = vec![T::zero(); n2];
        for k in 0..n1 {
            for l in 0..n2 {
                column[l] = w[l * n1 + k];
            }
            self.col.apply(&mut column, &mut buf[..bl], &mut scratch[..sl]);
            for l in 0..n2 {
                w[l * n1 + k] = column[l];
            }
        }
    }
}
