//! Symmetric positive definite band matrices and their Cholesky factors.

use nalgebra::DMatrix;

/// Lower half of a symmetric band matrix with `bandwidth` sub-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bandwidth: usize,
    // entry (i, i - k) lives at i * (bandwidth + 1) + k
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        SymBand { n, bandwidth, data: vec![0.0; n * (bandwidth + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.bandwidth && i < self.n).then(|| i * (self.bandwidth + 1) + (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)` (and its mirror). Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Cholesky factor, or `None` when the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<BandCholesky> {
        let (n, w) = (self.n, self.bandwidth);
        let mut l = SymBand::zeros(n, w);
        for i in 0..n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                let mut sum = self.get(i, j);
                for k in lo.max(j.saturating_sub(w))..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if !(sum > 0.0) {
                        return None;
                    }
                    l.add(i, i, sum.sqrt());
                } else {
                    let v = sum / l.get(j, j);
                    l.add(i, j, v);
                }
            }
        }
        Some(BandCholesky { l })
    }
}

/// `A = L·Lᵀ` with `L` lower triangular and banded.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    l: SymBand,
}

impl BandCholesky {
    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, w) = (self.l.n, self.l.bandwidth);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(w)..i {
                s -= self.l.get(i, k) * b[k];
            }
            b[i] = s / self.l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + w + 1).min(n) {
                s -= self.l.get(k, i) * b[k];
            }
            b[i] = s / self.l.get(i, i);
        }
    }

    /// Solves `A X = B` for a matrix right-hand side, column by column.
    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        x
    }
}
