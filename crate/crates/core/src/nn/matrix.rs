use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NnError;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Inputs at most this dense take the sparse path in [`Matrix::matvec`] and
/// [`Matrix::add_outer`]. Rating vectors are mostly zeros.
const SPARSE_DENSITY: f64 = 0.25;

fn nonzero_indices(x: &[f64]) -> Option<Vec<usize>> {
    let nnz = x.iter().filter(|&&v| v != 0.0).count();
    if (nnz as f64) <= SPARSE_DENSITY * x.len() as f64 {
        Some((0..x.len()).filter(|&j| x[j] != 0.0).collect())
    } else {
        None
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NnError> {
        if data.len() != rows * cols {
            return Err(NnError::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Glorot/Xavier uniform: entries in `±sqrt(6 / (fan_in + fan_out))`
    /// with `fan_in = cols`, `fan_out = rows`.
    pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// `self · x`. Zero entries of `x` are skipped; summation order over the
    /// remaining columns is ascending either way.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        match nonzero_indices(x) {
            Some(nz) => (0..self.rows)
                .map(|r| {
                    let row = self.row(r);
                    nz.iter().fold(0.0, |acc, &j| acc + row[j] * x[j])
                })
                .collect(),
            None => (0..self.rows)
                .map(|r| self.row(r).iter().zip(x).fold(0.0, |acc, (w, v)| acc + w * v))
                .collect(),
        }
    }

    /// `selfᵀ · y`.
    pub fn matvec_transposed(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &coef) in y.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.row(r)) {
                *o += coef * w;
            }
        }
        out
    }

    /// `self += left ⊗ right`.
    pub fn add_outer(&mut self, left: &[f64], right: &[f64]) {
        debug_assert_eq!(left.len(), self.rows);
        debug_assert_eq!(right.len(), self.cols);
        let cols = self.cols;
        let nz = nonzero_indices(right);
        for (r, &coef) in left.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            let row = &mut self.data[r * cols..(r + 1) * cols];
            match &nz {
                Some(nz) => {
                    for &j in nz {
                        row[j] += coef * right[j];
                    }
                }
                None => {
                    for (g, &v) in row.iter_mut().zip(right) {
                        *g += coef * v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_and_dense_paths_agree() {
        let mut rng = crate::seed::rng(4);
        let m = Matrix::glorot(7, 40, &mut rng);
        let mut x = vec![0.0; 40];
        x[3] = 0.4;
        x[17] = -1.5;
        x[39] = 2.0;
        let sparse = m.matvec(&x);
        let dense: Vec<f64> = (0..7)
            .map(|r| (0..40).map(|c| m.get(r, c) * x[c]).sum::<f64>())
            .collect();
        for (a, b) in sparse.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn transpose_and_outer() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m.matvec(&[1.0, 1.0, 1.0]), vec![6.0, 15.0]);
        assert_eq!(m.matvec_transposed(&[1.0, -1.0]), vec![-3.0, -3.0, -3.0]);
        let mut g = Matrix::zeros(2, 3);
        g.add_outer(&[1.0, 2.0], &[3.0, 0.0, 1.0]);
        assert_eq!(g.data(), &[3.0, 0.0, 1.0, 6.0, 0.0, 2.0]);
        assert!(Matrix::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn glorot_bounds() {
        let mut rng = crate::seed::rng(10);
        let m = Matrix::glorot(100, 100, &mut rng);
        let limit = (6.0f64 / 200.0).sqrt();
        assert!(m.data().iter().all(|v| v.abs() <= limit));
        // A uniform sample of 10k values reaches close to both ends.
        let max = m.data().iter().cloned().fold(f64::MIN, f64::max);
        let min = m.data().iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > 0.99 * limit && min < -0.99 * limit);

        let unit = Matrix::glorot(1, 1, &mut rng);
        assert!(unit.get(0, 0).abs() <= 3f64.sqrt());
        assert_eq!(
            Matrix::glorot(5, 3, &mut crate::seed::rng(2)),
            Matrix::glorot(5, 3, &mut crate::seed::rng(2))
        );
    }
}
