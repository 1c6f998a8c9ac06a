//! Sparse symmetric positive definite solves for the descent preconditioner.

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{MpsError, Result};

/// An assembled SPD matrix in compressed-column form.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    csc: CscMatrix<f64>,
}

impl SpdMatrix {
    /// Builds the matrix from `(row, col, value)` triplets; duplicates are
    /// summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut coo = CooMatrix::new(n, n);
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(MpsError::Shape { expected: n, got: i.max(j) + 1 });
            }
            coo.push(i, j, v);
        }
        Ok(SpdMatrix { csc: CscMatrix::from(&coo) })
    }

    pub fn dim(&self) -> usize {
        self.csc.nrows()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (j, col) in self.csc.col_iter().enumerate() {
            for (&i, &v) in col.row_indices().iter().zip(col.values()) {
                y[i] += v * x[j];
            }
        }
        y
    }

    pub fn factor(&self) -> Result<SpdFactor> {
        let chol = CscCholesky::factor(&self.csc)
            .map_err(|e| MpsError::Numeric(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(SpdFactor { chol })
    }
}

/// Cholesky factor of an [`SpdMatrix`].
pub struct SpdFactor {
    chol: CscCholesky<f64>,
}

impl SpdFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = DMatrix::from_column_slice(rhs.len(), 1, rhs);
        self.chol.solve(&b).as_slice().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve() {
        // 1D Laplacian with h = 1: tridiag(-1, 2, -1)
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SpdMatrix::from_triplets(n, &t).unwrap();
        let x_true = [1.0, -2.0, 0.5, 3.0, 0.0];
        let b = a.mul_vec(&x_true);
        let x = a.factor().unwrap().solve(&b);
        for (u, v) in x.iter().zip(x_true) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_fails_to_factor() {
        let a = SpdMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert!(a.factor().is_err());
        assert!(SpdMatrix::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }
}
