//! Sparse LU factorization with a reciprocal-condition estimate.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

/// Coordinate-format sparse matrix under assembly. Duplicate entries are
/// summed when the matrix is built.
#[derive(Debug, Clone, Default)]
pub struct TripletMatrix {
    pub size: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    /// Dense copy with duplicates summed. Intended for tests and small systems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.size]; self.size];
        for &(r, c, v) in &self.entries {
            dense[r][c] += v;
        }
        dense
    }

    fn to_sparse(&self) -> Result<SparseColMat<usize, f64>, String> {
        let triplets: Vec<Triplet<usize, usize, f64>> = self
            .entries
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.size, self.size, &triplets)
            .map_err(|e| format!("{e:?}"))
    }

    /// Matrix 1-norm (max absolute column sum).
    fn one_norm(&self) -> f64 {
        let mut cols = vec![0.0; self.size];
        // sum duplicates before taking absolute values
        let mut sorted = self.entries.clone();
        sorted.sort_by_key(|&(r, c, _)| (c, r));
        let mut k = 0;
        while k < sorted.len() {
            let (r, c, mut v) = sorted[k];
            k += 1;
            while k < sorted.len() && sorted[k].0 == r && sorted[k].1 == c {
                v += sorted[k].2;
                k += 1;
            }
            cols[c] += v.abs();
        }
        cols.into_iter().fold(0.0, f64::max)
    }
}

/// A factorized square matrix.
pub struct Factorization {
    lu: Lu<usize, f64>,
    size: usize,
    one_norm: f64,
}

impl Factorization {
    /// LU with partial pivoting. Returns a description of the failure when
    /// the matrix is structurally singular.
    pub fn new(matrix: &TripletMatrix) -> Result<Self, String> {
        let sparse = matrix.to_sparse()?;
        let lu = sparse.sp_lu().map_err(|e| format!("{e:?}"))?;
        Ok(Self {
            lu,
            size: matrix.size,
            one_norm: matrix.one_norm(),
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = Mat::<f64>::from_fn(self.size, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        (0..self.size).map(|i| b[(i, 0)]).collect()
    }

    fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = Mat::<f64>::from_fn(self.size, 1, |i, _| rhs[i]);
        self.lu.solve_transpose_in_place(b.as_mut());
        (0..self.size).map(|i| b[(i, 0)]).collect()
    }

    /// Hager–Higham estimate of `1 / (|A|_1 |A^-1|_1)`. Zero when the
    /// inverse produces non-finite values.
    pub fn rcond_estimate(&self) -> f64 {
        let n = self.size;
        if n == 0 || self.one_norm == 0.0 {
            return 0.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        let mut last_index = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            if y.iter().any(|v| !v.is_finite()) {
                return 0.0;
            }
            let norm: f64 = y.iter().map(|v| v.abs()).sum();
            if norm <= estimate {
                break;
            }
            estimate = norm;
            let signs: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&signs);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if !zmax.is_finite() || zmax <= zx || j == last_index {
                break;
            }
            last_index = j;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[j] = 1.0;
        }
        1.0 / (self.one_norm * estimate)
    }
}
