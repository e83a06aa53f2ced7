//! Contiguous double-precision vectors and row-major matrices with the small
//! set of products needed by the forward and backward passes. Reductions run
//! in index order so results are bit-reproducible.

use super::MathError;

/// Contiguous vector of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Vec64(Vec<f64>);

impl Vec64 {
    pub fn zeros(n: usize) -> Self {
        Vec64(vec![0.0; n])
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Vec64(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Deref for Vec64 {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::DerefMut for Vec64 {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Vec64 {
    fn from(v: Vec<f64>) -> Self {
        Vec64(v)
    }
}

impl FromIterator<f64> for Vec64 {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Vec64(iter.into_iter().collect())
    }
}

/// Row-major matrix of `f64` values with fixed dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat64 {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Mat64 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat64 {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    /// Builds a matrix from row-major data. Panics if the length does not
    /// factor as rows*cols.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Mat64 { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Single-row view of a vector, sharing the elementwise kernels between
    /// per-sample and batched code paths.
    pub fn from_row(x: &[f64]) -> Self {
        Mat64::from_rows(1, x.len(), x.to_vec())
    }

    /// self (p x q) times other^T (q x r) where `other` is stored (r x q).
    /// Each output entry is one in-order dot product of two contiguous rows.
    pub fn matmul_nt(&self, other: &Mat64) -> Mat64 {
        assert_eq!(self.cols, other.cols, "matmul_nt inner dimension");
        let mut out = Mat64::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            let dst = out.row_mut(i);
            for (j, d) in dst.iter_mut().enumerate() {
                *d = dot(a, other.row(j));
            }
        }
        out
    }

    /// self (p x q) times other (q x r).
    pub fn matmul_nn(&self, other: &Mat64) -> Mat64 {
        assert_eq!(self.cols, other.rows, "matmul_nn inner dimension");
        let mut out = Mat64::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let dst = out.row_mut(i);
            for (k, &aik) in a.iter().enumerate() {
                axpy(aik, other.row(k), dst);
            }
        }
        out
    }

    /// self^T (p x q, stored q x p) times other (q x r); used for weight
    /// gradients dW = dP^T X.
    pub fn matmul_tn(&self, other: &Mat64) -> Mat64 {
        assert_eq!(self.rows, other.rows, "matmul_tn inner dimension");
        let mut out = Mat64::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a = self.row(k);
            let b = other.row(k);
            for (i, &aki) in a.iter().enumerate() {
                axpy(aki, b, out.row_mut(i));
            }
        }
        out
    }

    /// Adds `bias` to every row.
    pub fn add_row_bias(&mut self, bias: &[f64]) {
        assert_eq!(self.cols, bias.len(), "bias length");
        for i in 0..self.rows {
            for (d, b) in self.row_mut(i).iter_mut().zip(bias) {
                *d += b;
            }
        }
    }

    /// Column sums; used for bias gradients.
    pub fn col_sums(&self) -> Vec64 {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (d, v) in out.iter_mut().zip(self.row(i)) {
                *d += v;
            }
        }
        Vec64(out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat64 {
        Mat64 {
            data: self.data.iter().map(|&v| f(v)).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Mat64) -> Mat64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Mat64 {
            data,
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn add(&self, other: &Mat64) -> Mat64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Mat64 {
            data,
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn add_assign(&mut self, other: &Mat64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (d, s) in self.data.iter_mut().zip(&other.data) {
            *d += s;
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat64 {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat64 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// y = W x + b in double precision.
pub fn affine(w: &Mat64, x: &Vec64, b: &Vec64) -> Result<Vec64, MathError> {
    if w.cols() != x.len() {
        return Err(MathError::DimMismatch {
            context: "affine input",
            expected: w.cols(),
            got: x.len(),
        });
    }
    if w.rows() != b.len() {
        return Err(MathError::DimMismatch {
            context: "affine bias",
            expected: w.rows(),
            got: b.len(),
        });
    }
    let out: Vec<f64> = (0..w.rows()).map(|i| dot(w.row(i), x) + b[i]).collect();
    Ok(Vec64::from_vec(out))
}
