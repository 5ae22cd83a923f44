use std::io::{BufRead, Write};

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Dense real symmetric matrix tagged with the construction that produced it.
///
/// Every matrix family built here has real Fourier coefficients, so the
/// Hermitian matrices of the model are stored as real symmetric ones.
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    data: Mat<f64>,
    label: String,
}

impl HermitianMatrix {
    pub fn new(data: Mat<f64>, label: impl Into<String>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), got: data.ncols() });
        }
        Ok(HermitianMatrix { data, label: label.into() })
    }

    pub fn zeros(n: usize, label: impl Into<String>) -> Self {
        HermitianMatrix { data: Mat::zeros(n, n), label: label.into() }
    }

    pub fn from_fn(n: usize, label: impl Into<String>, f: impl FnMut(usize, usize) -> f64) -> Self {
        HermitianMatrix { data: Mat::from_fn(n, n, f), label: label.into() }
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.data.as_ref()
    }

    pub fn mat(&self) -> &Mat<f64> {
        &self.data
    }

    pub fn into_mat(self) -> Mat<f64> {
        self.data
    }

    /// `max |a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in j + 1..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        let n = self.size();
        (0..n).all(|j| (0..n).all(|i| self.data[(i, j)].is_finite()))
    }

    pub fn scaled(&self, c: f64, label: impl Into<String>) -> Self {
        HermitianMatrix {
            data: Mat::from_fn(self.size(), self.size(), |i, j| c * self.data[(i, j)]),
            label: label.into(),
        }
    }

    /// Principal submatrix on the given (0-based) indices.
    pub fn principal_submatrix(&self, keep: &[usize], label: impl Into<String>) -> Self {
        HermitianMatrix {
            data: Mat::from_fn(keep.len(), keep.len(), |i, j| self.data[(keep[i], keep[j])]),
            label: label.into(),
        }
    }

    /// Places `self` at rows/columns `positions` of an `n x n` zero matrix.
    pub fn embed(&self, positions: &[usize], n: usize, label: impl Into<String>) -> Result<Self> {
        if positions.len() != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), got: positions.len() });
        }
        if let Some(&bad) = positions.iter().find(|&&p| p >= n) {
            return Err(Error::IndexOutOfRange { index: vec![bad as i64], bound: vec![n as i64] });
        }
        let mut data = Mat::zeros(n, n);
        for (a, &pa) in positions.iter().enumerate() {
            for (b, &pb) in positions.iter().enumerate() {
                data[(pa, pb)] = self.data[(a, b)];
            }
        }
        Ok(HermitianMatrix { data, label: label.into() })
    }

    /// Plain dense text: a header `N N`, then `N` rows of `N` numbers.
    pub fn write_dense_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.size();
        writeln!(w, "{n} {n}")?;
        let mut line = String::new();
        for i in 0..n {
            line.clear();
            for j in 0..n {
                if j > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{}", self.data[(i, j)]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_dense_text<R: BufRead>(r: R, label: impl Into<String>) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("dense text: {msg}"));
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))?.map_err(|e| Error::io("<dense text>", e))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad("header is not `N N`")))
            .collect::<Result<_>>()?;
        if dims.len() != 2 || dims[0] != dims[1] {
            return Err(bad("header is not `N N`"));
        }
        let n = dims[0];
        let mut data = Mat::zeros(n, n);
        for i in 0..n {
            let line = lines.next().ok_or_else(|| bad("too few rows"))?.map_err(|e| Error::io("<dense text>", e))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad("unparsable entry")))
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(bad("row length differs from N"));
            }
            for (j, v) in row.into_iter().enumerate() {
                data[(i, j)] = v;
            }
        }
        HermitianMatrix::new(data, label)
    }
}

/// Ascending eigenvalues of a small Hermitian matrix (symbol values).
pub fn small_hermitian_eigenvalues(m: MatRef<'_, c64>) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            // closed form; avoids the general solver in hot quadrature loops
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(1, 0)];
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b.re * b.re + b.im * b.im).sqrt();
            vec![mean - rad, mean + rad]
        }
        _ => {
            let mut ev =
                m.self_adjoint_eigenvalues(Side::Lower).expect("eigensolver failed on a small Hermitian matrix");
            ev.sort_by(f64::total_cmp);
            ev
        }
    }
}
