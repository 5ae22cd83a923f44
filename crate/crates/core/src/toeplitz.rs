//! Fourier coefficients of symbols and dense multilevel block Toeplitz
//! assembly `T_n(f) = (f_hat_{i-j})_{i,j=1..n}`.

use std::f64::consts::PI;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;
use crate::multiindex::{cell_offset, MultiIndex};
use crate::symbol::MatrixSymbol;

/// Coefficients whose magnitude falls below this are stored as exact zeros.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Coefficients this close to a multiple of `1/SNAP_DENOMINATOR` are
/// snapped onto it, so integer and simple rational stencils come out exact.
const SNAP_DENOMINATOR: f64 = 720720.0;

fn snap(v: f64) -> f64 {
    if v.abs() < DROP_TOLERANCE {
        return 0.0;
    }
    let k = (v * SNAP_DENOMINATOR).round();
    let q = k / SNAP_DENOMINATOR;
    if (q - v).abs() < DROP_TOLERANCE {
        q
    } else {
        v
    }
}

/// Quadrature nodes per dimension used when none are requested.
pub const DEFAULT_QUADRATURE_POINTS: usize = 16;

/// Fourier coefficients `f_hat_k` for `|k| <= kmax` componentwise.
#[derive(Clone, Debug)]
pub struct FourierTable {
    p: usize,
    kmax: MultiIndex,
    /// Lexicographic over the box `[-kmax, kmax]`.
    coefficients: Vec<Mat<c64>>,
    nonzero: Vec<bool>,
}

impl FourierTable {
    /// Builds a table from explicit coefficients; missing offsets are zero.
    pub fn from_coefficients(
        p: usize,
        kmax: MultiIndex,
        entries: impl IntoIterator<Item = (MultiIndex, Mat<c64>)>,
    ) -> Result<Self> {
        let extents = Self::box_extents(&kmax);
        let len = extents.volume();
        let mut table = FourierTable { p, kmax, coefficients: vec![Mat::zeros(p, p); len], nonzero: vec![false; len] };
        for (k, m) in entries {
            let slot = table.slot(&k).ok_or_else(|| Error::IndexOutOfRange {
                index: k.entries().to_vec(),
                bound: table.kmax.entries().to_vec(),
            })?;
            if m.nrows() != p || m.ncols() != p {
                return Err(Error::DimensionMismatch { expected: p, got: m.nrows() });
            }
            table.coefficients[slot] = m;
        }
        table.apply_drop_tolerance();
        Ok(table)
    }

    fn box_extents(kmax: &MultiIndex) -> MultiIndex {
        MultiIndex::new(kmax.entries().iter().map(|k| 2 * k + 1).collect::<Vec<_>>())
    }

    fn slot(&self, k: &MultiIndex) -> Option<usize> {
        if k.dim() != self.kmax.dim() {
            return None;
        }
        let shifted =
            MultiIndex::new(k.entries().iter().zip(self.kmax.entries()).map(|(k, m)| k + m + 1).collect::<Vec<_>>());
        cell_offset(&shifted, &Self::box_extents(&self.kmax)).ok()
    }

    fn apply_drop_tolerance(&mut self) {
        let p = self.p;
        for (m, nz) in self.coefficients.iter_mut().zip(self.nonzero.iter_mut()) {
            *nz = false;
            for i in 0..p {
                for j in 0..p {
                    let v = &mut m[(i, j)];
                    v.re = snap(v.re);
                    v.im = snap(v.im);
                    *nz |= v.re != 0.0 || v.im != 0.0;
                }
            }
        }
    }

    pub fn d(&self) -> usize {
        self.kmax.dim()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kmax(&self) -> &MultiIndex {
        &self.kmax
    }

    /// `f_hat_k`, or `None` outside the stored box (where it is zero).
    pub fn coefficient(&self, k: &MultiIndex) -> Option<&Mat<c64>> {
        self.slot(k).map(|s| &self.coefficients[s])
    }

    /// Offsets with a nonzero coefficient, lexicographic.
    pub fn nonzero_offsets(&self) -> Vec<MultiIndex> {
        let lo = self.kmax.neg();
        MultiIndex::span(&lo, &self.kmax).zip(&self.nonzero).filter(|(_, &nz)| nz).map(|(k, _)| k).collect()
    }

    /// The table of the conjugate-transposed symbol: `k -> f_hat_{-k}^*`.
    pub fn adjoint(&self) -> FourierTable {
        let lo = self.kmax.neg();
        let entries: Vec<_> = MultiIndex::span(&lo, &self.kmax)
            .map(|k| {
                let src = self.coefficient(&k.neg()).expect("box is symmetric");
                (k, Mat::from_fn(self.p, self.p, |i, j| src[(j, i)].conj()))
            })
            .collect();
        FourierTable::from_coefficients(self.p, self.kmax.clone(), entries).expect("same shape")
    }

    /// `max_k ||f_hat_{-k} - f_hat_k^*||_max`; zero for Hermitian symbols.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.coefficients
            .iter()
            .zip(&adj.coefficients)
            .flat_map(|(a, b)| (0..self.p).flat_map(move |i| (0..self.p).map(move |j| (a[(i, j)] - b[(i, j)]).norm())))
            .fold(0.0, f64::max)
    }
}

/// `f_hat_k = (2 pi)^{-d} int f(theta) e^{-i k.theta} dtheta` by the
/// uniform periodic rule with `quad_points_per_dim` nodes per direction,
/// exact for trigonometric polynomials of degree below that count.
pub fn fourier_coefficients(f: &MatrixSymbol, kmax: &MultiIndex, quad_points_per_dim: usize) -> Result<FourierTable> {
    if !f.is_constant_coefficient() {
        return Err(Error::VariableCoefficient(f.name().to_string()));
    }
    if kmax.dim() != f.d() {
        return Err(Error::DimensionMismatch { expected: f.d(), got: kmax.dim() });
    }
    if kmax.entries().iter().any(|&k| k < 0) {
        return Err(Error::InvalidParameter("kmax must be nonnegative".into()));
    }
    let kmax_max = *kmax.entries().iter().max().expect("d >= 1") as usize;
    let q = quad_points_per_dim;
    if q < 4 * (kmax_max + 1) {
        return Err(Error::InvalidParameter(format!(
            "need at least {} quadrature points per dimension, got {q}",
            4 * (kmax_max + 1)
        )));
    }
    let d = f.d();
    let p = f.p();
    let scale = f.physical_factor(&[]);
    let nodes: Vec<f64> = (0..q).map(|j| -PI + 2.0 * PI * j as f64 / q as f64).collect();
    let grid = MultiIndex::splat(d, q as i64);
    let samples: Vec<(Vec<f64>, Mat<c64>)> = MultiIndex::range(&grid)
        .map(|idx| {
            let theta: Vec<f64> = idx.entries().iter().map(|&j| nodes[(j - 1) as usize]).collect();
            let value = f.fourier_part(&theta);
            (theta, value)
        })
        .collect();
    let norm = scale / samples.len() as f64;
    let lo = kmax.neg();
    let entries: Vec<(MultiIndex, Mat<c64>)> = MultiIndex::span(&lo, kmax)
        .map(|k| {
            let mut acc = Mat::<c64>::zeros(p, p);
            for (theta, value) in &samples {
                let phase: f64 = k.entries().iter().zip(theta).map(|(&kr, t)| kr as f64 * t).sum();
                let w = c64::new(phase.cos(), -phase.sin());
                for i in 0..p {
                    for j in 0..p {
                        acc[(i, j)] += value[(i, j)] * w;
                    }
                }
            }
            for i in 0..p {
                for j in 0..p {
                    acc[(i, j)] *= norm;
                }
            }
            (k, acc)
        })
        .collect();
    FourierTable::from_coefficients(p, kmax.clone(), entries)
}

fn real_part(v: c64, k: &MultiIndex) -> Result<f64> {
    if v.im != 0.0 {
        return Err(Error::ComplexEntry { offset: k.entries().to_vec(), value: v.im });
    }
    Ok(v.re)
}

/// Dense `T_n(f)` of size `n_1 ... n_d p`.
pub fn assemble_toeplitz(table: &FourierTable, n: &MultiIndex) -> Result<HermitianMatrix> {
    let total = n.volume() * table.p();
    let all: Vec<usize> = (0..total).collect();
    assemble_restricted(table, n, &all)
}

/// Principal submatrix of `T_n(f)` on the given strictly increasing
/// 0-based rows, assembled without forming the full matrix.
pub fn assemble_restricted(table: &FourierTable, n: &MultiIndex, rows: &[usize]) -> Result<HermitianMatrix> {
    if n.dim() != table.d() {
        return Err(Error::DimensionMismatch { expected: table.d(), got: n.dim() });
    }
    if n.entries().iter().any(|&v| v < 1) {
        return Err(Error::InvalidParameter(format!("levels must be positive, got {n}")));
    }
    let p = table.p();
    let total = n.volume() * p;
    if rows.windows(2).any(|w| w[0] >= w[1]) || rows.last().is_some_and(|&r| r >= total) {
        return Err(Error::InvalidParameter("restriction rows must be increasing and in range".into()));
    }
    const ABSENT: usize = usize::MAX;
    let mut local = vec![ABSENT; total];
    for (a, &r) in rows.iter().enumerate() {
        local[r] = a;
    }
    let d = n.dim();
    let ext = n.entries();
    let offsets: Vec<(MultiIndex, Mat<f64>)> = table
        .nonzero_offsets()
        .into_iter()
        .map(|k| {
            let c = table.coefficient(&k).expect("stored offset");
            let mut re = Mat::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    re[(i, j)] = real_part(c[(i, j)], &k)?;
                }
            }
            Ok((k, re))
        })
        .collect::<Result<_>>()?;

    let mut data = Mat::<f64>::zeros(rows.len(), rows.len());
    let mut cell_i = vec![0i64; d];
    for (a, &row) in rows.iter().enumerate() {
        let (cell, bi) = (row / p, row % p);
        let mut rem = cell;
        for r in (0..d).rev() {
            cell_i[r] = (rem % ext[r] as usize) as i64;
            rem /= ext[r] as usize;
        }
        'offsets: for (k, block) in &offsets {
            // j = i - k, 0-based
            let mut cell_j = 0usize;
            for r in 0..d {
                let jr = cell_i[r] - k.entries()[r];
                if jr < 0 || jr >= ext[r] {
                    continue 'offsets;
                }
                cell_j = cell_j * ext[r] as usize + jr as usize;
            }
            for bj in 0..p {
                let b = local[cell_j * p + bj];
                if b != ABSENT {
                    data[(a, b)] = block[(bi, bj)];
                }
            }
        }
    }
    HermitianMatrix::new(data, format!("T_{n}"))
}

/// `kmax = (1, ..., 1)`, enough for every catalog symbol.
pub fn default_kmax(d: usize) -> MultiIndex {
    MultiIndex::splat(d, 1)
}

/// Convenience: table of a catalog symbol with default truncation.
pub fn default_table(f: &MatrixSymbol) -> Result<FourierTable> {
    fourier_coefficients(f, &default_kmax(f.d()), DEFAULT_QUADRATURE_POINTS)
}
