//! Approximating classes of sequences measured on finite sections: the
//! rank/norm splitting functional, its g.a.c.s. variants, and decay fits.

use std::io::Write;

use faer::{Mat, MatRef, Side};
use serde::Serialize;

use crate::error::{Error, Result};

/// Optimal split of `E = A - B` into rank `rank` plus norm `norm`.
#[derive(Clone, Debug, PartialEq)]
pub struct AcsGap {
    /// `min_i (i/N + sigma_{i+1}(E))`.
    pub gap: f64,
    pub rank: usize,
    pub norm: f64,
    pub size: usize,
    /// Singular values of `E`, nonincreasing.
    pub singular_values: Vec<f64>,
}

impl AcsGap {
    /// Value of the functional for a prescribed rank.
    pub fn at_rank(&self, r: usize) -> f64 {
        r as f64 / self.size as f64 + self.singular_values.get(r).copied().unwrap_or(0.0)
    }
}

/// `(gap, rank, norm)` from nonincreasing values over `n` indices; ties go
/// to the smaller rank.
pub fn gap_from_descending(values: &[f64], n: usize) -> (f64, usize, f64) {
    let mut best = (f64::INFINITY, 0, 0.0);
    for i in 0..=n {
        let s = values.get(i).copied().unwrap_or(0.0);
        let v = i as f64 / n as f64 + s;
        if v < best.0 {
            best = (v, i, s);
        }
    }
    best
}

fn descending_singular_values(e: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let n = e.nrows();
    let symmetric = (0..n).all(|j| (j + 1..n).all(|i| e[(i, j)] == e[(j, i)]));
    let mut sv: Vec<f64> = if e.nrows() == e.ncols() && symmetric {
        e.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|err| Error::Decomposition(format!("{err:?}")))?
            .into_iter()
            .map(f64::abs)
            .collect()
    } else {
        e.singular_values().map_err(|err| Error::Decomposition(format!("{err:?}")))?
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

fn check_finite(m: MatRef<'_, f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite);
            }
        }
    }
    Ok(())
}

pub fn acs_gap(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<AcsGap> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: b.ncols() });
    }
    check_finite(a)?;
    check_finite(b)?;
    let size = a.nrows().min(a.ncols());
    if size == 0 {
        return Ok(AcsGap { gap: 0.0, rank: 0, norm: 0.0, size: 0, singular_values: Vec::new() });
    }
    let e = a - b;
    let singular_values = descending_singular_values(e.as_ref())?;
    let (gap, rank, norm) = gap_from_descending(&singular_values, size);
    Ok(AcsGap { gap, rank, norm, size, singular_values })
}

/// The witness `E = R + N` with `R` the best rank-`rank` approximation.
pub fn witness_split(a: MatRef<'_, f64>, b: MatRef<'_, f64>, rank: usize) -> Result<(Mat<f64>, Mat<f64>)> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    let e = a - b;
    let svd = e.svd().map_err(|err| Error::Decomposition(format!("{err:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let r = rank.min(s.dim());
    let mut big_r = Mat::<f64>::zeros(e.nrows(), e.ncols());
    for k in 0..r {
        let sk = s[k];
        for j in 0..e.ncols() {
            let vj = v[(j, k)] * sk;
            for i in 0..e.nrows() {
                big_r[(i, j)] += u[(i, k)] * vj;
            }
        }
    }
    let big_n = &e - &big_r;
    Ok((big_r, big_n))
}

/// Generalized gap between `A` and a smaller `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct GacsGap {
    pub gap: f64,
    pub rank: usize,
    pub norm: f64,
    /// `d ∧ d'` of `A`.
    pub size: usize,
    /// `(d ∧ d' - d_t ∧ d_t') / (d ∧ d')`.
    pub m_fraction: f64,
}

fn m_fraction(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<(usize, f64)> {
    if b.nrows() > a.nrows() || b.ncols() > a.ncols() {
        return Err(Error::InvalidParameter(format!(
            "B ({}x{}) is larger than A ({}x{})",
            b.nrows(),
            b.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let size = a.nrows().min(a.ncols());
    let small = b.nrows().min(b.ncols());
    let frac = if size == 0 { 0.0 } else { (size - small) as f64 / size as f64 };
    Ok((size, frac))
}

/// Pads `B` into `A`'s shape at rows `rows` and columns `cols` (the
/// permutations `U`, `V`), then measures the plain gap.
pub fn gacs_gap_embedding(a: MatRef<'_, f64>, b: MatRef<'_, f64>, rows: &[usize], cols: &[usize]) -> Result<GacsGap> {
    let (size, frac) = m_fraction(a, b)?;
    if rows.len() != b.nrows() || cols.len() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: b.nrows(), got: rows.len() });
    }
    if rows.iter().any(|&r| r >= a.nrows()) || cols.iter().any(|&c| c >= a.ncols()) {
        return Err(Error::InvalidParameter("embedding index outside A".into()));
    }
    let mut padded = Mat::<f64>::zeros(a.nrows(), a.ncols());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            padded[(r, c)] = b[(i, j)];
        }
    }
    let g = acs_gap(a, padded.as_ref())?;
    Ok(GacsGap { gap: g.gap, rank: g.rank, norm: g.norm, size, m_fraction: frac })
}

/// Alignment by sorted singular values: with `delta_j = |sigma_j(A) -
/// sigma_j(B ⊕ 0)|`, the gap `min_i (i/N + delta_(i+1))` over the
/// discrepancies in decreasing order. An upper bound for the best unitary
/// alignment, not the optimum.
pub fn gacs_gap_singular(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<GacsGap> {
    let (size, frac) = m_fraction(a, b)?;
    check_finite(a)?;
    check_finite(b)?;
    if size == 0 {
        return Ok(GacsGap { gap: 0.0, rank: 0, norm: 0.0, size, m_fraction: frac });
    }
    let sa = descending_singular_values(a)?;
    let mut sb = if b.nrows().min(b.ncols()) == 0 { Vec::new() } else { descending_singular_values(b)? };
    sb.resize(size, 0.0);
    let mut delta: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).collect();
    delta.sort_by(|x, y| y.total_cmp(x));
    let (gap, rank, norm) = gap_from_descending(&delta, size);
    Ok(GacsGap { gap, rank, norm, size, m_fraction: frac })
}

/// Largest violation of the rank-shifted interlacing
/// `sigma_{j+s}(B) - omega <= sigma_j(A) <= sigma_{j-s}(B) + omega`
/// (nonincreasing order; out-of-range indices impose nothing). Zero when
/// `A = B + R + N` with `rank R <= s` and `||N|| <= omega`.
pub fn interlacing_defect(a_desc: &[f64], b_desc: &[f64], shift: usize, omega: f64) -> f64 {
    let n = a_desc.len();
    let b = |k: usize| b_desc.get(k).copied().unwrap_or(0.0);
    let mut worst = 0.0f64;
    for (j, &sa) in a_desc.iter().enumerate() {
        if j + shift < n {
            worst = worst.max(b(j + shift) - omega - sa);
        }
        if j >= shift {
            worst = worst.max(sa - b(j - shift) - omega);
        }
    }
    worst
}

/// Log-log least-squares fit of a decaying quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Strictly decreasing over the points used.
    pub monotone: bool,
    /// Indices skipped for nonpositive values.
    pub skipped: Vec<usize>,
}

pub fn decay_fit(ts: &[f64], values: &[f64]) -> Result<DecayFit> {
    if ts.len() < 3 || ts.len() != values.len() {
        return Err(Error::InvalidParameter("decay fit needs at least three (t, value) pairs".into()));
    }
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("t values must be positive".into()));
    }
    let mut skipped = Vec::new();
    let mut pts = Vec::new();
    for (k, (&t, &v)) in ts.iter().zip(values).enumerate() {
        if v > 0.0 && v.is_finite() {
            pts.push((t.ln(), v.ln()));
        } else {
            skipped.push(k);
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("fewer than two positive values to fit".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let monotone = pts.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(DecayFit { slope, intercept, r_squared, monotone, skipped })
}

/// One row of the gap CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcsRow {
    pub n: usize,
    pub t: f64,
    #[serde(rename = "N")]
    pub size: usize,
    pub gap: f64,
    pub rank_witness: usize,
    pub norm_witness: f64,
    pub m_fraction: f64,
}

/// Columns `n, t, N, gap, rank_witness, norm_witness, m_fraction`.
pub fn write_acs_csv<W: Write>(rows: &[AcsRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record(["n", "t", "N", "gap", "rank_witness", "norm_witness", "m_fraction"])?;
    }
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush().map_err(|e| Error::io("<acs csv>", e))?;
    Ok(())
}
