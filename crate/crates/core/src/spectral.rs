//! Spectra, symbol samplings and their monotone rearrangement, the
//! distribution functionals `alpha_t(F)` and per-eigenvalue error metrics.

use std::io::Write;

use faer::{MatRef, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{physical_midpoints, Exhaustion, OMEGA_MEASURE};
use crate::matrix::HermitianMatrix;
use crate::multiindex::MultiIndex;
use crate::symbol::{fourier_nodes, MatrixSymbol};

/// Ascending eigenvalues.
pub fn eigs(a: &HermitianMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if a.size() == 0 {
        return Ok(Vec::new());
    }
    let mut ev =
        a.as_ref().self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Ascending singular values of any square or rectangular matrix.
pub fn svals(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let n = a.nrows().min(a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::NonFinite);
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut sv = a.singular_values().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    sv.sort_by(f64::total_cmp);
    Ok(sv)
}

/// `max ||A v - lambda v|| / ||A||_max` over the extremal eigenpairs.
pub fn extremal_residual(a: &HermitianMatrix) -> Result<f64> {
    let n = a.size();
    if n == 0 {
        return Ok(0.0);
    }
    let evd = a.as_ref().self_adjoint_eigen(Side::Lower).map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let (u, s) = (evd.U(), evd.S());
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for k in [0, n - 1] {
        let lambda = s[k];
        let v = u.col(k);
        let av = a.as_ref() * v;
        let r = (0..n).map(|i| (av[i] - lambda * v[i]).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(r / scale);
    }
    Ok(worst)
}

/// Test functions of the distribution functionals; all continuous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Hat {
        center: f64,
        half_width: f64,
    },
    ConstantOne,
    /// Linear interpolation of `knots` (increasing abscissae, zero at both
    /// ends), zero outside.
    PiecewiseLinear {
        knots: Vec<[f64; 2]>,
    },
}

impl TestFunction {
    pub fn hat(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !center.is_finite() {
            return Err(Error::InvalidParameter(format!("bad hat ({center}, {half_width})")));
        }
        Ok(TestFunction::Hat { center, half_width })
    }

    pub fn piecewise_linear(knots: Vec<[f64; 2]>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("piecewise linear test function: {m}")));
        if knots.len() < 2 {
            return bad("need at least two knots");
        }
        if knots.windows(2).any(|w| !(w[0][0] < w[1][0])) {
            return bad("abscissae must increase");
        }
        if knots[0][1] != 0.0 || knots[knots.len() - 1][1] != 0.0 {
            return bad("must vanish at both ends");
        }
        if knots.iter().any(|k| k[1] < 0.0 || !k[1].is_finite()) {
            return bad("values must be finite and nonnegative");
        }
        Ok(TestFunction::PiecewiseLinear { knots })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Hat { center, half_width } => (1.0 - (x - center).abs() / half_width).max(0.0),
            TestFunction::ConstantOne => 1.0,
            TestFunction::PiecewiseLinear { knots } => {
                let k = knots.partition_point(|p| p[0] <= x);
                if k == 0 || k == knots.len() {
                    return 0.0;
                }
                let ([x0, y0], [x1, y1]) = (knots[k - 1], knots[k]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            TestFunction::Hat { .. } | TestFunction::ConstantOne => 1.0,
            TestFunction::PiecewiseLinear { knots } => knots.iter().map(|k| k[1]).fold(0.0, f64::max),
        }
    }

    /// Stable identifier used in functional CSVs.
    pub fn id(&self) -> String {
        match self {
            TestFunction::Hat { center, half_width } => format!("hat(c={center},w={half_width})"),
            TestFunction::ConstantOne => "one".to_string(),
            TestFunction::PiecewiseLinear { knots } => {
                let pts: Vec<String> = knots.iter().map(|[x, y]| format!("{x}:{y}")).collect();
                format!("pwl({})", pts.join(";"))
            }
        }
    }
}

/// Hats of half-width one centred at `0, 1, ..., ceil(max_range)`, then the
/// constant one.
pub fn standard_bank(max_range: f64) -> Vec<TestFunction> {
    let top = max_range.max(0.0).ceil() as usize;
    let mut bank: Vec<TestFunction> =
        (0..=top).map(|c| TestFunction::Hat { center: c as f64, half_width: 1.0 }).collect();
    bank.push(TestFunction::ConstantOne);
    bank
}

/// Eigenvalues or singular values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Eigen,
    Singular,
}

/// The measure-carrying right-hand side of a distribution: a symbol on
/// `[-pi, pi]^d` times a physical region, plus an optional atom at zero
/// carrying `zero_fraction` of the mass (the zero padding of `B_{n,t}`,
/// i.e. the extended symbol outside `Omega_t`).
#[derive(Clone, Debug)]
pub struct DistributionTarget {
    symbol: MatrixSymbol,
    region: Exhaustion,
    zero_fraction: f64,
}

/// Weighted samples of the target; weights sum to one.
#[derive(Clone, Debug, Default)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    /// Eigenvalue branch `k` of each sample; `u16::MAX` marks the zero atom.
    pub branches: Vec<u16>,
}

impl DistributionTarget {
    /// A symbol on all of `Omega` (the physical part only matters when the
    /// symbol has a coefficient).
    pub fn new(symbol: MatrixSymbol) -> Self {
        DistributionTarget { symbol, region: Exhaustion::whole(), zero_fraction: 0.0 }
    }

    pub fn on(mut self, region: Exhaustion) -> Self {
        self.region = region;
        self
    }

    /// The extended symbol `f_t^E` on `Omega`: `f` on `Omega_t`, zero outside.
    pub fn extended(symbol: MatrixSymbol, t: f64) -> Result<Self> {
        let region = Exhaustion::new(t)?;
        Ok(DistributionTarget { symbol, region, zero_fraction: 1.0 - region.measure() / OMEGA_MEASURE })
    }

    pub fn symbol(&self) -> &MatrixSymbol {
        &self.symbol
    }

    pub fn region(&self) -> Exhaustion {
        self.region
    }

    pub fn zero_fraction(&self) -> f64 {
        self.zero_fraction
    }

    /// Number of samples a grid of `m` points per direction produces.
    pub fn sample_count(&self, m: usize) -> usize {
        let mut count = m.pow(self.symbol.d() as u32) * self.symbol.p();
        if !self.symbol.is_constant_coefficient() {
            count *= physical_point_count(self.region, m);
        }
        count + usize::from(self.zero_fraction > 0.0)
    }

    /// Smallest grid with at least `factor * n` samples.
    pub fn grid_for(&self, n: usize, factor: usize) -> usize {
        let mut m = 2;
        while self.sample_count(m) < factor * n {
            m += 1;
        }
        m
    }

    /// Midpoint samples on `m` points per Fourier direction (`[0, pi]` for
    /// even directions) and `m` per physical direction.
    pub fn samples(&self, m: usize, mode: Mode) -> SampleSet {
        let f = &self.symbol;
        let (d, p) = (f.d(), f.p());
        let axes: Vec<Vec<f64>> = f.even_flags().iter().map(|&e| fourier_nodes(e, m).0).collect();
        let grid = MultiIndex::splat(d, m as i64);
        let points: Vec<MultiIndex> = MultiIndex::range(&grid).collect();
        let fourier: Vec<Vec<f64>> = points
            .par_iter()
            .map(|idx| {
                let theta: Vec<f64> =
                    idx.entries().iter().enumerate().map(|(r, &j)| axes[r][(j - 1) as usize]).collect();
                f.fourier_eigenvalues(&theta)
            })
            .collect();
        let physical: Vec<(f64, f64)> = if f.is_constant_coefficient() {
            vec![(f.physical_factor(&[]), 1.0)]
        } else {
            let pts = physical_midpoints(self.region, m);
            let total: f64 = pts.iter().map(|(_, w)| w).sum();
            pts.iter().map(|(x, w)| (f.physical_factor(x), w / total)).collect()
        };
        let mass = 1.0 - self.zero_fraction;
        let w_theta = mass / (fourier.len() * p) as f64;
        let len = fourier.len() * p * physical.len() + usize::from(self.zero_fraction > 0.0);
        let mut out = SampleSet {
            values: Vec::with_capacity(len),
            weights: Vec::with_capacity(len),
            branches: Vec::with_capacity(len),
        };
        for &(s, wx) in &physical {
            for ev in &fourier {
                for (k, &v) in ev.iter().enumerate() {
                    let value = s * v;
                    out.values.push(match mode {
                        Mode::Eigen => value,
                        Mode::Singular => value.abs(),
                    });
                    out.weights.push(wx * w_theta);
                    out.branches.push(if s < 0.0 { (p - 1 - k) as u16 } else { k as u16 });
                }
            }
        }
        if self.zero_fraction > 0.0 {
            out.values.push(0.0);
            out.weights.push(self.zero_fraction);
            out.branches.push(u16::MAX);
        }
        out
    }

    /// The sorted, weighted sample multiset.
    pub fn rearrangement(&self, m: usize, mode: Mode) -> Rearrangement {
        let s = self.samples(m, mode);
        let mut order: Vec<usize> = (0..s.values.len()).collect();
        order.sort_by(|&a, &b| s.values[a].total_cmp(&s.values[b]).then(a.cmp(&b)));
        let values: Vec<f64> = order.iter().map(|&i| s.values[i]).collect();
        let branches: Vec<u16> = order.iter().map(|&i| s.branches[i]).collect();
        let mut acc = 0.0;
        let cumulative: Vec<f64> = order
            .iter()
            .map(|&i| {
                acc += s.weights[i];
                acc
            })
            .collect();
        Rearrangement { values, cumulative, branches, grid: m }
    }

    /// `alpha(F)` at grid `m` for every `F`.
    fn functionals(&self, m: usize, mode: Mode, bank: &[TestFunction]) -> Vec<f64> {
        let s = self.samples(m, mode);
        bank.iter().map(|f| s.values.iter().zip(&s.weights).map(|(&v, &w)| w * f.eval(v)).sum()).collect()
    }
}

fn physical_point_count(region: Exhaustion, m: usize) -> usize {
    if region.t() <= 1.0 {
        m * m
    } else {
        2 * m * m
    }
}

/// Monotone rearrangement: sorted symbol samples with cumulative weights.
#[derive(Clone, Debug)]
pub struct Rearrangement {
    pub values: Vec<f64>,
    /// `cumulative[k]` is the weight of samples `0..=k`; the last entry is one.
    pub cumulative: Vec<f64>,
    pub branches: Vec<u16>,
    pub grid: usize,
}

impl Rearrangement {
    /// Weighted quantile: the smallest sample whose cumulative weight reaches `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let total = *self.cumulative.last().expect("nonempty rearrangement");
        let k = self.cumulative.partition_point(|&c| c < q * total);
        self.values[k.min(self.values.len() - 1)]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty rearrangement")
    }
}

/// Sorted samples of every eigenvalue branch of a constant-coefficient or
/// variable-coefficient symbol; `region` is only used for the latter.
pub fn symbol_rearrangement(
    f: &MatrixSymbol,
    grid_per_dim: usize,
    region: Option<Exhaustion>,
) -> Result<Rearrangement> {
    if grid_per_dim < 2 {
        return Err(Error::InvalidParameter("grid_per_dim must be at least 2".into()));
    }
    let target = DistributionTarget::new(f.clone()).on(region.unwrap_or_else(Exhaustion::whole));
    Ok(target.rearrangement(grid_per_dim, Mode::Eigen))
}

/// `(nearest sample, distance)` for every eigenvalue.
pub fn nearest_samples(eigs: &[f64], samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if eigs.is_empty() || samples.is_empty() {
        return Err(Error::InvalidParameter("min-distance needs nonempty inputs".into()));
    }
    Ok(eigs
        .iter()
        .map(|&l| {
            let k = samples.partition_point(|&s| s < l);
            let mut best = (f64::NAN, f64::INFINITY);
            for c in [k.wrapping_sub(1), k] {
                if let Some(&s) = samples.get(c) {
                    let dist = (s - l).abs();
                    if dist < best.1 {
                        best = (s, dist);
                    }
                }
            }
            best
        })
        .collect())
}

/// Distance from every eigenvalue to the nearest sample (sorted samples).
pub fn min_distance_errors(eigs: &[f64], samples: &[f64]) -> Result<Vec<f64>> {
    Ok(nearest_samples(eigs, samples)?.into_iter().map(|(_, d)| d).collect())
}

/// `|lambda_j - Q((j - 1/2)/N)|` against the weighted quantiles `Q`.
pub fn quantile_errors(eigs: &[f64], rearr: &Rearrangement) -> Vec<f64> {
    let n = eigs.len() as f64;
    eigs.iter().enumerate().map(|(j, &l)| (l - rearr.quantile((j as f64 + 0.5) / n)).abs()).collect()
}

/// Eigenvalue counts between consecutive quantiles `k/p` of the
/// rearrangement: the share of the spectrum each of `p` branches accounts for.
pub fn branch_counts(eigs: &[f64], rearr: &Rearrangement, p: usize) -> Vec<usize> {
    let cuts: Vec<f64> = (1..p).map(|k| rearr.quantile(k as f64 / p as f64)).collect();
    let mut counts = vec![0; p];
    for &l in eigs {
        counts[cuts.partition_point(|&c| c <= l)] += 1;
    }
    counts
}

/// Resolution control of the doubling midpoint quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Stop once no functional moves by more than this under doubling.
    pub tol: f64,
    /// Report as flagged when the cap is hit with a larger change than this.
    pub flag_tol: f64,
    pub start_grid: usize,
    pub max_samples: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { tol: 1e-4, flag_tol: 1e-3, start_grid: 8, max_samples: 1 << 22 }
    }
}

/// Converged functionals `alpha(F)` for a bank.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaValues {
    pub values: Vec<f64>,
    pub grid: usize,
    pub last_change: f64,
    pub capped: bool,
    pub flagged: bool,
}

pub fn alpha_functionals(
    target: &DistributionTarget,
    bank: &[TestFunction],
    mode: Mode,
    opts: &QuadratureOptions,
) -> AlphaValues {
    let mut m = opts.start_grid.max(2);
    let mut current = target.functionals(m, mode, bank);
    let mut change = f64::INFINITY;
    loop {
        let next_m = 2 * m;
        if target.sample_count(next_m) > opts.max_samples {
            return AlphaValues {
                values: current,
                grid: m,
                last_change: change,
                capped: true,
                flagged: change >= opts.flag_tol,
            };
        }
        let next = target.functionals(next_m, mode, bank);
        change = current.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        m = next_m;
        current = next;
        if change < opts.tol {
            return AlphaValues { values: current, grid: m, last_change: change, capped: false, flagged: false };
        }
    }
}

/// One row of the functional CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalRow {
    #[serde(rename = "F_id")]
    pub f_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    #[serde(skip)]
    pub sup_norm: f64,
    #[serde(skip)]
    pub capped: bool,
    #[serde(skip)]
    pub flagged: bool,
}

/// `(1/N) sum F(lambda_j)` against `alpha(F)` for every `F` in the bank,
/// from an already computed spectrum (eigenvalues or singular values).
pub fn weak_star_gap_from_spectrum(
    spectrum: &[f64],
    target: &DistributionTarget,
    bank: &[TestFunction],
    mode: Mode,
    opts: &QuadratureOptions,
) -> Result<Vec<FunctionalRow>> {
    if bank.is_empty() {
        return Err(Error::InvalidParameter("empty test-function bank".into()));
    }
    if spectrum.is_empty() {
        return Err(Error::InvalidParameter("empty spectrum".into()));
    }
    let alpha = alpha_functionals(target, bank, mode, opts);
    let n = spectrum.len() as f64;
    Ok(bank
        .iter()
        .zip(&alpha.values)
        .map(|(f, &rhs)| {
            let lhs = spectrum.iter().map(|&l| f.eval(l)).sum::<f64>() / n;
            FunctionalRow {
                f_id: f.id(),
                lhs,
                rhs,
                gap: (lhs - rhs).abs(),
                sup_norm: f.sup_norm(),
                capped: alpha.capped,
                flagged: alpha.flagged,
            }
        })
        .collect())
}

pub fn weak_star_gap(
    a: &HermitianMatrix,
    target: &DistributionTarget,
    bank: &[TestFunction],
    mode: Mode,
    opts: &QuadratureOptions,
) -> Result<Vec<FunctionalRow>> {
    let spectrum = match mode {
        Mode::Eigen => eigs(a)?,
        Mode::Singular => svals(a.as_ref())?,
    };
    weak_star_gap_from_spectrum(&spectrum, target, bank, mode, opts)
}

/// `alpha_{t_max}(F)` with the tail bound
/// `|alpha(F) - alpha_t(F)| <= 2 ||F|| mu(Omega \ Omega_t) / mu(Omega_t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaProbe {
    pub t: f64,
    pub alpha: f64,
    pub tail_bound: f64,
}

pub fn alpha_limit_probe(ts: &[f64], alphas: &[f64], sup_norm: f64) -> Result<AlphaProbe> {
    if ts.len() < 3 || ts.len() != alphas.len() {
        return Err(Error::InvalidParameter("need at least three (t, alpha_t) pairs".into()));
    }
    if ts.windows(2).any(|w| !(w[0] < w[1])) || !(ts[0] > 0.0) {
        return Err(Error::InvalidParameter("t values must be positive and increasing".into()));
    }
    let t = *ts.last().expect("nonempty");
    let outside = OMEGA_MEASURE - Exhaustion::new(t)?.measure();
    Ok(AlphaProbe {
        t,
        alpha: *alphas.last().expect("nonempty"),
        tail_bound: 2.0 * sup_norm * outside / Exhaustion::new(t)?.measure(),
    })
}

/// Sorted spectrum against the symbol, plus functionals.
#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub label: String,
    pub n: usize,
    pub t: Option<f64>,
    pub h: Option<f64>,
    pub grid: usize,
    pub eigenvalues: Vec<f64>,
    pub nearest: Vec<f64>,
    pub min_dist: Vec<f64>,
    pub functionals: Vec<FunctionalRow>,
}

#[derive(Serialize)]
struct SpectralRow {
    j: usize,
    lambda_j: f64,
    nearest_sample: f64,
    min_dist: f64,
}

impl SpectralReport {
    /// Builds the report for a sorted spectrum; `grid` is the rearrangement resolution.
    pub fn new(
        label: impl Into<String>,
        n: usize,
        eigenvalues: Vec<f64>,
        target: &DistributionTarget,
        grid: usize,
        mode: Mode,
    ) -> Result<Self> {
        let rearr = target.rearrangement(grid, mode);
        let pairs = nearest_samples(&eigenvalues, &rearr.values)?;
        Ok(SpectralReport {
            label: label.into(),
            n,
            t: None,
            h: None,
            grid,
            eigenvalues,
            nearest: pairs.iter().map(|p| p.0).collect(),
            min_dist: pairs.iter().map(|p| p.1).collect(),
            functionals: Vec::new(),
        })
    }

    pub fn max_min_distance(&self) -> f64 {
        self.min_dist.iter().copied().fold(0.0, f64::max)
    }

    /// Columns `j, lambda_j, nearest_sample, min_dist`, `j` from 1.
    pub fn write_spectral_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for (j, ((&l, &s), &d)) in self.eigenvalues.iter().zip(&self.nearest).zip(&self.min_dist).enumerate() {
            wr.serialize(SpectralRow { j: j + 1, lambda_j: l, nearest_sample: s, min_dist: d })?;
        }
        wr.flush().map_err(|e| Error::io("<spectral csv>", e))?;
        Ok(())
    }

    /// Columns `F_id, lhs, rhs, gap`.
    pub fn write_functional_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.functionals.is_empty() {
            wr.write_record(["F_id", "lhs", "rhs", "gap"])?;
        }
        for row in &self.functionals {
            wr.serialize(row)?;
        }
        wr.flush().map_err(|e| Error::io("<functional csv>", e))?;
        Ok(())
    }
}
