//! The unbounded finite-measure domain `Omega`, its exhaustion by
//! `Omega_t = Omega ∩ (-t, t)^2`, and node masks on the Toeplitz cover.
//!
//! `Omega = { x > 0, 0 < y < g(x) }` with `g = 1` on `[0, 1)` and
//! `g = 1/x^2` beyond, so `mu(Omega) = 2`. The cover is the rectangle of
//! `n_x = n * floor(sqrt(n + 1))` by `n_y = n` cells with step
//! `h = 1/(n + 1)`; level 1 of the grid multi-index runs along `x`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiindex::{delinearize, MultiIndex};

pub const OMEGA_MEASURE: f64 = 2.0;

/// Upper boundary of `Omega`.
pub fn boundary_height(x: f64) -> f64 {
    if x < 1.0 {
        1.0
    } else {
        1.0 / (x * x)
    }
}

/// Membership in the open set `Omega`; boundary points are excluded.
pub fn in_omega(x: f64, y: f64) -> bool {
    x > 0.0 && y > 0.0 && y < boundary_height(x)
}

/// `mu(Omega_t)`: `t^2` up to `t = 1`, then `2 - 1/t`.
pub fn measure_omega_t(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("exhaustion parameter must be positive, got {t}")));
    }
    Ok(if t.is_infinite() {
        OMEGA_MEASURE
    } else if t <= 1.0 {
        t * t
    } else {
        2.0 - 1.0 / t
    })
}

/// One member `Omega_t` of the exhaustion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exhaustion {
    t: f64,
}

impl Exhaustion {
    pub fn new(t: f64) -> Result<Self> {
        measure_omega_t(t)?;
        Ok(Exhaustion { t })
    }

    /// `Omega` itself, as the `t = inf` member.
    pub fn whole() -> Self {
        Exhaustion { t: f64::INFINITY }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        in_omega(x, y) && x < self.t && y < self.t
    }

    pub fn measure(&self) -> f64 {
        measure_omega_t(self.t).expect("validated at construction")
    }
}

/// Midpoint samples `(point, weight)` covering `Omega_t`; the weights sum
/// to `mu(Omega_t)` exactly.
///
/// The unit square `[0,1)^2` is sampled directly. The tail `x >= 1` is
/// mapped from the parameter rectangle `(u, v) in (1/t, 1] x (0, 1)` by
/// `x = 1/u`, `y = u^2 v`, whose Jacobian is identically one, so the
/// infinite strip is covered without truncation.
pub fn physical_midpoints(region: Exhaustion, m: usize) -> Vec<([f64; 2], f64)> {
    assert!(m > 0);
    let mf = m as f64;
    let t = region.t();
    let mut out = Vec::with_capacity(2 * m * m);
    if t <= 1.0 {
        let w = t * t / (mf * mf);
        for a in 0..m {
            for b in 0..m {
                out.push(([(a as f64 + 0.5) * t / mf, (b as f64 + 0.5) * t / mf], w));
            }
        }
        return out;
    }
    let w = 1.0 / (mf * mf);
    for a in 0..m {
        for b in 0..m {
            out.push(([(a as f64 + 0.5) / mf, (b as f64 + 0.5) / mf], w));
        }
    }
    let u0 = if t.is_infinite() { 0.0 } else { 1.0 / t };
    let du = (1.0 - u0) / mf;
    let wt = du / mf;
    for a in 0..m {
        let u = u0 + (a as f64 + 0.5) * du;
        for b in 0..m {
            let v = (b as f64 + 0.5) / mf;
            out.push(([1.0 / u, u * u * v], wt));
        }
    }
    out
}

/// Grid-based discretizations of the 2D problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridConstruction {
    FdP1,
    Q1,
    P2,
}

impl GridConstruction {
    /// Unknowns per cell.
    pub fn block_size(self) -> usize {
        match self {
            GridConstruction::FdP1 | GridConstruction::Q1 => 1,
            GridConstruction::P2 => 4,
        }
    }

    /// Node offsets in units of `h` relative to the cell's vertex `(i1 h, i2 h)`.
    ///
    /// P2 unknowns follow the component order of the 4x4 symbol: cell
    /// centre, the edge midpoint below the vertex, the edge midpoint left of
    /// the vertex, and the vertex. Every nonzero symbol coupling then joins
    /// nodes at most one step apart.
    pub fn offsets(self) -> &'static [(f64, f64)] {
        match self {
            GridConstruction::FdP1 | GridConstruction::Q1 => &[(0.0, 0.0)],
            GridConstruction::P2 => &[(-0.5, -0.5), (0.0, -0.5), (-0.5, 0.0), (0.0, 0.0)],
        }
    }

    pub fn symbol_name(self) -> &'static str {
        match self {
            GridConstruction::FdP1 => "fd_p1_2d",
            GridConstruction::Q1 => "q1_2d",
            GridConstruction::P2 => "p2_2d",
        }
    }
}

/// `floor(sqrt(n + 1))`, the last column index that meets `Omega`.
pub fn last_column(n: usize) -> usize {
    let target = n + 1;
    let mut r = (target as f64).sqrt() as usize;
    while r * r > target {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= target {
        r += 1;
    }
    r
}

/// Cells of the Toeplitz cover: `(n_x, n_y) = (n * floor(sqrt(n+1)), n)`.
pub fn rectangle_extents(n: usize, _construction: GridConstruction) -> (usize, usize) {
    (n * last_column(n), n)
}

/// Node masks for `Omega` and selected `Omega_t` on the cover of size `n`.
#[derive(Clone, Debug)]
pub struct GridRestriction {
    n: usize,
    construction: GridConstruction,
    n_x: usize,
    n_y: usize,
    omega_rows: Vec<usize>,
    t_values: Vec<f64>,
    t_rows: Vec<Vec<usize>>,
}

pub fn build_masks(n: usize, construction: GridConstruction, t_values: &[f64]) -> Result<GridRestriction> {
    if n == 0 {
        return Err(Error::InvalidParameter("grid size n must be at least 1".into()));
    }
    let regions: Vec<Exhaustion> = t_values.iter().map(|&t| Exhaustion::new(t)).collect::<Result<_>>()?;
    let (n_x, n_y) = rectangle_extents(n, construction);
    let p = construction.block_size();
    let h = 1.0 / (n as f64 + 1.0);
    let mut omega_rows = Vec::new();
    let mut t_rows = vec![Vec::new(); regions.len()];
    for cell in 0..n_x * n_y {
        let (i1, i2) = (cell / n_y + 1, cell % n_y + 1);
        for (b, &(ox, oy)) in construction.offsets().iter().enumerate() {
            let (x, y) = ((i1 as f64 + ox) * h, (i2 as f64 + oy) * h);
            if !in_omega(x, y) {
                continue;
            }
            let row = cell * p + b;
            omega_rows.push(row);
            for (k, r) in regions.iter().enumerate() {
                if r.contains(x, y) {
                    t_rows[k].push(row);
                }
            }
        }
    }
    Ok(GridRestriction { n, construction, n_x, n_y, omega_rows, t_values: t_values.to_vec(), t_rows })
}

/// Counts `(|mask(Omega)|, |mask(Omega_t)|)` without materializing masks.
pub fn count_nodes(n: usize, construction: GridConstruction, t: f64) -> Result<(usize, usize)> {
    let region = Exhaustion::new(t)?;
    let (n_x, n_y) = rectangle_extents(n, construction);
    let h = 1.0 / (n as f64 + 1.0);
    let (mut all, mut inner) = (0, 0);
    for i1 in 1..=n_x {
        for i2 in 1..=n_y {
            for &(ox, oy) in construction.offsets() {
                let (x, y) = ((i1 as f64 + ox) * h, (i2 as f64 + oy) * h);
                if in_omega(x, y) {
                    all += 1;
                    if region.contains(x, y) {
                        inner += 1;
                    }
                }
            }
        }
    }
    Ok((all, inner))
}

#[derive(Serialize)]
struct MaskRow {
    cell_i1: usize,
    cell_i2: usize,
    block: usize,
    x: f64,
    y: f64,
    in_omega: u8,
}

impl GridRestriction {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn construction(&self) -> GridConstruction {
        self.construction
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.n as f64 + 1.0)
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    /// Multi-index extents of the cover, `(n_x, n_y)`.
    pub fn levels(&self) -> MultiIndex {
        MultiIndex::new(vec![self.n_x as i64, self.n_y as i64])
    }

    pub fn block_size(&self) -> usize {
        self.construction.block_size()
    }

    /// Rows of the full cover matrix.
    pub fn full_size(&self) -> usize {
        self.n_x * self.n_y * self.block_size()
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    /// Strictly increasing 0-based cover rows whose node lies in `Omega`.
    pub fn omega_rows(&self) -> &[usize] {
        &self.omega_rows
    }

    /// Strictly increasing 0-based cover rows whose node lies in `Omega_t`
    /// for the `k`-th requested `t`.
    pub fn omega_t_rows(&self, k: usize) -> &[usize] {
        &self.t_rows[k]
    }

    /// Positions of the `Omega_t` rows inside the `Omega` index set.
    pub fn omega_t_positions(&self, k: usize) -> Vec<usize> {
        self.t_rows[k].iter().map(|r| self.omega_rows.binary_search(r).expect("Omega_t is a subset of Omega")).collect()
    }

    /// Physical position of the node behind cover row `row` (0-based).
    pub fn node_position(&self, row: usize) -> (f64, f64) {
        let p = self.block_size();
        let (cell, b) = (row / p, row % p);
        let (i1, i2) = (cell / self.n_y + 1, cell % self.n_y + 1);
        let (ox, oy) = self.construction.offsets()[b];
        let h = self.step();
        ((i1 as f64 + ox) * h, (i2 as f64 + oy) * h)
    }

    /// Mask CSV: one line per cover node with membership flags.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> =
            ["cell_i1", "cell_i2", "block", "x", "y", "in_omega"].iter().map(|s| s.to_string()).collect();
        header.extend(self.t_values.iter().map(|t| format!("in_omega_t{t}")));
        wr.write_record(&header)?;
        let p = self.block_size();
        let levels = self.levels();
        let mut omega = vec![false; self.full_size()];
        for &r in &self.omega_rows {
            omega[r] = true;
        }
        let mut t_masks = vec![vec![false; self.full_size()]; self.t_rows.len()];
        for (k, rows) in self.t_rows.iter().enumerate() {
            for &r in rows {
                t_masks[k][r] = true;
            }
        }
        for row in 0..self.full_size() {
            let (cell, block) = delinearize(row + 1, &levels, p)?;
            let (x, y) = self.node_position(row);
            let base = MaskRow {
                cell_i1: cell.entries()[0] as usize,
                cell_i2: cell.entries()[1] as usize,
                block,
                x,
                y,
                in_omega: omega[row] as u8,
            };
            let mut rec = vec![
                base.cell_i1.to_string(),
                base.cell_i2.to_string(),
                base.block.to_string(),
                base.x.to_string(),
                base.y.to_string(),
                base.in_omega.to_string(),
            ];
            rec.extend(t_masks.iter().map(|m| (m[row] as u8).to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush().map_err(|e| Error::io("<mask csv>", e))?;
        Ok(())
    }
}
