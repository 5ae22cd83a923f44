//! Concrete matrix families: `A_n` on `Omega`, `C_{n,t}` on `Omega_t`,
//! the padded `B_{n,t}`, the 1D pair of the a.c.s. example, the 1D Q2
//! stiffness matrix and the variable-coefficient P1 stiffness.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_masks, Exhaustion, GridConstruction, GridRestriction, OMEGA_MEASURE};
use crate::matrix::HermitianMatrix;
use crate::multiindex::MultiIndex;
use crate::symbol::{catalog_get, diffusion_coefficient, scale_symbol, MatrixSymbol};
use crate::toeplitz::{assemble_restricted, default_table};

/// Largest matrix size built unless the caller says otherwise.
pub const DEFAULT_BUDGET: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    P1_1d,
    /// `(1 - 1/t) T_n(2 - 2cos)`.
    P1_1dScaled {
        t: f64,
    },
    FdP1,
    Q1,
    P2,
    P1Varcoeff,
    /// `T_n(f_2)` without its last row and column: Dirichlet Q2 stiffness
    /// on `(0, 1)` of size `2n - 1`.
    Q2Stiffness1d,
}

impl Construction {
    pub fn is_one_dimensional(self) -> bool {
        matches!(self, Construction::P1_1d | Construction::P1_1dScaled { .. } | Construction::Q2Stiffness1d)
    }

    /// The grid used for masks; P1 with a coefficient shares the 5-point node set.
    pub fn grid(self) -> Option<GridConstruction> {
        match self {
            Construction::FdP1 | Construction::P1Varcoeff => Some(GridConstruction::FdP1),
            Construction::Q1 => Some(GridConstruction::Q1),
            Construction::P2 => Some(GridConstruction::P2),
            _ => None,
        }
    }

    /// Catalog name of the symbol the family is built from.
    pub fn symbol_name(self) -> &'static str {
        match self {
            Construction::P1_1d | Construction::P1_1dScaled { .. } => "p1_1d",
            Construction::FdP1 => "fd_p1_2d",
            Construction::Q1 => "q1_2d",
            Construction::P2 => "p2_2d",
            Construction::P1Varcoeff => "p1_2d_varcoeff",
            Construction::Q2Stiffness1d => "q2_1d_stiffness",
        }
    }

    /// Inverse of [`Construction::symbol_name`] for the 2D grid families.
    pub fn from_symbol_name(name: &str) -> Option<Self> {
        Some(match name {
            "fd_p1_2d" => Construction::FdP1,
            "q1_2d" => Construction::Q1,
            "p2_2d" => Construction::P2,
            "p1_2d_varcoeff" => Construction::P1Varcoeff,
            _ => return None,
        })
    }

    /// The symbol of the unrestricted family.
    pub fn symbol(self) -> MatrixSymbol {
        let base = catalog_get(self.symbol_name()).expect("catalog name");
        match self {
            Construction::P1_1dScaled { t } => scale_symbol(&base, 1.0 - 1.0 / t),
            _ => base,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Restriction {
    FullRectangle,
    Omega,
    OmegaT { t: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    #[default]
    None,
    /// `C_{n,t}` at its own positions inside the `Omega` index set.
    ZeroEmbed,
    /// `D(chi_t) A_n D(chi_t)`.
    DiagSandwich,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFamilySpec {
    pub construction: Construction,
    pub n: usize,
    pub restriction: Restriction,
    #[serde(default)]
    pub padding: Padding,
}

impl MatrixFamilySpec {
    pub fn new(construction: Construction, n: usize, restriction: Restriction) -> Self {
        MatrixFamilySpec { construction, n, restriction, padding: Padding::None }
    }

    pub fn padded(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if let Construction::P1_1dScaled { t } = self.construction {
            if !(t > 1.0) {
                return Err(Error::InvalidParameter(format!("scaled 1D family needs t > 1, got {t}")));
            }
        }
        if self.construction.is_one_dimensional() && self.restriction != Restriction::FullRectangle {
            return Err(Error::InvalidParameter("1D families live on an interval; use full_rectangle".into()));
        }
        if let Restriction::OmegaT { t } = self.restriction {
            Exhaustion::new(t)?;
        }
        if self.padding != Padding::None && !matches!(self.restriction, Restriction::OmegaT { .. }) {
            return Err(Error::InvalidParameter("padding requires an omega_t restriction".into()));
        }
        Ok(())
    }

    fn label(&self) -> String {
        let c = match self.construction {
            Construction::P1_1dScaled { t } => format!("p1_1d_scaled(t={t})"),
            Construction::Q2Stiffness1d => "q2_1d_stiffness".into(),
            other => other.symbol_name().into(),
        };
        let r = match self.restriction {
            Restriction::FullRectangle => "rect".to_string(),
            Restriction::Omega => "omega".to_string(),
            Restriction::OmegaT { t } => format!("omega_t(t={t})"),
        };
        let pad = match self.padding {
            Padding::None => "",
            Padding::ZeroEmbed => ",zero_embed",
            Padding::DiagSandwich => ",diag_sandwich",
        };
        format!("{c}[n={},{r}{pad}]", self.n)
    }
}

/// A built matrix together with the masks used to cut it (2D families).
#[derive(Clone, Debug)]
pub struct Family {
    pub spec: MatrixFamilySpec,
    pub matrix: HermitianMatrix,
    pub masks: Option<GridRestriction>,
}

pub fn build_family(spec: &MatrixFamilySpec) -> Result<HermitianMatrix> {
    Ok(build_family_within(spec, DEFAULT_BUDGET)?.matrix)
}

/// Builds the family, refusing anything larger than `budget` rows.
pub fn build_family_within(spec: &MatrixFamilySpec, budget: usize) -> Result<Family> {
    spec.validate()?;
    let n = spec.n;
    let check = |required: usize| -> Result<()> {
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        Ok(())
    };
    let label = spec.label();
    let Some(grid) = spec.construction.grid() else {
        let (size, scale) = match spec.construction {
            Construction::P1_1d => (n, 1.0),
            Construction::P1_1dScaled { t } => (n, 1.0 - 1.0 / t),
            Construction::Q2Stiffness1d => (2 * n - 1, 1.0),
            _ => unreachable!("2D constructions have a grid"),
        };
        check(size)?;
        let table = default_table(&catalog_get(spec.construction.symbol_name())?)?;
        let rows: Vec<usize> = (0..size).collect();
        let mut m = assemble_restricted(&table, &MultiIndex::new(vec![n as i64]), &rows)?;
        if scale != 1.0 {
            m = m.scaled(scale, label);
        } else {
            m.set_label(label);
        }
        return Ok(Family { spec: *spec, matrix: m, masks: None });
    };

    let t_values: Vec<f64> = match spec.restriction {
        Restriction::OmegaT { t } => vec![t],
        _ => Vec::new(),
    };
    let masks = build_masks(n, grid, &t_values)?;
    let all_rows: Vec<usize>;
    let rows: &[usize] = match spec.restriction {
        Restriction::FullRectangle => {
            all_rows = (0..masks.full_size()).collect();
            &all_rows
        }
        Restriction::Omega => masks.omega_rows(),
        Restriction::OmegaT { t: _ } => masks.omega_t_rows(0),
    };
    if rows.len() < 2 {
        return Err(Error::DegenerateRestriction(rows.len()));
    }
    let output_size = match spec.padding {
        Padding::None => rows.len(),
        Padding::ZeroEmbed | Padding::DiagSandwich => masks.omega_rows().len(),
    };
    check(output_size)?;

    let matrix = match spec.padding {
        Padding::None => assemble_on_rows(spec.construction, &masks, rows, label)?,
        Padding::ZeroEmbed => {
            let c = assemble_on_rows(spec.construction, &masks, rows, "C")?;
            c.embed(&masks.omega_t_positions(0), output_size, label)?
        }
        Padding::DiagSandwich => {
            let a = assemble_on_rows(spec.construction, &masks, masks.omega_rows(), "A")?;
            let mut chi = vec![false; output_size];
            for p in masks.omega_t_positions(0) {
                chi[p] = true;
            }
            let data = Mat::from_fn(output_size, output_size, |i, j| if chi[i] && chi[j] { a.get(i, j) } else { 0.0 });
            HermitianMatrix::new(data, label)?
        }
    };
    if !matrix.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(Family { spec: *spec, matrix, masks: Some(masks) })
}

fn assemble_on_rows(
    construction: Construction,
    masks: &GridRestriction,
    rows: &[usize],
    label: impl Into<String>,
) -> Result<HermitianMatrix> {
    let mut m = match construction {
        Construction::P1Varcoeff => assemble_p1_weighted(masks, rows, &diffusion_coefficient)?,
        other => {
            let table = default_table(&catalog_get(other.symbol_name())?)?;
            assemble_restricted(&table, &masks.levels(), rows)?
        }
    };
    m.set_label(label);
    Ok(m)
}

/// P1 stiffness with coefficient `a` on the cover grid, every square split
/// along its SW-NE diagonal, one-point centroid quadrature and no `h^2`
/// factor; rows outside `rows` act as homogeneous Dirichlet nodes.
///
/// With `a = 1` this reproduces the 5-point stencil exactly.
pub fn assemble_p1_weighted(
    masks: &GridRestriction,
    rows: &[usize],
    a: &dyn Fn(&[f64]) -> f64,
) -> Result<HermitianMatrix> {
    if masks.block_size() != 1 {
        return Err(Error::InvalidParameter("P1 assembly needs a scalar grid".into()));
    }
    let (n_x, n_y) = masks.extents();
    const ABSENT: usize = usize::MAX;
    let mut local = vec![ABSENT; n_x * n_y];
    for (k, &r) in rows.iter().enumerate() {
        if r >= local.len() {
            return Err(Error::InvalidParameter("row outside the cover".into()));
        }
        local[r] = k;
    }
    // node (i, j), 0 <= i <= n_x + 1; the frame is always Dirichlet
    let index = |i: usize, j: usize| -> usize {
        if i == 0 || j == 0 || i > n_x || j > n_y {
            ABSENT
        } else {
            local[(i - 1) * n_y + (j - 1)]
        }
    };
    let h = masks.step();
    let mut data = Mat::<f64>::zeros(rows.len(), rows.len());
    // element matrix of a right triangle with legs h, corner at the middle vertex
    const K: [[f64; 3]; 3] = [[0.5, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 0.5]];
    for i in 0..=n_x {
        for j in 0..=n_y {
            let sw = index(i, j);
            let se = index(i + 1, j);
            let ne = index(i + 1, j + 1);
            let nw = index(i, j + 1);
            let (x, y) = (i as f64, j as f64);
            let lower = ([sw, se, ne], [(x + 2.0 / 3.0) * h, (y + 1.0 / 3.0) * h]);
            let upper = ([sw, nw, ne], [(x + 1.0 / 3.0) * h, (y + 2.0 / 3.0) * h]);
            for (nodes, centroid) in [lower, upper] {
                if nodes.iter().all(|&v| v == ABSENT) {
                    continue;
                }
                let w = a(&centroid);
                for (r, &vr) in nodes.iter().enumerate() {
                    if vr == ABSENT {
                        continue;
                    }
                    for (c, &vc) in nodes.iter().enumerate() {
                        if vc != ABSENT && K[r][c] != 0.0 {
                            data[(vr, vc)] += w * K[r][c];
                        }
                    }
                }
            }
        }
    }
    HermitianMatrix::new(data, "P1(a)")
}

/// Fraction of `Omega` outside `Omega_t`, the share of zero symbol carried by
/// a padded `B_{n,t}`.
pub fn padding_fraction(t: f64) -> Result<f64> {
    Ok(1.0 - Exhaustion::new(t)?.measure() / OMEGA_MEASURE)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec: &'a MatrixFamilySpec,
    label: &'a str,
    size: usize,
    generator: &'static str,
}

/// Writes `<stem>.txt` (dense text) and `<stem>.json` (spec echo).
pub fn export_family(family: &Family, dir: &Path, stem: &str) -> Result<()> {
    let txt = dir.join(format!("{stem}.txt"));
    let f = File::create(&txt).map_err(|e| Error::io(&txt, e))?;
    family.matrix.write_dense_text(BufWriter::new(f)).map_err(|e| Error::io(&txt, e))?;
    let json = dir.join(format!("{stem}.json"));
    let f = File::create(&json).map_err(|e| Error::io(&json, e))?;
    let sidecar = Sidecar {
        spec: &family.spec,
        label: family.matrix.label(),
        size: family.matrix.size(),
        generator: concat!("symlab ", env!("CARGO_PKG_VERSION")),
    };
    serde_json::to_writer_pretty(BufWriter::new(f), &sidecar)?;
    Ok(())
}
