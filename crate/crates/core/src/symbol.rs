//! Catalog of matrix-valued symbols and their combinators.
//!
//! A symbol is stored in factored form `s(x) * g(theta)`: a Hermitian
//! `p x p` trigonometric part `g` over `[-pi, pi]^d` and a real scalar
//! factor `s` over the physical variables (a constant for Toeplitz
//! symbols, a diffusion coefficient or a support indicator otherwise).
//! Every symbol of the catalog, and every combinator applied to one, has
//! this shape.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::geometry::Exhaustion;
use crate::matrix::small_hermitian_eigenvalues;

pub type FourierFn = Arc<dyn Fn(&[f64]) -> Mat<c64> + Send + Sync>;
pub type PhysicalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Stable identifiers accepted by [`catalog_get`].
pub const CATALOG: [&str; 8] =
    ["p1_1d", "fd_p1_2d", "q1_2d", "p2_2d", "q2_1d_stiffness", "q2_1d_mass", "q2_2d", "p1_2d_varcoeff"];

#[derive(Clone)]
pub struct MatrixSymbol {
    name: String,
    summary: String,
    d: usize,
    p: usize,
    phys_dim: usize,
    /// `even_flags[r]`: the eigenvalues are unchanged under `theta_r -> -theta_r`.
    even_flags: Vec<bool>,
    fourier: FourierFn,
    scale: f64,
    coefficient: Option<PhysicalFn>,
}

impl fmt::Debug for MatrixSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSymbol")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("p", &self.p)
            .field("phys_dim", &self.phys_dim)
            .field("scale", &self.scale)
            .finish()
    }
}

impl MatrixSymbol {
    /// A constant-coefficient symbol from its trigonometric part.
    pub fn from_fourier(
        name: impl Into<String>,
        d: usize,
        p: usize,
        even_flags: Vec<bool>,
        fourier: impl Fn(&[f64]) -> Mat<c64> + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(even_flags.len(), d);
        let name = name.into();
        MatrixSymbol {
            summary: name.clone(),
            name,
            d,
            p,
            phys_dim: 0,
            even_flags,
            fourier: Arc::new(fourier),
            scale: 1.0,
            coefficient: None,
        }
    }

    /// Multiplies by a scalar coefficient of `phys_dim` physical variables.
    pub fn with_coefficient(
        mut self,
        phys_dim: usize,
        coefficient: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let coefficient: PhysicalFn = match self.coefficient.take() {
            None => Arc::new(coefficient),
            Some(prev) => Arc::new(move |x: &[f64]| prev(x) * coefficient(x)),
        };
        self.coefficient = Some(coefficient);
        self.phys_dim = self.phys_dim.max(phys_dim);
        self
    }

    fn with_summary(mut self, summary: &str) -> Self {
        self.summary = summary.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn summary(&self) -> &str {
        &self.summary
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn even_flags(&self) -> &[bool] {
        &self.even_flags
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.phys_dim == 0
    }

    /// The scalar physical factor `s(x)`.
    pub fn physical_factor(&self, x: &[f64]) -> f64 {
        match &self.coefficient {
            Some(c) => self.scale * c(x),
            None => self.scale,
        }
    }

    /// The unscaled trigonometric part `g(theta)`.
    pub fn fourier_part(&self, theta: &[f64]) -> Mat<c64> {
        debug_assert_eq!(theta.len(), self.d);
        (self.fourier)(theta)
    }

    /// Ascending eigenvalues of `g(theta)`.
    pub fn fourier_eigenvalues(&self, theta: &[f64]) -> Vec<f64> {
        small_hermitian_eigenvalues(self.fourier_part(theta).as_ref())
    }

    /// `f(theta, x)`; `x` is ignored by constant-coefficient symbols.
    pub fn evaluate(&self, theta: &[f64], x: &[f64]) -> Mat<c64> {
        let s = self.physical_factor(x);
        let g = self.fourier_part(theta);
        Mat::from_fn(self.p, self.p, |i, j| g[(i, j)] * s)
    }

    /// Ascending eigenvalues of `f(theta, x)`.
    pub fn eigenvalues(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let s = self.physical_factor(x);
        let mut ev: Vec<f64> = self.fourier_eigenvalues(theta).into_iter().map(|v| s * v).collect();
        if s < 0.0 {
            ev.reverse();
        }
        ev
    }
}

/// Componentwise Hermitian defect `max |f_ij - conj(f_ji)|`.
pub fn hermitian_defect(m: &Mat<c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = m[(i, j)] - m[(j, i)].conj();
            worst = worst.max(d.norm());
        }
    }
    worst
}

fn re(v: f64) -> c64 {
    c64::new(v, 0.0)
}

fn expi(t: f64) -> c64 {
    c64::new(t.cos(), t.sin())
}

fn scalar(v: f64) -> Mat<c64> {
    Mat::from_fn(1, 1, |_, _| re(v))
}

/// Stiffness symbol of 1D quadratic elements, unknowns ordered (midpoint, vertex).
pub fn q2_stiffness_1d(theta: f64) -> Mat<c64> {
    let off = (re(-8.0) - expi(theta) * 8.0) / 3.0;
    let mut m = Mat::zeros(2, 2);
    m[(0, 0)] = re(16.0 / 3.0);
    m[(0, 1)] = off;
    m[(1, 0)] = off.conj();
    m[(1, 1)] = re((14.0 + 2.0 * theta.cos()) / 3.0);
    m
}

/// Mass symbol of 1D quadratic elements.
pub fn q2_mass_1d(theta: f64) -> Mat<c64> {
    let off = (re(1.0) + expi(theta)) / 15.0;
    let mut m = Mat::zeros(2, 2);
    m[(0, 0)] = re(8.0 / 15.0);
    m[(0, 1)] = off;
    m[(1, 0)] = off.conj();
    m[(1, 1)] = re((4.0 - theta.cos()) / 15.0);
    m
}

fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (p, q) = (a.nrows(), b.nrows());
    Mat::from_fn(p * q, p * q, |i, j| a[(i / q, j / q)] * b[(i % q, j % q)])
}

/// 4x4 symbol of P2 triangular elements with unknowns 1..3 on edge/cell
/// midpoints and unknown 4 on the vertex.
pub fn p2_symbol(theta1: f64, theta2: f64) -> Mat<c64> {
    const ALPHA: f64 = 16.0 / 3.0;
    const BETA: f64 = 4.0 / 3.0;
    const GAMMA: f64 = 4.0;
    let w1 = -(re(1.0) + expi(theta1)) * BETA;
    let w2 = -(re(1.0) + expi(theta2)) * BETA;
    let mut m = Mat::zeros(4, 4);
    for k in 0..3 {
        m[(k, k)] = re(ALPHA);
    }
    m[(3, 3)] = re(GAMMA + 0.5 * BETA * (theta1.cos() + theta2.cos()));
    let upper = [(0, 1, w1), (0, 2, w2), (1, 3, w2), (2, 3, w1)];
    for (i, j, v) in upper {
        m[(i, j)] = v;
        m[(j, i)] = v.conj();
    }
    m
}

/// Diffusion coefficient of the variable-coefficient experiments.
pub fn diffusion_coefficient(x: &[f64]) -> f64 {
    let (x, y) = (x[0], x[1]);
    let s = (x + y).sin();
    (10.0 + x * x + 2.0 * y * y + s * s) / (1.0 + x * x + y * y)
}

fn five_point(theta: &[f64]) -> f64 {
    4.0 - 2.0 * theta[0].cos() - 2.0 * theta[1].cos()
}

/// Looks up a catalog symbol by its stable identifier.
pub fn catalog_get(name: &str) -> Result<MatrixSymbol> {
    let sym = match name {
        "p1_1d" => MatrixSymbol::from_fourier(name, 1, 1, vec![true], |t| scalar(2.0 - 2.0 * t[0].cos()))
            .with_summary("1 level, scalar, P1 elements on an interval"),
        "fd_p1_2d" => MatrixSymbol::from_fourier(name, 2, 1, vec![true; 2], |t| scalar(five_point(t)))
            .with_summary("2 levels, scalar, 5-point finite differences / P1 elements"),
        "q1_2d" => MatrixSymbol::from_fourier(name, 2, 1, vec![true; 2], |t| {
            let (c1, c2) = (t[0].cos(), t[1].cos());
            scalar((8.0 - 2.0 * c1 - 2.0 * c2 - 4.0 * c1 * c2) / 3.0)
        })
        .with_summary("2 levels, scalar, Q1 bilinear elements"),
        "p2_2d" => MatrixSymbol::from_fourier(name, 2, 4, vec![true; 2], |t| p2_symbol(t[0], t[1]))
            .with_summary("2 levels, 4x4 blocks, P2 triangular elements"),
        "q2_1d_stiffness" => MatrixSymbol::from_fourier(name, 1, 2, vec![true], |t| q2_stiffness_1d(t[0]))
            .with_summary("1 level, 2x2 blocks, Q2 stiffness on an interval"),
        "q2_1d_mass" => MatrixSymbol::from_fourier(name, 1, 2, vec![true], |t| q2_mass_1d(t[0]))
            .with_summary("1 level, 2x2 blocks, Q2 mass on an interval"),
        "q2_2d" => MatrixSymbol::from_fourier(name, 2, 4, vec![true; 2], |t| {
            let a = kron(&q2_stiffness_1d(t[0]), &q2_mass_1d(t[1]));
            let b = kron(&q2_mass_1d(t[0]), &q2_stiffness_1d(t[1]));
            Mat::from_fn(4, 4, |i, j| a[(i, j)] + b[(i, j)])
        })
        .with_summary("2 levels, 4x4 blocks, Q2 tensor-product elements"),
        "p1_2d_varcoeff" => MatrixSymbol::from_fourier(name, 2, 1, vec![true; 2], |t| scalar(five_point(t)))
            .with_coefficient(2, diffusion_coefficient)
            .with_summary("2 levels, scalar, P1 elements times a(x,y) on the physical domain"),
        _ => {
            return Err(Error::UnknownSymbol {
                name: name.to_string(),
                valid: CATALOG.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(sym)
}

/// Closed-form eigenvalue pairs `(lambda_1, lambda_2)`, larger first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Q2Branches {
    pub stiffness: (f64, f64),
    pub mass: (f64, f64),
}

pub fn q2_eigenvalue_branches(theta: f64) -> Q2Branches {
    let c = theta.cos();
    let rs = (129.0 + 126.0 * c + c * c).sqrt() / 3.0;
    let rm = (24.0 + 16.0 * c + c * c).sqrt() / 30.0;
    let ms = 5.0 + c / 3.0;
    let mm = 0.4 - c / 30.0;
    Q2Branches { stiffness: (ms + rs, ms - rs), mass: (mm + rm, mm - rm) }
}

/// `c * f`, pointwise.
pub fn scale_symbol(f: &MatrixSymbol, c: f64) -> MatrixSymbol {
    let mut g = f.clone();
    g.scale *= c;
    g.name = format!("{c}*{}", f.name);
    g.summary = format!("{c} times {}", f.summary);
    g
}

/// `f` inside an exhaustion member `Omega_t`, the zero matrix outside.
#[derive(Clone, Debug)]
pub struct ExtendedSymbol {
    base: MatrixSymbol,
    support: Exhaustion,
}

pub fn extend_symbol(f: &MatrixSymbol, support: Exhaustion) -> ExtendedSymbol {
    ExtendedSymbol { base: f.clone(), support }
}

impl ExtendedSymbol {
    pub fn base(&self) -> &MatrixSymbol {
        &self.base
    }

    pub fn support(&self) -> &Exhaustion {
        &self.support
    }

    pub fn evaluate(&self, theta: &[f64], x: &[f64]) -> Mat<c64> {
        if self.support.contains(x[0], x[1]) {
            self.base.evaluate(theta, x)
        } else {
            Mat::zeros(self.base.p, self.base.p)
        }
    }

    /// The extension as an ordinary symbol with two physical variables.
    pub fn to_symbol(&self) -> MatrixSymbol {
        let ex = self.support;
        let mut s = self.base.clone().with_coefficient(2, move |x| if ex.contains(x[0], x[1]) { 1.0 } else { 0.0 });
        s.name = format!("{}^E(t={})", self.base.name, ex.t());
        s.summary = format!("{} restricted to Omega_t, t={}", self.base.summary, ex.t());
        s
    }
}

/// Uniform midpoint nodes on `[-pi, pi]` or, for even directions, `[0, pi]`.
pub(crate) fn fourier_nodes(even: bool, m: usize) -> (Vec<f64>, f64) {
    let (lo, hi) = if even { (0.0, PI) } else { (-PI, PI) };
    let step = (hi - lo) / m as f64;
    ((0..m).map(|k| lo + (k as f64 + 0.5) * step).collect(), step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn catalog_dimensions() {
        let expected = [
            ("p1_1d", 1, 1, 0),
            ("fd_p1_2d", 2, 1, 0),
            ("q1_2d", 2, 1, 0),
            ("p2_2d", 2, 4, 0),
            ("q2_1d_stiffness", 1, 2, 0),
            ("q2_1d_mass", 1, 2, 0),
            ("q2_2d", 2, 4, 0),
            ("p1_2d_varcoeff", 2, 1, 2),
        ];
        for (name, d, p, phys) in expected {
            let s = catalog_get(name).unwrap();
            assert_eq!((s.d(), s.p(), s.phys_dim()), (d, p, phys), "{name}");
            let theta = vec![0.3; d];
            let x = [0.2, 0.4];
            assert_eq!(s.evaluate(&theta, &x).nrows(), p);
        }
    }

    #[test]
    fn unknown_name_lists_catalog() {
        let err = catalog_get("p3_2d").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p3_2d"));
        for name in CATALOG {
            assert!(msg.contains(name));
        }
    }

    #[test]
    fn p1_at_pi() {
        let s = catalog_get("p1_1d").unwrap();
        assert!(close(s.evaluate(&[PI], &[])[(0, 0)].re, 4.0, 1e-15));
    }

    #[test]
    fn p2_at_origin() {
        let m = catalog_get("p2_2d").unwrap().evaluate(&[0.0, 0.0], &[]);
        let a = 16.0 / 3.0;
        let b = -8.0 / 3.0;
        let expected = [[a, b, b, 0.0], [b, a, 0.0, b], [b, 0.0, a, b], [0.0, b, b, a]];
        for i in 0..4 {
            for j in 0..4 {
                assert!(close(m[(i, j)].re, expected[i][j], 1e-14), "({i},{j})");
                assert!(m[(i, j)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn q2_stiffness_at_zero() {
        let m = catalog_get("q2_1d_stiffness").unwrap().evaluate(&[0.0], &[]);
        let expected = [[16.0, -16.0], [-16.0, 16.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(m[(i, j)].re, expected[i][j] / 3.0, 1e-14));
            }
        }
    }

    #[test]
    fn q2_mass_at_zero() {
        let m = q2_mass_1d(0.0);
        let expected = [[8.0, 2.0], [2.0, 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(m[(i, j)].re, expected[i][j] / 15.0, 1e-15));
            }
        }
    }

    #[test]
    fn varcoeff_uses_diffusion_coefficient() {
        let s = catalog_get("p1_2d_varcoeff").unwrap();
        // a(0,0) = 10
        assert!(close(s.evaluate(&[PI, PI], &[0.0, 0.0])[(0, 0)].re, 80.0, 1e-12));
        let x = [1.5, 0.25];
        let a = (10.0 + 2.25 + 2.0 * 0.0625 + (1.75f64).sin().powi(2)) / (1.0 + 2.25 + 0.0625);
        assert!(close(diffusion_coefficient(&x), a, 1e-14));
    }

    #[test]
    fn q2_branches_at_special_points() {
        let b0 = q2_eigenvalue_branches(0.0);
        assert!(close(b0.stiffness.0, 32.0 / 3.0, 1e-12));
        assert!(close(b0.stiffness.1, 0.0, 1e-12));
        let bpi = q2_eigenvalue_branches(PI);
        assert!(close(bpi.stiffness.0, 16.0 / 3.0, 1e-12));
        assert!(close(bpi.stiffness.1, 4.0, 1e-12));
        // h2(0) = [[8,2],[2,3]]/15 by a direct 2x2 solve: (11 +- sqrt(41)) / 30
        let sq = 41f64.sqrt();
        assert!(close(b0.mass.0, (11.0 + sq) / 30.0, 1e-12));
        assert!(close(b0.mass.1, (11.0 - sq) / 30.0, 1e-12));
    }

    #[test]
    fn q2_branches_match_dense_eigensolve() {
        for k in 0..=64 {
            let t = -PI + 2.0 * PI * k as f64 / 64.0;
            let b = q2_eigenvalue_branches(t);
            let mut sv = q2_stiffness_1d(t).self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
            let mut mv = q2_mass_1d(t).self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
            sv.sort_by(f64::total_cmp);
            mv.sort_by(f64::total_cmp);
            assert!(close(b.stiffness.0, sv[1], 1e-12) && close(b.stiffness.1, sv[0], 1e-12));
            assert!(close(b.mass.0, mv[1], 1e-12) && close(b.mass.1, mv[0], 1e-12));
            // lambda_2 * lambda_1 = (16/3)(2 - 2 cos)
            let prod = b.stiffness.0 * b.stiffness.1;
            assert!(close(prod, 16.0 / 3.0 * (2.0 - 2.0 * t.cos()), 1e-10));
        }
    }

    #[test]
    fn hermitian_and_even_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in CATALOG {
            let s = catalog_get(name).unwrap();
            for _ in 0..1000 {
                let theta: Vec<f64> = (0..s.d()).map(|_| rng.random_range(-PI..PI)).collect();
                let x = [rng.random_range(0.0..5.0), rng.random_range(0.0..1.0)];
                let f = s.evaluate(&theta, &x);
                assert!(hermitian_defect(&f) <= 1e-12, "{name}");
                let ev = s.eigenvalues(&theta, &x);
                for r in 0..s.d() {
                    if !s.even_flags()[r] {
                        continue;
                    }
                    let mut flipped = theta.clone();
                    flipped[r] = -flipped[r];
                    let ev2 = s.eigenvalues(&flipped, &x);
                    for (a, b) in ev.iter().zip(&ev2) {
                        assert!(close(*a, *b, 1e-12), "{name} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn scalar_symbols_are_entrywise_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for name in ["p1_1d", "fd_p1_2d", "q1_2d", "p1_2d_varcoeff"] {
            let s = catalog_get(name).unwrap();
            for _ in 0..200 {
                let theta: Vec<f64> = (0..s.d()).map(|_| rng.random_range(-PI..PI)).collect();
                let x = [1.0, 0.5];
                for r in 0..s.d() {
                    let mut flipped = theta.clone();
                    flipped[r] = -flipped[r];
                    let a = s.evaluate(&theta, &x)[(0, 0)];
                    let b = s.evaluate(&flipped, &x)[(0, 0)];
                    assert!((a - b).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn p2_has_one_vanishing_branch() {
        let s = catalog_get("p2_2d").unwrap();
        let m = 64;
        let mut mins = [f64::INFINITY; 4];
        for i in 0..=m {
            for j in 0..=m {
                let t = [-PI + 2.0 * PI * i as f64 / m as f64, -PI + 2.0 * PI * j as f64 / m as f64];
                let ev = s.eigenvalues(&t, &[]);
                for k in 0..4 {
                    mins[k] = mins[k].min(ev[k]);
                }
            }
        }
        let origin = s.eigenvalues(&[0.0, 0.0], &[]);
        assert!(origin[0].abs() < 1e-12);
        assert!(origin[1] > 1.0);
        for k in 1..4 {
            assert!(mins[k] >= 2.0, "branch {k} min {}", mins[k]);
        }
    }

    #[test]
    fn q2_2d_is_kronecker_sum_of_products() {
        let s = catalog_get("q2_2d").unwrap();
        let (t1, t2) = (0.7, -2.1);
        let f = s.evaluate(&[t1, t2], &[]);
        let (a, b) = (q2_stiffness_1d(t1), q2_mass_1d(t2));
        let (c, d) = (q2_mass_1d(t1), q2_stiffness_1d(t2));
        for i in 0..4 {
            for j in 0..4 {
                let (i1, i2, j1, j2) = (i / 2, i % 2, j / 2, j % 2);
                let expected = a[(i1, j1)] * b[(i2, j2)] + c[(i1, j1)] * d[(i2, j2)];
                assert!((f[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn scaling_and_extension() {
        let p1 = catalog_get("p1_1d").unwrap();
        let same = scale_symbol(&p1, 1.0);
        for t in [-2.0, 0.1, 3.0] {
            assert_eq!(same.evaluate(&[t], &[])[(0, 0)], p1.evaluate(&[t], &[])[(0, 0)]);
        }
        let half = scale_symbol(&p1, 1.0 - 1.0 / 2.0);
        assert!(close(half.evaluate(&[PI], &[])[(0, 0)].re, 2.0, 1e-15));

        let fd = catalog_get("fd_p1_2d").unwrap();
        let ext = extend_symbol(&fd, Exhaustion::new(2.0).unwrap());
        let outside = ext.evaluate(&[1.0, 1.0], &[5.0, 0.01]);
        assert_eq!(outside[(0, 0)], c64::new(0.0, 0.0));
        let inside = ext.evaluate(&[1.0, 1.0], &[0.5, 0.5]);
        assert_eq!(inside[(0, 0)], fd.evaluate(&[1.0, 1.0], &[])[(0, 0)]);
        let as_sym = ext.to_symbol();
        assert_eq!(as_sym.phys_dim(), 2);
        assert_eq!(as_sym.eigenvalues(&[1.0, 1.0], &[5.0, 0.01]), vec![0.0]);
    }
}
