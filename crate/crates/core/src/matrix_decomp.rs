//! Sphere representations of quadratic-form symbols.
//!
//! A complex symmetric `A` is written as `(Aξ,ξ) = scale · Σ_k λ_k (ξ,a_k)² m_k`
//! with `Σ_k (ξ,a_k)² m_k = |ξ|²` and `|λ_k| ≤ 1`. When `Re A` and `Im A`
//! commute a single joint eigenbasis suffices; otherwise the two parts are
//! diagonalized separately, each with mass ½, which doubles the scale.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::{Atom, JumpModulator, SpectralMeasure, SphericalPair};
use crate::quadrature::QuadOptions;
use crate::rng::{StreamKey, StreamPurpose};
use crate::symbol::{Symbol, SYMMETRY_TOLERANCE};
use crate::vector::dot;

/// Relative Frobenius size of `[Re A, Im A]` below which the parts are treated as commuting.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-10;
/// Largest off-diagonal entry allowed after joint diagonalization, relative to `‖A‖_F`.
pub const DIAGONAL_TOLERANCE: f64 = 1e-10;

/// A complex matrix as JSON: `{"re": [[…]], "im": [[…]]}`; `im` may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<Vec<f64>>,
}

impl ComplexMatrix {
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = self.re.len();
        if self.re.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("\"re\" must be a square array".into()));
        }
        if !self.im.is_empty() && (self.im.len() != n || self.im.iter().any(|r| r.len() != n)) {
            return Err(Error::InvalidInput("\"im\" must match the shape of \"re\"".into()));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
            Complex64::new(self.re[i][j], im)
        }))
    }

    pub fn from_matrix(a: &DMatrix<Complex64>) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..a.nrows())
                .map(|i| (0..a.ncols()).map(|j| f(&a[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Real part only, as a real matrix.
    pub fn to_real_matrix(&self) -> Result<DMatrix<f64>> {
        Ok(self.to_matrix()?.map(|z| z.re))
    }
}

/// The matrix with `A e₁ = -e₂`, `A e₂ = -e₁` and zeros elsewhere, giving `-2ξ₁ξ₂/|ξ|²`.
pub fn riesz_matrix(dim: usize) -> DMatrix<Complex64> {
    assert!(dim >= 2);
    let mut a = DMatrix::zeros(dim, dim);
    a[(0, 1)] = Complex64::new(-1.0, 0.0);
    a[(1, 0)] = Complex64::new(-1.0, 0.0);
    a
}

/// `[[1, -i], [-i, -1]]`, giving `(ξ₁ - iξ₂)²/|ξ|²`.
pub fn beurling_ahlfors_matrix() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Normal,
    Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub pair: SphericalPair,
    pub branch: Branch,
    /// `(Aξ,ξ) = scale · Σ λ_k (ξ,a_k)² m_k`.
    pub scale: f64,
    /// `‖[Re A, Im A]‖_F`.
    pub commutator_norm: f64,
    /// `sup_{ξ real} |Aξ|/|ξ|`.
    pub real_operator_norm: f64,
}

impl Decomposition {
    /// `Σ λ_k (ξ,a_k)² m_k`, which equals `(Aξ,ξ)/scale`.
    pub fn form(&self, xi: &[f64]) -> Complex64 {
        self.pair.quadratic_parts(xi).0
    }

    /// `Σ (ξ,a_k)² m_k`, which equals `|ξ|²`.
    pub fn resolution(&self, xi: &[f64]) -> f64 {
        self.pair.quadratic_parts(xi).1
    }

    /// General symbol of `(V = 0, μ, ϕ)`, multiplied by `scale`: `(Aξ,ξ)/|ξ|²`.
    pub fn symbol(&self, opts: &QuadOptions) -> Result<Symbol> {
        Ok(Symbol::general(None, &JumpModulator::one(), &self.pair, opts)?.scaled(self.scale))
    }
}

pub fn decompose(a: &DMatrix<Complex64>, operator_norm_bound: f64) -> Result<Decomposition> {
    let d = a.nrows();
    if d == 0 || a.ncols() != d {
        return Err(Error::InvalidInput(format!("A must be square, got {}×{}", a.nrows(), a.ncols())));
    }
    let asym = (a - a.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    let re = a.map(|z| z.re);
    let im = a.map(|z| z.im);
    let re = (&re + re.transpose()) * 0.5;
    let im = (&im + im.transpose()) * 0.5;

    // |Aξ|² = |Re A ξ|² + |Im A ξ|² for real ξ
    let gram = re.transpose() * &re + im.transpose() * &im;
    let real_operator_norm = SymmetricEigen::new(gram).eigenvalues.max().max(0.0).sqrt();
    if real_operator_norm > operator_norm_bound * (1.0 + 1e-9) {
        return Err(Error::NormBoundViolated {
            found: real_operator_norm,
            bound: operator_norm_bound,
        });
    }

    let a_fro = a.map(|z| z.norm()).norm();
    let commutator_norm = (&re * &im - &im * &re).norm();
    if commutator_norm < COMMUTATOR_TOLERANCE * a_fro * a_fro {
        if let Some(basis) = joint_basis(&re, &im, a_fro) {
            let lambdas: Vec<Complex64> = (0..d)
                .map(|k| {
                    let v = basis.column(k);
                    Complex64::new((v.transpose() * &re * v)[(0, 0)], (v.transpose() * &im * v)[(0, 0)])
                })
                .collect();
            let c = lambdas.iter().map(|l| l.norm()).fold(1.0, f64::max);
            let atoms = (0..d)
                .map(|k| Atom::new(basis.column(k).iter().copied().collect(), 1.0))
                .collect();
            let pair = SphericalPair::new(
                SpectralMeasure::atoms(atoms)?,
                lambdas.iter().map(|l| l / c).collect(),
                false,
            )?;
            return Ok(Decomposition {
                pair,
                branch: Branch::Normal,
                scale: c,
                commutator_norm,
                real_operator_norm,
            });
        }
    }

    let er = SymmetricEigen::new(re.clone());
    let ei = SymmetricEigen::new(im.clone());
    let c = er.eigenvalues.amax().max(ei.eigenvalues.amax()).max(1.0);
    let mut atoms = Vec::with_capacity(2 * d);
    let mut values = Vec::with_capacity(2 * d);
    for k in 0..d {
        atoms.push(Atom::new(unit(er.eigenvectors.column(k).iter().copied().collect()), 0.5));
        values.push(Complex64::new(er.eigenvalues[k] / c, 0.0));
    }
    for k in 0..d {
        atoms.push(Atom::new(unit(ei.eigenvectors.column(k).iter().copied().collect()), 0.5));
        values.push(Complex64::new(0.0, ei.eigenvalues[k] / c));
    }
    let pair = SphericalPair::new(SpectralMeasure::atoms(atoms)?, values, false)?;
    Ok(Decomposition {
        pair,
        branch: Branch::Split,
        scale: 2.0 * c,
        commutator_norm,
        real_operator_norm,
    })
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Orthonormal basis diagonalizing both `re` and `im`, via `re + c·im` for generic `c`.
fn joint_basis(re: &DMatrix<f64>, im: &DMatrix<f64>, a_fro: f64) -> Option<DMatrix<f64>> {
    let mut rng = StreamKey::new(0x5eed, StreamPurpose::Parameters).stream(0);
    for _ in 0..8 {
        let c: f64 = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let eig = SymmetricEigen::new(re + im * c);
        let q = eig.eigenvectors;
        let dr = q.transpose() * re * &q;
        let di = q.transpose() * im * &q;
        let off = |m: &DMatrix<f64>| {
            let mut worst: f64 = 0.0;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if i != j {
                        worst = worst.max(m[(i, j)].abs());
                    }
                }
            }
            worst
        };
        if off(&dr).max(off(&di)) <= DIAGONAL_TOLERANCE * a_fro.max(1.0) {
            return Some(q);
        }
    }
    None
}

/// Four atoms `1, i, e^{iπ/4}, e^{-iπ/4}` of mass ¼ with `ϕ = 2, -2, -2i, 2i`.
///
/// The general symbol of this pair is exactly `e^{-2i arg ξ}`.
pub fn beurling_ahlfors_atoms() -> SphericalPair {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let spectral = SpectralMeasure::Atoms(vec![
        Atom::new(vec![1.0, 0.0], 0.25),
        Atom::new(vec![0.0, 1.0], 0.25),
        Atom::new(vec![h, h], 0.25),
        Atom::new(vec![h, -h], 0.25),
    ]);
    SphericalPair::new(
        spectral,
        vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(0.0, 2.0),
        ],
        true,
    )
    .expect("fixed pair is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `∫ μ(ds)`.
    pub mass: f64,
    /// `∫ e^{2is} ϕ(s) μ(ds)`.
    pub second_coefficient: Complex64,
    /// Max over 360 angles of `|Σ(ξ,θ)²ϕμ - e^{-2i arg ξ} Σ(ξ,θ)²μ| / Σ(ξ,θ)²μ`.
    pub representation_error: f64,
    /// The pair reproduces `e^{-2i arg ξ}` within `1e-8`.
    pub represents_beurling_ahlfors: bool,
    /// `|¼ ∫e^{2is}ϕμ - ½ ∫μ| ≤ 1e-8 ∫μ`.
    pub coefficient_identity_holds: bool,
    /// `|∫e^{2is}ϕμ| / ∫μ`, a lower bound for `‖ϕ‖∞`.
    pub implied_lower_bound: f64,
    pub max_modulus: f64,
    /// False only if the pair represents the symbol while `max|ϕ| < 2 - 1e-9`.
    pub pass: bool,
}

pub fn c2_certificate(pair: &SphericalPair) -> Result<CertificateReport> {
    let dim = pair.dim().ok_or(Error::EmptySpectral)?;
    if dim != 2 {
        return Err(Error::NotPlanar(dim));
    }
    if pair.is_empty() {
        return Err(Error::EmptySpectral);
    }
    let mut mass = 0.0;
    let mut coefficient = Complex64::new(0.0, 0.0);
    for (theta, m, phi) in pair.iter() {
        let s = theta[1].atan2(theta[0]);
        mass += m;
        coefficient += Complex64::from_polar(m, 2.0 * s) * phi;
    }
    let mut representation_error: f64 = 0.0;
    for k in 0..360 {
        let t = 2.0 * PI * k as f64 / 360.0;
        let xi = [t.cos(), t.sin()];
        let (num, den) = pair.quadratic_parts(&xi);
        let target = Complex64::from_polar(den, -2.0 * t);
        representation_error = representation_error.max((num - target).norm() / den);
    }
    let represents = representation_error < 1e-8;
    let identity = (coefficient * 0.25 - mass * 0.5).norm() <= 1e-8 * mass;
    let max_modulus = pair.max_modulus();
    Ok(CertificateReport {
        mass,
        second_coefficient: coefficient,
        representation_error,
        represents_beurling_ahlfors: represents,
        coefficient_identity_holds: identity,
        implied_lower_bound: coefficient.norm() / mass,
        max_modulus,
        pass: !represents || max_modulus >= 2.0 - 1e-9,
    })
}
