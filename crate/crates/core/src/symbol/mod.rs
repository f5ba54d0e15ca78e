//! Multiplier symbols `M: ℝᵈ → ℂ`.
//!
//! The general symbol of a Lévy triple `(V, φ, (μ, ϕ))` is
//!
//! ```text
//!          ∫ (1 - cos(ξ,z)) φ(z) V(dz) + ½ ∫ (ξ,θ)² ϕ(θ) μ(dθ)
//! M(ξ) = ------------------------------------------------------
//!          ∫ (1 - cos(ξ,z))      V(dz) + ½ ∫ (ξ,θ)²      μ(dθ)
//! ```
//!
//! with `M(ξ) = 0` where the denominator vanishes. A denominator counts as
//! zero when it is below `1e-14` times a reference size of the same
//! integral (see [`CosineParts::scale`]).

mod closed_form;
mod config;
mod limit;

pub use closed_form::{
    beta_identity, beurling_ahlfors, laplace_one_minus_cos_over_x, marcinkiewicz, riesz_product,
    stable_circle, tempered_coordinate, BetaIdentity,
};
pub use config::{circle_points, SymbolConfig};
pub use limit::{sphere_limit_check, ConvergenceReport};

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::{
    CosineEvaluator, CosineParts, JumpModulator, LevyMeasure, SpectralMeasure, SphericalPair,
};
use crate::quadrature::QuadOptions;
use crate::vector::{dot, norm_sq, planar_angle};

/// Relative size below which a denominator is treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-14;
/// Projections `|(ξ,θ)|` below this make the logarithmic kernel infinite.
pub const LOG_KERNEL_ZERO: f64 = 1e-150;
/// Symmetry tolerance for matrix inputs.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    General,
    QuadraticForm,
    Stable,
    Marcinkiewicz,
    Tempered,
    Ratio,
    BeurlingAhlfors,
    Truncated { u: f64 },
    ClosedForm,
}

/// Numerator and denominator of a ratio-type symbol at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPieces {
    pub numerator: Complex64,
    pub denominator: f64,
}

type ClosedFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    General {
        jump: Option<CosineEvaluator>,
        pair: SphericalPair,
    },
    QuadraticForm {
        a: DMatrix<Complex64>,
        b: DMatrix<f64>,
        b_norm: f64,
    },
    Stable {
        alpha: f64,
        pair: SphericalPair,
    },
    Tempered {
        pair: SphericalPair,
    },
    Ratio {
        nu1: CosineEvaluator,
        nu2: CosineEvaluator,
    },
    Truncated {
        jump: CosineEvaluator,
        u: f64,
    },
    Closed(ClosedFn),
}

/// An evaluable symbol with its dimension, provenance and a declared sup-norm bound.
#[derive(Clone)]
pub struct Symbol {
    kind: Kind,
    dim: usize,
    provenance: Provenance,
    bound: f64,
    scale: f64,
    opts: QuadOptions,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .field("bound", &self.bound)
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl Symbol {
    /// Symbol of `(V, φ, (μ, ϕ))`. `V = None` (or a zero measure) drops the jump part.
    pub fn general(
        v: Option<&LevyMeasure>,
        phi: &JumpModulator,
        pair: &SphericalPair,
        opts: &QuadOptions,
    ) -> Result<Self> {
        let jump = match v {
            Some(v) if !v.is_zero() => Some(CosineEvaluator::new(v, phi, opts)?),
            _ => None,
        };
        let dim = match (&jump, pair.dim()) {
            (Some(j), Some(d)) if j.dim() != d => {
                return Err(Error::DimensionMismatch {
                    expected: j.dim(),
                    found: d,
                })
            }
            (Some(j), _) => j.dim(),
            (None, Some(d)) => d,
            (None, None) => v.map(|v| v.dim()).unwrap_or(0),
        };
        if dim == 0 {
            return Err(Error::InvalidInput("cannot infer the dimension of an empty symbol".into()));
        }
        let bound = if pair.is_empty() { 1.0 } else { pair.max_modulus().max(1.0) };
        Ok(Self::from_kind(
            Kind::General {
                jump,
                pair: pair.clone(),
            },
            dim,
            Provenance::General,
            bound,
            opts,
        ))
    }

    /// `(Aξ,ξ)/(Bξ,ξ)` with the bilinear pairing; `B = None` means the identity.
    pub fn quadratic_form(a: &DMatrix<Complex64>, b: Option<&DMatrix<f64>>) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || d == 0 {
            return Err(Error::InvalidInput(format!("A must be square, got {}×{}", a.nrows(), a.ncols())));
        }
        let b = b.cloned().unwrap_or_else(|| DMatrix::identity(d, d));
        if b.nrows() != d || b.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: b.nrows(),
            });
        }
        let asym_a = (a - a.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let asym_b = (&b - b.transpose()).amax();
        if asym_a > SYMMETRY_TOLERANCE || asym_b > SYMMETRY_TOLERANCE {
            return Err(Error::AsymmetricInput(asym_a.max(asym_b)));
        }
        let eig = SymmetricEigen::new(b.clone());
        let b_norm = eig.eigenvalues.amax();
        let b_min = eig.eigenvalues.min();
        if b_min < -SYMMETRY_TOLERANCE * b_norm.max(1.0) {
            return Err(Error::InvalidInput(format!("B is not nonnegative definite (eigenvalue {b_min})")));
        }
        let a_norm = a.map(|z| z.norm()).norm();
        let bound = if b_min > 0.0 { a_norm / b_min } else { f64::INFINITY };
        Ok(Self::from_kind(
            Kind::QuadraticForm {
                a: a.clone(),
                b,
                b_norm,
            },
            d,
            Provenance::QuadraticForm,
            bound,
            &QuadOptions::default(),
        ))
    }

    /// `∫ |(ξ,θ)|^α ϕ dσ / ∫ |(ξ,θ)|^α dσ`.
    pub fn stable(alpha: f64, pair: &SphericalPair, opts: &QuadOptions) -> Result<Self> {
        LevyMeasure::stable(alpha, pair.spectral().clone())?;
        let dim = nonempty_dim(pair)?;
        Ok(Self::from_kind(
            Kind::Stable {
                alpha,
                pair: pair.clone(),
            },
            dim,
            Provenance::Stable,
            pair.max_modulus().max(1.0),
            opts,
        ))
    }

    /// Stable symbol with σ on the coordinate directions and `ϕ = 1_{e_j}`:
    /// `|ξ_j|^α / Σ_k |ξ_k|^α`.
    pub fn marcinkiewicz(alpha: f64, dim: usize, index: usize, opts: &QuadOptions) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidInput(format!("coordinate {index} out of range for dimension {dim}")));
        }
        let values = (0..dim)
            .map(|k| Complex64::new(if k == index { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let pair = SphericalPair::new(SpectralMeasure::coordinate_directions(dim), values, false)?;
        let mut s = Self::stable(alpha, &pair, opts)?;
        s.provenance = Provenance::Marcinkiewicz;
        Ok(s)
    }

    /// `∫ ln(1 + (ξ,θ)^{-2}) ϕ dσ / ∫ ln(1 + (ξ,θ)^{-2}) dσ`.
    ///
    /// Directions with `|(ξ,θ)| < 1e-150` carry an infinite weight; when any
    /// are present they alone determine the value.
    pub fn tempered(pair: &SphericalPair, opts: &QuadOptions) -> Result<Self> {
        let dim = nonempty_dim(pair)?;
        Ok(Self::from_kind(
            Kind::Tempered { pair: pair.clone() },
            dim,
            Provenance::Tempered,
            pair.max_modulus().max(1.0),
            opts,
        ))
    }

    /// `∫ (1 - cos(ξ,z)) ν₁(dz) / ∫ (1 - cos(ξ,z)) ν₂(dz)` for `ν₁ ≤ ν₂`.
    pub fn ratio(nu1: &LevyMeasure, nu2: &LevyMeasure, opts: &QuadOptions) -> Result<Self> {
        check_domination(nu1, nu2)?;
        let one = JumpModulator::one();
        Ok(Self::from_kind(
            Kind::Ratio {
                nu1: CosineEvaluator::new(nu1, &one, opts)?,
                nu2: CosineEvaluator::new(nu2, &one, opts)?,
            },
            nu2.dim(),
            Provenance::Ratio,
            1.0,
            opts,
        ))
    }

    /// `M_u(ξ) = M(ξ)(1 - e^{2u Re Ψ(ξ)})` for a finite `V`, where `M` is the
    /// modulated cosine ratio of `(V, φ)`.
    pub fn truncated(v: &LevyMeasure, phi: &JumpModulator, u: f64, opts: &QuadOptions) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {u}")));
        }
        if !v.total_mass(opts)?.is_finite() {
            return Err(Error::InfiniteMass);
        }
        Ok(Self::from_kind(
            Kind::Truncated {
                jump: CosineEvaluator::new(v, phi, opts)?,
                u,
            },
            v.dim(),
            Provenance::Truncated { u },
            1.0,
            opts,
        ))
    }

    /// Wraps a closed-form evaluator.
    pub fn from_fn<F>(dim: usize, provenance: Provenance, bound: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::from_kind(Kind::Closed(Arc::new(f)), dim, provenance, bound, &QuadOptions::default())
    }

    /// The constant symbol `c`.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::from_fn(dim, Provenance::ClosedForm, c.norm(), move |_| c)
    }

    fn from_kind(kind: Kind, dim: usize, provenance: Provenance, bound: f64, opts: &QuadOptions) -> Self {
        Self {
            kind,
            dim,
            provenance,
            bound,
            scale: 1.0,
            opts: *opts,
        }
    }

    /// Multiplies the symbol by a positive constant (and its bound accordingly).
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self.bound *= factor.abs();
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Declared bound on `sup |M|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn quad_options(&self) -> &QuadOptions {
        &self.opts
    }

    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        let v = match &self.kind {
            Kind::Closed(f) => f(xi),
            Kind::Truncated { jump, u } => {
                let p = jump.eval(xi)?;
                if is_zero(p.denominator, p.scale) {
                    Complex64::new(0.0, 0.0)
                } else {
                    // Re Ψ(ξ) = -∫(1 - cos(ξ,z)) V(dz) for finite V
                    let damping = -(-2.0 * u * p.denominator).exp_m1();
                    p.numerator / p.denominator * damping
                }
            }
            _ => {
                let (pieces, scale) = self.raw_pieces(xi)?;
                if is_zero(pieces.denominator, scale) {
                    Complex64::new(0.0, 0.0)
                } else {
                    pieces.numerator / pieces.denominator
                }
            }
        };
        Ok(v * self.scale)
    }

    /// Numerator and denominator, for ratio-type symbols.
    pub fn pieces(&self, xi: &[f64]) -> Result<SymbolPieces> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        let (p, _) = self.raw_pieces(xi)?;
        Ok(SymbolPieces {
            numerator: p.numerator * self.scale,
            denominator: p.denominator,
        })
    }

    fn raw_pieces(&self, xi: &[f64]) -> Result<(SymbolPieces, f64)> {
        let xi2 = norm_sq(xi);
        match &self.kind {
            Kind::General { jump, pair } => {
                let j = match jump {
                    Some(e) => e.eval(xi)?,
                    None => CosineParts::ZERO,
                };
                let (qn, qd) = pair.quadratic_parts(xi);
                let scale = j.scale + 0.5 * xi2 * pair.spectral().total_mass();
                Ok((
                    SymbolPieces {
                        numerator: j.numerator + qn * 0.5,
                        denominator: j.denominator + 0.5 * qd,
                    },
                    scale,
                ))
            }
            Kind::QuadraticForm { a, b, b_norm } => {
                let mut num = Complex64::new(0.0, 0.0);
                let mut den = 0.0;
                for k in 0..self.dim {
                    for l in 0..self.dim {
                        let w = xi[k] * xi[l];
                        num += a[(k, l)] * w;
                        den += b[(k, l)] * w;
                    }
                }
                Ok((
                    SymbolPieces {
                        numerator: num,
                        denominator: den,
                    },
                    b_norm * xi2,
                ))
            }
            Kind::Stable { alpha, pair } => {
                let scale = xi2.sqrt().powf(*alpha) * pair.spectral().total_mass();
                if xi2 == 0.0 {
                    return Ok((zero_pieces(), scale));
                }
                let a = *alpha;
                let pieces = if let Some(circle) = pair.spectral().as_circle() {
                    let r = xi2.sqrt().powf(a);
                    let w = circle.arc_integrals(planar_angle(xi), |c| c.abs().powf(a), &self.opts)?;
                    weighted_sum(&w, pair.modulator(), r)
                } else {
                    directional_sum(pair, xi, |s| s.abs().powf(a))
                };
                Ok((pieces, scale))
            }
            Kind::Tempered { pair } => Ok(tempered_pieces(pair, xi, &self.opts)?),
            Kind::Ratio { nu1, nu2 } => {
                let p1 = nu1.eval(xi)?;
                let p2 = nu2.eval(xi)?;
                Ok((
                    SymbolPieces {
                        numerator: Complex64::new(p1.denominator.min(p2.denominator), 0.0),
                        denominator: p2.denominator,
                    },
                    p2.scale,
                ))
            }
            Kind::Truncated { jump, .. } => {
                let p = jump.eval(xi)?;
                Ok((
                    SymbolPieces {
                        numerator: p.numerator,
                        denominator: p.denominator,
                    },
                    p.scale,
                ))
            }
            Kind::Closed(f) => Ok((
                SymbolPieces {
                    numerator: f(xi),
                    denominator: 1.0,
                },
                1.0,
            )),
        }
    }

    /// Evaluates at many points in parallel; output order matches input order.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        points.par_iter().map(|xi| self.eval(xi)).collect()
    }
}

fn is_zero(den: f64, scale: f64) -> bool {
    !(den > ZERO_THRESHOLD * scale) || den == 0.0
}

fn zero_pieces() -> SymbolPieces {
    SymbolPieces {
        numerator: Complex64::new(0.0, 0.0),
        denominator: 0.0,
    }
}

fn nonempty_dim(pair: &SphericalPair) -> Result<usize> {
    if pair.is_empty() {
        return Err(Error::EmptySpectral);
    }
    pair.dim().ok_or(Error::EmptySpectral)
}

fn weighted_sum(w: &[f64], phi: &[Complex64], factor: f64) -> SymbolPieces {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (&wj, &p) in w.iter().zip(phi) {
        num += p * wj;
        den += wj;
    }
    SymbolPieces {
        numerator: num * factor,
        denominator: den * factor,
    }
}

fn directional_sum(pair: &SphericalPair, xi: &[f64], kernel: impl Fn(f64) -> f64) -> SymbolPieces {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (theta, m, phi) in pair.iter() {
        let w = m * kernel(dot(xi, &theta));
        num += phi * w;
        den += w;
    }
    SymbolPieces {
        numerator: num,
        denominator: den,
    }
}

fn tempered_pieces(pair: &SphericalPair, xi: &[f64], opts: &QuadOptions) -> Result<(SymbolPieces, f64)> {
    let xi2 = norm_sq(xi);
    let sigma = pair.spectral().total_mass();
    if xi2 == 0.0 {
        return Ok((zero_pieces(), 0.0));
    }
    let scale = sigma * (1.0 / xi2).ln_1p().max(f64::MIN_POSITIVE);
    if let Some(circle) = pair.spectral().as_circle() {
        let w = circle.arc_integrals(
            planar_angle(xi),
            |c| {
                let s2 = xi2 * c * c;
                if s2 == 0.0 {
                    0.0
                } else {
                    (1.0 / s2).ln_1p()
                }
            },
            opts,
        )?;
        return Ok((weighted_sum(&w, pair.modulator(), 1.0), scale));
    }
    let mut zero_num = Complex64::new(0.0, 0.0);
    let mut zero_den = 0.0;
    for (theta, m, phi) in pair.iter() {
        if dot(xi, &theta).abs() < LOG_KERNEL_ZERO {
            zero_num += phi * m;
            zero_den += m;
        }
    }
    if zero_den > 0.0 {
        return Ok((
            SymbolPieces {
                numerator: zero_num,
                denominator: zero_den,
            },
            zero_den,
        ));
    }
    Ok((
        directional_sum(pair, xi, |s| (1.0 / (s * s)).ln_1p()),
        scale,
    ))
}

/// `ν₁ ≤ ν₂`: atom-wise for atomic measures, by spectral and radial comparison for polar ones.
pub fn check_domination(nu1: &LevyMeasure, nu2: &LevyMeasure) -> Result<()> {
    const SLACK: f64 = 1e-12;
    if nu1.dim() != nu2.dim() && !nu1.is_zero() {
        return Err(Error::DimensionMismatch {
            expected: nu2.dim(),
            found: nu1.dim(),
        });
    }
    if nu1.is_zero() {
        return Ok(());
    }
    let spectral_le = |s1: &SpectralMeasure, s2: &SpectralMeasure, factor: f64| -> Result<()> {
        match (s1, s2) {
            (SpectralMeasure::Atoms(a1), _) => {
                let a2 = s2.midpoint_atoms();
                for a in a1 {
                    let matched: f64 = a2
                        .iter()
                        .filter(|b| distance(&a.point, &b.point) <= SLACK)
                        .map(|b| b.mass)
                        .sum();
                    if a.mass * factor > matched * (1.0 + SLACK) {
                        return Err(Error::DominationViolated(format!(
                            "spectral atom {:?}: {} > {}",
                            a.point,
                            a.mass * factor,
                            matched
                        )));
                    }
                }
                Ok(())
            }
            (SpectralMeasure::Circle { uniform_circle: c1 }, SpectralMeasure::Circle { uniform_circle: c2 }) => {
                if c1.arcs == c2.arcs && c1.total_mass * factor <= c2.total_mass * (1.0 + SLACK) {
                    Ok(())
                } else {
                    Err(Error::DominationViolated("circle spectral measures do not compare".into()))
                }
            }
            _ => Err(Error::DominationViolated("spectral measures do not compare".into())),
        }
    };
    match (nu1, nu2) {
        (LevyMeasure::Atomic { atoms: a1, .. }, LevyMeasure::Atomic { atoms: a2, .. }) => {
            for a in a1 {
                let matched: f64 = a2
                    .iter()
                    .filter(|b| distance(&a.point, &b.point) <= SLACK)
                    .map(|b| b.mass)
                    .sum();
                if a.mass > matched * (1.0 + SLACK) {
                    return Err(Error::DominationViolated(format!(
                        "atom {:?}: {} > {}",
                        a.point, a.mass, matched
                    )));
                }
            }
            Ok(())
        }
        (
            LevyMeasure::StablePolar {
                alpha: a1,
                spectral: s1,
                min_radius: m1,
            },
            LevyMeasure::StablePolar {
                alpha: a2,
                spectral: s2,
                min_radius: m2,
            },
        ) => {
            if a1 != a2 {
                return Err(Error::DominationViolated(format!(
                    "stable indices {a1} and {a2} give incomparable radial densities"
                )));
            }
            if m1 < m2 {
                return Err(Error::DominationViolated(format!("ν₁ has jumps in ({m1}, {m2}] where ν₂ has none")));
            }
            spectral_le(s1, s2, 1.0)
        }
        (
            LevyMeasure::PolarProduct {
                radial: r1,
                spectral: s1,
                min_radius: m1,
            },
            LevyMeasure::PolarProduct {
                radial: r2,
                spectral: s2,
                min_radius: m2,
            },
        ) => {
            use crate::levy_measure::RadialMeasure::*;
            let factor = match (r1, r2) {
                (ExpOverR, ExpOverR) => 1.0,
                (PointMass { r: x1, mass: w1 }, PointMass { r: x2, mass: w2 }) if x1 == x2 => w1 / w2,
                _ => {
                    return Err(Error::DominationViolated("radial parts are not comparable".into()));
                }
            };
            if m1 < m2 {
                return Err(Error::DominationViolated(format!("ν₁ has jumps in ({m1}, {m2}] where ν₂ has none")));
            }
            spectral_le(s1, s2, factor)
        }
        _ => Err(Error::DominationViolated(format!(
            "cannot compare {} with {}",
            nu1.representation(),
            nu2.representation()
        ))),
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests;
