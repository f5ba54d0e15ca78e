//! Lévy measures in atomic and polar form.
//!
//! Three representations are supported:
//!
//! * `Atomic`: finitely many point masses `Σ m_j δ_{z_j}`;
//! * `PolarProduct`: `ρ(dr) σ(dθ)` with a radial factor from [`RadialMeasure`];
//! * `StablePolar`: `r^{-1-α} dr σ(dθ)`.
//!
//! Polar forms carry a `min_radius`; the measure is then restricted to
//! `|z| > min_radius`, which makes stable and `e^{-r}/r` measures finite.

mod cosine;
mod exponent;
mod modulator;
mod radial;
mod semigroup;
mod spectral;
mod symmetrize;

pub use cosine::{CosineEvaluator, CosineParts};
pub use exponent::LevyExponent;
pub use modulator::JumpModulator;
pub use radial::{stable_constant, stable_cosine_tail, RadialMeasure};
pub use semigroup::{merge_atoms, poisson_weights, AtomicDistribution, ConvolutionPowers, DEFAULT_ATOM_CAP, MERGE_TOLERANCE};
pub use spectral::{Atom, SpectralMeasure, SphericalPair, UniformCircle, MODULUS_SLACK, UNIT_TOLERANCE};
pub use symmetrize::{symmetrize, Symmetrized};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;
use crate::vector::norm;

/// Ratio between consecutive radii of the truncation grid.
pub const CELL_RATIO: f64 = 1.25;
/// Fraction of total mass allowed beyond the outermost truncation cell.
pub const TAIL_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RawLevyMeasure {
    Atomic {
        #[serde(default)]
        dim: Option<usize>,
        atoms: Vec<Atom>,
    },
    PolarProduct {
        radial: RadialMeasure,
        spectral: SpectralMeasure,
        #[serde(default)]
        min_radius: f64,
    },
    StablePolar {
        alpha: f64,
        spectral: SpectralMeasure,
        #[serde(default)]
        min_radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLevyMeasure", into = "RawLevyMeasure")]
pub enum LevyMeasure {
    Atomic {
        dim: usize,
        atoms: Vec<Atom>,
    },
    PolarProduct {
        radial: RadialMeasure,
        spectral: SpectralMeasure,
        min_radius: f64,
    },
    StablePolar {
        alpha: f64,
        spectral: SpectralMeasure,
        min_radius: f64,
    },
}

impl TryFrom<RawLevyMeasure> for LevyMeasure {
    type Error = Error;

    fn try_from(raw: RawLevyMeasure) -> Result<Self> {
        let m = match raw {
            RawLevyMeasure::Atomic { dim, atoms } => {
                let dim = match (dim, atoms.first()) {
                    (Some(d), _) => d,
                    (None, Some(a)) => a.point.len(),
                    (None, None) => {
                        return Err(Error::InvalidInput(
                            "an empty atomic measure needs an explicit \"dim\"".into(),
                        ))
                    }
                };
                LevyMeasure::Atomic { dim, atoms }
            }
            RawLevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            },
            RawLevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            },
        };
        m.check()?;
        Ok(m)
    }
}

impl From<LevyMeasure> for RawLevyMeasure {
    fn from(m: LevyMeasure) -> Self {
        match m {
            LevyMeasure::Atomic { dim, atoms } => RawLevyMeasure::Atomic {
                dim: Some(dim),
                atoms,
            },
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => RawLevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            },
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => RawLevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            },
        }
    }
}

/// Outcome of [`LevyMeasure::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `∫_{|z|≤1} |z|² V(dz)`.
    pub small_jump_moment: f64,
    /// `V({|z| > 1})`.
    pub tail_mass: f64,
    /// `V(ℝᵈ)`, infinite for unrestricted stable and `e^{-r}/r` measures.
    pub total_mass: f64,
    pub dim: usize,
}

impl LevyMeasure {
    /// Atomic measure; the dimension is read from the first atom.
    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        let dim = atoms
            .first()
            .map(|a| a.point.len())
            .ok_or_else(|| Error::InvalidInput("use LevyMeasure::empty for an empty atomic measure".into()))?;
        let m = LevyMeasure::Atomic { dim, atoms };
        m.check()?;
        Ok(m)
    }

    pub fn empty(dim: usize) -> Self {
        LevyMeasure::Atomic {
            dim,
            atoms: Vec::new(),
        }
    }

    pub fn single_atom(point: Vec<f64>, mass: f64) -> Result<Self> {
        Self::atomic(vec![Atom::new(point, mass)])
    }

    pub fn stable(alpha: f64, spectral: SpectralMeasure) -> Result<Self> {
        let m = LevyMeasure::StablePolar {
            alpha,
            spectral,
            min_radius: 0.0,
        };
        m.check()?;
        Ok(m)
    }

    pub fn polar(radial: RadialMeasure, spectral: SpectralMeasure) -> Result<Self> {
        let m = LevyMeasure::PolarProduct {
            radial,
            spectral,
            min_radius: 0.0,
        };
        m.check()?;
        Ok(m)
    }

    /// Structural invariants: dimensions, positive masses, unit directions,
    /// no atom at the origin, admissible stability index.
    pub fn check(&self) -> Result<()> {
        match self {
            LevyMeasure::Atomic { dim, atoms } => {
                if *dim == 0 {
                    return Err(Error::InvalidInput("dimension must be positive".into()));
                }
                for a in atoms {
                    if a.point.len() != *dim {
                        return Err(Error::DimensionMismatch {
                            expected: *dim,
                            found: a.point.len(),
                        });
                    }
                    if !(a.mass > 0.0 && a.mass.is_finite()) {
                        return Err(Error::InvalidInput(format!(
                            "atom mass must be positive and finite, got {}",
                            a.mass
                        )));
                    }
                    if a.point.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidInput("atom coordinates must be finite".into()));
                    }
                    if norm(&a.point) == 0.0 {
                        return Err(Error::OriginAtom);
                    }
                }
                Ok(())
            }
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => {
                radial.check()?;
                check_polar(spectral, *min_radius)
            }
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => {
                radial::check_alpha(*alpha)?;
                check_polar(spectral, *min_radius)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LevyMeasure::Atomic { dim, .. } => *dim,
            LevyMeasure::PolarProduct { spectral, .. } | LevyMeasure::StablePolar { spectral, .. } => {
                spectral.dim().unwrap_or(0)
            }
        }
    }

    pub fn representation(&self) -> &'static str {
        match self {
            LevyMeasure::Atomic { .. } => "atomic",
            LevyMeasure::PolarProduct { .. } => "polar_product",
            LevyMeasure::StablePolar { .. } => "stable_polar",
        }
    }

    pub fn atoms(&self) -> Result<&[Atom]> {
        match self {
            LevyMeasure::Atomic { atoms, .. } => Ok(atoms),
            _ => Err(Error::UnsupportedRepresentation(self.representation())),
        }
    }

    /// True when the measure is zero.
    pub fn is_zero(&self) -> bool {
        match self {
            LevyMeasure::Atomic { atoms, .. } => atoms.is_empty(),
            LevyMeasure::PolarProduct { spectral, .. } | LevyMeasure::StablePolar { spectral, .. } => {
                spectral.is_empty()
            }
        }
    }

    /// `V(ℝᵈ)`; may be infinite.
    pub fn total_mass(&self, opts: &QuadOptions) -> Result<f64> {
        match self {
            LevyMeasure::Atomic { atoms, .. } => Ok(atoms.iter().map(|a| a.mass).sum()),
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => {
                if spectral.is_empty() {
                    return Ok(0.0);
                }
                Ok(radial.mass_between(*min_radius, f64::INFINITY, opts)? * spectral.total_mass())
            }
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => {
                if spectral.is_empty() {
                    return Ok(0.0);
                }
                if *min_radius <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(min_radius.powf(-alpha) / alpha * spectral.total_mass())
            }
        }
    }

    /// Integrability check `∫ min(|z|², 1) V(dz) < ∞` with the split at `|z| ≤ 1`.
    pub fn validate(&self, opts: &QuadOptions) -> Result<ValidationReport> {
        self.check()?;
        let (small, tail) = match self {
            LevyMeasure::Atomic { atoms, .. } => {
                let mut small = 0.0;
                let mut tail = 0.0;
                for a in atoms {
                    let r2 = a.point.iter().map(|x| x * x).sum::<f64>();
                    if r2 <= 1.0 {
                        small += r2 * a.mass;
                    } else {
                        tail += a.mass;
                    }
                }
                (small, tail)
            }
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => {
                let sigma = spectral.total_mass();
                let small = if *min_radius < 1.0 {
                    radial.second_moment_between(min_radius.max(0.0), 1.0, opts)?
                } else {
                    0.0
                };
                let tail = radial.mass_between(min_radius.max(1.0), f64::INFINITY, opts)?;
                (small * sigma, tail * sigma)
            }
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => {
                let sigma = spectral.total_mass();
                let m = min_radius.max(0.0);
                let small = if m < 1.0 {
                    (1.0 - m.powf(2.0 - alpha)) / (2.0 - alpha)
                } else {
                    0.0
                };
                let tail = m.max(1.0).powf(-alpha) / alpha;
                (small * sigma, tail * sigma)
            }
        };
        if !small.is_finite() || !tail.is_finite() {
            return Err(Error::NonIntegrable(format!(
                "small-jump moment {small}, tail mass {tail}"
            )));
        }
        Ok(ValidationReport {
            small_jump_moment: small,
            tail_mass: tail,
            total_mass: self.total_mass(opts)?,
            dim: self.dim(),
        })
    }

    /// Exact restriction to `{|z| > ε}`, keeping the representation.
    pub fn restrict(&self, epsilon: f64) -> Self {
        match self {
            LevyMeasure::Atomic { dim, atoms } => LevyMeasure::Atomic {
                dim: *dim,
                atoms: atoms.iter().filter(|a| norm(&a.point) > epsilon).cloned().collect(),
            },
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => LevyMeasure::PolarProduct {
                radial: *radial,
                spectral: spectral.clone(),
                min_radius: min_radius.max(epsilon),
            },
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => LevyMeasure::StablePolar {
                alpha: *alpha,
                spectral: spectral.clone(),
                min_radius: min_radius.max(epsilon),
            },
        }
    }

    /// Restriction to `{|z| > ε}` as an atomic measure.
    ///
    /// Polar radial parts are cut into geometric cells `(r_k, r_k·1.25]`
    /// starting at `ε`, up to a radius beyond which less than `1e-12` of the
    /// mass remains. Each cell becomes one atom per spectral direction,
    /// carrying the cell mass at the radius that preserves the cell's second
    /// moment. Circle spectral measures contribute their arc midpoints.
    pub fn truncate(&self, epsilon: f64, opts: &QuadOptions) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("truncation radius must be positive, got {epsilon}")));
        }
        let restricted = self.restrict(epsilon);
        let dim = self.dim();
        let (cells, spectral) = match &restricted {
            LevyMeasure::Atomic { .. } => return Ok(restricted),
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => (radial_cells(radial, *min_radius, opts)?, spectral),
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => (stable_cells(*alpha, *min_radius), spectral),
        };
        let mut atoms = Vec::with_capacity(cells.len() * spectral.len());
        for (theta, sigma) in (0..spectral.len()).map(|j| spectral.direction(j)) {
            for &(r, mass) in &cells {
                atoms.push(Atom::new(theta.iter().map(|t| t * r).collect(), mass * sigma));
            }
        }
        Ok(LevyMeasure::Atomic { dim, atoms })
    }
}

fn check_polar(spectral: &SpectralMeasure, min_radius: f64) -> Result<()> {
    spectral.check()?;
    if !(min_radius >= 0.0 && min_radius.is_finite()) {
        return Err(Error::InvalidInput(format!("min_radius must be finite and non-negative, got {min_radius}")));
    }
    Ok(())
}

/// Geometric cell boundaries `r0, r0·q, …` until `r ≥ r_max`.
fn geometric_edges(r0: f64, r_max: f64) -> Vec<f64> {
    let mut edges = vec![r0];
    let mut r = r0;
    while r < r_max {
        r *= CELL_RATIO;
        edges.push(r);
    }
    edges
}

fn radial_cells(radial: &RadialMeasure, r0: f64, opts: &QuadOptions) -> Result<Vec<(f64, f64)>> {
    match *radial {
        RadialMeasure::PointMass { r, mass } => Ok(if r > r0 { vec![(r, mass)] } else { Vec::new() }),
        RadialMeasure::ExpOverR => {
            let total = radial.mass_between(r0, f64::INFINITY, opts)?;
            let r_max = radial.tail_radius(TAIL_FRACTION * total).max(r0);
            let edges = geometric_edges(r0, r_max);
            let mut cells = Vec::with_capacity(edges.len());
            for w in edges.windows(2) {
                let mass = radial.mass_between(w[0], w[1], opts)?;
                let second = radial.second_moment_between(w[0], w[1], opts)?;
                if mass > 0.0 {
                    cells.push(((second / mass).sqrt(), mass));
                }
            }
            Ok(cells)
        }
    }
}

fn stable_cells(alpha: f64, r0: f64) -> Vec<(f64, f64)> {
    // tail beyond R is R^{-α}/α; total is r0^{-α}/α
    let r_max = r0 * TAIL_FRACTION.powf(-1.0 / alpha);
    geometric_edges(r0, r_max)
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let mass = (a.powf(-alpha) - b.powf(-alpha)) / alpha;
            let second = (b.powf(2.0 - alpha) - a.powf(2.0 - alpha)) / (2.0 - alpha);
            ((second / mass).sqrt(), mass)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity};

    fn opts() -> QuadOptions {
        QuadOptions::default()
    }

    #[test]
    fn unit_atom_counts_as_small_jump() {
        let v = LevyMeasure::single_atom(vec![1.0, 0.0], 1.0).unwrap();
        let r = v.validate(&opts()).unwrap();
        assert_eq!(r.small_jump_moment, 1.0);
        assert_eq!(r.tail_mass, 0.0);
    }

    #[test]
    fn origin_atom_is_rejected() {
        let v = LevyMeasure::Atomic {
            dim: 2,
            atoms: vec![Atom::new(vec![0.0, 0.0], 1.0)],
        };
        assert_eq!(v.validate(&opts()), Err(Error::OriginAtom));
        let json = r#"{"type": "atomic", "atoms": [[[0.0], 1.0]]}"#;
        assert!(serde_json::from_str::<LevyMeasure>(json).is_err());
    }

    #[test]
    fn stable_is_integrable_for_admissible_alpha() {
        let v = LevyMeasure::stable(0.5, SpectralMeasure::coordinate_directions(1)).unwrap();
        let r = v.validate(&opts()).unwrap();
        assert!((r.small_jump_moment - 1.0 / 1.5).abs() < 1e-15);
        assert!((r.tail_mass - 2.0).abs() < 1e-15);
        assert!(r.total_mass.is_infinite());
        let bad = LevyMeasure::StablePolar {
            alpha: 2.5,
            spectral: SpectralMeasure::coordinate_directions(1),
            min_radius: 0.0,
        };
        assert!(matches!(bad.validate(&opts()), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn exp_over_r_small_jump_moment_matches_quadrature() {
        let v = LevyMeasure::polar(RadialMeasure::ExpOverR, SpectralMeasure::coordinate_directions(2)).unwrap();
        let r = v.validate(&opts()).unwrap();
        let oracle = integrate(|r: f64| r * (-r).exp(), 0.0, 1.0, &opts()).unwrap().value;
        assert!((r.small_jump_moment - 2.0 * oracle).abs() < 1e-12);
        assert!((r.small_jump_moment - 2.0 * (1.0 - 2.0 * (-1f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn truncating_atomic_below_all_radii_is_identity() {
        let v = LevyMeasure::atomic(vec![
            Atom::new(vec![0.5, 0.0], 1.0),
            Atom::new(vec![0.0, -2.0], 0.25),
        ])
        .unwrap();
        assert_eq!(v.truncate(0.1, &opts()).unwrap(), v);
        assert_eq!(v.truncate(1.0, &opts()).unwrap().atoms().unwrap().len(), 1);
    }

    #[test]
    fn truncated_stable_has_closed_form_mass() {
        let v = LevyMeasure::stable(1.0, SpectralMeasure::coordinate_directions(1)).unwrap();
        let t = v.truncate(1.0, &opts()).unwrap();
        assert!((t.total_mass(&opts()).unwrap() - 1.0).abs() < 1e-11);
        assert!(t.atoms().unwrap().iter().all(|a| a.point[0] > 1.0));
    }

    #[test]
    fn truncated_exp_over_r_mass_matches_exponential_integral() {
        let v = LevyMeasure::polar(RadialMeasure::ExpOverR, SpectralMeasure::coordinate_directions(1)).unwrap();
        let t = v.truncate(0.1, &opts()).unwrap();
        let oracle = integrate_to_infinity(|r: f64| (-r).exp() / r, 0.1, &opts()).unwrap().value;
        // E₁(0.1)
        assert!((oracle - 1.822_923_958_419_390_7).abs() < 1e-12);
        assert!((t.total_mass(&opts()).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn cell_radius_preserves_second_moment() {
        let cells = stable_cells(1.5, 0.2);
        let second: f64 = cells.iter().map(|(r, m)| r * r * m).sum();
        let r_max = 0.2 * TAIL_FRACTION.powf(-1.0 / 1.5);
        let edges = geometric_edges(0.2, r_max);
        let exact = (edges.last().unwrap().powf(0.5) - 0.2f64.powf(0.5)) / 0.5;
        assert!((second / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_shape() {
        let json = r#"{"type": "stable_polar", "alpha": 1.5,
                       "spectral": {"uniform_circle": {"arcs": 64, "total_mass": 6.283185307179586}}}"#;
        let v: LevyMeasure = serde_json::from_str(json).unwrap();
        assert_eq!(v.dim(), 2);
        let json = r#"{"type": "polar_product", "radial": {"kind": "point_mass", "r": 0.5, "mass": 4.0},
                       "spectral": [[[1.0], 1.0], [[-1.0], 2.0]], "min_radius": 0.1}"#;
        let v: LevyMeasure = serde_json::from_str(json).unwrap();
        assert!((v.total_mass(&opts()).unwrap() - 12.0).abs() < 1e-15);
        let json = r#"{"type": "atomic", "atoms": []}"#;
        assert!(serde_json::from_str::<LevyMeasure>(json).is_err());
        let json = r#"{"type": "atomic", "dim": 3, "atoms": []}"#;
        assert!(serde_json::from_str::<LevyMeasure>(json).unwrap().is_zero());
    }
}
