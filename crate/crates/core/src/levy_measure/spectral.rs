//! Finite measures on the unit sphere, and sphere measures paired with a modulator.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::modulator::{JumpModulator, RawModulator};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_segments, GaussLegendre, QuadOptions};
use crate::vector::norm;

/// Tolerance on `|θ| = 1` for spectral directions.
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Slack allowed above a modulator bound (absorbs rounding of `e^{iθ}`-type values).
pub const MODULUS_SLACK: f64 = 1e-12;

/// A point mass; serialized as `[[z₁,…,z_d], mass]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "(Vec<f64>, f64)", into = "(Vec<f64>, f64)")]
pub struct Atom {
    pub point: Vec<f64>,
    pub mass: f64,
}

impl Atom {
    pub fn new(point: Vec<f64>, mass: f64) -> Self {
        Self { point, mass }
    }
}

impl From<(Vec<f64>, f64)> for Atom {
    fn from((point, mass): (Vec<f64>, f64)) -> Self {
        Self { point, mass }
    }
}

impl From<Atom> for (Vec<f64>, f64) {
    fn from(a: Atom) -> Self {
        (a.point, a.mass)
    }
}

/// Lebesgue-type measure on S¹ split into equal arcs.
///
/// `total_mass = 2π` is arc length. Functions on the circle (modulators)
/// are constant on each arc and sampled at the arc midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformCircle {
    pub arcs: usize,
    pub total_mass: f64,
}

impl UniformCircle {
    pub fn arc_width(&self) -> f64 {
        2.0 * PI / self.arcs as f64
    }

    pub fn midpoint_angle(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.arc_width()
    }

    pub fn density(&self) -> f64 {
        self.total_mass / (2.0 * PI)
    }

    /// Per-arc masses of `k(cos(y - t)) dy`, scaled by the circle density.
    ///
    /// `k` may be singular where `cos(y - t) = 0`; arcs containing such a
    /// zero, and their immediate neighbours, are integrated adaptively with
    /// the zero as a breakpoint. Every other arc uses an 8-point
    /// Gauss–Legendre rule.
    pub fn arc_integrals<K>(&self, t: f64, k: K, opts: &QuadOptions) -> Result<Vec<f64>>
    where
        K: Fn(f64) -> f64,
    {
        let n = self.arcs;
        let h = self.arc_width();
        let rule = gauss_legendre_8();
        let two_pi = 2.0 * PI;
        let zeros = [
            (t + 0.5 * PI).rem_euclid(two_pi),
            (t - 0.5 * PI).rem_euclid(two_pi),
        ];
        let mut near = vec![false; n];
        for z in zeros {
            let j0 = ((z / h).floor() as usize).min(n - 1);
            for dj in [n - 1, 0, 1] {
                near[(j0 + dj) % n] = true;
            }
        }
        let density = self.density();
        (0..n)
            .map(|j| {
                let lo = j as f64 * h;
                let hi = lo + h;
                let f = |y: f64| k((y - t).cos());
                let v = if near[j] {
                    let mut points = vec![lo];
                    for z in zeros {
                        if z > lo && z < hi {
                            points.push(z);
                        }
                    }
                    points.push(hi);
                    points.sort_by(f64::total_cmp);
                    integrate_segments(f, &points, opts)?.value
                } else {
                    rule.integrate(f, lo, hi)
                };
                Ok(v * density)
            })
            .collect()
    }
}

fn gauss_legendre_8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

/// The spectral (angular) factor of a polar Lévy measure, or the Gaussian-part measure μ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectralMeasure {
    Atoms(Vec<Atom>),
    Circle { uniform_circle: UniformCircle },
}

impl SpectralMeasure {
    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        let s = SpectralMeasure::Atoms(atoms);
        s.check()?;
        Ok(s)
    }

    pub fn uniform_circle(arcs: usize, total_mass: f64) -> Result<Self> {
        let s = SpectralMeasure::Circle {
            uniform_circle: UniformCircle { arcs, total_mass },
        };
        s.check()?;
        Ok(s)
    }

    /// Atoms at the coordinate directions `e_1,…,e_d` with unit mass.
    pub fn coordinate_directions(dim: usize) -> Self {
        SpectralMeasure::Atoms(
            (0..dim)
                .map(|j| {
                    let mut e = vec![0.0; dim];
                    e[j] = 1.0;
                    Atom::new(e, 1.0)
                })
                .collect(),
        )
    }

    /// Structural invariants: unit directions, positive masses, consistent dimension.
    pub fn check(&self) -> Result<()> {
        match self {
            SpectralMeasure::Atoms(atoms) => {
                let Some(first) = atoms.first() else {
                    return Ok(());
                };
                let d = first.point.len();
                if d == 0 {
                    return Err(Error::InvalidInput("zero-dimensional direction".into()));
                }
                for a in atoms {
                    if a.point.len() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: a.point.len(),
                        });
                    }
                    if !(a.mass > 0.0 && a.mass.is_finite()) {
                        return Err(Error::InvalidInput(format!(
                            "spectral mass must be positive and finite, got {}",
                            a.mass
                        )));
                    }
                    let n = norm(&a.point);
                    if (n - 1.0).abs() > UNIT_TOLERANCE {
                        return Err(Error::InvalidInput(format!(
                            "spectral direction {:?} has norm {n}",
                            a.point
                        )));
                    }
                }
                Ok(())
            }
            SpectralMeasure::Circle { uniform_circle: c } => {
                if c.arcs == 0 {
                    return Err(Error::InvalidInput("uniform circle needs at least one arc".into()));
                }
                if !(c.total_mass > 0.0 && c.total_mass.is_finite()) {
                    return Err(Error::InvalidInput("uniform circle mass must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn as_circle(&self) -> Option<&UniformCircle> {
        match self {
            SpectralMeasure::Circle { uniform_circle } => Some(uniform_circle),
            SpectralMeasure::Atoms(_) => None,
        }
    }

    /// Ambient dimension, `None` for an empty atom list.
    pub fn dim(&self) -> Option<usize> {
        match self {
            SpectralMeasure::Atoms(a) => a.first().map(|a| a.point.len()),
            SpectralMeasure::Circle { .. } => Some(2),
        }
    }

    /// Number of atoms (or arcs).
    pub fn len(&self) -> usize {
        match self {
            SpectralMeasure::Atoms(a) => a.len(),
            SpectralMeasure::Circle { uniform_circle } => uniform_circle.arcs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            SpectralMeasure::Atoms(a) => a.iter().map(|a| a.mass).sum(),
            SpectralMeasure::Circle { uniform_circle } => uniform_circle.total_mass,
        }
    }

    /// Direction and mass of atom `j`; arcs report their midpoint and arc mass.
    pub fn direction(&self, j: usize) -> (Vec<f64>, f64) {
        match self {
            SpectralMeasure::Atoms(a) => (a[j].point.clone(), a[j].mass),
            SpectralMeasure::Circle { uniform_circle: c } => {
                let t = c.midpoint_angle(j);
                (vec![t.cos(), t.sin()], c.total_mass / c.arcs as f64)
            }
        }
    }

    /// All `(direction, mass)` pairs, arcs collapsed to their midpoints.
    pub fn midpoint_atoms(&self) -> Vec<Atom> {
        (0..self.len())
            .map(|j| {
                let (p, m) = self.direction(j);
                Atom::new(p, m)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPair {
    spectral: SpectralMeasure,
    modulator: RawModulator,
    #[serde(default)]
    relaxed: bool,
}

/// A finite measure μ on the sphere together with per-atom modulator values ϕ.
///
/// `|ϕ| ≤ 1` unless the pair is `relaxed`, in which case `|ϕ| ≤ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair", into = "RawPair")]
pub struct SphericalPair {
    spectral: SpectralMeasure,
    modulator: Vec<Complex64>,
    relaxed: bool,
}

impl TryFrom<RawPair> for SphericalPair {
    type Error = Error;

    fn try_from(raw: RawPair) -> Result<Self> {
        SphericalPair::from_modulator(raw.spectral, &JumpModulator::from_raw(raw.modulator), raw.relaxed)
    }
}

impl From<SphericalPair> for RawPair {
    fn from(p: SphericalPair) -> Self {
        RawPair {
            spectral: p.spectral,
            modulator: JumpModulator::RadialAngular { values: p.modulator }.into(),
            relaxed: p.relaxed,
        }
    }
}

impl SphericalPair {
    pub fn new(spectral: SpectralMeasure, modulator: Vec<Complex64>, relaxed: bool) -> Result<Self> {
        spectral.check()?;
        if modulator.len() != spectral.len() {
            return Err(Error::InvalidInput(format!(
                "{} modulator values for {} spectral atoms",
                modulator.len(),
                spectral.len()
            )));
        }
        let bound = if relaxed { 2.0 } else { 1.0 };
        for v in &modulator {
            if !(v.norm() <= bound + MODULUS_SLACK) {
                return Err(Error::ModulatorBound {
                    value: v.norm(),
                    bound,
                });
            }
        }
        Ok(Self {
            spectral,
            modulator,
            relaxed,
        })
    }

    /// Samples `modulator` on each spectral atom (arc midpoints for circles).
    pub fn from_modulator(
        spectral: SpectralMeasure,
        modulator: &JumpModulator,
        relaxed: bool,
    ) -> Result<Self> {
        spectral.check()?;
        let values = (0..spectral.len())
            .map(|j| modulator.on_direction(j, &spectral.direction(j).0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(spectral, values, relaxed)
    }

    /// Uniform circle with `ϕ(θ) = f(arg θ)` sampled at arc midpoints.
    pub fn uniform_circle(
        arcs: usize,
        total_mass: f64,
        relaxed: bool,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let spectral = SpectralMeasure::uniform_circle(arcs, total_mass)?;
        let c = match &spectral {
            SpectralMeasure::Circle { uniform_circle } => *uniform_circle,
            SpectralMeasure::Atoms(_) => unreachable!(),
        };
        let values = (0..arcs).map(|j| f(c.midpoint_angle(j))).collect();
        Self::new(spectral, values, relaxed)
    }

    /// The zero pair (μ = 0).
    pub fn empty() -> Self {
        Self {
            spectral: SpectralMeasure::Atoms(Vec::new()),
            modulator: Vec::new(),
            relaxed: false,
        }
    }

    pub fn spectral(&self) -> &SpectralMeasure {
        &self.spectral
    }

    pub fn modulator(&self) -> &[Complex64] {
        &self.modulator
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// True when μ = 0; such pairs contribute nothing.
    pub fn is_empty(&self) -> bool {
        self.spectral.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.spectral.dim()
    }

    pub fn max_modulus(&self) -> f64 {
        self.modulator.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Iterates `(θ, mass, ϕ(θ))`, arcs collapsed to midpoints.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<f64>, f64, Complex64)> + '_ {
        (0..self.spectral.len()).map(move |j| {
            let (p, m) = self.spectral.direction(j);
            (p, m, self.modulator[j])
        })
    }

    /// `(Σ ϕ·(ξ,θ)²·μ_θ, Σ (ξ,θ)²·μ_θ)`: the quadratic (Gaussian) parts of a symbol.
    ///
    /// Midpoint sampling of circles is exact here because the kernel is a
    /// trigonometric polynomial of degree two in the angle.
    pub fn quadratic_parts(&self, xi: &[f64]) -> (Complex64, f64) {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (theta, m, phi) in self.iter() {
            let s = crate::vector::dot(xi, &theta);
            let w = s * s * m;
            num += phi * w;
            den += w;
        }
        (num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_must_be_unit() {
        let bad = SpectralMeasure::atoms(vec![Atom::new(vec![1.0, 1.0], 1.0)]);
        assert!(matches!(bad, Err(Error::InvalidInput(_))));
        let ok = SpectralMeasure::atoms(vec![Atom::new(vec![0.6, 0.8], 2.0)]).unwrap();
        assert_eq!(ok.total_mass(), 2.0);
    }

    #[test]
    fn modulator_bound_is_enforced_unless_relaxed() {
        let s = SpectralMeasure::coordinate_directions(2);
        let two = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(
            SphericalPair::new(s.clone(), two.clone(), false),
            Err(Error::ModulatorBound { .. })
        ));
        let relaxed = SphericalPair::new(s, two, true).unwrap();
        let text = serde_json::to_string(&relaxed).unwrap();
        assert_eq!(serde_json::from_str::<SphericalPair>(&text).unwrap(), relaxed);
        let strict = text.replace("\"relaxed\":true", "\"relaxed\":false");
        assert!(serde_json::from_str::<SphericalPair>(&strict).is_err());
    }

    #[test]
    fn pair_json_uses_complex_arrays() {
        let json = r#"{"spectral": [[[1.0, 0.0], 1.0], [[0.0, 1.0], 1.0]],
                       "modulator": {"kind": "table", "values": [[1.0, 0.0], [0.0, -1.0]]}}"#;
        // A table modulator belongs to atomic Lévy measures, not to sphere pairs.
        assert!(serde_json::from_str::<SphericalPair>(json).is_err());
        let json = r#"{"spectral": [[[1.0, 0.0], 1.0], [[0.0, 1.0], 1.0]],
                       "modulator": {"kind": "angular", "values": [[1.0, 0.0], [0.0, -1.0]]}}"#;
        let p: SphericalPair = serde_json::from_str(json).unwrap();
        assert_eq!(p.modulator()[1], Complex64::new(0.0, -1.0));
        let back = serde_json::to_value(&p).unwrap();
        assert_eq!(back["modulator"]["values"][1][1], -1.0);
    }

    #[test]
    fn circle_midpoints_carry_equal_mass() {
        let s = SpectralMeasure::uniform_circle(8, 2.0 * PI).unwrap();
        let (p, m) = s.direction(0);
        assert!((m - PI / 4.0).abs() < 1e-15);
        assert!((p[0] - (PI / 8.0).cos()).abs() < 1e-15);
    }
}
