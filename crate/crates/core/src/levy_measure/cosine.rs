//! The modulated cosine integrals `∫ (1 - cos(ξ,z)) φ(z) V(dz)` and `∫ (1 - cos(ξ,z)) V(dz)`.

use num_complex::Complex64;

use super::modulator::JumpModulator;
use super::radial::{stable_constant, stable_cosine_kernel, RadialMeasure};
use super::spectral::SpectralMeasure;
use super::LevyMeasure;
use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;
use crate::vector::{dot, norm_sq, one_minus_cos, planar_angle};

/// Numerator and denominator of the jump part of a symbol at one frequency.
///
/// `scale` is a size reference for the denominator (it bounds it up to a
/// constant) and is used to decide when the denominator counts as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineParts {
    pub numerator: Complex64,
    pub denominator: f64,
    pub scale: f64,
}

impl CosineParts {
    pub const ZERO: CosineParts = CosineParts {
        numerator: Complex64::new(0.0, 0.0),
        denominator: 0.0,
        scale: 0.0,
    };
}

#[derive(Debug, Clone)]
enum Kind {
    Atomic {
        points: Vec<Vec<f64>>,
        masses: Vec<f64>,
    },
    Stable {
        alpha: f64,
        c_alpha: f64,
        min_radius: f64,
        spectral: SpectralMeasure,
    },
    Polar {
        radial: RadialMeasure,
        min_radius: f64,
        spectral: SpectralMeasure,
    },
}

/// Evaluates [`CosineParts`] for a fixed measure and modulator.
///
/// The modulator is resolved once per atom (or spectral atom) at
/// construction; `c_α` is computed once for stable measures.
#[derive(Debug, Clone)]
pub struct CosineEvaluator {
    kind: Kind,
    phi: Vec<Complex64>,
    dim: usize,
    opts: QuadOptions,
}

impl CosineEvaluator {
    pub fn new(measure: &LevyMeasure, phi: &JumpModulator, opts: &QuadOptions) -> Result<Self> {
        measure.check()?;
        phi.check_bound(1.0)?;
        let dim = measure.dim();
        let (kind, values) = match measure {
            LevyMeasure::Atomic { atoms, .. } => {
                let values = atoms
                    .iter()
                    .enumerate()
                    .map(|(j, a)| phi.on_atom(j, &a.point))
                    .collect::<Result<Vec<_>>>()?;
                (
                    Kind::Atomic {
                        points: atoms.iter().map(|a| a.point.clone()).collect(),
                        masses: atoms.iter().map(|a| a.mass).collect(),
                    },
                    values,
                )
            }
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => (
                Kind::Stable {
                    alpha: *alpha,
                    c_alpha: stable_constant(*alpha, opts)?,
                    min_radius: *min_radius,
                    spectral: spectral.clone(),
                },
                directional_values(spectral, phi)?,
            ),
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => (
                Kind::Polar {
                    radial: *radial,
                    min_radius: *min_radius,
                    spectral: spectral.clone(),
                },
                directional_values(spectral, phi)?,
            ),
        };
        Ok(Self {
            kind,
            phi: values,
            dim,
            opts: *opts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c_α` for stable measures.
    pub fn stable_constant(&self) -> Option<f64> {
        match &self.kind {
            Kind::Stable { c_alpha, .. } => Some(*c_alpha),
            _ => None,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Result<CosineParts> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        let xi2 = norm_sq(xi);
        if xi2 == 0.0 {
            return Ok(CosineParts::ZERO);
        }
        match &self.kind {
            Kind::Atomic { points, masses } => {
                let mut num = Complex64::new(0.0, 0.0);
                let mut den = 0.0;
                let mut scale = 0.0;
                for ((z, &m), &phi) in points.iter().zip(masses).zip(&self.phi) {
                    let w = m * one_minus_cos(dot(xi, z));
                    num += phi * w;
                    den += w;
                    scale += m * (xi2 * norm_sq(z)).min(1.0);
                }
                Ok(CosineParts {
                    numerator: num,
                    denominator: den,
                    scale,
                })
            }
            Kind::Stable {
                alpha,
                c_alpha,
                min_radius,
                spectral,
            } => {
                let r = xi2.sqrt();
                let scale = c_alpha * r.powf(*alpha) * spectral.total_mass();
                if *min_radius <= 0.0 {
                    if let Some(circle) = spectral.as_circle() {
                        let a = *alpha;
                        let w = circle.arc_integrals(planar_angle(xi), |c| c.abs().powf(a), &self.opts)?;
                        let factor = c_alpha * r.powf(a);
                        return Ok(self.weighted(&w, factor, scale));
                    }
                }
                self.directional(spectral, scale, |s| {
                    stable_cosine_kernel(s, *min_radius, *alpha, *c_alpha, &self.opts)
                }, xi)
            }
            Kind::Polar {
                radial,
                min_radius,
                spectral,
            } => {
                let sigma = spectral.total_mass();
                let scale = match radial {
                    RadialMeasure::ExpOverR => 0.5 * xi2.ln_1p() * sigma,
                    RadialMeasure::PointMass { r, mass } => mass * (xi2 * r * r).min(1.0) * sigma,
                };
                self.directional(spectral, scale, |s| radial.cosine_kernel(s, *min_radius, &self.opts), xi)
            }
        }
    }

    fn weighted(&self, w: &[f64], factor: f64, scale: f64) -> CosineParts {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (&wj, &phi) in w.iter().zip(&self.phi) {
            num += phi * wj;
            den += wj;
        }
        CosineParts {
            numerator: num * factor,
            denominator: den * factor,
            scale,
        }
    }

    fn directional<K>(&self, spectral: &SpectralMeasure, scale: f64, kernel: K, xi: &[f64]) -> Result<CosineParts>
    where
        K: Fn(f64) -> Result<f64>,
    {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, &phi) in self.phi.iter().enumerate() {
            let (theta, sigma) = spectral.direction(j);
            let w = sigma * kernel(dot(xi, &theta))?;
            num += phi * w;
            den += w;
        }
        Ok(CosineParts {
            numerator: num,
            denominator: den,
            scale,
        })
    }
}

fn directional_values(spectral: &SpectralMeasure, phi: &JumpModulator) -> Result<Vec<Complex64>> {
    (0..spectral.len())
        .map(|j| phi.on_direction(j, &spectral.direction(j).0))
        .collect()
}
