//! Lévy–Khinchine exponent `Ψ(ξ) = ∫ (e^{i(ξ,z)} - 1) ν(dz)` of a finite measure.

use num_complex::Complex64;

use super::radial::{stable_constant, stable_cosine_kernel, stable_sine_kernel};
use super::LevyMeasure;
use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;
use crate::vector::{dot, one_minus_cos};

#[derive(Debug, Clone)]
pub struct LevyExponent {
    measure: LevyMeasure,
    total_mass: f64,
    c_alpha: f64,
    opts: QuadOptions,
}

impl LevyExponent {
    /// Fails with `InfiniteMass` unless `ν(ℝᵈ) < ∞`.
    pub fn new(measure: &LevyMeasure, opts: &QuadOptions) -> Result<Self> {
        measure.check()?;
        let total_mass = measure.total_mass(opts)?;
        if !total_mass.is_finite() {
            return Err(Error::InfiniteMass);
        }
        let c_alpha = match measure {
            LevyMeasure::StablePolar { alpha, .. } => stable_constant(*alpha, opts)?,
            _ => 0.0,
        };
        Ok(Self {
            measure: measure.clone(),
            total_mass,
            c_alpha,
            opts: *opts,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xi.len(),
            });
        }
        match &self.measure {
            LevyMeasure::Atomic { atoms, .. } => Ok(atoms
                .iter()
                .map(|a| {
                    let s = dot(xi, &a.point);
                    Complex64::new(-one_minus_cos(s), s.sin()) * a.mass
                })
                .sum()),
            LevyMeasure::PolarProduct {
                radial,
                spectral,
                min_radius,
            } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..spectral.len() {
                    let (theta, sigma) = spectral.direction(j);
                    let s = dot(xi, &theta);
                    let re = -radial.cosine_kernel(s, *min_radius, &self.opts)?;
                    let im = radial.sine_kernel(s, *min_radius, &self.opts)?;
                    acc += Complex64::new(re, im) * sigma;
                }
                Ok(acc)
            }
            LevyMeasure::StablePolar {
                alpha,
                spectral,
                min_radius,
            } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..spectral.len() {
                    let (theta, sigma) = spectral.direction(j);
                    let s = dot(xi, &theta);
                    let re = -stable_cosine_kernel(s, *min_radius, *alpha, self.c_alpha, &self.opts)?;
                    let im = stable_sine_kernel(s, *min_radius, *alpha, &self.opts)?;
                    acc += Complex64::new(re, im) * sigma;
                }
                Ok(acc)
            }
        }
    }

    /// `e^{it(ξ,b) + tΨ(ξ)}`, the characteristic function of `X_t + tb`.
    pub fn characteristic(&self, t: f64, drift: &[f64], xi: &[f64]) -> Result<Complex64> {
        let psi = self.eval(xi)?;
        Ok((Complex64::new(0.0, t * dot(xi, drift)) + psi * t).exp())
    }
}
