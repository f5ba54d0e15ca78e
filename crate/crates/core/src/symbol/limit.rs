//! Second-order limit of small-jump measures concentrated on an ε-sphere.
//!
//! `ν_ε(dr dθ) = ε^{-2} δ_ε(dr) μ(dθ)` satisfies
//! `∫ (1 - cos(ξ,z)) ϕ(z/|z|) ν_ε(dz) → ½ ∫ (ξ,θ)² ϕ(θ) μ(dθ)` with error `O(ε²)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::{CosineEvaluator, JumpModulator, LevyMeasure, RadialMeasure, SphericalPair};
use crate::quadrature::QuadOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    /// Max over the sampled ξ of `|numerator(ν_ε) - ½Σ(ξ,θ)²ϕμ|`.
    pub deviations: Vec<f64>,
    /// Least-squares slope of `log deviation` against `log ε`; `None` when
    /// some deviation vanishes (e.g. every sampled ξ is orthogonal to μ).
    pub order: Option<f64>,
    pub decreasing: bool,
}

pub fn sphere_limit_check(
    pair: &SphericalPair,
    epsilons: &[f64],
    xis: &[Vec<f64>],
    opts: &QuadOptions,
) -> Result<ConvergenceReport> {
    if pair.is_empty() {
        return Err(Error::EmptySpectral);
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("epsilons must be positive".into()));
    }
    // relaxed pairs (|ϕ| ≤ 2) are evaluated with ϕ/k and rescaled
    let k = pair.max_modulus().max(1.0);
    let phi = JumpModulator::RadialAngular {
        values: pair.modulator().iter().map(|v| v / k).collect(),
    };
    let mut deviations = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let nu = LevyMeasure::PolarProduct {
            radial: RadialMeasure::PointMass {
                r: eps,
                mass: eps.powi(-2),
            },
            spectral: pair.spectral().clone(),
            min_radius: 0.0,
        };
        let eval = CosineEvaluator::new(&nu, &phi, opts)?;
        let mut worst: f64 = 0.0;
        for xi in xis {
            let lhs = eval.eval(xi)?.numerator * k;
            let (q, _) = pair.quadratic_parts(xi);
            let target: Complex64 = q * 0.5;
            worst = worst.max((lhs - target).norm());
        }
        deviations.push(worst);
    }
    let decreasing = {
        let mut order: Vec<(f64, f64)> = epsilons.iter().copied().zip(deviations.iter().copied()).collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0));
        order.windows(2).all(|w| w[1].1 <= w[0].1)
    };
    let order = if deviations.len() >= 2 && deviations.iter().all(|d| *d > 0.0) {
        let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = deviations.iter().map(|d| d.ln()).collect();
        Some(slope(&xs, &ys))
    } else {
        None
    };
    Ok(ConvergenceReport {
        epsilons: epsilons.to_vec(),
        deviations,
        order,
        decreasing,
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
