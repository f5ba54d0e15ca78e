//! Closed-form symbols and the one-dimensional identities behind them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta;

use crate::error::Result;
use crate::quadrature::{integrate_segments, QuadOptions};
use crate::vector::{norm_sq, one_minus_cos, planar_angle};

/// `(ξ₁ - iξ₂)²/|ξ|² = e^{-2i arg ξ}`, zero at the origin.
pub fn beurling_ahlfors(xi: &[f64]) -> Complex64 {
    let r2 = norm_sq(xi);
    if r2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let z = Complex64::new(xi[0], -xi[1]);
    z * z / r2
}

/// `-2ξ₁ξ₂/|ξ|²`, zero at the origin.
pub fn riesz_product(xi: &[f64]) -> Complex64 {
    let r2 = norm_sq(xi);
    if r2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(-2.0 * xi[0] * xi[1] / r2, 0.0)
}

/// `α/(α+2) · e^{-2i arg ξ}` for planar `ξ ≠ 0`.
pub fn stable_circle(alpha: f64, xi: &[f64]) -> Complex64 {
    if norm_sq(xi) == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(alpha / (alpha + 2.0), -2.0 * planar_angle(xi))
}

/// `|ξ_j|^α / Σ_k |ξ_k|^α`.
pub fn marcinkiewicz(alpha: f64, index: usize, xi: &[f64]) -> f64 {
    let den: f64 = xi.iter().map(|x| x.abs().powf(alpha)).sum();
    if den == 0.0 {
        0.0
    } else {
        xi[index].abs().powf(alpha) / den
    }
}

/// `ln(1+ξ_j^{-2}) / Σ_k ln(1+ξ_k^{-2})`; vanishing coordinates dominate.
pub fn tempered_coordinate(index: usize, xi: &[f64]) -> f64 {
    let zeros = xi.iter().filter(|x| **x == 0.0).count();
    if zeros == xi.len() {
        return 0.0;
    }
    if zeros > 0 {
        return if xi[index] == 0.0 { 1.0 / zeros as f64 } else { 0.0 };
    }
    let w = |x: f64| (1.0 / (x * x)).ln_1p();
    w(xi[index]) / xi.iter().map(|&x| w(x)).sum::<f64>()
}

/// `∫₀^∞ e^{-sx} (1 - cos x)/x dx` by adaptive quadrature over whole periods.
pub fn laplace_one_minus_cos_over_x(s: f64, opts: &QuadOptions) -> Result<f64> {
    // e^{-sX} < 1e-19 beyond X
    let end = 44.0 / s;
    let periods = (end / (2.0 * PI)).ceil() as usize;
    let points: Vec<f64> = (0..=periods).map(|k| 2.0 * PI * k as f64).collect();
    let f = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            (-s * x).exp() * one_minus_cos(x) / x
        }
    };
    Ok(integrate_segments(f, &points, opts)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaIdentity {
    pub alpha: f64,
    /// `∫₀^{2π} |cos v|^α cos 2v dv` by quadrature.
    pub quadrature: f64,
    /// `(2α/(α+2)) · B((α+1)/2, ½)`.
    pub closed_form: f64,
    /// `∫₀^{2π} |cos v|^α dv = 2 B((α+1)/2, ½)`, by quadrature.
    pub mass_quadrature: f64,
}

impl BetaIdentity {
    pub fn error(&self) -> f64 {
        (self.quadrature - self.closed_form).abs()
    }

    /// The ratio `∫|cos|^α cos 2v / ∫|cos|^α`, which should be `α/(α+2)`.
    pub fn ratio(&self) -> f64 {
        self.quadrature / self.mass_quadrature
    }
}

pub fn beta_identity(alpha: f64, opts: &QuadOptions) -> Result<BetaIdentity> {
    let points = [0.0, 0.5 * PI, 1.5 * PI, 2.0 * PI];
    let quadrature = integrate_segments(|v: f64| v.cos().abs().powf(alpha) * (2.0 * v).cos(), &points, opts)?.value;
    let mass_quadrature = integrate_segments(|v: f64| v.cos().abs().powf(alpha), &points, opts)?.value;
    let closed_form = 2.0 * alpha / (alpha + 2.0) * beta((alpha + 1.0) / 2.0, 0.5);
    Ok(BetaIdentity {
        alpha,
        quadrature,
        closed_form,
        mass_quadrature,
    })
}
