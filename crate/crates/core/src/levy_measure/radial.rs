//! Radial factors of polar Lévy measures and their one-dimensional transforms.
//!
//! For a radial measure ρ restricted to `(m, ∞)` the symbol and exponent
//! need, at a projected frequency `s = (ξ,θ)`,
//!
//! * the cosine kernel `K(s) = ∫ (1 - cos rs) ρ(dr)`,
//! * the sine kernel `S(s) = ∫ sin(rs) ρ(dr)` (finite measures only).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{exp_power_tail, integrate, integrate_segments, integrate_to_infinity, QuadOptions};
use crate::vector::one_minus_cos;

/// `ρ(dr)` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialMeasure {
    /// `mass · δ_r`.
    PointMass { r: f64, mass: f64 },
    /// `e^{-r} dr / r`.
    ExpOverR,
}

impl RadialMeasure {
    pub fn check(&self) -> Result<()> {
        match *self {
            RadialMeasure::PointMass { r, mass } => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::InvalidInput(format!("point-mass radius must be positive, got {r}")));
                }
                if !(mass > 0.0 && mass.is_finite()) {
                    return Err(Error::InvalidInput(format!("point-mass weight must be positive, got {mass}")));
                }
                Ok(())
            }
            RadialMeasure::ExpOverR => Ok(()),
        }
    }

    /// `ρ((a, b])`, with `b = ∞` allowed.
    pub fn mass_between(&self, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
        match *self {
            RadialMeasure::PointMass { r, mass } => Ok(if r > a && r <= b { mass } else { 0.0 }),
            RadialMeasure::ExpOverR => {
                if a <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                let density = |r: f64| (-r).exp() / r;
                if b.is_infinite() {
                    Ok(integrate_to_infinity(density, a, opts)?.value)
                } else {
                    Ok(integrate(density, a, b, opts)?.value)
                }
            }
        }
    }

    /// `∫_{(a,b]} r² ρ(dr)`.
    pub fn second_moment_between(&self, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
        match *self {
            RadialMeasure::PointMass { r, mass } => Ok(if r > a && r <= b { r * r * mass } else { 0.0 }),
            RadialMeasure::ExpOverR => {
                let f = |r: f64| r * (-r).exp();
                if b.is_infinite() {
                    Ok(integrate_to_infinity(f, a, opts)?.value)
                } else {
                    Ok(integrate(f, a, b, opts)?.value)
                }
            }
        }
    }

    /// `K(s) = ∫_{(m,∞)} (1 - cos rs) ρ(dr)`.
    pub fn cosine_kernel(&self, s: f64, m: f64, opts: &QuadOptions) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match *self {
            RadialMeasure::PointMass { r, mass } => Ok(if r > m { mass * one_minus_cos(r * s) } else { 0.0 }),
            RadialMeasure::ExpOverR => {
                let f = |r: f64| one_minus_cos(r * s) * (-r).exp() / r;
                if m <= 0.0 {
                    Ok(0.5 * (s * s).ln_1p())
                } else if m <= 1.0 {
                    let head = integrate_segments(f, &period_points(0.0, m, s), opts)?.value;
                    Ok(0.5 * (s * s).ln_1p() - head)
                } else {
                    Ok(integrate_segments(f, &period_points(m, m + EXP_CUTOFF, s), opts)?.value)
                }
            }
        }
    }

    /// `S(s) = ∫_{(m,∞)} sin(rs) ρ(dr)`; requires finite mass when `m = 0` is not covered.
    pub fn sine_kernel(&self, s: f64, m: f64, opts: &QuadOptions) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match *self {
            RadialMeasure::PointMass { r, mass } => Ok(if r > m { mass * (r * s).sin() } else { 0.0 }),
            RadialMeasure::ExpOverR => {
                let f = |r: f64| {
                    if r == 0.0 {
                        s
                    } else {
                        (r * s).sin() * (-r).exp() / r
                    }
                };
                if m <= 1.0 {
                    let head = integrate_segments(f, &period_points(0.0, m.max(0.0), s), opts)?.value;
                    Ok(s.atan() - head)
                } else {
                    Ok(integrate_segments(f, &period_points(m, m + EXP_CUTOFF, s), opts)?.value)
                }
            }
        }
    }

    /// Smallest `R` with `ρ((R,∞)) < tail` (or the support end for point masses).
    pub fn tail_radius(&self, tail: f64) -> f64 {
        match *self {
            RadialMeasure::PointMass { r, .. } => r,
            RadialMeasure::ExpOverR => {
                // ρ((R,∞)) ≤ e^{-R}/R
                let mut r: f64 = 1.0;
                while (-r).exp() / r >= tail {
                    r += 1.0;
                }
                r
            }
        }
    }
}

/// Beyond `m + 50` the factor `e^{-r}` is below `2e-22` relative to `e^{-m}`.
const EXP_CUTOFF: f64 = 50.0;

/// Breakpoints on `[a, b]` at multiples of the period `2π/|s|`, capped in number.
fn period_points(a: f64, b: f64, s: f64) -> Vec<f64> {
    let period = 2.0 * PI / s.abs();
    let count = ((b - a) / period).ceil().min(20_000.0) as usize;
    let mut points: Vec<f64> = (0..count).map(|k| a + (b - a) * k as f64 / count.max(1) as f64).collect();
    points.push(b);
    points.dedup();
    points
}

/// `c_α = ∫₀^∞ (1 - cos s) s^{-1-α} ds`, so that `∫ (1 - cos rs) r^{-1-α} dr = c_α |s|^α`.
pub fn stable_constant(alpha: f64, opts: &QuadOptions) -> Result<f64> {
    stable_cosine_tail(0.0, alpha, opts)
}

/// `T(a) = ∫_a^∞ (1 - cos x) x^{-1-α} dx`.
pub fn stable_cosine_tail(a: f64, alpha: f64, opts: &QuadOptions) -> Result<f64> {
    check_alpha(alpha)?;
    let two_pi = 2.0 * PI;
    let f = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            one_minus_cos(x) * x.powf(-1.0 - alpha)
        }
    };
    if a < two_pi {
        let head = integrate(f, a, two_pi, opts)?.value;
        let tail = two_pi.powf(-alpha) / alpha - exp_power_tail(two_pi, 1.0 + alpha, opts)?.re;
        Ok(head + tail)
    } else {
        Ok(a.powf(-alpha) / alpha - exp_power_tail(a, 1.0 + alpha, opts)?.re)
    }
}

/// Stable cosine kernel `∫_{(m,∞)} (1 - cos rs) r^{-1-α} dr = |s|^α T(m|s|)`.
pub fn stable_cosine_kernel(s: f64, m: f64, alpha: f64, c_alpha: f64, opts: &QuadOptions) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let scale = s.abs().powf(alpha);
    if m <= 0.0 {
        Ok(c_alpha * scale)
    } else {
        Ok(scale * stable_cosine_tail(m * s.abs(), alpha, opts)?)
    }
}

/// Stable sine kernel `∫_{(m,∞)} sin(rs) r^{-1-α} dr` for `m > 0`.
pub fn stable_sine_kernel(s: f64, m: f64, alpha: f64, opts: &QuadOptions) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    if m <= 0.0 {
        return Err(Error::InfiniteMass);
    }
    let j = exp_power_tail(m * s.abs(), 1.0 + alpha, opts)?;
    Ok(s.signum() * s.abs().powf(alpha) * j.im)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::NonIntegrable(format!("stability index {alpha} outside (0, 2)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn stable_constant_matches_gamma_reflection() {
        let opts = QuadOptions::default();
        for alpha in [0.3, 0.5, 1.2, 1.5, 1.9] {
            let oracle = -gamma(-alpha) * (PI * alpha / 2.0).cos();
            let c = stable_constant(alpha, &opts).unwrap();
            assert!((c / oracle - 1.0).abs() < 1e-9, "alpha {alpha}: {c} vs {oracle}");
        }
        let c1 = stable_constant(1.0, &opts).unwrap();
        assert!((c1 - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn exp_over_r_cosine_kernel_is_half_log() {
        let opts = QuadOptions::default();
        for s in [0.1, 1.0, 7.5] {
            let direct = integrate_to_infinity(|r: f64| one_minus_cos(r * s) * (-r).exp() / r, 0.0, &opts)
                .unwrap()
                .value;
            let k = RadialMeasure::ExpOverR.cosine_kernel(s, 0.0, &opts).unwrap();
            assert!((k - direct).abs() < 1e-9, "{k} vs {direct}");
        }
    }

    #[test]
    fn restricted_kernels_agree_across_branches() {
        let opts = QuadOptions::default();
        let rho = RadialMeasure::ExpOverR;
        for m in [0.3, 1.7] {
            for s in [0.5, 3.0] {
                let f = |r: f64| one_minus_cos(r * s) * (-r).exp() / r;
                let direct = integrate(f, m, m + 60.0, &opts).unwrap().value;
                let k = rho.cosine_kernel(s, m, &opts).unwrap();
                assert!((k - direct).abs() < 1e-10);
                let g = |r: f64| (r * s).sin() * (-r).exp() / r;
                let direct = integrate(g, m, m + 60.0, &opts).unwrap().value;
                let v = rho.sine_kernel(s, m, &opts).unwrap();
                assert!((v - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn alpha_outside_range_is_not_integrable() {
        assert!(matches!(check_alpha(2.0), Err(Error::NonIntegrable(_))));
        assert!(matches!(check_alpha(0.0), Err(Error::NonIntegrable(_))));
    }
}
