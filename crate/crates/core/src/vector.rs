//! Small dense-vector helpers for points in ℝᵈ.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `1 - cos x`, written as `2 sin²(x/2)` so small arguments keep full precision.
#[inline]
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Polar angle of a planar vector.
#[inline]
pub fn planar_angle(v: &[f64]) -> f64 {
    v[1].atan2(v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_minus_cos_keeps_small_argument_precision() {
        let x: f64 = 1e-5;
        let exact = x * x / 2.0 - x.powi(4) / 24.0;
        assert!((one_minus_cos(x) - exact).abs() < 1e-25);
        assert!((one_minus_cos(2.0) - (1.0 - 2f64.cos())).abs() < 1e-15);
    }
}
