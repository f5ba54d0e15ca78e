use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GridFunction, Multiplier};
use crate::error::{Error, Result};
use crate::rng::{StreamKey, StreamPurpose};
use crate::symbol::Symbol;

/// `(Σ |g|^p h^d)^{1/p}`, or `max |g|` for `p = ∞`.
pub fn lp_norm(g: &GridFunction, p: f64) -> f64 {
    if p == f64::INFINITY {
        return g.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let cell = g.spacing().powi(g.dim() as i32);
    (power_sum(g.values(), p) * cell).powf(1.0 / p)
}

fn power_sum(values: &[Complex64], p: f64) -> f64 {
    values.iter().map(|v| v.norm().powf(p)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchFamily {
    Wave,
    TrigPolynomial,
    Gaussian,
    PowerSingularity,
    Noise,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    pub input_norm: f64,
    pub output_norm: f64,
    /// Best `‖Mg‖_p/‖g‖_p` found: a lower bound for the operator norm.
    pub ratio: f64,
    /// `p* - 1 = max(p - 1, 1/(p - 1))`.
    pub bound: f64,
    /// `max |M|` over the lattice.
    pub symbol_sup: f64,
    pub family: SearchFamily,
    pub trials: usize,
    pub iterations: usize,
    /// `ratio > bound · max(1, symbol_sup) · (1 + 1e-6)`.
    pub discretization_suspect: bool,
}

/// Grid and budget for [`estimate_operator_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSearch {
    pub n: usize,
    pub length: f64,
    /// Random trigonometric polynomials, translated Gaussians and power singularities, in rotation.
    pub trials: usize,
    /// Gradient-ascent steps per refined start.
    pub iterations: usize,
    pub seed: u64,
}

impl NormSearch {
    pub fn for_dim(dim: usize) -> Self {
        let n = match dim {
            1 => 4096,
            2 => 256,
            3 => 32,
            _ => 8,
        };
        Self {
            n,
            length: 2.0 * std::f64::consts::PI,
            trials: 64,
            iterations: 300,
            seed: 0,
        }
    }
}

pub fn conjugate_exponent_bound(p: f64) -> f64 {
    (p - 1.0).max(1.0 / (p - 1.0))
}

/// Best ratio over plane waves at the largest `|M|`, random trigonometric
/// polynomials, translated Gaussians, truncated power singularities
/// `|x|^{-2/p+δ}`, and gradient ascent from the best of those and from a
/// noise field.
///
/// Everything except the plane waves lives in the band `|k_j| ≤ N/4`, so the
/// grid oversamples the test functions at least twice and the Riemann-sum
/// norms track the continuous ones. Unrestricted grid functions concentrated
/// near the Nyquist frequency see a different operator (the periodized
/// lattice symbol) whose norm can exceed the continuous one.
pub fn estimate_operator_norm(symbol: &Symbol, p: f64, search: &NormSearch) -> Result<NormReport> {
    let mult = Multiplier::new(symbol, symbol.dim(), search.n, search.length)?;
    estimate_with_multiplier(&mult, p, search)
}

pub fn estimate_with_multiplier(mult: &Multiplier, p: f64, search: &NormSearch) -> Result<NormReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("p must lie in (1, ∞), got {p}")));
    }
    let shape = GridFunction::zeros(mult.dim, mult.n, mult.length)?;
    let key = StreamKey::new(search.seed, StreamPurpose::Search);

    let band = Band::new(&shape);
    let mut candidates: Vec<(SearchFamily, Vec<Complex64>)> = top_frequencies(mult, 8)
        .into_iter()
        .map(|idx| {
            let mut data = vec![Complex64::new(0.0, 0.0); shape.len()];
            data[idx] = Complex64::new(1.0, 0.0);
            mult.fft.inverse(&mut data);
            (SearchFamily::Wave, data)
        })
        .collect();
    let random: Vec<(SearchFamily, Vec<Complex64>)> = (0..search.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.stream(i as u64 + 1);
            let (family, mut g) = match i % 3 {
                0 => (SearchFamily::TrigPolynomial, trig_polynomial(&shape, &mult.fft, &mut rng)),
                1 => (SearchFamily::Gaussian, gaussian(&shape, &mut rng)),
                _ => (SearchFamily::PowerSingularity, power_singularity(&shape, p, &mut rng)),
            };
            band.project(&mult.fft, &mut g);
            (family, g)
        })
        .collect();
    candidates.extend(random);

    let scored: Vec<f64> = candidates.par_iter().map(|(_, g)| ratio(mult, g, p)).collect();
    let mut best = 0;
    for (k, r) in scored.iter().enumerate() {
        if *r > scored[best] {
            best = k;
        }
    }
    let mut best_family = candidates[best].0;
    let mut best_ratio = scored[best];
    let mut best_values = candidates[best].1.clone();

    if search.iterations > 0 {
        let mut rng = key.stream(0);
        let mut noise: Vec<Complex64> = (0..shape.len())
            .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
            .collect();
        band.project(&mult.fft, &mut noise);
        let mut starts = vec![noise];
        if let Some(k) = best_in_band(&candidates, &scored) {
            starts.push(candidates[k].1.clone());
        }
        let refined: Vec<(Vec<Complex64>, f64)> = starts
            .par_iter()
            .map(|g| ascend(mult, &band, g.clone(), p, search.iterations))
            .collect();
        for (values, r) in refined {
            if r > best_ratio {
                best_ratio = r;
                best_values = values;
                best_family = SearchFamily::Gradient;
            }
        }
    }

    let g = shape.with_values(best_values)?;
    let h = mult.apply(&g)?;
    let input_norm = lp_norm(&g, p);
    let output_norm = lp_norm(&h, p);
    let bound = conjugate_exponent_bound(p);
    let symbol_sup = mult.sup();
    Ok(NormReport {
        p,
        input_norm,
        output_norm,
        ratio: best_ratio,
        bound,
        symbol_sup,
        family: best_family,
        trials: search.trials,
        iterations: search.iterations,
        discretization_suspect: best_ratio > bound * symbol_sup.max(1.0) * (1.0 + 1e-6),
    })
}

fn best_in_band(candidates: &[(SearchFamily, Vec<Complex64>)], scored: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, (family, _)) in candidates.iter().enumerate() {
        if *family != SearchFamily::Wave && best.is_none_or(|b| scored[k] > scored[b]) {
            best = Some(k);
        }
    }
    best
}

/// Indicator of the frequencies `|k_j| ≤ N/4` in DFT order.
struct Band {
    mask: Vec<bool>,
}

impl Band {
    fn new(shape: &GridFunction) -> Self {
        let n = shape.n();
        let limit = (n / 4) as i64;
        let mask = (0..shape.len())
            .map(|idx| {
                let mut rest = idx;
                (0..shape.dim()).all(|_| {
                    let j = (rest % n) as i64;
                    rest /= n;
                    let k = if j < n as i64 / 2 { j } else { j - n as i64 };
                    k.abs() <= limit
                })
            })
            .collect();
        Self { mask }
    }

    fn project(&self, fft: &super::GridFft, data: &mut [Complex64]) {
        fft.forward(data);
        for (v, keep) in data.iter_mut().zip(&self.mask) {
            if !keep {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        fft.inverse(data);
    }
}

fn top_frequencies(mult: &Multiplier, count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..mult.table.len()).collect();
    idx.sort_by(|&a, &b| mult.table[b].norm().total_cmp(&mult.table[a].norm()).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

fn ratio(mult: &Multiplier, g: &[Complex64], p: f64) -> f64 {
    let mut h = g.to_vec();
    mult.apply_in_place(&mut h, false);
    let b = power_sum(g, p);
    if b == 0.0 {
        return 0.0;
    }
    (power_sum(&h, p) / b).powf(1.0 / p)
}

fn trig_polynomial<R: Rng>(shape: &GridFunction, fft: &super::GridFft, rng: &mut R) -> Vec<Complex64> {
    let n = shape.n();
    let terms = rng.random_range(1..=8);
    let mut data = vec![Complex64::new(0.0, 0.0); shape.len()];
    for _ in 0..terms {
        let mut idx = 0;
        for _ in 0..shape.dim() {
            // |k| ≤ N/4 per axis
            let k: i64 = rng.random_range(-(n as i64) / 4..=(n as i64) / 4);
            idx = idx * n + k.rem_euclid(n as i64) as usize;
        }
        data[idx] += Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    fft.inverse(&mut data);
    data
}

/// `(|x - c|² + h²)^{(-2/p+δ)/2}` under a Gaussian window of width `L/8`.
fn power_singularity<R: Rng>(shape: &GridFunction, p: f64, rng: &mut R) -> Vec<Complex64> {
    let l = shape.length();
    let h2 = shape.spacing().powi(2);
    let center: Vec<f64> = (0..shape.dim()).map(|_| rng.random_range(-0.05 * l..0.05 * l)).collect();
    let exponent = -(shape.dim() as f64) / p + rng.random_range(0.02..0.3);
    let window = (l / 8.0).powi(2);
    (0..shape.len())
        .map(|idx| {
            let x = shape.point(idx);
            let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            Complex64::new((r2 + h2).powf(0.5 * exponent) * (-0.5 * r2 / window).exp(), 0.0)
        })
        .collect()
}

fn gaussian<R: Rng>(shape: &GridFunction, rng: &mut R) -> Vec<Complex64> {
    let l = shape.length();
    let center: Vec<f64> = (0..shape.dim()).map(|_| rng.random_range(-0.25 * l..0.25 * l)).collect();
    let width = l * rng.random_range(1.0 / 64.0..1.0 / 16.0);
    (0..shape.len())
        .map(|idx| {
            let x = shape.point(idx);
            let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            Complex64::new((-0.5 * r2 / (width * width)).exp(), 0.0)
        })
        .collect()
}

/// Ratio `R = (Σ|Tg|^p / Σ|g|^p)^{1/p}` and its steepest-ascent direction
/// `R (T*(|h|^{p-2}h)/Σ|h|^p - |g|^{p-2}g/Σ|g|^p)`, `h = Tg`.
fn value_and_gradient(mult: &Multiplier, band: &Band, g: &[Complex64], p: f64) -> (f64, Vec<Complex64>) {
    let mut h = g.to_vec();
    mult.apply_in_place(&mut h, false);
    let a = power_sum(&h, p);
    let b = power_sum(g, p);
    if a == 0.0 || b == 0.0 {
        return (0.0, vec![Complex64::new(0.0, 0.0); g.len()]);
    }
    let r = (a / b).powf(1.0 / p);
    let weighted = |v: &Complex64| {
        let m = v.norm();
        if m == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            v * m.powf(p - 2.0)
        }
    };
    let mut da: Vec<Complex64> = h.iter().map(weighted).collect();
    mult.apply_in_place(&mut da, true);
    let mut grad: Vec<Complex64> = da
        .iter()
        .zip(g)
        .map(|(u, x)| (u / a - weighted(x) / b) * r)
        .collect();
    band.project(&mult.fft, &mut grad);
    (r, grad)
}

/// Normalized gradient ascent inside the band; the step grows by 1.2 on
/// acceptance and halves on rejection.
fn ascend(mult: &Multiplier, band: &Band, start: Vec<Complex64>, p: f64, iterations: usize) -> (Vec<Complex64>, f64) {
    let mut x = start;
    let (mut r, mut grad) = value_and_gradient(mult, band, &x, p);
    let mut eta = 0.025;
    for _ in 0..iterations {
        let gmax = grad.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let xmax = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if gmax == 0.0 || xmax == 0.0 {
            break;
        }
        let step = eta * xmax / gmax;
        let trial: Vec<Complex64> = x.iter().zip(&grad).map(|(a, d)| a + d * step).collect();
        let (rt, gt) = value_and_gradient(mult, band, &trial, p);
        if rt > r {
            x = trial;
            r = rt;
            grad = gt;
            eta = (eta * 1.2).min(0.2);
        } else {
            eta *= 0.5;
            if eta < 1e-9 {
                break;
            }
        }
    }
    (x, r)
}
