//! Monte Carlo campaigns over many paths.
//!
//! Paths are simulated in parallel and collected in index order, and every
//! mean is a pairwise sum over that order, so results do not depend on the
//! thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_subordination, PathBundle, Process, TestFunction};
use crate::error::{Error, Result};
use crate::levy_measure::{JumpModulator, LevyExponent, LevyMeasure};
use crate::multiplier_apply::{conjugate_exponent_bound, GridFunction, Multiplier};
use crate::quadrature::{integrate, pairwise_sum, QuadOptions};
use crate::symbol::Symbol;

/// A check passes when its margin is at least `-PASS_SIGMA` standard errors.
pub const PASS_SIGMA: f64 = 4.0;
/// A margin below `-BUG_SIGMA` standard errors points at an implementation error.
pub const BUG_SIGMA: f64 = 5.0;
const EXACT_SLACK: f64 = 1e-12;

/// The process and modulator shared by a campaign.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub measure: LevyMeasure,
    pub drift: Vec<f64>,
    #[serde(default = "JumpModulator::one")]
    pub modulator: JumpModulator,
    pub horizon: f64,
    /// Starting point `x`; the origin when absent.
    #[serde(default)]
    pub point: Option<Vec<f64>>,
}

impl Scenario {
    pub fn new(measure: LevyMeasure, drift: Vec<f64>, modulator: JumpModulator, horizon: f64) -> Self {
        Self {
            measure,
            drift,
            modulator,
            horizon,
            point: None,
        }
    }

    pub fn at(mut self, point: Vec<f64>) -> Self {
        self.point = Some(point);
        self
    }

    pub fn process(&self) -> Result<Process> {
        Process::new(&self.measure, self.drift.clone(), self.horizon)
    }

    pub fn point(&self) -> Vec<f64> {
        self.point.clone().unwrap_or_else(|| vec![0.0; self.measure.dim()])
    }
}

/// `estimate` is compared with `bound`; `sigma_margin` is the slack in
/// standard errors, negative when the estimate is on the wrong side.
///
/// For one-sided checks the slack is `bound - estimate`, for equalities it is
/// `-|estimate - bound|`. A check passes when the margin is `≥ -4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub sigma_margin: f64,
    pub pass: bool,
    pub paths: usize,
}

impl StatReport {
    /// `mean(samples) ≤ bound`, where `slack_i` are per-path values of
    /// `bound - estimate` (common random numbers).
    pub fn upper_bound(estimate: f64, bound: f64, slack: &[f64]) -> Self {
        let (mean, se) = mean_and_error(slack);
        Self::finish(estimate, bound, mean, se, slack.len())
    }

    /// `mean(samples) = target`.
    pub fn equality(samples: &[f64], target: f64) -> Self {
        let (mean, se) = mean_and_error(samples);
        let diff = -(mean - target).abs();
        Self::finish(mean, target, diff, se, samples.len())
    }

    /// Equality with an extra independent error added in quadrature.
    pub fn equality_with_error(samples: &[f64], target: f64, extra: f64) -> Self {
        let (mean, se) = mean_and_error(samples);
        let se = se.hypot(extra);
        Self::finish(mean, target, -(mean - target).abs(), se, samples.len())
    }

    fn finish(estimate: f64, bound: f64, slack: f64, std_error: f64, paths: usize) -> Self {
        let scale = 1.0 + estimate.abs().max(bound.abs());
        let sigma_margin = if std_error > 0.0 {
            slack / std_error
        } else if slack >= -EXACT_SLACK * scale {
            // deterministic agreement
            f64::MAX
        } else {
            f64::MIN
        };
        Self {
            estimate,
            std_error,
            bound,
            sigma_margin,
            pass: sigma_margin >= -PASS_SIGMA,
            paths,
        }
    }

    /// Margin beyond `-5σ`.
    pub fn is_bug(&self) -> bool {
        self.sigma_margin < -BUG_SIGMA
    }
}

/// Real and imaginary parts of a complex equality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexReport {
    pub real: StatReport,
    pub imag: StatReport,
}

impl ComplexReport {
    pub fn equality(samples: &[Complex64], target: Complex64, extra: f64) -> Self {
        let re: Vec<f64> = samples.iter().map(|v| v.re).collect();
        let im: Vec<f64> = samples.iter().map(|v| v.im).collect();
        Self {
            real: StatReport::equality_with_error(&re, target.re, extra),
            imag: StatReport::equality_with_error(&im, target.im, extra),
        }
    }

    pub fn pass(&self) -> bool {
        self.real.pass && self.imag.pass
    }

    pub fn estimate(&self) -> Complex64 {
        Complex64::new(self.real.estimate, self.imag.estimate)
    }
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn complex_sum(values: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

fn check_paths(paths: usize) -> Result<()> {
    if paths < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 paths, got {paths}")));
    }
    Ok(())
}

fn per_path<T, F>(process: &Process, paths: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&PathBundle) -> Result<T> + Sync,
{
    (0..paths as u64)
        .into_par_iter()
        .map(|i| f(&process.sample(seed, i)))
        .collect()
}

/// `E|G_u|^p ≤ (p*-1)^p E|F_u|^p` at the scenario point for each `p`, with
/// `F = F(·; u, f)` and `G = G(·; u, f, φ)` on shared paths.
pub fn wang_campaign(scenario: &Scenario, f: &TestFunction, ps: &[f64], paths: usize, seed: u64) -> Result<Vec<StatReport>> {
    check_paths(paths)?;
    if let Some(p) = ps.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
        return Err(Error::InvalidInput(format!("p must lie in (1, ∞), got {p}")));
    }
    let process = scenario.process()?;
    let phi = process.modulator_values(&scenario.modulator)?;
    let x = scenario.point();
    let terminal = per_path(&process, paths, seed, |path| {
        let pair = process.martingales(path, f, f, &phi, &x)?;
        Ok((pair.f_terminal().expect("F").norm(), pair.g_terminal().expect("G").norm()))
    })?;
    Ok(ps
        .iter()
        .map(|&p| {
            let c = conjugate_exponent_bound(p).powf(p);
            let lhs: Vec<f64> = terminal.iter().map(|(_, g)| g.powf(p)).collect();
            let rhs: Vec<f64> = terminal.iter().map(|(f, _)| c * f.powf(p)).collect();
            let slack: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
            let n = paths as f64;
            StatReport::upper_bound(pairwise_sum(&lhs) / n, pairwise_sum(&rhs) / n, &slack)
        })
        .collect())
}

pub fn check_wang_inequality(scenario: &Scenario, f: &TestFunction, p: f64, paths: usize, seed: u64) -> Result<StatReport> {
    Ok(wang_campaign(scenario, f, &[p], paths, seed)?[0])
}

/// Pathwise audit of quadratic-variation increments with `f = g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationReport {
    pub paths: usize,
    pub increments: usize,
    pub violations: usize,
    pub max_excess: f64,
    pub pass: bool,
}

pub fn subordination_audit(scenario: &Scenario, g: &TestFunction, paths: usize, seed: u64) -> Result<SubordinationReport> {
    let process = scenario.process()?;
    let phi = process.modulator_values(&scenario.modulator)?;
    let x = scenario.point();
    let counts = per_path(&process, paths, seed, |path| {
        let pair = process.martingales(path, g, g, &phi, &x)?;
        check_subordination(&pair, &pair)
    })?;
    let increments = counts.iter().map(|c| c.increments).sum();
    let violations = counts.iter().map(|c| c.violations).sum();
    let max_excess = counts.iter().map(|c| c.max_excess).fold(f64::NEG_INFINITY, f64::max);
    Ok(SubordinationReport {
        paths,
        increments,
        violations,
        max_excess,
        pass: violations == 0,
    })
}

/// `Λ(g, f)` by simulation and by the truncated symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub monte_carlo: Complex64,
    pub fourier: Complex64,
    /// Change of the Fourier side when the grid is halved.
    pub quadrature_error: f64,
    pub check: ComplexReport,
    pub pass: bool,
}

/// `(2π)^{-d} ∫ ĝ(ξ) f̂(-ξ) M_u(ξ) dξ = ∫ (T_{M_u} g) f dx` on the grid.
pub fn fourier_pairing(
    measure: &LevyMeasure,
    phi: &JumpModulator,
    horizon: f64,
    f: &TestFunction,
    g: &TestFunction,
    n: usize,
    length: f64,
) -> Result<Complex64> {
    let symbol = Symbol::truncated(measure, phi, horizon, &QuadOptions::default())?;
    let gg = g.to_grid(n, length)?;
    let ff = f.to_grid(n, length)?;
    let tg = Multiplier::for_grid(&symbol, &gg)?.apply(&gg)?;
    let cell = gg.spacing().powi(gg.dim() as i32);
    let products: Vec<Complex64> = tg.values().iter().zip(ff.values()).map(|(a, b)| a * b).collect();
    Ok(complex_sum(&products) * cell)
}

/// `Λ(g, f) = ∫ E[G_u(x; u, g, φ) F_u(x; u, f)] dx` by simulation on the
/// `N^d` grid of side `L`, against the Fourier side on the same grid.
pub fn pairing_identity(
    scenario: &Scenario,
    f: &TestFunction,
    g: &TestFunction,
    n: usize,
    length: f64,
    paths: usize,
    seed: u64,
) -> Result<PairingReport> {
    check_paths(paths)?;
    let process = scenario.process()?;
    let phi = process.modulator_values(&scenario.modulator)?;
    let grid = GridFunction::zeros(process.dim(), n, length)?;
    let xs: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let cell = grid.spacing().powi(grid.dim() as i32);
    let samples = per_path(&process, paths, seed, |path| {
        let mut terms = Vec::with_capacity(xs.len());
        for x in &xs {
            let pair = process.martingales(path, f, g, &phi, x)?;
            terms.push(pair.g_terminal().expect("G") * pair.f_terminal().expect("F"));
        }
        Ok(complex_sum(&terms) * cell)
    })?;
    let fourier = fourier_pairing(&scenario.measure, &scenario.modulator, scenario.horizon, f, g, n, length)?;
    let coarse = fourier_pairing(&scenario.measure, &scenario.modulator, scenario.horizon, f, g, n / 2, length)?;
    let quadrature_error = (fourier - coarse).norm();
    let check = ComplexReport::equality(&samples, fourier, quadrature_error);
    Ok(PairingReport {
        monte_carlo: check.estimate(),
        fourier,
        quadrature_error,
        check,
        pass: check.pass(),
    })
}

/// Empirical characteristic function of `X^b_u` at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPoint {
    pub xi: Vec<f64>,
    pub exact: Complex64,
    pub check: ComplexReport,
    pub pass: bool,
}

pub fn characteristic_check(scenario: &Scenario, xis: &[Vec<f64>], paths: usize, seed: u64) -> Result<Vec<CharacteristicPoint>> {
    check_paths(paths)?;
    let process = scenario.process()?;
    let exponent = LevyExponent::new(&scenario.measure, &QuadOptions::default())?;
    let u = scenario.horizon;
    let ends = per_path(&process, paths, seed, |path| Ok(path.position(u)))?;
    xis.iter()
        .map(|xi| {
            let exact = exponent.characteristic(u, &scenario.drift, xi)?;
            let samples: Vec<Complex64> = ends
                .iter()
                .map(|x| Complex64::from_polar(1.0, crate::vector::dot(xi, x)))
                .collect();
            let check = ComplexReport::equality(&samples, exact, 0.0);
            Ok(CharacteristicPoint {
                xi: xi.clone(),
                exact,
                check,
                pass: check.pass(),
            })
        })
        .collect()
}

/// `E F_t = F_0` at `t = fraction · u` for each fraction.
pub fn martingale_check(
    scenario: &Scenario,
    f: &TestFunction,
    fractions: &[f64],
    paths: usize,
    seed: u64,
) -> Result<Vec<ComplexReport>> {
    check_paths(paths)?;
    let process = scenario.process()?;
    let x = scenario.point();
    let u = scenario.horizon;
    let f0 = process.drift_semigroup(f, &x, u);
    let times: Vec<f64> = fractions.iter().map(|s| (s * u).clamp(0.0, u)).collect();
    let values = per_path(&process, paths, seed, |path| {
        Ok(times.iter().map(|&t| process.parabolic_at(path, f, &x, t)).collect::<Vec<_>>())
    })?;
    Ok((0..times.len())
        .map(|k| {
            let samples: Vec<Complex64> = values.iter().map(|v| v[k]).collect();
            ComplexReport::equality(&samples, f0, 0.0)
        })
        .collect())
}

/// `E Σ_{S_i ≤ t} H(S_i, X^b_{S_i-}, X^b_{S_i})` against
/// `∫_0^t ∫∫ H(v, y + vb, y + vb + z) ν(dz) p_v(dy) dv`.
pub fn jump_functional_check<H>(scenario: &Scenario, t: f64, h: H, paths: usize, seed: u64) -> Result<ComplexReport>
where
    H: Fn(f64, &[f64], &[f64]) -> Complex64 + Sync,
{
    check_paths(paths)?;
    let process = scenario.process()?;
    if !(t > 0.0 && t <= process.horizon) {
        return Err(Error::InvalidInput(format!("time {t} outside (0, u]")));
    }
    let samples = per_path(&process, paths, seed, |path| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut before = vec![0.0; process.dim];
        for s in path.signals.iter().take_while(|s| s.time <= t) {
            let left: Vec<f64> = before.iter().zip(&process.drift).map(|(l, b)| l + s.time * b).collect();
            let after: Vec<f64> = left.iter().zip(&s.jump).map(|(l, z)| l + z).collect();
            acc += h(s.time, &left, &after);
            for (l, z) in before.iter_mut().zip(&s.jump) {
                *l += z;
            }
        }
        Ok(acc)
    })?;
    let d = process.dim;
    let integrand = |v: f64| -> Complex64 {
        let mut w = vec![0.0; process.n_max + 1];
        process.poisson_row(process.rate * v, &mut w);
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, wn) in w.iter().enumerate() {
            for a in process.offsets[n]..process.offsets[n + 1] {
                let y: Vec<f64> = (0..d)
                    .map(|k| process.points[a * d + k] + v * process.drift[k])
                    .collect();
                for atom in &process.atoms {
                    let after: Vec<f64> = y.iter().zip(&atom.point).map(|(a, z)| a + z).collect();
                    acc += h(v, &y, &after) * (wn * process.weights[a] * atom.mass);
                }
            }
        }
        acc
    };
    let exact = integrate(integrand, 0.0, t, &QuadOptions::default())?;
    Ok(ComplexReport::equality(&samples, exact.value, exact.error))
}
