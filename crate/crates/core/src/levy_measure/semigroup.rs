//! Compound-Poisson transition measures `p_t = e^{-t|ν|} Σ tⁿ/n! ν^{*n}` for atomic ν.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::spectral::Atom;
use super::LevyMeasure;
use crate::error::{Error, Result};
use crate::vector::dot;

/// Atoms closer than this merge by adding masses.
pub const MERGE_TOLERANCE: f64 = 1e-12;
/// Default bound on the atom count of a single convolution power.
pub const DEFAULT_ATOM_CAP: usize = 200_000;

/// A finite atomic measure on ℝᵈ (typically a sub-probability).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicDistribution {
    pub dim: usize,
    pub atoms: Vec<Atom>,
}

impl AtomicDistribution {
    pub fn dirac(dim: usize) -> Self {
        Self {
            dim,
            atoms: vec![Atom::new(vec![0.0; dim], 1.0)],
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `∫ e^{i(ξ,y)} p(dy)`.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| Complex64::from_polar(a.mass, dot(xi, &a.point)))
            .sum()
    }

    /// `∫ f(y) p(dy)`.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
        F: Fn(&[f64]) -> T,
    {
        self.atoms.iter().map(|a| f(&a.point) * a.mass).sum()
    }
}

/// Merges atoms within `tol` of an already kept atom, using a hash grid of cell size `tol`.
pub fn merge_atoms(atoms: impl IntoIterator<Item = Atom>, dim: usize, tol: f64) -> Vec<Atom> {
    let cell = tol.max(f64::MIN_POSITIVE);
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / cell).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut out: Vec<Atom> = Vec::new();
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut c| {
            (0..dim)
                .map(|_| {
                    let o = (c % 3) as i64 - 1;
                    c /= 3;
                    o
                })
                .collect()
        })
        .collect();
    for atom in atoms {
        let k = key(&atom.point);
        let mut found = None;
        'search: for off in &offsets {
            let nk: Vec<i64> = k.iter().zip(off).map(|(a, b)| a.saturating_add(*b)).collect();
            if let Some(list) = grid.get(&nk) {
                for &i in list {
                    let d2: f64 = out[i].point.iter().zip(&atom.point).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 <= tol * tol {
                        found = Some(i);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(i) => out[i].mass += atom.mass,
            None => {
                grid.entry(k).or_default().push(out.len());
                out.push(atom);
            }
        }
    }
    out
}

/// `P(N = n)` for `N ~ Poisson(μ)`, `n = 0..=n_max`.
pub fn poisson_weights(mu: f64, n_max: usize) -> Vec<f64> {
    if mu == 0.0 {
        let mut w = vec![0.0; n_max + 1];
        w[0] = 1.0;
        return w;
    }
    let ln_mu = mu.ln();
    (0..=n_max)
        .map(|n| (-mu + n as f64 * ln_mu - ln_gamma(n as f64 + 1.0)).exp())
        .collect()
}

/// Smallest `N` with `P(Poisson(μ) > N) < tol`.
pub fn poisson_cutoff(mu: f64, tol: f64) -> usize {
    if mu == 0.0 {
        return 0;
    }
    let ln_mu = mu.ln();
    let mut cumulative = 0.0;
    let mut n = 0usize;
    loop {
        cumulative += (-mu + n as f64 * ln_mu - ln_gamma(n as f64 + 1.0)).exp();
        let far = n as f64 > mu + 50.0 + 40.0 * mu.sqrt();
        if (1.0 - cumulative < tol && n as f64 >= mu) || far {
            return n;
        }
        n += 1;
    }
}

/// Normalized convolution powers `ν̃^{*n}`, `ν̃ = ν/|ν|`, for `n = 0..=N`.
#[derive(Debug, Clone)]
pub struct ConvolutionPowers {
    dim: usize,
    rate: f64,
    powers: Vec<Vec<Atom>>,
    cap: usize,
    tol: f64,
}

impl ConvolutionPowers {
    pub fn new(nu: &LevyMeasure) -> Result<Self> {
        Self::with_limits(nu, DEFAULT_ATOM_CAP, MERGE_TOLERANCE)
    }

    pub fn with_limits(nu: &LevyMeasure, cap: usize, tol: f64) -> Result<Self> {
        let atoms = nu.atoms()?;
        let dim = nu.dim();
        let rate: f64 = atoms.iter().map(|a| a.mass).sum();
        let mut powers = vec![vec![Atom::new(vec![0.0; dim], 1.0)]];
        if rate > 0.0 {
            let base = merge_atoms(atoms.iter().map(|a| Atom::new(a.point.clone(), a.mass / rate)), dim, tol);
            powers.push(base);
        }
        Ok(Self {
            dim,
            rate,
            powers,
            cap,
            tol,
        })
    }

    /// `|ν|`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest power currently available.
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn power(&self, n: usize) -> &[Atom] {
        &self.powers[n]
    }

    /// Makes `ν̃^{*n}` available for all `n ≤ n_max`.
    pub fn extend_to(&mut self, n_max: usize) -> Result<()> {
        if self.rate == 0.0 {
            return Ok(());
        }
        while self.powers.len() <= n_max {
            let last = self.powers.last().expect("at least δ₀");
            let base = &self.powers[1];
            let product = last.iter().flat_map(|a| {
                base.iter().map(move |b| {
                    Atom::new(a.point.iter().zip(&b.point).map(|(x, y)| x + y).collect(), a.mass * b.mass)
                })
            });
            let next = merge_atoms(product, self.dim, self.tol);
            if next.len() > self.cap {
                return Err(Error::AtomExplosion {
                    count: next.len(),
                    cap: self.cap,
                });
            }
            self.powers.push(next);
        }
        Ok(())
    }

    /// Power count needed for `p_t` with discarded mass below `tol`.
    pub fn cutoff(&self, t: f64, tol: f64) -> usize {
        poisson_cutoff(self.rate * t, tol)
    }

    /// `p_t` truncated after `N` terms with tail mass `< tol`.
    pub fn semigroup(&mut self, t: f64, tol: f64) -> Result<AtomicDistribution> {
        if t < 0.0 {
            return Err(Error::InvalidInput(format!("time must be non-negative, got {t}")));
        }
        if t == 0.0 || self.rate == 0.0 {
            return Ok(AtomicDistribution::dirac(self.dim));
        }
        let n_max = self.cutoff(t, tol);
        self.extend_to(n_max)?;
        let weights = poisson_weights(self.rate * t, n_max);
        let atoms = (0..=n_max).flat_map(|n| {
            let w = weights[n];
            self.powers[n].iter().map(move |a| Atom::new(a.point.clone(), a.mass * w))
        });
        Ok(AtomicDistribution {
            dim: self.dim,
            atoms: merge_atoms(atoms, self.dim, self.tol),
        })
    }
}

impl LevyMeasure {
    /// Transition measure `p_t` of the compound Poisson process with Lévy measure `self`.
    pub fn semigroup_measure(&self, t: f64, truncation_tol: f64) -> Result<AtomicDistribution> {
        ConvolutionPowers::new(self)?.semigroup(t, truncation_tol)
    }
}
