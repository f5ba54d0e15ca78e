//! Symmetrization `V ↦ V̆ = (V + V(-·))/2` with the matching modulator `φ*`.
//!
//! For a pair of reflected atoms `±w` with masses `a = V(w)`, `b = V(-w)`
//! the symmetric measure puts `(a+b)/2` on both, the antisymmetric density is
//! `k(±w) = ±(a-b)/(a+b)`, and `φ* = φ̆ + k φ̃` reduces to the mass-weighted
//! mean `(a φ(w) + b φ(-w)) / (a+b)` on both atoms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::modulator::JumpModulator;
use super::semigroup::MERGE_TOLERANCE;
use super::spectral::Atom;
use super::LevyMeasure;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symmetrized {
    pub symmetric: LevyMeasure,
    pub modulator_star: JumpModulator,
    /// `dṼ/dV̆` on each atom of `symmetric`.
    pub antisymmetric_density: Vec<f64>,
}

pub fn symmetrize(measure: &LevyMeasure, phi: &JumpModulator) -> Result<Symmetrized> {
    let LevyMeasure::Atomic { dim, atoms } = measure else {
        return Err(Error::UnsupportedRepresentation(measure.representation()));
    };
    measure.check()?;
    phi.check_bound(1.0)?;
    let dim = *dim;
    let values = atoms
        .iter()
        .enumerate()
        .map(|(j, a)| phi.on_atom(j, &a.point))
        .collect::<Result<Vec<_>>>()?;

    // coincident atoms are combined first, carrying the mass-weighted φ
    let mut merged: Vec<(Atom, Complex64)> = Vec::new();
    for (a, &v) in atoms.iter().zip(&values) {
        match merged.iter().position(|(m, _)| distance(&m.point, &a.point) <= MERGE_TOLERANCE) {
            Some(i) => {
                merged[i].0.mass += a.mass;
                merged[i].1 += v * a.mass;
            }
            None => merged.push((a.clone(), v * a.mass)),
        }
    }
    for (a, v) in merged.iter_mut() {
        *v /= a.mass;
    }

    let mut used = vec![false; merged.len()];
    let mut out_atoms = Vec::with_capacity(2 * merged.len());
    let mut out_phi = Vec::with_capacity(2 * merged.len());
    let mut density = Vec::with_capacity(2 * merged.len());
    for i in 0..merged.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (w, phi_w) = (&merged[i].0, merged[i].1);
        let reflected: Vec<f64> = w.point.iter().map(|x| -x).collect();
        let partner = (0..merged.len()).find(|&j| !used[j] && distance(&merged[j].0.point, &reflected) <= MERGE_TOLERANCE);
        let (b, phi_b) = match partner {
            Some(j) => {
                used[j] = true;
                (merged[j].0.mass, merged[j].1)
            }
            None => (0.0, Complex64::new(0.0, 0.0)),
        };
        let a = w.mass;
        let total = a + b;
        let star = (phi_w * a + phi_b * b) / total;
        let k = (a - b) / total;
        out_atoms.push(Atom::new(w.point.clone(), 0.5 * total));
        out_atoms.push(Atom::new(reflected, 0.5 * total));
        out_phi.push(clamp_unit(star));
        out_phi.push(clamp_unit(star));
        density.push(k);
        density.push(-k);
    }
    Ok(Symmetrized {
        symmetric: LevyMeasure::Atomic {
            dim,
            atoms: out_atoms,
        },
        modulator_star: JumpModulator::TableOnAtoms { values: out_phi },
        antisymmetric_density: density,
    })
}

/// A convex combination of values in the unit disc; rounding can push it a hair outside.
fn clamp_unit(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n > 1.0 {
        z / n
    } else {
        z
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
