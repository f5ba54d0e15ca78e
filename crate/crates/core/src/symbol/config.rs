use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{beurling_ahlfors, Provenance, Symbol};
use crate::error::{Error, Result};
use crate::levy_measure::{JumpModulator, LevyMeasure, SphericalPair};
use crate::matrix_decomp::{decompose, ComplexMatrix};
use crate::quadrature::QuadOptions;

fn one() -> JumpModulator {
    JumpModulator::one()
}

fn unit_bound() -> f64 {
    1.0
}

/// A symbol as a JSON document, tagged by `"kind"`.
///
/// ```json
/// {"kind": "general", "measure": {...}, "phi": {"kind": "constant", "c": [1, 0]}, "pair": {...}}
/// {"kind": "quadratic_form", "a": {"re": [[0, -1], [-1, 0]]}}
/// {"kind": "stable", "alpha": 1.5, "pair": {...}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolConfig {
    General {
        #[serde(default)]
        measure: Option<LevyMeasure>,
        #[serde(default = "one")]
        phi: JumpModulator,
        #[serde(default)]
        pair: Option<SphericalPair>,
    },
    QuadraticForm {
        a: ComplexMatrix,
        #[serde(default)]
        b: Option<Vec<Vec<f64>>>,
    },
    Stable {
        alpha: f64,
        pair: SphericalPair,
    },
    Marcinkiewicz {
        alpha: f64,
        dim: usize,
        index: usize,
    },
    Tempered {
        pair: SphericalPair,
    },
    Ratio {
        nu1: LevyMeasure,
        nu2: LevyMeasure,
    },
    Truncated {
        measure: LevyMeasure,
        #[serde(default = "one")]
        phi: JumpModulator,
        u: f64,
    },
    BeurlingAhlfors,
    /// General symbol of the sphere representation of `a`, rescaled to `(Aξ,ξ)/|ξ|²`.
    Decomposition {
        a: ComplexMatrix,
        #[serde(default = "unit_bound")]
        operator_norm_bound: f64,
    },
}

impl SymbolConfig {
    pub fn build(&self, opts: &QuadOptions) -> Result<Symbol> {
        match self {
            SymbolConfig::General { measure, phi, pair } => {
                let pair = pair.clone().unwrap_or_else(SphericalPair::empty);
                Symbol::general(measure.as_ref(), phi, &pair, opts)
            }
            SymbolConfig::QuadraticForm { a, b } => {
                let a = a.to_matrix()?;
                let b = match b {
                    Some(rows) => Some(real_matrix(rows)?),
                    None => None,
                };
                Symbol::quadratic_form(&a, b.as_ref())
            }
            SymbolConfig::Stable { alpha, pair } => Symbol::stable(*alpha, pair, opts),
            SymbolConfig::Marcinkiewicz { alpha, dim, index } => Symbol::marcinkiewicz(*alpha, *dim, *index, opts),
            SymbolConfig::Tempered { pair } => Symbol::tempered(pair, opts),
            SymbolConfig::Ratio { nu1, nu2 } => Symbol::ratio(nu1, nu2, opts),
            SymbolConfig::Truncated { measure, phi, u } => Symbol::truncated(measure, phi, *u, opts),
            SymbolConfig::BeurlingAhlfors => Ok(Symbol::from_fn(2, Provenance::BeurlingAhlfors, 1.0, |xi| {
                beurling_ahlfors(xi)
            })),
            SymbolConfig::Decomposition { a, operator_norm_bound } => {
                let dec = decompose(&a.to_matrix()?, *operator_norm_bound)?;
                Ok(dec.symbol(opts)?.with_provenance(Provenance::QuadraticForm))
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("symbol config: {e}")))
    }
}

fn real_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    ComplexMatrix {
        re: rows.to_vec(),
        im: Vec::new(),
    }
    .to_real_matrix()
}

/// Evaluation grid helper: `count` unit vectors at equally spaced angles.
pub fn circle_points(count: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            vec![radius * t.cos(), radius * t.sin()]
        })
        .collect()
}
