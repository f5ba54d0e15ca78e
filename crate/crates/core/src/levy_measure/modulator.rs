//! Bounded complex jump modulators φ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::MODULUS_SLACK;
use crate::error::{Error, Result};
use crate::vector::planar_angle;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub(super) enum RawModulator {
    Constant { c: Complex64 },
    Table { values: Vec<Complex64> },
    Angular { values: Vec<Complex64> },
    Harmonic { order: i32, amplitude: Complex64 },
}

/// A jump modulator with `sup |φ| ≤ 1`.
///
/// `TableOnAtoms` holds one value per atom of an atomic measure,
/// `RadialAngular` one value per spectral atom (or circle arc) of a polar
/// measure. `Harmonic` is `amplitude · e^{i·order·arg z}` for planar jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModulator", into = "RawModulator")]
pub enum JumpModulator {
    Constant { c: Complex64 },
    TableOnAtoms { values: Vec<Complex64> },
    RadialAngular { values: Vec<Complex64> },
    Harmonic { order: i32, amplitude: Complex64 },
}

impl TryFrom<RawModulator> for JumpModulator {
    type Error = Error;

    fn try_from(raw: RawModulator) -> Result<Self> {
        let m = JumpModulator::from_raw(raw);
        m.check_bound(1.0)?;
        Ok(m)
    }
}

impl JumpModulator {
    /// No bound check; the caller validates.
    pub(super) fn from_raw(raw: RawModulator) -> Self {
        match raw {
            RawModulator::Constant { c } => JumpModulator::Constant { c },
            RawModulator::Table { values } => JumpModulator::TableOnAtoms { values },
            RawModulator::Angular { values } => JumpModulator::RadialAngular { values },
            RawModulator::Harmonic { order, amplitude } => {
                JumpModulator::Harmonic { order, amplitude }
            }
        }
    }
}

impl From<JumpModulator> for RawModulator {
    fn from(m: JumpModulator) -> Self {
        match m {
            JumpModulator::Constant { c } => RawModulator::Constant { c },
            JumpModulator::TableOnAtoms { values } => RawModulator::Table { values },
            JumpModulator::RadialAngular { values } => RawModulator::Angular { values },
            JumpModulator::Harmonic { order, amplitude } => {
                RawModulator::Harmonic { order, amplitude }
            }
        }
    }
}

impl JumpModulator {
    pub fn constant(c: Complex64) -> Result<Self> {
        let m = JumpModulator::Constant { c };
        m.check_bound(1.0)?;
        Ok(m)
    }

    pub fn one() -> Self {
        JumpModulator::Constant {
            c: Complex64::new(1.0, 0.0),
        }
    }

    pub fn zero() -> Self {
        JumpModulator::Constant {
            c: Complex64::new(0.0, 0.0),
        }
    }

    pub fn table(values: Vec<Complex64>) -> Result<Self> {
        let m = JumpModulator::TableOnAtoms { values };
        m.check_bound(1.0)?;
        Ok(m)
    }

    pub fn angular(values: Vec<Complex64>) -> Result<Self> {
        let m = JumpModulator::RadialAngular { values };
        m.check_bound(1.0)?;
        Ok(m)
    }

    pub fn harmonic(order: i32, amplitude: Complex64) -> Result<Self> {
        let m = JumpModulator::Harmonic { order, amplitude };
        m.check_bound(1.0)?;
        Ok(m)
    }

    pub fn sup_modulus(&self) -> f64 {
        match self {
            JumpModulator::Constant { c } => c.norm(),
            JumpModulator::TableOnAtoms { values } | JumpModulator::RadialAngular { values } => {
                values.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }
            JumpModulator::Harmonic { amplitude, .. } => amplitude.norm(),
        }
    }

    pub(crate) fn check_bound(&self, bound: f64) -> Result<()> {
        let sup = self.sup_modulus();
        if !(sup <= bound + MODULUS_SLACK) {
            return Err(Error::ModulatorBound { value: sup, bound });
        }
        Ok(())
    }

    /// Value on the jump `z`, which is atom `index` of an atomic measure.
    pub fn on_atom(&self, index: usize, z: &[f64]) -> Result<Complex64> {
        match self {
            JumpModulator::Constant { c } => Ok(*c),
            JumpModulator::TableOnAtoms { values } => values.get(index).copied().ok_or_else(|| {
                Error::InvalidInput(format!("modulator table has no entry for atom {index}"))
            }),
            JumpModulator::RadialAngular { .. } => {
                Err(Error::UnsupportedRepresentation("angular modulator on atomic"))
            }
            JumpModulator::Harmonic { order, amplitude } => harmonic(*order, *amplitude, z),
        }
    }

    /// Value on direction `θ`, which is spectral atom (or arc) `index`.
    pub fn on_direction(&self, index: usize, theta: &[f64]) -> Result<Complex64> {
        match self {
            JumpModulator::Constant { c } => Ok(*c),
            JumpModulator::RadialAngular { values } => {
                values.get(index).copied().ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "angular modulator has no entry for spectral atom {index}"
                    ))
                })
            }
            JumpModulator::TableOnAtoms { .. } => {
                Err(Error::UnsupportedRepresentation("atom table on polar"))
            }
            JumpModulator::Harmonic { order, amplitude } => harmonic(*order, *amplitude, theta),
        }
    }

    /// True when `φ ≡ c` for a single constant `c`.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            JumpModulator::Constant { c } => Some(*c),
            JumpModulator::Harmonic { order: 0, amplitude } => Some(*amplitude),
            _ => None,
        }
    }
}

fn harmonic(order: i32, amplitude: Complex64, z: &[f64]) -> Result<Complex64> {
    if z.len() != 2 {
        return Err(Error::NotPlanar(z.len()));
    }
    Ok(amplitude * Complex64::from_polar(1.0, order as f64 * planar_angle(z)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_values_above_one() {
        assert!(matches!(
            JumpModulator::table(vec![Complex64::new(0.8, 0.7)]),
            Err(Error::ModulatorBound { .. })
        ));
        let json = r#"{"kind": "constant", "c": [0.0, 1.5]}"#;
        assert!(serde_json::from_str::<JumpModulator>(json).is_err());
    }

    #[test]
    fn harmonic_follows_the_argument() {
        let m = JumpModulator::harmonic(-2, Complex64::new(1.0, 0.0)).unwrap();
        let v = m.on_direction(0, &[0.0, 3.0]).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(m.on_atom(0, &[1.0, 0.0, 0.0]), Err(Error::NotPlanar(3))));
    }

    #[test]
    fn json_round_trip() {
        let m = JumpModulator::table(vec![Complex64::new(0.0, -1.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"kind":"table","values":[[0.0,-1.0]]}"#);
        assert_eq!(serde_json::from_str::<JumpModulator>(&s).unwrap(), m);
    }
}
