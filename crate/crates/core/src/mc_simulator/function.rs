use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplier_apply::GridFunction;

type Closed = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A test function evaluable at any point of ℝᵈ.
///
/// Grid functions are extended periodically and interpolated multilinearly.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Constant {
        dim: usize,
        value: Complex64,
    },
    /// `amplitude · exp(-|x - center|² / (2 width²))`.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: Complex64,
    },
    /// `amplitude · e^{i(k,x)}`.
    Wave {
        frequency: Vec<f64>,
        amplitude: Complex64,
    },
    #[serde(skip)]
    Grid(GridFunction),
    #[serde(skip)]
    Closed { dim: usize, f: Closed },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant { dim, value } => write!(f, "Constant({dim}, {value})"),
            TestFunction::Gaussian {
                center,
                width,
                amplitude,
            } => write!(f, "Gaussian({center:?}, {width}, {amplitude})"),
            TestFunction::Wave { frequency, amplitude } => write!(f, "Wave({frequency:?}, {amplitude})"),
            TestFunction::Grid(g) => write!(f, "Grid(d={}, N={}, L={})", g.dim(), g.n(), g.length()),
            TestFunction::Closed { dim, .. } => write!(f, "Closed(d={dim})"),
        }
    }
}

impl TestFunction {
    pub fn constant(dim: usize, value: Complex64) -> Self {
        TestFunction::Constant { dim, value }
    }

    pub fn gaussian(center: Vec<f64>, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!("Gaussian width must be positive, got {width}")));
        }
        Ok(TestFunction::Gaussian {
            center,
            width,
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        TestFunction::Closed { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Constant { dim, .. } | TestFunction::Closed { dim, .. } => *dim,
            TestFunction::Gaussian { center, .. } => center.len(),
            TestFunction::Wave { frequency, .. } => frequency.len(),
            TestFunction::Grid(g) => g.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            TestFunction::Constant { value, .. } => *value,
            TestFunction::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            TestFunction::Wave { frequency, amplitude } => {
                let s: f64 = x.iter().zip(frequency).map(|(a, k)| a * k).sum();
                amplitude * Complex64::from_polar(1.0, s)
            }
            TestFunction::Grid(g) => interpolate(g, x),
            TestFunction::Closed { f, .. } => f(x),
        }
    }

    /// Samples on the grid `x_j = -L/2 + jh`.
    pub fn to_grid(&self, n: usize, length: f64) -> Result<GridFunction> {
        GridFunction::from_fn(self.dim(), n, length, |x| self.eval(x))
    }
}

fn interpolate(g: &GridFunction, x: &[f64]) -> Complex64 {
    let (d, n, h) = (g.dim(), g.n(), g.spacing());
    let mut lower = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for axis in 0..d {
        let s = (x[axis] + 0.5 * g.length()) / h;
        let fl = s.floor();
        frac[axis] = s - fl;
        lower[axis] = (fl as i64).rem_euclid(n as i64) as usize;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for corner in 0..(1usize << d) {
        let mut weight = 1.0;
        let mut idx = 0;
        for axis in 0..d {
            let up = (corner >> axis) & 1 == 1;
            weight *= if up { frac[axis] } else { 1.0 - frac[axis] };
            let j = if up { (lower[axis] + 1) % n } else { lower[axis] };
            idx = idx * n + j;
        }
        if weight != 0.0 {
            acc += g.values()[idx] * weight;
        }
    }
    acc
}
