//! Fourier multipliers on periodic grids.
//!
//! The forward transform is `ĝ(ξ) = Σ_x e^{+i(ξ,x)} g(x)` over the grid and
//! the inverse carries the `N^{-d}` factor, the discrete analogue of
//! `ĝ(ξ) = ∫ e^{i(ξ,x)} g(x) dx` with `(2π)^{-d}` on the way back. Frequencies
//! are `2πk/L` with `k ∈ [-N/2, N/2)` per axis.

mod grid;
mod norm;

pub use grid::GridFunction;
pub use norm::{
    conjugate_exponent_bound, estimate_operator_norm, estimate_with_multiplier, lp_norm, NormReport, NormSearch,
    SearchFamily,
};

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::symbol::Symbol;

/// Forward/inverse `d`-dimensional DFT of side `N`.
#[derive(Clone)]
pub struct GridFft {
    dim: usize,
    n: usize,
    plus: Arc<dyn Fft<f64>>,
    minus: Arc<dyn Fft<f64>>,
}

impl GridFft {
    pub fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            n,
            // rustfft's "inverse" is the e^{+i} direction
            plus: planner.plan_fft_inverse(n),
            minus: planner.plan_fft_forward(n),
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.plus);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.minus);
        let s = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let total = data.len();
        let mut lines = vec![Complex64::new(0.0, 0.0); total];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            // gather every line along `axis` into contiguous storage
            let block = stride * n;
            let mut k = 0;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    for j in 0..n {
                        lines[k] = data[base + offset + j * stride];
                        k += 1;
                    }
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            let mut k = 0;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    for j in 0..n {
                        data[base + offset + j * stride] = lines[k];
                        k += 1;
                    }
                }
            }
        }
    }
}

/// A symbol tabulated on the lattice of one grid shape.
#[derive(Clone)]
pub struct Multiplier {
    dim: usize,
    n: usize,
    length: f64,
    table: Vec<Complex64>,
    fft: GridFft,
}

impl Multiplier {
    pub fn new(symbol: &Symbol, dim: usize, n: usize, length: f64) -> Result<Self> {
        if symbol.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: symbol.dim(),
                found: dim,
            });
        }
        GridFunction::zeros(dim, n, length)?;
        let total = n.pow(dim as u32);
        let points: Vec<Vec<f64>> = (0..total)
            .map(|idx| grid::lattice_frequency(dim, n, length, idx))
            .collect();
        let table = symbol.eval_many(&points)?;
        Ok(Self::from_table(dim, n, length, table))
    }

    pub fn for_grid(symbol: &Symbol, g: &GridFunction) -> Result<Self> {
        Self::new(symbol, g.dim(), g.n(), g.length())
    }

    /// `table[idx]` is the symbol at lattice frequency `idx` in DFT order.
    pub fn from_table(dim: usize, n: usize, length: f64, table: Vec<Complex64>) -> Self {
        assert_eq!(table.len(), n.pow(dim as u32));
        Self {
            dim,
            n,
            length,
            table,
            fft: GridFft::new(dim, n),
        }
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    /// `max |M|` over the lattice.
    pub fn sup(&self) -> f64 {
        self.table.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn fft(&self) -> &GridFft {
        &self.fft
    }

    fn check(&self, g: &GridFunction) -> Result<()> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: g.dim(),
            });
        }
        if g.n() != self.n || g.length() != self.length {
            return Err(Error::InvalidInput(format!(
                "multiplier tabulated for N={}, L={}, grid has N={}, L={}",
                self.n,
                self.length,
                g.n(),
                g.length()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, g: &GridFunction) -> Result<GridFunction> {
        self.check(g)?;
        let mut data = g.values().to_vec();
        self.apply_in_place(&mut data, false);
        g.with_values(data)
    }

    /// `T` or, with `adjoint`, `T*` (multiplier `conj M`) on raw grid values.
    pub fn apply_in_place(&self, data: &mut [Complex64], adjoint: bool) {
        self.fft.forward(data);
        for (v, m) in data.iter_mut().zip(&self.table) {
            *v *= if adjoint { m.conj() } else { *m };
        }
        self.fft.inverse(data);
    }
}

/// Forward DFT, multiply by `M` on the lattice, inverse DFT.
pub fn apply(symbol: &Symbol, g: &GridFunction) -> Result<GridFunction> {
    Multiplier::for_grid(symbol, g)?.apply(g)
}

#[cfg(test)]
mod tests;
