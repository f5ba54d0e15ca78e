use std::f64::consts::PI;
use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Samples of a function on the periodic box `[-L/2, L/2)^d`, `N` points per axis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    n: usize,
    length: f64,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(dim: usize, n: usize, length: f64, values: Vec<Complex64>) -> Result<Self> {
        check_shape(dim, n, length)?;
        let total = n.pow(dim as u32);
        if values.len() != total {
            return Err(Error::InvalidInput(format!("{} values for a {n}^{dim} grid", values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        Ok(Self {
            dim,
            n,
            length,
            values,
        })
    }

    pub fn zeros(dim: usize, n: usize, length: f64) -> Result<Self> {
        check_shape(dim, n, length)?;
        Ok(Self {
            dim,
            n,
            length,
            values: vec![Complex64::new(0.0, 0.0); n.pow(dim as u32)],
        })
    }

    /// Samples `f` at the grid points `x_j = -L/2 + j·h`.
    pub fn from_fn(dim: usize, n: usize, length: f64, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let mut g = Self::zeros(dim, n, length)?;
        let mut x = vec![0.0; dim];
        for idx in 0..g.values.len() {
            g.point_into(idx, &mut x);
            g.values[idx] = f(&x);
        }
        if g.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Same shape, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.dim, self.n, self.length, values)
    }

    pub fn same_shape(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.point_into(idx, &mut x);
        x
    }

    fn point_into(&self, idx: usize, x: &mut [f64]) {
        let h = self.spacing();
        let mut rest = idx;
        for axis in (0..self.dim).rev() {
            x[axis] = -0.5 * self.length + (rest % self.n) as f64 * h;
            rest /= self.n;
        }
    }

    /// Lattice frequency `2πk/L` of DFT index `idx`, with `k ∈ [-N/2, N/2)`.
    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        lattice_frequency(self.dim, self.n, self.length, idx)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &GridFunction, b: Complex64) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::InvalidInput("grid shapes differ".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
            ..self.clone()
        })
    }

    /// Header `d, N` (u64) and `L` (f64), little-endian, then `(re, im)` pairs row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = Vec::with_capacity(24 + 16 * self.values.len());
        buf.extend_from_slice(&(self.dim as u64).to_le_bytes());
        buf.extend_from_slice(&(self.n as u64).to_le_bytes());
        buf.extend_from_slice(&self.length.to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf).map_err(io_error)
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word).map_err(io_error)?;
            Ok(word)
        };
        let dim = u64::from_le_bytes(next(&mut r)?) as usize;
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let length = f64::from_le_bytes(next(&mut r)?);
        check_shape(dim, n, length)?;
        let total = n
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidInput("grid too large".into()))?;
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            values.push(Complex64::new(re, im));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra).map_err(io_error)? != 0 {
            return Err(Error::InvalidInput("trailing bytes after grid data".into()));
        }
        Self::new(dim, n, length, values)
    }

    /// Rows `x_1,…,x_d,re,im` with a header line; `d ≤ 2` only.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.dim > 2 {
            return Err(Error::InvalidInput("CSV grids are limited to d ≤ 2".into()));
        }
        let mut out = String::new();
        let names: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        out.push_str(&format!("{},re,im\n", names.join(",")));
        for (idx, v) in self.values.iter().enumerate() {
            for x in self.point(idx) {
                out.push_str(&format!("{x:e},"));
            }
            out.push_str(&format!("{:e},{:e}\n", v.re, v.im));
        }
        w.write_all(out.as_bytes()).map_err(io_error)
    }

    /// Reads the layout written by [`write_csv`](Self::write_csv); `N` and `L`
    /// are recovered from the row count and the coordinate spacing.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty CSV".into()))?
            .map_err(io_error)?;
        let cols = header.split(',').count();
        if !(3..=4).contains(&cols) {
            return Err(Error::InvalidInput(format!("CSV header has {cols} columns")));
        }
        let dim = cols - 2;
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line.map_err(io_error)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("CSV row {}: {e}", k + 2)))?;
            if fields.len() != cols {
                return Err(Error::InvalidInput(format!("CSV row {} has {} fields", k + 2, fields.len())));
            }
            coords.push(fields[..dim].to_vec());
            values.push(Complex64::new(fields[dim], fields[dim + 1]));
        }
        let n = (values.len() as f64).powf(1.0 / dim as f64).round() as usize;
        if n < 2 || n.pow(dim as u32) != values.len() {
            return Err(Error::InvalidInput(format!("{} CSV rows do not form a square grid", values.len())));
        }
        let h = coords[1][dim - 1] - coords[0][dim - 1];
        let g = Self::new(dim, n, h * n as f64, values)?;
        for (idx, x) in coords.iter().enumerate() {
            let want = g.point(idx);
            if x.iter().zip(&want).any(|(a, b)| (a - b).abs() > 1e-9 * g.length.max(1.0)) {
                return Err(Error::InvalidInput(format!("CSV row {} is off the grid", idx + 2)));
            }
        }
        Ok(g)
    }
}

pub(crate) fn lattice_frequency(dim: usize, n: usize, length: f64, idx: usize) -> Vec<f64> {
    let mut xi = vec![0.0; dim];
    let mut rest = idx;
    for axis in (0..dim).rev() {
        let j = rest % n;
        let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        xi[axis] = 2.0 * PI * k / length;
        rest /= n;
    }
    xi
}

fn check_shape(dim: usize, n: usize, length: f64) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("grid dimension must be positive".into()));
    }
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!("N must be a power of two ≥ 4, got {n}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidInput(format!("side length must be positive, got {length}")));
    }
    Ok(())
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("grid I/O: {e}"))
}
