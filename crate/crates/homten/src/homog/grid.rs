//! Periodic cell discretisation: odd uniform grids on (-1/2, 1/2)^d, their
//! centered frequency sets, and the double grid used by exact integration.

use crate::error::{Error, Result};

/// Uniform odd grid with `n` points per axis in `d` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
}

impl GridSpec {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 2 || d > 3 {
            return Err(Error::BadDimension(d));
        }
        if n % 2 == 0 {
            return Err(Error::EvenGridSize(n));
        }
        Ok(GridSpec { d, n })
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.d]
    }

    /// Double grid size 2N - 1 per axis.
    pub fn double_n(&self) -> usize {
        2 * self.n - 1
    }

    pub fn double_shape(&self) -> Vec<usize> {
        vec![self.double_n(); self.d]
    }

    pub fn double(&self) -> GridSpec {
        GridSpec {
            d: self.d,
            n: self.double_n(),
        }
    }

    pub fn num_points(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Centered index of the zero frequency (and of the origin).
    pub fn center(&self) -> Vec<usize> {
        vec![(self.n - 1) / 2; self.d]
    }
}

/// Frequency at centered storage index `i` on an odd axis of size `n`:
/// Z_N = {-(N-1)/2, ..., (N-1)/2}.
pub fn freq(n: usize, i: usize) -> i64 {
    i as i64 - ((n - 1) / 2) as i64
}

/// All frequencies of an axis in storage order.
pub fn freqs(n: usize) -> Vec<i64> {
    (0..n).map(|i| freq(n, i)).collect()
}

/// Grid point coordinate at centered storage index `i`: x = k/n in (-1/2, 1/2).
pub fn point(n: usize, i: usize) -> f64 {
    freq(n, i) as f64 / n as f64
}

/// All grid point coordinates of an axis in storage order.
pub fn points(n: usize) -> Vec<f64> {
    (0..n).map(|i| point(n, i)).collect()
}
