//! Dense order-d tensors and the matricisation helpers the low-rank
//! decompositions are built on.

use ndarray::{Array2, ArrayD, Axis, Dimension, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::la::{self, FftDirection};

/// Dense tensor of order d with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTensor {
    pub data: ArrayD<Complex64>,
}

impl FullTensor {
    pub fn zeros(shape: &[usize]) -> Self {
        FullTensor {
            data: ArrayD::from_elem(IxDyn(shape), Complex64::new(0.0, 0.0)),
        }
    }

    pub fn from_real<F: Fn(&[usize]) -> f64>(shape: &[usize], f: F) -> Self {
        FullTensor {
            data: ArrayD::from_shape_fn(IxDyn(shape), |idx| {
                Complex64::new(f(idx.slice()), 0.0)
            }),
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.data.shape().to_vec()
    }

    pub fn ndim(&self) -> usize {
        self.data.ndim()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// In-place d-dimensional DFT, one centered 1-D transform per mode.
    pub fn fft_d_inplace(&mut self, direction: FftDirection) -> Result<()> {
        for ax in 0..self.data.ndim() {
            for mut lane in self.data.lanes_mut(Axis(ax)) {
                let v: Vec<Complex64> = lane.iter().cloned().collect();
                let w = la::fft1d(&v, direction)?;
                for (dst, src) in lane.iter_mut().zip(w) {
                    *dst = src;
                }
            }
        }
        Ok(())
    }

    /// Centered zero-padding of every mode to `new_shape`.
    pub fn pad_centered(&self, new_shape: &[usize]) -> Result<FullTensor> {
        check_resize(&self.shape(), new_shape, true)?;
        let mut out = FullTensor::zeros(new_shape);
        let offsets: Vec<usize> = self
            .shape()
            .iter()
            .zip(new_shape)
            .map(|(&n, &m)| (m - n) / 2)
            .collect();
        for (idx, &v) in self.data.indexed_iter() {
            let dst: Vec<usize> = idx
                .slice()
                .iter()
                .zip(&offsets)
                .map(|(&i, &o)| i + o)
                .collect();
            out.data[IxDyn(&dst)] = v;
        }
        Ok(out)
    }

    /// Centered restriction of every mode to `new_shape`.
    pub fn crop_centered(&self, new_shape: &[usize]) -> Result<FullTensor> {
        check_resize(new_shape, &self.shape(), true)?;
        let offsets: Vec<usize> = new_shape
            .iter()
            .zip(self.shape())
            .map(|(&m, n)| (n - m) / 2)
            .collect();
        let mut out = FullTensor::zeros(new_shape);
        for (idx, v) in out.data.indexed_iter_mut() {
            let src: Vec<usize> = idx
                .slice()
                .iter()
                .zip(&offsets)
                .map(|(&i, &o)| i + o)
                .collect();
            *v = self.data[IxDyn(&src)];
        }
        Ok(out)
    }
}

fn check_resize(small: &[usize], big: &[usize], require_odd: bool) -> Result<()> {
    if small.len() != big.len() {
        return Err(Error::ShapeMismatch(small.to_vec(), big.to_vec()));
    }
    for (&s, &b) in small.iter().zip(big) {
        if s > b {
            return Err(Error::ShapeMismatch(small.to_vec(), big.to_vec()));
        }
        if require_odd && (s % 2 == 0 || b % 2 == 0) {
            return Err(Error::EvenGridSize(if s % 2 == 0 { s } else { b }));
        }
    }
    Ok(())
}

/// Mode-`mode` matricisation: rows indexed by the chosen mode, columns by the
/// remaining modes in their original order.
pub fn unfold(t: &ArrayD<Complex64>, mode: usize) -> Array2<Complex64> {
    let n = t.shape()[mode];
    let rest = t.len() / n;
    let mut order: Vec<usize> = (0..t.ndim()).collect();
    order.remove(mode);
    order.insert(0, mode);
    let moved = t.view().permuted_axes(order);
    Array2::from_shape_vec((n, rest), moved.iter().cloned().collect()).unwrap()
}

/// Inverse of [`unfold`].
pub fn fold(m: &Array2<Complex64>, mode: usize, shape: &[usize]) -> ArrayD<Complex64> {
    let mut moved_shape: Vec<usize> = shape.to_vec();
    let n = moved_shape.remove(mode);
    moved_shape.insert(0, n);
    let moved = ArrayD::from_shape_vec(IxDyn(&moved_shape), m.iter().cloned().collect()).unwrap();
    let mut order: Vec<usize> = (1..shape.len()).collect();
    order.insert(mode, 0);
    let view = moved.view().permuted_axes(order);
    ArrayD::from_shape_vec(IxDyn(shape), view.iter().cloned().collect()).unwrap()
}

/// Contracts mode `mode` of `t` with the matrix `m` (shape out x n_mode).
pub fn mode_multiply(
    t: &ArrayD<Complex64>,
    m: &Array2<Complex64>,
    mode: usize,
) -> ArrayD<Complex64> {
    let unf = unfold(t, mode);
    let prod = m.dot(&unf);
    let mut new_shape = t.shape().to_vec();
    new_shape[mode] = m.nrows();
    fold(&prod, mode, &new_shape)
}
