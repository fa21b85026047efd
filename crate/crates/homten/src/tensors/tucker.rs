//! Tucker (tensor subspace) representation: a core tensor contracted against
//! one factor matrix per mode.

use ndarray::{Array2, ArrayD, Dimension, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::la;
use crate::tensors::full::{fold, mode_multiply, unfold, FullTensor};
use crate::tensors::{TruncationInfo, TruncationPolicy};

#[derive(Debug, Clone)]
pub struct TuckerTensor {
    /// Core of shape (r_1, ..., r_d).
    pub core: ArrayD<Complex64>,
    /// One `N_j x r_j` factor per mode.
    pub factors: Vec<Array2<Complex64>>,
    /// Per-factor flag: columns orthonormal (enables the core-norm shortcut).
    pub orthonormal: Vec<bool>,
}

impl TuckerTensor {
    pub fn new(core: ArrayD<Complex64>, factors: Vec<Array2<Complex64>>) -> Result<Self> {
        if core.ndim() != factors.len() {
            return Err(Error::ShapeMismatch(
                core.shape().to_vec(),
                vec![factors.len()],
            ));
        }
        for (j, f) in factors.iter().enumerate() {
            if f.ncols() != core.shape()[j] {
                return Err(Error::ShapeMismatch(
                    core.shape().to_vec(),
                    factors.iter().map(|f| f.ncols()).collect(),
                ));
            }
        }
        let d = factors.len();
        Ok(TuckerTensor {
            core,
            factors,
            orthonormal: vec![false; d],
        })
    }

    pub fn ndim(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.shape().to_vec()
    }

    pub fn entry(&self, idx: &[usize]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (core_idx, &c) in self.core.indexed_iter() {
            let mut term = c;
            for j in 0..self.ndim() {
                term *= self.factors[j][[idx[j], core_idx[j]]];
            }
            acc += term;
        }
        acc
    }

    pub fn reconstruct(&self) -> FullTensor {
        let mut data = self.core.clone();
        for j in 0..self.ndim() {
            data = mode_multiply(&data, &self.factors[j], j);
        }
        FullTensor { data }
    }

    /// Frobenius norm of the core; equals the tensor norm when all factors
    /// are orthonormal.
    pub fn core_norm(&self) -> f64 {
        self.core.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn all_orthonormal(&self) -> bool {
        self.orthonormal.iter().all(|&b| b)
    }

    /// HOSVD construction from a dense tensor.
    pub fn decompose(t: &FullTensor, policy: &TruncationPolicy) -> Result<TuckerTensor> {
        let d = t.ndim();
        let mut factors = Vec::with_capacity(d);
        for j in 0..d {
            let unf = unfold(&t.data, j);
            let svd = la::svd_thin(&unf)?;
            let k = la::truncation_index(&svd.singular_values, policy.rule(j, d))?.max(1);
            factors.push(svd.left.slice(ndarray::s![.., ..k]).to_owned());
        }
        let mut core = t.data.clone();
        for (j, f) in factors.iter().enumerate() {
            let fh = adjoint(f);
            core = mode_multiply(&core, &fh, j);
        }
        let mut out = TuckerTensor::new(core, factors)?;
        out.orthonormal = vec![true; d];
        Ok(out)
    }

    /// Re-orthogonalisation (QR) followed by a HOSVD of the updated core.
    pub fn truncate(&self, policy: &TruncationPolicy) -> Result<(TuckerTensor, TruncationInfo)> {
        let mut work = self.clone();
        if let Some(thr) = policy.drop_small_norm_threshold {
            work = work.drop_small_columns(thr);
        }
        let d = work.ndim();
        // QR each factor, push R into the core
        let mut qs = Vec::with_capacity(d);
        let mut core = work.core.clone();
        for j in 0..d {
            let qr = la::qr_thin(&work.factors[j])?;
            core = mode_multiply(&core, &qr.r, j);
            qs.push(qr.q);
        }
        // HOSVD of the core: all mode SVDs on the same core, then project
        let mut us = Vec::with_capacity(d);
        let mut bound_sq = 0.0;
        for j in 0..d {
            let unf = unfold(&core, j);
            let svd = la::svd_thin(&unf)?;
            let k = la::truncation_index(&svd.singular_values, policy.rule(j, d))?.max(1);
            let k = k.min(svd.singular_values.len());
            let tail = la::discarded_norm(&svd.singular_values, k);
            bound_sq += tail * tail;
            us.push(svd.left.slice(ndarray::s![.., ..k]).to_owned());
        }
        for (j, u) in us.iter().enumerate() {
            core = mode_multiply(&core, &adjoint(u), j);
        }
        let factors = qs
            .iter()
            .zip(&us)
            .map(|(q, u)| q.dot(u))
            .collect::<Vec<_>>();
        let mut out = TuckerTensor::new(core, factors)?;
        out.orthonormal = vec![true; d];
        Ok((
            out,
            TruncationInfo {
                bound: bound_sq.sqrt(),
            },
        ))
    }

    fn drop_small_columns(&self, threshold: f64) -> TuckerTensor {
        let d = self.ndim();
        let mut out = self.clone();
        for j in 0..d {
            let r = out.core.shape()[j];
            if r <= 1 {
                continue;
            }
            let unf = unfold(&out.core, j);
            let norms: Vec<f64> = (0..r)
                .map(|i| {
                    let col: f64 = out.factors[j]
                        .column(i)
                        .iter()
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    let slice: f64 = unf.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    col * slice
                })
                .collect();
            let max = norms.iter().cloned().fold(0.0, f64::max);
            let keep: Vec<usize> = (0..r).filter(|&i| norms[i] >= threshold * max).collect();
            if keep.len() == r || keep.is_empty() {
                continue;
            }
            let factor = Array2::from_shape_fn((out.factors[j].nrows(), keep.len()), |(a, i)| {
                out.factors[j][[a, keep[i]]]
            });
            let sel = Array2::from_shape_fn((keep.len(), unf.ncols()), |(i, c)| unf[[keep[i], c]]);
            let mut new_shape = out.core.shape().to_vec();
            new_shape[j] = keep.len();
            out.core = fold(&sel, j, &new_shape);
            out.factors[j] = factor;
            out.orthonormal[j] = false;
        }
        out
    }
}

pub(crate) fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((m.ncols(), m.nrows()), |(i, j)| m[[j, i]].conj())
}

/// Tucker inner product via factor Gram matrices, without densification.
pub fn inner(v: &TuckerTensor, w: &TuckerTensor) -> Complex64 {
    let d = v.ndim();
    // A_j[i,k] = sum_a Bv_j[a,i] * conj(Bw_j[a,k])
    let mut transformed = w.core.mapv(|z| z.conj());
    for j in 0..d {
        let a = Array2::from_shape_fn(
            (v.core.shape()[j], w.core.shape()[j]),
            |(i, k)| {
                let mut acc = Complex64::new(0.0, 0.0);
                for row in 0..v.factors[j].nrows() {
                    acc += v.factors[j][[row, i]] * w.factors[j][[row, k]].conj();
                }
                acc
            },
        );
        transformed = mode_multiply(&transformed, &a, j);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, &t) in transformed.indexed_iter() {
        acc += v.core[IxDyn(idx.slice())] * t;
    }
    acc
}
