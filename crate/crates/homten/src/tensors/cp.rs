//! Canonical polyadic (r-term) representation, restricted to order two.
//!
//! Construction for d >= 3 is rejected: there is no error-minimising
//! truncation for higher-order CP, so the format is only used for matrices
//! where the SVD route applies.

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::la;
use crate::tensors::full::FullTensor;
use crate::tensors::{TruncationInfo, TruncationPolicy};

/// Sum of `r` rank-1 terms `weights[i] * factors[0][:,i] (x) factors[1][:,i]`.
#[derive(Debug, Clone)]
pub struct CpTensor {
    pub weights: Vec<f64>,
    /// One `N_j x r` matrix per mode; column i holds the i-th term's vector.
    pub factors: Vec<Array2<Complex64>>,
}

impl CpTensor {
    pub fn new(weights: Vec<f64>, factors: Vec<Array2<Complex64>>) -> Result<Self> {
        if factors.len() != 2 {
            return Err(Error::CpHighOrder);
        }
        let r = weights.len();
        for f in &factors {
            if f.ncols() != r {
                return Err(Error::ShapeMismatch(vec![f.ncols()], vec![r]));
            }
        }
        Ok(CpTensor { weights, factors })
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn entry(&self, idx: &[usize]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rank() {
            acc += self.weights[i] * self.factors[0][[idx[0], i]] * self.factors[1][[idx[1], i]];
        }
        acc
    }

    pub fn reconstruct(&self) -> FullTensor {
        let (n0, n1) = (self.factors[0].nrows(), self.factors[1].nrows());
        let mut data = ArrayD::from_elem(IxDyn(&[n0, n1]), Complex64::new(0.0, 0.0));
        for i in 0..self.rank() {
            let w = self.weights[i];
            for a in 0..n0 {
                let fa = self.factors[0][[a, i]] * w;
                for b in 0..n1 {
                    data[IxDyn(&[a, b])] += fa * self.factors[1][[b, i]];
                }
            }
        }
        FullTensor { data }
    }

    /// SVD-based construction from a dense matrix.
    pub fn decompose(t: &FullTensor, policy: &TruncationPolicy) -> Result<CpTensor> {
        if t.ndim() != 2 {
            return Err(Error::CpHighOrder);
        }
        let shape = t.shape();
        let m = Array2::from_shape_fn((shape[0], shape[1]), |(a, b)| t.data[IxDyn(&[a, b])]);
        let svd = la::svd_thin(&m)?;
        let k = la::truncation_index(&svd.singular_values, policy.rule(0, 1))?.max(1);
        let f0 = svd.left.slice(ndarray::s![.., ..k]).to_owned();
        let mut f1 = Array2::from_elem((shape[1], k), Complex64::new(0.0, 0.0));
        for b in 0..shape[1] {
            for i in 0..k {
                // m[a,b] = sum_i sigma_i left[a,i] right_adj[i,b]
                f1[[b, i]] = svd.right_adj[[i, b]];
            }
        }
        CpTensor::new(svd.singular_values[..k].to_vec(), vec![f0, f1])
    }

    /// QR + SVD recompression to the policy's rank or tolerance.
    pub fn truncate(&self, policy: &TruncationPolicy) -> Result<(CpTensor, TruncationInfo)> {
        let mut work = self.clone();
        if let Some(thr) = policy.drop_small_norm_threshold {
            work = work.drop_small_terms(thr);
        }
        let r = work.rank();
        if r == 0 {
            return Ok((work, TruncationInfo { bound: 0.0 }));
        }
        // fold weights into the first factor
        let mut b0 = work.factors[0].clone();
        for i in 0..r {
            for a in 0..b0.nrows() {
                b0[[a, i]] *= work.weights[i];
            }
        }
        let q0 = la::qr_thin(&b0)?;
        let q1 = la::qr_thin(&work.factors[1])?;
        let middle = q0.r.dot(&q1.r.t());
        let svd = la::svd_thin(&middle)?;
        let k = la::truncation_index(&svd.singular_values, policy.rule(0, 1))?.max(1);
        let k = k.min(svd.singular_values.len());
        let bound = la::discarded_norm(&svd.singular_values, k);
        let f0 = q0.q.dot(&svd.left.slice(ndarray::s![.., ..k]).to_owned());
        // V = Q0 U Sigma W^H Q1^T = (Q0 U) Sigma (Q1 conj(W))^T, and
        // conj(W)[j,i] = right_adj[i,j]
        let wbar = Array2::from_shape_fn((svd.right_adj.ncols(), k), |(j, i)| {
            svd.right_adj[[i, j]]
        });
        let f1 = q1.q.dot(&wbar);
        let cp = CpTensor::new(svd.singular_values[..k].to_vec(), vec![f0, f1])?;
        Ok((cp, TruncationInfo { bound }))
    }

    fn drop_small_terms(&self, threshold: f64) -> CpTensor {
        let norms: Vec<f64> = (0..self.rank())
            .map(|i| {
                let n0: f64 = self.factors[0]
                    .column(i)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let n1: f64 = self.factors[1]
                    .column(i)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                self.weights[i].abs() * n0 * n1
            })
            .collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..self.rank())
            .filter(|&i| norms[i] >= threshold * max)
            .collect();
        if keep.len() == self.rank() || keep.is_empty() {
            return self.clone();
        }
        let weights = keep.iter().map(|&i| self.weights[i]).collect();
        let factors = self
            .factors
            .iter()
            .map(|f| {
                Array2::from_shape_fn((f.nrows(), keep.len()), |(a, j)| f[[a, keep[j]]])
            })
            .collect();
        CpTensor { weights, factors }
    }
}
