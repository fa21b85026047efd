//! Tensor train representation: a chain of order-3 carriages contracted over
//! bond indices, with boundary bond ranks fixed to one.

use ndarray::{Array2, Array3, ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::la;
use crate::tensors::full::FullTensor;
use crate::tensors::{TruncationInfo, TruncationPolicy};

#[derive(Debug, Clone)]
pub struct TtTensor {
    /// Carriage j has shape (r_{j-1}, N_j, r_j); r_0 = r_d = 1.
    pub carriages: Vec<Array3<Complex64>>,
}

impl TtTensor {
    pub fn new(carriages: Vec<Array3<Complex64>>) -> Result<Self> {
        if carriages.is_empty()
            || carriages[0].shape()[0] != 1
            || carriages.last().unwrap().shape()[2] != 1
        {
            return Err(Error::BadContainer("boundary bond ranks must be 1".into()));
        }
        for w in carriages.windows(2) {
            if w[0].shape()[2] != w[1].shape()[0] {
                return Err(Error::ShapeMismatch(
                    w[0].shape().to_vec(),
                    w[1].shape().to_vec(),
                ));
            }
        }
        Ok(TtTensor { carriages })
    }

    pub fn ndim(&self) -> usize {
        self.carriages.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.carriages.iter().map(|c| c.shape()[1]).collect()
    }

    /// Interior bond ranks (r_1, ..., r_{d-1}).
    pub fn ranks(&self) -> Vec<usize> {
        self.carriages[..self.ndim() - 1]
            .iter()
            .map(|c| c.shape()[2])
            .collect()
    }

    pub fn entry(&self, idx: &[usize]) -> Complex64 {
        let mut row: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
        for (j, c) in self.carriages.iter().enumerate() {
            let (rl, _, rr) = (c.shape()[0], c.shape()[1], c.shape()[2]);
            let mut next = vec![Complex64::new(0.0, 0.0); rr];
            for b in 0..rr {
                for a in 0..rl {
                    next[b] += row[a] * c[[a, idx[j], b]];
                }
            }
            row = next;
        }
        row[0]
    }

    pub fn reconstruct(&self) -> FullTensor {
        let shape = self.shape();
        // accumulate left-to-right: (prod_of_modes, bond)
        let c0 = &self.carriages[0];
        let mut acc = Array2::from_shape_fn((shape[0], c0.shape()[2]), |(a, b)| c0[[0, a, b]]);
        for c in &self.carriages[1..] {
            let (rl, n, rr) = (c.shape()[0], c.shape()[1], c.shape()[2]);
            let mat = Array2::from_shape_fn((rl, n * rr), |(a, col)| c[[a, col / rr, col % rr]]);
            let prod = acc.dot(&mat); // (rows, n*rr)
            let rows = prod.nrows();
            acc = Array2::from_shape_fn((rows * n, rr), |(row, b)| {
                prod[[row / n, (row % n) * rr + b]]
            });
        }
        let data = ArrayD::from_shape_vec(IxDyn(&shape), acc.column(0).to_vec()).unwrap();
        FullTensor { data }
    }

    /// TT-SVD: sequential SVDs on consecutive matricisations; the result is
    /// left-orthogonalised.
    pub fn decompose(t: &FullTensor, policy: &TruncationPolicy) -> Result<TtTensor> {
        let shape = t.shape();
        let d = shape.len();
        let splits = d - 1;
        let mut carriages = Vec::with_capacity(d);
        let mut rest: Vec<Complex64> = t.data.iter().cloned().collect();
        let mut r_prev = 1usize;
        for j in 0..d - 1 {
            let rows = r_prev * shape[j];
            let cols = rest.len() / rows;
            let m = Array2::from_shape_vec((rows, cols), rest).expect("consistent reshape");
            let svd = la::svd_thin(&m)?;
            let k = la::truncation_index(&svd.singular_values, policy.rule(j, splits))?.max(1);
            let k = k.min(svd.singular_values.len());
            let carriage = Array3::from_shape_fn((r_prev, shape[j], k), |(a, n, b)| {
                svd.left[[a * shape[j] + n, b]]
            });
            carriages.push(carriage);
            // carry sigma * V^H forward
            let mut next = vec![Complex64::new(0.0, 0.0); k * cols];
            for i in 0..k {
                for c in 0..cols {
                    next[i * cols + c] = svd.singular_values[i] * svd.right_adj[[i, c]];
                }
            }
            rest = next;
            r_prev = k;
        }
        let last = Array3::from_shape_fn((r_prev, shape[d - 1], 1), |(a, n, _)| {
            rest[a * shape[d - 1] + n]
        });
        carriages.push(last);
        TtTensor::new(carriages)
    }

    /// TT-rounding: right-to-left orthogonalisation, then a left-to-right
    /// SVD sweep truncating each bond.
    pub fn truncate(&self, policy: &TruncationPolicy) -> Result<(TtTensor, TruncationInfo)> {
        let d = self.ndim();
        let splits = d - 1;
        let mut carriages = self.carriages.clone();
        // right-to-left: make carriages 1..d row-orthonormal
        for j in (1..d).rev() {
            let (rl, n, rr) = dims(&carriages[j]);
            // rows indexed by the left bond; QR of the adjoint
            let m = Array2::from_shape_fn((rl, n * rr), |(a, col)| {
                carriages[j][[a, col / rr, col % rr]]
            });
            let mh = Array2::from_shape_fn((n * rr, rl), |(i, a)| m[[a, i]].conj());
            let qr = la::qr_thin(&mh)?;
            let rnew = qr.q.ncols();
            // carriage_j := Q^H reshaped
            carriages[j] = Array3::from_shape_fn((rnew, n, rr), |(a, nn, b)| {
                qr.q[[nn * rr + b, a]].conj()
            });
            // push R^H into carriage_{j-1} along its right bond
            let rh = Array2::from_shape_fn((rl, rnew), |(a, b)| qr.r[[b, a]].conj());
            let (pl, pn, _) = dims(&carriages[j - 1]);
            let prev = Array2::from_shape_fn((pl * pn, rl), |(row, b)| {
                carriages[j - 1][[row / pn, row % pn, b]]
            });
            let updated = prev.dot(&rh);
            carriages[j - 1] = Array3::from_shape_fn((pl, pn, rnew), |(a, nn, b)| {
                updated[[a * pn + nn, b]]
            });
        }
        // left-to-right SVD sweep with truncation
        let mut bound_sq = 0.0;
        for j in 0..d - 1 {
            let (rl, n, rr) = dims(&carriages[j]);
            let m = Array2::from_shape_fn((rl * n, rr), |(row, b)| {
                carriages[j][[row / n, row % n, b]]
            });
            let svd = la::svd_thin(&m)?;
            let k = la::truncation_index(&svd.singular_values, policy.rule(j, splits))?.max(1);
            let k = k.min(svd.singular_values.len());
            let tail = la::discarded_norm(&svd.singular_values, k);
            bound_sq += tail * tail;
            carriages[j] = Array3::from_shape_fn((rl, n, k), |(a, nn, b)| {
                svd.left[[a * n + nn, b]]
            });
            // sigma * V^H into the next carriage's left bond
            let sv = Array2::from_shape_fn((k, rr), |(i, c)| {
                svd.singular_values[i] * svd.right_adj[[i, c]]
            });
            let (nl, nn, nr) = dims(&carriages[j + 1]);
            debug_assert_eq!(nl, rr);
            let next = Array2::from_shape_fn((nl, nn * nr), |(a, col)| {
                carriages[j + 1][[a, col / nr, col % nr]]
            });
            let updated = sv.dot(&next);
            carriages[j + 1] = Array3::from_shape_fn((k, nn, nr), |(a, m2, b)| {
                updated[[a, m2 * nr + b]]
            });
        }
        Ok((
            TtTensor::new(carriages)?,
            TruncationInfo {
                bound: bound_sq.sqrt(),
            },
        ))
    }
}

fn dims(c: &Array3<Complex64>) -> (usize, usize, usize) {
    (c.shape()[0], c.shape()[1], c.shape()[2])
}

/// TT inner product by transfer-matrix contraction.
pub fn inner(v: &TtTensor, w: &TtTensor) -> Complex64 {
    let d = v.ndim();
    // m[(i,k)] accumulates the contraction of the first j carriages
    let mut m = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
    for j in 0..d {
        let cv = &v.carriages[j];
        let cw = &w.carriages[j];
        let (vl, n, vr) = dims(cv);
        let (_, _, wr) = dims(cw);
        let mut next = Array2::from_elem((vr, wr), Complex64::new(0.0, 0.0));
        for x in 0..n {
            // next += A_x^T * m * conj(B_x) with A_x = cv[:,x,:], B_x = cw[:,x,:]
            let ax = Array2::from_shape_fn((vr, vl), |(b, a)| cv[[a, x, b]]);
            let bx = cw.index_axis(ndarray::Axis(1), x).mapv(|z| z.conj());
            next = next + ax.dot(&m).dot(&bx);
        }
        m = next;
    }
    m[[0, 0]]
}
