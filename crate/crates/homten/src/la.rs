//! Dense linear-algebra and 1-D FFT primitives.
//!
//! All Fourier-space data in this crate is stored in *centered* order: a
//! vector of odd length `N` is indexed by the frequency set
//! `Z_N = {-(N-1)/2, ..., (N-1)/2}`. The reordering between the natural FFT
//! layout and the centered layout lives exclusively in [`fft1d`].
//!
//! Scaling convention: the forward transform carries the factor `1/N`, the
//! inverse transform carries none, so forward coefficients are
//! `v_hat[k] = (1/N) * sum_m v[m] exp(-2*pi*i*k*m/N)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Transform direction for [`fft1d`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftDirection {
    Forward,
    Inverse,
}

struct PlanPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: Lazy<Mutex<HashMap<usize, Arc<PlanPair>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize) -> Arc<PlanPair> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(PlanPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// 1-D DFT of an odd-length vector in centered frequency order.
pub fn fft1d(v: &[Complex64], direction: FftDirection) -> Result<Vec<Complex64>> {
    let n = v.len();
    if n % 2 == 0 {
        return Err(Error::EvenGridSize(n));
    }
    let half = (n - 1) / 2;
    // centered -> natural
    let mut buf: Vec<Complex64> = (0..n).map(|j| v[(j + half) % n]).collect();
    let plans = plan(n);
    match direction {
        FftDirection::Forward => plans.forward.process(&mut buf),
        FftDirection::Inverse => plans.inverse.process(&mut buf),
    }
    let scale = match direction {
        FftDirection::Forward => 1.0 / n as f64,
        FftDirection::Inverse => 1.0,
    };
    // natural -> centered
    Ok((0..n)
        .map(|i| buf[(i + half + 1) % n] * scale)
        .collect())
}

/// Applies [`fft1d`] in place to a mutable slice.
pub fn fft1d_inplace(v: &mut [Complex64], direction: FftDirection) -> Result<()> {
    let out = fft1d(v, direction)?;
    v.copy_from_slice(&out);
    Ok(())
}

/// Thin SVD factors: `left * diag(singular_values) * right_adj` reconstructs
/// the input. Columns of `left` are orthonormal, rows of `right_adj` are
/// orthonormal, singular values are sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub left: Array2<Complex64>,
    pub singular_values: Vec<f64>,
    pub right_adj: Array2<Complex64>,
}

/// Thin QR factors with `q` column-orthonormal and `r` upper triangular.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: Array2<Complex64>,
    pub r: Array2<Complex64>,
}

pub(crate) fn to_na(a: &Array2<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_na(m: &DMatrix<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn check_finite(a: &Array2<Complex64>) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Thin singular value decomposition with min(rows, cols) singular triplets.
pub fn svd_thin(m: &Array2<Complex64>) -> Result<SvdFactors> {
    check_finite(m)?;
    let na = to_na(m);
    let svd = na.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    let k = svd.singular_values.len();
    // sort descending
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let left = Array2::from_shape_fn((u.nrows(), k), |(i, j)| u[(i, order[j])]);
    let right_adj = Array2::from_shape_fn((k, vt.ncols()), |(i, j)| vt[(order[i], j)]);
    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    Ok(SvdFactors {
        left,
        singular_values,
        right_adj,
    })
}

/// Thin QR decomposition.
pub fn qr_thin(m: &Array2<Complex64>) -> Result<QrFactors> {
    check_finite(m)?;
    let qr = to_na(m).qr();
    Ok(QrFactors {
        q: from_na(&qr.q()),
        r: from_na(&qr.r()),
    })
}

/// Rank-selection rule shared by all format truncations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// Keep at most this many values.
    FixedRank(usize),
    /// Keep the smallest k with sqrt(sum_{i>k} sigma_i^2) <= tau.
    Tolerance(f64),
}

/// Number of leading singular values retained under `rule`.
///
/// `values` must be non-negative and non-increasing.
pub fn truncation_index(values: &[f64], rule: RankRule) -> Result<usize> {
    for w in values.windows(2) {
        if w[1] > w[0] {
            return Err(Error::BadSingularValues);
        }
    }
    if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::BadSingularValues);
    }
    match rule {
        RankRule::FixedRank(k) => Ok(k.min(values.len())),
        RankRule::Tolerance(tau) => {
            if tau < 0.0 {
                return Err(Error::BadSingularValues);
            }
            let mut tail = 0.0;
            let mut k = values.len();
            // grow the discarded tail from the back while it stays within tau
            for i in (0..values.len()).rev() {
                let candidate = tail + values[i] * values[i];
                if candidate.sqrt() <= tau {
                    tail = candidate;
                    k = i;
                } else {
                    break;
                }
            }
            Ok(k)
        }
    }
}

/// Frobenius norm of the tail `values[k..]`, the truncation error of one SVD.
pub fn discarded_norm(values: &[f64], k: usize) -> f64 {
    values[k.min(values.len())..]
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    /// Direct O(N^2) DFT on the centered set, the oracle for fft1d.
    fn dft_direct(v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len() as i64;
        let half = (n - 1) / 2;
        (-half..=half)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &x) in v.iter().enumerate() {
                    let m = i as i64 - half;
                    let phase = -2.0 * std::f64::consts::PI * (k * m) as f64 / n as f64;
                    acc += x * Complex64::from_polar(1.0, phase);
                }
                acc / n as f64
            })
            .collect()
    }

    #[test]
    fn forward_of_constant_is_delta_at_zero() {
        let v = vec![Complex64::new(1.0, 0.0); 3];
        let out = fft1d(&v, FftDirection::Forward).unwrap();
        assert!((out[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(out[0].norm() < 1e-14);
        assert!(out[2].norm() < 1e-14);
    }

    #[test]
    fn inverse_of_delta_is_constant() {
        let mut v = vec![Complex64::new(0.0, 0.0); 3];
        v[1] = Complex64::new(1.0, 0.0);
        let out = fft1d(&v, FftDirection::Inverse).unwrap();
        for z in out {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip_and_direct_dft_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 7, 15, 101] {
            let v = rand_vec(n, &mut rng);
            let fwd = fft1d(&v, FftDirection::Forward).unwrap();
            let oracle = dft_direct(&v);
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for (a, b) in fwd.iter().zip(&oracle) {
                assert!((a - b).norm() <= 1e-12 * norm.max(1.0));
            }
            let back = fft1d(&fwd, FftDirection::Inverse).unwrap();
            for (a, b) in back.iter().zip(&v) {
                assert!((a - b).norm() <= 1e-12 * norm.max(1.0));
            }
        }
    }

    #[test]
    fn even_length_rejected() {
        let v = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(
            fft1d(&v, FftDirection::Forward),
            Err(Error::EvenGridSize(4))
        ));
    }

    #[test]
    fn svd_identity_and_rank_one() {
        let eye: Array2<Complex64> = Array2::from_shape_fn((3, 3), |(i, j)| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        let f = svd_thin(&eye).unwrap();
        for s in &f.singular_values {
            assert!((s - 1.0).abs() < 1e-12);
        }

        let a = [1.0, -2.0, 0.5];
        let b = [3.0, 4.0];
        let outer = Array2::from_shape_fn((3, 2), |(i, j)| Complex64::new(a[i] * b[j], 0.0));
        let f = svd_thin(&outer).unwrap();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((f.singular_values[0] - na * nb).abs() < 1e-12);
        assert!(f.singular_values[1].abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Array2::from_shape_fn((4, 3), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let f = svd_thin(&m).unwrap();
        let mut rec = Array2::from_elem((4, 3), Complex64::new(0.0, 0.0));
        for i in 0..4 {
            for j in 0..3 {
                for k in 0..f.singular_values.len() {
                    rec[[i, j]] += f.left[[i, k]] * f.singular_values[k] * f.right_adj[[k, j]];
                }
            }
        }
        let err: f64 = (&rec - &m).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * norm);
    }

    #[test]
    fn svd_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = Array2::from_shape_fn((5, 4), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let f = svd_thin(&m).unwrap();
        // eigenvalues of m^H m via nalgebra
        let na = to_na(&m);
        let gram = na.adjoint() * na;
        let mut eig: Vec<f64> = gram
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (s, e) in f.singular_values.iter().zip(eig) {
            assert!((s - e).abs() < 1e-10);
        }
    }

    #[test]
    fn qr_orthonormality_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Array2::from_shape_fn((6, 3), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let f = qr_thin(&m).unwrap();
        // q^H q = I
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..6 {
                    acc += f.q[[i, a]].conj() * f.q[[i, b]];
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((acc - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        // q r = m
        let rec = f.q.dot(&f.r);
        let err: f64 = (&rec - &m).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * norm);
        // r upper triangular
        for i in 0..3 {
            for j in 0..i {
                assert!(f.r[[i, j]].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_of_orthonormal_input_gives_identity_r() {
        let eye: Array2<Complex64> = Array2::from_shape_fn((4, 4), |(i, j)| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        let f = qr_thin(&eye).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((f.r[[i, j]].norm() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_index_examples() {
        let sv = [3.0, 2.0, 1.0];
        assert_eq!(truncation_index(&sv, RankRule::Tolerance(1.0)).unwrap(), 2);
        assert_eq!(truncation_index(&sv, RankRule::Tolerance(0.0)).unwrap(), 3);
        assert_eq!(truncation_index(&sv, RankRule::FixedRank(10)).unwrap(), 3);
        assert!(truncation_index(&[1.0, 2.0], RankRule::FixedRank(1)).is_err());
        assert!(truncation_index(&[-1.0], RankRule::FixedRank(1)).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let m = array![[Complex64::new(f64::NAN, 0.0)]];
        assert!(svd_thin(&m).is_err());
        assert!(qr_thin(&m).is_err());
    }
}
