//! Order-d tensor representations (full, CP, Tucker, tensor train) and the
//! operation set the spectral solver needs: linear combination, Hadamard
//! product, d-dimensional FFT, rank truncation, inner products, and
//! parameter accounting.

use ndarray::{Array1, Array2, Array3, ArrayD, Dimension, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::la::{self, FftDirection, RankRule};

pub mod cp;
pub mod full;
pub mod serial;
pub mod tt;
pub mod tucker;

pub use cp::CpTensor;
pub use full::FullTensor;
pub use tt::TtTensor;
pub use tucker::TuckerTensor;

/// Hard cap on densification, in entries.
pub const DENSE_CAP: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorFormat {
    Full,
    Cp,
    Tucker,
    Tt,
}

impl TensorFormat {
    pub fn name(self) -> &'static str {
        match self {
            TensorFormat::Full => "full",
            TensorFormat::Cp => "cp",
            TensorFormat::Tucker => "tucker",
            TensorFormat::Tt => "tt",
        }
    }
}

impl std::str::FromStr for TensorFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(TensorFormat::Full),
            "cp" => Ok(TensorFormat::Cp),
            "tucker" => Ok(TensorFormat::Tucker),
            "tt" => Ok(TensorFormat::Tt),
            other => Err(Error::Config(format!("unknown tensor format '{other}'"))),
        }
    }
}

/// Rank-selection target for truncation and decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncationMode {
    /// Same cap on every mode/bond rank.
    FixedRank(usize),
    /// Per-split rank caps.
    FixedRanks(Vec<usize>),
    /// Keep enough terms that the discarded tail stays below tau overall.
    Tolerance(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    /// When set, rank-1 terms whose norm falls below `threshold * max` are
    /// dropped before re-orthogonalisation.
    pub drop_small_norm_threshold: Option<f64>,
}

impl TruncationPolicy {
    pub fn fixed_rank(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::ZeroRank);
        }
        Ok(TruncationPolicy {
            mode: TruncationMode::FixedRank(r),
            drop_small_norm_threshold: None,
        })
    }

    pub fn fixed_ranks(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() || ranks.iter().any(|&r| r == 0) {
            return Err(Error::ZeroRank);
        }
        Ok(TruncationPolicy {
            mode: TruncationMode::FixedRanks(ranks),
            drop_small_norm_threshold: None,
        })
    }

    pub fn tolerance(tau: f64) -> Result<Self> {
        if tau < 0.0 || !tau.is_finite() {
            return Err(Error::Config(format!("invalid tolerance {tau}")));
        }
        Ok(TruncationPolicy {
            mode: TruncationMode::Tolerance(tau),
            drop_small_norm_threshold: None,
        })
    }

    /// Keeps everything except exact zeros; used where no loss is wanted.
    pub fn exact() -> Self {
        TruncationPolicy {
            mode: TruncationMode::Tolerance(0.0),
            drop_small_norm_threshold: None,
        }
    }

    pub(crate) fn rule(&self, split: usize, num_splits: usize) -> RankRule {
        match &self.mode {
            TruncationMode::FixedRank(r) => RankRule::FixedRank(*r),
            TruncationMode::FixedRanks(v) => RankRule::FixedRank(v[split.min(v.len() - 1)]),
            TruncationMode::Tolerance(tau) => {
                RankRule::Tolerance(tau / (num_splits.max(1) as f64).sqrt())
            }
        }
    }
}

/// A-posteriori information about one truncation.
#[derive(Debug, Clone, Copy)]
pub struct TruncationInfo {
    /// Upper bound on the Frobenius error, from the discarded singular values.
    pub bound: f64,
}

/// An order-d tensor in one of the four storage formats.
#[derive(Debug, Clone)]
pub enum Tensor {
    Full(FullTensor),
    Cp(CpTensor),
    Tucker(TuckerTensor),
    Tt(TtTensor),
}

impl From<FullTensor> for Tensor {
    fn from(t: FullTensor) -> Self {
        Tensor::Full(t)
    }
}

impl Tensor {
    pub fn format(&self) -> TensorFormat {
        match self {
            Tensor::Full(_) => TensorFormat::Full,
            Tensor::Cp(_) => TensorFormat::Cp,
            Tensor::Tucker(_) => TensorFormat::Tucker,
            Tensor::Tt(_) => TensorFormat::Tt,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            Tensor::Full(t) => t.shape(),
            Tensor::Cp(t) => t.shape(),
            Tensor::Tucker(t) => t.shape(),
            Tensor::Tt(t) => t.shape(),
        }
    }

    pub fn ndim(&self) -> usize {
        self.shape().len()
    }

    /// Representation rank vector: CP -> [r]; Tucker -> mode ranks;
    /// TT -> bond ranks; full -> empty.
    pub fn ranks(&self) -> Vec<usize> {
        match self {
            Tensor::Full(_) => vec![],
            Tensor::Cp(t) => vec![t.rank()],
            Tensor::Tucker(t) => t.ranks(),
            Tensor::Tt(t) => t.ranks(),
        }
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(0)
    }

    /// Number of stored parameters, by format.
    pub fn param_count(&self) -> usize {
        match self {
            Tensor::Full(t) => t.data.len(),
            Tensor::Cp(t) => t.shape().iter().map(|n| n * t.rank()).sum(),
            Tensor::Tucker(t) => {
                let factors: usize = t
                    .shape()
                    .iter()
                    .zip(t.ranks())
                    .map(|(n, r)| n * r)
                    .sum();
                factors + t.core.len()
            }
            Tensor::Tt(t) => t.carriages.iter().map(|c| c.len()).sum(),
        }
    }

    /// Single-entry evaluation without densification.
    pub fn entry(&self, idx: &[usize]) -> Complex64 {
        match self {
            Tensor::Full(t) => t.data[IxDyn(idx)],
            Tensor::Cp(t) => t.entry(idx),
            Tensor::Tucker(t) => t.entry(idx),
            Tensor::Tt(t) => t.entry(idx),
        }
    }

    /// Evaluates the defining sum into a dense tensor (guarded by a size cap).
    pub fn reconstruct(&self) -> Result<FullTensor> {
        let size: usize = self.shape().iter().product();
        if size > DENSE_CAP {
            return Err(Error::DenseCap(size, DENSE_CAP));
        }
        Ok(match self {
            Tensor::Full(t) => t.clone(),
            Tensor::Cp(t) => t.reconstruct(),
            Tensor::Tucker(t) => t.reconstruct(),
            Tensor::Tt(t) => t.reconstruct(),
        })
    }

    /// Compression of a dense tensor into the requested format.
    pub fn decompose(t: &FullTensor, format: TensorFormat, policy: &TruncationPolicy) -> Result<Tensor> {
        match format {
            TensorFormat::Full => Ok(Tensor::Full(t.clone())),
            TensorFormat::Cp => {
                if t.ndim() != 2 {
                    return Err(Error::CpHighOrder);
                }
                Ok(Tensor::Cp(CpTensor::decompose(t, policy)?))
            }
            TensorFormat::Tucker => Ok(Tensor::Tucker(TuckerTensor::decompose(t, policy)?)),
            TensorFormat::Tt => Ok(Tensor::Tt(TtTensor::decompose(t, policy)?)),
        }
    }

    /// Rank-1 tensor from one vector per mode.
    pub fn rank_one(format: TensorFormat, vectors: &[Array1<Complex64>]) -> Result<Tensor> {
        Tensor::separable_sum(format, &[(1.0, vectors.to_vec())])
    }

    /// Sum of weighted separable terms, built directly in the target format.
    pub fn separable_sum(
        format: TensorFormat,
        terms: &[(f64, Vec<Array1<Complex64>>)],
    ) -> Result<Tensor> {
        let r = terms.len();
        if r == 0 {
            return Err(Error::Config("separable sum needs at least one term".into()));
        }
        let d = terms[0].1.len();
        let shape: Vec<usize> = terms[0].1.iter().map(|v| v.len()).collect();
        for (_, vs) in terms {
            if vs.len() != d || vs.iter().map(|v| v.len()).collect::<Vec<_>>() != shape {
                return Err(Error::ShapeMismatch(
                    shape.clone(),
                    vs.iter().map(|v| v.len()).collect(),
                ));
            }
        }
        match format {
            TensorFormat::Full => {
                let mut data = ArrayD::from_elem(IxDyn(&shape), Complex64::new(0.0, 0.0));
                for (w, vs) in terms {
                    for (idx, v) in data.indexed_iter_mut() {
                        let mut term = Complex64::new(*w, 0.0);
                        for j in 0..d {
                            term *= vs[j][idx[j]];
                        }
                        *v += term;
                    }
                }
                Ok(Tensor::Full(FullTensor { data }))
            }
            TensorFormat::Cp => {
                if d != 2 {
                    return Err(Error::CpHighOrder);
                }
                let weights: Vec<f64> = terms.iter().map(|(w, _)| *w).collect();
                let factors = (0..d)
                    .map(|j| {
                        Array2::from_shape_fn((shape[j], r), |(a, i)| terms[i].1[j][a])
                    })
                    .collect();
                Ok(Tensor::Cp(CpTensor::new(weights, factors)?))
            }
            TensorFormat::Tucker => {
                let factors: Vec<Array2<Complex64>> = (0..d)
                    .map(|j| {
                        Array2::from_shape_fn((shape[j], r), |(a, i)| terms[i].1[j][a])
                    })
                    .collect();
                let mut core =
                    ArrayD::from_elem(IxDyn(&vec![r; d]), Complex64::new(0.0, 0.0));
                for (i, (w, _)) in terms.iter().enumerate() {
                    core[IxDyn(&vec![i; d])] = Complex64::new(*w, 0.0);
                }
                Ok(Tensor::Tucker(TuckerTensor::new(core, factors)?))
            }
            TensorFormat::Tt => {
                let mut carriages = Vec::with_capacity(d);
                for j in 0..d {
                    let (rl, rr) = (
                        if j == 0 { 1 } else { r },
                        if j == d - 1 { 1 } else { r },
                    );
                    let mut c =
                        Array3::from_elem((rl, shape[j], rr), Complex64::new(0.0, 0.0));
                    for (i, (w, vs)) in terms.iter().enumerate() {
                        let scale = if j == 0 {
                            Complex64::new(*w, 0.0)
                        } else {
                            Complex64::new(1.0, 0.0)
                        };
                        let (a, b) = (if j == 0 { 0 } else { i }, if j == d - 1 { 0 } else { i });
                        for x in 0..shape[j] {
                            c[[a, x, b]] += scale * vs[j][x];
                        }
                    }
                    carriages.push(c);
                }
                Ok(Tensor::Tt(TtTensor::new(carriages)?))
            }
        }
    }

    /// All-zero tensor in the given format (rank 1 representation).
    pub fn zero(format: TensorFormat, shape: &[usize]) -> Result<Tensor> {
        let vectors: Vec<Array1<Complex64>> = shape
            .iter()
            .map(|&n| Array1::from_elem(n, Complex64::new(0.0, 0.0)))
            .collect();
        Tensor::rank_one(format, &vectors)
    }

    /// In-place scalar multiple.
    pub fn scale(&mut self, alpha: f64) {
        match self {
            Tensor::Full(t) => t.data.mapv_inplace(|z| z * alpha),
            Tensor::Cp(t) => t.weights.iter_mut().for_each(|w| *w *= alpha),
            Tensor::Tucker(t) => t.core.mapv_inplace(|z| z * alpha),
            Tensor::Tt(t) => t.carriages[0].mapv_inplace(|z| z * alpha),
        }
    }

    fn check_compatible(&self, other: &Tensor) -> Result<()> {
        if self.format() != other.format() {
            return Err(Error::FormatMismatch(
                self.format().name(),
                other.format().name(),
            ));
        }
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(self.shape(), other.shape()));
        }
        Ok(())
    }

    /// `alpha * v + beta * w` with representation ranks adding.
    pub fn linear_combine(alpha: f64, v: &Tensor, beta: f64, w: &Tensor) -> Result<Tensor> {
        v.check_compatible(w)?;
        match (v, w) {
            (Tensor::Full(a), Tensor::Full(b)) => Ok(Tensor::Full(FullTensor {
                data: &a.data * Complex64::new(alpha, 0.0) + &b.data * Complex64::new(beta, 0.0),
            })),
            (Tensor::Cp(a), Tensor::Cp(b)) => {
                let mut weights: Vec<f64> = a.weights.iter().map(|c| alpha * c).collect();
                weights.extend(b.weights.iter().map(|c| beta * c));
                let factors = (0..2)
                    .map(|j| concat_cols(&a.factors[j], &b.factors[j]))
                    .collect();
                Ok(Tensor::Cp(CpTensor::new(weights, factors)?))
            }
            (Tensor::Tucker(a), Tensor::Tucker(b)) => {
                let d = a.ndim();
                let ra = a.ranks();
                let rb = b.ranks();
                let new_ranks: Vec<usize> = ra.iter().zip(&rb).map(|(x, y)| x + y).collect();
                let mut core =
                    ArrayD::from_elem(IxDyn(&new_ranks), Complex64::new(0.0, 0.0));
                for (idx, &c) in a.core.indexed_iter() {
                    core[IxDyn(idx.slice())] = c * alpha;
                }
                for (idx, &c) in b.core.indexed_iter() {
                    let shifted: Vec<usize> = idx
                        .slice()
                        .iter()
                        .zip(&ra)
                        .map(|(&i, &off)| i + off)
                        .collect();
                    core[IxDyn(&shifted)] = c * beta;
                }
                let factors = (0..d)
                    .map(|j| concat_cols(&a.factors[j], &b.factors[j]))
                    .collect();
                Ok(Tensor::Tucker(TuckerTensor::new(core, factors)?))
            }
            (Tensor::Tt(a), Tensor::Tt(b)) => {
                let d = a.ndim();
                let mut carriages = Vec::with_capacity(d);
                for j in 0..d {
                    let ca = &a.carriages[j];
                    let cb = &b.carriages[j];
                    let (al, n, ar) = (ca.shape()[0], ca.shape()[1], ca.shape()[2]);
                    let (bl, _, br) = (cb.shape()[0], cb.shape()[1], cb.shape()[2]);
                    let (nl, nr) = if d == 1 {
                        (1, 1)
                    } else if j == 0 {
                        (1, ar + br)
                    } else if j == d - 1 {
                        (al + bl, 1)
                    } else {
                        (al + bl, ar + br)
                    };
                    let mut c = Array3::from_elem((nl, n, nr), Complex64::new(0.0, 0.0));
                    let (sa, sb) = if j == 0 {
                        (Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
                    } else {
                        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
                    };
                    for x in 0..n {
                        for a1 in 0..al {
                            for b1 in 0..ar {
                                let (ia, ib) = (if j == 0 { 0 } else { a1 }, if j == d - 1 { 0 } else { b1 });
                                c[[ia, x, ib]] += sa * ca[[a1, x, b1]];
                            }
                        }
                        for a1 in 0..bl {
                            for b1 in 0..br {
                                let ia = if j == 0 { 0 } else { a1 + al };
                                let ib = if j == d - 1 { 0 } else { b1 + ar };
                                c[[ia, x, ib]] += sb * cb[[a1, x, b1]];
                            }
                        }
                    }
                    carriages.push(c);
                }
                Ok(Tensor::Tt(TtTensor::new(carriages)?))
            }
            _ => unreachable!("formats checked above"),
        }
    }

    /// Element-wise product; representation ranks multiply.
    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        self.check_compatible(other)?;
        match (self, other) {
            (Tensor::Full(a), Tensor::Full(b)) => Ok(Tensor::Full(FullTensor {
                data: &a.data * &b.data,
            })),
            (Tensor::Cp(a), Tensor::Cp(b)) => {
                let (r, s) = (a.rank(), b.rank());
                let mut weights = Vec::with_capacity(r * s);
                for i in 0..r {
                    for k in 0..s {
                        weights.push(a.weights[i] * b.weights[k]);
                    }
                }
                let factors = (0..2)
                    .map(|j| khatri_rao_cols(&a.factors[j], &b.factors[j]))
                    .collect();
                Ok(Tensor::Cp(CpTensor::new(weights, factors)?))
            }
            (Tensor::Tucker(a), Tensor::Tucker(b)) => {
                let d = a.ndim();
                let ra = a.ranks();
                let rb = b.ranks();
                let new_ranks: Vec<usize> =
                    ra.iter().zip(&rb).map(|(x, y)| x * y).collect();
                let mut core =
                    ArrayD::from_elem(IxDyn(&new_ranks), Complex64::new(0.0, 0.0));
                for (ia, &cva) in a.core.indexed_iter() {
                    for (ib, &cvb) in b.core.indexed_iter() {
                        // paired index l_j = i_j * s_j + k_j
                        let l: Vec<usize> = (0..d)
                            .map(|j| ia[j] * rb[j] + ib[j])
                            .collect();
                        core[IxDyn(&l)] = cva * cvb;
                    }
                }
                let factors = (0..d)
                    .map(|j| khatri_rao_cols(&a.factors[j], &b.factors[j]))
                    .collect();
                Ok(Tensor::Tucker(TuckerTensor::new(core, factors)?))
            }
            (Tensor::Tt(a), Tensor::Tt(b)) => {
                let d = a.ndim();
                let mut carriages = Vec::with_capacity(d);
                for j in 0..d {
                    let ca = &a.carriages[j];
                    let cb = &b.carriages[j];
                    let (al, n, ar) = (ca.shape()[0], ca.shape()[1], ca.shape()[2]);
                    let (bl, _, br) = (cb.shape()[0], cb.shape()[1], cb.shape()[2]);
                    let mut c = Array3::from_elem(
                        (al * bl, n, ar * br),
                        Complex64::new(0.0, 0.0),
                    );
                    for x in 0..n {
                        for i in 0..al {
                            for k in 0..bl {
                                for i2 in 0..ar {
                                    for k2 in 0..br {
                                        c[[i * bl + k, x, i2 * br + k2]] =
                                            ca[[i, x, i2]] * cb[[k, x, k2]];
                                    }
                                }
                            }
                        }
                    }
                    carriages.push(c);
                }
                Ok(Tensor::Tt(TtTensor::new(carriages)?))
            }
            _ => unreachable!("formats checked above"),
        }
    }

    /// d-dimensional DFT applied to the representation's mode vectors;
    /// representation ranks are unchanged.
    pub fn fft_d(&self, direction: FftDirection) -> Result<Tensor> {
        match self {
            Tensor::Full(t) => {
                let mut out = t.clone();
                out.fft_d_inplace(direction)?;
                Ok(Tensor::Full(out))
            }
            Tensor::Cp(t) => {
                let mut out = t.clone();
                for f in &mut out.factors {
                    fft_columns(f, direction)?;
                }
                Ok(Tensor::Cp(out))
            }
            Tensor::Tucker(t) => {
                let mut out = t.clone();
                for f in &mut out.factors {
                    fft_columns(f, direction)?;
                }
                // the transform is not unitary under this scaling
                out.orthonormal = vec![false; out.ndim()];
                Ok(Tensor::Tucker(out))
            }
            Tensor::Tt(t) => {
                let mut out = t.clone();
                for c in &mut out.carriages {
                    let (rl, n, rr) = (c.shape()[0], c.shape()[1], c.shape()[2]);
                    for a in 0..rl {
                        for b in 0..rr {
                            let mut fibre: Vec<Complex64> =
                                (0..n).map(|x| c[[a, x, b]]).collect();
                            la::fft1d_inplace(&mut fibre, direction)?;
                            for (x, z) in fibre.into_iter().enumerate() {
                                c[[a, x, b]] = z;
                            }
                        }
                    }
                }
                Ok(Tensor::Tt(out))
            }
        }
    }

    /// Rank truncation to the policy target; no-op for full tensors.
    pub fn truncate(&self, policy: &TruncationPolicy) -> Result<Tensor> {
        Ok(self.truncate_with_info(policy)?.0)
    }

    pub fn truncate_with_info(&self, policy: &TruncationPolicy) -> Result<(Tensor, TruncationInfo)> {
        match self {
            Tensor::Full(t) => Ok((Tensor::Full(t.clone()), TruncationInfo { bound: 0.0 })),
            Tensor::Cp(t) => {
                let (out, info) = t.truncate(policy)?;
                Ok((Tensor::Cp(out), info))
            }
            Tensor::Tucker(t) => {
                let (out, info) = t.truncate(policy)?;
                Ok((Tensor::Tucker(out), info))
            }
            Tensor::Tt(t) => {
                let (out, info) = t.truncate(policy)?;
                Ok((Tensor::Tt(out), info))
            }
        }
    }

    /// Frobenius inner product `sum v * conj(w)`.
    pub fn inner(&self, other: &Tensor) -> Result<Complex64> {
        self.check_compatible(other)?;
        Ok(match (self, other) {
            (Tensor::Full(a), Tensor::Full(b)) => a
                .data
                .iter()
                .zip(b.data.iter())
                .map(|(x, y)| x * y.conj())
                .sum(),
            (Tensor::Cp(a), Tensor::Cp(b)) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..a.rank() {
                    for k in 0..b.rank() {
                        let mut term = Complex64::new(a.weights[i] * b.weights[k], 0.0);
                        for j in 0..2 {
                            let mut dot = Complex64::new(0.0, 0.0);
                            for row in 0..a.factors[j].nrows() {
                                dot += a.factors[j][[row, i]] * b.factors[j][[row, k]].conj();
                            }
                            term *= dot;
                        }
                        acc += term;
                    }
                }
                acc
            }
            (Tensor::Tucker(a), Tensor::Tucker(b)) => tucker::inner(a, b),
            (Tensor::Tt(a), Tensor::Tt(b)) => tt::inner(a, b),
            _ => unreachable!("formats checked above"),
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm_info().0
    }

    /// Norm plus a flag recording whether the Tucker core-norm shortcut was
    /// applicable; non-orthonormal factors fall back to the full contraction.
    pub fn norm_info(&self) -> (f64, bool) {
        match self {
            Tensor::Tucker(t) if t.all_orthonormal() => (t.core_norm(), true),
            _ => {
                let ip = self.inner(self).expect("inner with self");
                (ip.re.max(0.0).sqrt(), false)
            }
        }
    }

    /// Centered zero-padding of every mode to the (odd) sizes in `new_shape`;
    /// ranks are unchanged.
    pub fn pad_centered(&self, new_shape: &[usize]) -> Result<Tensor> {
        self.resize(new_shape, true)
    }

    /// Centered restriction of every mode to the (odd) sizes in `new_shape`.
    pub fn crop_centered(&self, new_shape: &[usize]) -> Result<Tensor> {
        self.resize(new_shape, false)
    }

    fn resize(&self, new_shape: &[usize], grow: bool) -> Result<Tensor> {
        let shape = self.shape();
        if new_shape.len() != shape.len() {
            return Err(Error::ShapeMismatch(shape, new_shape.to_vec()));
        }
        for (&n, &m) in shape.iter().zip(new_shape) {
            if n % 2 == 0 || m % 2 == 0 {
                return Err(Error::EvenGridSize(if n % 2 == 0 { n } else { m }));
            }
            if (grow && m < n) || (!grow && m > n) {
                return Err(Error::ShapeMismatch(shape, new_shape.to_vec()));
            }
        }
        match self {
            Tensor::Full(t) => Ok(Tensor::Full(if grow {
                t.pad_centered(new_shape)?
            } else {
                t.crop_centered(new_shape)?
            })),
            Tensor::Cp(t) => {
                let mut out = t.clone();
                for (j, f) in out.factors.iter_mut().enumerate() {
                    *f = resize_rows(f, new_shape[j]);
                }
                Ok(Tensor::Cp(out))
            }
            Tensor::Tucker(t) => {
                let mut out = t.clone();
                for (j, f) in out.factors.iter_mut().enumerate() {
                    *f = resize_rows(f, new_shape[j]);
                    // zero rows keep columns orthonormal; cropping does not
                    if !grow {
                        out.orthonormal[j] = false;
                    }
                }
                Ok(Tensor::Tucker(out))
            }
            Tensor::Tt(t) => {
                let mut out = t.clone();
                for (j, c) in out.carriages.iter_mut().enumerate() {
                    let (rl, n, rr) = (c.shape()[0], c.shape()[1], c.shape()[2]);
                    let m = new_shape[j];
                    let mut nc = Array3::from_elem((rl, m, rr), Complex64::new(0.0, 0.0));
                    if m >= n {
                        let off = (m - n) / 2;
                        for a in 0..rl {
                            for x in 0..n {
                                for b in 0..rr {
                                    nc[[a, x + off, b]] = c[[a, x, b]];
                                }
                            }
                        }
                    } else {
                        let off = (n - m) / 2;
                        for a in 0..rl {
                            for x in 0..m {
                                for b in 0..rr {
                                    nc[[a, x, b]] = c[[a, x + off, b]];
                                }
                            }
                        }
                    }
                    *c = nc;
                }
                Ok(Tensor::Tt(out))
            }
        }
    }
}

/// Centered row padding (m > rows) or restriction (m < rows) of a factor.
fn resize_rows(f: &Array2<Complex64>, m: usize) -> Array2<Complex64> {
    let n = f.nrows();
    if m >= n {
        let off = (m - n) / 2;
        Array2::from_shape_fn((m, f.ncols()), |(r, c)| {
            if r >= off && r < off + n {
                f[[r - off, c]]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    } else {
        let off = (n - m) / 2;
        Array2::from_shape_fn((m, f.ncols()), |(r, c)| f[[r + off, c]])
    }
}

fn concat_cols(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((a.nrows(), a.ncols() + b.ncols()), |(r, c)| {
        if c < a.ncols() {
            a[[r, c]]
        } else {
            b[[r, c - a.ncols()]]
        }
    })
}

/// Column-wise products with the pairing l = i * s + k.
fn khatri_rao_cols(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (r, s) = (a.ncols(), b.ncols());
    Array2::from_shape_fn((a.nrows(), r * s), |(row, l)| {
        a[[row, l / s]] * b[[row, l % s]]
    })
}

fn fft_columns(f: &mut Array2<Complex64>, direction: FftDirection) -> Result<()> {
    for mut col in f.columns_mut() {
        let v: Vec<Complex64> = col.iter().cloned().collect();
        let w = la::fft1d(&v, direction)?;
        for (dst, src) in col.iter_mut().zip(w) {
            *dst = src;
        }
    }
    Ok(())
}
