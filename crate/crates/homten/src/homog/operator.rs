//! The preconditioned cell-problem operator in Fourier space: spectral
//! gradient and divergence, the two discretisation chains (grid quadrature
//! and exactly integrated double grid), the Laplacian preconditioner, right
//! hand sides, and the effective coefficient.

use ndarray::Array1;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::homog::grid::{self, GridSpec};
use crate::homog::material::{material_ga, material_gani, MaterialField, MaterialSpec};
use crate::la::FftDirection;
use crate::tensors::{FullTensor, Tensor, TensorFormat, TruncationPolicy, DENSE_CAP};

/// Relative accuracy of the low-rank preconditioner approximant.
pub const PRECOND_APPROX_TOL: f64 = 1e-8;
/// Predicted parameter count above which an exact Hadamard product falls
/// back to densify-multiply-decompose (only when the dense size permits).
pub const HADAMARD_PARAM_CAP: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Numerical integration at the grid points (Moulinec-Suquet quadrature).
    GaNi,
    /// Exact integration on the double grid with zero-padding injection.
    Ga,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::GaNi => "gani",
            Scheme::Ga => "ga",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gani" => Ok(Scheme::GaNi),
            "ga" => Ok(Scheme::Ga),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Everything needed to apply the preconditioned operator: immutable after
/// construction and shareable across threads.
#[derive(Debug, Clone)]
pub struct OperatorContext {
    pub scheme: Scheme,
    pub grid: GridSpec,
    pub format: TensorFormat,
    pub material: MaterialField,
    /// Rank-1 tensors holding 2 pi i k_alpha on Z_N, one per direction.
    pub ik: Vec<Tensor>,
    /// Pseudo-inverse preconditioner in the working format (exact for full,
    /// an approximant of relative accuracy 1e-8 otherwise).
    pub p_inv: Tensor,
    /// Exact dense P and its pseudo-inverse, for weighted inner products.
    pub p_hat_dense: FullTensor,
    pub p_inv_dense: FullTensor,
    /// Truncation applied at the three insertion points of the low-rank
    /// matvec; ignored on the full path.
    pub policy: Option<TruncationPolicy>,
    /// Direction of the unit macroscopic load E.
    pub load: usize,
}

impl OperatorContext {
    pub fn new(
        scheme: Scheme,
        grid: GridSpec,
        spec: &MaterialSpec,
        format: TensorFormat,
        policy: Option<TruncationPolicy>,
    ) -> Result<Self> {
        if format == TensorFormat::Cp && grid.d != 2 {
            return Err(Error::CpHighOrder);
        }
        let material = match scheme {
            Scheme::GaNi => material_gani(spec, &grid, format)?,
            Scheme::Ga => material_ga(spec, &grid, format)?,
        };
        let ik = build_ik(format, &grid)?;
        let p_hat_dense = p_hat(&grid);
        let p_inv_dense = p_inv(&grid);
        let p_inv_repr = if format == TensorFormat::Full {
            Tensor::Full(p_inv_dense.clone())
        } else {
            let tol = PRECOND_APPROX_TOL * p_inv_dense.norm();
            Tensor::decompose(&p_inv_dense, format, &TruncationPolicy::tolerance(tol)?)?
        };
        Ok(OperatorContext {
            scheme,
            grid,
            format,
            material,
            ik,
            p_inv: p_inv_repr,
            p_hat_dense,
            p_inv_dense,
            policy,
            load: 0,
        })
    }

    /// Shape of the nodal stage: N^d for grid quadrature, (2N-1)^d for the
    /// double grid.
    pub fn nodal_shape(&self) -> Vec<usize> {
        match self.scheme {
            Scheme::GaNi => self.grid.shape(),
            Scheme::Ga => self.grid.double_shape(),
        }
    }

    /// Same operator with a different truncation policy; used by the
    /// rank-continuation sweep.
    pub fn with_policy(&self, policy: TruncationPolicy) -> Self {
        let mut ctx = self.clone();
        ctx.policy = Some(policy);
        ctx
    }

    fn truncating(&self) -> Option<&TruncationPolicy> {
        if self.format == TensorFormat::Full {
            None
        } else {
            self.policy.as_ref()
        }
    }
}

/// Diagonal of the Laplacian preconditioner, P[k] = k.k on Z_N.
pub fn p_hat(grid: &GridSpec) -> FullTensor {
    let n = grid.n;
    FullTensor::from_real(&grid.shape(), |idx| {
        idx.iter()
            .map(|&i| {
                let k = grid::freq(n, i) as f64;
                k * k
            })
            .sum()
    })
}

/// Moore-Penrose pseudo-inverse of [`p_hat`]; zero at k = 0, which enforces
/// the zero-mean property.
pub fn p_inv(grid: &GridSpec) -> FullTensor {
    let n = grid.n;
    FullTensor::from_real(&grid.shape(), |idx| {
        let kk: f64 = idx
            .iter()
            .map(|&i| {
                let k = grid::freq(n, i) as f64;
                k * k
            })
            .sum();
        if kk == 0.0 {
            0.0
        } else {
            1.0 / kk
        }
    })
}

/// The d rank-1 frequency multipliers 2 pi i k_alpha on Z_N.
pub fn build_ik(format: TensorFormat, grid: &GridSpec) -> Result<Vec<Tensor>> {
    let ones = Array1::from_elem(grid.n, Complex64::new(1.0, 0.0));
    let k_axis: Array1<Complex64> = Array1::from_shape_fn(grid.n, |i| {
        Complex64::new(0.0, 2.0 * PI * grid::freq(grid.n, i) as f64)
    });
    (0..grid.d)
        .map(|alpha| {
            let vectors: Vec<Array1<Complex64>> = (0..grid.d)
                .map(|j| if j == alpha { k_axis.clone() } else { ones.clone() })
                .collect();
            Tensor::rank_one(format, &vectors)
        })
        .collect()
}

/// Rank-1 delta at the zero frequency, scaled.
fn delta_center(format: TensorFormat, shape: &[usize], scale: Complex64) -> Result<Tensor> {
    let vectors: Vec<Array1<Complex64>> = shape
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let c = (n - 1) / 2;
            Array1::from_shape_fn(n, |i| {
                if i == c {
                    if j == 0 {
                        scale
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    Tensor::rank_one(format, &vectors)
}

fn all_ones(format: TensorFormat, shape: &[usize]) -> Result<Tensor> {
    let vectors: Vec<Array1<Complex64>> = shape
        .iter()
        .map(|&n| Array1::from_elem(n, Complex64::new(1.0, 0.0)))
        .collect();
    Tensor::rank_one(format, &vectors)
}

/// Rejects tensors whose zero-frequency coefficient is not negligible.
pub fn check_zero_mean(t: &Tensor) -> Result<()> {
    let center: Vec<usize> = t.shape().iter().map(|&n| (n - 1) / 2).collect();
    let z0 = t.entry(&center).norm();
    let norm = t.norm();
    if z0 > 1e-12 * norm.max(1e-300) {
        return Err(Error::NotZeroMean(z0));
    }
    Ok(())
}

/// Removes the zero-frequency coefficient exactly: in place for full
/// tensors, by a rank-1 correction otherwise.
pub fn enforce_zero_mean(t: Tensor) -> Result<Tensor> {
    let shape = t.shape();
    let center: Vec<usize> = shape.iter().map(|&n| (n - 1) / 2).collect();
    let z0 = t.entry(&center);
    match t {
        Tensor::Full(mut f) => {
            f.data[ndarray::IxDyn(&center)] = Complex64::new(0.0, 0.0);
            Ok(Tensor::Full(f))
        }
        other => {
            if z0.norm() <= 1e-14 * other.norm().max(1e-300) {
                return Ok(other);
            }
            let delta = delta_center(other.format(), &shape, z0)?;
            Tensor::linear_combine(1.0, &other, -1.0, &delta)
        }
    }
}

/// Element-wise product with a guard against rank explosion: when the exact
/// product representation would be too large and the tensors are small
/// enough to densify, multiply densely and re-compress instead.
pub fn hadamard_truncated(
    v: &Tensor,
    w: &Tensor,
    policy: Option<&TruncationPolicy>,
) -> Result<Tensor> {
    let dense_size: usize = v.shape().iter().product();
    let predicted = predicted_product_params(v, w);
    if v.format() != TensorFormat::Full
        && predicted > HADAMARD_PARAM_CAP
        && dense_size <= DENSE_CAP
    {
        if let Some(policy) = policy {
            let dense = FullTensor {
                data: &v.reconstruct()?.data * &w.reconstruct()?.data,
            };
            return Tensor::decompose(&dense, v.format(), policy);
        }
    }
    let prod = v.hadamard(w)?;
    match policy {
        Some(p) if prod.format() != TensorFormat::Full => prod.truncate(p),
        _ => Ok(prod),
    }
}

fn predicted_product_params(v: &Tensor, w: &Tensor) -> usize {
    let shape = v.shape();
    let rv = v.ranks();
    let rw = w.ranks();
    match v.format() {
        TensorFormat::Full => shape.iter().product(),
        TensorFormat::Cp => shape.iter().map(|n| n * rv[0] * rw[0]).sum(),
        TensorFormat::Tucker => {
            let core: usize = rv.iter().zip(&rw).map(|(a, b)| a * b).product();
            let factors: usize = shape
                .iter()
                .zip(rv.iter().zip(&rw))
                .map(|(n, (a, b))| n * a * b)
                .sum();
            core + factors
        }
        TensorFormat::Tt => {
            let mut bonds = vec![1usize];
            bonds.extend(rv.iter().zip(&rw).map(|(a, b)| a * b));
            bonds.push(1);
            shape
                .iter()
                .enumerate()
                .map(|(j, n)| bonds[j] * n * bonds[j + 1])
                .sum()
        }
    }
}

/// Spectral gradient: component alpha is the Hadamard product with
/// 2 pi i K_alpha; representation ranks are unchanged.
pub fn grad_hat(ctx: &OperatorContext, u_hat: &Tensor) -> Result<Vec<Tensor>> {
    ctx.ik.iter().map(|ik| u_hat.hadamard(ik)).collect()
}

/// Adjoint gradient (negated divergence): sum over components of the
/// Hadamard product with -2 pi i K_alpha; ranks add across the sum.
pub fn div_hat(ctx: &OperatorContext, w_hat: &[Tensor]) -> Result<Tensor> {
    let mut acc: Option<Tensor> = None;
    for (alpha, w) in w_hat.iter().enumerate() {
        let term = w.hadamard(&ctx.ik[alpha])?;
        acc = Some(match acc {
            None => term,
            Some(a) => Tensor::linear_combine(1.0, &a, 1.0, &term)?,
        });
    }
    let mut out = acc.expect("at least one component");
    out.scale(-1.0);
    Ok(out)
}

/// Fourier coefficients on Z_N -> nodal values on the scheme's grid
/// (inject to the double grid first for exact integration).
pub fn to_nodal(ctx: &OperatorContext, hat: &Tensor) -> Result<Tensor> {
    let widened = match ctx.scheme {
        Scheme::GaNi => hat.clone(),
        Scheme::Ga => hat.pad_centered(&ctx.grid.double_shape())?,
    };
    widened.fft_d(FftDirection::Inverse)
}

/// Nodal values -> Fourier coefficients on Z_N (project from the double
/// grid for exact integration).
pub fn to_fourier(ctx: &OperatorContext, nodal: &Tensor) -> Result<Tensor> {
    let hat = nodal.fft_d(FftDirection::Forward)?;
    match ctx.scheme {
        Scheme::GaNi => Ok(hat),
        Scheme::Ga => hat.crop_centered(&ctx.grid.shape()),
    }
}

/// Pointwise material action on a nodal vector field:
/// v_alpha = a .* w_alpha + sum_beta B[alpha, beta] w_beta.
fn material_multiply(ctx: &OperatorContext, w: &[Tensor]) -> Result<Vec<Tensor>> {
    let policy = ctx.truncating();
    let mut out = Vec::with_capacity(w.len());
    for alpha in 0..w.len() {
        let mut v = hadamard_truncated(&ctx.material.scalar, &w[alpha], policy)?;
        if let Some(b) = &ctx.material.b {
            for beta in 0..w.len() {
                let coeff = b[[alpha, beta]];
                if coeff != 0.0 {
                    v = Tensor::linear_combine(1.0, &v, coeff, &w[beta])?;
                }
            }
        }
        if let Some(p) = policy {
            v = v.truncate(p)?;
        }
        out.push(v);
    }
    Ok(out)
}

/// One application of the preconditioned operator
/// C = P^-1 div F A F^-1 grad (with inject/project around the double-grid
/// transforms for exact integration). Truncation is inserted after the
/// material multiply, after the divergence, and after the preconditioner;
/// the full path truncates nowhere.
pub fn apply_operator(ctx: &OperatorContext, u_hat: &Tensor) -> Result<Tensor> {
    check_zero_mean(u_hat)?;
    let g = grad_hat(ctx, u_hat)?;
    let nodal: Vec<Tensor> = g
        .iter()
        .map(|c| to_nodal(ctx, c))
        .collect::<Result<_>>()?;
    let multiplied = material_multiply(ctx, &nodal)?;
    let back: Vec<Tensor> = multiplied
        .iter()
        .map(|c| to_fourier(ctx, c))
        .collect::<Result<_>>()?;
    let mut s = div_hat(ctx, &back)?;
    if let Some(p) = ctx.truncating() {
        s = s.truncate(p)?;
    }
    let mut out = hadamard_truncated(&ctx.p_inv, &s, ctx.truncating())?;
    out = enforce_zero_mean(out)?;
    Ok(out)
}

/// Right-hand side -P^-1 div F A E for the unit load E = e_load.
pub fn build_rhs(ctx: &OperatorContext) -> Result<Tensor> {
    let shape = ctx.nodal_shape();
    let mut nodal = Vec::with_capacity(ctx.grid.d);
    for alpha in 0..ctx.grid.d {
        let mut v = if alpha == ctx.load {
            ctx.material.scalar.clone()
        } else {
            Tensor::zero(ctx.format, &shape)?
        };
        if let Some(b) = &ctx.material.b {
            let coeff = b[[alpha, ctx.load]];
            if coeff != 0.0 {
                let ones = all_ones(ctx.format, &shape)?;
                v = Tensor::linear_combine(1.0, &v, coeff, &ones)?;
            }
        }
        nodal.push(v);
    }
    let back: Vec<Tensor> = nodal
        .iter()
        .map(|c| to_fourier(ctx, c))
        .collect::<Result<_>>()?;
    let mut s = div_hat(ctx, &back)?;
    if let Some(p) = ctx.truncating() {
        s = s.truncate(p)?;
    }
    let mut rhs = hadamard_truncated(&ctx.p_inv, &s, ctx.truncating())?;
    rhs.scale(-1.0);
    rhs = enforce_zero_mean(rhs)?;
    Ok(rhs)
}

/// Fourier coefficients of the corrected field E + grad u, per component.
fn loaded_gradient(ctx: &OperatorContext, u_hat: &Tensor) -> Result<Vec<Tensor>> {
    let mut g = grad_hat(ctx, u_hat)?;
    let delta = delta_center(ctx.format, &ctx.grid.shape(), Complex64::new(1.0, 0.0))?;
    g[ctx.load] = Tensor::linear_combine(1.0, &g[ctx.load], 1.0, &delta)?;
    Ok(g)
}

/// Quadrature weight of the scheme's nodal bilinear form.
fn quadrature_weight(ctx: &OperatorContext) -> f64 {
    let shape = ctx.nodal_shape();
    1.0 / shape.iter().product::<usize>() as f64
}

/// Bilinear form a(e, w) on nodal component fields.
fn bilinear_nodal(ctx: &OperatorContext, e: &[Tensor], w: &[Tensor]) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for alpha in 0..e.len() {
        let ae = hadamard_truncated(&ctx.material.scalar, &e[alpha], None)?;
        acc += ae.inner(&w[alpha])?;
    }
    if let Some(b) = &ctx.material.b {
        for alpha in 0..e.len() {
            for beta in 0..e.len() {
                let coeff = b[[alpha, beta]];
                if coeff != 0.0 {
                    acc += coeff * e[beta].inner(&w[alpha])?;
                }
            }
        }
    }
    Ok(acc * quadrature_weight(ctx))
}

/// Homogenised coefficient A_H[load, load] = a(E + grad u, E + grad u).
pub fn effective_coefficient(ctx: &OperatorContext, u_hat: &Tensor) -> Result<f64> {
    let g = loaded_gradient(ctx, u_hat)?;
    let nodal: Vec<Tensor> = g
        .iter()
        .map(|c| to_nodal(ctx, c))
        .collect::<Result<_>>()?;
    let val = bilinear_nodal(ctx, &nodal, &nodal)?;
    Ok(val.re)
}

/// Energy semi-norm squared of a zero-mean potential difference:
/// a(grad w, grad w).
pub fn energy_seminorm_sq(ctx: &OperatorContext, w_hat: &Tensor) -> Result<f64> {
    let g = grad_hat(ctx, w_hat)?;
    let nodal: Vec<Tensor> = g
        .iter()
        .map(|c| to_nodal(ctx, c))
        .collect::<Result<_>>()?;
    let val = bilinear_nodal(ctx, &nodal, &nodal)?;
    Ok(val.re)
}

/// A-priori bounds on the preconditioned operator's nonzero spectrum:
/// [4 pi^2 c_A, 4 pi^2 C_A].
pub fn spectrum_bounds(ctx: &OperatorContext) -> (f64, f64) {
    let s = 4.0 * PI * PI;
    (s * ctx.material.c_a, s * ctx.material.big_c_a)
}
