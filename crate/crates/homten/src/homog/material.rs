//! Material coefficient fields A(x) = a(x) I + B and their two
//! discretisations: nodal samples on the N^d grid (numerical integration)
//! and exactly integrated coefficients on the double grid (2N-1)^d.

use ndarray::{Array1, Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::homog::grid::{self, GridSpec};
use crate::la::FftDirection;
use crate::tensors::{FullTensor, Tensor, TensorFormat, TruncationPolicy, DENSE_CAP};

/// Rank used for low-rank approximations of the stochastic material.
pub const STOCHASTIC_RANK: usize = 10;
/// Square-inclusion edge: the indicator is 1 where every coordinate < 0.3.
pub const INCLUSION_EDGE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaterialKind {
    /// Homogeneous A = value * I; exactness check material.
    Constant { value: f64 },
    /// Square/cube inclusion A = I (1 + contrast * indicator).
    Square { contrast: f64 },
    /// One sample of a truncated Karhunen-Loeve expansion, exponentiated.
    Stochastic { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    pub kind: MaterialKind,
    /// Adds the fixed constant anisotropic matrix B.
    pub anisotropic: bool,
}

impl MaterialSpec {
    pub fn square(contrast: f64) -> Self {
        MaterialSpec {
            kind: MaterialKind::Square { contrast },
            anisotropic: false,
        }
    }

    pub fn stochastic(seed: u64) -> Self {
        MaterialSpec {
            kind: MaterialKind::Stochastic { seed },
            anisotropic: false,
        }
    }

    pub fn constant(value: f64) -> Self {
        MaterialSpec {
            kind: MaterialKind::Constant { value },
            anisotropic: false,
        }
    }

    pub fn with_anisotropy(mut self) -> Self {
        self.anisotropic = true;
        self
    }

    /// The constant anisotropic addition; eigenvalues (1, 10) in 2D and
    /// (1, 5, 10) in 3D.
    pub fn b_matrix(&self, d: usize) -> Option<Array2<f64>> {
        if !self.anisotropic {
            return None;
        }
        let s = 1.25 * 2.0_f64.sqrt();
        Some(match d {
            2 => Array2::from_shape_vec((2, 2), vec![5.5, -4.5, -4.5, 5.5]).unwrap(),
            _ => Array2::from_shape_vec(
                (3, 3),
                vec![4.25, -3.25, -s, -3.25, 4.25, s, -s, s, 7.5],
            )
            .unwrap(),
        })
    }
}

/// One discretised material: a scalar nodal field (on N^d for numerical
/// integration, (2N-1)^d for exact integration) plus the optional constant
/// matrix part.
#[derive(Debug, Clone)]
pub struct MaterialField {
    pub scalar: Tensor,
    pub b: Option<Array2<f64>>,
    /// Pointwise eigenvalue bounds (c_A, C_A) of the full matrix field.
    pub c_a: f64,
    pub big_c_a: f64,
    /// True when the coefficients came from oversampled quadrature rather
    /// than closed-form integration.
    pub approximate_integration: bool,
}

fn eig_range(b: &Array2<f64>) -> (f64, f64) {
    let d = b.nrows();
    let m = nalgebra::DMatrix::from_fn(d, d, |i, j| b[[i, j]]);
    let eig = m.symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in eig.eigenvalues.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    (lo, hi)
}

fn with_b(spec: &MaterialSpec, d: usize, c_a: f64, big_c_a: f64) -> (Option<Array2<f64>>, f64, f64) {
    match spec.b_matrix(d) {
        Some(b) => {
            let (lo, hi) = eig_range(&b);
            (Some(b), c_a + lo, big_c_a + hi)
        }
        None => (None, c_a, big_c_a),
    }
}

fn ones(n: usize) -> Array1<Complex64> {
    Array1::from_elem(n, Complex64::new(1.0, 0.0))
}

/// Nodal samples a(x_N^k) on the N^d grid, in the requested storage format.
pub fn material_gani(
    spec: &MaterialSpec,
    grid: &GridSpec,
    format: TensorFormat,
) -> Result<MaterialField> {
    let shape = grid.shape();
    let (scalar, c_a, big_c_a) = match spec.kind {
        MaterialKind::Constant { value } => {
            let vectors: Vec<Array1<Complex64>> = (0..grid.d).map(|_| ones(grid.n)).collect();
            let terms = vec![(value, vectors)];
            (Tensor::separable_sum(format, &terms)?, value, value)
        }
        MaterialKind::Square { contrast } => {
            // 1 + rho * prod_j 1[x_j < 0.3]: rank 2 separable
            let indicator: Array1<Complex64> = Array1::from_iter(
                grid::points(grid.n)
                    .into_iter()
                    .map(|x| Complex64::new(if x < INCLUSION_EDGE { 1.0 } else { 0.0 }, 0.0)),
            );
            let terms = vec![
                (1.0, (0..grid.d).map(|_| ones(grid.n)).collect::<Vec<_>>()),
                (contrast, vec![indicator; grid.d]),
            ];
            (Tensor::separable_sum(format, &terms)?, 1.0, 1.0 + contrast)
        }
        MaterialKind::Stochastic { seed } => {
            let field = stochastic_field(seed, grid.d, grid.n)?;
            let t = if format == TensorFormat::Full {
                Tensor::Full(field)
            } else {
                Tensor::decompose(&field, format, &TruncationPolicy::fixed_rank(STOCHASTIC_RANK)?)?
            };
            (t, 1.0, 10.0)
        }
    };
    debug_assert_eq!(scalar.shape(), shape);
    let (b, c_a, big_c_a) = with_b(spec, grid.d, c_a, big_c_a);
    Ok(MaterialField {
        scalar,
        b,
        c_a,
        big_c_a,
        approximate_integration: false,
    })
}

/// Exactly integrated coefficients, stored as nodal values on the double
/// grid: the inverse transform of the Fourier coefficients of `a` restricted
/// to Z_{2N-1}. A homogeneous material a = c then stores the nodal value c.
pub fn material_ga(
    spec: &MaterialSpec,
    grid: &GridSpec,
    format: TensorFormat,
) -> Result<MaterialField> {
    let m = grid.double_n();
    let mut approximate = false;
    let (scalar, c_a, big_c_a) = match spec.kind {
        MaterialKind::Constant { value } => {
            let vectors: Vec<Array1<Complex64>> = (0..grid.d).map(|_| ones(m)).collect();
            let terms = vec![(value, vectors)];
            (Tensor::separable_sum(format, &terms)?, value, value)
        }
        MaterialKind::Square { contrast } => {
            // Fourier coefficients are products of closed-form 1-D integrals
            // over [-1/2, 0.3]; assembled on Z_{2N-1}, then one inverse FFT
            let delta: Array1<Complex64> = Array1::from_shape_fn(m, |i| {
                if grid::freq(m, i) == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let segment: Array1<Complex64> =
                Array1::from_shape_fn(m, |i| indicator_coefficient(grid::freq(m, i)));
            let terms = vec![
                (1.0, vec![delta; grid.d]),
                (contrast, vec![segment; grid.d]),
            ];
            let hat = Tensor::separable_sum(format, &terms)?;
            (hat.fft_d(FftDirection::Inverse)?, 1.0, 1.0 + contrast)
        }
        MaterialKind::Stochastic { seed } => {
            // no closed form: oversampled-FFT quadrature of the Fourier
            // coefficients, flagged as approximate
            approximate = true;
            let field = ga_stochastic_nodal(seed, grid)?;
            let t = if format == TensorFormat::Full {
                Tensor::Full(field)
            } else {
                Tensor::decompose(&field, format, &TruncationPolicy::fixed_rank(STOCHASTIC_RANK)?)?
            };
            (t, 1.0, 10.0)
        }
    };
    debug_assert_eq!(scalar.shape(), grid.double_shape());
    let (b, c_a, big_c_a) = with_b(spec, grid.d, c_a, big_c_a);
    Ok(MaterialField {
        scalar,
        b,
        c_a,
        big_c_a,
        approximate_integration: approximate,
    })
}

/// 1-D Fourier coefficient of the inclusion indicator:
/// integral of e^{-2 pi i q x} over [-1/2, 0.3].
pub fn indicator_coefficient(q: i64) -> Complex64 {
    if q == 0 {
        return Complex64::new(0.5 + INCLUSION_EDGE, 0.0);
    }
    let two_pi_q = 2.0 * PI * q as f64;
    let at = |x: f64| Complex64::new(0.0, -two_pi_q * x).exp();
    (at(-0.5) - at(INCLUSION_EDGE)) / Complex64::new(0.0, two_pi_q)
}

/// Lowest-|k| nonzero frequency set of the expansion: 20 modes in 2D,
/// 26 in 3D, whole symmetric shells, ties broken lexicographically.
pub fn kl_modes(d: usize) -> Vec<Vec<i64>> {
    let count = if d == 2 { 20 } else { 26 };
    let range = -3i64..=3;
    let mut modes: Vec<Vec<i64>> = Vec::new();
    if d == 2 {
        for a in range.clone() {
            for b in range.clone() {
                modes.push(vec![a, b]);
            }
        }
    } else {
        for a in range.clone() {
            for b in range.clone() {
                for c in range.clone() {
                    modes.push(vec![a, b, c]);
                }
            }
        }
    }
    modes.retain(|k| k.iter().any(|&c| c != 0));
    modes.sort_by_key(|k| (k.iter().map(|&c| c * c).sum::<i64>(), k.clone()));
    modes.truncate(count);
    modes
}

/// Symmetric coefficients c[k] = c[-k] ~ uniform[-0.5, 0.5], one draw per
/// frequency pair, in deterministic mode order.
pub fn kl_coefficients(d: usize, seed: u64) -> Vec<(Vec<i64>, f64)> {
    let modes = kl_modes(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut out = Vec::with_capacity(modes.len());
    for k in modes {
        let c = if let Some(&c) = assigned.get(&k) {
            c
        } else {
            let c = rng.gen_range(-0.5..0.5);
            let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
            assigned.insert(neg, c);
            assigned.insert(k.clone(), c);
            c
        };
        out.push((k, c));
    }
    out
}

/// Unscaled expansion exponent sum_k c[k] e^{2 pi i k.x} (real by symmetry)
/// at a point.
fn kl_exponent(coeffs: &[(Vec<i64>, f64)], x: &[f64]) -> f64 {
    coeffs
        .iter()
        .map(|(k, c)| {
            let phase: f64 = k
                .iter()
                .zip(x)
                .map(|(&ki, &xi)| ki as f64 * xi)
                .sum::<f64>();
            c * (2.0 * PI * phase).cos()
        })
        .sum()
}

/// Dense nodal samples of the stochastic field on an n^d grid, scaled so the
/// grid min is 1 and the grid max is 10 exactly.
pub fn stochastic_field(seed: u64, d: usize, n: usize) -> Result<FullTensor> {
    if n.pow(d as u32) > DENSE_CAP {
        return Err(Error::DenseCap(n.pow(d as u32), DENSE_CAP));
    }
    let coeffs = kl_coefficients(d, seed);
    let axis = grid::points(n);
    let raw = ArrayD::from_shape_fn(IxDyn(&vec![n; d]), |idx| {
        let x: Vec<f64> = (0..d).map(|j| axis[idx[j]]).collect();
        kl_exponent(&coeffs, &x)
    });
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &g in raw.iter() {
        lo = lo.min(g);
        hi = hi.max(g);
    }
    // exp(c + d_scale * g) spans [1, 10] on the grid
    let d_scale = 10.0_f64.ln() / (hi - lo);
    let c_shift = -d_scale * lo;
    Ok(FullTensor {
        data: raw.mapv(|g| Complex64::new((c_shift + d_scale * g).exp(), 0.0)),
    })
}

/// Cap on the oversampling axis length for the quadrature route.
pub const OVERSAMPLING_AXIS_CAP: usize = 4097;

/// Double-grid nodal coefficients of the stochastic material by FFT
/// quadrature on an oversampled grid of >= 4N-2 points per axis.
fn ga_stochastic_nodal(seed: u64, grid: &GridSpec) -> Result<FullTensor> {
    let mut l = 4 * grid.n - 2 + 1; // smallest odd value >= 4N-2
    if l % 2 == 0 {
        l += 1;
    }
    if l > OVERSAMPLING_AXIS_CAP || l.pow(grid.d as u32) > DENSE_CAP {
        return Err(Error::OversamplingCap(l, OVERSAMPLING_AXIS_CAP));
    }
    let mut fine = stochastic_field(seed, grid.d, l)?;
    fine.fft_d_inplace(FftDirection::Forward)?;
    let mut hat = fine.crop_centered(&grid.double_shape())?;
    hat.fft_d_inplace(FftDirection::Inverse)?;
    Ok(hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::TensorFormat;

    #[test]
    fn square_gani_samples_inclusion_values() {
        let g = GridSpec::new(2, 5).unwrap();
        let field = material_gani(&MaterialSpec::square(10.0), &g, TensorFormat::Full).unwrap();
        // centered index 2 is the origin (inside), index 4 is x = 0.4 (outside)
        assert!((field.scalar.entry(&[2, 2]) - Complex64::new(11.0, 0.0)).norm() < 1e-14);
        assert!((field.scalar.entry(&[4, 4]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((field.scalar.entry(&[2, 4]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(field.c_a, 1.0);
        assert_eq!(field.big_c_a, 11.0);
    }

    #[test]
    fn square_field_is_rank_two_in_every_format() {
        let g2 = GridSpec::new(2, 9).unwrap();
        let g3 = GridSpec::new(3, 5).unwrap();
        for (g, fmts) in [
            (g2, vec![TensorFormat::Cp, TensorFormat::Tucker, TensorFormat::Tt]),
            (g3, vec![TensorFormat::Tucker, TensorFormat::Tt]),
        ] {
            for fmt in fmts {
                let f = material_gani(&MaterialSpec::square(10.0), &g, fmt).unwrap();
                assert_eq!(f.scalar.max_rank(), 2);
                let fga = material_ga(&MaterialSpec::square(10.0), &g, fmt).unwrap();
                assert_eq!(fga.scalar.max_rank(), 2);
            }
        }
    }

    #[test]
    fn kl_mode_counts_and_symmetry() {
        let m2 = kl_modes(2);
        let m3 = kl_modes(3);
        assert_eq!(m2.len(), 20);
        assert_eq!(m3.len(), 26);
        for modes in [&m2, &m3] {
            for k in modes.iter() {
                let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
                assert!(modes.contains(&neg), "shells must be symmetric: {k:?}");
            }
        }
        // 2D shells |k|^2 in {1, 2, 4, 5}; 3D shells {1, 2, 3}
        let norms2: Vec<i64> = m2.iter().map(|k| k.iter().map(|&c| c * c).sum()).collect();
        assert!(norms2.iter().all(|n| [1, 2, 4, 5].contains(n)));
        let norms3: Vec<i64> = m3.iter().map(|k| k.iter().map(|&c| c * c).sum()).collect();
        assert!(norms3.iter().all(|n| [1, 2, 3].contains(n)));
    }

    #[test]
    fn kl_coefficients_are_symmetric_and_deterministic() {
        for d in [2, 3] {
            let a = kl_coefficients(d, 42);
            let b = kl_coefficients(d, 42);
            assert_eq!(a, b);
            let map: HashMap<Vec<i64>, f64> = a.iter().cloned().collect();
            for (k, c) in &a {
                let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
                assert_eq!(map[&neg], *c);
                assert!((-0.5..0.5).contains(c));
            }
            let distinct = kl_coefficients(d, 43);
            assert_ne!(a, distinct);
        }
    }

    #[test]
    fn stochastic_field_spans_one_to_ten() {
        for (d, n) in [(2, 15), (3, 5)] {
            let g = GridSpec::new(d, n).unwrap();
            let f = material_gani(&MaterialSpec::stochastic(7), &g, TensorFormat::Full).unwrap();
            let full = f.scalar.reconstruct().unwrap();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for z in full.data.iter() {
                assert!(z.im.abs() < 1e-12);
                lo = lo.min(z.re);
                hi = hi.max(z.re);
            }
            assert!(lo >= 1.0 * (1.0 - 1e-9) && lo <= 1.0 * (1.0 + 1e-9));
            assert!(hi >= 10.0 * (1.0 - 1e-9) && hi <= 10.0 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn stochastic_lowrank_stays_close_to_dense() {
        let g = GridSpec::new(2, 15).unwrap();
        let dense = material_gani(&MaterialSpec::stochastic(7), &g, TensorFormat::Full).unwrap();
        for fmt in [TensorFormat::Cp, TensorFormat::Tucker, TensorFormat::Tt] {
            let lr = material_gani(&MaterialSpec::stochastic(7), &g, fmt).unwrap();
            assert!(lr.scalar.max_rank() <= STOCHASTIC_RANK);
            let a = lr.scalar.reconstruct().unwrap();
            let b = dense.scalar.reconstruct().unwrap();
            let err: f64 = a
                .data
                .iter()
                .zip(b.data.iter())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            // the exponential field is not exactly low-rank; rank 10 is an
            // approximation, so only a modest relative accuracy is expected
            assert!(err < 1e-3 * b.norm(), "format {} err {err}", fmt.name());
        }
    }

    #[test]
    fn ga_constant_material_is_nodally_constant() {
        let g = GridSpec::new(2, 5).unwrap();
        let f = material_ga(&MaterialSpec::constant(3.5), &g, TensorFormat::Full).unwrap();
        let full = f.scalar.reconstruct().unwrap();
        for z in full.data.iter() {
            assert!((z - Complex64::new(3.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ga_square_fourier_coefficients_match_closed_form() {
        let g = GridSpec::new(2, 5).unwrap();
        let f = material_ga(&MaterialSpec::square(10.0), &g, TensorFormat::Full).unwrap();
        let mut hat = f.scalar.reconstruct().unwrap();
        hat.fft_d_inplace(FftDirection::Forward).unwrap();
        let m = g.double_n();
        let c = (m - 1) / 2;
        // k = 0: mean value 1 + 10 * 0.8^2
        let mean = hat.data[IxDyn(&[c, c])];
        assert!((mean - Complex64::new(1.0 + 10.0 * 0.64, 0.0)).norm() < 1e-12);
        // k = (1, 0): rho * I1(1) * I1(0)
        let expect = 10.0 * indicator_coefficient(1) * indicator_coefficient(0);
        assert!((hat.data[IxDyn(&[c + 1, c])] - expect).norm() < 1e-12);
        // cross-check the closed form against fine-grid quadrature
        let q = 1i64;
        let steps = 200_000;
        let h = (INCLUSION_EDGE - (-0.5)) / steps as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..steps {
            let x = -0.5 + (i as f64 + 0.5) * h;
            acc += Complex64::new(0.0, -2.0 * PI * q as f64 * x).exp() * h;
        }
        assert!((acc - indicator_coefficient(q)).norm() < 1e-9);
    }

    #[test]
    fn ga_stochastic_is_flagged_approximate_and_real() {
        let g = GridSpec::new(2, 5).unwrap();
        let f = material_ga(&MaterialSpec::stochastic(7), &g, TensorFormat::Full).unwrap();
        assert!(f.approximate_integration);
        let full = f.scalar.reconstruct().unwrap();
        let norm = full.norm();
        let imag: f64 = full.data.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        assert!(imag < 1e-10 * norm);
    }

    #[test]
    fn anisotropic_bounds_widen_by_b_eigenvalues() {
        let spec2 = MaterialSpec::square(10.0).with_anisotropy();
        let b2 = spec2.b_matrix(2).unwrap();
        let (lo2, hi2) = eig_range(&b2);
        assert!((lo2 - 1.0).abs() < 1e-12 && (hi2 - 10.0).abs() < 1e-12);
        let b3 = spec2.b_matrix(3).unwrap();
        let (lo3, hi3) = eig_range(&b3);
        assert!((lo3 - 1.0).abs() < 1e-10 && (hi3 - 10.0).abs() < 1e-10);
        let g = GridSpec::new(2, 5).unwrap();
        let f = material_gani(&spec2, &g, TensorFormat::Full).unwrap();
        assert!((f.c_a - 2.0).abs() < 1e-12);
        assert!((f.big_c_a - 21.0).abs() < 1e-12);
    }
}
