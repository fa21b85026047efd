//! End-to-end acceptance suite. Each test prints one PASS/FAIL line for
//! its criterion; the oracles here (dense assembly, direct solves, direct
//! quadrature) are written independently of the library internals.

use nalgebra::{DMatrix, DVector};
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::AssertUnwindSafe;
use std::time::Instant;

use homten::homog::grid::{freq, point};
use homten::homog::material::material_gani;
use homten::homog::operator::{
    build_rhs, effective_coefficient, energy_seminorm_sq, spectrum_bounds, OperatorContext,
};
use homten::homog::{GridSpec, MaterialSpec, Scheme};
use homten::la::FftDirection;
use homten::solvers::{
    minres_truncated, pcg_full, rank_continuation, ContinuationTarget, SolverConfig,
};
use homten::tensors::full::FullTensor;
use homten::tensors::{Tensor, TensorFormat, TruncationPolicy};

fn criterion<F: FnOnce()>(num: u32, name: &str, f: F) {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => println!("criterion {num:2} ({name}): PASS [{elapsed:.2}s]"),
        Err(e) => {
            println!("criterion {num:2} ({name}): FAIL [{elapsed:.2}s]");
            std::panic::resume_unwind(e);
        }
    }
}

fn all_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in shape {
        let mut next = Vec::with_capacity(out.len() * n);
        for idx in &out {
            for i in 0..n {
                let mut e = idx.clone();
                e.push(i);
                next.push(e);
            }
        }
        out = next;
    }
    out
}

fn freq_of(n: usize, idx: &[usize]) -> Vec<i64> {
    idx.iter().map(|&i| freq(n, i)).collect()
}

/// Closed-form segment integral over the inclusion edge:
/// I1(q) = integral of exp(-2 pi i q x) over [-1/2, 0.3].
fn segment_integral(q: i64) -> Complex64 {
    if q == 0 {
        return Complex64::new(0.8, 0.0);
    }
    let qf = q as f64;
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    let upper = Complex64::new(0.0, -0.6 * PI * qf).exp();
    (Complex64::new(sign, 0.0) - upper) / Complex64::new(0.0, 2.0 * PI * qf)
}

/// Exact Fourier coefficients of the square-inclusion coefficient field.
fn square_scalar_exact(contrast: f64, q: &[i64]) -> Complex64 {
    let mut prod = Complex64::new(contrast, 0.0);
    for &qj in q {
        prod *= segment_integral(qj);
    }
    if q.iter().all(|&c| c == 0) {
        prod += 1.0;
    }
    prod
}

/// Trapezoid-free nodal quadrature of the scalar transform:
/// s_N[q] = (1/N^d) sum_k a(x_k) exp(-2 pi i q . x_k).
fn gani_scalar(samples: &ArrayD<Complex64>, n: usize, q: &[i64]) -> Complex64 {
    let shape: Vec<usize> = samples.shape().to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in all_indices(&shape) {
        let phase: f64 = idx
            .iter()
            .zip(q)
            .map(|(&i, &qj)| qj as f64 * point(n, i))
            .sum();
        acc += samples[IxDyn(&idx)] * Complex64::new(0.0, -2.0 * PI * phase).exp();
    }
    acc / shape.iter().product::<usize>() as f64
}

/// Brute-force assembly of the preconditioned system and a direct solve,
/// returning the homogenised coefficient computed from the dense solution
/// by the bilinear form in Fourier variables.
fn dense_reference<F: Fn(&[i64]) -> Complex64>(
    d: usize,
    n: usize,
    scalar: F,
    b: Option<&ndarray::Array2<f64>>,
    load: usize,
) -> f64 {
    let shape = vec![n; d];
    let center = vec![(n - 1) / 2; d];
    let idxs: Vec<Vec<usize>> = all_indices(&shape)
        .into_iter()
        .filter(|i| *i != center)
        .collect();
    let m = idxs.len();
    let four_pi_sq = 4.0 * PI * PI;
    let mut mat = DMatrix::<Complex64>::zeros(m, m);
    let mut rhs = DVector::<Complex64>::zeros(m);
    for (row, li) in idxs.iter().enumerate() {
        let l = freq_of(n, li);
        let ll: f64 = l.iter().map(|&a| (a * a) as f64).sum();
        let pinv = 1.0 / ll;
        for (col, mi) in idxs.iter().enumerate() {
            let mm = freq_of(n, mi);
            let ml: f64 = mm.iter().zip(&l).map(|(&a, &b)| (a * b) as f64).sum();
            let q: Vec<i64> = l.iter().zip(&mm).map(|(&a, &b)| a - b).collect();
            let mut val = scalar(&q) * ml;
            if let (Some(b), true) = (b, l == mm) {
                let bm_l: f64 = (0..d)
                    .map(|alpha| {
                        (0..d)
                            .map(|beta| b[[alpha, beta]] * mm[beta] as f64)
                            .sum::<f64>()
                            * l[alpha] as f64
                    })
                    .sum();
                val += bm_l;
            }
            mat[(row, col)] = val * four_pi_sq * pinv;
        }
        // right-hand side of a(grad u, grad v) = -a(E, grad v)
        rhs[row] = scalar(&l) * Complex64::new(0.0, 2.0 * PI * l[load] as f64) * pinv;
    }
    let u = mat.lu().solve(&rhs).expect("regular on the zero-mean space");

    // loaded gradient in Fourier variables: g_a[q] = delta(a, load) delta(q)
    // + 2 pi i q_a u[q]
    let grad = |alpha: usize, qi: &Vec<usize>| -> Complex64 {
        let q = freq_of(n, qi);
        let mut g = if *qi == center && alpha == load {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        if let Some(pos) = idxs.iter().position(|x| x == qi) {
            g += Complex64::new(0.0, 2.0 * PI * q[alpha] as f64) * u[pos];
        }
        g
    };
    // energy by the exact bilinear form: sum over coefficient pairs with the
    // scalar transform evaluated at the frequency difference
    let full_idx = all_indices(&shape);
    let mut acc = Complex64::new(0.0, 0.0);
    for qi in &full_idx {
        let q = freq_of(n, qi);
        for pi in &full_idx {
            let p = freq_of(n, pi);
            let diff: Vec<i64> = q.iter().zip(&p).map(|(&a, &b)| a - b).collect();
            let s = scalar(&diff);
            for alpha in 0..d {
                acc += grad(alpha, pi) * grad(alpha, qi).conj() * s;
            }
        }
        if let Some(b) = b {
            for alpha in 0..d {
                for beta in 0..d {
                    acc += b[[alpha, beta]] * grad(beta, qi) * grad(alpha, qi).conj();
                }
            }
        }
    }
    acc.re
}

fn solve_full(scheme: Scheme, d: usize, n: usize, spec: &MaterialSpec, tol: f64) -> (Tensor, f64) {
    let grid = GridSpec::new(d, n).unwrap();
    let ctx = OperatorContext::new(scheme, grid, spec, TensorFormat::Full, None).unwrap();
    let rhs = build_rhs(&ctx).unwrap();
    let cfg = SolverConfig::new(2000, tol).unwrap();
    let (u, report) = pcg_full(&ctx, &rhs, &cfg).unwrap();
    assert!(report.converged || rhs.norm() == 0.0);
    (u, report.a_eff)
}

// -------------------------------------------------------------------------

#[test]
fn criterion_01_homogeneous_exactness() {
    criterion(1, "homogeneous exactness", || {
        let c = 2.5;
        for scheme in [Scheme::GaNi, Scheme::Ga] {
            for d in [2usize, 3] {
                for n in [5usize, 15] {
                    let (_, a_eff) = solve_full(scheme, d, n, &MaterialSpec::constant(c), 1e-13);
                    assert!(
                        (a_eff - c).abs() <= 1e-12,
                        "scheme {} d={d} N={n}: a_eff {a_eff}",
                        scheme.name()
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_02_dense_oracle_equivalence() {
    criterion(2, "dense-oracle equivalence", || {
        let rho = 10.0;
        // square inclusion, exact integration, d = 2 and 3
        for d in [2usize, 3] {
            let oracle = dense_reference(d, 5, |q| square_scalar_exact(rho, q), None, 0);
            let (_, a_eff) = solve_full(Scheme::Ga, d, 5, &MaterialSpec::square(rho), 1e-10);
            assert!(
                (a_eff - oracle).abs() <= 1e-8 * oracle.abs(),
                "ga square d={d}: {a_eff} vs oracle {oracle}"
            );
        }
        // square inclusion with grid quadrature, scalar transform from
        // independently generated nodal samples
        for d in [2usize, 3] {
            let n = 5;
            let samples = ArrayD::from_shape_fn(IxDyn(&vec![n; d]), |idx| {
                let inside = (0..d).all(|j| point(n, idx[j]) < 0.3);
                Complex64::new(if inside { 1.0 + rho } else { 1.0 }, 0.0)
            });
            let oracle = dense_reference(d, n, |q| gani_scalar(&samples, n, q), None, 0);
            let (_, a_eff) = solve_full(Scheme::GaNi, d, n, &MaterialSpec::square(rho), 1e-10);
            assert!(
                (a_eff - oracle).abs() <= 1e-8 * oracle.abs(),
                "gani square d={d}: {a_eff} vs oracle {oracle}"
            );
        }
        // anisotropic square, d = 2
        let spec = MaterialSpec::square(rho).with_anisotropy();
        let b = spec.b_matrix(2).unwrap();
        let oracle = dense_reference(2, 5, |q| square_scalar_exact(rho, q), Some(&b), 0);
        let (_, a_eff) = solve_full(Scheme::Ga, 2, 5, &spec, 1e-10);
        assert!(
            (a_eff - oracle).abs() <= 1e-8 * oracle.abs(),
            "ga anisotropic: {a_eff} vs oracle {oracle}"
        );
        // stochastic material with grid quadrature: nodal samples taken from
        // the material model, everything downstream assembled independently
        let spec = MaterialSpec::stochastic(11);
        let grid = GridSpec::new(2, 5).unwrap();
        let field = material_gani(&spec, &grid, TensorFormat::Full).unwrap();
        let samples = field.scalar.reconstruct().unwrap().data;
        let oracle = dense_reference(2, 5, |q| gani_scalar(&samples, 5, q), None, 0);
        let (_, a_eff) = solve_full(Scheme::GaNi, 2, 5, &spec, 1e-10);
        assert!(
            (a_eff - oracle).abs() <= 1e-8 * oracle.abs(),
            "gani stochastic: {a_eff} vs oracle {oracle}"
        );
    });
}

#[test]
fn criterion_03_lowrank_full_agreement() {
    criterion(3, "low-rank/full agreement at high rank", || {
        let spec = MaterialSpec::square(10.0);
        let (_, full_2d) = solve_full(Scheme::GaNi, 2, 15, &spec, 1e-11);
        for format in [TensorFormat::Cp, TensorFormat::Tucker, TensorFormat::Tt] {
            let grid = GridSpec::new(2, 15).unwrap();
            let ctx = OperatorContext::new(
                Scheme::GaNi,
                grid,
                &spec,
                format,
                Some(TruncationPolicy::fixed_rank(25).unwrap()),
            )
            .unwrap();
            let rhs = build_rhs(&ctx).unwrap();
            let cfg = SolverConfig::new(500, 1e-9 * rhs.norm())
                .unwrap()
                .with_stagnation_window(30);
            let (_, report) = minres_truncated(&ctx, &rhs, &cfg).unwrap();
            assert!(
                (report.a_eff - full_2d).abs() <= 1e-6 * full_2d,
                "{} d=2: {} vs {}",
                format.name(),
                report.a_eff,
                full_2d
            );
        }
        let (_, full_3d) = solve_full(Scheme::GaNi, 3, 15, &spec, 1e-11);
        for format in [TensorFormat::Tucker, TensorFormat::Tt] {
            let grid = GridSpec::new(3, 15).unwrap();
            let ctx = OperatorContext::new(
                Scheme::GaNi,
                grid,
                &spec,
                format,
                Some(TruncationPolicy::fixed_rank(25).unwrap()),
            )
            .unwrap();
            let rhs = build_rhs(&ctx).unwrap();
            let cfg = SolverConfig::new(500, 1e-9 * rhs.norm())
                .unwrap()
                .with_stagnation_window(30);
            let (_, report) = minres_truncated(&ctx, &rhs, &cfg).unwrap();
            assert!(
                (report.a_eff - full_3d).abs() <= 1e-6 * full_3d,
                "{} d=3: {} vs {}",
                format.name(),
                report.a_eff,
                full_3d
            );
        }
    });
}

fn random_lowrank(
    rng: &mut ChaCha8Rng,
    format: TensorFormat,
    shape: &[usize],
    rank: usize,
) -> Tensor {
    let terms: Vec<(f64, Vec<ndarray::Array1<Complex64>>)> = (0..rank)
        .map(|_| {
            let vectors = shape
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| {
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect();
            (1.0, vectors)
        })
        .collect();
    Tensor::separable_sum(format, &terms).unwrap()
}

fn dense_of(t: &Tensor) -> ArrayD<Complex64> {
    t.reconstruct().unwrap().data
}

fn dense_err(a: &ArrayD<Complex64>, b: &ArrayD<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dense_norm(a: &ArrayD<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn criterion_04_format_operation_oracles() {
    criterion(4, "format-operation oracle suite", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let formats = [TensorFormat::Cp, TensorFormat::Tucker, TensorFormat::Tt];
        for case in 0..100 {
            let d = if rng.gen_bool(0.5) { 2 } else { 3 };
            let n = [3usize, 5, 7, 9][rng.gen_range(0..4)];
            let shape = vec![n; d];
            let format = loop {
                let f = formats[rng.gen_range(0..3)];
                if f != TensorFormat::Cp || d == 2 {
                    break f;
                }
            };
            let ra = rng.gen_range(1..=3usize);
            let rb = rng.gen_range(1..=3usize);
            let a = random_lowrank(&mut rng, format, &shape, ra);
            let b = random_lowrank(&mut rng, format, &shape, rb);
            let da = dense_of(&a);
            let db = dense_of(&b);
            let scale = dense_norm(&da).max(dense_norm(&db));

            // linear combination
            let lc = Tensor::linear_combine(1.25, &a, -0.5, &b).unwrap();
            let want = da.mapv(|z| z * 1.25) - db.mapv(|z| z * 0.5);
            assert!(
                dense_err(&dense_of(&lc), &want) <= 1e-11 * scale,
                "case {case}: linear_combine"
            );

            // element-wise product, with the exact rank-product postcondition
            let hp = a.hadamard(&b).unwrap();
            let want = &da * &db;
            assert!(
                dense_err(&dense_of(&hp), &want) <= 1e-11 * scale * scale,
                "case {case}: hadamard"
            );
            let ranks_a = a.ranks();
            let ranks_b = b.ranks();
            let got = hp.ranks();
            for ((&g, &x), &y) in got.iter().zip(&ranks_a).zip(&ranks_b) {
                assert_eq!(g, x * y, "case {case}: hadamard rank product");
            }

            // Fourier transform commutes with reconstruction and keeps ranks
            let hat = a.fft_d(FftDirection::Forward).unwrap();
            assert_eq!(hat.ranks(), ranks_a, "case {case}: fft rank invariance");
            let mut want = FullTensor { data: da.clone() };
            want.fft_d_inplace(FftDirection::Forward).unwrap();
            assert!(
                dense_err(&dense_of(&hat), &want.data) <= 1e-11 * scale,
                "case {case}: fft"
            );

            // inner product
            let got = a.inner(&b).unwrap();
            let want: Complex64 = da.iter().zip(db.iter()).map(|(x, y)| x * y.conj()).sum();
            assert!(
                (got - want).norm() <= 1e-11 * scale * scale,
                "case {case}: inner"
            );

            // truncation at the representation rank is lossless
            let max_rank = a.max_rank();
            let t = a
                .truncate(&TruncationPolicy::fixed_rank(max_rank).unwrap())
                .unwrap();
            assert!(
                dense_err(&dense_of(&t), &da) <= 1e-11 * scale,
                "case {case}: lossless truncate"
            );
        }
    });
}

#[test]
fn criterion_05_truncation_bounds() {
    criterion(5, "truncation bounds from discarded singular values", || {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for case in 0..50 {
            let data = ArrayD::from_shape_fn(IxDyn(&[6, 6, 6]), |_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let dense = FullTensor { data: data.clone() };
            let rank = rng.gen_range(1..=5usize);
            for format in [TensorFormat::Tucker, TensorFormat::Tt] {
                let exact = Tensor::decompose(&dense, format, &TruncationPolicy::exact()).unwrap();
                let (t, info) = exact
                    .truncate_with_info(&TruncationPolicy::fixed_rank(rank).unwrap())
                    .unwrap();
                let actual = dense_err(&dense_of(&t), &data);
                assert!(
                    actual <= info.bound * (1.0 + 1e-9) + 1e-12 * dense_norm(&data),
                    "case {case} {} rank {rank}: actual {actual} > bound {}",
                    format.name(),
                    info.bound
                );
            }
        }
    });
}

#[test]
fn criterion_06_memory_formulas() {
    criterion(6, "parameter-count formulas", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2usize, 3] {
            for n in [5usize, 9, 15] {
                for r in [1usize, 2, 3] {
                    let shape = vec![n; d];
                    let full = random_lowrank(&mut rng, TensorFormat::Full, &shape, r);
                    assert_eq!(full.param_count(), n.pow(d as u32));
                    if d == 2 {
                        let cp = random_lowrank(&mut rng, TensorFormat::Cp, &shape, r);
                        assert_eq!(cp.ranks(), vec![r]);
                        assert_eq!(cp.param_count(), d * n * r);
                    }
                    let tucker = random_lowrank(&mut rng, TensorFormat::Tucker, &shape, r);
                    assert_eq!(tucker.ranks(), vec![r; d]);
                    assert_eq!(tucker.param_count(), d * n * r + r.pow(d as u32));
                    let tt = random_lowrank(&mut rng, TensorFormat::Tt, &shape, r);
                    assert_eq!(tt.ranks(), vec![r; d - 1]);
                    assert_eq!(tt.param_count(), 2 * n * r + (d - 2) * n * r * r);
                }
            }
        }
    });
}

#[test]
fn criterion_07_energy_identity() {
    criterion(7, "energy identity", || {
        let spec = MaterialSpec::square(10.0);
        let grid = GridSpec::new(2, 15).unwrap();
        let full_ctx =
            OperatorContext::new(Scheme::Ga, grid, &spec, TensorFormat::Full, None).unwrap();
        let rhs = build_rhs(&full_ctx).unwrap();
        let cfg = SolverConfig::new(2000, 1e-12 * rhs.norm()).unwrap();
        let (u_star, full) = pcg_full(&full_ctx, &rhs, &cfg).unwrap();
        let a_full = full.a_eff;
        for rank in [1usize, 3, 5] {
            let ctx = OperatorContext::new(
                Scheme::Ga,
                grid,
                &spec,
                TensorFormat::Tt,
                Some(TruncationPolicy::fixed_rank(rank).unwrap()),
            )
            .unwrap();
            let lr_rhs = build_rhs(&ctx).unwrap();
            let lr_cfg = SolverConfig::new(300, 1e-10 * lr_rhs.norm())
                .unwrap()
                .with_stagnation_window(10);
            let (u_r, report) = minres_truncated(&ctx, &lr_rhs, &lr_cfg).unwrap();
            let a_r = effective_coefficient(&full_ctx, &Tensor::Full(u_r.reconstruct().unwrap()))
                .unwrap();
            assert!((a_r - report.a_eff).abs() <= 1e-10 * a_r.abs());
            let diff = Tensor::linear_combine(
                1.0,
                &Tensor::Full(u_r.reconstruct().unwrap()),
                -1.0,
                &u_star,
            )
            .unwrap();
            let seminorm = energy_seminorm_sq(&full_ctx, &diff).unwrap();
            let gap = a_r - a_full;
            assert!(
                (gap - seminorm).abs() <= 1e-8 * a_full,
                "rank {rank}: gap {gap} vs seminorm {seminorm}"
            );
            // the identity also gives non-negativity of the relative error
            assert!(gap >= -1e-10 * a_full, "rank {rank}: negative energy gap");
        }
    });
}

#[test]
fn criterion_08_residual_plateau_ordering() {
    criterion(8, "residual plateau ordering", || {
        let spec = MaterialSpec::square(10.0);
        let grid = GridSpec::new(2, 135).unwrap();
        let mut plateaus = Vec::new();
        for rank in [1usize, 3, 5] {
            let ctx = OperatorContext::new(
                Scheme::GaNi,
                grid,
                &spec,
                TensorFormat::Tt,
                Some(TruncationPolicy::fixed_rank(rank).unwrap()),
            )
            .unwrap();
            let rhs = build_rhs(&ctx).unwrap();
            let cfg = SolverConfig::new(400, 1e-12)
                .unwrap()
                .with_stagnation_window(20);
            let (_, report) = minres_truncated(&ctx, &rhs, &cfg).unwrap();
            let its = &report.iterations;
            assert!(!its.is_empty());
            // the history decreases strictly until the first iteration that
            // fails to improve on the best seen (the recorded onset of
            // stagnation), after which it fluctuates around the plateau
            let mut onset = its.len() - 1;
            for i in 1..its.len() {
                if its[i].residual_norm >= its[i - 1].residual_norm {
                    onset = i - 1;
                    break;
                }
            }
            for i in 0..onset {
                assert!(
                    its[i + 1].residual_norm <= its[i].residual_norm * (1.0 + 1e-9),
                    "rank {rank}: residual increased before stagnation onset"
                );
            }
            let plateau = its
                .iter()
                .map(|r| r.residual_norm)
                .fold(f64::INFINITY, f64::min);
            // the iteration made real progress before stagnating
            assert!(plateau < 0.5 * its[0].residual_norm, "rank {rank}");
            plateaus.push(plateau);
        }
        let (p1, p3, p5) = (plateaus[0], plateaus[1], plateaus[2]);
        assert!(p5 <= p3 * (1.0 + 1e-9), "rank 5 plateau {p5} vs rank 3 {p3}");
        assert!(p3 <= p1 * (1.0 + 1e-9), "rank 3 plateau {p3} vs rank 1 {p1}");
    });
}

#[test]
fn criterion_09_rank_table_spot_check() {
    criterion(9, "achieving-rank spot check", || {
        let spec = MaterialSpec::square(10.0);
        let (_, a_ref) = solve_full(Scheme::Ga, 2, 45, &spec, 1e-6);
        let fine = GridSpec::new(2, 135).unwrap();
        let ctx = OperatorContext::new(
            Scheme::Ga,
            fine,
            &spec,
            TensorFormat::Tt,
            Some(TruncationPolicy::fixed_rank(1).unwrap()),
        )
        .unwrap();
        let cfg = SolverConfig::new(300, 1e-10).unwrap().with_stagnation_window(10);
        let target = ContinuationTarget::RelativeError {
            reference: a_ref,
            tol: 0.0,
        };
        let (_, report) = rank_continuation(&ctx, &cfg, &[1, 3, 5, 7], target).unwrap();
        assert_eq!(
            report.achieving_rank,
            Some(3),
            "stages: {:?}",
            report
                .stages
                .iter()
                .map(|s| (s.rank, s.relative_error))
                .collect::<Vec<_>>()
        );
        assert!(
            report.stages[0].relative_error < 0.0,
            "rank 1 must fall short of the reference accuracy"
        );
    });
}

#[test]
fn criterion_10_scaling_trend() {
    criterion(10, "near-linear low-rank scaling vs quadratic full", || {
        let spec = MaterialSpec::square(10.0);
        // warm-up so that allocation and planning costs are excluded
        solve_full(Scheme::GaNi, 2, 45, &spec, 1e-6);
        let mut full_times = Vec::new();
        let mut lowrank_times = Vec::new();
        for n in [45usize, 135, 405] {
            let grid = GridSpec::new(2, n).unwrap();
            let fctx =
                OperatorContext::new(Scheme::GaNi, grid, &spec, TensorFormat::Full, None).unwrap();
            let frhs = build_rhs(&fctx).unwrap();
            let fcfg = SolverConfig::new(25, 1e-300).unwrap();
            let mut best = f64::INFINITY;
            for _ in 0..3 {
                let t = Instant::now();
                let (_, report) = pcg_full(&fctx, &frhs, &fcfg).unwrap();
                assert_eq!(report.iterations.len(), 25);
                best = best.min(t.elapsed().as_secs_f64());
            }
            full_times.push(best);

            let lctx = OperatorContext::new(
                Scheme::GaNi,
                grid,
                &spec,
                TensorFormat::Tt,
                Some(TruncationPolicy::fixed_rank(5).unwrap()),
            )
            .unwrap();
            let lrhs = build_rhs(&lctx).unwrap();
            let lcfg = SolverConfig::new(25, 1e-300)
                .unwrap()
                .with_stagnation_window(25);
            let mut best = f64::INFINITY;
            for _ in 0..3 {
                let t = Instant::now();
                let (_, report) = minres_truncated(&lctx, &lrhs, &lcfg).unwrap();
                assert_eq!(report.iterations.len(), 25);
                best = best.min(t.elapsed().as_secs_f64());
            }
            lowrank_times.push(best);
        }
        for i in 0..2 {
            let full_ratio = full_times[i + 1] / full_times[i];
            let lowrank_ratio = lowrank_times[i + 1] / lowrank_times[i];
            println!(
                "  refinement {}x: full {:.4}s -> {:.4}s ({full_ratio:.1}x), \
                 low-rank {:.4}s -> {:.4}s ({lowrank_ratio:.1}x)",
                3,
                full_times[i],
                full_times[i + 1],
                lowrank_times[i],
                lowrank_times[i + 1]
            );
            assert!(
                full_ratio >= 7.0,
                "full solver grew only {full_ratio:.2}x per refinement"
            );
            assert!(
                lowrank_ratio <= 6.0,
                "low-rank solver grew {lowrank_ratio:.2}x per refinement"
            );
        }
    });
}

#[test]
fn criterion_11_galerkin_monotonicity() {
    criterion(11, "Galerkin refinement monotonicity", || {
        let spec = MaterialSpec::square(10.0);
        let (_, coarse) = solve_full(Scheme::Ga, 2, 5, &spec, 1e-11);
        let (_, fine) = solve_full(Scheme::Ga, 2, 15, &spec, 1e-11);
        assert!(
            fine <= coarse + 1e-10,
            "refinement must not increase the Galerkin energy: {fine} vs {coarse}"
        );
    });
}

#[test]
fn spectrum_bounds_hold_on_all_materials() {
    // supporting sanity check for the solver criteria: the preconditioned
    // operator's Rayleigh quotients stay inside the a-priori bounds
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for spec in [
        MaterialSpec::square(10.0),
        MaterialSpec::stochastic(2),
        MaterialSpec::square(10.0).with_anisotropy(),
    ] {
        let grid = GridSpec::new(2, 9).unwrap();
        let ctx = OperatorContext::new(Scheme::GaNi, grid, &spec, TensorFormat::Full, None).unwrap();
        let (lo, hi) = spectrum_bounds(&ctx);
        for _ in 0..5 {
            let mut data = ArrayD::from_shape_fn(IxDyn(&grid.shape()), |_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            data[IxDyn(&grid.center())] = Complex64::new(0.0, 0.0);
            let v = Tensor::Full(FullTensor { data });
            let cv = homten::homog::operator::apply_operator(&ctx, &v).unwrap();
            // Rayleigh quotient in the P-weighted inner product, computed
            // densely
            let p = &ctx.p_hat_dense;
            let vv: f64 = v
                .reconstruct()
                .unwrap()
                .data
                .iter()
                .zip(p.data.iter())
                .map(|(z, w)| z.norm_sqr() * w.re)
                .sum();
            let cvv: Complex64 = cv
                .reconstruct()
                .unwrap()
                .data
                .iter()
                .zip(p.data.iter())
                .zip(v.reconstruct().unwrap().data.iter())
                .map(|((c, w), z)| c * w * z.conj())
                .sum();
            let rayleigh = cvv.re / vv;
            assert!(
                rayleigh >= lo * (1.0 - 1e-9) && rayleigh <= hi * (1.0 + 1e-9),
                "rayleigh {rayleigh} outside [{lo}, {hi}]"
            );
        }
    }
}
