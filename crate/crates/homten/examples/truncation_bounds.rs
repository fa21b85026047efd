//! Truncation with certified error bounds: compress a random tensor to a
//! range of ranks and compare the actual error against the bound computed
//! from the discarded singular values.

use homten::tensors::{Tensor, TensorFormat, TruncationPolicy};
use homten::tensors::full::FullTensor;
use ndarray::ArrayD;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> homten::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    // a random rank-6 field plus a little noise, so the singular spectrum
    // has a knee followed by a slow tail
    let mut terms = Vec::new();
    for k in 0..6 {
        let vectors: Vec<_> = (0..3)
            .map(|_| {
                (0..20)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect::<ndarray::Array1<Complex64>>()
            })
            .collect();
        terms.push((0.5f64.powi(k), vectors));
    }
    let clean = Tensor::separable_sum(TensorFormat::Full, &terms)?;
    let mut data: ArrayD<Complex64> = clean.reconstruct()?.data;
    for z in data.iter_mut() {
        *z += Complex64::new(rng.gen_range(-1e-4..1e-4), rng.gen_range(-1e-4..1e-4));
    }
    let noisy = FullTensor { data: data.clone() };
    let norm = noisy.norm();

    for format in [TensorFormat::Tucker, TensorFormat::Tt] {
        println!("--- {} ---", format.name());
        println!("{:>5} {:>12} {:>12} {:>8}", "rank", "bound", "actual", "params");
        let exact = Tensor::decompose(&noisy, format, &TruncationPolicy::exact())?;
        for rank in [1usize, 2, 4, 6, 8] {
            let policy = TruncationPolicy::fixed_rank(rank)?;
            let (t, info) = exact.truncate_with_info(&policy)?;
            let back = t.reconstruct()?;
            let actual: f64 = back
                .data
                .iter()
                .zip(data.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            println!(
                "{:>5} {:>12.4e} {:>12.4e} {:>8}",
                rank,
                info.bound / norm,
                actual / norm,
                t.param_count()
            );
            assert!(actual <= info.bound * (1.0 + 1e-10), "the bound is certified");
        }
    }

    // tolerance-driven truncation picks the smallest ranks meeting a target
    let tt = Tensor::decompose(&noisy, TensorFormat::Tt, &TruncationPolicy::exact())?;
    for tau in [1e-1, 1e-2, 1e-4] {
        let policy = TruncationPolicy::tolerance(tau * norm)?;
        let t = tt.truncate(&policy)?;
        println!("tolerance {tau:.0e}: TT ranks {:?}", t.ranks());
    }
    Ok(())
}
