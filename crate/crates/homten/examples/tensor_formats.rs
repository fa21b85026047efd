//! Tour of the tensor formats: build a separable field, compress it into
//! CP, Tucker, and tensor-train form, and compare storage and accuracy.

use homten::tensors::{Tensor, TensorFormat, TruncationPolicy};
use ndarray::Array1;
use num_complex::Complex64;

fn main() -> homten::Result<()> {
    let n = 31usize;

    // a rank-2 separable field: 1 + 10 * chi(x) chi(y) on an n x n grid
    let grid: Vec<f64> = (0..n).map(|i| (i as f64 - (n as f64 - 1.0) / 2.0) / n as f64).collect();
    let ones = Array1::from_elem(n, Complex64::new(1.0, 0.0));
    let chi: Array1<Complex64> = grid
        .iter()
        .map(|&x| Complex64::new(if x < 0.3 { 1.0 } else { 0.0 }, 0.0))
        .collect();

    let terms = vec![
        (1.0, vec![ones.clone(), ones.clone()]),
        (10.0, vec![chi.clone(), chi.clone()]),
    ];

    println!("{:>8} {:>12} {:>14}", "format", "params", "rel error");
    let full = Tensor::separable_sum(TensorFormat::Full, &terms)?;
    let dense = full.reconstruct()?;
    println!("{:>8} {:>12} {:>14}", "full", full.param_count(), "exact");

    for format in [TensorFormat::Cp, TensorFormat::Tucker, TensorFormat::Tt] {
        let t = Tensor::separable_sum(format, &terms)?;
        let back = t.reconstruct()?;
        let err: f64 = back
            .data
            .iter()
            .zip(dense.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        println!(
            "{:>8} {:>12} {:>14.2e}",
            format.name(),
            t.param_count(),
            err / full.norm()
        );
    }

    // element-wise squares multiply the ranks; truncation restores rank 2
    // because the square of a rank-2 indicator field is again rank 2
    let tt = Tensor::decompose(
        &dense,
        TensorFormat::Tt,
        &TruncationPolicy::tolerance(1e-12 * full.norm())?,
    )?;
    let squared = tt.hadamard(&tt)?;
    println!("\nTT ranks of a * a before truncation: {:?}", squared.ranks());
    let policy = TruncationPolicy::tolerance(1e-10 * squared.norm())?;
    let rounded = squared.truncate(&policy)?;
    println!("TT ranks after rounding at 1e-10:    {:?}", rounded.ranks());

    // the Fourier transform acts factor-by-factor and keeps all ranks
    let hat = tt.fft_d(homten::la::FftDirection::Forward)?;
    println!("\nTT ranks before FFT {:?}, after {:?}", tt.ranks(), hat.ranks());
    let mean = hat.entry(&[n / 2, n / 2]);
    println!("zero-frequency coefficient (the field mean): {:.6}", mean.re);
    Ok(())
}
