//! Fixtures shared by the benchmarks.

use hhl_lab_core::hhl::{self, LinearSystem};
use hhl_lab_core::tensor::{self, basis};
use hhl_lab_core::SpectralData;

/// The 2x2 system with eigenvalues 1 and 2 at `b = (b₀, √(1 − b₀²))`.
pub fn paper_2d(b0: f64) -> SpectralData {
    let b = tensor::real_vector(&[b0, (1.0 - b0 * b0).sqrt()]);
    let sys = LinearSystem::new(hhl::builtin_matrix("paper-2d").unwrap(), b).unwrap();
    hhl::spectral_decompose(&sys, 0.736, None).unwrap()
}

/// The 3x3 system with eigenvalues 1, 2, 3 at `b = e₀`.
pub fn paper_3d() -> SpectralData {
    let sys = LinearSystem::new(hhl::builtin_matrix("paper-3d").unwrap(), basis(3, 0)).unwrap();
    hhl::spectral_decompose(&sys, 0.736, None).unwrap()
}

/// A system with eigenvalues `1..=n` on the standard basis and uniform `b`.
pub fn diagonal(n: usize) -> SpectralData {
    let eigs: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let b = tensor::real_vector(&vec![1.0 / (n as f64).sqrt(); n]);
    let sys = hhl::system_with_spectrum(&eigs, b).unwrap();
    hhl::spectral_decompose(&sys, hhl::CircuitConstant::Auto, None).unwrap()
}
