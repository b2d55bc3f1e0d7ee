//! Seeded random fields. All randomness in the crate goes through ChaCha8,
//! a counter-based generator, so runs are reproducible from a `u64` seed.

use crate::field::{ScalarField, SpectralField, VectorField};
use crate::grid::SlabGrid;
use crate::transform;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random field: uniform noise filtered by a Gaussian in wavenumber
/// space, with spectral width `0.3 * max resolved wavenumber`.
pub fn random_field(grid: &Arc<SlabGrid>, seed: u64) -> ScalarField {
    let kmax = grid.max_horizontal_wavenumber().max(std::f64::consts::PI);
    band_limited_field(grid, seed, 0.3 * kmax)
}

/// Random field whose spectrum decays like `exp(-|k|^2 / (2 width^2))`.
/// Nyquist modes are removed. The result is real and has unit L2 norm
/// (unless the grid is trivial).
pub fn band_limited_field(grid: &Arc<SlabGrid>, seed: u64, width: f64) -> ScalarField {
    let mut r = rng(seed);
    let noise: Vec<Complex64> = (0..grid.len())
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), 0.0))
        .collect();
    let mut spec = transform::forward_complex(grid, noise);
    let [kx, ky, kz] = grid.wavenumbers();
    let shape = grid.shape();
    for (idx, c) in spec.coeffs_mut().iter_mut().enumerate() {
        let (i, j, l) = grid.unravel(idx);
        let nyquist = grid
            .mode_numbers(idx)
            .iter()
            .zip(shape)
            .any(|(m, n)| n > 1 && 2 * m.unsigned_abs() as usize == n);
        let k2 = kx[i] * kx[i] + ky[j] * ky[j] + kz[l] * kz[l];
        *c *= if nyquist { 0.0 } else { (-0.5 * k2 / (width * width)).exp() };
    }
    let f = transform::inverse(&spec);
    let n = f.l2_norm();
    if n > 0.0 {
        f.scale(1.0 / n)
    } else {
        f
    }
}

/// Random complex coefficients with conjugate symmetry, i.e. the spectrum of
/// a random real field.
pub fn random_spectrum(grid: &Arc<SlabGrid>, seed: u64) -> SpectralField {
    transform::forward_unchecked(&random_field(grid, seed))
}

pub fn random_vector(grid: &Arc<SlabGrid>, seed: u64, dim: usize) -> VectorField {
    let comps = (0..dim)
        .map(|i| random_field(grid, seed.wrapping_mul(31).wrapping_add(i as u64 + 1)))
        .collect();
    VectorField::new(comps).expect("dimension 2 or 3")
}
