//! Forward and inverse Fourier transforms on the slab grid.
//!
//! Normalization is unitary with respect to the L2 inner product on the
//! domain:
//!
//! ```text
//! c(m) = |Omega|^{-1/2} * integral of f(x) exp(-i k(m).x) dx
//! f(x) = |Omega|^{-1/2} * sum_m c(m) exp(i k(m).x)
//! ```
//!
//! with the integral evaluated by the trapezoidal rule. Hence
//! `||f||_{L2}^2 = sum |c(m)|^2` and Fourier multipliers act directly on the
//! coefficients. The grid starts at `x = -L` (and `x3 = -1`), which puts a
//! sign `(-1)^(i + j + l)` between these coefficients and the raw DFT.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpectralField};
use crate::grid::SlabGrid;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().expect("fft plan cache poisoned");
    Arc::clone(guard.entry((n, inverse)).or_insert_with(|| {
        let dir = if inverse {
            FftDirection::Inverse
        } else {
            FftDirection::Forward
        };
        FftPlanner::new().plan_fft(n, dir)
    }))
}

/// Unnormalized in-place 3-D DFT over a row-major `[nx, ny, nz]` array.
pub fn fft3_in_place(data: &mut [Complex64], shape: [usize; 3], inverse: bool) {
    let [nx, ny, nz] = shape;
    debug_assert_eq!(data.len(), nx * ny * nz);
    if nz > 1 {
        let f = plan(nz, inverse);
        let mut scratch = vec![Complex64::default(); f.get_inplace_scratch_len()];
        for line in data.chunks_exact_mut(nz) {
            f.process_with_scratch(line, &mut scratch);
        }
    }
    strided_pass(data, ny, nz, nx, ny * nz, inverse);
    strided_pass(data, nx, ny * nz, 1, 0, inverse);
}

// Transform lines of length `n` with element stride `stride`; there are
// `outer` blocks separated by `block_stride`, each holding `stride` lines.
fn strided_pass(
    data: &mut [Complex64],
    n: usize,
    stride: usize,
    outer: usize,
    block_stride: usize,
    inverse: bool,
) {
    if n <= 1 {
        return;
    }
    let f = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); f.get_inplace_scratch_len()];
    // gather several lines at once for cache friendliness
    let batch = stride.clamp(1, 64);
    let mut buf = vec![Complex64::default(); n * batch];
    for b in 0..outer {
        let base = b * block_stride;
        let mut s0 = 0;
        while s0 < stride {
            let w = batch.min(stride - s0);
            for t in 0..n {
                let row = base + t * stride + s0;
                for c in 0..w {
                    buf[c * n + t] = data[row + c];
                }
            }
            f.process_with_scratch(&mut buf[..w * n], &mut scratch);
            for t in 0..n {
                let row = base + t * stride + s0;
                for c in 0..w {
                    data[row + c] = buf[c * n + t];
                }
            }
            s0 += w;
        }
    }
}

#[inline]
fn origin_sign(grid: &SlabGrid, idx: usize) -> f64 {
    let (i, j, l) = grid.unravel(idx);
    if (i + j + l) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficients of complex samples.
pub fn forward_complex(grid: &Arc<SlabGrid>, mut data: Vec<Complex64>) -> SpectralField {
    fft3_in_place(&mut data, grid.shape(), false);
    let norm = grid.volume().sqrt() / grid.len() as f64;
    for (idx, c) in data.iter_mut().enumerate() {
        *c *= norm * origin_sign(grid, idx);
    }
    SpectralField::from_vec(grid, data).expect("length matches grid")
}

/// Complex samples of a coefficient array (no realness assumed).
pub fn inverse_complex(field: &SpectralField) -> Vec<Complex64> {
    let grid = field.grid();
    let norm = 1.0 / grid.volume().sqrt();
    let mut data: Vec<Complex64> = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| c * (norm * origin_sign(grid, idx)))
        .collect();
    fft3_in_place(&mut data, grid.shape(), true);
    data
}

pub fn forward(field: &ScalarField) -> Result<SpectralField> {
    field.check_finite("forward transform input")?;
    Ok(forward_unchecked(field))
}

pub(crate) fn forward_unchecked(field: &ScalarField) -> SpectralField {
    let data = field
        .data()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    forward_complex(field.grid(), data)
}

/// Real part of the inverse transform. Coefficients of real fields are
/// conjugate symmetric, so the discarded imaginary part is round-off.
pub fn inverse(field: &SpectralField) -> ScalarField {
    let data = inverse_complex(field).into_iter().map(|c| c.re).collect();
    ScalarField::from_vec(field.grid(), data).expect("length matches grid")
}

pub fn inverse_checked(field: &SpectralField) -> Result<ScalarField> {
    let out = inverse(field);
    if out.data().iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NonFinite("inverse transform output"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid() -> Arc<SlabGrid> {
        Arc::new(SlabGrid::new(PI, 8, 6, 4).unwrap())
    }

    #[test]
    fn constant_has_single_coefficient() {
        let g = grid();
        let f = ScalarField::constant(&g, 2.5);
        let c = forward(&f).unwrap();
        assert_relative_eq!(c.coeffs()[0].re, 2.5 * g.volume().sqrt(), epsilon = 1e-12);
        for z in &c.coeffs()[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn cosine_gives_conjugate_pair() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, y, _| (x + 2.0 * y).cos());
        let c = forward(&f).unwrap();
        let plus = g.index(1, 2, 0);
        let minus = g.index(7, 4, 0);
        let amp = 0.5 * g.volume().sqrt();
        assert!((c.coeffs()[plus] - Complex64::new(amp, 0.0)).norm() < 1e-12);
        assert!((c.coeffs()[minus] - Complex64::new(amp, 0.0)).norm() < 1e-12);
        let rest: f64 = c
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != plus && *i != minus)
            .map(|(_, z)| z.norm())
            .sum();
        assert!(rest < 1e-11);
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = Arc::new(SlabGrid::new(2.0, 16, 12, 8).unwrap());
        let f = random_field(&g, 7);
        let c = forward(&f).unwrap();
        assert_relative_eq!(c.energy(), f.l2_norm_sq(), max_relative = 1e-12);
        let back = inverse(&c);
        let err = back.sub(&f).unwrap().l2_norm() / f.l2_norm();
        assert!(err < 1e-13, "round trip error {err}");
        assert!(c.conjugate_symmetry_defect() < 1e-12);
    }

    #[test]
    fn planar_grid_transforms() {
        let g = Arc::new(SlabGrid::new(2.0, 16, 8, 4).unwrap().plane());
        let f = random_field(&g, 3);
        let c = forward(&f).unwrap();
        assert_relative_eq!(c.energy(), f.l2_norm_sq(), max_relative = 1e-12);
        assert!(inverse(&c).sub(&f).unwrap().sup_norm() < 1e-13);
    }

    #[test]
    fn rejects_non_finite() {
        let g = grid();
        let mut f = ScalarField::zeros(&g);
        f.data_mut()[3] = f64::NAN;
        assert!(forward(&f).is_err());
    }
}
