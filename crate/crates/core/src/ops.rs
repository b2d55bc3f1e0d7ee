//! Spectral differential operators. Each one is a Fourier multiplier in the
//! derivative wavevector `(xi1, xi2, kappa)`:
//!
//! | operator       | symbol                         |
//! |----------------|--------------------------------|
//! | `grad_h`       | `(i xi1, i xi2)`               |
//! | `div_h`        | `i xi . v`                     |
//! | `curl_h`       | `i xi1 v2 - i xi2 v1`          |
//! | `laplace_h`    | `-|xi|^2`                      |
//! | `perp_grad_h`  | `(-i xi2, i xi1)`              |
//! | `d_x3`         | `i kappa`                      |
//!
//! The `*_spec` variants act on coefficients and are what the solvers use;
//! the physical-space wrappers transform in and out.

use crate::error::Result;
use crate::field::{Parity, ScalarField, SpectralField, VectorField};
use crate::transform::{forward, inverse};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn dx1_spec(f: &SpectralField) -> SpectralField {
    f.multiplier(|[a, _, _]| I * a)
}

pub fn dx2_spec(f: &SpectralField) -> SpectralField {
    f.multiplier(|[_, b, _]| I * b)
}

pub fn dx3_spec(f: &SpectralField) -> SpectralField {
    f.multiplier(|[_, _, k]| I * k)
}

pub fn laplace_h_spec(f: &SpectralField) -> SpectralField {
    f.multiplier(|[a, b, _]| c(-(a * a + b * b)))
}

/// Full Laplacian, horizontal plus vertical.
pub fn laplace_spec(f: &SpectralField) -> SpectralField {
    f.multiplier(|[a, b, k]| c(-(a * a + b * b + k * k)))
}

pub fn grad_h_spec(f: &SpectralField) -> [SpectralField; 2] {
    [dx1_spec(f), dx2_spec(f)]
}

pub fn perp_grad_h_spec(f: &SpectralField) -> [SpectralField; 2] {
    [dx2_spec(f).scale(-1.0), dx1_spec(f)]
}

pub fn div_h_spec(v1: &SpectralField, v2: &SpectralField) -> Result<SpectralField> {
    dx1_spec(v1).add(&dx2_spec(v2))
}

pub fn curl_h_spec(v1: &SpectralField, v2: &SpectralField) -> Result<SpectralField> {
    dx1_spec(v2).sub(&dx2_spec(v1))
}

pub fn grad_h(f: &ScalarField) -> Result<VectorField> {
    let s = forward(f)?;
    let [a, b] = grad_h_spec(&s);
    VectorField::new(vec![inverse(&a), inverse(&b)])
}

pub fn perp_grad_h(f: &ScalarField) -> Result<VectorField> {
    let s = forward(f)?;
    let [a, b] = perp_grad_h_spec(&s);
    let mut out = VectorField::new(vec![inverse(&a), inverse(&b)])?;
    if let Some(p) = f.parity() {
        out.components_mut().iter_mut().for_each(|c| c.set_parity(Some(p)));
    }
    Ok(out)
}

pub fn div_h(v: &VectorField) -> Result<ScalarField> {
    let a = forward(v.component(0))?;
    let b = forward(v.component(1))?;
    Ok(inverse(&div_h_spec(&a, &b)?))
}

pub fn curl_h(v: &VectorField) -> Result<ScalarField> {
    let a = forward(v.component(0))?;
    let b = forward(v.component(1))?;
    Ok(inverse(&curl_h_spec(&a, &b)?))
}

pub fn laplace_h(f: &ScalarField) -> Result<ScalarField> {
    Ok(inverse(&laplace_h_spec(&forward(f)?)))
}

pub fn d_x3(f: &ScalarField) -> Result<ScalarField> {
    let mut out = inverse(&dx3_spec(&forward(f)?));
    out.set_parity(f.parity().map(|p| match p {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
    }));
    Ok(out)
}

/// Full divergence of a 3-vector, horizontal plus `d/dx3` of the last
/// component.
pub fn div(v: &VectorField) -> Result<ScalarField> {
    let mut s = div_h_spec(&forward(v.component(0))?, &forward(v.component(1))?)?;
    if v.dim() == 3 {
        s = s.add(&dx3_spec(&forward(v.component(2))?))?;
    }
    Ok(inverse(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SlabGrid;
    use crate::random::{random_field, random_vector};
    use std::sync::Arc;

    fn grid() -> Arc<SlabGrid> {
        Arc::new(SlabGrid::new(3.0, 16, 16, 8).unwrap())
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = grid();
        let f = random_field(&g, 1);
        let r = curl_h(&grad_h(&f).unwrap()).unwrap();
        assert!(r.sup_norm() < 1e-12, "{}", r.sup_norm());
    }

    #[test]
    fn laplacian_is_div_grad() {
        let g = grid();
        let f = random_field(&g, 2);
        let a = laplace_h(&f).unwrap();
        let b = div_h(&grad_h(&f).unwrap()).unwrap();
        assert!(a.sub(&b).unwrap().sup_norm() < 1e-12 * a.sup_norm().max(1.0));
    }

    #[test]
    fn div_of_perp_gradient_vanishes() {
        let g = grid();
        let f = random_field(&g, 3);
        assert!(div_h(&perp_grad_h(&f).unwrap()).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn derivatives_of_plane_wave() {
        let g = Arc::new(SlabGrid::new(std::f64::consts::PI, 16, 16, 8).unwrap());
        let f = ScalarField::from_fn(&g, |x, y, z| (2.0 * x - y).sin() * (std::f64::consts::PI * z).cos());
        let fx = ScalarField::from_fn(&g, |x, y, z| 2.0 * (2.0 * x - y).cos() * (std::f64::consts::PI * z).cos());
        let fz = ScalarField::from_fn(&g, |x, y, z| {
            -std::f64::consts::PI * (2.0 * x - y).sin() * (std::f64::consts::PI * z).sin()
        });
        let gh = grad_h(&f).unwrap();
        assert!(gh.component(0).sub(&fx).unwrap().sup_norm() < 1e-12);
        assert!(d_x3(&f).unwrap().sub(&fz).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn derivatives_commute() {
        let g = grid();
        let s = forward(&random_field(&g, 4)).unwrap();
        let ops: [fn(&SpectralField) -> SpectralField; 4] = [dx1_spec, dx2_spec, dx3_spec, laplace_h_spec];
        for a in ops {
            for b in ops {
                let ab = inverse(&a(&b(&s)));
                let ba = inverse(&b(&a(&s)));
                assert!(ab.sub(&ba).unwrap().sup_norm() < 1e-12 * ab.sup_norm().max(1.0));
            }
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = random_vector(&grid(), 1, 2);
        let other = Arc::new(SlabGrid::new(2.0, 16, 16, 8).unwrap());
        let b = random_field(&other, 1);
        assert!(VectorField::new(vec![a.component(0).clone(), b]).is_err());
    }
}
