//! Uniform grid on the slab `[-L, L)^2 x [-1, 1)`, periodic in every
//! direction.
//!
//! Samples are stored row-major with shape `[nx, ny, nz]`, so the vertical
//! index varies fastest. Wavenumber arrays are kept in FFT order: index `i`
//! corresponds to the signed mode `i` for `i < n/2` and `i - n` otherwise.
//!
//! Horizontal wavenumbers are `(pi / L) * m`, vertical ones `pi * n` (period 2).
//! Two flavours are stored per axis: the true wavenumber and the one used by
//! derivative operators, where the Nyquist mode is mapped to zero so that odd
//! derivatives of real fields stay real.

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct SlabGrid {
    half_width: f64,
    nx: usize,
    ny: usize,
    nz: usize,
    kx: Vec<f64>,
    ky: Vec<f64>,
    kz: Vec<f64>,
    dkx: Vec<f64>,
    dky: Vec<f64>,
    dkz: Vec<f64>,
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn axis(n: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let k: Vec<f64> = (0..n).map(|i| scale * signed_index(i, n) as f64).collect();
    let dk = k
        .iter()
        .enumerate()
        .map(|(i, &v)| if n > 1 && i == n / 2 { 0.0 } else { v })
        .collect();
    (k, dk)
}

impl SlabGrid {
    /// Build the grid for half-width `L` and sample counts `nx, ny, nz`.
    pub fn new(half_width: f64, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} must be even and at least 4, got {n}"
                )));
            }
        }
        Ok(Self::build(half_width, nx, ny, nz))
    }

    fn build(half_width: f64, nx: usize, ny: usize, nz: usize) -> Self {
        let (kx, dkx) = axis(nx, PI / half_width);
        let (ky, dky) = axis(ny, PI / half_width);
        let (kz, dkz) = axis(nz, PI);
        SlabGrid {
            half_width,
            nx,
            ny,
            nz,
            kx,
            ky,
            kz,
            dkx,
            dky,
            dkz,
        }
    }

    /// The horizontal torus alone, represented as a grid with a single
    /// vertical sample. Fields on it carry no `x3` dependence.
    pub fn plane(&self) -> SlabGrid {
        Self::build(self.half_width, self.nx, self.ny, 1)
    }

    pub fn is_planar(&self) -> bool {
        self.nz == 1
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.ny + j) * self.nz + l
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let l = idx % self.nz;
        let ij = idx / self.nz;
        (ij / self.ny, ij % self.ny, l)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width / self.ny as f64
    }

    /// Vertical spacing; the planar grid reports the full period.
    pub fn dz(&self) -> f64 {
        2.0 / self.nz as f64
    }

    /// Measure of the domain: `(2L)^2 * 2` for the slab, `(2L)^2` for the plane.
    pub fn volume(&self) -> f64 {
        let area = 4.0 * self.half_width * self.half_width;
        if self.is_planar() {
            area
        } else {
            2.0 * area
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dy()
    }

    /// Vertical coordinate in `[-1, 1)`; zero on the planar grid.
    pub fn z(&self, l: usize) -> f64 {
        if self.is_planar() {
            0.0
        } else {
            -1.0 + l as f64 * self.dz()
        }
    }

    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let (i, j, l) = self.unravel(idx);
        [self.x(i), self.y(j), self.z(l)]
    }

    /// True wavenumbers per axis, FFT order.
    pub fn wavenumbers(&self) -> [&[f64]; 3] {
        [&self.kx, &self.ky, &self.kz]
    }

    /// Wavenumbers used by derivative operators (Nyquist mode zeroed).
    pub fn derivative_wavenumbers(&self) -> [&[f64]; 3] {
        [&self.dkx, &self.dky, &self.dkz]
    }

    /// Signed integer mode numbers of an array position.
    pub fn mode_numbers(&self, idx: usize) -> [i64; 3] {
        let (i, j, l) = self.unravel(idx);
        [
            signed_index(i, self.nx),
            signed_index(j, self.ny),
            signed_index(l, self.nz),
        ]
    }

    /// Derivative wavevector `(xi1, xi2, kappa)` of an array position.
    #[inline]
    pub fn mode(&self, idx: usize) -> [f64; 3] {
        let (i, j, l) = self.unravel(idx);
        [self.dkx[i], self.dky[j], self.dkz[l]]
    }

    /// Smallest nonzero horizontal wavenumber `pi / L`.
    pub fn fundamental(&self) -> f64 {
        PI / self.half_width
    }

    /// Largest resolved horizontal wavenumber magnitude along one axis.
    pub fn max_horizontal_wavenumber(&self) -> f64 {
        let m = self.nx.max(self.ny) / 2;
        m as f64 * self.fundamental()
    }

    /// Two-thirds rule: keep modes with `|m| <= n/3` on every axis.
    pub fn dealias_keep(&self, idx: usize) -> bool {
        let [a, b, c] = self.mode_numbers(idx);
        let keep = |m: i64, n: usize| n == 1 || 3 * m.unsigned_abs() as usize <= n;
        keep(a, self.nx) && keep(b, self.ny) && keep(c, self.nz)
    }

    /// Whether a mode lies in the top sixth of the dealiased band on some
    /// axis, i.e. `|m| > (5/6)(n/3)`. Solvers keep their state inside the
    /// band, so energy here is the first sign of under-resolution.
    pub fn in_spectral_tail(&self, idx: usize) -> bool {
        let [a, b, c] = self.mode_numbers(idx);
        let over = |m: i64, n: usize| n > 1 && 18 * m.unsigned_abs() as usize > 5 * n;
        over(a, self.nx) || over(b, self.ny) || over(c, self.nz)
    }

    /// Reflection `x3 -> -x3` on vertical indices.
    #[inline]
    pub fn mirror_z(&self, l: usize) -> usize {
        (self.nz - l) % self.nz
    }

    pub fn same_as(&self, other: &SlabGrid) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wavenumbers_for_pi_grid() {
        let g = SlabGrid::new(PI, 4, 4, 4).unwrap();
        let mut k: Vec<f64> = g.wavenumbers()[0].to_vec();
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(k, vec![-2.0, -1.0, 0.0, 1.0]);
        assert_eq!(g.wavenumbers()[2][1], PI);
    }

    #[test]
    fn smallest_wavenumber_is_half_for_two_pi() {
        let g = SlabGrid::new(2.0 * PI, 8, 8, 4).unwrap();
        let min = g.wavenumbers()[0]
            .iter()
            .filter(|k| k.abs() > 0.0)
            .fold(f64::INFINITY, |m, k| m.min(k.abs()));
        assert_relative_eq!(min, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(SlabGrid::new(PI, 3, 4, 4).is_err());
        assert!(SlabGrid::new(PI, 4, 2, 4).is_err());
        assert!(SlabGrid::new(PI, 4, 4, 5).is_err());
        assert!(SlabGrid::new(0.0, 4, 4, 4).is_err());
        assert!(SlabGrid::new(-1.0, 4, 4, 4).is_err());
    }

    #[test]
    fn wavenumber_set_symmetric_apart_from_nyquist() {
        let g = SlabGrid::new(3.0, 16, 8, 8).unwrap();
        for ks in g.derivative_wavenumbers() {
            for &k in ks {
                assert!(ks.iter().any(|&q| (q + k).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn vertical_period_is_two() {
        let g = SlabGrid::new(1.0, 4, 4, 8).unwrap();
        assert_relative_eq!(g.dz() * g.nz() as f64, 2.0);
        assert_eq!(g.mirror_z(0), 0);
        assert_eq!(g.mirror_z(1), 7);
        assert_eq!(g.mirror_z(4), 4);
    }

    #[test]
    fn index_round_trip() {
        let g = SlabGrid::new(1.0, 6, 4, 8).unwrap();
        for idx in 0..g.len() {
            let (i, j, l) = g.unravel(idx);
            assert_eq!(g.index(i, j, l), idx);
        }
    }
}
