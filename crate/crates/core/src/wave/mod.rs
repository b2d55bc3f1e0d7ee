//! The linear acoustic-Rossby system
//!
//! ```text
//! eps ds/dt + div V = 0,
//! eps dV/dt + grad s + e3 x V = 0,
//! ```
//!
//! solved exactly mode by mode, and the harness that measures how fast its
//! solutions decay in `L^inf`.

mod decay;
mod oracle;
mod propagator;
mod symbol;

pub use decay::{fit_power_law, log_times, measure_decay, recurrence_time, DecayOptions, DecayReport};
pub use oracle::integrate_mode_ode;
pub use propagator::{ExponentialTable, ModalExpansion, Propagator};
pub use symbol::{
    assemble_symbol, eigensystem, eigenvalues_closed_form, fast_eigenvalue, EigenSystem, ModeSymbol,
};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpectralField, VectorField};
use crate::grid::SlabGrid;
use crate::transform;
use num_complex::Complex64;
use std::sync::Arc;

/// `(s, V)` with `s` even in `x3`, `V1, V2` even and `V3` odd.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub s: ScalarField,
    pub v: VectorField,
}

/// Fourier coefficients of `(s, V1, V2, V3)`.
#[derive(Debug, Clone)]
pub struct WaveSpectrum(pub [SpectralField; 4]);

impl WaveState {
    pub fn new(s: ScalarField, v: VectorField) -> Result<Self> {
        if v.dim() != 3 {
            return Err(Error::InvalidParameter(
                "wave states carry a 3-component vector".into(),
            ));
        }
        s.check_same_grid(v.component(0))?;
        Ok(WaveState { s, v })
    }

    pub fn zeros(grid: &Arc<SlabGrid>) -> Self {
        WaveState {
            s: ScalarField::zeros(grid),
            v: VectorField::zeros(grid, 3),
        }
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        self.s.grid()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.s.l2_norm_sq() + self.v.l2_norm_sq()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn inner(&self, other: &WaveState) -> Result<f64> {
        Ok(self.s.inner(&other.s)? + self.v.inner(&other.v)?)
    }

    /// `(sup |s|, sup |V|)`.
    pub fn sup_norms(&self) -> (f64, f64) {
        (self.s.sup_norm(), self.v.sup_norm())
    }

    /// `sup_x (s^2 + |V|^2)^(1/2)`.
    pub fn sup_norm(&self) -> f64 {
        let n = self.s.data().len();
        (0..n)
            .map(|i| {
                let v2: f64 = self.v.components().iter().map(|c| c.data()[i].powi(2)).sum();
                (self.s.data()[i].powi(2) + v2).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `(int (s^2 + |V|^2)^(p/2))^(1/p)`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let mag = self.v.magnitude();
        let pointwise = self
            .s
            .zip_map(&mag, |a, b| (a * a + b * b).sqrt())
            .expect("same grid");
        pointwise.lp_norm(p)
    }

    pub fn add(&self, other: &WaveState) -> Result<WaveState> {
        WaveState::new(self.s.add(&other.s)?, self.v.add(&other.v)?)
    }

    pub fn sub(&self, other: &WaveState) -> Result<WaveState> {
        WaveState::new(self.s.sub(&other.s)?, self.v.sub(&other.v)?)
    }

    pub fn scale(&self, c: f64) -> WaveState {
        WaveState {
            s: self.s.scale(c),
            v: self.v.scale(c),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        self.s.check_finite("wave state")?;
        self.v.check_finite("wave state")
    }

    pub fn to_spectrum(&self) -> Result<WaveSpectrum> {
        Ok(WaveSpectrum([
            transform::forward(&self.s)?,
            transform::forward(self.v.component(0))?,
            transform::forward(self.v.component(1))?,
            transform::forward(self.v.component(2))?,
        ]))
    }

    /// Norm with weight `(1 + |xi|^2 + kappa^2)^m` on the coefficients.
    pub fn sobolev_norm(&self, m: u32) -> Result<f64> {
        Ok(self.to_spectrum()?.sobolev_norm(m))
    }
}

impl WaveSpectrum {
    pub fn zeros(grid: &Arc<SlabGrid>) -> Self {
        WaveSpectrum(std::array::from_fn(|_| SpectralField::zeros(grid)))
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        self.0[0].grid()
    }

    pub fn to_state(&self) -> WaveState {
        let [s, a, b, c] = &self.0;
        let mut v = VectorField::new(vec![
            transform::inverse(a),
            transform::inverse(b),
            transform::inverse(c),
        ])
        .expect("components share a grid");
        v.tag_symmetry_class();
        WaveState {
            s: transform::inverse(s).with_parity(crate::field::Parity::Even),
            v,
        }
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(SpectralField::energy).sum()
    }

    pub fn sobolev_norm(&self, m: u32) -> f64 {
        let g = self.grid();
        let mut total = 0.0;
        for idx in 0..g.len() {
            let [a, b, k] = g.mode(idx);
            let w = (1.0 + a * a + b * b + k * k).powi(m as i32);
            total += w * self.0.iter().map(|f| f.coeffs()[idx].norm_sqr()).sum::<f64>();
        }
        total.sqrt()
    }

    #[inline]
    pub fn mode_vector(&self, idx: usize) -> [Complex64; 4] {
        std::array::from_fn(|c| self.0[c].coeffs()[idx])
    }

    #[inline]
    pub fn set_mode_vector(&mut self, idx: usize, y: [Complex64; 4]) {
        for (c, v) in y.into_iter().enumerate() {
            self.0[c].coeffs_mut()[idx] = v;
        }
    }

    /// Per-mode vectors, one `[s, V1, V2, V3]` array per coefficient index.
    pub fn to_modes(&self) -> Vec<[Complex64; 4]> {
        (0..self.grid().len()).map(|idx| self.mode_vector(idx)).collect()
    }

    pub fn from_modes(grid: &Arc<SlabGrid>, modes: &[[Complex64; 4]]) -> Self {
        let comps = std::array::from_fn(|c| {
            SpectralField::from_vec(grid, modes.iter().map(|y| y[c]).collect()).expect("length matches")
        });
        WaveSpectrum(comps)
    }
}

/// `B (s, V) = (div V, grad s + e3 x V)`, applied through its symbol `i A`.
pub fn apply_generator(state: &WaveState) -> Result<WaveState> {
    let spec = state.to_spectrum()?;
    let g = Arc::clone(state.grid());
    let i = Complex64::new(0.0, 1.0);
    let mut modes = spec.to_modes();
    for (idx, y) in modes.iter_mut().enumerate() {
        let [a, b, k] = g.mode(idx);
        let m = assemble_symbol([a, b], k).matrix;
        let v = nalgebra::Vector4::from(*y);
        let w = m * v * i;
        *y = [w[0], w[1], w[2], w[3]];
    }
    Ok(WaveSpectrum::from_modes(&g, &modes).to_state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field, random_vector};
    use crate::symmetry::enforce_symmetry_class;

    pub(crate) fn random_state(g: &Arc<SlabGrid>, seed: u64) -> WaveState {
        let (s, v) = enforce_symmetry_class(&random_field(g, seed), &random_vector(g, seed + 1, 3)).unwrap();
        WaveState::new(s, v).unwrap()
    }

    #[test]
    fn generator_is_skew() {
        let g = Arc::new(SlabGrid::new(3.0, 16, 16, 8).unwrap());
        for seed in 0..4 {
            let a = random_state(&g, 10 * seed);
            let b = random_state(&g, 10 * seed + 5);
            let lhs = apply_generator(&a).unwrap().inner(&b).unwrap();
            let rhs = a.inner(&apply_generator(&b).unwrap()).unwrap();
            assert!((lhs + rhs).abs() < 1e-10 * lhs.abs().max(1.0), "{lhs} {rhs}");
        }
    }

    #[test]
    fn generator_of_geostrophic_pair_vanishes() {
        let g = Arc::new(SlabGrid::new(3.0, 16, 16, 4).unwrap());
        let q = ScalarField::from_fn(&g, |x, y, _| (-(x * x + y * y)).exp());
        let v = crate::ops::perp_grad_h(&q).unwrap().with_zero_vertical();
        let b = apply_generator(&WaveState::new(q, v).unwrap()).unwrap();
        assert!(b.l2_norm() < 1e-10);
    }

    #[test]
    fn spectrum_round_trip() {
        let g = Arc::new(SlabGrid::new(2.0, 8, 8, 4).unwrap());
        let a = random_state(&g, 3);
        let back = a.to_spectrum().unwrap().to_state();
        assert!(back.sub(&a).unwrap().l2_norm() < 1e-13);
        let e = a.to_spectrum().unwrap().energy();
        assert!((e - a.l2_norm_sq()).abs() < 1e-12 * e);
    }
}
