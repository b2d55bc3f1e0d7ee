//! Built-in initial data shared by the self-test and the experiment runner.

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::SlabGrid;
use crate::kernel::{decompose_initial_data, DataSplit, KernelPair};
use crate::ns::FluidState;
use crate::ops;
use crate::qg::{presets, LimitState};
use crate::wave::WaveState;
use std::f64::consts::PI;
use std::sync::Arc;

fn gaussian(width: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| (-(x * x + y * y) / (2.0 * width * width)).exp()
}

/// Frequency band with a plateau on its middle half, spatial plateau
/// `radius` with an equally wide taper, vertical modes up to `max_vertical_mode`.
pub fn band_cutoff(lo: f64, hi: f64, radius: f64, max_vertical_mode: usize) -> Result<CutoffSpec> {
    let q = 0.25 * (hi - lo);
    CutoffSpec::new(lo, lo + q, hi - q, hi, radius, radius, max_vertical_mode)
}

/// A narrow compressive pulse, constant in `x3`: `rho1 = G`, `u = grad_h G`
/// with a Gaussian `G` of the given width.
pub fn acoustic_pulse(grid: &Arc<SlabGrid>, amplitude: f64, width: f64) -> (ScalarField, VectorField) {
    let g = gaussian(width);
    let w2 = width * width;
    let rho1 = ScalarField::from_fn(grid, |x, y, _| amplitude * g(x, y));
    let u = VectorField::new(vec![
        ScalarField::from_fn(grid, |x, y, _| -amplitude * x / w2 * g(x, y)),
        ScalarField::from_fn(grid, |x, y, _| -amplitude * y / w2 * g(x, y)),
        ScalarField::zeros(grid),
    ])
    .expect("three components");
    (rho1, u)
}

/// Data for the dispersive-decay study: the wave part of a mollified
/// acoustic pulse.
#[derive(Debug, Clone)]
pub struct DecayCase {
    pub half_width: f64,
    pub n: usize,
    pub nz: usize,
    pub eps: f64,
    pub band: (f64, f64),
    pub pulse_width: f64,
}

impl Default for DecayCase {
    fn default() -> Self {
        DecayCase {
            half_width: 200.0 * PI,
            n: 1024,
            nz: 4,
            eps: 0.2,
            band: (1.5, 2.5),
            pulse_width: 0.5,
        }
    }
}

impl DecayCase {
    pub fn grid(&self) -> Result<Arc<SlabGrid>> {
        Ok(Arc::new(SlabGrid::new(self.half_width, self.n, self.n, self.nz)?))
    }

    pub fn split(&self, grid: &Arc<SlabGrid>) -> Result<DataSplit> {
        let (rho1, u) = acoustic_pulse(grid, 1.0, self.pulse_width);
        let c = band_cutoff(self.band.0, self.band.1, 0.1 * self.half_width, 0)?;
        decompose_initial_data(&rho1, &u, &c)
    }

    pub fn wave_state(&self, grid: &Arc<SlabGrid>) -> Result<WaveState> {
        self.split(grid)?.wave_state()
    }
}

/// Parameters of the fluid reference case: a co-rotating vortex pair in
/// geostrophic balance plus a vertically varying acoustic bump.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceFluid {
    pub vortex_amplitude: f64,
    pub vortex_width: f64,
    pub separation: f64,
    pub acoustic_amplitude: f64,
}

impl Default for ReferenceFluid {
    fn default() -> Self {
        ReferenceFluid {
            vortex_amplitude: 1.0,
            vortex_width: 1.0,
            separation: 2.5,
            acoustic_amplitude: 0.15,
        }
    }
}

impl ReferenceFluid {
    /// `(rho1, u)` with `rho = 1 + eps rho1`.
    pub fn primitive(&self, grid: &Arc<SlabGrid>) -> Result<(ScalarField, VectorField)> {
        let plane = Arc::new(grid.plane());
        let q = presets::vortex_pair(&plane, self.vortex_amplitude, self.vortex_width, self.separation)
            .q
            .extend_vertically(grid)?;
        let a = self.acoustic_amplitude;
        let bump = gaussian(1.0);
        let rho1 = q.add(&ScalarField::from_fn(grid, |x, y, z| a * bump(x, y) * (PI * z).cos()))?;
        let v = ops::perp_grad_h(&q)?;
        let u = VectorField::new(vec![
            v.component(0)
                .add(&ScalarField::from_fn(grid, |x, y, z| -a * x * bump(x, y) * (PI * z).cos()))?,
            v.component(1)
                .add(&ScalarField::from_fn(grid, |x, y, z| -a * y * bump(x, y) * (PI * z).cos()))?,
            ScalarField::from_fn(grid, |x, y, z| a * bump(x, y) * (PI * z).sin()),
        ])?;
        Ok((rho1, u))
    }

    pub fn state(&self, grid: &Arc<SlabGrid>, eps: f64) -> Result<FluidState> {
        let (rho1, u) = self.primitive(grid)?;
        FluidState::from_primitive(&rho1, &u, eps)
    }
}

/// Fluid state lying exactly in the kernel of the wave operator: `sigma = q`
/// and `m = perp_grad_h q`, constant in `x3`.
pub fn kernel_prepared(grid: &Arc<SlabGrid>, q: &LimitState, eps: f64) -> Result<FluidState> {
    let ws = KernelPair::from_stream(q.q.clone())?.to_wave_state(grid)?;
    FluidState::new(ws.s, ws.v, eps)
}

/// Named limit-equation presets.
pub fn limit_preset(
    name: &str,
    plane: &Arc<SlabGrid>,
    amplitude: f64,
    width: f64,
    separation: f64,
    seed: u64,
) -> Result<LimitState> {
    Ok(match name {
        "monopole" => presets::gaussian_monopole(plane, amplitude, width),
        "dipole" => presets::dipole(plane, amplitude, width, separation),
        "vortex-pair" => presets::vortex_pair(plane, amplitude, width, separation),
        "random" => presets::random_band_limited(plane, seed, 1.0 / width, amplitude),
        other => {
            return Err(Error::InvalidParameter(format!("unknown limit preset '{other}'")));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_prepared_data_has_no_wave_part() {
        let g = Arc::new(SlabGrid::new(2.0 * PI, 32, 32, 4).unwrap());
        let plane = Arc::new(g.plane());
        let q = limit_preset("vortex-pair", &plane, 1.0, 1.0, 2.5, 0).unwrap();
        let st = kernel_prepared(&g, &q, 0.1).unwrap();
        let w = WaveState::new(st.sigma.clone(), st.m.clone()).unwrap();
        assert!(crate::wave::apply_generator(&w).unwrap().l2_norm() < 1e-10 * w.l2_norm());
        assert!(limit_preset("square", &plane, 1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn reference_state_is_in_symmetry_class() {
        let g = Arc::new(SlabGrid::new(2.0 * PI, 16, 16, 8).unwrap());
        let st = ReferenceFluid::default().state(&g, 0.2).unwrap();
        assert!(st.symmetry_defect() < 1e-14);
        assert!(st.min_density() > 0.5);
    }

    #[test]
    fn decay_data_is_band_limited() {
        let case = DecayCase {
            half_width: 20.0 * PI,
            n: 128,
            ..DecayCase::default()
        };
        let g = case.grid().unwrap();
        let split = case.split(&g).unwrap();
        let ws = split.wave_state().unwrap();
        assert!(ws.l2_norm() > 0.0);
        let spec = ws.to_spectrum().unwrap();
        for f in &spec.0 {
            for (idx, c) in f.coeffs().iter().enumerate() {
                let [a, b, k] = g.mode(idx);
                if a.hypot(b) < case.band.0 || a.hypot(b) > case.band.1 || k != 0.0 {
                    assert!(c.norm() < 1e-12);
                }
            }
        }
    }
}
