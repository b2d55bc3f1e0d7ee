//! Compressible Navier-Stokes with Mach and Rossby numbers both equal to
//! `eps`, written for `sigma = (rho - 1) / eps` and `m = rho u`:
//!
//! ```text
//! d sigma/dt + (1/eps) div m = 0
//! d m/dt + (1/eps) (grad sigma + e3 x m)
//!     = -div(m (x) u) - grad r(sigma) + mu (lap u + (1/3) grad div u) + rho grad G
//! ```
//!
//! with `r(sigma) = [p(1 + eps sigma) - p(1) - eps sigma] / eps^2`. The left
//! side is exactly the acoustic-Rossby operator handled by
//! [`crate::wave::Propagator`]; the right side is the nonlinear remainder.
//! In these variables the Coriolis term `(1/eps) rho e3 x u = (1/eps) e3 x m`
//! is linear, so no rotational piece is left in the remainder.

mod pressure;
mod solver;

pub use pressure::PressureLaw;
pub use solver::{
    ns_nonlinear_remainder, ns_stiff_part, run_ns, step_ns, Forcing, NsConfig, NsSolver, NsTrajectory,
};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::SlabGrid;
use crate::symmetry::symmetry_defect;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct FluidState {
    pub sigma: ScalarField,
    pub m: VectorField,
    pub eps: f64,
}

impl FluidState {
    pub fn new(sigma: ScalarField, m: VectorField, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if m.dim() != 3 {
            return Err(Error::InvalidParameter("momentum needs 3 components".into()));
        }
        sigma.check_same_grid(m.component(0))?;
        Ok(FluidState { sigma, m, eps })
    }

    /// State with `rho = 1 + eps rho1` and velocity `u`.
    pub fn from_primitive(rho1: &ScalarField, u: &VectorField, eps: f64) -> Result<Self> {
        let rho = rho1.map(|s| 1.0 + eps * s);
        if rho.min() <= 0.0 {
            return Err(Error::Vacuum {
                min_density: rho.min(),
                time: 0.0,
            });
        }
        let m = VectorField::new(
            u.components()
                .iter()
                .map(|c| c.mul(&rho))
                .collect::<Result<Vec<_>>>()?,
        )?;
        FluidState::new(rho1.clone(), m, eps)
    }

    pub fn rest(grid: &Arc<SlabGrid>, eps: f64) -> Result<Self> {
        FluidState::new(ScalarField::zeros(grid), VectorField::zeros_symmetric(grid), eps)
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        self.sigma.grid()
    }

    pub fn density(&self) -> ScalarField {
        let eps = self.eps;
        self.sigma.map(|s| 1.0 + eps * s)
    }

    pub fn min_density(&self) -> f64 {
        self.density().min()
    }

    pub fn velocity(&self) -> Result<VectorField> {
        let rho = self.density();
        VectorField::new(
            self.m
                .components()
                .iter()
                .map(|c| c.zip_map(&rho, |a, r| a / r))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `sqrt(rho) u = m / sqrt(rho)`.
    pub fn sqrt_rho_u(&self) -> Result<VectorField> {
        let rho = self.density();
        VectorField::new(
            self.m
                .components()
                .iter()
                .map(|c| c.zip_map(&rho, |a, r| a / r.sqrt()))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `int sigma`, which the scheme conserves exactly.
    pub fn mass(&self) -> f64 {
        self.sigma.integral()
    }

    /// `int |m|^2 / (2 rho) + (1/eps^2) (H(rho) - H'(1)(rho - 1) - H(1))`.
    pub fn energy(&self, law: &PressureLaw) -> f64 {
        let rho = self.density();
        let eps2 = self.eps * self.eps;
        let g = self.grid();
        let mut total = 0.0;
        for idx in 0..g.len() {
            let r = rho.data()[idx];
            let m2: f64 = self.m.components().iter().map(|c| c.data()[idx].powi(2)).sum();
            total += 0.5 * m2 / r + law.bregman(r, 1.0) / eps2;
        }
        total * g.cell_volume()
    }

    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.sigma, &self.m)
    }

    pub fn check_finite(&self) -> Result<()> {
        self.sigma.check_finite("density perturbation")?;
        self.m.check_finite("momentum")
    }
}
