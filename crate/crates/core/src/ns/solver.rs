use super::{FluidState, PressureLaw};
use crate::diagnostics::EssResSpec;
use crate::error::{Error, Result};
use crate::field::{ScalarField, SpectralField, VectorField};
use crate::grid::SlabGrid;
use crate::ops;
use crate::symmetry::enforce_symmetry_class;
use crate::transform::{forward, forward_unchecked, inverse};
use crate::wave::{apply_generator, ExponentialTable, Propagator, WaveSpectrum, WaveState};
use num_complex::Complex64;
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub enum Forcing {
    None,
    /// `G = amplitude * exp(-|x_h|^2 / (2 width^2))`, independent of `x3`.
    GaussianHill { amplitude: f64, width: f64 },
    Field(ScalarField),
}

impl Forcing {
    pub fn potential(&self, grid: &Arc<SlabGrid>) -> Result<Option<ScalarField>> {
        match self {
            Forcing::None => Ok(None),
            Forcing::GaussianHill { amplitude, width } => {
                let (a, w) = (*amplitude, *width);
                if !(w > 0.0) {
                    return Err(Error::InvalidParameter("hill width must be positive".into()));
                }
                Ok(Some(ScalarField::from_fn(grid, |x, y, _| {
                    a * (-(x * x + y * y) / (2.0 * w * w)).exp()
                })))
            }
            Forcing::Field(g) => {
                crate::field::same_grid(g.grid(), grid)?;
                Ok(Some(g.clone()))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct NsConfig {
    pub eps: f64,
    pub gamma: f64,
    /// `mu = mu0 * eps^alpha` unless `mu` is set.
    pub mu0: f64,
    pub alpha: f64,
    pub mu: Option<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub snapshot_stride: usize,
    /// Re-project onto the symmetry class every this many steps.
    pub symmetry_every: usize,
    pub cfl: f64,
    pub rho_min: f64,
    pub forcing: Forcing,
    /// Switch off the nonlinear remainder (pure wave propagation plus
    /// nothing); used for consistency checks.
    pub linear_only: bool,
}

impl Default for NsConfig {
    fn default() -> Self {
        NsConfig {
            eps: 0.2,
            gamma: 2.0,
            mu0: 1e-2,
            alpha: 0.5,
            mu: None,
            t_end: 1.0,
            dt: 0.01,
            snapshot_stride: 10,
            symmetry_every: 16,
            cfl: 0.5,
            rho_min: 1e-3,
            forcing: Forcing::None,
            linear_only: false,
        }
    }
}

impl NsConfig {
    pub fn viscosity(&self) -> f64 {
        self.mu.unwrap_or(self.mu0 * self.eps.powf(self.alpha))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        PressureLaw::new(self.gamma)?;
        if !(self.viscosity() >= 0.0 && self.viscosity().is_finite()) {
            return bad(format!("viscosity must be non-negative, got {}", self.viscosity()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("final time must be non-negative, got {}", self.t_end));
        }
        if !(self.cfl > 0.0) {
            return bad("CFL number must be positive".into());
        }
        if !(self.rho_min > 0.0 && self.rho_min < 1.0) {
            return bad(format!("rho_min must lie in (0, 1), got {}", self.rho_min));
        }
        Ok(())
    }
}

/// `-(1/eps) B (sigma, m)`: the stiff linear tendency.
pub fn ns_stiff_part(state: &FluidState) -> Result<WaveState> {
    let b = apply_generator(&WaveState::new(state.sigma.clone(), state.m.clone())?)?;
    Ok(b.scale(-1.0 / state.eps))
}

/// Physical-space parameters of the remainder.
struct Physics {
    law: PressureLaw,
    eps: f64,
    mu: f64,
    grad_g: Option<VectorField>,
    linear_only: bool,
    rho_min: f64,
}

/// What the remainder evaluation learns about the state on the way.
#[derive(Debug, Clone, Copy, Default)]
struct StageInfo {
    dissipation: f64,
    forcing_power: f64,
    max_speed: f64,
    min_density: f64,
}

impl Physics {
    fn new(config: &NsConfig, grid: &Arc<SlabGrid>) -> Result<Self> {
        config.validate()?;
        let grad_g = match config.forcing.potential(grid)? {
            Some(g) => {
                let gs = forward(&g)?;
                Some(VectorField::new(vec![
                    inverse(&ops::dx1_spec(&gs)),
                    inverse(&ops::dx2_spec(&gs)),
                    inverse(&ops::dx3_spec(&gs)),
                ])?)
            }
            None => None,
        };
        Ok(Physics {
            law: PressureLaw::new(config.gamma)?,
            eps: config.eps,
            mu: config.viscosity(),
            grad_g,
            linear_only: config.linear_only,
            rho_min: config.rho_min,
        })
    }

    /// Momentum tendency of the remainder, dealiased, plus diagnostics.
    fn remainder(&self, y: &WaveSpectrum, time: f64) -> Result<([SpectralField; 3], StageInfo)> {
        let g = Arc::clone(y.grid());
        let n = g.len();
        let sigma = inverse(&y.0[0]);
        let m: [ScalarField; 3] = std::array::from_fn(|i| inverse(&y.0[i + 1]));
        let eps = self.eps;
        let rho: Vec<f64> = sigma.data().iter().map(|s| 1.0 + eps * s).collect();
        let min_density = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        if !min_density.is_finite() {
            return Err(Error::Blowup { time });
        }
        if min_density <= self.rho_min {
            return Err(Error::Vacuum { min_density, time });
        }
        let u: [Vec<f64>; 3] = std::array::from_fn(|i| (0..n).map(|k| m[i].data()[k] / rho[k]).collect());
        let max_speed = (0..n)
            .map(|k| (u[0][k].powi(2) + u[1][k].powi(2) + u[2][k].powi(2)).sqrt())
            .fold(0.0, f64::max);

        let forcing_power = match &self.grad_g {
            Some(gg) => {
                let mut s = 0.0;
                for i in 0..3 {
                    s += m[i].data().iter().zip(gg.component(i).data()).map(|(a, b)| a * b).sum::<f64>();
                }
                s * g.cell_volume()
            }
            None => 0.0,
        };

        let u_hat: [SpectralField; 3] = std::array::from_fn(|i| {
            forward_unchecked(&ScalarField::from_vec(&g, u[i].clone()).expect("length"))
        });
        let mu = self.mu;
        let mut dissipation = 0.0;
        for idx in 0..n {
            let k = g.mode(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let mut kdotu = Complex64::new(0.0, 0.0);
            let mut usq = 0.0;
            for i in 0..3 {
                let c = u_hat[i].coeffs()[idx];
                kdotu += c * k[i];
                usq += c.norm_sqr();
            }
            dissipation += k2 * usq + kdotu.norm_sqr() / 3.0;
        }
        dissipation *= mu;

        let info = StageInfo {
            dissipation,
            forcing_power,
            max_speed,
            min_density,
        };
        let mut out: [SpectralField; 3] = std::array::from_fn(|_| SpectralField::zeros(&g));
        if self.linear_only {
            return Ok((out, info));
        }

        // advection: -d_j (m_i u_j), using the symmetry m_i u_j = rho u_i u_j
        let mut flux: Vec<Vec<SpectralField>> = vec![Vec::new(); 3];
        for i in 0..3 {
            for j in 0..3 {
                let f = if j < i {
                    flux[j][i].clone()
                } else {
                    let prod: Vec<f64> = (0..n).map(|k| m[i].data()[k] * u[j][k]).collect();
                    forward_unchecked(&ScalarField::from_vec(&g, prod).expect("length"))
                };
                flux[i].push(f);
            }
        }
        let r: Vec<f64> = sigma
            .data()
            .iter()
            .map(|&s| self.law.pressure_remainder(s, eps))
            .collect();
        let r_hat = forward_unchecked(&ScalarField::from_vec(&g, r).expect("length"));
        let forcing: Option<Vec<SpectralField>> = self.grad_g.as_ref().map(|gg| {
            (0..3)
                .map(|i| {
                    let prod: Vec<f64> = (0..n).map(|k| rho[k] * gg.component(i).data()[k]).collect();
                    forward_unchecked(&ScalarField::from_vec(&g, prod).expect("length"))
                })
                .collect()
        });

        for idx in 0..n {
            if !g.dealias_keep(idx) {
                continue;
            }
            let k = g.mode(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let mut kdotu = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                kdotu += u_hat[i].coeffs()[idx] * k[i];
            }
            for i in 0..3 {
                let mut adv = Complex64::new(0.0, 0.0);
                for j in 0..3 {
                    adv += I * k[j] * flux[i][j].coeffs()[idx];
                }
                let visc = -k2 * u_hat[i].coeffs()[idx] - k[i] * kdotu / 3.0;
                let mut t = -adv - I * k[i] * r_hat.coeffs()[idx] + mu * visc;
                if let Some(f) = &forcing {
                    t += f[i].coeffs()[idx];
                }
                out[i].coeffs_mut()[idx] = t;
            }
        }
        Ok((out, info))
    }
}

/// Momentum tendency `-div(m (x) u) - grad r(sigma) + mu div S + rho grad G`
/// of the current state, in physical space (dealiased).
pub fn ns_nonlinear_remainder(state: &FluidState, config: &NsConfig) -> Result<VectorField> {
    let mut cfg = config.clone();
    cfg.eps = state.eps;
    let phys = Physics::new(&cfg, state.grid())?;
    let y = to_spectrum(state)?;
    let (t, _) = phys.remainder(&y, 0.0)?;
    VectorField::new(t.iter().map(inverse).collect())
}

fn to_spectrum(state: &FluidState) -> Result<WaveSpectrum> {
    WaveState::new(state.sigma.clone(), state.m.clone())?.to_spectrum()
}

fn axpy(y: &WaveSpectrum, a: f64, k: &[SpectralField; 3]) -> WaveSpectrum {
    let mut out = y.clone();
    for i in 0..3 {
        for (o, v) in out.0[i + 1].coeffs_mut().iter_mut().zip(k[i].coeffs()) {
            *o += v * a;
        }
    }
    out
}

fn momentum_only(k: &[SpectralField; 3]) -> WaveSpectrum {
    let g = k[0].grid();
    WaveSpectrum([SpectralField::zeros(g), k[0].clone(), k[1].clone(), k[2].clone()])
}

/// Lawson-RK4 integrator: the stiff linear part is propagated exactly by
/// per-mode matrix exponentials, the remainder by RK4 in the rotating frame.
pub struct NsSolver {
    grid: Arc<SlabGrid>,
    physics: Physics,
    config: NsConfig,
    propagator: Propagator,
    tables: Option<(f64, ExponentialTable, ExponentialTable)>,
    y: WaveSpectrum,
    time: f64,
    steps: usize,
    dissipation_integral: f64,
    forcing_integral: f64,
    last_info: StageInfo,
}

impl NsSolver {
    /// The initial state is put in the symmetry class and truncated to the
    /// 2/3 band. A propagator built for the same grid may be shared between
    /// solvers.
    pub fn new(state: &FluidState, config: &NsConfig, propagator: Option<&Propagator>) -> Result<Self> {
        let grid = Arc::clone(state.grid());
        if grid.is_planar() {
            return Err(Error::InvalidParameter("the fluid solver needs a slab grid".into()));
        }
        let mut config = config.clone();
        config.eps = state.eps;
        let physics = Physics::new(&config, &grid)?;
        state.check_finite()?;
        let propagator = match propagator {
            Some(p) => {
                crate::field::same_grid(p.grid(), &grid)?;
                p.clone()
            }
            None => Propagator::cached(&grid),
        };
        let (s, m) = enforce_symmetry_class(&state.sigma, &state.m)?;
        let mut y = to_spectrum(&FluidState::new(s, m, state.eps)?)?;
        for f in y.0.iter_mut() {
            f.dealias();
        }
        let mut solver = NsSolver {
            grid,
            physics,
            config,
            propagator,
            tables: None,
            y,
            time: 0.0,
            steps: 0,
            dissipation_integral: 0.0,
            forcing_integral: 0.0,
            last_info: StageInfo::default(),
        };
        let (_, info) = solver.physics.remainder(&solver.y, 0.0)?;
        solver.last_info = info;
        Ok(solver)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        &self.grid
    }

    pub fn law(&self) -> &PressureLaw {
        &self.physics.law
    }

    pub fn viscosity(&self) -> f64 {
        self.physics.mu
    }

    pub fn state(&self) -> FluidState {
        let w = self.y.to_state();
        FluidState {
            sigma: w.s,
            m: w.v,
            eps: self.physics.eps,
        }
    }

    /// `int_0^t mu int (|grad u|^2 + (1/3)(div u)^2)` accumulated so far.
    pub fn dissipation_integral(&self) -> f64 {
        self.dissipation_integral
    }

    /// `int_0^t int m . grad G` accumulated so far.
    pub fn forcing_integral(&self) -> f64 {
        self.forcing_integral
    }

    pub fn max_speed(&self) -> f64 {
        self.last_info.max_speed
    }

    pub fn min_density(&self) -> f64 {
        self.last_info.min_density
    }

    /// `C * min(dx / max|u|, dx^2 / mu)`.
    pub fn dt_limit(&self) -> f64 {
        let g = &self.grid;
        let dx = g.dx().min(g.dy()).min(g.dz());
        let adv = if self.last_info.max_speed > 0.0 {
            dx / self.last_info.max_speed
        } else {
            f64::INFINITY
        };
        let visc = if self.physics.mu > 0.0 {
            dx * dx / self.physics.mu
        } else {
            f64::INFINITY
        };
        self.config.cfl * adv.min(visc)
    }

    fn ensure_tables(&mut self, dt: f64) {
        let fresh = !matches!(&self.tables, Some((h, _, _)) if *h == dt);
        if fresh {
            let eps = self.physics.eps;
            let half = self.propagator.exponential_table(0.5 * dt / eps);
            let full = self.propagator.exponential_table(dt / eps);
            self.tables = Some((dt, half, full));
        }
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let limit = self.dt_limit();
        if dt > limit {
            return Err(Error::Cfl {
                dt,
                limit,
                max_speed: self.last_info.max_speed,
            });
        }
        self.ensure_tables(dt);
        let t = self.time;
        let y0 = &self.y;
        let (_, eh, ef) = self.tables.as_ref().expect("tables are set");
        let (k1, i1) = self.physics.remainder(y0, t)?;
        let y0_half = eh.applied(y0);
        let y0_full = ef.applied(y0);

        let s2 = eh.applied(&axpy(y0, 0.5 * dt, &k1));
        let (k2, i2) = self.physics.remainder(&s2, t + 0.5 * dt)?;
        let s3 = axpy(&y0_half, 0.5 * dt, &k2);
        let (k3, i3) = self.physics.remainder(&s3, t + 0.5 * dt)?;
        let k3_half = eh.applied(&momentum_only(&k3));
        let mut s4 = y0_full.clone();
        for c in 0..4 {
            for (o, v) in s4.0[c].coeffs_mut().iter_mut().zip(k3_half.0[c].coeffs()) {
                *o += v * dt;
            }
        }
        let (k4, i4) = self.physics.remainder(&s4, t + dt)?;

        let k1f = ef.applied(&momentum_only(&k1));
        let k23 = {
            let mut s = momentum_only(&k2);
            for i in 0..3 {
                for (o, v) in s.0[i + 1].coeffs_mut().iter_mut().zip(k3[i].coeffs()) {
                    *o += v;
                }
            }
            eh.applied(&s)
        };
        let mut next = y0_full;
        for c in 0..4 {
            let k4c = if c == 0 { None } else { Some(k4[c - 1].coeffs()) };
            for (idx, o) in next.0[c].coeffs_mut().iter_mut().enumerate() {
                let mut inc = k1f.0[c].coeffs()[idx] + 2.0 * k23.0[c].coeffs()[idx];
                if let Some(k4c) = k4c {
                    inc += k4c[idx];
                }
                *o += inc * (dt / 6.0);
            }
        }
        if next.0.iter().any(|f| f.coeffs().iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::Blowup { time: t + dt });
        }

        let w = dt / 6.0;
        self.dissipation_integral +=
            w * (i1.dissipation + 2.0 * i2.dissipation + 2.0 * i3.dissipation + i4.dissipation);
        self.forcing_integral +=
            w * (i1.forcing_power + 2.0 * i2.forcing_power + 2.0 * i3.forcing_power + i4.forcing_power);

        self.y = next;
        self.time = t + dt;
        self.steps += 1;
        if self.config.symmetry_every > 0 && self.steps % self.config.symmetry_every == 0 {
            let st = self.state();
            let (s, m) = enforce_symmetry_class(&st.sigma, &st.m)?;
            self.y = to_spectrum(&FluidState::new(s, m, st.eps)?)?;
            for f in self.y.0.iter_mut() {
                f.dealias();
            }
        }
        let (_, info) = self.physics.remainder(&self.y, self.time)?;
        self.last_info = info;
        Ok(())
    }
}

/// One Lawson-RK4 step of size `dt` from `state`.
pub fn step_ns(state: &FluidState, dt: f64, config: &NsConfig) -> Result<FluidState> {
    let mut s = NsSolver::new(state, config, None)?;
    s.step(dt)?;
    Ok(s.state())
}

#[derive(Debug, Clone)]
pub struct NsTrajectory {
    pub eps: f64,
    pub mu: f64,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Running `int_0^t` of viscous dissipation and of forcing power.
    pub dissipation: Vec<f64>,
    pub forcing: Vec<f64>,
    pub mass: Vec<f64>,
    /// `||sqrt(rho) u||_L2`.
    pub kinetic: Vec<f64>,
    /// `||chi(rho) sigma||_L2`.
    pub sigma_ess: Vec<f64>,
    /// `int (1 - chi(rho))`.
    pub residual_mass: Vec<f64>,
    pub min_density: Vec<f64>,
    pub symmetry_defect: Vec<f64>,
    pub snapshots: Vec<(f64, FluidState)>,
    pub final_state: FluidState,
    pub abort_reason: Option<String>,
}

impl NsTrajectory {
    /// Worst `(E(t) - E(0) + D(t) - F(t)) / (t E(0))` over the recorded
    /// times. Positive values measure how much the discrete energy balance
    /// exceeds the inequality.
    pub fn energy_residual_rate(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        (1..self.times.len())
            .map(|n| {
                (self.energy[n] - e0 + self.dissipation[n] - self.forcing[n]) / (self.times[n] * e0)
            })
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }

    /// Same quantity without the one-sided clamp, in absolute value.
    pub fn energy_balance_defect(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        (1..self.times.len())
            .map(|n| {
                ((self.energy[n] - e0 + self.dissipation[n] - self.forcing[n]) / (self.times[n] * e0)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> Vec<String> {
        [
            "t",
            "energy",
            "dissipation",
            "forcing",
            "mass",
            "kinetic",
            "sigma_ess",
            "residual_mass",
            "min_density",
            "symmetry_defect",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| {
                vec![
                    self.times[i],
                    self.energy[i],
                    self.dissipation[i],
                    self.forcing[i],
                    self.mass[i],
                    self.kinetic[i],
                    self.sigma_ess[i],
                    self.residual_mass[i],
                    self.min_density[i],
                    self.symmetry_defect[i],
                ]
            })
            .collect()
    }
}

/// Integrate from `initial` to `config.t_end`.
///
/// Solver failures (CFL, vacuum, blow-up) end the run early; the trajectory
/// then carries the reason and the last good state.
pub fn run_ns(initial: &FluidState, config: &NsConfig, propagator: Option<&Propagator>) -> Result<NsTrajectory> {
    let mut solver = NsSolver::new(initial, config, propagator)?;
    let spec = EssResSpec::default();
    let law = *solver.law();
    let n = (config.t_end / config.dt).ceil() as usize;
    let h = if n > 0 { config.t_end / n as f64 } else { 0.0 };
    let stride = config.snapshot_stride.max(1);

    let first = solver.state();
    let mut tr = NsTrajectory {
        eps: initial.eps,
        mu: solver.viscosity(),
        times: Vec::new(),
        energy: Vec::new(),
        dissipation: Vec::new(),
        forcing: Vec::new(),
        mass: Vec::new(),
        kinetic: Vec::new(),
        sigma_ess: Vec::new(),
        residual_mass: Vec::new(),
        min_density: Vec::new(),
        symmetry_defect: Vec::new(),
        snapshots: vec![(0.0, first.clone())],
        final_state: first,
        abort_reason: None,
    };
    let record = |tr: &mut NsTrajectory, s: &NsSolver| -> Result<FluidState> {
        let st = s.state();
        let rho = st.density();
        let chi = rho.map(|r| spec.chi(r));
        tr.times.push(s.time());
        tr.energy.push(st.energy(&law));
        tr.dissipation.push(s.dissipation_integral());
        tr.forcing.push(s.forcing_integral());
        tr.mass.push(st.mass());
        tr.kinetic.push(st.sqrt_rho_u()?.l2_norm());
        tr.sigma_ess.push(st.sigma.mul(&chi)?.l2_norm());
        tr.residual_mass.push(chi.map(|c| 1.0 - c).integral());
        tr.min_density.push(rho.min());
        tr.symmetry_defect.push(st.symmetry_defect());
        Ok(st)
    };
    record(&mut tr, &solver)?;
    for k in 1..=n {
        if let Err(e) = solver.step(h) {
            log::error!("fluid run (eps = {}) stopped at t = {:.6}: {e}", initial.eps, solver.time());
            tr.abort_reason = Some(e.to_string());
            break;
        }
        let st = record(&mut tr, &solver)?;
        if k % stride == 0 || k == n {
            tr.snapshots.push((solver.time(), st));
        }
    }
    tr.final_state = solver.state();
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{band_limited_field, random_vector};
    use std::f64::consts::PI;

    fn grid() -> Arc<SlabGrid> {
        Arc::new(SlabGrid::new(2.0 * PI, 16, 16, 8).unwrap())
    }

    fn smooth_state(g: &Arc<SlabGrid>, eps: f64, amp: f64) -> FluidState {
        let rho1 = band_limited_field(g, 1, 0.8).scale(amp * 20.0);
        let u = random_vector(g, 2, 3);
        let u = VectorField::new(
            u.components()
                .iter()
                .map(|c| band_limited_field(g, 7 + c.data().len() as u64 % 3, 0.8))
                .collect(),
        )
        .unwrap();
        let u = u.scale(amp * 20.0);
        let (r, u) = enforce_symmetry_class(&rho1, &u).unwrap();
        FluidState::from_primitive(&r, &u, eps).unwrap()
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let g = grid();
        let s = FluidState::rest(&g, 0.1).unwrap();
        let cfg = NsConfig::default();
        let tr = run_ns(&s, &NsConfig { t_end: 0.1, ..cfg }, None).unwrap();
        assert!(tr.final_state.sigma.sup_norm() == 0.0);
        assert!(tr.final_state.m.sup_norm() == 0.0);
    }

    #[test]
    fn rest_state_remainder_is_forcing_gradient() {
        let g = grid();
        let s = FluidState::rest(&g, 0.3).unwrap();
        let cfg = NsConfig {
            forcing: Forcing::GaussianHill {
                amplitude: 0.5,
                width: 2.0,
            },
            ..NsConfig::default()
        };
        let r = ns_nonlinear_remainder(&s, &cfg).unwrap();
        let gpot = cfg.forcing.potential(&g).unwrap().unwrap();
        let mut gx = ops::dx1_spec(&forward(&gpot).unwrap());
        gx.dealias();
        assert!(r.component(0).sub(&inverse(&gx)).unwrap().sup_norm() < 1e-14);
        assert!(r.component(2).sup_norm() < 1e-12);
    }

    #[test]
    fn stiff_part_of_constant_density_vanishes() {
        let g = grid();
        let s = FluidState::new(ScalarField::constant(&g, 0.7), VectorField::zeros(&g, 3), 0.2).unwrap();
        assert!(ns_stiff_part(&s).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn stiff_plus_remainder_matches_primitive_form() {
        // d(rho u)/dt from the momentum equation in (rho, u) form, assembled
        // with physical-space operators, against the split used by the solver
        let g = Arc::new(SlabGrid::new(2.0 * PI, 32, 32, 8).unwrap());
        let eps = 1.0;
        let st = smooth_state(&g, eps, 0.01);
        let cfg = NsConfig {
            eps,
            gamma: 1.7,
            mu: Some(0.05),
            ..NsConfig::default()
        };
        let law = PressureLaw::new(cfg.gamma).unwrap();
        let rho = st.density();
        let u = st.velocity().unwrap();
        let mut expected = Vec::new();
        let div_u = ops::div(&u).unwrap();
        let grad_div = [
            ops::grad_h(&div_u).unwrap().component(0).clone(),
            ops::grad_h(&div_u).unwrap().component(1).clone(),
            ops::d_x3(&div_u).unwrap(),
        ];
        let p = rho.map(|r| law.p(r));
        let grad_p = [
            ops::grad_h(&p).unwrap().component(0).clone(),
            ops::grad_h(&p).unwrap().component(1).clone(),
            ops::d_x3(&p).unwrap(),
        ];
        let coriolis = [u.component(1).scale(-1.0), u.component(0).clone(), ScalarField::zeros(&g)];
        for i in 0..3 {
            let flux = VectorField::new((0..3).map(|j| st.m.component(i).mul(u.component(j)).unwrap()).collect())
                .unwrap();
            let adv = ops::div(&flux).unwrap();
            let lap = inverse(&ops::laplace_spec(&forward(u.component(i)).unwrap()));
            let visc = lap.add(&grad_div[i].scale(1.0 / 3.0)).unwrap().scale(0.05);
            let rot = rho.mul(&coriolis[i]).unwrap().scale(1.0 / eps);
            let t = adv
                .scale(-1.0)
                .sub(&rot)
                .unwrap()
                .sub(&grad_p[i].scale(1.0 / (eps * eps)))
                .unwrap()
                .add(&visc)
                .unwrap();
            expected.push(t);
        }
        let stiff = ns_stiff_part(&st).unwrap();
        let rem = ns_nonlinear_remainder(&st, &cfg).unwrap();
        for i in 0..3 {
            let got = stiff.v.component(i).add(rem.component(i)).unwrap();
            let err = got.sub(&expected[i]).unwrap().sup_norm();
            // the solver dealiases products, the reference does not
            assert!(err < 1e-5 * expected[i].sup_norm(), "component {i}: {err}");
        }
    }

    #[test]
    fn linear_only_matches_wave_propagator() {
        let g = grid();
        let st = smooth_state(&g, 0.3, 0.01);
        let cfg = NsConfig {
            eps: 0.3,
            mu: Some(0.0),
            linear_only: true,
            t_end: 0.5,
            dt: 0.05,
            symmetry_every: 0,
            ..NsConfig::default()
        };
        let tr = run_ns(&st, &cfg, None).unwrap();
        // the solver truncates to the 2/3 band first; compare on that state
        let start = &tr.snapshots[0].1;
        let w = WaveState::new(start.sigma.clone(), start.m.clone()).unwrap();
        let exact = Propagator::new(&g).propagate(&w, 0.5, 0.3).unwrap();
        let d = exact.s.sub(&tr.final_state.sigma).unwrap().sup_norm();
        assert!(d < 1e-10 * exact.s.sup_norm().max(1.0), "{d}");
    }

    #[test]
    fn mass_is_conserved_and_symmetry_kept() {
        let g = grid();
        let st = smooth_state(&g, 0.2, 0.02);
        let cfg = NsConfig {
            eps: 0.2,
            t_end: 0.2,
            dt: 0.01,
            ..NsConfig::default()
        };
        let tr = run_ns(&st, &cfg, None).unwrap();
        assert!(tr.abort_reason.is_none());
        assert!(tr.mass_drift() < 1e-12);
        assert!(tr.symmetry_defect.iter().all(|d| *d < 1e-10));
    }

    #[test]
    fn second_order_or_better_in_time() {
        let g = grid();
        let st = smooth_state(&g, 0.2, 0.02);
        let t = 0.2;
        let run = |n: usize| {
            let cfg = NsConfig {
                eps: 0.2,
                t_end: t,
                dt: t / n as f64,
                symmetry_every: 0,
                ..NsConfig::default()
            };
            run_ns(&st, &cfg, None).unwrap().final_state
        };
        let reference = run(128);
        let e1 = run(4).m.sub(&reference.m).unwrap().l2_norm();
        let e2 = run(8).m.sub(&reference.m).unwrap().l2_norm();
        let order = (e1 / e2).log2();
        assert!(order >= 2.0, "order {order} ({e1}, {e2})");
    }

    #[test]
    fn vacuum_and_cfl_are_detected() {
        let g = grid();
        let rho1 = ScalarField::from_fn(&g, |x, _, _| -0.9 / 0.5 * (-(x * x)).exp());
        assert!(FluidState::from_primitive(&rho1, &VectorField::zeros(&g, 3), 0.6).is_err());

        let st = smooth_state(&g, 0.2, 0.05);
        let mut s = NsSolver::new(&st, &NsConfig::default(), None).unwrap();
        let lim = s.dt_limit();
        assert!(matches!(s.step(2.0 * lim), Err(Error::Cfl { .. })));
    }
}
