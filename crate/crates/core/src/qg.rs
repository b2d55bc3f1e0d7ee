//! Quasi-geostrophic limit equation on the horizontal torus
//!
//! ```text
//! d/dt (lap_h q - q) + v . grad_h (lap_h q - q) = 0,   v = perp_grad_h q.
//! ```
//!
//! The prognostic variable is the potential vorticity `P = lap_h q - q`,
//! advanced with classical RK4. Its spectrum is kept inside the 2/3 band, so
//! the dealiased Jacobian is an exact Galerkin truncation and conserves both
//! `int |grad q|^2 + q^2` and `int P^2` up to time-stepping error.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpectralField, VectorField};
use crate::grid::SlabGrid;
use crate::ops;
use crate::random::band_limited_field;
use crate::transform::{forward, forward_unchecked, inverse};
use num_complex::Complex64;
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct LimitState {
    pub q: ScalarField,
}

impl LimitState {
    pub fn new(q: ScalarField) -> Result<Self> {
        if !q.grid().is_planar() {
            return Err(Error::InvalidParameter(
                "the limit state lives on the horizontal plane".into(),
            ));
        }
        q.check_finite("limit state")?;
        Ok(LimitState { q })
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        self.q.grid()
    }

    pub fn velocity(&self) -> Result<VectorField> {
        ops::perp_grad_h(&self.q)
    }

    pub fn potential_vorticity(&self) -> Result<ScalarField> {
        helmholtz(&self.q)
    }

    /// `int (|grad_h q|^2 + q^2)`.
    pub fn energy(&self) -> Result<f64> {
        Ok(energy_spec(&forward(&self.q)?))
    }
}

/// `lap_h q - q`.
pub fn helmholtz(q: &ScalarField) -> Result<ScalarField> {
    Ok(inverse(&helmholtz_spec(&forward(q)?)))
}

/// Inverse of [`helmholtz`]: `q_hat = -P_hat / (1 + |xi|^2)`.
pub fn invert_helmholtz(p: &ScalarField) -> Result<ScalarField> {
    Ok(inverse(&invert_helmholtz_spec(&forward(p)?)))
}

fn helmholtz_spec(q: &SpectralField) -> SpectralField {
    q.multiplier(|[a, b, _]| Complex64::new(-(1.0 + a * a + b * b), 0.0))
}

fn invert_helmholtz_spec(p: &SpectralField) -> SpectralField {
    p.multiplier(|[a, b, _]| Complex64::new(-1.0 / (1.0 + a * a + b * b), 0.0))
}

fn energy_spec(q: &SpectralField) -> f64 {
    let g = q.grid();
    q.coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let [a, b, _] = g.mode(idx);
            (1.0 + a * a + b * b) * c.norm_sqr()
        })
        .sum()
}

/// `-(v . grad f)` with `v = perp_grad_h q`, dealiased.
fn advection_spec(q: &SpectralField, f: &SpectralField) -> SpectralField {
    let v1 = inverse(&q.multiplier(|[_, b, _]| -I * b));
    let v2 = inverse(&q.multiplier(|[a, _, _]| I * a));
    let fx = inverse(&f.multiplier(|[a, _, _]| I * a));
    let fy = inverse(&f.multiplier(|[_, b, _]| I * b));
    let prod: Vec<f64> = (0..v1.data().len())
        .map(|i| -(v1.data()[i] * fx.data()[i] + v2.data()[i] * fy.data()[i]))
        .collect();
    let prod = ScalarField::from_vec(q.grid(), prod).expect("same grid");
    let mut out = forward_unchecked(&prod);
    out.dealias();
    out
}

fn rhs_spec(p: &SpectralField) -> SpectralField {
    advection_spec(&invert_helmholtz_spec(p), p)
}

/// Time derivative of `P = lap_h q - q`: `-v . grad_h P`.
pub fn qg_rhs(state: &LimitState) -> Result<ScalarField> {
    let q = forward(&state.q)?;
    Ok(inverse(&advection_spec(&q, &helmholtz_spec(&q))))
}

/// Same tendency written with `lap_h q` in place of `P`; the two agree
/// because `perp_grad q . grad q = 0`.
pub fn qg_rhs_laplacian_form(state: &LimitState) -> Result<ScalarField> {
    let q = forward(&state.q)?;
    Ok(inverse(&advection_spec(&q, &ops::laplace_h_spec(&q))))
}

#[derive(Debug, Clone)]
pub struct QgOptions {
    /// Courant number `C` in `dt <= C dx / max|v|`.
    pub cfl: f64,
    /// Apply an exponential spectral filter after each step. This departs
    /// from the inviscid equation and is off by default.
    pub filter: bool,
}

impl Default for QgOptions {
    fn default() -> Self {
        QgOptions {
            cfl: 0.5,
            filter: false,
        }
    }
}

/// RK4 integrator holding the potential vorticity in spectral form.
#[derive(Debug, Clone)]
pub struct QgSolver {
    p: SpectralField,
    time: f64,
    options: QgOptions,
    filter: Option<Vec<f64>>,
}

impl QgSolver {
    /// The initial potential vorticity is truncated to the 2/3 band.
    pub fn new(state: &LimitState, options: QgOptions) -> Result<Self> {
        if !(options.cfl > 0.0) {
            return Err(Error::InvalidParameter("CFL number must be positive".into()));
        }
        let mut p = helmholtz_spec(&forward(&state.q)?);
        p.dealias();
        let filter = options.filter.then(|| spectral_filter(p.grid()));
        Ok(QgSolver {
            p,
            time: 0.0,
            options,
            filter,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        self.p.grid()
    }

    pub fn state(&self) -> LimitState {
        LimitState {
            q: inverse(&invert_helmholtz_spec(&self.p)),
        }
    }

    pub fn energy(&self) -> f64 {
        energy_spec(&invert_helmholtz_spec(&self.p))
    }

    pub fn pv_l2(&self) -> f64 {
        self.p.energy().sqrt()
    }

    pub fn pv_lp(&self, p: f64) -> f64 {
        inverse(&self.p).lp_norm(p)
    }

    pub fn pv_mean(&self) -> f64 {
        inverse(&self.p).mean()
    }

    /// Fraction of `int P^2` in the top sixth of the retained band.
    pub fn tail_fraction(&self) -> f64 {
        let g = self.grid();
        let total = self.p.energy();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = self
            .p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(idx, _)| g.in_spectral_tail(*idx))
            .map(|(_, c)| c.norm_sqr())
            .sum();
        tail / total
    }

    pub fn max_speed(&self) -> f64 {
        let q = invert_helmholtz_spec(&self.p);
        let v1 = inverse(&q.multiplier(|[_, b, _]| -I * b));
        let v2 = inverse(&q.multiplier(|[a, _, _]| I * a));
        v1.data()
            .iter()
            .zip(v2.data())
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }

    /// Largest step allowed by the advective CFL condition.
    pub fn dt_limit(&self) -> f64 {
        let g = self.grid();
        let dx = g.dx().min(g.dy());
        let v = self.max_speed();
        if v > 0.0 {
            self.options.cfl * dx / v
        } else {
            f64::INFINITY
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
                max_speed: self.max_speed(),
            });
        }
        let p0 = &self.p;
        let k1 = rhs_spec(p0);
        let k2 = rhs_spec(&axpy(p0, 0.5 * dt, &k1));
        let k3 = rhs_spec(&axpy(p0, 0.5 * dt, &k2));
        let k4 = rhs_spec(&axpy(p0, dt, &k3));
        let mut next = p0.clone();
        for (i, c) in next.coeffs_mut().iter_mut().enumerate() {
            *c += (k1.coeffs()[i] + 2.0 * k2.coeffs()[i] + 2.0 * k3.coeffs()[i] + k4.coeffs()[i]) * (dt / 6.0);
        }
        if let Some(f) = &self.filter {
            for (c, w) in next.coeffs_mut().iter_mut().zip(f) {
                *c *= *w;
            }
        }
        if next.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Blowup { time: self.time + dt });
        }
        self.p = next;
        self.time += dt;
        Ok(())
    }
}

fn axpy(x: &SpectralField, a: f64, y: &SpectralField) -> SpectralField {
    let mut out = x.clone();
    for (o, v) in out.coeffs_mut().iter_mut().zip(y.coeffs()) {
        *o += v * a;
    }
    out
}

/// `exp(-36 (|m| / m_max)^36)` per axis, relative to the retained band.
fn spectral_filter(g: &SlabGrid) -> Vec<f64> {
    (0..g.len())
        .map(|idx| {
            let [a, b, _] = g.mode_numbers(idx);
            let ma = (g.nx() / 3).max(1) as f64;
            let mb = (g.ny() / 3).max(1) as f64;
            let s = (a.unsigned_abs() as f64 / ma).powi(36) + (b.unsigned_abs() as f64 / mb).powi(36);
            (-36.0 * s).exp()
        })
        .collect()
}

/// One RK4 step from a physical state.
pub fn step(state: &LimitState, dt: f64) -> Result<LimitState> {
    let mut s = QgSolver::new(state, QgOptions::default())?;
    s.step(dt)?;
    Ok(s.state())
}

#[derive(Debug, Clone)]
pub struct QgTrajectory {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub pv_l2: Vec<f64>,
    pub pv_l4: Vec<f64>,
    pub pv_mean: Vec<f64>,
    pub tail_fraction: Vec<f64>,
    /// `(t, q)` every `snapshot_stride` steps, first and last always kept.
    pub snapshots: Vec<(f64, LimitState)>,
    pub final_state: LimitState,
    pub under_resolved: bool,
    /// Set when the run stopped early; `final_state` is then the last good
    /// state.
    pub abort_reason: Option<String>,
}

/// Tail fraction above which a run is reported as under-resolved.
pub const TAIL_THRESHOLD: f64 = 1e-6;

impl QgTrajectory {
    fn relative_drift(series: &[f64]) -> f64 {
        let Some(&first) = series.first() else {
            return 0.0;
        };
        let scale = first.abs().max(f64::MIN_POSITIVE);
        series.iter().map(|v| (v - first).abs() / scale).fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        Self::relative_drift(&self.energy)
    }

    pub fn pv_l2_drift(&self) -> f64 {
        Self::relative_drift(&self.pv_l2)
    }

    pub fn pv_l4_drift(&self) -> f64 {
        Self::relative_drift(&self.pv_l4)
    }

    pub fn csv_header(&self) -> Vec<String> {
        ["t", "energy", "pv_l2", "pv_l4", "pv_mean", "tail_fraction"]
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
                    self.pv_l2[i],
                    self.pv_l4[i],
                    self.pv_mean[i],
                    self.tail_fraction[i],
                ]
            })
            .collect()
    }
}

/// Integrate to time `t_end` with steps of at most `dt` (the last one is
/// shortened to land on `t_end` exactly).
pub fn run_qg(q0: &LimitState, t_end: f64, dt: f64, snapshot_stride: usize, options: QgOptions) -> Result<QgTrajectory> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("final time must be non-negative, got {t_end}")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let stride = snapshot_stride.max(1);
    let mut solver = QgSolver::new(q0, options)?;
    let n = (t_end / dt).ceil() as usize;
    let h = if n > 0 { t_end / n as f64 } else { 0.0 };

    let mut tr = QgTrajectory {
        times: Vec::with_capacity(n + 1),
        energy: Vec::with_capacity(n + 1),
        pv_l2: Vec::with_capacity(n + 1),
        pv_l4: Vec::with_capacity(n + 1),
        pv_mean: Vec::with_capacity(n + 1),
        tail_fraction: Vec::with_capacity(n + 1),
        snapshots: Vec::new(),
        final_state: solver.state(),
        under_resolved: false,
        abort_reason: None,
    };
    let record = |tr: &mut QgTrajectory, s: &QgSolver| {
        tr.times.push(s.time());
        tr.energy.push(s.energy());
        tr.pv_l2.push(s.pv_l2());
        tr.pv_l4.push(s.pv_lp(4.0));
        tr.pv_mean.push(s.pv_mean());
        let tail = s.tail_fraction();
        tr.tail_fraction.push(tail);
        if tail > TAIL_THRESHOLD {
            tr.under_resolved = true;
        }
    };
    record(&mut tr, &solver);
    tr.snapshots.push((0.0, solver.state()));
    for k in 1..=n {
        if let Err(e) = solver.step(h) {
            log::error!("QG run stopped at t = {:.6}: {e}", solver.time());
            tr.abort_reason = Some(e.to_string());
            break;
        }
        record(&mut tr, &solver);
        if k % stride == 0 || k == n {
            tr.snapshots.push((solver.time(), solver.state()));
        }
    }
    tr.final_state = solver.state();
    if tr.under_resolved {
        log::warn!("QG run under-resolved: spectral tail fraction exceeded {TAIL_THRESHOLD:e}");
    }
    Ok(tr)
}

/// Built-in initial conditions.
pub mod presets {
    use super::*;

    /// `amplitude * exp(-|x|^2 / (2 width^2))`, centred at the origin.
    pub fn gaussian_monopole(plane: &Arc<SlabGrid>, amplitude: f64, width: f64) -> LimitState {
        LimitState {
            q: ScalarField::from_fn(plane, |x, y, _| {
                amplitude * (-(x * x + y * y) / (2.0 * width * width)).exp()
            }),
        }
    }

    /// Two opposite Gaussian vortices separated along `x1`.
    pub fn dipole(plane: &Arc<SlabGrid>, amplitude: f64, width: f64, separation: f64) -> LimitState {
        let d = 0.5 * separation;
        LimitState {
            q: ScalarField::from_fn(plane, |x, y, _| {
                let w2 = 2.0 * width * width;
                amplitude * ((-((x - d).powi(2) + y * y) / w2).exp() - (-((x + d).powi(2) + y * y) / w2).exp())
            }),
        }
    }

    /// Two same-sign vortices, offset so that they co-rotate.
    pub fn vortex_pair(plane: &Arc<SlabGrid>, amplitude: f64, width: f64, separation: f64) -> LimitState {
        let d = 0.5 * separation;
        LimitState {
            q: ScalarField::from_fn(plane, |x, y, _| {
                let w2 = 2.0 * width * width;
                amplitude * ((-((x - d).powi(2) + (y - 0.3 * d).powi(2)) / w2).exp()
                    + 0.7 * (-((x + d).powi(2) + (y + 0.3 * d).powi(2)) / w2).exp())
            }),
        }
    }

    /// Seeded band-limited random field with `sup |q| = amplitude`.
    pub fn random_band_limited(plane: &Arc<SlabGrid>, seed: u64, width: f64, amplitude: f64) -> LimitState {
        let f = band_limited_field(plane, seed, width);
        let s = f.sup_norm();
        LimitState {
            q: if s > 0.0 { f.scale(amplitude / s) } else { f },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;
    use std::f64::consts::PI;

    fn plane(n: usize) -> Arc<SlabGrid> {
        Arc::new(SlabGrid::new(2.0 * PI, n, n, 4).unwrap().plane())
    }

    #[test]
    fn radial_vortex_is_steady() {
        let g = plane(64);
        let s = gaussian_monopole(&g, 1.0, 1.0);
        assert!(qg_rhs(&s).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn single_mode_is_steady() {
        let g = plane(32);
        let s = LimitState::new(ScalarField::from_fn(&g, |x, y, _| (x + 0.5 * y).cos())).unwrap();
        assert!(qg_rhs(&s).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn both_forms_agree() {
        let g = plane(32);
        let s = random_band_limited(&g, 3, 1.5, 1.0);
        let a = qg_rhs(&s).unwrap();
        let b = qg_rhs_laplacian_form(&s).unwrap();
        assert!(a.sub(&b).unwrap().sup_norm() < 1e-12 * a.sup_norm().max(1.0));
    }

    #[test]
    fn jacobian_antisymmetry() {
        let g = plane(32);
        let mut s = random_band_limited(&g, 4, 1.0, 1.0);
        // keep everything in the retained band so the identity is exact
        let mut qh = forward(&s.q).unwrap();
        qh.dealias();
        s.q = inverse(&qh);
        let q = forward(&s.q).unwrap();
        let p = helmholtz_spec(&q);
        let a = inverse(&advection_spec(&q, &p)).inner(&s.q).unwrap();
        let b = inverse(&advection_spec(&q, &q)).inner(&inverse(&p)).unwrap();
        // int q (v.grad P) = - int P (v.grad q)
        assert!((a + b).abs() < 1e-10 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn helmholtz_inversion() {
        // fundamental wavenumber sqrt(3), so |xi0|^2 = 3 is the first mode
        let r3 = 3f64.sqrt();
        let h = Arc::new(SlabGrid::new(PI / r3, 16, 16, 4).unwrap().plane());
        let p = ScalarField::from_fn(&h, |x, _, _| -(r3 * x).cos());
        let q = invert_helmholtz(&p).unwrap();
        let expect = ScalarField::from_fn(&h, |x, _, _| (r3 * x).cos() / 4.0);
        assert!(q.sub(&expect).unwrap().sup_norm() < 1e-14);
        let g = plane(32);
        let c = ScalarField::constant(&g, 2.5);
        assert!((invert_helmholtz(&c).unwrap().mean() + 2.5).abs() < 1e-14);
        let f = random_band_limited(&g, 1, 1.0, 1.0).q;
        let back = helmholtz(&invert_helmholtz(&f).unwrap()).unwrap();
        assert!(back.sub(&f).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = plane(32);
        let s = gaussian_monopole(&g, 5.0, 0.8);
        let mut solver = QgSolver::new(&s, QgOptions::default()).unwrap();
        let limit = solver.dt_limit();
        match solver.step(2.0 * limit) {
            Err(Error::Cfl { max_speed, .. }) => assert!(max_speed > 0.0),
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let g = plane(32);
        let s = vortex_pair(&g, 1.0, 0.9, 2.5);
        let t = 0.4;
        let run = |n: usize| {
            let mut sol = QgSolver::new(&s, QgOptions::default()).unwrap();
            for _ in 0..n {
                sol.step(t / n as f64).unwrap();
            }
            sol.state().q
        };
        let reference = run(256);
        let e1 = run(8).sub(&reference).unwrap().l2_norm();
        let e2 = run(16).sub(&reference).unwrap().l2_norm();
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn short_run_conserves() {
        let g = plane(64);
        let s = vortex_pair(&g, 1.0, 0.9, 2.5);
        let dt = 0.5 * QgSolver::new(&s, QgOptions::default()).unwrap().dt_limit();
        let tr = run_qg(&s, 1.0, dt, 5, QgOptions::default()).unwrap();
        assert!(tr.abort_reason.is_none());
        assert!(tr.energy_drift() < 1e-8, "{}", tr.energy_drift());
        assert!(tr.pv_l2_drift() < 1e-8);
        assert!(tr.pv_mean.iter().all(|m| (m - tr.pv_mean[0]).abs() < 1e-13));
        assert_eq!(tr.snapshots.first().unwrap().0, 0.0);
        assert!((tr.snapshots.last().unwrap().0 - 1.0).abs() < 1e-12);
    }
}
