//! Relative entropy, essential/residual splitting, uniform-bound monitors and
//! the distance between a compressible run and its quasi-geostrophic limit.

use crate::cutoff::smooth_step;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::ns::{FluidState, NsTrajectory, PressureLaw};
use crate::qg::{LimitState, QgTrajectory};
use crate::wave::{fit_power_law, Propagator, WaveState};

/// Cut-off `chi` with `chi = 1` on `[1 - a, 1 + a]` and support in
/// `[1 - 2a, 1 + 2a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssResSpec {
    pub a: f64,
}

impl Default for EssResSpec {
    fn default() -> Self {
        EssResSpec { a: 0.25 }
    }
}

impl EssResSpec {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 0.5) {
            return Err(Error::InvalidParameter(format!("cut-off width must lie in (0, 1/2), got {a}")));
        }
        Ok(EssResSpec { a })
    }

    pub fn chi(&self, rho: f64) -> f64 {
        smooth_step((2.0 * self.a - (rho - 1.0).abs()) / self.a)
    }
}

/// `(chi(rho) f, (1 - chi(rho)) f)`.
pub fn ess_res_split(f: &ScalarField, rho: &ScalarField, spec: &EssResSpec) -> Result<(ScalarField, ScalarField)> {
    let ess = f.zip_map(rho, |v, r| spec.chi(r) * v)?;
    let res = f.sub(&ess)?;
    Ok((ess, res))
}

/// Pointwise `H(rho) - H'(r)(rho - r) - H(r)`.
pub fn free_energy_distance(rho: &ScalarField, r: &ScalarField, law: &PressureLaw) -> Result<ScalarField> {
    rho.zip_map(r, |a, b| law.bregman(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelEntropyParts {
    pub kinetic: f64,
    pub free_energy: f64,
}

impl RelEntropyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.free_energy
    }
}

/// `int [ rho |u - U|^2 / 2 + (H(rho) - H'(r)(rho - r) - H(r)) / eps^2 ]`.
pub fn relative_entropy_parts(
    rho: &ScalarField,
    u: &VectorField,
    r: &ScalarField,
    big_u: &VectorField,
    eps: f64,
    law: &PressureLaw,
) -> Result<RelEntropyParts> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    u.check_same_grid(big_u)?;
    rho.check_same_grid(r)?;
    rho.check_same_grid(u.component(0))?;
    let g = rho.grid();
    let mut kin = 0.0;
    for idx in 0..g.len() {
        let d2: f64 = (0..u.dim())
            .map(|i| (u.component(i).data()[idx] - big_u.component(i).data()[idx]).powi(2))
            .sum();
        kin += 0.5 * rho.data()[idx] * d2;
    }
    let fe = free_energy_distance(rho, r, law)?.integral();
    Ok(RelEntropyParts {
        kinetic: kin * g.cell_volume(),
        free_energy: fe / (eps * eps),
    })
}

pub fn relative_entropy(
    rho: &ScalarField,
    u: &VectorField,
    r: &ScalarField,
    big_u: &VectorField,
    eps: f64,
    law: &PressureLaw,
) -> Result<f64> {
    Ok(relative_entropy_parts(rho, u, r, big_u, eps, law)?.total())
}

/// The energy of a fluid state, i.e. the relative entropy with respect to
/// `(1, 0)`.
pub fn energy_functional(state: &FluidState, law: &PressureLaw) -> f64 {
    state.energy(law)
}

#[derive(Debug, Clone, Default)]
pub struct RelEntropyReport {
    pub times: Vec<f64>,
    pub total: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub free_energy: Vec<f64>,
    pub interpolated: bool,
}

impl RelEntropyReport {
    pub fn csv_header(&self) -> Vec<String> {
        ["t", "rel_entropy", "kinetic", "free_energy"].iter().map(|s| s.to_string()).collect()
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| vec![self.times[i], self.total[i], self.kinetic[i], self.free_energy[i]])
            .collect()
    }
}

/// `E_eps(rho, u | 1 + eps (q + s), v + V)` along the stored snapshots of a
/// fluid run, with the limit solution extended constantly in `x3` and
/// `(s, V)` the optional wave part evolved by the exact propagator.
pub fn relative_entropy_series(
    ns: &NsTrajectory,
    qg: &QgTrajectory,
    waves: Option<(&Propagator, &WaveState)>,
    law: &PressureLaw,
) -> Result<RelEntropyReport> {
    let mut rep = RelEntropyReport::default();
    for (t, st) in &ns.snapshots {
        let (limit, interp) = limit_at(qg, *t)?;
        rep.interpolated |= interp;
        let slab = st.grid();
        let mut q = limit.q.extend_vertically(slab)?;
        let mut big_u = limit.velocity()?.extend_vertically(slab)?.with_zero_vertical();
        if let Some((prop, w0)) = waves {
            let w = prop.propagate(w0, *t, st.eps)?;
            q = q.add(&w.s)?;
            big_u = big_u.add(&w.v)?;
        }
        let r = q.map(|q| 1.0 + st.eps * q);
        let parts = relative_entropy_parts(&st.density(), &st.velocity()?, &r, &big_u, st.eps, law)?;
        rep.times.push(*t);
        rep.total.push(parts.total());
        rep.kinetic.push(parts.kinetic);
        rep.free_energy.push(parts.free_energy);
    }
    Ok(rep)
}

#[derive(Debug, Clone)]
pub struct UniformBoundReport {
    pub eps: f64,
    pub mu: f64,
    pub times: Vec<f64>,
    /// `||sqrt(rho) u||_L2`.
    pub kinetic: Vec<f64>,
    /// `||[sigma]_ess||_L2`.
    pub sigma_ess: Vec<f64>,
    /// `eps^-2 int [1]_res`.
    pub residual_scaled: Vec<f64>,
    /// Unscaled `int [1]_res`.
    pub residual_mass: Vec<f64>,
    /// `int_0^t mu int (|grad u|^2 + (div u)^2 / 3)`.
    pub dissipation: Vec<f64>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

impl UniformBoundReport {
    pub fn kinetic_sup(&self) -> f64 {
        sup(&self.kinetic)
    }

    pub fn sigma_ess_sup(&self) -> f64 {
        sup(&self.sigma_ess)
    }

    pub fn residual_scaled_sup(&self) -> f64 {
        sup(&self.residual_scaled)
    }

    pub fn residual_mass_sup(&self) -> f64 {
        sup(&self.residual_mass)
    }

    pub fn dissipation_total(&self) -> f64 {
        self.dissipation.last().cloned().unwrap_or(0.0)
    }

    /// The four monitored sups in a fixed order: kinetic, essential
    /// density, scaled residual mass, dissipation.
    pub fn monitors(&self) -> [f64; 4] {
        [
            self.kinetic_sup(),
            self.sigma_ess_sup(),
            self.residual_scaled_sup(),
            self.dissipation_total(),
        ]
    }

    pub fn csv_header(&self) -> Vec<String> {
        ["t", "kinetic", "sigma_ess", "residual_scaled", "residual_mass", "dissipation"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| {
                vec![
                    self.times[i],
                    self.kinetic[i],
                    self.sigma_ess[i],
                    self.residual_scaled[i],
                    self.residual_mass[i],
                    self.dissipation[i],
                ]
            })
            .collect()
    }
}

/// Bound monitors of one fluid run. With the default cut-off the per-step
/// series recorded by the solver are used; any other cut-off is evaluated on
/// the stored snapshots.
pub fn uniform_bound_monitor(traj: &NsTrajectory, spec: &EssResSpec) -> Result<UniformBoundReport> {
    let eps2 = traj.eps * traj.eps;
    if *spec == EssResSpec::default() {
        return Ok(UniformBoundReport {
            eps: traj.eps,
            mu: traj.mu,
            times: traj.times.clone(),
            kinetic: traj.kinetic.clone(),
            sigma_ess: traj.sigma_ess.clone(),
            residual_scaled: traj.residual_mass.iter().map(|r| r / eps2).collect(),
            residual_mass: traj.residual_mass.clone(),
            dissipation: traj.dissipation.clone(),
        });
    }
    let mut rep = UniformBoundReport {
        eps: traj.eps,
        mu: traj.mu,
        times: Vec::new(),
        kinetic: Vec::new(),
        sigma_ess: Vec::new(),
        residual_scaled: Vec::new(),
        residual_mass: Vec::new(),
        dissipation: Vec::new(),
    };
    for (t, st) in &traj.snapshots {
        let rho = st.density();
        let (ess, _) = ess_res_split(&st.sigma, &rho, spec)?;
        let res = rho.map(|r| 1.0 - spec.chi(r)).integral();
        let k = traj.times.iter().position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0));
        rep.times.push(*t);
        rep.kinetic.push(st.sqrt_rho_u()?.l2_norm());
        rep.sigma_ess.push(ess.l2_norm());
        rep.residual_mass.push(res);
        rep.residual_scaled.push(res / eps2);
        rep.dissipation.push(k.map(|k| traj.dissipation[k]).unwrap_or(f64::NAN));
    }
    Ok(rep)
}

/// Comparison of bound monitors across an eps sweep.
#[derive(Debug, Clone)]
pub struct BoundSweep {
    pub eps: Vec<f64>,
    /// finest / coarsest for each monitor (see [`UniformBoundReport::monitors`]);
    /// 0/0 counts as 1.
    pub ratios: [f64; 4],
    /// Largest value of each monitor over the sweep relative to the
    /// coarsest-eps value.
    pub max_ratios: [f64; 4],
    /// Fitted exponent of `sup int [1]_res` against eps. `+inf` when fewer
    /// than two runs have a non-empty residual set.
    pub residual_exponent: f64,
    pub residual_points: usize,
}

impl BoundSweep {
    /// No monitor exceeds `factor` times its coarsest-eps value anywhere in
    /// the sweep. Monitors are allowed to shrink.
    pub fn bounded(&self, factor: f64) -> bool {
        self.max_ratios.iter().all(|r| *r <= factor)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

/// Reports are ordered from coarsest to finest eps.
pub fn check_uniform_bounds(reports: &[UniformBoundReport]) -> Result<BoundSweep> {
    if reports.len() < 2 {
        return Err(Error::InvalidParameter("a sweep needs at least two runs".into()));
    }
    let coarse = reports[0].monitors();
    let fine = reports[reports.len() - 1].monitors();
    let mut ratios = [0.0; 4];
    let mut max_ratios = [0.0; 4];
    for i in 0..4 {
        ratios[i] = ratio(fine[i], coarse[i]);
        max_ratios[i] = reports
            .iter()
            .map(|r| ratio(r.monitors()[i], coarse[i]))
            .fold(0.0, f64::max);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = reports
        .iter()
        .filter(|r| r.residual_mass_sup() > 0.0)
        .map(|r| (r.eps, r.residual_mass_sup()))
        .unzip();
    let residual_exponent = if xs.len() < 2 {
        f64::INFINITY
    } else {
        fit_power_law(&xs, &ys).map(|f| f.0).unwrap_or(f64::NAN)
    };
    Ok(BoundSweep {
        eps: reports.iter().map(|r| r.eps).collect(),
        ratios,
        max_ratios,
        residual_exponent,
        residual_points: xs.len(),
    })
}

/// Horizontal window `[-half_width, half_width]^2` and time window `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitWindow {
    pub half_width: f64,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceEntry {
    pub eps: f64,
    pub times: Vec<f64>,
    pub sigma_l2: Vec<f64>,
    pub sigma_l1: Vec<f64>,
    pub momentum_l2: Vec<f64>,
    pub momentum_l1: Vec<f64>,
    /// Set when the limit solution had to be interpolated in time.
    pub interpolated: bool,
}

fn sup_or_nan(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        sup(v)
    }
}

impl ConvergenceEntry {
    pub fn sigma_l2_sup(&self) -> f64 {
        sup_or_nan(&self.sigma_l2)
    }

    pub fn sigma_l1_sup(&self) -> f64 {
        sup_or_nan(&self.sigma_l1)
    }

    pub fn momentum_l2_sup(&self) -> f64 {
        sup_or_nan(&self.momentum_l2)
    }

    pub fn momentum_l1_sup(&self) -> f64 {
        sup_or_nan(&self.momentum_l1)
    }

    pub fn csv_header(&self) -> Vec<String> {
        ["t", "sigma_l2", "sigma_l1", "momentum_l2", "momentum_l1"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| vec![self.times[i], self.sigma_l2[i], self.sigma_l1[i], self.momentum_l2[i], self.momentum_l1[i]])
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub window: LimitWindow,
    /// Ordered from coarsest to finest eps.
    pub entries: Vec<ConvergenceEntry>,
}

impl ConvergenceReport {
    pub fn new(window: LimitWindow, mut entries: Vec<ConvergenceEntry>) -> Self {
        entries.sort_by(|a, b| b.eps.partial_cmp(&a.eps).unwrap_or(std::cmp::Ordering::Equal));
        ConvergenceReport { window, entries }
    }

    /// Empirical orders `log(e_i / e_{i+1}) / log(eps_i / eps_{i+1})` of the
    /// density and momentum errors between consecutive runs.
    pub fn orders(&self) -> Vec<(f64, f64)> {
        self.entries
            .windows(2)
            .map(|w| {
                let le = (w[0].eps / w[1].eps).ln();
                (
                    (w[0].sigma_l2_sup() / w[1].sigma_l2_sup()).ln() / le,
                    (w[0].momentum_l2_sup() / w[1].momentum_l2_sup()).ln() / le,
                )
            })
            .collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| {
            w[1].sigma_l2_sup() < w[0].sigma_l2_sup() && w[1].momentum_l2_sup() < w[0].momentum_l2_sup()
        })
    }

    /// Finest-eps error over coarsest-eps error, for density and momentum.
    pub fn reduction(&self) -> (f64, f64) {
        match (self.entries.first(), self.entries.last()) {
            (Some(c), Some(f)) => (
                f.sigma_l2_sup() / c.sigma_l2_sup(),
                f.momentum_l2_sup() / c.momentum_l2_sup(),
            ),
            _ => (f64::NAN, f64::NAN),
        }
    }

    pub fn any_interpolated(&self) -> bool {
        self.entries.iter().any(|e| e.interpolated)
    }

    pub fn csv_header(&self) -> Vec<String> {
        [
            "eps",
            "sigma_l2",
            "sigma_l1",
            "momentum_l2",
            "momentum_l1",
            "order_sigma",
            "order_momentum",
            "interpolated",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    /// One row per eps; the order columns refer to the step from the
    /// previous (coarser) run and are NaN on the first row.
    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        let orders = self.orders();
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (os, om) = if i == 0 { (f64::NAN, f64::NAN) } else { orders[i - 1] };
                vec![
                    e.eps,
                    e.sigma_l2_sup(),
                    e.sigma_l1_sup(),
                    e.momentum_l2_sup(),
                    e.momentum_l1_sup(),
                    os,
                    om,
                    if e.interpolated { 1.0 } else { 0.0 },
                ]
            })
            .collect()
    }
}

/// `(L2, L1)` norms of a planar field restricted to the horizontal window.
fn windowed_norms(f: &ScalarField, half_width: f64) -> (f64, f64) {
    let g = f.grid();
    let cell = g.dx() * g.dy();
    let (mut l2, mut l1) = (0.0, 0.0);
    for (idx, v) in f.data().iter().enumerate() {
        let [x, y, _] = g.coords(idx);
        if x.abs() <= half_width && y.abs() <= half_width {
            l2 += v * v;
            l1 += v.abs();
        }
    }
    ((l2 * cell).sqrt(), l1 * cell)
}

/// Limit state at time `t`: a stored snapshot when one matches, otherwise
/// cubic Lagrange interpolation through the four nearest snapshots.
fn limit_at(qg: &QgTrajectory, t: f64) -> Result<(LimitState, bool)> {
    let snaps = &qg.snapshots;
    if snaps.is_empty() {
        return Err(Error::InvalidParameter("limit trajectory has no snapshots".into()));
    }
    let tol = 1e-9 * t.abs().max(1.0);
    if let Some((_, s)) = snaps.iter().find(|(s, _)| (s - t).abs() <= tol) {
        return Ok((s.clone(), false));
    }
    let last = snaps[snaps.len() - 1].0;
    if t < snaps[0].0 - tol || t > last + tol {
        return Err(Error::InvalidParameter(format!(
            "time {t} outside the limit trajectory [{}, {last}]",
            snaps[0].0
        )));
    }
    if snaps.len() < 4 {
        return Err(Error::InvalidParameter(
            "cubic interpolation needs at least four limit snapshots".into(),
        ));
    }
    let k = snaps.partition_point(|(s, _)| *s < t);
    let start = k.saturating_sub(2).min(snaps.len() - 4);
    let nodes = &snaps[start..start + 4];
    let mut out = ScalarField::zeros(nodes[0].1.grid());
    for (i, (ti, si)) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (j, (tj, _)) in nodes.iter().enumerate() {
            if i != j {
                w *= (t - tj) / (ti - tj);
            }
        }
        out = out.add(&si.q.scale(w))?;
    }
    Ok((LimitState::new(out)?, true))
}

/// Windowed distances between the vertical means of `sigma` and of
/// `sqrt(rho) u_h` and the limit `(q, v)`, at every stored fluid snapshot
/// whose time lies in the window.
pub fn limit_error(ns: &NsTrajectory, qg: &QgTrajectory, window: &LimitWindow) -> Result<ConvergenceEntry> {
    let mut e = ConvergenceEntry {
        eps: ns.eps,
        times: Vec::new(),
        sigma_l2: Vec::new(),
        sigma_l1: Vec::new(),
        momentum_l2: Vec::new(),
        momentum_l1: Vec::new(),
        interpolated: false,
    };
    for (t, st) in &ns.snapshots {
        if *t < window.t0 - 1e-12 || *t > window.t1 + 1e-12 {
            continue;
        }
        let (limit, interp) = limit_at(qg, *t)?;
        e.interpolated |= interp;
        let sbar = st.sigma.vertical_mean();
        sbar.check_same_grid(&limit.q)?;
        let (s2, s1) = windowed_norms(&sbar.sub(&limit.q)?, window.half_width);
        let w = st.sqrt_rho_u()?.vertical_mean();
        let v = limit.velocity()?;
        let dv = VectorField::new(vec![
            w.component(0).sub(v.component(0))?,
            w.component(1).sub(v.component(1))?,
        ])?;
        let mag = dv.magnitude();
        let g = mag.grid();
        let cell = g.dx() * g.dy();
        let (mut m2, mut m1) = (0.0, 0.0);
        for (idx, val) in mag.data().iter().enumerate() {
            let [x, y, _] = g.coords(idx);
            if x.abs() <= window.half_width && y.abs() <= window.half_width {
                m2 += val * val;
                m1 += val;
            }
        }
        e.times.push(*t);
        e.sigma_l2.push(s2);
        e.sigma_l1.push(s1);
        e.momentum_l2.push((m2 * cell).sqrt());
        e.momentum_l1.push(m1 * cell);
    }
    if e.interpolated {
        log::warn!("eps = {}: limit solution interpolated in time (cubic)", ns.eps);
    }
    Ok(e)
}
