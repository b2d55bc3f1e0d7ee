use super::propagator::Propagator;
use super::symbol::fast_eigenvalue;
use super::WaveState;
use crate::error::{Error, Result};
use crate::grid::SlabGrid;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct DecayOptions {
    /// Fit window in `t`; `None` means `[1, min(50, 0.8 * recurrence)]`.
    pub window: Option<(f64, f64)>,
    pub sobolev_orders: Vec<u32>,
    pub lp_exponents: Vec<f64>,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            window: None,
            sobolev_orders: Vec::new(),
            lp_exponents: vec![4.0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub eps: f64,
    pub times: Vec<f64>,
    pub sup_s: Vec<f64>,
    pub sup_v: Vec<f64>,
    /// `sup |(s, V)|` with the pointwise Euclidean norm; this is the fitted
    /// column.
    pub sup_total: Vec<f64>,
    pub l2_total: Vec<f64>,
    pub lp: Vec<(f64, Vec<f64>)>,
    pub sobolev: Vec<(u32, Vec<f64>)>,
    pub recurrence_time: f64,
    pub max_group_speed: f64,
    /// `true` where `t` lies past the recurrence horizon.
    pub beyond_recurrence: Vec<bool>,
    pub window: (f64, f64),
    pub fit_points: usize,
    /// Least-squares slope of `log sup` against `log t` inside the window.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Root-mean-square residual of that fit, in log units.
    pub fit_residual: Option<f64>,
    pub active_modes: usize,
}

impl DecayReport {
    /// Largest relative deviation of the L2 column from its first entry.
    pub fn l2_relative_drift(&self) -> f64 {
        let Some(&first) = self.l2_total.first() else {
            return 0.0;
        };
        self.l2_total
            .iter()
            .map(|v| (v - first).abs() / first.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["t", "sup_s", "sup_V", "sup_total", "l2_total"].iter().map(|s| s.to_string()).collect();
        for (p, _) in &self.lp {
            h.push(format!("l{}_total", *p as u32));
        }
        for (m, _) in &self.sobolev {
            h.push(format!("w{m}_total"));
        }
        h.push("beyond_recurrence".into());
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| {
                let mut r = vec![self.times[i], self.sup_s[i], self.sup_v[i], self.sup_total[i], self.l2_total[i]];
                r.extend(self.lp.iter().map(|(_, v)| v[i]));
                r.extend(self.sobolev.iter().map(|(_, v)| v[i]));
                r.push(if self.beyond_recurrence[i] { 1.0 } else { 0.0 });
                r
            })
            .collect()
    }

    /// Fit metadata as `key = value` lines.
    pub fn sidecar(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), crate::io::format_g17);
        let g = crate::io::format_g17;
        let flagged = self.beyond_recurrence.iter().filter(|b| **b).count();
        format!(
            "eps = {}\nwindow_lo = {}\nwindow_hi = {}\nfit_points = {}\nslope = {}\nintercept = {}\n\
             fit_residual = {}\nrecurrence_time = {}\nmax_group_speed = {}\nflagged_beyond_recurrence = {}\n\
             l2_relative_drift = {}\nactive_modes = {}\n",
            g(self.eps),
            g(self.window.0),
            g(self.window.1),
            self.fit_points,
            opt(self.slope),
            opt(self.intercept),
            opt(self.fit_residual),
            g(self.recurrence_time),
            g(self.max_group_speed),
            flagged,
            g(self.l2_relative_drift()),
            self.active_modes,
        )
    }
}

/// Largest `|d l1 / d|xi||` over the modes of the grid, by central
/// differences on the closed form, and the corresponding wrap-around time
/// `eps * L / (2 v_max)`.
pub fn recurrence_time(grid: &SlabGrid, eps: f64) -> (f64, f64) {
    let [kx, ky, kz] = grid.derivative_wavenumbers();
    let mut ks: Vec<f64> = kz.iter().map(|k| k.abs()).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let h = 1e-6;
    let vmax = ks
        .par_iter()
        .map(|&k| {
            let mut best: f64 = 0.0;
            for a in kx {
                for b in ky {
                    let r = a.hypot(*b);
                    let lo = (r - h).max(0.0);
                    let d = (fast_eigenvalue(r + h, k) - fast_eigenvalue(lo, k)) / (r + h - lo);
                    best = best.max(d.abs());
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    let t = if vmax > 0.0 {
        eps * grid.half_width() / (2.0 * vmax)
    } else {
        f64::INFINITY
    };
    (t, vmax)
}

/// Least-squares line through `(log t, log y)` for the points with `t, y > 0`.
/// Returns `(slope, intercept, rms residual)`.
pub fn fit_power_law(ts: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(t, y)| **t > 0.0 && **y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some((slope, intercept, (rss / n).sqrt()))
}

/// Propagate `state0` to each requested time and record its norms.
pub fn measure_decay(
    propagator: &Propagator,
    state0: &WaveState,
    times: &[f64],
    eps: f64,
    options: &DecayOptions,
) -> Result<DecayReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("decay times must be finite".into()));
    }
    state0.check_finite()?;
    let grid = propagator.grid();
    let (t_rec, vmax) = recurrence_time(grid, eps);
    let window = options.window.unwrap_or((1.0, 50.0_f64.min(0.8 * t_rec)));
    if !(window.0 < window.1) {
        return Err(Error::InvalidParameter(format!(
            "empty fit window [{}, {}]",
            window.0, window.1
        )));
    }

    let expansion = propagator.expansion(&state0.to_spectrum()?)?;
    let mut report = DecayReport {
        eps,
        times: times.to_vec(),
        sup_s: Vec::with_capacity(times.len()),
        sup_v: Vec::with_capacity(times.len()),
        sup_total: Vec::with_capacity(times.len()),
        l2_total: Vec::with_capacity(times.len()),
        lp: options.lp_exponents.iter().map(|&p| (p, Vec::new())).collect(),
        sobolev: options.sobolev_orders.iter().map(|&m| (m, Vec::new())).collect(),
        recurrence_time: t_rec,
        max_group_speed: vmax,
        beyond_recurrence: times.iter().map(|&t| t.abs() > t_rec).collect(),
        window,
        fit_points: 0,
        slope: None,
        intercept: None,
        fit_residual: None,
        active_modes: expansion.active_modes(),
    };
    for &t in times {
        let spec = expansion.evaluate(t / eps);
        for (m, col) in report.sobolev.iter_mut() {
            col.push(spec.sobolev_norm(*m));
        }
        let st = spec.to_state();
        let (a, b) = st.sup_norms();
        report.sup_s.push(a);
        report.sup_v.push(b);
        report.sup_total.push(st.sup_norm());
        report.l2_total.push(st.l2_norm());
        for (p, col) in report.lp.iter_mut() {
            col.push(st.lp_norm(*p));
        }
        log::debug!("decay t = {t}: sup = {:.6e}", report.sup_total.last().unwrap());
    }

    let (fit_t, fit_y): (Vec<f64>, Vec<f64>) = (0..times.len())
        .filter(|&i| {
            let t = times[i];
            t >= window.0 && t <= window.1 && !report.beyond_recurrence[i]
        })
        .map(|i| (times[i], report.sup_total[i]))
        .unzip();
    report.fit_points = fit_t.len();
    if let Some((s, c, r)) = fit_power_law(&fit_t, &fit_y) {
        report.slope = Some(s);
        report.intercept = Some(c);
        report.fit_residual = Some(r);
    }
    Ok(report)
}

/// Logarithmically spaced sample times on `[t0, t1]`, `n >= 2` points.
pub fn log_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let (a, b) = (t0.ln(), t1.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarField, VectorField};
    use std::sync::Arc;

    #[test]
    fn fit_recovers_power_law() {
        let ts = log_times(1.0, 50.0, 20);
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * t.powf(-0.5)).collect();
        let (s, c, r) = fit_power_law(&ts, &ys).unwrap();
        assert!((s + 0.5).abs() < 1e-12);
        assert!((c - 3f64.ln()).abs() < 1e-12);
        assert!(r < 1e-12);
        assert!(fit_power_law(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn recurrence_time_scales_with_box() {
        let a = SlabGrid::new(10.0, 32, 32, 4).unwrap();
        let b = SlabGrid::new(20.0, 64, 64, 4).unwrap();
        let (ta, va) = recurrence_time(&a, 1.0);
        let (tb, _) = recurrence_time(&b, 1.0);
        assert!(va > 0.0 && va < 1.0);
        assert!((tb / ta - 2.0).abs() < 0.05);
        assert!((recurrence_time(&a, 0.5).0 - 0.5 * ta).abs() < 1e-12);
    }

    #[test]
    fn stationary_data_does_not_decay() {
        let g = Arc::new(SlabGrid::new(8.0, 32, 32, 4).unwrap());
        let q = ScalarField::from_fn(&g, |x, y, _| (-(x * x + y * y) / 4.0).exp());
        let v = crate::ops::perp_grad_h(&q).unwrap().with_zero_vertical();
        let st = WaveState::new(q, v).unwrap();
        let p = Propagator::new(&g);
        let r = measure_decay(&p, &st, &log_times(1.0, 10.0, 6), 1.0, &DecayOptions::default()).unwrap();
        assert!(r.slope.unwrap().abs() < 1e-8);
        assert!(r.l2_relative_drift() < 1e-12);
    }

    #[test]
    fn times_past_recurrence_are_flagged_not_fitted() {
        let g = Arc::new(SlabGrid::new(4.0, 16, 16, 4).unwrap());
        let s = ScalarField::from_fn(&g, |x, y, _| (-(x * x + y * y)).exp());
        let st = WaveState::new(s, VectorField::zeros(&g, 3)).unwrap();
        let p = Propagator::new(&g);
        let (t_rec, _) = recurrence_time(&g, 1.0);
        let times = vec![1.0, 1.5, 2.0, t_rec * 2.0];
        let opts = DecayOptions {
            window: Some((1.0, 100.0)),
            ..DecayOptions::default()
        };
        let r = measure_decay(&p, &st, &times, 1.0, &opts).unwrap();
        assert_eq!(r.beyond_recurrence, vec![false, false, false, true]);
        assert_eq!(r.fit_points, 3);
        assert!(r.sidecar().contains("flagged_beyond_recurrence = 1"));
    }
}
