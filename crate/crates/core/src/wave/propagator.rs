use super::symbol::{eigensystem, EigenSystem};
use super::{WaveSpectrum, WaveState};
use crate::error::{Error, Result};
use crate::grid::SlabGrid;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Exact solution operator of the linear system on a fixed grid.
///
/// A cached propagator holds one [`EigenSystem`] per Fourier mode. An
/// uncached one computes them on demand, skipping modes whose coefficients
/// vanish, which is what large, sparsely excited grids want.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Arc<SlabGrid>,
    cache: Option<Arc<Vec<EigenSystem>>>,
}

fn mode_system(grid: &SlabGrid, idx: usize) -> EigenSystem {
    let [a, b, k] = grid.mode(idx);
    eigensystem([a, b], k)
}

fn is_zero(y: &[Complex64; 4]) -> bool {
    y.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")))
    }
}

impl Propagator {
    pub fn new(grid: &Arc<SlabGrid>) -> Self {
        Propagator {
            grid: Arc::clone(grid),
            cache: None,
        }
    }

    pub fn cached(grid: &Arc<SlabGrid>) -> Self {
        let systems: Vec<EigenSystem> = (0..grid.len())
            .into_par_iter()
            .map(|idx| mode_system(grid, idx))
            .collect();
        Propagator {
            grid: Arc::clone(grid),
            cache: Some(Arc::new(systems)),
        }
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        &self.grid
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }

    pub fn system(&self, idx: usize) -> EigenSystem {
        match &self.cache {
            Some(c) => c[idx].clone(),
            None => mode_system(&self.grid, idx),
        }
    }

    fn apply_mode(&self, idx: usize, y: &mut [Complex64; 4], tau: f64) {
        if is_zero(y) {
            return;
        }
        let m = match &self.cache {
            Some(c) => c[idx].exponential(tau),
            None => mode_system(&self.grid, idx).exponential(tau),
        };
        let w = m * Vector4::from(*y);
        *y = [w[0], w[1], w[2], w[3]];
    }

    /// Advance coefficients by the rescaled time `tau = t / eps`.
    pub fn propagate_spectrum(&self, y: &WaveSpectrum, tau: f64) -> Result<WaveSpectrum> {
        crate::field::same_grid(y.grid(), &self.grid)?;
        let mut modes = y.to_modes();
        modes
            .par_iter_mut()
            .enumerate()
            .for_each(|(idx, v)| self.apply_mode(idx, v, tau));
        Ok(WaveSpectrum::from_modes(&self.grid, &modes))
    }

    pub fn propagate(&self, state: &WaveState, t: f64, eps: f64) -> Result<WaveState> {
        check_eps(eps)?;
        let y = state.to_spectrum()?;
        Ok(self.propagate_spectrum(&y, t / eps)?.to_state())
    }

    /// Eigen-expansion of a fixed initial state, for cheap evaluation at
    /// many times.
    pub fn expansion(&self, y: &WaveSpectrum) -> Result<ModalExpansion> {
        crate::field::same_grid(y.grid(), &self.grid)?;
        let active: Vec<(usize, [Complex64; 4])> = (0..self.grid.len())
            .map(|idx| (idx, y.mode_vector(idx)))
            .filter(|(_, v)| !is_zero(v))
            .collect();
        let terms: Vec<ModeTerm> = active
            .par_iter()
            .map(|&(idx, v)| {
                let sys = self.system(idx);
                let c = sys.q * Vector4::from(v);
                let qh = sys.q.adjoint();
                let vectors = std::array::from_fn(|j| std::array::from_fn(|r| qh[(r, j)] * c[j]));
                ModeTerm {
                    idx,
                    eigenvalues: sys.eigenvalues,
                    vectors,
                }
            })
            .collect();
        Ok(ModalExpansion {
            grid: Arc::clone(&self.grid),
            terms,
        })
    }

    /// Per-mode matrices `exp(-i tau A)` for a fixed `tau`, for repeated use
    /// inside a time stepper.
    pub fn exponential_table(&self, tau: f64) -> ExponentialTable {
        let mats = (0..self.grid.len())
            .into_par_iter()
            .map(|idx| match &self.cache {
                Some(c) => c[idx].exponential(tau),
                None => mode_system(&self.grid, idx).exponential(tau),
            })
            .collect();
        ExponentialTable {
            grid: Arc::clone(&self.grid),
            tau,
            mats,
        }
    }
}

#[derive(Debug, Clone)]
struct ModeTerm {
    idx: usize,
    eigenvalues: [f64; 4],
    /// `vectors[j]` is the `j`-th eigenvector times its initial amplitude.
    vectors: [[Complex64; 4]; 4],
}

/// `y(tau) = sum_j exp(-i tau l_j) a_j` over the excited modes.
#[derive(Debug, Clone)]
pub struct ModalExpansion {
    grid: Arc<SlabGrid>,
    terms: Vec<ModeTerm>,
}

impl ModalExpansion {
    pub fn active_modes(&self) -> usize {
        self.terms.len()
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        &self.grid
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|t| t.idx)
    }

    /// Energy carried by each eigen-branch, summed over modes.
    pub fn branch_energy(&self) -> [f64; 4] {
        let mut e = [0.0; 4];
        for t in &self.terms {
            for (j, v) in t.vectors.iter().enumerate() {
                e[j] += v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        e
    }

    pub fn evaluate(&self, tau: f64) -> WaveSpectrum {
        let values: Vec<[Complex64; 4]> = self
            .terms
            .par_iter()
            .map(|t| {
                let mut y = [Complex64::new(0.0, 0.0); 4];
                for j in 0..4 {
                    let ph = Complex64::from_polar(1.0, -tau * t.eigenvalues[j]);
                    for r in 0..4 {
                        y[r] += ph * t.vectors[j][r];
                    }
                }
                y
            })
            .collect();
        let mut out = WaveSpectrum::zeros(&self.grid);
        for (t, y) in self.terms.iter().zip(values) {
            out.set_mode_vector(t.idx, y);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ExponentialTable {
    grid: Arc<SlabGrid>,
    tau: f64,
    mats: Vec<Matrix4<Complex64>>,
}

impl ExponentialTable {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, y: &mut WaveSpectrum) {
        let [s, a, b, c] = &mut y.0;
        let (s, a, b, c) = (s.coeffs_mut(), a.coeffs_mut(), b.coeffs_mut(), c.coeffs_mut());
        s.par_iter_mut()
            .zip(a.par_iter_mut())
            .zip(b.par_iter_mut())
            .zip(c.par_iter_mut())
            .zip(self.mats.par_iter())
            .for_each(|((((s, a), b), c), m)| {
                let w = m * Vector4::new(*s, *a, *b, *c);
                *s = w[0];
                *a = w[1];
                *b = w[2];
                *c = w[3];
            });
    }

    pub fn applied(&self, y: &WaveSpectrum) -> WaveSpectrum {
        let mut out = y.clone();
        self.apply(&mut out);
        out
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        &self.grid
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_state;
    use super::super::{apply_generator, integrate_mode_ode};
    use super::*;
    use crate::random::rng;
    use rand::Rng;

    fn grid() -> Arc<SlabGrid> {
        Arc::new(SlabGrid::new(3.0, 16, 16, 8).unwrap())
    }

    #[test]
    fn zero_time_is_identity() {
        let g = grid();
        let a = random_state(&g, 1);
        let p = Propagator::new(&g);
        let b = p.propagate(&a, 0.0, 0.3).unwrap();
        assert!(b.sub(&a).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn rejects_nonpositive_eps() {
        let g = grid();
        let p = Propagator::new(&g);
        let a = WaveState::zeros(&g);
        assert!(p.propagate(&a, 1.0, 0.0).is_err());
        assert!(p.propagate(&a, 1.0, -1.0).is_err());
    }

    #[test]
    fn group_property_and_reversibility() {
        let g = grid();
        let a = random_state(&g, 2);
        let p = Propagator::cached(&g);
        let ab = p.propagate(&p.propagate(&a, 1.3, 0.5).unwrap(), 2.1, 0.5).unwrap();
        let direct = p.propagate(&a, 3.4, 0.5).unwrap();
        assert!(ab.sub(&direct).unwrap().l2_norm() < 1e-10 * a.l2_norm());
        let back = p.propagate(&p.propagate(&a, 7.0, 0.5).unwrap(), -7.0, 0.5).unwrap();
        assert!(back.sub(&a).unwrap().l2_norm() < 1e-10 * a.l2_norm());
    }

    #[test]
    fn cached_and_uncached_agree() {
        let g = grid();
        let a = random_state(&g, 4);
        let x = Propagator::new(&g).propagate(&a, 2.0, 1.0).unwrap();
        let y = Propagator::cached(&g).propagate(&a, 2.0, 1.0).unwrap();
        assert_eq!(x.s.data(), y.s.data());
    }

    #[test]
    fn isometry_and_symmetry_class_preserved() {
        let g = grid();
        let a = random_state(&g, 5);
        let p = Propagator::new(&g);
        for t in [0.5, 3.0, 10.0] {
            let b = p.propagate(&a, t, 1.0).unwrap();
            assert!((b.l2_norm() - a.l2_norm()).abs() < 1e-12 * a.l2_norm());
            assert!(crate::symmetry::symmetry_defect(&b.s, &b.v) < 1e-12);
            assert!(b.to_spectrum().unwrap().0.iter().all(|f| f.conjugate_symmetry_defect() < 1e-12));
        }
    }

    #[test]
    fn expansion_matches_direct_propagation() {
        let g = grid();
        let a = random_state(&g, 6);
        let p = Propagator::new(&g);
        let e = p.expansion(&a.to_spectrum().unwrap()).unwrap();
        let via = e.evaluate(4.0).to_state();
        let direct = p.propagate(&a, 4.0, 1.0).unwrap();
        assert!(via.sub(&direct).unwrap().l2_norm() < 1e-12);
        let be: f64 = e.branch_energy().iter().sum();
        assert!((be - a.l2_norm_sq()).abs() < 1e-10 * be);
    }

    #[test]
    fn exponential_table_matches_propagate() {
        let g = grid();
        let a = random_state(&g, 7);
        let p = Propagator::cached(&g);
        let t = p.exponential_table(0.25);
        let mut y = a.to_spectrum().unwrap();
        t.apply(&mut y);
        t.apply(&mut y);
        let direct = p.propagate(&a, 0.5, 1.0).unwrap();
        assert!(y.to_state().sub(&direct).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn small_time_derivative_is_minus_generator() {
        let g = grid();
        let a = random_state(&g, 8);
        let p = Propagator::new(&g);
        let h = 1e-5;
        let fwd = p.propagate(&a, h, 1.0).unwrap();
        let bwd = p.propagate(&a, -h, 1.0).unwrap();
        let fd = fwd.sub(&bwd).unwrap().scale(0.5 / h);
        let b = apply_generator(&a).unwrap().scale(-1.0);
        assert!(fd.sub(&b).unwrap().l2_norm() < 1e-6 * b.l2_norm());
    }

    #[test]
    fn agrees_with_ode_integration() {
        let mut r = rng(77);
        for _ in 0..20 {
            let xi = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
            let k = std::f64::consts::PI * r.gen_range(-2i32..=2) as f64;
            let eps = r.gen_range(0.1..1.0);
            let t = r.gen_range(0.0..2.0);
            let y0 = Vector4::from_fn(|_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let exact = eigensystem(xi, k).exponential(t / eps) * y0;
            let ode = integrate_mode_ode(xi, k, y0, t / eps, 1e-13);
            assert!((exact - ode).norm() < 1e-8, "{}", (exact - ode).norm());
        }
    }
}
