//! The stationary subspace of the wave system and the orthogonal splitting
//! of initial data into a stationary (geostrophic) part and a wave part.
//!
//! A pair `(q, v)` is stationary when `grad q + e3 x v = 0` and
//! `div v = 0`, i.e. `q` does not depend on `x3` and `v = (-d2 q, d1 q, 0)`.
//! The orthogonal projection of `(r, U)` onto that subspace solves
//!
//! ```text
//! -lap_h q + q = avg(r) - curl_h avg(U_h)
//! ```
//!
//! where `avg` is the vertical mean.

use crate::cutoff::{apply_frequency_cutoff, apply_spatial_cutoff, CutoffSpec};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::SlabGrid;
use crate::ops;
use crate::symmetry::enforce_symmetry_class;
use crate::transform::{forward, inverse};
use crate::wave::WaveState;
use num_complex::Complex64;
use std::sync::Arc;

/// Stream function `q` on the horizontal plane and its velocity
/// `v = perp_grad_h q`.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub q: ScalarField,
    pub v: VectorField,
}

impl KernelPair {
    pub fn from_stream(q: ScalarField) -> Result<Self> {
        if !q.grid().is_planar() {
            return Err(Error::InvalidParameter(
                "stream functions live on the horizontal plane".into(),
            ));
        }
        let v = ops::perp_grad_h(&q)?;
        Ok(KernelPair { q, v })
    }

    /// The pair as an `x3`-independent wave state on `slab`.
    pub fn to_wave_state(&self, slab: &Arc<SlabGrid>) -> Result<WaveState> {
        let s = self.q.extend_vertically(slab)?;
        let mut v = self.v.with_zero_vertical().extend_vertically(slab)?;
        v.tag_symmetry_class();
        WaveState::new(s, v)
    }

    /// `max(|v1 + d2 q|, |v2 - d1 q|)`, zero for an exact pair.
    pub fn geostrophic_defect(&self) -> Result<f64> {
        let g = ops::grad_h(&self.q)?;
        let a = self.v.component(0).add(g.component(1))?.sup_norm();
        let b = self.v.component(1).sub(g.component(0))?.sup_norm();
        Ok(a.max(b))
    }

    pub fn divergence_defect(&self) -> Result<f64> {
        Ok(ops::div_h(&self.v)?.sup_norm())
    }
}

/// Vertical means `(avg r, avg U_h)` on the horizontal plane.
///
/// With the symmetry class in force the mean over `[-1, 1]` equals the
/// integral over `[0, 1]`.
pub fn vertical_average(r: &ScalarField, u: &VectorField) -> Result<(ScalarField, VectorField)> {
    r.check_same_grid(u.component(0))?;
    let rt = r.vertical_mean();
    let uh = VectorField::new(vec![
        u.component(0).vertical_mean(),
        u.component(1).vertical_mean(),
    ])?;
    Ok((rt, uh))
}

/// Orthogonal projection of `(r, U)` onto the stationary subspace.
pub fn project_to_kernel(r: &ScalarField, u: &VectorField) -> Result<KernelPair> {
    if u.dim() < 2 {
        return Err(Error::InvalidParameter("velocity needs horizontal components".into()));
    }
    let (rt, uh) = vertical_average(r, u)?;
    let rh = forward(&rt)?;
    let curl = ops::curl_h_spec(&forward(uh.component(0))?, &forward(uh.component(1))?)?;
    let rhs = rh.sub(&curl)?;
    let qh = rhs.multiplier(|[a, b, _]| Complex64::new(1.0 / (1.0 + a * a + b * b), 0.0));
    KernelPair::from_stream(inverse(&qh))
}

/// Initial data split into a stationary and a wave part after mollification.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub cutoff: CutoffSpec,
    /// Mollified density perturbation and velocity.
    pub rho: ScalarField,
    pub u: VectorField,
    pub kernel: KernelPair,
    /// Wave part `s = rho - q`, `V = u - (v, 0)`.
    pub s: ScalarField,
    pub big_v: VectorField,
}

impl DataSplit {
    pub fn wave_state(&self) -> Result<WaveState> {
        WaveState::new(self.s.clone(), self.big_v.clone())
    }

    pub fn kernel_state(&self) -> Result<WaveState> {
        self.kernel.to_wave_state(self.rho.grid())
    }

    /// `|<wave part, stationary part>|` relative to the product of norms.
    pub fn orthogonality_defect(&self) -> Result<f64> {
        let w = self.wave_state()?;
        let k = self.kernel_state()?;
        let denom = (w.l2_norm() * k.l2_norm()).max(f64::MIN_POSITIVE);
        Ok(w.inner(&k)?.abs() / denom)
    }

    /// Largest pointwise error of `stationary + wave = mollified data`.
    pub fn reconstruction_defect(&self) -> Result<f64> {
        let sum = self.kernel_state()?.add(&self.wave_state()?)?;
        let data = WaveState::new(self.rho.clone(), self.u.clone())?;
        let diff = sum.sub(&data)?;
        let (a, b) = diff.sup_norms();
        Ok(a.max(b))
    }
}

/// Mollify one scalar field: spatial cut-off, then frequency cut-off with the
/// vertical mode bound.
pub fn mollify(f: &ScalarField, c: &CutoffSpec) -> Result<ScalarField> {
    let spatial = apply_spatial_cutoff(f, c);
    Ok(inverse(&apply_frequency_cutoff(&forward(&spatial)?, c)))
}

pub fn decompose_initial_data(rho1: &ScalarField, u0: &VectorField, c: &CutoffSpec) -> Result<DataSplit> {
    if u0.dim() != 3 {
        return Err(Error::InvalidParameter("initial velocity needs 3 components".into()));
    }
    let slab = Arc::clone(rho1.grid());
    if slab.is_planar() {
        return Err(Error::InvalidParameter("initial data must live on a slab grid".into()));
    }
    let (rho1, u0) = enforce_symmetry_class(rho1, u0)?;
    let rho = mollify(&rho1, c)?;
    let mut u = VectorField::new(
        u0.components()
            .iter()
            .map(|f| mollify(f, c))
            .collect::<Result<Vec<_>>>()?,
    )?;
    u.tag_symmetry_class();

    let input_size = rho1.l2_norm() + u0.l2_norm();
    let kept = rho.l2_norm() + u.l2_norm();
    if input_size > 0.0 && kept <= 1e-14 * input_size {
        log::warn!(
            "cut-off ({}, {}) removes every resolved mode; returning a zero split",
            c.inner,
            c.outer
        );
        let plane = Arc::new(slab.plane());
        return Ok(DataSplit {
            cutoff: c.clone(),
            rho: ScalarField::zeros(&slab),
            u: VectorField::zeros_symmetric(&slab),
            kernel: KernelPair::from_stream(ScalarField::zeros(&plane))?,
            s: ScalarField::zeros(&slab),
            big_v: VectorField::zeros_symmetric(&slab),
        });
    }

    let kernel = project_to_kernel(&rho, &u)?;
    let ks = kernel.to_wave_state(&slab)?;
    let s = rho.sub(&ks.s)?;
    let mut big_v = u.sub(&ks.v)?;
    big_v.tag_symmetry_class();
    Ok(DataSplit {
        cutoff: c.clone(),
        rho,
        u,
        kernel,
        s,
        big_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field, random_vector};
    use std::f64::consts::PI;

    fn slab() -> Arc<SlabGrid> {
        Arc::new(SlabGrid::new(PI, 16, 16, 8).unwrap())
    }

    fn random_pair(g: &Arc<SlabGrid>, seed: u64) -> (ScalarField, VectorField) {
        enforce_symmetry_class(&random_field(g, seed), &random_vector(g, seed + 1, 3)).unwrap()
    }

    #[test]
    fn vertical_average_basics() {
        let g = slab();
        let f = ScalarField::from_fn(&g, |x, _, _| x.cos());
        let u = VectorField::zeros(&g, 3);
        let (a, _) = vertical_average(&f, &u).unwrap();
        assert!(a.extend_vertically(&g).unwrap().sub(&f).unwrap().sup_norm() < 1e-15);
        let h = ScalarField::from_fn(&g, |x, y, z| (PI * z).cos() * (x + y).sin());
        assert!(vertical_average(&h, &u).unwrap().0.sup_norm() < 1e-15);
    }

    #[test]
    fn unit_wavenumber_density_halves() {
        let g = slab();
        let r = ScalarField::from_fn(&g, |x, _, _| x.cos());
        let k = project_to_kernel(&r, &VectorField::zeros(&g, 3)).unwrap();
        let half = ScalarField::from_fn(&Arc::new(g.plane()), |x, _, _| 0.5 * x.cos());
        assert!(k.q.sub(&half).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn kernel_pairs_are_fixed_points() {
        let g = slab();
        let plane = Arc::new(g.plane());
        let k0 = KernelPair::from_stream(random_field(&plane, 4)).unwrap();
        assert!(k0.geostrophic_defect().unwrap() < 1e-12);
        assert!(k0.divergence_defect().unwrap() < 1e-12);
        let w = k0.to_wave_state(&g).unwrap();
        let k1 = project_to_kernel(&w.s, &w.v).unwrap();
        assert!(k1.q.sub(&k0.q).unwrap().sup_norm() < 1e-12);
        assert!(k1.v.sub(&k0.v).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn residual_is_orthogonal_to_kernel() {
        let g = slab();
        let plane = Arc::new(g.plane());
        for seed in 0..3 {
            let (r, u) = random_pair(&g, 10 + seed);
            let k = project_to_kernel(&r, &u).unwrap();
            let resid = WaveState::new(r.clone(), u.clone())
                .unwrap()
                .sub(&k.to_wave_state(&g).unwrap())
                .unwrap();
            for t in 0..3 {
                let test = KernelPair::from_stream(random_field(&plane, 100 + t))
                    .unwrap()
                    .to_wave_state(&g)
                    .unwrap();
                let ip = resid.inner(&test).unwrap();
                assert!(ip.abs() < 1e-10 * resid.l2_norm() * test.l2_norm(), "{ip}");
            }
        }
    }

    #[test]
    fn projection_is_self_adjoint() {
        let g = slab();
        let (r1, u1) = random_pair(&g, 1);
        let (r2, u2) = random_pair(&g, 2);
        let p1 = project_to_kernel(&r1, &u1).unwrap().to_wave_state(&g).unwrap();
        let p2 = project_to_kernel(&r2, &u2).unwrap().to_wave_state(&g).unwrap();
        let a = p1.inner(&WaveState::new(r2, u2).unwrap()).unwrap();
        let b = WaveState::new(r1, u1).unwrap().inner(&p2).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn split_invariants_on_random_data() {
        let g = Arc::new(SlabGrid::new(4.0 * PI, 32, 32, 8).unwrap());
        let (r, u) = random_pair(&g, 5);
        let c = CutoffSpec::from_delta(0.3).unwrap();
        let d = decompose_initial_data(&r, &u, &c).unwrap();
        assert!(d.orthogonality_defect().unwrap() < 1e-10);
        assert!(d.reconstruction_defect().unwrap() < 1e-12);
        assert!(d.kernel.geostrophic_defect().unwrap() < 1e-12);
    }

    #[test]
    fn kernel_data_has_no_wave_part() {
        let g = Arc::new(SlabGrid::new(4.0 * PI, 32, 32, 4).unwrap());
        let plane = Arc::new(g.plane());
        // frequency-localized stream function, well inside every cut-off
        let q = ScalarField::from_fn(&plane, |x, y, _| (0.5 * x).cos() * (0.75 * y).sin());
        let k = KernelPair::from_stream(q).unwrap();
        let w = k.to_wave_state(&g).unwrap();
        let c = CutoffSpec::new(0.2, 0.4, 2.0, 3.0, 1e3, 1e3, 2).unwrap();
        let full = decompose_initial_data(&w.s, &w.v, &c).unwrap();
        assert!(full.s.sup_norm() < 1e-10);
        assert!(full.big_v.sup_norm() < 1e-10);
    }

    #[test]
    fn oversized_cutoff_returns_zero_split() {
        let g = Arc::new(SlabGrid::new(PI, 8, 8, 4).unwrap());
        let (r, u) = random_pair(&g, 8);
        // grid resolves |xi| <= 4, the bump starts at 50
        let c = CutoffSpec::new(50.0, 60.0, 70.0, 80.0, 10.0, 1.0, 2).unwrap();
        let d = decompose_initial_data(&r, &u, &c).unwrap();
        assert_eq!(d.s.sup_norm(), 0.0);
        assert_eq!(d.kernel.q.sup_norm(), 0.0);
    }

    #[test]
    fn mollification_error_shrinks_with_delta() {
        let g = Arc::new(SlabGrid::new(4.0 * PI, 32, 32, 8).unwrap());
        let f = crate::random::band_limited_field(&g, 3, 1.0);
        let f = crate::symmetry::parity_part(&f, crate::field::Parity::Even);
        let mut prev = f64::INFINITY;
        for d in [0.8, 0.5, 0.3, 0.2, 0.1] {
            let c = CutoffSpec::from_delta(d).unwrap();
            let e = mollify(&f, &c).unwrap().sub(&f).unwrap().l2_norm();
            assert!(e <= prev * (1.0 + 1e-12), "{d}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn cutoff_commutes_with_projection() {
        let g = slab();
        let (r, u) = random_pair(&g, 9);
        let c = CutoffSpec::new(0.5, 1.0, 2.0, 3.0, 1e3, 1e3, 8).unwrap();
        let freq = |f: &ScalarField| inverse(&apply_frequency_cutoff(&forward(f).unwrap(), &c));
        let a = freq(&project_to_kernel(&r, &u).unwrap().q);
        let uc = VectorField::new(u.components().iter().map(freq).collect()).unwrap();
        let b = project_to_kernel(&freq(&r), &uc).unwrap().q;
        assert!(a.sub(&b).unwrap().sup_norm() < 1e-12);
    }
}
