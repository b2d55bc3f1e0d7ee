//! Grid functions: real samples in physical space and complex Fourier
//! coefficients in spectral space.

use crate::error::{Error, Result};
use crate::grid::SlabGrid;
use num_complex::Complex64;
use std::sync::Arc;

/// Behaviour under the reflection `x3 -> -x3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SlabGrid>,
    data: Vec<f64>,
    parity: Option<Parity>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<SlabGrid>) -> Self {
        ScalarField {
            grid: Arc::clone(grid),
            data: vec![0.0; grid.len()],
            parity: None,
        }
    }

    pub fn from_vec(grid: &Arc<SlabGrid>, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(ScalarField {
            grid: Arc::clone(grid),
            data,
            parity: None,
        })
    }

    /// Sample `f(x1, x2, x3)` at every grid point.
    pub fn from_fn(grid: &Arc<SlabGrid>, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|idx| {
                let [x, y, z] = grid.coords(idx);
                f(x, y, z)
            })
            .collect();
        ScalarField {
            grid: Arc::clone(grid),
            data,
            parity: None,
        }
    }

    pub fn constant(grid: &Arc<SlabGrid>, c: f64) -> Self {
        ScalarField {
            grid: Arc::clone(grid),
            data: vec![c; grid.len()],
            parity: None,
        }
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = Some(parity);
        self
    }

    pub fn parity(&self) -> Option<Parity> {
        self.parity
    }

    pub fn set_parity(&mut self, parity: Option<Parity>) {
        self.parity = parity;
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        same_grid(&self.grid, &other.grid)
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: Arc::clone(&self.grid),
            data: self.data.iter().map(|&v| f(v)).collect(),
            parity: None,
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        Ok(ScalarField {
            grid: Arc::clone(&self.grid),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            parity: None,
        })
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        let mut out = self.map(|v| c * v);
        out.parity = self.parity;
        out
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Trapezoidal quadrature over the periodic domain.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let s: f64 = self.data.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume())
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Broadcast a planar field to every level of a slab grid with the
    /// same horizontal layout.
    pub fn extend_vertically(&self, slab: &Arc<SlabGrid>) -> Result<ScalarField> {
        let g = &self.grid;
        if !g.is_planar()
            || g.nx() != slab.nx()
            || g.ny() != slab.ny()
            || g.half_width() != slab.half_width()
        {
            return Err(Error::GridMismatch);
        }
        let nz = slab.nz();
        let mut data = Vec::with_capacity(slab.len());
        for &v in &self.data {
            data.extend(std::iter::repeat_n(v, nz));
        }
        Ok(ScalarField {
            grid: Arc::clone(slab),
            data,
            parity: Some(Parity::Even),
        })
    }

    /// Restrict to the horizontal plane by averaging over `x3`.
    pub fn vertical_mean(&self) -> ScalarField {
        let g = &self.grid;
        let plane = Arc::new(g.plane());
        let nz = g.nz();
        let data = self
            .data
            .chunks_exact(nz)
            .map(|c| c.iter().sum::<f64>() / nz as f64)
            .collect();
        ScalarField {
            grid: plane,
            data,
            parity: None,
        }
    }
}

pub(crate) fn same_grid(a: &Arc<SlabGrid>, b: &Arc<SlabGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// A vector field with two (horizontal) or three components.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        if !(components.len() == 2 || components.len() == 3) {
            return Err(Error::InvalidParameter(format!(
                "vector fields have 2 or 3 components, got {}",
                components.len()
            )));
        }
        for c in &components[1..] {
            components[0].check_same_grid(c)?;
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: &Arc<SlabGrid>, dim: usize) -> Self {
        VectorField {
            components: (0..dim).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// Zero field carrying the symmetry-class parities: even horizontal
    /// components, odd vertical component.
    pub fn zeros_symmetric(grid: &Arc<SlabGrid>) -> Self {
        let mut v = Self::zeros(grid, 3);
        v.tag_symmetry_class();
        v
    }

    pub fn tag_symmetry_class(&mut self) {
        for (i, c) in self.components.iter_mut().enumerate() {
            c.set_parity(Some(if i < 2 { Parity::Even } else { Parity::Odd }));
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    /// Horizontal part `(v1, v2)`.
    pub fn horizontal(&self) -> VectorField {
        VectorField {
            components: self.components[..2].to_vec(),
        }
    }

    /// Append a zero vertical component to a horizontal field.
    pub fn with_zero_vertical(&self) -> VectorField {
        let mut components = self.components[..2].to_vec();
        components.push(ScalarField::zeros(self.grid()));
        VectorField { components }
    }

    pub fn check_same_grid(&self, other: &VectorField) -> Result<()> {
        same_grid(self.grid(), other.grid())
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a.sub(b))
    }

    fn zip(
        &self,
        other: &VectorField,
        f: impl Fn(&ScalarField, &ScalarField) -> Result<ScalarField>,
    ) -> Result<VectorField> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidParameter("vector dimension mismatch".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(VectorField { components })
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField {
            components: self.components.iter().map(|f| f.scale(c)).collect(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().map(ScalarField::l2_norm_sq).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        let mut s = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            s += a.inner(b)?;
        }
        Ok(s)
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let g = self.grid();
        let mut out = ScalarField::zeros(g);
        for c in &self.components {
            for (o, v) in out.data_mut().iter_mut().zip(c.data()) {
                *o += v * v;
            }
        }
        out.map(f64::sqrt)
    }

    pub fn sup_norm(&self) -> f64 {
        self.magnitude().sup_norm()
    }

    pub fn vertical_mean(&self) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| c.vertical_mean()).collect(),
        }
    }

    pub fn extend_vertically(&self, slab: &Arc<SlabGrid>) -> Result<VectorField> {
        let components = self
            .components
            .iter()
            .map(|c| c.extend_vertically(slab))
            .collect::<Result<_>>()?;
        Ok(VectorField { components })
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        self.components.iter().try_for_each(|c| c.check_finite(what))
    }
}

/// Fourier coefficients of a field, same index layout as the samples.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<SlabGrid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<SlabGrid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_vec(grid: &Arc<SlabGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Arc<SlabGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        same_grid(&self.grid, &other.grid)
    }

    /// Multiply every coefficient by a symbol of the derivative wavevector.
    pub fn multiplier(&self, symbol: impl Fn([f64; 3]) -> Complex64) -> SpectralField {
        let g = &self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * symbol(g.mode(idx)))
            .collect();
        SpectralField {
            grid: Arc::clone(g),
            coeffs,
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        Ok(SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        Ok(SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> SpectralField {
        SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    /// Sum of squared moduli; equals the squared L2 norm of the physical
    /// field under the unitary normalization.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Zero the top third of modes on every axis.
    pub fn dealias(&mut self) {
        let g = Arc::clone(&self.grid);
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !g.dealias_keep(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Largest `|c(m) - conj(c(-m))|` over modes whose negative is resolved.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = &self.grid;
        let [nx, ny, nz] = g.shape();
        let neg = |i: usize, n: usize| (n - i) % n;
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let (i, j, l) = g.unravel(idx);
            let m = g.index(neg(i, nx), neg(j, ny), neg(l, nz));
            worst = worst.max((self.coeffs[idx] - self.coeffs[m].conj()).norm());
        }
        worst
    }
}
