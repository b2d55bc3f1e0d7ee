//! Smooth cut-offs in frequency and in horizontal space, used to mollify
//! initial data into something both integrable and band-limited.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpectralField};
use num_complex::Complex64;

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn glue(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone transition: 0 for `t <= 0`, 1 for `t >= 1`, C-infinity.
pub fn smooth_step(t: f64) -> f64 {
    let a = glue(t);
    let b = glue(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSpec {
    /// Support of the frequency bump is `(inner, outer)`.
    pub inner: f64,
    /// The bump equals one on `[plateau_lo, plateau_hi]`.
    pub plateau_lo: f64,
    pub plateau_hi: f64,
    pub outer: f64,
    /// Spatial cut-off equals one for `|x_h| <= radius`.
    pub radius: f64,
    /// ... and vanishes for `|x_h| >= radius + taper`.
    pub taper: f64,
    /// Largest vertical mode index kept.
    pub max_vertical_mode: usize,
}

impl CutoffSpec {
    pub fn new(
        inner: f64,
        plateau_lo: f64,
        plateau_hi: f64,
        outer: f64,
        radius: f64,
        taper: f64,
        max_vertical_mode: usize,
    ) -> Result<Self> {
        let ok = 0.0 < inner
            && inner < plateau_lo
            && plateau_lo <= plateau_hi
            && plateau_hi < outer
            && outer.is_finite()
            && radius > 0.0
            && taper > 0.0
            && radius.is_finite()
            && taper.is_finite();
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "cut-off needs 0 < a < a' <= b' < b and positive radius/taper, got \
                 a={inner}, a'={plateau_lo}, b'={plateau_hi}, b={outer}, R={radius}, w={taper}"
            )));
        }
        Ok(CutoffSpec {
            inner,
            plateau_lo,
            plateau_hi,
            outer,
            radius,
            taper,
            max_vertical_mode,
        })
    }

    /// One-parameter family: support `(delta, 1/delta)`, plateau on the
    /// geometric middle third of that interval, spatial plateau radius and
    /// taper `1/delta`, vertical modes `|n| <= floor(1/delta)`.
    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        let a = delta;
        let b = 1.0 / delta;
        let ratio = b / a;
        CutoffSpec::new(
            a,
            a * ratio.powf(1.0 / 3.0),
            a * ratio.powf(2.0 / 3.0),
            b,
            1.0 / delta,
            1.0 / delta,
            (1.0 / delta).floor() as usize,
        )
    }

    /// Frequency bump `psi(r)`, `0 <= psi <= 1`, supported in `(a, b)`.
    pub fn psi(&self, r: f64) -> f64 {
        if r <= self.inner || r >= self.outer {
            return 0.0;
        }
        let up = smooth_step((r - self.inner) / (self.plateau_lo - self.inner));
        let down = smooth_step((self.outer - r) / (self.outer - self.plateau_hi));
        up * down
    }

    /// Spatial cut-off `phi(|x_h|)`.
    pub fn phi(&self, rho: f64) -> f64 {
        smooth_step((self.radius + self.taper - rho) / self.taper)
    }
}

/// Multiply each coefficient by `psi(|xi|)` and drop vertical modes above the
/// bound.
pub fn apply_frequency_cutoff(f: &SpectralField, c: &CutoffSpec) -> SpectralField {
    let g = f.grid().clone();
    let mut out = f.clone();
    for (idx, z) in out.coeffs_mut().iter_mut().enumerate() {
        let [a, b, _] = g.mode(idx);
        let n = g.mode_numbers(idx)[2].unsigned_abs() as usize;
        let w = if n > c.max_vertical_mode {
            0.0
        } else {
            c.psi(a.hypot(b))
        };
        *z *= Complex64::new(w, 0.0);
    }
    out
}

/// Pointwise product with `phi(|x_h|)`.
pub fn apply_spatial_cutoff(f: &ScalarField, c: &CutoffSpec) -> ScalarField {
    let g = f.grid().clone();
    let mut out = f.clone();
    for (idx, v) in out.data_mut().iter_mut().enumerate() {
        let [x, y, _] = g.coords(idx);
        *v *= c.phi(x.hypot(y));
    }
    out
}
