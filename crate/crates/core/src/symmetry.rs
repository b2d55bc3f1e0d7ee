//! Reflection symmetry in the vertical variable: density and horizontal
//! velocity are even in `x3`, the vertical velocity is odd. This encodes the
//! complete-slip walls at `x3 = 0, 1` on the doubled periodic interval.

use crate::error::{Error, Result};
use crate::field::{Parity, ScalarField, VectorField};

/// Project onto the even (`Parity::Even`) or odd part in `x3`.
pub fn parity_part(f: &ScalarField, parity: Parity) -> ScalarField {
    let g = f.grid().clone();
    let nz = g.nz();
    let src = f.data();
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let mut out = f.clone();
    for (col_out, col_in) in out.data_mut().chunks_exact_mut(nz).zip(src.chunks_exact(nz)) {
        for l in 0..nz {
            col_out[l] = 0.5 * (col_in[l] + sign * col_in[g.mirror_z(l)]);
        }
    }
    out.set_parity(Some(parity));
    out
}

/// Largest deviation of a field from the given parity.
pub fn parity_defect(f: &ScalarField, parity: Parity) -> f64 {
    let other = match parity {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
    };
    parity_part(f, other).sup_norm()
}

/// Replace `rho, u1, u2` by their even parts and `u3` by its odd part.
pub fn enforce_symmetry_class(rho: &ScalarField, u: &VectorField) -> Result<(ScalarField, VectorField)> {
    if u.dim() != 3 {
        return Err(Error::InvalidParameter(
            "symmetry class needs a 3-component velocity".into(),
        ));
    }
    rho.check_same_grid(u.component(0))?;
    let r = parity_part(rho, Parity::Even);
    let v = VectorField::new(vec![
        parity_part(u.component(0), Parity::Even),
        parity_part(u.component(1), Parity::Even),
        parity_part(u.component(2), Parity::Odd),
    ])?;
    Ok((r, v))
}

/// Worst parity violation over `(rho, u)`.
pub fn symmetry_defect(rho: &ScalarField, u: &VectorField) -> f64 {
    let mut d = parity_defect(rho, Parity::Even);
    for (i, c) in u.components().iter().enumerate() {
        let p = if i < 2 { Parity::Even } else { Parity::Odd };
        d = d.max(parity_defect(c, p));
    }
    d
}
