use nalgebra::Matrix4;
use num_complex::Complex64;

/// Fourier symbol of the acoustic-Rossby generator at one mode. In spectral
/// variables `(s, V1, V2, V3)` the linear system reads
/// `eps * dy/dt + i A(xi, k) y = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSymbol {
    pub xi: [f64; 2],
    pub k: f64,
    pub matrix: Matrix4<Complex64>,
}

/// Eigen-decomposition of a [`ModeSymbol`].
///
/// `eigenvalues = [l1, l2, l3, l4]` with `l1 >= l3 >= 0 >= l4 = -l3 >= l2 = -l1`.
/// `q` is unitary and `q * A * q^H = diag(eigenvalues)`; row `j` of `q` is the
/// conjugate transpose of the eigenvector for `eigenvalues[j]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: [f64; 4],
    pub q: Matrix4<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn assemble_symbol(xi: [f64; 2], k: f64) -> ModeSymbol {
    let [a, b] = xi;
    let i = Complex64::new(0.0, 1.0);
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        ZERO,  re(a), re(b), re(k),
        re(a), ZERO,  i,     ZERO,
        re(b), -i,    ZERO,  ZERO,
        re(k), ZERO,  ZERO,  ZERO,
    );
    ModeSymbol { xi, k, matrix }
}

/// Closed-form eigenvalues `(l1, -l1, l3, -l3)`.
///
/// With `S = 1 + |xi|^2 + k^2` the squares are `(S +- sqrt(S^2 - 4k^2)) / 2`.
/// The discriminant is evaluated as `(1 + |xi|^2 - k^2)^2 + 4 |xi|^2 k^2`,
/// which is the same number written as a sum of squares, and `l3` as
/// `|k| / l1` (the product of the two squares is `k^2`), avoiding
/// cancellation at large `|xi|`.
pub fn eigenvalues_closed_form(xi: [f64; 2], k: f64) -> [f64; 4] {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    let k2 = k * k;
    let s = 1.0 + r2 + k2;
    let d = (1.0 + r2 - k2).powi(2) + 4.0 * r2 * k2;
    debug_assert!(d >= 0.0);
    let l1 = (0.5 * (s + d.sqrt())).sqrt();
    let l3 = k.abs() / l1;
    [l1, -l1, l3, -l3]
}

/// Fast-branch eigenvalue as a function of `|xi|` only.
pub fn fast_eigenvalue(r: f64, k: f64) -> f64 {
    eigenvalues_closed_form([r, 0.0], k)[0]
}

pub fn eigensystem(xi: [f64; 2], k: f64) -> EigenSystem {
    let sym = assemble_symbol(xi, k);
    let eig = sym.matrix.symmetric_eigen();
    let vals: [f64; 4] = std::array::from_fn(|j| eig.eigenvalues[j]);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    // descending e1 >= e2 >= e3 >= e4  ->  (l1, l2, l3, l4) = (e1, e4, e2, e3)
    let slots = [order[0], order[3], order[1], order[2]];
    let mut q = Matrix4::<Complex64>::zeros();
    let mut eigenvalues = [0.0; 4];
    for (row, &col) in slots.iter().enumerate() {
        eigenvalues[row] = vals[col];
        let mut v: [Complex64; 4] = std::array::from_fn(|r| eig.eigenvectors[(r, col)]);
        if let Some(lead) = v.iter().find(|z| z.norm() > 1e-8) {
            let phase = lead.conj() / lead.norm();
            v.iter_mut().for_each(|z| *z *= phase);
        }
        for (c, z) in v.iter().enumerate() {
            q[(row, c)] = z.conj();
        }
    }
    EigenSystem { eigenvalues, q }
}

impl EigenSystem {
    /// `Q^H exp(-i tau Lambda) Q`, the exact solution operator over a
    /// rescaled time `tau = t / eps`.
    pub fn exponential(&self, tau: f64) -> Matrix4<Complex64> {
        let mut scaled = self.q;
        for (row, &l) in self.eigenvalues.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -tau * l);
            for c in 0..4 {
                scaled[(row, c)] *= ph;
            }
        }
        self.q.adjoint() * scaled
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.q * self.q.adjoint() - Matrix4::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn diagonalization_defect(&self, sym: &ModeSymbol) -> f64 {
        let d = self.q * sym.matrix * self.q.adjoint();
        let mut worst: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                let target = if r == c { re(self.eigenvalues[r]) } else { ZERO };
                worst = worst.max((d[(r, c)] - target).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use rand::Rng;
    use std::f64::consts::PI;

    #[test]
    fn symbol_at_origin_is_rotation_block() {
        let a = assemble_symbol([0.0, 0.0], 0.0).matrix;
        for r in 0..4 {
            for c in 0..4 {
                let expected = match (r, c) {
                    (1, 2) => Complex64::new(0.0, 1.0),
                    (2, 1) => Complex64::new(0.0, -1.0),
                    _ => ZERO,
                };
                assert_eq!(a[(r, c)], expected);
            }
        }
    }

    #[test]
    fn symbol_is_hermitian_and_first_row() {
        let a = assemble_symbol([1.0, 0.0], 0.0).matrix;
        assert_eq!(a.row(0).iter().map(|z| z.re).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0, 0.0]);
        let b = assemble_symbol([0.3, -2.0], 3.0 * PI).matrix;
        assert_eq!(b, b.adjoint());
    }

    #[test]
    fn slow_branch_vanishes_without_vertical_wavenumber() {
        for r in [0.0, 0.5, 3.0, 40.0] {
            let l = eigenvalues_closed_form([r, 0.3 * r], 0.0);
            assert_eq!(l[2], 0.0);
            assert_eq!(l[3], 0.0);
        }
    }

    #[test]
    fn closed_form_at_horizontal_rest() {
        // at xi = 0 the discriminant is (1 - k^2)^2: l1 = max(1,|k|), l3 = min(1,|k|)
        let l = eigenvalues_closed_form([0.0, 0.0], 0.0);
        assert!((l[0] - 1.0).abs() < 1e-15);
        let l = eigenvalues_closed_form([0.0, 0.0], PI);
        assert!((l[0] - PI).abs() < 1e-14);
        assert!((l[2] - 1.0).abs() < 1e-14);
        let numeric = eigensystem([0.0, 0.0], PI).eigenvalues;
        assert!((numeric[0] - PI).abs() < 1e-13 && (numeric[2] - 1.0).abs() < 1e-13);
        let numeric = eigensystem([0.0, 0.0], 0.0).eigenvalues;
        assert!((numeric[0] - 1.0).abs() < 1e-14 && (numeric[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn textbook_formula_agrees_with_stable_form() {
        let mut r = rng(11);
        for _ in 0..1000 {
            let xi = [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)];
            let k = PI * r.gen_range(-3i32..=3) as f64;
            let s = 1.0 + xi[0] * xi[0] + xi[1] * xi[1] + k * k;
            let root = (s * s - 4.0 * k * k).sqrt();
            let l1 = ((s + root) / 2.0).sqrt();
            let l3 = ((s - root) / 2.0).max(0.0).sqrt();
            let c = eigenvalues_closed_form(xi, k);
            assert!((c[0] - l1).abs() < 1e-12);
            assert!((c[2] - l3).abs() < 1e-7);
        }
    }

    #[test]
    fn eigensystem_is_unitary_and_diagonalizes() {
        let mut r = rng(5);
        for _ in 0..500 {
            let xi = [r.gen_range(-20.0..20.0), r.gen_range(-20.0..20.0)];
            let k = r.gen_range(-10.0..10.0) * PI;
            let e = eigensystem(xi, k);
            assert!(e.unitarity_defect() < 1e-12);
            assert!(e.diagonalization_defect(&assemble_symbol(xi, k)) < 1e-12);
            let c = eigenvalues_closed_form(xi, k);
            for j in 0..4 {
                assert!((c[j] - e.eigenvalues[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn exponential_at_zero_is_identity() {
        let e = eigensystem([0.7, -0.2], PI);
        let m = e.exponential(0.0);
        assert!((m - Matrix4::identity()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn branches_are_monotone_in_horizontal_wavenumber() {
        for n in 0..4 {
            let k = PI * n as f64;
            let mut prev = eigenvalues_closed_form([0.0, 0.0], k);
            for i in 1..400 {
                let r = 0.05 * i as f64;
                let cur = eigenvalues_closed_form([r, 0.0], k);
                assert!(cur[0] > prev[0]);
                if n > 0 {
                    assert!(cur[2] < prev[2]);
                }
                prev = cur;
            }
        }
    }
}
