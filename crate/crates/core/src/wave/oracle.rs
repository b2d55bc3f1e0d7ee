use super::symbol::assemble_symbol;
use nalgebra::Vector4;
use num_complex::Complex64;

const C: [&[f64]; 7] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `dy/dtau = -i A(xi, k) y` from 0 to `tau` with adaptive
/// Dormand-Prince 5(4) steps, absolute local tolerance `tol`.
///
/// Independent of the eigen-decomposition, so it serves as a reference for
/// the exact propagator.
pub fn integrate_mode_ode(xi: [f64; 2], k: f64, y0: Vector4<Complex64>, tau: f64, tol: f64) -> Vector4<Complex64> {
    let a = assemble_symbol(xi, k).matrix;
    let minus_i = Complex64::new(0.0, -1.0);
    let f = |y: &Vector4<Complex64>| a * y * minus_i;
    let dir = tau.signum();
    let end = tau.abs();
    let mut t = 0.0;
    let mut y = y0;
    let mut h: f64 = 1e-3_f64.min(end);
    while t < end {
        if t + h > end {
            h = end - t;
        }
        let hs = dir * h;
        let mut k: [Vector4<Complex64>; 7] = [Vector4::zeros(); 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, &w) in C[s].iter().enumerate() {
                ys += k[j] * Complex64::new(hs * w, 0.0);
            }
            k[s] = f(&ys);
        }
        let mut y5 = y;
        let mut err = Vector4::<Complex64>::zeros();
        for s in 0..7 {
            y5 += k[s] * Complex64::new(hs * B5[s], 0.0);
            err += k[s] * Complex64::new(hs * (B5[s] - B4[s]), 0.0);
        }
        let e = err.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if e <= tol {
            t += h;
            y = y5;
        }
        h *= (0.9 * (tol / e.max(1e-300)).powf(0.2)).clamp(0.2, 5.0);
    }
    y
}
