use crate::error::{Error, Result};

/// `p(rho) = rho^gamma / gamma`, normalized so that `p'(1) = 1`, together
/// with the free energy `H(rho) = (rho^gamma - rho) / (gamma (gamma - 1))`,
/// which satisfies `rho H'' = p'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureLaw {
    gamma: f64,
}

/// Below this `|x|` the binomial remainder is summed as a series.
const SERIES_CUTOFF: f64 = 0.05;
const SERIES_TERMS: usize = 24;

impl PressureLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.5 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("γ must exceed 3/2, got {gamma}")));
        }
        Ok(PressureLaw { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p(&self, rho: f64) -> f64 {
        rho.powf(self.gamma) / self.gamma
    }

    pub fn dp(&self, rho: f64) -> f64 {
        rho.powf(self.gamma - 1.0)
    }

    pub fn h(&self, rho: f64) -> f64 {
        let g = self.gamma;
        (rho.powf(g) - rho) / (g * (g - 1.0))
    }

    pub fn dh(&self, rho: f64) -> f64 {
        let g = self.gamma;
        (g * rho.powf(g - 1.0) - 1.0) / (g * (g - 1.0))
    }

    pub fn ddh(&self, rho: f64) -> f64 {
        rho.powf(self.gamma - 2.0)
    }

    /// `(1 + x)^gamma - 1 - gamma x` for `x > -1`, without cancellation
    /// near `x = 0`.
    pub fn binom_rem(&self, x: f64) -> f64 {
        let g = self.gamma;
        if x.abs() < SERIES_CUTOFF {
            // sum_{n >= 2} C(g, n) x^n
            let mut coeff = g * (g - 1.0) / 2.0;
            let mut pow = x * x;
            let mut sum = 0.0;
            for n in 2..SERIES_TERMS + 2 {
                let term = coeff * pow;
                sum += term;
                if term == 0.0 {
                    break;
                }
                coeff *= (g - n as f64) / (n as f64 + 1.0);
                pow *= x;
            }
            sum
        } else {
            (1.0 + x).powf(g) - 1.0 - g * x
        }
    }

    /// `[p(1 + eps s) - p(1) - eps s] / eps^2`, the part of the pressure
    /// that is not absorbed by the linear acoustic term.
    pub fn pressure_remainder(&self, sigma: f64, eps: f64) -> f64 {
        self.binom_rem(eps * sigma) / (self.gamma * eps * eps)
    }

    /// `H(rho) - H'(r)(rho - r) - H(r)`, non-negative for `rho, r > 0`.
    pub fn bregman(&self, rho: f64, r: f64) -> f64 {
        let g = self.gamma;
        r.powf(g) * self.binom_rem((rho - r) / r) / (g * (g - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_basic_values() {
        for g in [1.6, 2.0, 5.0 / 3.0, 3.0] {
            let law = PressureLaw::new(g).unwrap();
            assert_eq!(law.p(0.0), 0.0);
            assert!((law.dp(1.0) - 1.0).abs() < 1e-15);
            assert!(law.h(1.0).abs() < 1e-15);
            assert!((law.dh(1.0) - 1.0 / g).abs() < 1e-15);
            for rho in [0.3, 1.0, 2.7] {
                assert!(law.dp(rho) > 0.0);
                assert!((law.ddh(rho) - law.dp(rho) / rho).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_small_gamma() {
        let e = PressureLaw::new(1.2).unwrap_err().to_string();
        assert!(e.contains("γ must exceed 3/2"));
        assert!(PressureLaw::new(1.5).is_err());
    }

    #[test]
    fn series_and_direct_forms_meet() {
        for g in [1.6, 2.0, 2.4, 7.0 / 5.0 + 0.2] {
            let law = PressureLaw::new(g).unwrap();
            for x in [0.049_999f64, 0.05, -0.049_999, -0.05] {
                let direct = (1.0 + x).powf(g) - 1.0 - g * x;
                // the direct form loses about 1e-13 to cancellation here
                assert!((law.binom_rem(x) - direct).abs() < 1e-12 * direct.abs());
            }
        }
    }

    #[test]
    fn gamma_two_closed_forms() {
        let law = PressureLaw::new(2.0).unwrap();
        for &s in &[-3.0, -0.1, 1e-9, 0.7, 4.0] {
            for &eps in &[0.4, 0.05, 1e-4] {
                let r = law.pressure_remainder(s, eps);
                assert!((r - 0.5 * s * s).abs() <= 1e-12 * (0.5 * s * s));
            }
        }
        for &rho in &[0.2, 0.99, 1.0, 1.001, 3.0] {
            let b = law.bregman(rho, 1.0);
            let exact = 0.5 * (rho - 1.0) * (rho - 1.0);
            assert!((b - exact).abs() <= 1e-12 * exact.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn bregman_is_nonnegative_and_quadratic_near_diagonal() {
        let law = PressureLaw::new(1.7).unwrap();
        for i in 1..40 {
            for j in 1..40 {
                let (rho, r) = (0.1 * i as f64, 0.1 * j as f64);
                assert!(law.bregman(rho, r) >= 0.0);
            }
        }
        for d in [1e-3, -1e-3] {
            let ratio = law.bregman(1.0 + d, 1.0) / (d * d);
            assert!((ratio - 0.5).abs() < 1e-4);
        }
    }
}
