//! Fourier multipliers of the constant-kernel operator in 1D, used as an
//! oracle for the periodic solver.
//!
//! `L cos(k·) = -μ(k) cos(k·)` with `μ(k) = (2-σ) ∫ (1 - cos ky) |y|^{-1-σ} dy`.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, geometric_panels, mapped_rule};
use crate::scalar::{lit, Real};

/// Periods integrated explicitly before the asymptotic tail takes over.
const PERIODS: usize = 4000;

/// `μ(k)` by direct quadrature in `y`.
///
/// Near the origin the Taylor terms of `1 - cos` are integrated exactly, then
/// log panels cover the first period and one Gauss rule per period the rest.
/// The tail beyond a whole number of periods uses two integrations by parts.
pub fn fractional_symbol(sigma: f64, k: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::Domain(format!("sigma must lie in (0, 2), got {sigma}")));
    }
    let k = k.abs();
    if k == 0.0 {
        return Ok(0.0);
    }
    let period = std::f64::consts::TAU / k;
    let eps = 1e-6 * period;
    let s = sigma;
    // ∫_0^ε (k²y²/2 - k⁴y⁴/24) y^{-1-σ} dy
    let head = k * k * eps.powf(2.0 - s) / (2.0 * (2.0 - s)) - k.powi(4) * eps.powf(4.0 - s) / (24.0 * (4.0 - s));
    let f = |y: f64| (1.0 - (k * y).cos()) * y.powf(-1.0 - s);
    let log_rule = gauss_legendre(12);
    let mut first = 0.0;
    for (lo, hi) in geometric_panels(eps, period, 12) {
        for (tau, w) in mapped_rule::<f64>(&log_rule, lo.ln(), hi.ln()) {
            let y = tau.exp();
            first += w * y * f(y);
        }
    }
    let rule = gauss_legendre(20);
    let mut body = 0.0;
    for j in 1..PERIODS {
        let (a, b) = (j as f64 * period, (j + 1) as f64 * period);
        body += mapped_rule::<f64>(&rule, a, b).map(|(y, w)| w * f(y)).sum::<f64>();
    }
    let big = PERIODS as f64 * period;
    let tail = big.powf(-s) / s - (1.0 + s) * big.powf(-2.0 - s) / (k * k);
    let value = 2.0 * (2.0 - s) * (head + first + body + tail);
    if !value.is_finite() {
        return Err(crate::error::numeric("fractional symbol quadrature"));
    }
    Ok(value)
}

/// Multipliers `μ(k)` for `k = 0..=k_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralOracle<T> {
    sigma: T,
    multipliers: Vec<T>,
}

impl<T: Real> SpectralOracle<T> {
    pub fn new(sigma: T, k_max: usize) -> Result<Self> {
        let s = crate::scalar::to_f64(sigma);
        let multipliers = (0..=k_max).map(|k| fractional_symbol(s, k as f64).map(lit)).collect::<Result<Vec<T>>>()?;
        Ok(Self { sigma, multipliers })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// `μ(k)`; symmetric in `k`.
    pub fn mu(&self, k: i64) -> Option<T> {
        self.multipliers.get(k.unsigned_abs() as usize).copied()
    }

    pub fn multipliers(&self) -> &[T] {
        &self.multipliers
    }

    /// `e^{-μ(k) t} cos(k x)`, the exact evolution of `cos(k·)`.
    pub fn evolve_cos(&self, k: i64, x: T, t: T) -> Option<T> {
        self.mu(k).map(|m| (-m * t).exp() * (lit::<T>(k as f64) * x).cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn closed_form(sigma: f64) -> f64 {
        if (sigma - 1.0).abs() < 1e-14 {
            return std::f64::consts::PI;
        }
        -2.0 * (2.0 - sigma) * gamma(-sigma) * (std::f64::consts::PI * sigma / 2.0).cos()
    }

    #[test]
    fn matches_gamma_closed_form() {
        for s in [0.5, 1.0, 1.25, 1.5, 1.75, 1.9, 1.99, 1.999] {
            let q = fractional_symbol(s, 1.0).unwrap();
            let c = closed_form(s);
            assert!((q - c).abs() < 1e-8 * c, "sigma {s}: {q} vs {c}");
        }
        let mu = fractional_symbol(1.5, 1.0).unwrap();
        assert!((mu - 1.671).abs() < 1e-3);
    }

    #[test]
    fn multipliers_scale_and_are_even() {
        let o = SpectralOracle::<f64>::new(1.5, 4).unwrap();
        assert_eq!(o.mu(0), Some(0.0));
        assert_eq!(o.mu(3), o.mu(-3));
        let ratio = o.mu(4).unwrap() / o.mu(1).unwrap();
        assert!((ratio - 8.0).abs() < 1e-7);
        assert!(o.multipliers()[1..].iter().all(|m| *m > 0.0));
    }
}
