//! Radial cutoffs built from the quintic `S(t) = 10t³ - 15t⁴ + 6t⁵`.

use crate::error::{Error, Result};
use crate::quadrature::smoothstep;
use crate::scalar::{lit, norm, Real};

/// `ψ_{r₁,r₂}`: equal to 1 on `B_{r₂}`, to 0 outside `B_{r₁}`, and
/// `1 - S((|x| - r₂)/(r₁ - r₂))` in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff<T> {
    pub outer: T,
    pub inner: T,
}

impl<T: Real> Cutoff<T> {
    pub fn new(outer: T, inner: T) -> Result<Self> {
        if !(inner > T::zero() && outer > inner) {
            return Err(Error::Domain(format!("cutoff needs 0 < r2 < r1, got r1={outer}, r2={inner}")));
        }
        Ok(Self { outer, inner })
    }

    /// The fixed cutoff `φ = ψ_{1,1/2}`.
    pub fn phi() -> Self {
        Self { outer: T::one(), inner: lit(0.5) }
    }

    pub fn radial(&self, r: T) -> T {
        T::one() - smoothstep((r - self.inner) / (self.outer - self.inner))
    }

    pub fn eval(&self, x: &[T; 2], dim: usize) -> T {
        self.radial(norm(x, dim))
    }
}
