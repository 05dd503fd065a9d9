//! Low-level one-dimensional rules and sphere bookkeeping used by the
//! singular-integral machinery.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::scalar::{lit, Real};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, sorted by node.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let order = NonZeroUsize::new(order.max(1)).unwrap();
    let mut pairs = GaussLegendre::new(order).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn mapped_rule<T: Real>(rule: &[(f64, f64)], a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
    let half = (b - a) * lit(0.5);
    let mid = (b + a) * lit(0.5);
    rule.iter().map(move |&(x, w)| (mid + half * lit(x), half * lit(w)))
}

/// Splits `[a, b]` (with `0 < a < b`) into log-uniform panels, `per_decade` per factor of ten.
pub fn geometric_panels<T: Real>(a: T, b: T, per_decade: usize) -> Vec<(T, T)> {
    if !(b > a) || !(a > T::zero()) {
        return Vec::new();
    }
    let decades = (b / a).log10();
    let count = (decades * lit(per_decade as f64)).ceil().to_usize().unwrap_or(1).max(1);
    let ratio = (b / a).powf(T::one() / lit(count as f64));
    let mut out = Vec::with_capacity(count);
    let mut lo = a;
    for i in 0..count {
        let hi = if i + 1 == count { b } else { lo * ratio };
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Composite Gauss–Legendre on log-uniform panels of `[a, b]`, integrating in
/// `ln r` so that power-law integrands are resolved uniformly.
pub fn integrate_log_panels<T: Real, F: FnMut(T) -> T>(
    a: T,
    b: T,
    per_decade: usize,
    rule: &[(f64, f64)],
    mut f: F,
) -> T {
    let mut acc = T::zero();
    for (lo, hi) in geometric_panels(a, b, per_decade) {
        for (tau, w) in mapped_rule(rule, lo.ln(), hi.ln()) {
            let r = tau.exp();
            acc = acc + w * r * f(r);
        }
    }
    acc
}

/// Surface measure of the unit sphere in `R^n` (counting measure for `n = 1`).
pub fn sphere_area<T: Real>(dim: usize) -> T {
    match dim {
        1 => lit(2.0),
        2 => T::PI() + T::PI(),
        _ => lit::<T>(4.0) * T::PI(),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume<T: Real>(dim: usize) -> T {
    match dim {
        1 => lit(2.0),
        2 => T::PI(),
        _ => lit::<T>(4.0 / 3.0) * T::PI(),
    }
}

/// Quadrature over the unit sphere, returned as half the nodes: every node `θ`
/// implicitly pairs with `-θ` carrying the same weight. Mirroring by negation
/// keeps even integrands cancelling exactly.
///
/// For `n = 2` the half circle `[0, π)` is split into the two quadrants with
/// Gauss–Legendre nodes in each, so integrands with breaks on the axes are
/// integrated without loss of order.
pub fn half_sphere_rule<T: Real>(dim: usize, order: usize) -> Vec<([T; 2], T)> {
    if dim == 1 {
        return vec![([T::one(), T::zero()], T::one())];
    }
    let gl = gauss_legendre(order);
    let quarter = T::FRAC_PI_2();
    let mut out = Vec::with_capacity(2 * gl.len());
    for q in 0..2 {
        let a = quarter * lit(q as f64);
        for (theta, w) in mapped_rule(&gl, a, a + quarter) {
            out.push(([theta.cos(), theta.sin()], w));
        }
    }
    out
}

/// Uniform midpoint nodes on the half circle (or `+1` in 1D); each pairs with its negation.
pub fn half_sphere_uniform<T: Real>(dim: usize, count: usize) -> Vec<([T; 2], T)> {
    if dim == 1 {
        return vec![([T::one(), T::zero()], T::one())];
    }
    let full = count.max(2) & !1;
    let dtheta = (T::PI() + T::PI()) / lit(full as f64);
    (0..full / 2)
        .map(|j| {
            let theta = dtheta * (lit::<T>(j as f64) + lit(0.5));
            ([theta.cos(), theta.sin()], dtheta)
        })
        .collect()
}

/// Distance from the origin to the boundary of the square `[-a, a]^n` along the unit direction `θ`.
#[inline]
pub fn square_exit_radius<T: Real>(a: T, theta: &[T; 2], dim: usize) -> T {
    let m = if dim == 1 { theta[0].abs() } else { theta[0].abs().max(theta[1].abs()) };
    a / m
}

/// Angular sectors of the full circle whose boundaries contain the axis and diagonal
/// directions (the kinks of [`square_exit_radius`]). Used for integrals over
/// square-complement regions.
pub fn octant_rule<T: Real>(order: usize) -> Vec<([T; 2], T)> {
    let gl = gauss_legendre(order);
    let eighth = T::FRAC_PI_4();
    let mut out = Vec::with_capacity(8 * gl.len());
    for s in 0..8 {
        let a = eighth * lit(s as f64);
        for (theta, w) in mapped_rule(&gl, a, a + eighth) {
            out.push(([theta.cos(), theta.sin()], w));
        }
    }
    out
}

/// Quintic smoothstep `t^3 (10 - 15 t + 6 t^2)` clamped to `[0, 1]`; C² and monotone.
#[inline]
pub fn smoothstep<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else if t >= T::one() {
        T::one()
    } else {
        t * t * t * (lit::<T>(10.0) - lit::<T>(15.0) * t + lit::<T>(6.0) * t * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_panels_integrate_power_laws() {
        let rule = gauss_legendre(6);
        let got = integrate_log_panels(1e-3_f64, 1.0, 8, &rule, |r| r.powf(-1.5));
        let exact = (1e-3_f64.powf(-0.5) - 1.0) / 0.5;
        assert_relative_eq!(got, exact, max_relative = 1e-12);
    }

    #[test]
    fn half_sphere_rules_integrate_circle() {
        let r: Vec<([f64; 2], f64)> = half_sphere_rule(2, 16);
        let total: f64 = r.iter().map(|p| 2.0 * p.1).sum();
        assert_relative_eq!(total, 2.0 * std::f64::consts::PI, max_relative = 1e-13);
        // ∫ |cos θ| dθ = 4, kink on the axis is a panel boundary.
        let abs_cos: f64 = r.iter().map(|p| 2.0 * p.1 * p.0[0].abs()).sum();
        assert_relative_eq!(abs_cos, 4.0, max_relative = 1e-13);
    }

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.0_f64), 0.0);
        assert_eq!(smoothstep(1.0_f64), 1.0);
        assert_relative_eq!(smoothstep(0.5_f64), 0.5);
    }
}
