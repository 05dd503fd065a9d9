//! Normalization, the fractional Laplacian, the sign-adapted bound on
//! `L_{K,b} u` and Hölder fits on shrinking cylinders.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{time_lipschitz_seminorm, weighted_l1, Cylinder, FieldSlice, SpaceTimeField};
use crate::kernel::KernelSpec;
use crate::nonlocal::{evaluate_linear_slice, Probe, QuadratureConfig, QuadratureRule};
use crate::scalar::{lit, norm, Real};

use super::pn::least_squares;

/// `sup_t ‖u(t)‖_{L¹(ω_σ)} + [u]_{C^{0,1}(L¹(ω_σ))}` over the stored times.
pub fn normalization_constant<T: Real>(u: &SpaceTimeField<T>) -> Result<T> {
    let mut sup = T::zero();
    for &t in u.times() {
        sup = sup.max(weighted_l1(u, t)?);
    }
    let lip = if u.len() > 1 { time_lipschitz_seminorm(u)? } else { T::zero() };
    Ok(sup + lip)
}

/// `u / S` when `S = normalization_constant(u) > 1`, otherwise `u`; returns the divisor.
pub fn normalized<T: Real>(u: &SpaceTimeField<T>) -> Result<(SpaceTimeField<T>, T)> {
    let s = normalization_constant(u)?;
    if s > T::one() {
        log::warn!("field norm {s} exceeds 1; rescaling before the bound checks");
        Ok((u.scaled(T::one() / s), s))
    } else {
        Ok((u.clone(), T::one()))
    }
}

/// Constant-kernel operator with the sign flipped: positive at a maximum.
#[derive(Clone, Debug)]
pub struct FracLaplacian<T> {
    kernel: KernelSpec<T>,
    rule: QuadratureRule<T>,
}

impl<T: Real> FracLaplacian<T> {
    pub fn new(grid: &crate::field::Grid<T>, sigma: T, cfg: &QuadratureConfig<T>) -> Result<Self> {
        let kernel = KernelSpec::new(grid.dim(), sigma, "const", |_y: &[T; 2]| T::one())?;
        let rule = QuadratureRule::for_kernel(grid, &kernel, cfg)?;
        Ok(Self { kernel, rule })
    }

    pub fn at(&self, s: &FieldSlice<'_, T>, x: &[T; 2]) -> Result<T> {
        Ok(-evaluate_linear_slice(&self.kernel, s, x, &self.rule)?.value)
    }

    /// Values at the given nodes.
    pub fn nodes(&self, s: &FieldSlice<'_, T>, nodes: &[usize]) -> Result<Vec<T>> {
        nodes.par_iter().map(|&i| self.at(s, &s.grid.point(i))).collect()
    }
}

pub fn frac_laplacian<T: Real>(u: &SpaceTimeField<T>, x: &[T; 2], t: T) -> Result<T> {
    let op = FracLaplacian::new(u.grid(), u.sigma(), &QuadratureConfig::default())?;
    op.at(&u.slice_at(t)?, x)
}

/// Sign-adapted bounds at the nodes of a cylinder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundL<T> {
    /// `sup |L_{K,b} u|` over `K ∈ [0, Λ]`, `|b| ≤ β`, attained by `K = Λ[δu > 0]` or `Λ[δu < 0]`.
    pub sup_l: T,
    /// `sup (2-σ) ∫ |δu| |y|^{-n-σ} dy`.
    pub abs_integral: T,
    /// Divisor applied by the normalization (1 when none was needed).
    pub scale: T,
    pub samples: usize,
}

/// `(Σ w δ⁺, Σ w δ⁻, |Du|)` with the individual offsets of the constant rule.
fn split_integral<T: Real>(q: &QuadratureRule<T>, s: &FieldSlice<'_, T>, idx: usize) -> (T, T, T) {
    let dim = q.dim();
    let h = q.spacing();
    let p = Probe::at_node(s, idx);
    let u0 = p.center();
    let mut g = [T::zero(); 2];
    for (a, ga) in g.iter_mut().enumerate().take(dim) {
        *ga = (p.lattice(Probe::<T>::axis(a, 1)) - p.lattice(Probe::<T>::axis(a, -1))) / (h + h);
    }
    let grad = norm(&g, dim);
    let mut pos = T::zero();
    let mut neg = T::zero();
    let mut add = |w: T, d: T| {
        if d > T::zero() {
            pos = pos + w * d;
        } else {
            neg = neg - w * d;
        }
    };
    let delta = |y: &[T; 2], uy: T| {
        let lin = if norm(y, dim) < T::one() { g[0] * y[0] + g[1] * y[1] } else { T::zero() };
        uy - u0 - lin
    };
    for pair in q.pairs() {
        let y = [h * lit(pair.off[0] as f64), h * lit(pair.off[1] as f64)];
        add(pair.plus, delta(&y, p.lattice(pair.off)));
        let ym = [-y[0], -y[1]];
        add(pair.minus, delta(&ym, p.lattice([-pair.off[0], -pair.off[1]])));
    }
    for sh in q.shells() {
        add(sh.plus, delta(&sh.y, p.point(&sh.y)));
        let ym = [-sh.y[0], -sh.y[1]];
        add(sh.minus, delta(&ym, p.point(&ym)));
    }
    let c0 = q.cell0();
    for (a, c) in c0.iter().enumerate().take(dim) {
        add(*c, p.second(a, u0) / (h * h));
    }
    (pos, neg, grad)
}

/// Evaluates the sign-adapted extremes of `L_{K,b} u` over `K ∈ [0, Λ]`,
/// `|b| ≤ β` at every node of `region`, after normalizing `u`.
pub fn check_bound_l<T: Real>(
    u: &SpaceTimeField<T>,
    upper: T,
    beta: T,
    region: &Cylinder<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<BoundL<T>> {
    if !(upper >= T::zero()) || !(beta >= T::zero()) {
        return Err(Error::Domain("bound check needs Lambda >= 0 and beta >= 0".into()));
    }
    let (v, scale) = normalized(u)?;
    let q = QuadratureRule::base(v.grid(), v.sigma(), cfg)?;
    let (space, time) = region.nodes(&v)?;
    let mut sup_l = T::zero();
    let mut abs_integral = T::zero();
    for &k in &time {
        let s = v.slice(k);
        let rows: Vec<(T, T, T)> = space.par_iter().map(|&i| split_integral(&q, &s, i)).collect();
        for (pos, neg, grad) in rows {
            sup_l = sup_l.max(upper * pos.max(neg) + beta * grad);
            abs_integral = abs_integral.max(pos + neg);
        }
    }
    Ok(BoundL { sup_l, abs_integral, scale, samples: space.len() * time.len() })
}

/// `osc_{C_{r_j, r_j^σ}} f ≈ C r_j^α` fitted over dyadic radii.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderFit<T> {
    pub alpha: T,
    pub constant: T,
    pub residual: T,
    pub radii: Vec<T>,
    pub oscillations: Vec<T>,
}

/// Fits the oscillation of `f` (values at stored slice `k`, node `i`) on the
/// cylinders `C_{r_j, r_j^σ}` with top at `t`, `r_j = r₀ 2^{-j} ≥ 2h`.
pub fn holder_fit<T: Real>(
    u: &SpaceTimeField<T>,
    t: T,
    r0: T,
    values: impl Fn(usize, usize) -> T,
) -> Result<HolderFit<T>> {
    let h = u.grid().spacing();
    let mut radii = Vec::new();
    let mut osc = Vec::new();
    let mut r = r0;
    while r >= (h + h) * (T::one() - lit(1e-9)) {
        let c = Cylinder::centered(t, r, r.powf(u.sigma()))?;
        let (space, time) = c.nodes(u)?;
        let (lo, hi) = time
            .iter()
            .flat_map(|&k| space.iter().map(move |&i| (k, i)))
            .map(|(k, i)| values(k, i))
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
        radii.push(r);
        osc.push(hi - lo);
        r = r * lit(0.5);
    }
    if radii.len() < 2 {
        return Err(Error::InsufficientResolution { finest_usable: radii.len().saturating_sub(1) });
    }
    if osc.iter().any(|o| !(*o > T::zero())) {
        return Ok(HolderFit { alpha: T::one(), constant: T::zero(), residual: T::zero(), radii, oscillations: osc });
    }
    let xs: Vec<T> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = osc.iter().map(|o| o.ln()).collect();
    let (alpha, b, residual) = least_squares(&xs, &ys);
    Ok(HolderFit { alpha, constant: b.exp(), residual, radii, oscillations: osc })
}

/// The fractional Laplacian of `u` on the nodes of `B_{r₀}` at the stored
/// times in `(t - r₀^σ, t]`, followed by [`holder_fit`].
pub fn frac_laplacian_holder<T: Real>(u: &SpaceTimeField<T>, t: T, r0: T) -> Result<HolderFit<T>> {
    let op = FracLaplacian::new(u.grid(), u.sigma(), &QuadratureConfig::default())?;
    let region = Cylinder::centered(t, r0, r0.powf(u.sigma()))?;
    let (space, time) = region.nodes(u)?;
    let mut table = vec![Vec::new(); u.len()];
    for &k in &time {
        let vals = op.nodes(&u.slice(k), &space)?;
        let mut row = vec![T::nan(); u.grid().len()];
        for (i, v) in space.iter().zip(vals) {
            row[*i] = v;
        }
        table[k] = row;
    }
    holder_fit(u, t, r0, |k, i| table[k][i])
}
