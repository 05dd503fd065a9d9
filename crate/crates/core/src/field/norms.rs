//! Tail-weighted `L¹` norms, the time-Lipschitz seminorm and parabolic Hölder seminorms.

use rayon::prelude::*;

use super::{Exterior, FieldSlice, Grid, SpaceTimeField, R_TAIL};
use crate::error::{numeric, Error, Result};
use crate::quadrature::{gauss_legendre, geometric_panels, mapped_rule, octant_rule, sphere_area, square_exit_radius};
use crate::scalar::{lit, norm, Real};

/// Above this many space-time nodes the Hölder seminorm switches from all pairs to dyadic strata.
pub const HOLDER_PAIR_CAP: usize = 40_000;

/// `ω_σ(y) = min(1, |y|^{-(n+σ)})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailWeight<T> {
    pub dim: usize,
    pub sigma: T,
}

impl<T: Real> TailWeight<T> {
    pub fn new(dim: usize, sigma: T) -> Self {
        Self { dim, sigma }
    }

    #[inline]
    pub fn eval(&self, y: &[T; 2]) -> T {
        self.radial(norm(y, self.dim))
    }

    #[inline]
    pub fn radial(&self, r: T) -> T {
        if r <= T::one() {
            T::one()
        } else {
            r.powf(-(lit::<T>(self.dim as f64) + self.sigma))
        }
    }

    /// `∫_0^ρ ω(r) r^{n-1} dr`.
    pub fn radial_cumulative(&self, rho: T) -> T {
        let n: T = lit(self.dim as f64);
        if rho <= T::one() {
            rho.powi(self.dim as i32) / n
        } else {
            T::one() / n + (T::one() - rho.powf(-self.sigma)) / self.sigma
        }
    }

    /// `∫_{R^n} ω = |B_1| + |S^{n-1}|/σ`.
    pub fn total(&self) -> T {
        sphere_area::<T>(self.dim) * self.radial_cumulative(T::infinity().min(lit(1e300)))
    }

    /// `∫_a^b ω` in one dimension.
    pub fn interval(&self, a: T, b: T) -> T {
        let g = |y: T| {
            let v = self.radial_cumulative(y.abs());
            if y < T::zero() {
                -v
            } else {
                v
            }
        };
        g(b) - g(a)
    }

    /// `∫_{[-a,a]^n} ω`.
    pub fn square(&self, a: T) -> T {
        if self.dim == 1 {
            return self.interval(-a, a);
        }
        octant_rule::<T>(24).iter().map(|(th, w)| *w * self.radial_cumulative(square_exit_radius(a, th, 2))).sum()
    }

    /// `∫` of `ω` over the complement of `[-a,a]^n`.
    pub fn outside_square(&self, a: T) -> T {
        if self.dim == 1 {
            let a = a.abs();
            let inner = if a < T::one() { T::one() - a } else { T::zero() };
            return lit::<T>(2.0) * (inner + a.max(T::one()).powf(-self.sigma) / self.sigma);
        }
        (self.total() - self.square(a)).max(T::zero())
    }

    /// `∫_{|y| > R} (1 + |y|^γ) |y|^{-n-σ} dy` for `R ≥ 1`, `γ < σ`.
    pub fn growth_tail(&self, r: T, gamma: T) -> Result<T> {
        if !(gamma < self.sigma) {
            return Err(Error::UnsupportedExterior(format!(
                "growth exponent {gamma} is not below the order {}",
                self.sigma
            )));
        }
        let s = self.sigma;
        Ok(sphere_area::<T>(self.dim) * (r.powf(-s) / s + r.powf(gamma - s) / (s - gamma)))
    }

    /// Per-node weights `∫_{cell} ω` for the grid (cells clipped to the box;
    /// all periodic copies summed on the torus).
    pub fn node_weights(&self, grid: &Grid<T>) -> Vec<T> {
        let h = grid.spacing();
        let half = h * lit(0.5);
        let r = grid.half_width();
        if grid.dim() == 1 {
            if !grid.is_periodic() {
                return (0..grid.len())
                    .map(|i| {
                        let x = grid.coord(i);
                        self.interval((x - half).max(-r), (x + half).min(r))
                    })
                    .collect();
            }
            let p = grid.period();
            let copies = (lit::<T>(R_TAIL) / p).ceil().to_i64().unwrap_or(1).max(1);
            let rest = h / p * self.outside_square(p * (lit::<T>(copies as f64) + lit(0.5)));
            return (0..grid.len())
                .map(|i| {
                    let x = grid.coord(i);
                    let mut w = rest;
                    for m in -copies..=copies {
                        let c = x + p * lit(m as f64);
                        w = w + self.interval(c - half, c + half);
                    }
                    w
                })
                .collect();
        }
        let gl = gauss_legendre(if grid.is_periodic() { 3 } else { 4 });
        let cell = |c: [T; 2], lo: [T; 2], hi: [T; 2]| -> T {
            let _ = c;
            let mut acc = T::zero();
            for (x, wx) in mapped_rule(&gl, lo[0], hi[0]) {
                for (y, wy) in mapped_rule(&gl, lo[1], hi[1]) {
                    acc = acc + wx * wy * self.eval(&[x, y]);
                }
            }
            acc
        };
        if !grid.is_periodic() {
            return (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let x = grid.point(i);
                    let lo = [(x[0] - half).max(-r), (x[1] - half).max(-r)];
                    let hi = [(x[0] + half).min(r), (x[1] + half).min(r)];
                    cell(x, lo, hi)
                })
                .collect();
        }
        let p = grid.period();
        let copies = 2i64;
        let rest = h * h / (p * p) * self.outside_square(p * (lit::<T>(copies as f64) + lit(0.5)));
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.point(i);
                let mut w = rest;
                for m0 in -copies..=copies {
                    for m1 in -copies..=copies {
                        let c = [x[0] + p * lit(m0 as f64), x[1] + p * lit(m1 as f64)];
                        w = w + cell(c, [c[0] - half, c[1] - half], [c[0] + half, c[1] + half]);
                    }
                }
                w
            })
            .collect()
    }

    /// `∫_{outside the box, |y| < R_TAIL} |g(y)| ω(y) dy` by log-shell quadrature.
    fn exterior_integral(&self, box_half: T, g: &(dyn Fn(&[T; 2]) -> T + Sync)) -> T {
        let tail: T = lit(R_TAIL);
        let gl = gauss_legendre(6);
        let radial = |a: T, dir: [T; 2], weight: fn(T, T) -> T| -> T {
            let mut acc = T::zero();
            if a < T::one() {
                for (lo, hi) in (0..8).map(|k| {
                    let s = (T::one() - a) / lit(8.0);
                    (a + s * lit(k as f64), a + s * lit(k as f64 + 1.0))
                }) {
                    for (r, w) in mapped_rule(&gl, lo, hi) {
                        acc = acc + w * weight(r, self.sigma) * g(&[dir[0] * r, dir[1] * r]).abs();
                    }
                }
            }
            for (lo, hi) in geometric_panels(a.max(T::one()), tail, 8) {
                for (tau, w) in mapped_rule(&gl, lo.ln(), hi.ln()) {
                    let r = tau.exp();
                    acc = acc + w * r * weight(r, self.sigma) * g(&[dir[0] * r, dir[1] * r]).abs();
                }
            }
            acc
        };
        if self.dim == 1 {
            let w1 = |r: T, s: T| {
                if r <= T::one() {
                    T::one()
                } else {
                    r.powf(-T::one() - s)
                }
            };
            return radial(box_half, [T::one(), T::zero()], w1) + radial(box_half, [-T::one(), T::zero()], w1);
        }
        let w2 = |r: T, s: T| {
            if r <= T::one() {
                r
            } else {
                r.powf(-T::one() - s)
            }
        };
        octant_rule::<T>(16)
            .par_iter()
            .map(|(th, w)| *w * radial(square_exit_radius(box_half, th, 2), *th, w2))
            .reduce(T::zero, |a, b| a + b)
    }
}

/// Weighted norm with the certified remainder of the truncated exterior tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedNorm<T> {
    pub value: T,
    /// Bound on the part of the exterior integral beyond `R_TAIL`, not included in `value`.
    pub tail_bound: T,
}

enum ExteriorIntegrand<'a, T> {
    None,
    Constant(T),
    Function { f: Box<dyn Fn(&[T; 2]) -> T + Sync + 'a>, bound: T, gamma: T },
}

fn weighted_l1_parts<T: Real>(
    grid: &Grid<T>,
    weight: &TailWeight<T>,
    node_weights: &[T],
    values: &[T],
    ext: ExteriorIntegrand<'_, T>,
) -> Result<WeightedNorm<T>> {
    let interior: T = values.iter().zip(node_weights).map(|(v, w)| v.abs() * *w).sum();
    let (exterior, tail_bound) = if grid.is_periodic() {
        (T::zero(), T::zero())
    } else {
        match ext {
            ExteriorIntegrand::None => (T::zero(), T::zero()),
            ExteriorIntegrand::Constant(c) => (c.abs() * weight.outside_square(grid.half_width()), T::zero()),
            ExteriorIntegrand::Function { f, bound, gamma } => {
                let tail = weight.growth_tail(lit(R_TAIL), gamma)?;
                (weight.exterior_integral(grid.half_width(), &*f), bound * tail)
            }
        }
    };
    let value = interior + exterior;
    if !value.is_finite() {
        return Err(numeric("weighted L1 norm"));
    }
    Ok(WeightedNorm { value, tail_bound })
}

fn integrand_of<'a, T: Real>(ext: &'a Exterior<T>, t: T) -> ExteriorIntegrand<'a, T> {
    match ext {
        Exterior::Zero => ExteriorIntegrand::None,
        Exterior::Constant(c) => ExteriorIntegrand::Constant(*c),
        Exterior::Bounded { g, bound } => {
            ExteriorIntegrand::Function { f: Box::new(move |x| g.eval(x, t)), bound: *bound, gamma: T::zero() }
        }
        Exterior::Growth { g, bound, gamma } => {
            ExteriorIntegrand::Function { f: Box::new(move |x| g.eval(x, t)), bound: *bound, gamma: *gamma }
        }
    }
}

/// `‖u(·, t)‖_{L¹(ω_σ)}` with the remainder bound of the truncated exterior tail.
pub fn weighted_l1_with_bound<T: Real>(u: &SpaceTimeField<T>, t: T) -> Result<WeightedNorm<T>> {
    let slice = u.slice_at(t)?;
    slice_weighted_l1(&slice, u.sigma())
}

/// `‖u(·, t)‖_{L¹(ω_σ)}`.
pub fn weighted_l1<T: Real>(u: &SpaceTimeField<T>, t: T) -> Result<T> {
    Ok(weighted_l1_with_bound(u, t)?.value)
}

pub(crate) fn slice_weighted_l1<T: Real>(slice: &FieldSlice<'_, T>, sigma: T) -> Result<WeightedNorm<T>> {
    let weight = TailWeight::new(slice.grid.dim(), sigma);
    let w = weight.node_weights(slice.grid);
    weighted_l1_parts(slice.grid, &weight, &w, &slice.values, integrand_of(&slice.exterior, slice.t))
}

/// `max_i ‖u(t_{i+1}) - u(t_i)‖_{L¹(ω_σ)} / (t_{i+1} - t_i)`.
///
/// By the triangle inequality this equals the maximum over all pairs of
/// stored times.
pub fn time_lipschitz_seminorm<T: Real>(u: &SpaceTimeField<T>) -> Result<T> {
    if u.len() < 2 {
        return Err(Error::Domain("time-Lipschitz seminorm needs at least two time slices".into()));
    }
    let grid = u.grid();
    let weight = TailWeight::new(grid.dim(), u.sigma());
    let w = weight.node_weights(grid);
    let mut best = T::zero();
    for i in 1..u.len() {
        let (t0, t1) = (u.times()[i - 1], u.times()[i]);
        let diff: Vec<T> = u.values(i).iter().zip(u.values(i - 1)).map(|(a, b)| *a - *b).collect();
        let ext = match u.exterior() {
            Exterior::Zero | Exterior::Constant(_) => ExteriorIntegrand::None,
            other => {
                let (m, gamma) = other.growth();
                ExteriorIntegrand::Function {
                    f: Box::new(move |x: &[T; 2]| other.eval(x, t1) - other.eval(x, t0)),
                    bound: m + m,
                    gamma,
                }
            }
        };
        let n = weighted_l1_parts(grid, &weight, &w, &diff, ext)?;
        best = best.max(n.value / (t1 - t0));
    }
    Ok(best)
}

/// Parabolic cylinder `B_r(x) × (t - τ, t]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder<T> {
    pub center: [T; 2],
    pub t: T,
    pub radius: T,
    pub height: T,
}

impl<T: Real> Cylinder<T> {
    pub fn new(center: [T; 2], t: T, radius: T, height: T) -> Result<Self> {
        if !(radius > T::zero()) || !(height > T::zero()) {
            return Err(Error::Domain(format!("cylinder needs r > 0 and tau > 0, got r={radius}, tau={height}")));
        }
        Ok(Self { center, t, radius, height })
    }

    /// `C_{r,τ}` centred at the origin with top at `t`.
    pub fn centered(t: T, radius: T, height: T) -> Result<Self> {
        Self::new([T::zero(); 2], t, radius, height)
    }

    /// Grid nodes in the closed ball and stored time indices in `(t - τ, t]`.
    pub fn nodes(&self, u: &SpaceTimeField<T>) -> Result<(Vec<usize>, Vec<usize>)> {
        let grid = u.grid();
        let eps_x = grid.spacing() * lit(1e-9);
        let space: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let p = grid.point(i);
                let d = [p[0] - self.center[0], p[1] - self.center[1]];
                norm(&d, grid.dim()) <= self.radius + eps_x
            })
            .collect();
        let eps_t = lit::<T>(1e-9) * (T::one() + self.t.abs() + self.height);
        let time: Vec<usize> = (0..u.len())
            .filter(|&k| {
                let s = u.times()[k];
                s > self.t - self.height + eps_t && s <= self.t + eps_t
            })
            .collect();
        if space.is_empty() || time.is_empty() {
            return Err(Error::Domain(format!(
                "cylinder {:?} contains no grid nodes ({} spatial, {} temporal)",
                self,
                space.len(),
                time.len()
            )));
        }
        Ok((space, time))
    }
}

/// `max |u|` over the grid nodes of the region.
pub fn sup_norm<T: Real>(u: &SpaceTimeField<T>, region: &Cylinder<T>) -> Result<T> {
    let (space, time) = region.nodes(u)?;
    Ok(time.iter().flat_map(|&k| space.iter().map(move |&i| u.values(k)[i].abs())).fold(T::zero(), T::max))
}

/// `max u - min u` over the grid nodes of the region.
pub fn oscillation<T: Real>(u: &SpaceTimeField<T>, region: &Cylinder<T>) -> Result<T> {
    let (space, time) = region.nodes(u)?;
    let (lo, hi) = time
        .iter()
        .flat_map(|&k| space.iter().map(move |&i| u.values(k)[i]))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(hi - lo)
}

/// `max |u(x,t) - u(y,s)| / (|x-y| + |t-s|^{1/σ})^α` over node pairs of the region.
///
/// Exhaustive when the region has at most [`HOLDER_PAIR_CAP`] space-time
/// nodes. Larger regions compare every node with partners at dyadic spatial
/// offsets `2^j h` along the axes (and diagonals in 2D) combined with dyadic
/// time offsets; the strata are fixed, so the result is reproducible.
pub fn parabolic_holder_seminorm<T: Real>(u: &SpaceTimeField<T>, alpha: T, region: &Cylinder<T>) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1), got {alpha}")));
    }
    let (space, time) = region.nodes(u)?;
    holder_over(u.grid(), u.sigma(), &space, &time, u.times(), alpha, |k, i| u.values(k)[i])
}

/// Shared pair scan used for `u` and for derived grid quantities.
pub(crate) fn holder_over<T: Real, F>(
    grid: &Grid<T>,
    sigma: T,
    space: &[usize],
    time: &[usize],
    times: &[T],
    alpha: T,
    value: F,
) -> Result<T>
where
    F: Fn(usize, usize) -> T + Sync,
{
    let dim = grid.dim();
    let inv_sigma = T::one() / sigma;
    let quotient = |(k1, i1): (usize, usize), (k2, i2): (usize, usize)| -> T {
        let (p, q) = (grid.point(i1), grid.point(i2));
        let dx = norm(&[p[0] - q[0], p[1] - q[1]], dim);
        let dt = (times[k1] - times[k2]).abs();
        let d = dx + if dt > T::zero() { dt.powf(inv_sigma) } else { T::zero() };
        if d <= T::zero() {
            return T::zero();
        }
        (value(k1, i1) - value(k2, i2)).abs() / d.powf(alpha)
    };
    let nodes: Vec<(usize, usize)> = time.iter().flat_map(|&k| space.iter().map(move |&i| (k, i))).collect();
    let best = if nodes.len() <= HOLDER_PAIR_CAP {
        (0..nodes.len())
            .into_par_iter()
            .map(|a| nodes[a + 1..].iter().fold(T::zero(), |m, &b| m.max(quotient(nodes[a], b))))
            .reduce(T::zero, T::max)
    } else {
        let mut member = vec![false; grid.len()];
        for &i in space {
            member[i] = true;
        }
        let mut tpos = vec![usize::MAX; times.len()];
        for (j, &k) in time.iter().enumerate() {
            tpos[k] = j;
        }
        let dirs: &[[isize; 2]] = if dim == 1 { &[[1, 0]] } else { &[[1, 0], [0, 1], [1, 1], [1, -1]] };
        let mut offsets = vec![[0isize; 2]];
        let mut step = 1isize;
        while step as usize <= 2 * grid.per_axis() {
            for d in dirs {
                offsets.push([d[0] * step, d[1] * step]);
                offsets.push([-d[0] * step, -d[1] * step]);
            }
            step *= 2;
        }
        let mut dts = vec![0usize];
        let mut s = 1usize;
        while s < time.len() {
            dts.push(s);
            s *= 2;
        }
        nodes
            .par_iter()
            .map(|&(k, i)| {
                let mut m = T::zero();
                for &dk in &dts {
                    let j = tpos[k] + dk;
                    if j >= time.len() {
                        continue;
                    }
                    let k2 = time[j];
                    for off in &offsets {
                        if dk == 0 && (off[0] < 0 || (off[0] == 0 && off[1] <= 0)) {
                            continue;
                        }
                        if let Some(i2) = grid.neighbor(i, *off) {
                            if member[i2] {
                                m = m.max(quotient((k, i), (k2, i2)));
                            }
                        }
                    }
                }
                m
            })
            .reduce(T::zero, T::max)
    };
    if !best.is_finite() {
        return Err(numeric("parabolic Hölder seminorm"));
    }
    Ok(best)
}
