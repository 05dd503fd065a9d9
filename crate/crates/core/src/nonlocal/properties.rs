//! Algebraic identities of the operators: adjoints, integration by parts,
//! homogeneity, concavity under mollification, translation and uniform
//! ellipticity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{DataFn, Exterior, FieldSlice, SpaceTimeField};
use crate::kernel::{Ellipticity, KernelSpec};
use crate::scalar::{lit, Real};

use super::eval::{pucci_probe, DiscreteFamily, Extremal, Probe};
use super::rule::{QuadratureConfig, QuadratureRule};

/// `(K(-y), -b)`, the kernel of the formal adjoint.
pub fn adjoint_pair<T: Real>(k: &KernelSpec<T>) -> KernelSpec<T> {
    k.reflected()
}

/// Both sides of `∫ v L w = ∫ w L̄ v` as grid sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationByParts<T> {
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
    /// `‖v‖_∞ ‖w‖_∞`, a natural scale for the residual.
    pub scale: T,
}

fn apply_linear<T: Real>(k: &KernelSpec<T>, q: &QuadratureRule<T>, s: &FieldSlice<'_, T>) -> Result<Vec<T>> {
    (0..s.grid.len())
        .into_par_iter()
        .map(|i| super::eval::linear_probe(k, &Probe::at_node(s, i), q).map(|e| e.value))
        .collect()
}

fn ensure_compact<T: Real>(s: &FieldSlice<'_, T>, name: &str) -> Result<()> {
    if s.grid.is_periodic() {
        return Ok(());
    }
    let zero_ext = matches!(*s.exterior, Exterior::Zero);
    let zero_edge = (0..s.grid.len()).filter(|&i| s.grid.is_boundary(i)).all(|i| s.values[i] == T::zero());
    if zero_ext && zero_edge {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} is not compactly supported inside the grid")))
    }
}

/// `|∫ v L_{K,b} w - ∫ w L̄ v|` with `L̄` built independently from [`adjoint_pair`].
pub fn check_integration_by_parts<T: Real>(
    k: &KernelSpec<T>,
    v: &SpaceTimeField<T>,
    w: &SpaceTimeField<T>,
    t: T,
    cfg: &QuadratureConfig<T>,
) -> Result<IntegrationByParts<T>> {
    if v.grid() != w.grid() {
        return Err(Error::Domain("fields live on different grids".into()));
    }
    let (sv, sw) = (v.slice_at(t)?, w.slice_at(t)?);
    ensure_compact(&sv, "v")?;
    ensure_compact(&sw, "w")?;
    let grid = v.grid();
    let kbar = adjoint_pair(k);
    let q = QuadratureRule::for_kernel(grid, k, cfg)?;
    let qbar = QuadratureRule::for_kernel(grid, &kbar, cfg)?;
    let lw = apply_linear(k, &q, &sw)?;
    let lv = apply_linear(&kbar, &qbar, &sv)?;
    let cell = grid.spacing().powi(grid.dim() as i32);
    let lhs: T = sv.values.iter().zip(&lw).map(|(a, b)| *a * *b).sum::<T>() * cell;
    let rhs: T = sw.values.iter().zip(&lv).map(|(a, b)| *a * *b).sum::<T>() * cell;
    let sup = |s: &FieldSlice<'_, T>| s.values.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    Ok(IntegrationByParts { lhs, rhs, residual: (lhs - rhs).abs(), scale: sup(&sv) * sup(&sw) })
}

/// Nonnegative normalized stencil `η` on lattice offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct Mollifier<T> {
    offsets: Vec<[isize; 2]>,
    weights: Vec<T>,
}

impl<T: Real> Mollifier<T> {
    pub fn new(offsets: Vec<[isize; 2]>, weights: Vec<T>) -> Result<Self> {
        if offsets.len() != weights.len() || offsets.is_empty() {
            return Err(Error::Domain("mollifier offsets and weights must be nonempty and of equal length".into()));
        }
        if weights.iter().any(|w| !(*w >= T::zero())) {
            return Err(Error::Domain("mollifier weights must be nonnegative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > lit(1e-12) {
            return Err(Error::Domain(format!("mollifier weights sum to {total}, not 1")));
        }
        Ok(Self { offsets, weights })
    }

    /// Discrete tent `∏ (r + 1 - |j_a|)`, normalized.
    pub fn tent(dim: usize, radius: usize) -> Self {
        let r = radius as isize;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let range2 = if dim == 1 { 0..=0 } else { -r..=r };
        for j in range2 {
            for i in -r..=r {
                offsets.push([i, j]);
                weights.push(lit::<T>(((r + 1 - i.abs()) * (r + 1 - j.abs())) as f64));
            }
        }
        let total: T = weights.iter().copied().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self { offsets, weights }
    }

    pub fn offsets(&self) -> &[[isize; 2]] {
        &self.offsets
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `(η ∗ u)(x) = Σ η_j u(x - z_j h)`, grid values and exterior alike.
    pub fn apply(&self, s: &FieldSlice<'_, T>, sigma: T) -> Result<SpaceTimeField<T>> {
        let values = (0..s.grid.len())
            .map(|i| {
                self.offsets
                    .iter()
                    .zip(&self.weights)
                    .fold(T::zero(), |acc, (o, w)| acc + *w * s.offset(i, [-o[0], -o[1]]))
            })
            .collect();
        let h = s.grid.spacing();
        let exterior = match s.exterior.as_ref() {
            Exterior::Zero => Exterior::Zero,
            Exterior::Constant(c) => Exterior::Constant(*c),
            other => {
                let (m, gamma) = other.growth();
                let ext = other.clone();
                let (offs, ws) = (self.offsets.clone(), self.weights.clone());
                let g = DataFn::from_fn(format!("mollified[{}]", other.label()), move |x: &[T; 2], t: T| {
                    offs.iter().zip(&ws).fold(T::zero(), |acc, (o, w)| {
                        acc + *w * ext.eval(&[x[0] - h * lit(o[0] as f64), x[1] - h * lit(o[1] as f64)], t)
                    })
                });
                if gamma == T::zero() {
                    Exterior::Bounded { g, bound: m }
                } else {
                    // |x - z|^γ ≤ |x|^γ + |z|^γ with |z| bounded by the stencil.
                    Exterior::Growth { g, bound: m + m, gamma }
                }
            }
        };
        SpaceTimeField::single(s.grid.clone(), sigma, s.t, values, exterior)
    }
}

/// Maximum violations of the homogeneity, concavity and translation relations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropertyReport<T> {
    pub points: usize,
    /// `max |M±v|` over the points, floored at 1.
    pub scale: T,
    /// `max |M±(αv) - α M±v|`.
    pub homogeneity_error: T,
    /// Largest positive part of `η∗M⁻v - M±(η∗v)` and `M±(η∗v) - η∗M⁺v`.
    pub concavity_violation: T,
    /// Largest positive part of `M⁻(b·Dv) - b·D(M±v)` and `b·D(M±v) - M⁺(b·Dv)`.
    pub translation_violation: T,
    pub passed: bool,
}

/// Slack allowed for the concavity and translation relations, relative to the scale.
pub const PROPERTY_SLACK: f64 = 1e-6;

fn lattice_direction<T: Real>(b: [T; 2], dim: usize) -> Result<Option<([isize; 2], T)>> {
    let mag = if dim == 1 { b[0].abs() } else { b[0].hypot(b[1]) };
    if mag == T::zero() {
        return Ok(None);
    }
    if dim == 1 {
        return Ok(Some(([if b[0] > T::zero() { 1 } else { -1 }, 0], mag)));
    }
    let mut best: Option<([isize; 2], T)> = None;
    for i in -4isize..=4 {
        for j in -4isize..=4 {
            if i == 0 && j == 0 {
                continue;
            }
            let (di, dj) = (lit::<T>(i as f64), lit::<T>(j as f64));
            let len = di.hypot(dj);
            let cross = (b[0] * dj - b[1] * di).abs();
            let along = b[0] * di + b[1] * dj;
            if cross <= lit::<T>(1e-12) * mag * len && along > T::zero() && best.map_or(true, |(_, l)| len < l) {
                best = Some(([i, j], len));
            }
        }
    }
    match best {
        Some((d, len)) => Ok(Some((d, mag / len))),
        None => Err(Error::Domain("translation direction must be parallel to a short lattice vector".into())),
    }
}

/// Checks, at the given nodes, `M±(αv) = αM±v`, the concavity sandwich
/// `η∗M⁻v ≤ M±(η∗v) ≤ η∗M⁺v`, and `M⁻(b·Dv) ≤ b·D(M±v) ≤ M⁺(b·Dv)` with
/// centred differences along the lattice direction of `b`.
///
/// The discrete relations hold exactly (up to rounding) when `v` has compact
/// support inside the grid, since the scheme then commutes with lattice shifts.
#[allow(clippy::too_many_arguments)]
pub fn check_concavity_translation_homogeneity<T: Real>(
    bounds: &Ellipticity<T>,
    v: &SpaceTimeField<T>,
    t: T,
    q: &QuadratureRule<T>,
    eta: &Mollifier<T>,
    alpha: T,
    b: [T; 2],
    points: &[usize],
) -> Result<PropertyReport<T>> {
    bounds.validate()?;
    if !(alpha >= T::zero()) {
        return Err(Error::Domain("homogeneity holds for alpha >= 0 only".into()));
    }
    Mollifier::new(eta.offsets.clone(), eta.weights.clone())?;
    let s = v.slice_at(t)?;
    q.ensure_compatible(s.grid)?;
    let sigma = v.sigma();
    let grid = s.grid;
    let dim = grid.dim();
    let signs = [Extremal::Plus, Extremal::Minus];
    let m_at = |field: &FieldSlice<'_, T>, sign: Extremal, idx: usize| -> Result<T> {
        Ok(pucci_probe(sign, bounds, &Probe::at_node(field, idx), q)?.value)
    };

    let scaled = v.scaled(alpha);
    let scaled_slice = scaled.slice_at(t)?;
    let mollified = eta.apply(&s, sigma)?;
    let mslice = mollified.slice(0);
    let dir = lattice_direction(b, dim)?;
    let transported = match dir {
        None => None,
        Some((d, coef)) => {
            let c = coef / (grid.spacing() + grid.spacing());
            let values = (0..grid.len()).map(|i| c * (s.offset(i, d) - s.offset(i, [-d[0], -d[1]]))).collect();
            let h = grid.spacing();
            let ext = match s.exterior.as_ref() {
                Exterior::Zero | Exterior::Constant(_) => Exterior::Zero,
                other => {
                    let e = other.clone();
                    let (m, gamma) = other.growth();
                    let g = DataFn::from_fn("transport", move |x: &[T; 2], t: T| {
                        let dh = [h * lit(d[0] as f64), h * lit(d[1] as f64)];
                        c * (e.eval(&[x[0] + dh[0], x[1] + dh[1]], t) - e.eval(&[x[0] - dh[0], x[1] - dh[1]], t))
                    });
                    Exterior::Growth { g, bound: (c + c) * (m + m), gamma: gamma.max(lit(1e-3)) }
                }
            };
            Some((d, c, SpaceTimeField::single(grid.clone(), sigma, t, values, ext)?))
        }
    };

    let per_point: Vec<Result<[T; 4]>> = points
        .par_iter()
        .map(|&i| -> Result<[T; 4]> {
            let mut scale = T::zero();
            let mut hom = T::zero();
            let mut conc = T::zero();
            let mut trans = T::zero();
            let mv = |sign, idx| m_at(&s, sign, idx);
            let plus = mv(Extremal::Plus, i)?;
            let minus = mv(Extremal::Minus, i)?;
            scale = scale.max(plus.abs()).max(minus.abs());
            for sign in signs {
                let base = if sign == Extremal::Plus { plus } else { minus };
                hom = hom.max((m_at(&scaled_slice, sign, i)? - alpha * base).abs());
            }
            // η ∗ M±v at i needs M±v at the shifted nodes.
            let mut eta_plus = T::zero();
            let mut eta_minus = T::zero();
            for (o, w) in eta.offsets.iter().zip(&eta.weights) {
                let j = grid
                    .neighbor(i, [-o[0], -o[1]])
                    .ok_or_else(|| Error::Domain("mollifier stencil leaves the grid at a check point".into()))?;
                eta_plus = eta_plus + *w * mv(Extremal::Plus, j)?;
                eta_minus = eta_minus + *w * mv(Extremal::Minus, j)?;
            }
            for sign in signs {
                let mid = m_at(&mslice, sign, i)?;
                conc = conc.max(eta_minus - mid).max(mid - eta_plus);
            }
            if let Some((d, c, field)) = &transported {
                let ts = field.slice(0);
                let lo = m_at(&ts, Extremal::Minus, i)?;
                let hi = m_at(&ts, Extremal::Plus, i)?;
                let fwd =
                    grid.neighbor(i, *d).ok_or_else(|| Error::Domain("translation stencil leaves the grid".into()))?;
                let bwd = grid
                    .neighbor(i, [-d[0], -d[1]])
                    .ok_or_else(|| Error::Domain("translation stencil leaves the grid".into()))?;
                for sign in signs {
                    let mid = *c * (mv(sign, fwd)? - mv(sign, bwd)?);
                    trans = trans.max(lo - mid).max(mid - hi);
                }
            }
            Ok([scale, hom, conc, trans])
        })
        .collect();
    let mut acc = [T::one(), T::zero(), T::zero(), T::zero()];
    for r in per_point {
        let r = r?;
        for k in 0..4 {
            acc[k] = acc[k].max(r[k]);
        }
    }
    let slack = lit::<T>(PROPERTY_SLACK) * acc[0];
    let passed = acc[1] <= lit::<T>(1e-12) * acc[0] * (T::one() + alpha) && acc[2] <= slack && acc[3] <= slack;
    Ok(PropertyReport {
        points: points.len(),
        scale: acc[0],
        homogeneity_error: acc[1],
        concavity_violation: acc[2].max(T::zero()),
        translation_violation: acc[3].max(T::zero()),
        passed,
    })
}

/// Violations of `M⁻(u-v) ≤ I u - I v ≤ M⁺(u-v)` at the given nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticityReport<T> {
    pub points: usize,
    pub scale: T,
    pub lower_violation: T,
    pub upper_violation: T,
}

pub fn check_uniform_ellipticity<T: Real>(
    family: &DiscreteFamily<T>,
    u: &SpaceTimeField<T>,
    v: &SpaceTimeField<T>,
    t: T,
    points: &[usize],
) -> Result<EllipticityReport<T>> {
    let diff = SpaceTimeField::combine(T::one(), u, -T::one(), v)?;
    let (su, sv, sd) = (u.slice_at(t)?, v.slice_at(t)?, diff.slice_at(t)?);
    family.base_rule().ensure_compatible(su.grid)?;
    let bounds = family.bounds();
    let rows: Vec<Result<[T; 3]>> = points
        .par_iter()
        .map(|&i| {
            let iu = family.bellman_probe(&Probe::at_node(&su, i))?.value;
            let iv = family.bellman_probe(&Probe::at_node(&sv, i))?.value;
            let pd = Probe::at_node(&sd, i);
            let lo = pucci_probe(Extremal::Minus, &bounds, &pd, family.base_rule())?.value;
            let hi = pucci_probe(Extremal::Plus, &bounds, &pd, family.base_rule())?.value;
            let mid = iu - iv;
            Ok([iu.abs().max(iv.abs()).max(lo.abs()).max(hi.abs()), lo - mid, mid - hi])
        })
        .collect();
    let mut acc = [T::one(), T::zero(), T::zero()];
    for r in rows {
        let r = r?;
        for k in 0..3 {
            acc[k] = acc[k].max(r[k]);
        }
    }
    Ok(EllipticityReport { points: points.len(), scale: acc[0], lower_violation: acc[1], upper_violation: acc[2] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::kernel::KernelPreset;

    #[test]
    fn adjoint_examples() {
        let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::OddBump(0.5)).unwrap().with_drift([1.0, 0.0]);
        let a = adjoint_pair(&k);
        assert_eq!(a.eval(&[0.3, 0.0]), 0.5);
        assert_eq!(a.eval(&[-0.3, 0.0]), 1.5);
        assert_eq!(a.drift(), [-1.0, 0.0]);
        let e = KernelSpec::from_preset(2, 1.5, &KernelPreset::Anisotropic(0.3)).unwrap();
        let ea = adjoint_pair(&e);
        assert_eq!(ea.eval(&[0.2, -0.7]), e.eval(&[0.2, -0.7]));
    }

    #[test]
    fn mollifier_validation() {
        assert!(Mollifier::new(vec![[0, 0]], vec![0.5_f64]).is_err());
        assert!(Mollifier::new(vec![[0, 0], [1, 0]], vec![1.5_f64, -0.5]).is_err());
        let t = Mollifier::<f64>::tent(2, 2);
        assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_compact_fields_are_rejected() {
        let g = Grid::new(1, 1.0, 1.0 / 16.0).unwrap();
        let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap();
        let v = SpaceTimeField::from_fn(g.clone(), 1.5, &[0.0], Exterior::Constant(1.0), |_, _| 1.0).unwrap();
        let w = SpaceTimeField::from_fn(g, 1.5, &[0.0], Exterior::Zero, |_, _| 0.0).unwrap();
        assert!(check_integration_by_parts(&k, &v, &w, 0.0, &QuadratureConfig::default()).is_err());
    }
}
