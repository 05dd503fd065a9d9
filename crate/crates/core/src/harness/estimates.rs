//! Empirical versions of the point estimate, the oscillation lemma, the time
//! regularity estimate and the subsolution inequality for `ψ L u`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{
    holder_over, time_lipschitz_seminorm, weighted_l1, Cylinder, DataFn, Exterior, FieldSlice, SpaceTimeField,
};
use crate::kernel::{Ellipticity, KernelSpec};
use crate::nonlocal::{linear_probe, pucci_probe, Extremal, Probe, QuadratureConfig, QuadratureRule};
use crate::scalar::{lit, norm, Real};

use super::cutoff::Cutoff;
use super::pn::least_squares;

/// Level-set fractions and the fitted `(C, ε)` of
/// `|{u > s} ∩ C_r| / |C_r| ≤ C (inf_{C_r(0, r^σ)} u + ‖f‖)^ε s^{-ε}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate<T> {
    pub levels: Vec<T>,
    pub fractions: Vec<T>,
    pub infimum: T,
    pub c: T,
    pub eps: T,
    pub residual: T,
}

/// `lower` is the cylinder `C_{r,r^σ}(0, t_a)`, the infimum is taken over
/// `C_{r,r^σ}(0, t_a + r^σ)`. Levels are absolute.
pub fn point_estimate_check<T: Real>(
    u: &SpaceTimeField<T>,
    r: T,
    t_a: T,
    levels: &[T],
    source_norm: T,
) -> Result<PointEstimate<T>> {
    if levels.is_empty() || levels.iter().any(|s| !(*s > T::zero())) {
        return Err(Error::Domain("point estimate needs positive levels".into()));
    }
    let tau = r.powf(u.sigma());
    let lower = Cylinder::centered(t_a, r, tau)?;
    let upper = Cylinder::centered(t_a + tau, r, tau)?;
    let (ls, lt) = lower.nodes(u)?;
    let (us, ut) = upper.nodes(u)?;
    let vals = |space: &[usize], time: &[usize]| -> Vec<T> {
        time.iter().flat_map(|&k| space.iter().map(move |&i| u.values(k)[i])).collect()
    };
    let below = vals(&ls, &lt);
    let above = vals(&us, &ut);
    if below.iter().chain(&above).any(|v| *v < T::zero()) {
        return Err(Error::Precondition("point estimate needs u >= 0 on the cylinders".into()));
    }
    let total = lit::<T>(below.len() as f64);
    let fractions: Vec<T> =
        levels.iter().map(|s| lit::<T>(below.iter().filter(|v| **v > *s).count() as f64) / total).collect();
    let infimum = above.iter().copied().fold(T::infinity(), T::min);
    let m = infimum + source_norm.abs();
    let used: Vec<(T, T)> =
        levels.iter().zip(&fractions).filter(|(_, f)| **f > T::zero()).map(|(s, f)| (*s, *f)).collect();
    if used.is_empty() {
        return Ok(PointEstimate {
            levels: levels.to_vec(),
            fractions,
            infimum,
            c: T::zero(),
            eps: T::zero(),
            residual: T::zero(),
        });
    }
    if m == T::zero() {
        return Ok(PointEstimate {
            levels: levels.to_vec(),
            fractions,
            infimum,
            c: T::infinity(),
            eps: T::zero(),
            residual: T::zero(),
        });
    }
    let xs: Vec<T> = used.iter().map(|(s, _)| (m / *s).ln()).collect();
    let ys: Vec<T> = used.iter().map(|(_, f)| f.ln()).collect();
    let (slope, _, residual) = least_squares(&xs, &ys);
    let eps = slope.max(T::zero());
    let c = used.iter().map(|(s, f)| *f * (*s / m).powf(eps)).fold(T::zero(), T::max);
    Ok(PointEstimate { levels: levels.to_vec(), fractions, infimum, c, eps, residual })
}

/// Both sides of `sup_{Ω'×(t₁',t₂]} u⁺ ≤ C (‖u⁺‖_{L¹(L¹(ω_σ))} + ‖f⁺‖)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillationLemma<T> {
    pub lhs: T,
    pub rhs: T,
    /// Smallest admissible constant; `None` when skipped.
    pub c: Option<T>,
    pub skipped: Option<String>,
}

impl<T: Real> OscillationLemma<T> {
    pub fn passed(&self) -> bool {
        self.skipped.is_some() || self.c.is_some_and(|c| c.is_finite())
    }
}

fn positive_part<T: Real>(e: &Exterior<T>) -> Exterior<T> {
    match e {
        Exterior::Zero => Exterior::Zero,
        Exterior::Constant(c) => Exterior::Constant(c.max(T::zero())),
        other => {
            let (m, gamma) = other.growth();
            let inner = other.clone();
            let g = DataFn::from_fn(format!("pos[{}]", other.label()), move |x: &[T; 2], t: T| {
                inner.eval(x, t).max(T::zero())
            });
            if gamma == T::zero() {
                Exterior::Bounded { g, bound: m }
            } else {
                Exterior::Growth { g, bound: m, gamma }
            }
        }
    }
}

/// `Ω' = B_{r'}`, `(t₁, t₂]` the stored time range, `f_norm = ‖f⁺‖_{L¹(L^∞)}`.
/// Space-time constant data are skipped: they are not a strict subsolution configuration.
pub fn oscillation_lemma_check<T: Real>(
    u: &SpaceTimeField<T>,
    inner_radius: T,
    t1_inner: T,
    f_norm: T,
) -> Result<OscillationLemma<T>> {
    if u.len() < 2 {
        return Err(Error::Domain("oscillation lemma needs at least two time slices".into()));
    }
    let first = u.values(0)[0];
    let constant = (0..u.len()).all(|k| u.values(k).iter().all(|v| *v == first))
        && matches!(u.exterior(), Exterior::Zero | Exterior::Constant(_))
        && u.exterior().eval(&[T::zero(); 2], T::zero()) == first;
    if constant && first > T::zero() {
        return Ok(OscillationLemma {
            lhs: first,
            rhs: T::zero(),
            c: None,
            skipped: Some("constant data: not a strict subsolution configuration".into()),
        });
    }
    let t2 = *u.times().last().unwrap();
    let region = Cylinder::centered(t2, inner_radius, t2 - t1_inner)?;
    let (space, time) = region.nodes(u)?;
    let lhs = time.iter().flat_map(|&k| space.iter().map(move |&i| u.values(k)[i])).fold(T::zero(), |m, v| m.max(v));
    let mut plus = SpaceTimeField::new(u.grid().clone(), u.sigma(), positive_part(u.exterior()))?;
    for k in 0..u.len() {
        plus.push_slice(u.times()[k], u.values(k).iter().map(|v| v.max(T::zero())).collect())?;
    }
    let norms = u.times().iter().map(|&t| weighted_l1(&plus, t)).collect::<Result<Vec<T>>>()?;
    let mut integral = T::zero();
    for k in 1..u.len() {
        integral = integral + (u.times()[k] - u.times()[k - 1]) * (norms[k] + norms[k - 1]) * lit(0.5);
    }
    let rhs = integral + f_norm.max(T::zero());
    let c = if lhs == T::zero() {
        T::zero()
    } else if rhs == T::zero() {
        T::infinity()
    } else {
        lhs / rhs
    };
    Ok(OscillationLemma { lhs, rhs, c: Some(c), skipped: None })
}

/// Discrete time derivative and gradient measurements on a cylinder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeRegularity<T> {
    pub sup_ut: T,
    pub holder_ut: T,
    pub holder_gradient: T,
    /// `[u]_{C^{0,1}(L¹(ω_σ))}` over all stored times.
    pub data_seminorm: T,
    /// `(sup|u_t| + [u_t]_α) / data_seminorm`.
    pub c: T,
}

pub fn time_regularity_check<T: Real>(
    u: &SpaceTimeField<T>,
    alpha: T,
    region: &Cylinder<T>,
) -> Result<TimeRegularity<T>> {
    if u.len() < 2 {
        return Err(Error::Domain("time regularity needs at least two time slices".into()));
    }
    let (space, time) = region.nodes(u)?;
    let time: Vec<usize> = time.into_iter().filter(|&k| k > 0).collect();
    if time.is_empty() {
        return Err(Error::Domain("region contains no time level with a predecessor".into()));
    }
    let grid = u.grid();
    let dim = grid.dim();
    let ut = |k: usize, i: usize| (u.values(k)[i] - u.values(k - 1)[i]) / (u.times()[k] - u.times()[k - 1]);
    let sup_ut = time.iter().flat_map(|&k| space.iter().map(move |&i| ut(k, i).abs())).fold(T::zero(), T::max);
    let holder_ut = holder_over(grid, u.sigma(), &space, &time, u.times(), alpha, ut)?;
    let mut holder_gradient = T::zero();
    for a in 0..dim {
        let slices: Vec<FieldSlice<'_, T>> = (0..u.len()).map(|k| u.slice(k)).collect();
        let grad = |k: usize, i: usize| slices[k].gradient(i)[a];
        holder_gradient = holder_gradient.max(holder_over(grid, u.sigma(), &space, &time, u.times(), alpha, grad)?);
    }
    let data_seminorm = time_lipschitz_seminorm(u)?;
    let num = sup_ut + holder_ut;
    let c = if num == T::zero() {
        T::zero()
    } else if data_seminorm == T::zero() {
        T::infinity()
    } else {
        num / data_seminorm
    };
    Ok(TimeRegularity { sup_ut, holder_ut, holder_gradient, data_seminorm, c })
}

/// `max ((ψ L u)_t - M⁺(ψ L u))` over a cylinder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubsolutionMargin<T> {
    pub margin: T,
    pub sup_v: T,
    pub samples: usize,
}

/// Forms `v = ψ L_{K,b} u` at the stored times of `region` (and one before),
/// then measures the backward-difference `v_t - M⁺ v` on the region.
pub fn subsolution_identity_check<T: Real>(
    u: &SpaceTimeField<T>,
    k: &KernelSpec<T>,
    bounds: &Ellipticity<T>,
    cutoff: &Cutoff<T>,
    region: &Cylinder<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<SubsolutionMargin<T>> {
    bounds.validate()?;
    let grid = u.grid();
    let dim = grid.dim();
    let q = QuadratureRule::for_kernel(grid, k, cfg)?;
    let base = QuadratureRule::base(grid, u.sigma(), cfg)?;
    let (space, time) = region.nodes(u)?;
    let time: Vec<usize> = time.into_iter().filter(|&t| t > 0).collect();
    if time.is_empty() {
        return Err(Error::Domain("region contains no time level with a predecessor".into()));
    }
    let support: Vec<(usize, T)> =
        (0..grid.len()).map(|i| (i, cutoff.eval(&grid.point(i), dim))).filter(|(_, c)| *c > T::zero()).collect();
    let v_at = |slice: usize| -> Result<Vec<T>> {
        let s = u.slice(slice);
        let vals: Vec<Result<(usize, T)>> =
            support.par_iter().map(|&(i, c)| Ok((i, c * linear_probe(k, &Probe::at_node(&s, i), &q)?.value))).collect();
        let mut v = vec![T::zero(); grid.len()];
        for r in vals {
            let (i, x) = r?;
            v[i] = x;
        }
        Ok(v)
    };
    let mut margin = T::neg_infinity();
    let mut sup_v = T::zero();
    let mut prev: Option<(usize, Vec<T>)> = None;
    for &kk in &time {
        let before = match prev.take() {
            Some((p, v)) if p == kk - 1 => v,
            _ => v_at(kk - 1)?,
        };
        let now = v_at(kk)?;
        let dt = u.times()[kk] - u.times()[kk - 1];
        let zero = Exterior::Zero;
        let s = FieldSlice::new(grid, &now, &zero, u.times()[kk]);
        let rows: Vec<Result<T>> = space
            .par_iter()
            .map(|&i| {
                let m = pucci_probe(Extremal::Plus, bounds, &Probe::at_node(&s, i), &base)?.value;
                Ok((now[i] - before[i]) / dt - m)
            })
            .collect();
        for r in rows {
            margin = margin.max(r?);
        }
        sup_v = now.iter().fold(sup_v, |m, v| m.max(v.abs()));
        prev = Some((kk, now));
    }
    Ok(SubsolutionMargin { margin, sup_v, samples: space.len() * time.len() })
}

/// Nodes of the grid inside `B_r`.
pub fn ball_nodes<T: Real>(grid: &crate::field::Grid<T>, r: T) -> Vec<usize> {
    (0..grid.len()).filter(|&i| norm(&grid.point(i), grid.dim()) <= r + grid.spacing() * lit(1e-9)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn grid() -> Grid<f64> {
        Grid::new(1, 2.0, 1.0 / 16.0).unwrap()
    }

    fn times() -> Vec<f64> {
        (0..=16).map(|k| -1.0 + k as f64 / 16.0).collect()
    }

    #[test]
    fn point_estimate_examples() {
        let one = SpaceTimeField::from_fn(grid(), 1.5, &times(), Exterior::Constant(1.0), |_, _| 1.0).unwrap();
        let pe = point_estimate_check(&one, 0.5, -0.5, &[0.5, 0.9], 0.0).unwrap();
        assert_eq!(pe.fractions, vec![1.0, 1.0]);
        assert_eq!((pe.c, pe.eps), (1.0, 0.0));
        let zero = SpaceTimeField::from_fn(grid(), 1.5, &times(), Exterior::Zero, |_, _| 0.0).unwrap();
        let pe = point_estimate_check(&zero, 0.5, -0.5, &[0.1, 1.0], 0.0).unwrap();
        assert_eq!(pe.fractions, vec![0.0, 0.0]);
        let neg = SpaceTimeField::from_fn(grid(), 1.5, &times(), Exterior::Zero, |_, _| -1.0).unwrap();
        assert!(matches!(point_estimate_check(&neg, 0.5, -0.5, &[0.1], 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn oscillation_lemma_examples() {
        let neg = SpaceTimeField::from_fn(grid(), 1.5, &times(), Exterior::Zero, |x, _| -x[0].abs()).unwrap();
        let r = oscillation_lemma_check(&neg, 0.5, -0.5, 0.0).unwrap();
        assert_eq!((r.lhs, r.c), (0.0, Some(0.0)));
        assert!(r.passed());
        let one = SpaceTimeField::from_fn(grid(), 1.5, &times(), Exterior::Constant(1.0), |_, _| 1.0).unwrap();
        let r = oscillation_lemma_check(&one, 0.5, -0.5, 0.0).unwrap();
        assert!(r.skipped.is_some() && r.c.is_none());
    }

    #[test]
    fn time_regularity_examples() {
        let aff =
            SpaceTimeField::from_global_fn(grid(), 1.5, &times(), "affine", (1.0, 1.0), |x, t| 0.5 * x[0] + 0.25 * t)
                .unwrap();
        let c = Cylinder::centered(0.0, 0.5, 0.5).unwrap();
        let r = time_regularity_check(&aff, 0.5, &c).unwrap();
        assert!((r.sup_ut - 0.25).abs() < 1e-12);
        assert!(r.holder_ut < 1e-10 && r.holder_gradient < 1e-10);
        let still =
            SpaceTimeField::from_fn(grid(), 1.5, &times(), Exterior::Zero, |x, _| (-x[0] * x[0]).exp()).unwrap();
        let r = time_regularity_check(&still, 0.5, &c).unwrap();
        assert_eq!((r.sup_ut, r.holder_ut, r.c), (0.0, 0.0, 0.0));
    }

    #[test]
    fn subsolution_examples() {
        let k = KernelSpec::new(1, 1.5, "const", |_y: &[f64; 2]| 1.0).unwrap().truncated(1.0);
        let bounds = Ellipticity { lower: 1.0, upper: 2.0, beta: 0.0 };
        let psi = Cutoff::new(0.75, 0.5).unwrap();
        let region = Cylinder::centered(0.0, 0.5, 0.5).unwrap();
        let cfg = QuadratureConfig::default();
        let zero = SpaceTimeField::from_fn(grid(), 1.5, &times(), Exterior::Zero, |_, _| 0.0).unwrap();
        let m = subsolution_identity_check(&zero, &k, &bounds, &psi, &region, &cfg).unwrap();
        assert!(m.margin <= 0.0);
        let quad =
            SpaceTimeField::from_global_fn(grid(), 1.5, &times(), "quadratic", (0.5, 2.0), |x, _| 0.5 * x[0] * x[0])
                .unwrap();
        let m = subsolution_identity_check(&quad, &k, &bounds, &psi, &region, &cfg).unwrap();
        assert!(m.margin.is_finite() && m.sup_v > 0.0);
    }
}
