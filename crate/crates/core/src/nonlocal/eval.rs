//! Pointwise evaluation of `δu`, linear operators, the extremal operators `M±`
//! and Bellman infima.

use crate::error::{numeric, Error, Result};
use crate::field::{FieldSlice, SpaceTimeField};
use crate::kernel::{Ellipticity, FamilyKind, KernelSpec, OperatorFamily};
use crate::quadrature::sphere_area;
use crate::scalar::{lit, norm, to_f64, Real};

use super::rule::{QuadratureConfig, QuadratureRule};

/// Contributions to an operator value.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Breakdown<T> {
    pub inner: T,
    pub middle: T,
    pub outer: T,
    pub drift: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorEvaluation<T> {
    pub value: T,
    /// Bound on the dropped part `|y| > R_tail`.
    pub tail_error_bound: T,
    pub breakdown: Breakdown<T>,
    /// Index of the minimizing member for Bellman evaluations.
    pub argmin: Option<usize>,
}

/// Which extremal operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremal {
    Plus,
    Minus,
}

/// Reads `u` around a base point, through node indices when the point is a node.
pub(crate) struct Probe<'s, 'a, T: Real> {
    slice: &'s FieldSlice<'a, T>,
    node: Option<usize>,
    x: [T; 2],
    h: T,
}

impl<'s, 'a, T: Real> Probe<'s, 'a, T> {
    pub(crate) fn new(slice: &'s FieldSlice<'a, T>, x: &[T; 2]) -> Self {
        let node = slice.grid.node_at(x);
        let x = node.map(|i| slice.grid.point(i)).unwrap_or(*x);
        Self { slice, node, x, h: slice.grid.spacing() }
    }

    pub(crate) fn at_node(slice: &'s FieldSlice<'a, T>, idx: usize) -> Self {
        Self { slice, node: Some(idx), x: slice.grid.point(idx), h: slice.grid.spacing() }
    }

    #[inline]
    pub(crate) fn center(&self) -> T {
        match self.node {
            Some(i) => self.slice.node(i),
            None => self.slice.value(&self.x),
        }
    }

    #[inline]
    pub(crate) fn lattice(&self, off: [isize; 2]) -> T {
        match self.node {
            Some(i) => self.slice.offset(i, off),
            None => {
                self.slice.value(&[self.x[0] + self.h * lit(off[0] as f64), self.x[1] + self.h * lit(off[1] as f64)])
            }
        }
    }

    #[inline]
    pub(crate) fn point(&self, y: &[T; 2]) -> T {
        self.slice.value(&[self.x[0] + y[0], self.x[1] + y[1]])
    }

    pub(crate) fn axis(a: usize, s: isize) -> [isize; 2] {
        let mut e = [0isize; 2];
        e[a] = s;
        e
    }

    /// One-sided differences `(D⁺_a, D⁻_a)`.
    #[inline]
    pub(crate) fn one_sided(&self, a: usize, u0: T) -> (T, T) {
        ((self.lattice(Self::axis(a, 1)) - u0) / self.h, (u0 - self.lattice(Self::axis(a, -1))) / self.h)
    }

    /// Pure second difference `u(x+he_a) + u(x-he_a) - 2u(x)`.
    #[inline]
    pub(crate) fn second(&self, a: usize, u0: T) -> T {
        self.lattice(Self::axis(a, 1)) + self.lattice(Self::axis(a, -1)) - u0 - u0
    }
}

/// `δu(x;y) = u(x+y) - u(x) - Du(x)·y χ_{B_1}(y)` with central-difference `Du`.
pub fn delta_u<T: Real>(u: &SpaceTimeField<T>, x: &[T; 2], t: T, y: &[T; 2]) -> Result<T> {
    let s = u.slice_at(t)?;
    Ok(delta_u_slice(&s, x, y))
}

pub fn delta_u_slice<T: Real>(s: &FieldSlice<'_, T>, x: &[T; 2], y: &[T; 2]) -> T {
    let dim = s.grid.dim();
    let u0 = s.value(x);
    let uy = s.value(&[x[0] + y[0], x[1] + y[1]]);
    if norm(y, dim) < T::one() {
        let g = s.gradient_at(x);
        uy - u0 - (g[0] * y[0] + if dim == 2 { g[1] * y[1] } else { T::zero() })
    } else {
        uy - u0
    }
}

/// Bound on `|∫_{|y|>R_tail} δu K ν|` from the exterior growth (or the sup of `u` on the torus).
pub(crate) fn tail_bound<T: Real>(
    q: &QuadratureRule<T>,
    s: &FieldSlice<'_, T>,
    x: &[T; 2],
    u0: T,
    upper: T,
) -> Result<T> {
    let sigma = q.sigma();
    let dim = q.dim();
    let rt = q.r_tail();
    if upper == T::zero() {
        return Ok(T::zero());
    }
    let pref = upper * (lit::<T>(2.0) - sigma) * sphere_area::<T>(dim);
    if q.is_periodic() {
        let sup = s.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        return Ok(pref * (u0.abs() + sup) * rt.powf(-sigma) / sigma);
    }
    let (m, gamma) = s.exterior.growth();
    if m == T::zero() {
        return Ok(pref * u0.abs() * rt.powf(-sigma) / sigma);
    }
    if !(gamma < sigma) {
        return Err(Error::UnsupportedExterior(format!(
            "exterior `{}` grows like |x|^{gamma}, not integrable against |y|^(-n-{sigma})",
            s.exterior.label()
        )));
    }
    let xg = if gamma > T::zero() { norm(x, dim).powf(gamma) } else { T::zero() };
    Ok(pref
        * ((u0.abs() + m * (T::one() + xg)) * rt.powf(-sigma) / sigma + m * rt.powf(gamma - sigma) / (sigma - gamma)))
}

fn check_rule<T: Real>(q: &QuadratureRule<T>, s: &FieldSlice<'_, T>, sigma: T) -> Result<()> {
    q.ensure_compatible(s.grid)?;
    if (q.sigma() - sigma).abs() > lit(1e-14) {
        return Err(Error::Domain(format!("rule has order {}, operator has order {sigma}", q.sigma())));
    }
    Ok(())
}

fn finish<T: Real>(
    x: &[T; 2],
    dim: usize,
    breakdown: Breakdown<T>,
    tail_error_bound: T,
    context: &str,
) -> Result<OperatorEvaluation<T>> {
    let value = breakdown.inner + breakdown.middle + breakdown.outer + breakdown.drift;
    if !value.is_finite() {
        return Err(numeric(format!("{context} at x = {:?}", x[..dim].iter().map(|c| to_f64(*c)).collect::<Vec<_>>())));
    }
    Ok(OperatorEvaluation { value, tail_error_bound, breakdown, argmin: None })
}

/// Linear operator on one slice. `q` must be built for `k` on the slice's grid.
pub(crate) fn linear_probe<T: Real>(
    k: &KernelSpec<T>,
    p: &Probe<'_, '_, T>,
    q: &QuadratureRule<T>,
) -> Result<OperatorEvaluation<T>> {
    let dim = q.dim();
    let u0 = p.center();
    let middle = q.pairs().iter().fold(T::zero(), |acc, w| {
        acc + w.plus * (p.lattice(w.off) - u0) + w.minus * (p.lattice([-w.off[0], -w.off[1]]) - u0)
    });
    let outer = q
        .shells()
        .iter()
        .fold(T::zero(), |acc, w| acc + w.plus * (p.point(&w.y) - u0) + w.minus * (p.point(&[-w.y[0], -w.y[1]]) - u0));
    let h2 = p.h * p.h;
    let c0 = q.cell0();
    let inner = (0..dim).fold(T::zero(), |acc, a| acc + c0[a] * p.second(a, u0) / h2);
    let b = k.drift();
    let g = q.first_moment();
    let drift = (0..dim).fold(T::zero(), |acc, a| {
        let beff = b[a] - g[a];
        let (dp, dm) = p.one_sided(a, u0);
        acc + if beff > T::zero() { beff * dp } else { beff * dm }
    });
    let tail = tail_bound(q, p.slice, &p.x, u0, q.kernel_upper())?;
    finish(&p.x, dim, Breakdown { inner, middle, outer, drift }, tail, "linear operator")
}

/// `L_{K,b} u(x)` on a slice.
pub fn evaluate_linear_slice<T: Real>(
    k: &KernelSpec<T>,
    s: &FieldSlice<'_, T>,
    x: &[T; 2],
    q: &QuadratureRule<T>,
) -> Result<OperatorEvaluation<T>> {
    check_rule(q, s, k.sigma())?;
    linear_probe(k, &Probe::new(s, x), q)
}

/// `L_{K,b} u(x, t)`.
pub fn evaluate_linear<T: Real>(
    k: &KernelSpec<T>,
    u: &SpaceTimeField<T>,
    x: &[T; 2],
    t: T,
    q: &QuadratureRule<T>,
) -> Result<OperatorEvaluation<T>> {
    evaluate_linear_slice(k, &u.slice_at(t)?, x, q)
}

#[inline]
fn select<T: Real>(sign: Extremal, bounds: &Ellipticity<T>, v: T) -> T {
    match sign {
        Extremal::Plus => {
            if v > T::zero() {
                bounds.upper * v
            } else {
                bounds.lower * v
            }
        }
        Extremal::Minus => {
            if v > T::zero() {
                bounds.lower * v
            } else {
                bounds.upper * v
            }
        }
    }
}

pub(crate) fn pucci_probe<T: Real>(
    sign: Extremal,
    bounds: &Ellipticity<T>,
    p: &Probe<'_, '_, T>,
    q: &QuadratureRule<T>,
) -> Result<OperatorEvaluation<T>> {
    let dim = q.dim();
    let u0 = p.center();
    let middle = q.pairs().iter().fold(T::zero(), |acc, w| {
        acc + select(
            sign,
            bounds,
            w.plus * (p.lattice(w.off) - u0) + w.minus * (p.lattice([-w.off[0], -w.off[1]]) - u0),
        )
    });
    let outer = q.shells().iter().fold(T::zero(), |acc, w| {
        acc + select(sign, bounds, w.plus * (p.point(&w.y) - u0) + w.minus * (p.point(&[-w.y[0], -w.y[1]]) - u0))
    });
    let h2 = p.h * p.h;
    let c0 = q.cell0();
    let inner = (0..dim).fold(T::zero(), |acc, a| acc + select(sign, bounds, c0[a] * p.second(a, u0) / h2));
    // Godunov upwind magnitude of the gradient.
    let mut mag2 = T::zero();
    for a in 0..dim {
        let (dp, dm) = p.one_sided(a, u0);
        let m = match sign {
            Extremal::Plus => dp.max(-dm).max(T::zero()),
            Extremal::Minus => (-dp).max(dm).max(T::zero()),
        };
        mag2 = mag2 + m * m;
    }
    let drift = match sign {
        Extremal::Plus => bounds.beta * mag2.sqrt(),
        Extremal::Minus => -(bounds.beta * mag2.sqrt()),
    };
    let tail = tail_bound(q, p.slice, &p.x, u0, bounds.upper)?;
    finish(&p.x, dim, Breakdown { inner, middle, outer, drift }, tail, "extremal operator")
}

/// `M± u(x)` on a slice, over symmetric kernels in `[λ, Λ]` and drifts `|b| ≤ β`.
/// `q` must be the constant-kernel rule of the grid.
pub fn pucci_extremal_slice<T: Real>(
    sign: Extremal,
    bounds: &Ellipticity<T>,
    s: &FieldSlice<'_, T>,
    x: &[T; 2],
    q: &QuadratureRule<T>,
) -> Result<OperatorEvaluation<T>> {
    bounds.validate()?;
    q.ensure_compatible(s.grid)?;
    pucci_probe(sign, bounds, &Probe::new(s, x), q)
}

pub fn pucci_extremal<T: Real>(
    sign: Extremal,
    bounds: &Ellipticity<T>,
    u: &SpaceTimeField<T>,
    x: &[T; 2],
    t: T,
    q: &QuadratureRule<T>,
) -> Result<OperatorEvaluation<T>> {
    pucci_extremal_slice(sign, bounds, &u.slice_at(t)?, x, q)
}

/// An operator family with its quadrature rules prebuilt for one grid.
#[derive(Clone, Debug)]
pub struct DiscreteFamily<T> {
    family: OperatorFamily<T>,
    rules: Vec<QuadratureRule<T>>,
    base: QuadratureRule<T>,
}

impl<T: Real> DiscreteFamily<T> {
    pub fn new(family: OperatorFamily<T>, grid: &crate::field::Grid<T>, cfg: &QuadratureConfig<T>) -> Result<Self> {
        if family.dim() != grid.dim() {
            return Err(Error::Domain("family and grid dimensions differ".into()));
        }
        let rules =
            family.members().iter().map(|k| QuadratureRule::for_kernel(grid, k, cfg)).collect::<Result<Vec<_>>>()?;
        let base = QuadratureRule::base(grid, family.sigma(), cfg)?;
        Ok(Self { family, rules, base })
    }

    pub fn family(&self) -> &OperatorFamily<T> {
        &self.family
    }

    pub fn rules(&self) -> &[QuadratureRule<T>] {
        &self.rules
    }

    pub fn base_rule(&self) -> &QuadratureRule<T> {
        &self.base
    }

    pub fn bounds(&self) -> Ellipticity<T> {
        self.family.bounds()
    }

    /// Largest total off-centre coefficient of the scheme at one node,
    /// including the upwind drift. `dt · row_sum ≤ 1` makes explicit Euler monotone.
    pub fn row_sum(&self) -> T {
        let h = self.base.spacing();
        let dim = self.base.dim();
        match self.family.kind() {
            FamilyKind::Finite => self
                .family
                .members()
                .iter()
                .zip(&self.rules)
                .map(|(k, q)| {
                    let g = q.first_moment();
                    let b = k.drift();
                    let drift = (0..dim).fold(T::zero(), |acc, a| acc + (b[a] - g[a]).abs()) / h;
                    q.diffusion_row_sum() + drift
                })
                .fold(T::zero(), T::max),
            FamilyKind::Pucci => {
                let b = self.family.bounds();
                b.upper * self.base.diffusion_row_sum() + b.beta * lit::<T>(dim as f64).sqrt() / h
            }
        }
    }

    pub(crate) fn bellman_probe(&self, p: &Probe<'_, '_, T>) -> Result<OperatorEvaluation<T>> {
        match self.family.kind() {
            FamilyKind::Pucci => pucci_probe(Extremal::Minus, &self.family.bounds(), p, &self.base),
            FamilyKind::Finite => {
                let mut best: Option<OperatorEvaluation<T>> = None;
                for (i, (k, q)) in self.family.members().iter().zip(&self.rules).enumerate() {
                    let mut e = linear_probe(k, p, q)?;
                    if best.map_or(true, |b| e.value < b.value) {
                        e.argmin = Some(i);
                        best = Some(e);
                    }
                }
                best.ok_or_else(|| Error::Domain("operator family is empty".into()))
            }
        }
    }

    /// `inf_{L ∈ family} L u(x)` on a slice; records the minimizing member.
    pub fn bellman_slice(&self, s: &FieldSlice<'_, T>, x: &[T; 2]) -> Result<OperatorEvaluation<T>> {
        self.base.ensure_compatible(s.grid)?;
        self.bellman_probe(&Probe::new(s, x))
    }

    pub fn pucci_slice(&self, sign: Extremal, s: &FieldSlice<'_, T>, x: &[T; 2]) -> Result<OperatorEvaluation<T>> {
        pucci_extremal_slice(sign, &self.family.bounds(), s, x, &self.base)
    }
}

/// `inf_{L ∈ family} L u(x, t)`.
pub fn bellman<T: Real>(
    family: &DiscreteFamily<T>,
    u: &SpaceTimeField<T>,
    x: &[T; 2],
    t: T,
) -> Result<OperatorEvaluation<T>> {
    family.bellman_slice(&u.slice_at(t)?, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{DataFn, Exterior, Grid};
    use crate::kernel::KernelPreset;
    use approx::assert_relative_eq;

    fn global(
        grid: Grid<f64>,
        growth: (f64, f64),
        f: impl Fn(&[f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> SpaceTimeField<f64> {
        SpaceTimeField::from_global_fn(grid, 1.5, &[0.0], "test", growth, move |x, _t| f(x)).unwrap()
    }

    #[test]
    fn delta_u_examples() {
        let g = Grid::new(1, 2.0, 1.0 / 16.0).unwrap();
        let c = global(g.clone(), (3.0, 0.0), |_| 3.0);
        assert_eq!(delta_u(&c, &[0.5, 0.0], 0.0, &[0.7, 0.0]).unwrap(), 0.0);
        let lin = global(g.clone(), (2.0, 1.0), |x| 2.0 * x[0]);
        assert!(delta_u(&lin, &[0.25, 0.0], 0.0, &[0.5, 0.0]).unwrap().abs() < 1e-14);
        assert!((delta_u(&lin, &[0.25, 0.0], 0.0, &[1.5, 0.0]).unwrap() - 3.0).abs() < 1e-14);
        let quad = global(g, (1.0, 2.0), |x| x[0] * x[0]);
        assert_relative_eq!(delta_u(&quad, &[0.0, 0.0], 0.0, &[0.5, 0.0]).unwrap(), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn constants_and_even_linear_functions() {
        for dim in [1, 2] {
            let h = if dim == 1 { 1.0 / 32.0 } else { 1.0 / 8.0 };
            let g = Grid::new(dim, 2.0, h).unwrap();
            let k = KernelSpec::from_preset(dim, 1.5, &KernelPreset::Anisotropic(0.5)).unwrap().with_drift([0.3, -0.2]);
            let q = QuadratureRule::for_kernel(&g, &k, &QuadratureConfig::default()).unwrap();
            let c = global(g.clone(), (1.5, 0.0), |_| 1.5);
            assert!(evaluate_linear(&k, &c, &[0.25, 0.0], 0.0, &q).unwrap().value.abs() < 1e-10);
            let a = [0.7, -0.4];
            let lin = SpaceTimeField::from_fn(
                g,
                1.5,
                &[0.0],
                Exterior::Growth {
                    g: DataFn::from_fn("lin", move |x: &[f64; 2], _t| a[0] * x[0] + a[1] * x[1]),
                    bound: 1.0,
                    gamma: 1.0,
                },
                move |x, _| a[0] * x[0] + a[1] * x[1],
            )
            .unwrap();
            let e = evaluate_linear(&k, &lin, &[0.25, 0.0], 0.0, &q).unwrap();
            let expect = if dim == 1 { 0.3 * a[0] } else { 0.3 * a[0] - 0.2 * a[1] };
            assert!((e.value - expect).abs() < 1e-10, "dim {dim}: {} vs {expect}", e.value);
        }
    }

    #[test]
    fn duality_is_exact() {
        let g = Grid::new(2, 1.0, 1.0 / 8.0).unwrap();
        let u = global(g.clone(), (1.0, 0.0), |x| (3.0 * x[0]).sin() * (x[1] + 0.3).cos());
        let v = u.scaled(-1.0);
        let b = Ellipticity::new(0.5, 2.0, 0.7).unwrap();
        let q = QuadratureRule::base(&g, 1.5, &QuadratureConfig::default()).unwrap();
        for x in [[0.0, 0.0], [0.25, -0.5], [0.125, 0.375]] {
            let p = pucci_extremal(Extremal::Plus, &b, &v, &x, 0.0, &q).unwrap().value;
            let m = pucci_extremal(Extremal::Minus, &b, &u, &x, 0.0, &q).unwrap().value;
            assert_eq!(p, -m);
        }
    }

    #[test]
    fn bellman_of_linear_family_on_linear_data() {
        let g = Grid::new(2, 2.0, 1.0 / 8.0).unwrap();
        let bounds = Ellipticity::new(1.0, 1.0, 1.0).unwrap();
        let k0 = KernelSpec::from_preset(2, 1.5, &KernelPreset::Const).unwrap().with_bounds(bounds);
        let k1 = k0.clone().with_drift([1.0, 0.0]);
        let fam = DiscreteFamily::new(OperatorFamily::finite(vec![k0, k1]).unwrap(), &g, &QuadratureConfig::default())
            .unwrap();
        for a1 in [-0.5_f64, 0.5] {
            let a = [a1, 0.25];
            let u = SpaceTimeField::from_global_fn(g.clone(), 1.5, &[0.0], "lin", (1.0, 1.0), move |x, _| {
                a[0] * x[0] + a[1] * x[1]
            })
            .unwrap();
            let e = bellman(&fam, &u, &[0.0, 0.0], 0.0).unwrap();
            assert!((e.value - a1.min(0.0)).abs() < 1e-10);
            assert_eq!(e.argmin, Some(if a1 < 0.0 { 1 } else { 0 }));
        }
    }

    #[test]
    fn quadratic_growth_is_unsupported() {
        let g = Grid::new(1, 2.0, 1.0 / 16.0).unwrap();
        let u = global(g.clone(), (1.0, 2.0), |x| x[0] * x[0]);
        let q = QuadratureRule::base(&g, 1.5, &QuadratureConfig::default()).unwrap();
        let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap();
        assert!(matches!(evaluate_linear(&k, &u, &[0.0, 0.0], 0.0, &q), Err(Error::UnsupportedExterior(_))));
    }
}
