//! The fields `w_A`, `P`, `N`, their comparability and the decay of `P + N`
//! on shrinking parabolic cylinders.
//!
//! All three are built from `d(x;y) = δu(x;y) - δu(0;y)` over `y ∈ B_1`,
//! weighted by the constant-kernel rule and multiplied by the cutoff `φ(x)`.
//! Offsets are the lattice cell centres inside `B_1`; cell 0 contributes the
//! difference of the pure second differences at `x` and at `0`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldSlice, Grid, SpaceTimeField};
use crate::nonlocal::{Probe, QuadratureConfig, QuadratureRule};
use crate::scalar::{lit, norm, to_f64, Real};

use super::cutoff::Cutoff;

/// A subset `A ⊆ B_1` of offsets.
#[derive(Clone)]
pub enum Subset<T> {
    Empty,
    /// All of `B_1`.
    Full,
    Ball {
        center: [T; 2],
        radius: T,
    },
    Annulus {
        inner: T,
        outer: T,
    },
    /// `{y·ν > 0}`; offsets on the hyperplane (and cell 0) count one half.
    HalfSpace {
        normal: [T; 2],
    },
    Predicate {
        label: String,
        f: Arc<dyn Fn(&[T; 2]) -> bool + Send + Sync>,
    },
}

impl<T: fmt::Debug> fmt::Debug for Subset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subset::Empty => write!(f, "Empty"),
            Subset::Full => write!(f, "Full"),
            Subset::Ball { center, radius } => write!(f, "Ball({center:?}, {radius:?})"),
            Subset::Annulus { inner, outer } => write!(f, "Annulus({inner:?}, {outer:?})"),
            Subset::HalfSpace { normal } => write!(f, "HalfSpace({normal:?})"),
            Subset::Predicate { label, .. } => write!(f, "Predicate({label})"),
        }
    }
}

impl<T: Real> Subset<T> {
    fn validate(&self, dim: usize) -> Result<()> {
        let tol = lit::<T>(1e-12);
        match self {
            Subset::Ball { center, radius } if norm(center, dim) + *radius > T::one() + tol => {
                Err(Error::Domain(format!("ball B_{radius}({center:?}) is not inside B_1")))
            }
            Subset::Annulus { inner, outer } if *outer > T::one() + tol || *inner < T::zero() || inner > outer => {
                Err(Error::Domain(format!("annulus {inner} < |y| < {outer} is not inside B_1")))
            }
            Subset::HalfSpace { normal } if norm(normal, dim) == T::zero() => {
                Err(Error::Domain("half-space normal must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    /// Membership weight of the offset `y` (already inside `B_1`).
    fn weight(&self, y: &[T; 2], dim: usize) -> T {
        let inside = |b: bool| if b { T::one() } else { T::zero() };
        match self {
            Subset::Empty => T::zero(),
            Subset::Full => T::one(),
            Subset::Ball { center, radius } => inside(norm(&[y[0] - center[0], y[1] - center[1]], dim) < *radius),
            Subset::Annulus { inner, outer } => {
                let r = norm(y, dim);
                inside(r >= *inner && r < *outer)
            }
            Subset::HalfSpace { normal } => {
                let s = y[0] * normal[0] + if dim == 2 { y[1] * normal[1] } else { T::zero() };
                if s > T::zero() {
                    T::one()
                } else if s == T::zero() {
                    lit(0.5)
                } else {
                    T::zero()
                }
            }
            Subset::Predicate { f, .. } => inside(f(y)),
        }
    }

    fn cell0_weight(&self, dim: usize) -> T {
        match self {
            Subset::Ball { center, radius } => {
                if norm(center, dim) < *radius {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Subset::Annulus { inner, .. } => {
                if *inner == T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            other => other.weight(&[T::zero(); 2], dim),
        }
    }
}

/// One lattice offset inside `B_1` with its weight.
#[derive(Clone, Copy, Debug)]
struct Offset<T> {
    off: [isize; 2],
    y: [T; 2],
    w: T,
}

/// Precomputed offsets and cutoff for evaluating `w_A`, `P`, `N` on one grid.
#[derive(Clone, Debug)]
pub struct PnOperator<T> {
    rule: QuadratureRule<T>,
    offsets: Vec<Offset<T>>,
    phi: Cutoff<T>,
    origin: usize,
}

/// `P` and `N` at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct PnSlice<T> {
    pub t: T,
    pub p: Vec<T>,
    pub n: Vec<T>,
}

impl<T: Real> PnOperator<T> {
    /// Needs a box grid containing `B_2` with the origin as a node.
    pub fn new(grid: &Grid<T>, sigma: T) -> Result<Self> {
        Self::with_base(grid, sigma, [T::zero(); 2])
    }

    /// Same, with base point `x₀` in place of the origin (robustness studies).
    pub fn with_base(grid: &Grid<T>, sigma: T, base: [T; 2]) -> Result<Self> {
        if grid.is_periodic() {
            return Err(Error::Domain("P and N are defined on box grids only".into()));
        }
        let origin = grid.node_at(&base).ok_or_else(|| Error::Domain("base point must be a grid node".into()))?;
        let reach = norm(&base, grid.dim()) + lit(2.0);
        if grid.half_width() + grid.spacing() * lit(1e-9) < reach {
            return Err(Error::Domain(format!("grid half-width must be at least {reach} for P and N")));
        }
        let rule = QuadratureRule::base(grid, sigma, &QuadratureConfig::default())?;
        let h = grid.spacing();
        let dim = grid.dim();
        let mut offsets = Vec::new();
        for p in rule.pairs() {
            let y = [h * lit(p.off[0] as f64), h * lit(p.off[1] as f64)];
            if norm(&y, dim) < T::one() {
                offsets.push(Offset { off: p.off, y, w: p.plus });
                offsets.push(Offset { off: [-p.off[0], -p.off[1]], y: [-y[0], -y[1]], w: p.minus });
            }
        }
        Ok(Self { rule, offsets, phi: Cutoff::phi(), origin })
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    fn origin_point(&self, s: &FieldSlice<'_, T>) -> [T; 2] {
        s.grid.point(self.origin)
    }

    /// Calls `visit(weight_in_A_times_quadrature_weight_factor, w, d)` for every
    /// offset of `x`, and returns `φ(x - x₀)`.
    fn scan<F: FnMut(&[T; 2], T, T)>(&self, s: &FieldSlice<'_, T>, idx: usize, mut visit: F) -> T {
        let dim = s.grid.dim();
        let x = s.grid.point(idx);
        let o = self.origin_point(s);
        let phi = self.phi.eval(&[x[0] - o[0], x[1] - o[1]], dim);
        if phi == T::zero() {
            return phi;
        }
        let h = s.grid.spacing();
        let px = Probe::at_node(s, idx);
        let p0 = Probe::at_node(s, self.origin);
        let (ux, u0) = (px.center(), p0.center());
        let mut gx = [T::zero(); 2];
        let mut g0 = [T::zero(); 2];
        for a in 0..dim {
            let (e, m) = (Probe::<T>::axis(a, 1), Probe::<T>::axis(a, -1));
            gx[a] = (px.lattice(e) - px.lattice(m)) / (h + h);
            g0[a] = (p0.lattice(e) - p0.lattice(m)) / (h + h);
        }
        for o in &self.offsets {
            let dx = px.lattice(o.off) - ux - (gx[0] * o.y[0] + gx[1] * o.y[1]);
            let d0 = p0.lattice(o.off) - u0 - (g0[0] * o.y[0] + g0[1] * o.y[1]);
            visit(&o.y, o.w, dx - d0);
        }
        let c0 = self.rule.cell0();
        let h2 = h * h;
        for a in 0..dim {
            let d = (px.second(a, ux) - p0.second(a, u0)) / h2;
            visit(&[T::nan(); 2], c0[a], d);
        }
        phi
    }

    /// `w_A(x)` at the node `idx` of the slice.
    pub fn wa_node(&self, s: &FieldSlice<'_, T>, subset: &Subset<T>, idx: usize) -> Result<T> {
        let dim = s.grid.dim();
        subset.validate(dim)?;
        self.rule.ensure_compatible(s.grid)?;
        let c0w = subset.cell0_weight(dim);
        let mut acc = T::zero();
        let phi = self.scan(s, idx, |y, w, d| {
            let m = if y[0].is_nan() { c0w } else { subset.weight(y, dim) };
            if m != T::zero() {
                acc = acc + m * w * d;
            }
        });
        Ok(phi * acc)
    }

    /// `(P(x), N(x))` at the node `idx`.
    pub fn pn_node(&self, s: &FieldSlice<'_, T>, idx: usize) -> (T, T) {
        let mut pos = T::zero();
        let mut neg = T::zero();
        let phi = self.scan(s, idx, |_, w, d| {
            if d > T::zero() {
                pos = pos + w * d;
            } else {
                neg = neg - w * d;
            }
        });
        (phi * pos, phi * neg)
    }

    pub fn pn_slice(&self, s: &FieldSlice<'_, T>) -> Result<PnSlice<T>> {
        self.rule.ensure_compatible(s.grid)?;
        let (p, n): (Vec<T>, Vec<T>) = (0..s.grid.len()).into_par_iter().map(|i| self.pn_node(s, i)).unzip();
        Ok(PnSlice { t: s.t, p, n })
    }
}

/// `w_A(x, t)`; `x` must be a grid node.
pub fn compute_wa<T: Real>(u: &SpaceTimeField<T>, subset: &Subset<T>, x: &[T; 2], t: T) -> Result<T> {
    let op = PnOperator::new(u.grid(), u.sigma())?;
    let idx = u.grid().node_at(x).ok_or_else(|| Error::Domain("w_A is evaluated at grid nodes".into()))?;
    op.wa_node(&u.slice_at(t)?, subset, idx)
}

/// `P` and `N` on a set of stored times.
#[derive(Clone, Debug, PartialEq)]
pub struct PnField<T> {
    pub grid: Grid<T>,
    pub sigma: T,
    pub slices: Vec<PnSlice<T>>,
}

impl<T: Real> PnField<T> {
    /// `P` and `N` of `u` at the stored times in `[t_from, t_to]`.
    pub fn compute(u: &SpaceTimeField<T>, t_from: T, t_to: T) -> Result<Self> {
        let op = PnOperator::new(u.grid(), u.sigma())?;
        let eps = lit::<T>(1e-9);
        let slices = (0..u.len())
            .filter(|&k| u.times()[k] >= t_from - eps && u.times()[k] <= t_to + eps)
            .map(|k| op.pn_slice(&u.slice(k)))
            .collect::<Result<Vec<_>>>()?;
        if slices.is_empty() {
            return Err(Error::Domain(format!("no stored times in [{t_from}, {t_to}]")));
        }
        Ok(Self { grid: u.grid().clone(), sigma: u.sigma(), slices })
    }

    /// A field with `P = f(x)` and `N = 0`, for calibrating the decay fit.
    pub fn synthetic(grid: Grid<T>, sigma: T, times: &[T], f: impl Fn(&[T; 2]) -> T) -> Self {
        let p: Vec<T> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        let slices = times.iter().map(|&t| PnSlice { t, p: p.clone(), n: vec![T::zero(); grid.len()] }).collect();
        Self { grid, sigma, slices }
    }

    pub fn max_abs(&self) -> T {
        self.slices.iter().flat_map(|s| s.p.iter().chain(&s.n)).fold(T::zero(), |m, v| m.max(v.abs()))
    }

    fn top(&self) -> T {
        self.slices.last().map(|s| s.t).unwrap_or_else(T::zero)
    }
}

/// Smallest `C` with `(λ/Λ)N - C|x|^α ≤ P ≤ (Λ/λ)N + C|x|^α` on the region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparability<T> {
    pub c: T,
    /// Point and time of the binding constraint.
    pub worst: Option<([T; 2], T)>,
    pub samples: usize,
}

pub fn check_comparability<T: Real>(
    pn: &PnField<T>,
    lower: T,
    upper: T,
    alpha: T,
    radius: T,
) -> Result<Comparability<T>> {
    if !(lower > T::zero() && upper >= lower) {
        return Err(Error::Domain(format!("comparability needs 0 < lambda <= Lambda, got {lower}, {upper}")));
    }
    if !(alpha > T::zero()) {
        return Err(Error::Domain("comparability exponent must be positive".into()));
    }
    let dim = pn.grid.dim();
    let (lo, hi) = (lower / upper, upper / lower);
    let mut best = T::zero();
    let mut worst = None;
    let mut samples = 0;
    for s in &pn.slices {
        for i in 0..pn.grid.len() {
            let x = pn.grid.point(i);
            let r = norm(&x, dim);
            if r > radius + pn.grid.spacing() * lit(1e-9) {
                continue;
            }
            samples += 1;
            let viol = (lo * s.n[i] - s.p[i]).max(s.p[i] - hi * s.n[i]);
            if viol <= T::zero() {
                continue;
            }
            let c = if r == T::zero() { T::infinity() } else { viol / r.powf(alpha) };
            if c > best {
                best = c;
                worst = Some((x, s.t));
            }
        }
    }
    Ok(Comparability { c: best, worst, samples })
}

/// Parameters of the decay iteration. Only `κ`, `θ` and the target `α`
/// enter the measurement; the remaining constants are carried for the report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationParams<T> {
    pub kappa: T,
    pub theta: T,
    pub alpha: T,
    pub eps1: T,
    pub s: T,
    pub eta: T,
    pub eps: T,
    /// Upper limit on the number of scales examined.
    pub iterations: usize,
}

impl<T: Real> OscillationParams<T> {
    pub fn new(kappa: T, theta: T, alpha: T) -> Self {
        Self { kappa, theta, alpha, eps1: lit(0.01), s: lit(2.0), eta: lit(0.1), eps: lit(0.5), iterations: 16 }
    }

    /// `(1-θ) - κ^{1/2} ≥ θ/2`, `1-θ > κ^σ`, `κ^{σ-α} ≤ 1-θ`.
    pub fn validate(&self, sigma: T) -> Result<()> {
        let (k, th) = (self.kappa, self.theta);
        if !(k > T::zero() && k < T::one()) || !(th >= T::zero() && th < T::one()) {
            return Err(Error::Domain(format!("need 0 < kappa < 1 and 0 <= theta < 1, got {k}, {th}")));
        }
        let keep = T::one() - th;
        if keep - k.sqrt() < th * lit(0.5) {
            return Err(Error::Domain(format!("(1-theta) - kappa^(1/2) = {} < theta/2", keep - k.sqrt())));
        }
        if !(keep > k.powf(sigma)) {
            return Err(Error::Domain("need 1 - theta > kappa^sigma".into()));
        }
        if k.powf(sigma - self.alpha) > keep {
            return Err(Error::Domain(format!(
                "kappa^(sigma - alpha) = {} exceeds 1 - theta",
                k.powf(sigma - self.alpha)
            )));
        }
        Ok(())
    }
}

/// `M_k = sup_{C_{κ^k, κ^{σk}}} (P + N)` with per-scale ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayTrace<T> {
    pub sups: Vec<T>,
    /// `M_{k+1} / M_k` (0 when both vanish).
    pub ratios: Vec<T>,
    /// `M_k / (1-θ)^k`, the renormalized trace; nonincreasing when decay holds.
    pub normalized: Vec<T>,
    /// Least-squares slope of `log M_k` against `log κ^k`; `None` when `P + N ≡ 0`.
    pub alpha: Option<T>,
    pub residual: T,
    pub passed: bool,
}

pub fn oscillation_decay<T: Real>(pn: &PnField<T>, params: &OscillationParams<T>) -> Result<DecayTrace<T>> {
    params.validate(pn.sigma)?;
    let dim = pn.grid.dim();
    let h = pn.grid.spacing();
    let top = pn.top();
    let eps = lit::<T>(1e-9);
    let mut sups = Vec::new();
    for k in 0..params.iterations {
        let r = params.kappa.powi(k as i32);
        if r < h * (T::one() - eps) {
            break;
        }
        let tau = r.powf(pn.sigma);
        let times: Vec<&PnSlice<T>> =
            pn.slices.iter().filter(|s| s.t > top - tau + eps * tau && s.t <= top + eps).collect();
        if times.is_empty() {
            break;
        }
        let mut m = T::zero();
        for s in times {
            for i in 0..pn.grid.len() {
                if norm(&pn.grid.point(i), dim) <= r * (T::one() + eps) {
                    m = m.max(s.p[i] + s.n[i]);
                }
            }
        }
        sups.push(m);
    }
    if sups.len() < 2 {
        return Err(Error::InsufficientResolution { finest_usable: sups.len().saturating_sub(1) });
    }
    let ratios: Vec<T> = sups
        .windows(2)
        .map(|w| {
            if w[0] == T::zero() {
                if w[1] == T::zero() {
                    T::zero()
                } else {
                    T::infinity()
                }
            } else {
                w[1] / w[0]
            }
        })
        .collect();
    let keep = T::one() - params.theta;
    let normalized = sups.iter().enumerate().map(|(k, m)| *m / keep.powi(k as i32)).collect();
    let (alpha, residual) = if sups.iter().all(|m| *m > T::zero()) {
        let xs: Vec<T> = (0..sups.len()).map(|k| lit::<T>(k as f64) * params.kappa.ln()).collect();
        let ys: Vec<T> = sups.iter().map(|m| m.ln()).collect();
        let (slope, _, res) = least_squares(&xs, &ys);
        (Some(slope), res)
    } else {
        (None, T::zero())
    };
    let passed = ratios.iter().all(|r| *r <= keep);
    log::debug!("decay trace {:?}", sups.iter().map(|m| to_f64(*m)).collect::<Vec<_>>());
    Ok(DecayTrace { sups, ratios, normalized, alpha, residual, passed })
}

/// Ordinary least squares `y ≈ a x + b`; returns `(a, b, rms residual)`.
pub fn least_squares<T: Real>(xs: &[T], ys: &[T]) -> (T, T, T) {
    let n = lit::<T>(xs.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    let sxy: T = xs.iter().zip(ys).map(|(x, y)| (*x - mx) * (*y - my)).sum();
    let a = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let b = my - a * mx;
    let res = (xs.iter().zip(ys).map(|(x, y)| (a * *x + b - *y).powi(2)).sum::<T>() / n).sqrt();
    (a, b, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Exterior;
    use crate::presets::FieldPreset;

    fn quadratic(dim: usize) -> SpaceTimeField<f64> {
        let grid = Grid::new(dim, 2.0, 1.0 / 16.0).unwrap();
        SpaceTimeField::from_global_fn(grid, 1.5, &[0.0], "quadratic", (1.5, 2.0), |x, _| {
            0.5 * x[0] * x[0] + 1.0 * x[1] * x[1] + 0.25 * x[0] * x[1]
        })
        .unwrap()
    }

    fn bumpy() -> SpaceTimeField<f64> {
        let grid = Grid::new(1, 2.0, 1.0 / 32.0).unwrap();
        let b = FieldPreset::Bump { amplitude: 1.0, center: 0.25, radius: 1.5 };
        SpaceTimeField::from_fn(grid, 1.5, &[0.0], Exterior::Zero, |x, _| b.eval(x, 1)).unwrap()
    }

    #[test]
    fn wa_examples() {
        let u = bumpy();
        let half = Subset::Ball { center: [0.25, 0.0], radius: 0.5 };
        assert_eq!(compute_wa(&u, &Subset::Empty, &[0.5, 0.0], 0.0).unwrap(), 0.0);
        for a in [Subset::Full, half.clone(), Subset::Annulus { inner: 0.2, outer: 0.9 }] {
            assert_eq!(compute_wa(&u, &a, &[0.0, 0.0], 0.0).unwrap(), 0.0);
        }
        assert!(compute_wa(&u, &Subset::Ball { center: [0.6, 0.0], radius: 0.5 }, &[0.0, 0.0], 0.0).is_err());
        let q = quadratic(2);
        for x in [[0.25, -0.5], [0.75, 0.125]] {
            assert_eq!(compute_wa(&q, &Subset::Full, &x, 0.0).unwrap(), 0.0);
            assert_eq!(compute_wa(&q, &Subset::HalfSpace { normal: [1.0, 1.0] }, &x, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn half_spaces_add_up_to_the_ball() {
        let u = bumpy();
        let op = PnOperator::new(u.grid(), 1.5).unwrap();
        let s = u.slice(0);
        for i in (0..u.grid().len()).step_by(7) {
            let full = op.wa_node(&s, &Subset::Full, i).unwrap();
            let a = op.wa_node(&s, &Subset::HalfSpace { normal: [1.0, 0.0] }, i).unwrap();
            let b = op.wa_node(&s, &Subset::HalfSpace { normal: [-1.0, 0.0] }, i).unwrap();
            assert!((a + b - full).abs() <= 1e-12 * (1.0 + full.abs()));
        }
    }

    #[test]
    fn p_minus_n_is_w_of_the_ball() {
        let u = bumpy();
        let op = PnOperator::new(u.grid(), 1.5).unwrap();
        let s = u.slice(0);
        let pn = op.pn_slice(&s).unwrap();
        let mut positive = 0;
        for i in 0..u.grid().len() {
            let w = op.wa_node(&s, &Subset::Full, i).unwrap();
            assert!((pn.p[i] - pn.n[i] - w).abs() <= 1e-10);
            assert!(pn.p[i] >= 0.0 && pn.n[i] >= 0.0);
            assert!(pn.p[i] + pn.n[i] >= w.abs());
            let x = u.grid().point(i)[0];
            if x.abs() >= 1.0 || x == 0.0 {
                assert_eq!((pn.p[i], pn.n[i]), (0.0, 0.0));
            } else if pn.p[i] > 0.0 && pn.n[i] > 0.0 {
                positive += 1;
            }
        }
        assert!(positive > 0);
    }

    #[test]
    fn values_outside_b2_do_not_matter() {
        let u = bumpy();
        let mut values = u.values(0).to_vec();
        for (i, v) in values.iter_mut().enumerate() {
            if u.grid().point(i)[0].abs() > 2.0 - 1e-9 {
                *v += 3.0;
            }
        }
        let v = SpaceTimeField::single(u.grid().clone(), 1.5, 0.0, values, Exterior::Constant(5.0)).unwrap();
        let op = PnOperator::new(u.grid(), 1.5).unwrap();
        assert_eq!(op.pn_slice(&u.slice(0)).unwrap(), op.pn_slice(&v.slice(0)).unwrap());
    }

    #[test]
    fn comparability_examples() {
        let q = quadratic(1);
        let pn = PnField::compute(&q, 0.0, 0.0).unwrap();
        assert_eq!(pn.max_abs(), 0.0);
        assert_eq!(check_comparability(&pn, 1.0, 2.0, 0.5, 0.125).unwrap().c, 0.0);
        let grid = Grid::new(1, 2.0, 1.0 / 16.0).unwrap();
        let mut same = PnField::synthetic(grid, 1.5, &[0.0], |x: &[f64; 2]| x[0].abs());
        same.slices[0].n = same.slices[0].p.clone();
        assert_eq!(check_comparability(&same, 1.0, 1.0, 0.5, 0.125).unwrap().c, 0.0);
    }

    #[test]
    fn comparability_constant_grows_with_the_exponent() {
        let pn = PnField::compute(&bumpy(), 0.0, 0.0).unwrap();
        let mut last = 0.0;
        for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let c = check_comparability(&pn, 1.0, 2.0, a, 0.125).unwrap().c;
            assert!(c.is_finite() && c >= last);
            last = c;
        }
    }

    #[test]
    fn synthetic_exponents_are_recovered() {
        let grid = Grid::new(1, 2.0, 1.0 / 64.0).unwrap();
        for a0 in [0.2, 0.5] {
            let pn = PnField::synthetic(grid.clone(), 1.5, &[-0.1, 0.0], |x: &[f64; 2]| 0.7 * x[0].abs().powf(a0));
            let params = OscillationParams::new(0.5, 0.0, 0.1);
            let tr = oscillation_decay(&pn, &params).unwrap();
            assert_eq!(tr.sups.len(), 7);
            for r in &tr.ratios {
                assert!((r - 0.5f64.powf(a0)).abs() < 0.05 * 0.5f64.powf(a0));
            }
            assert!((tr.alpha.unwrap() - a0).abs() < 0.05 * a0);
        }
    }

    #[test]
    fn decay_guards() {
        let grid = Grid::new(1, 2.0, 0.5).unwrap();
        let pn = PnField::synthetic(grid, 1.5, &[0.0], |x: &[f64; 2]| x[0].abs());
        let p = OscillationParams::new(0.25, 0.05, 0.5);
        assert!(matches!(oscillation_decay(&pn, &p), Err(Error::InsufficientResolution { finest_usable: 0 })));
        assert!(OscillationParams::new(0.25, 0.4, 0.5).validate(1.5).is_err());
        let zero = PnField::compute(&quadratic(1), 0.0, 0.0).unwrap();
        let tr = oscillation_decay(&zero, &p).unwrap();
        assert!(tr.passed && tr.alpha.is_none());
    }
}
