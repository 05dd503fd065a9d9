//! Space-time grid functions with exterior data.
//!
//! A [`Grid`] covers `[-R, R]^n` with spacing `h`. In box mode it has
//! `2R/h + 1` nodes per axis and everything outside the box is supplied by an
//! [`Exterior`]; in periodic mode it has `2R/h` nodes per axis and the data
//! are `2R`-periodic.

mod io;
mod norms;

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

pub use io::{read_field_csv, write_field_csv, write_sidecar};
pub(crate) use norms::holder_over;
pub use norms::{
    oscillation, parabolic_holder_seminorm, sup_norm, time_lipschitz_seminorm, weighted_l1, weighted_l1_with_bound,
    Cylinder, TailWeight, WeightedNorm, HOLDER_PAIR_CAP,
};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Tail radius for numerically integrated exterior data.
pub const R_TAIL: f64 = 1e3;

/// Uniform grid on `[-R, R]^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    half_width: T,
    spacing: T,
    per_axis: usize,
    periodic: bool,
}

impl<T: Real> Grid<T> {
    /// Box grid; `2R/h` must be an integer.
    pub fn new(dim: usize, half_width: T, spacing: T) -> Result<Self> {
        let cells = Self::cells(dim, half_width, spacing)?;
        Ok(Self { dim, half_width, spacing, per_axis: cells + 1, periodic: false })
    }

    /// Periodic grid with period `2R`.
    pub fn periodic(dim: usize, half_width: T, spacing: T) -> Result<Self> {
        let cells = Self::cells(dim, half_width, spacing)?;
        if cells < 4 {
            return Err(Error::Domain("periodic grid needs at least 4 nodes per axis".into()));
        }
        Ok(Self { dim, half_width, spacing, per_axis: cells, periodic: true })
    }

    fn cells(dim: usize, half_width: T, spacing: T) -> Result<usize> {
        if dim != 1 && dim != 2 {
            return Err(Error::Domain(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(spacing > T::zero()) || !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Domain(format!("grid needs R > 0 and h > 0, got R={half_width}, h={spacing}")));
        }
        let ratio = to_f64(half_width + half_width) / to_f64(spacing);
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-8 * ratio.max(1.0) || cells < 2.0 {
            return Err(Error::Domain(format!("2R/h = {ratio} is not an integer >= 2")));
        }
        Ok(cells as usize)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Period `2R` (meaningful in periodic mode).
    pub fn period(&self) -> T {
        self.half_width + self.half_width
    }

    pub fn len(&self) -> usize {
        if self.dim == 1 {
            self.per_axis
        } else {
            self.per_axis * self.per_axis
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + self.spacing * lit(i as f64)
    }

    #[inline]
    pub fn multi(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.per_axis, idx / self.per_axis]
        }
    }

    #[inline]
    pub fn flat(&self, m: [usize; 2]) -> usize {
        if self.dim == 1 {
            m[0]
        } else {
            m[0] + self.per_axis * m[1]
        }
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [T; 2] {
        let m = self.multi(idx);
        if self.dim == 1 {
            [self.coord(m[0]), T::zero()]
        } else {
            [self.coord(m[0]), self.coord(m[1])]
        }
    }

    /// Node at integer offset `off` from `idx`; wraps in periodic mode,
    /// `None` when it leaves the box.
    #[inline]
    pub fn neighbor(&self, idx: usize, off: [isize; 2]) -> Option<usize> {
        let m = self.multi(idx);
        let n = self.per_axis as isize;
        let mut out = [0usize; 2];
        for a in 0..self.dim {
            let j = m[a] as isize + off[a];
            out[a] = if self.periodic {
                j.rem_euclid(n) as usize
            } else if j < 0 || j >= n {
                return None;
            } else {
                j as usize
            };
        }
        Some(self.flat(out))
    }

    /// True for box nodes on `∂[-R, R]^n`; always false in periodic mode.
    pub fn is_boundary(&self, idx: usize) -> bool {
        if self.periodic {
            return false;
        }
        let m = self.multi(idx);
        (0..self.dim).any(|a| m[a] == 0 || m[a] + 1 == self.per_axis)
    }

    /// Grid distance (in nodes) from `idx` to the box boundary.
    pub fn depth(&self, idx: usize) -> usize {
        if self.periodic {
            return usize::MAX;
        }
        let m = self.multi(idx);
        (0..self.dim).map(|a| m[a].min(self.per_axis - 1 - m[a])).min().unwrap()
    }

    pub fn contains(&self, x: &[T; 2]) -> bool {
        self.periodic || (0..self.dim).all(|a| x[a].abs() <= self.half_width)
    }

    /// Index of the node at `x`, if `x` is a node up to `10⁻⁹h`.
    pub fn node_at(&self, x: &[T; 2]) -> Option<usize> {
        let mut m = [0usize; 2];
        for (a, slot) in m.iter_mut().enumerate().take(self.dim) {
            let s = (x[a] + self.half_width) / self.spacing;
            let r = s.round();
            if (s - r).abs() > lit(1e-9) {
                return None;
            }
            let r = r.to_isize()?;
            *slot = if self.periodic {
                r.rem_euclid(self.per_axis as isize) as usize
            } else if r < 0 || r as usize >= self.per_axis {
                return None;
            } else {
                r as usize
            };
        }
        Some(self.flat(m))
    }

    /// Multilinear interpolation stencil for `x` (which must satisfy
    /// [`Grid::contains`]). Returns up to four `(node, weight)` pairs.
    #[inline]
    pub fn stencil(&self, x: &[T; 2]) -> ([(usize, T); 4], usize) {
        let mut base = [0usize; 2];
        let mut frac = [T::zero(); 2];
        let n = self.per_axis;
        for a in 0..self.dim {
            let s = (x[a] + self.half_width) / self.spacing;
            if self.periodic {
                let nf: T = lit(n as f64);
                let mut s = s % nf;
                if s < T::zero() {
                    s = s + nf;
                }
                let f = s.floor();
                let i = f.to_usize().unwrap_or(0).min(n - 1);
                base[a] = i;
                frac[a] = s - f;
            } else {
                let f = s.floor().max(T::zero());
                let i = f.to_usize().unwrap_or(0).min(n - 2);
                base[a] = i;
                frac[a] = s - lit(i as f64);
            }
        }
        let next = |i: usize| if self.periodic { (i + 1) % n } else { i + 1 };
        let mut out = [(0usize, T::zero()); 4];
        if self.dim == 1 {
            out[0] = (base[0], T::one() - frac[0]);
            out[1] = (next(base[0]), frac[0]);
            (out, 2)
        } else {
            let (i, j) = (base[0], base[1]);
            let (fx, fy) = (frac[0], frac[1]);
            out[0] = (self.flat([i, j]), (T::one() - fx) * (T::one() - fy));
            out[1] = (self.flat([next(i), j]), fx * (T::one() - fy));
            out[2] = (self.flat([i, next(j)]), (T::one() - fx) * fy);
            out[3] = (self.flat([next(i), next(j)]), fx * fy);
            (out, 4)
        }
    }
}

/// Labeled data function `g(x, t)`.
#[derive(Clone)]
pub struct DataFn<T> {
    label: String,
    f: Arc<dyn Fn(&[T; 2], T) -> T + Send + Sync>,
}

impl<T: Real> DataFn<T> {
    pub fn new(label: impl Into<String>, f: Arc<dyn Fn(&[T; 2], T) -> T + Send + Sync>) -> Self {
        Self { label: label.into(), f }
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(&[T; 2], T) -> T + Send + Sync + 'static) -> Self {
        Self::new(label, Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: &[T; 2], t: T) -> T {
        (self.f)(x, t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl<T> fmt::Debug for DataFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DataFn({})", self.label)
    }
}

/// Values outside the box, with a declared growth bound.
#[derive(Clone, Debug)]
pub enum Exterior<T> {
    Zero,
    Constant(T),
    /// `|g| ≤ bound`.
    Bounded {
        g: DataFn<T>,
        bound: T,
    },
    /// `|g(x, t)| ≤ bound·(1 + |x|^gamma)`.
    Growth {
        g: DataFn<T>,
        bound: T,
        gamma: T,
    },
}

impl<T: Real> Exterior<T> {
    #[inline]
    pub fn eval(&self, x: &[T; 2], t: T) -> T {
        match self {
            Exterior::Zero => T::zero(),
            Exterior::Constant(c) => *c,
            Exterior::Bounded { g, .. } | Exterior::Growth { g, .. } => g.eval(x, t),
        }
    }

    /// `(M, γ)` with `|g(x, t)| ≤ M (1 + |x|^γ)`.
    pub fn growth(&self) -> (T, T) {
        match self {
            Exterior::Zero => (T::zero(), T::zero()),
            Exterior::Constant(c) => (c.abs(), T::zero()),
            Exterior::Bounded { bound, .. } => (*bound, T::zero()),
            Exterior::Growth { bound, gamma, .. } => (*bound, *gamma),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Exterior::Zero => "zero".into(),
            Exterior::Constant(c) => format!("const({c})"),
            Exterior::Bounded { g, .. } | Exterior::Growth { g, .. } => g.label().to_string(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(a: T, first: &Self, b: T, second: &Self) -> Self {
        match (first, second) {
            (Exterior::Zero, Exterior::Zero) => Exterior::Zero,
            (Exterior::Zero, Exterior::Constant(c)) => Exterior::Constant(b * *c),
            (Exterior::Constant(c), Exterior::Zero) => Exterior::Constant(a * *c),
            (Exterior::Constant(c), Exterior::Constant(d)) => Exterior::Constant(a * *c + b * *d),
            _ => {
                let (m1, g1) = first.growth();
                let (m2, g2) = second.growth();
                let (e1, e2) = (first.clone(), second.clone());
                let label = format!("{}*[{}]+{}*[{}]", a, first.label(), b, second.label());
                let g = DataFn::from_fn(label, move |x: &[T; 2], t: T| a * e1.eval(x, t) + b * e2.eval(x, t));
                let bound = a.abs() * m1 + b.abs() * m2;
                let gamma = g1.max(g2);
                if gamma == T::zero() {
                    Exterior::Bounded { g, bound }
                } else {
                    Exterior::Growth { g, bound, gamma }
                }
            }
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::combine(c, self, T::zero(), &Exterior::Zero)
    }
}

/// One time level of a field: grid values plus exterior, ready for point sampling.
#[derive(Clone, Debug)]
pub struct FieldSlice<'a, T: Clone> {
    pub grid: &'a Grid<T>,
    pub values: Cow<'a, [T]>,
    pub exterior: Cow<'a, Exterior<T>>,
    pub t: T,
}

impl<'a, T: Real> FieldSlice<'a, T> {
    pub fn new(grid: &'a Grid<T>, values: &'a [T], exterior: &'a Exterior<T>, t: T) -> Self {
        Self { grid, values: Cow::Borrowed(values), exterior: Cow::Borrowed(exterior), t }
    }

    #[inline]
    pub fn node(&self, idx: usize) -> T {
        self.values[idx]
    }

    /// Value at lattice offset `off` from node `idx`, from the exterior when it leaves the box.
    #[inline]
    pub fn offset(&self, idx: usize, off: [isize; 2]) -> T {
        match self.grid.neighbor(idx, off) {
            Some(j) => self.values[j],
            None => {
                let p = self.grid.point(idx);
                let h = self.grid.spacing();
                let q = [p[0] + h * lit(off[0] as f64), p[1] + h * lit(off[1] as f64)];
                self.exterior.eval(&q, self.t)
            }
        }
    }

    /// Value at an arbitrary point: multilinear inside the box (or on the
    /// torus), exterior data outside.
    #[inline]
    pub fn value(&self, x: &[T; 2]) -> T {
        if self.grid.contains(x) {
            let (st, len) = self.grid.stencil(x);
            st[..len].iter().fold(T::zero(), |acc, &(j, w)| acc + w * self.values[j])
        } else {
            self.exterior.eval(x, self.t)
        }
    }

    /// Owned single-slice copy.
    pub fn to_field(&self, sigma: T) -> Result<SpaceTimeField<T>> {
        SpaceTimeField::single(
            self.grid.clone(),
            sigma,
            self.t,
            self.values.to_vec(),
            self.exterior.clone().into_owned(),
        )
    }

    /// Central-difference gradient at node `idx`.
    pub fn gradient(&self, idx: usize) -> [T; 2] {
        let h2 = self.grid.spacing() + self.grid.spacing();
        let mut g = [T::zero(); 2];
        for (a, ga) in g.iter_mut().enumerate().take(self.grid.dim()) {
            let mut e = [0isize; 2];
            e[a] = 1;
            let plus = self.offset(idx, e);
            e[a] = -1;
            *ga = (plus - self.offset(idx, e)) / h2;
        }
        g
    }

    /// Central-difference gradient at an arbitrary point.
    pub fn gradient_at(&self, x: &[T; 2]) -> [T; 2] {
        if let Some(idx) = self.grid.node_at(x) {
            return self.gradient(idx);
        }
        let h = self.grid.spacing();
        let mut g = [T::zero(); 2];
        for (a, ga) in g.iter_mut().enumerate().take(self.grid.dim()) {
            let (mut p, mut m) = (*x, *x);
            p[a] = p[a] + h;
            m[a] = m[a] - h;
            *ga = (self.value(&p) - self.value(&m)) / (h + h);
        }
        g
    }
}

/// Grid values at a sequence of times, plus exterior data and the order `σ`
/// used by the weighted norms.
#[derive(Clone, Debug)]
pub struct SpaceTimeField<T> {
    grid: Grid<T>,
    times: Vec<T>,
    slices: Vec<Vec<T>>,
    exterior: Exterior<T>,
    sigma: T,
    dt: T,
}

impl<T: Real> SpaceTimeField<T> {
    pub fn new(grid: Grid<T>, sigma: T, exterior: Exterior<T>) -> Result<Self> {
        crate::kernel::validate_sigma(sigma)?;
        Ok(Self { grid, times: Vec::new(), slices: Vec::new(), exterior, sigma, dt: T::zero() })
    }

    /// Samples `f` at every node and time. The exterior is supplied separately.
    pub fn from_fn(
        grid: Grid<T>,
        sigma: T,
        times: &[T],
        exterior: Exterior<T>,
        f: impl Fn(&[T; 2], T) -> T,
    ) -> Result<Self> {
        let mut field = Self::new(grid, sigma, exterior)?;
        for &t in times {
            let vals = (0..field.grid.len()).map(|i| f(&field.grid.point(i), t)).collect();
            field.push_slice(t, vals)?;
        }
        Ok(field)
    }

    /// A field whose grid values and exterior both come from `f` (time-dependent).
    pub fn from_global_fn(
        grid: Grid<T>,
        sigma: T,
        times: &[T],
        label: &str,
        growth: (T, T),
        f: impl Fn(&[T; 2], T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        let f = Arc::new(f);
        let g = {
            let f = Arc::clone(&f);
            DataFn::new(label, Arc::new(move |x: &[T; 2], t: T| f(x, t)))
        };
        let exterior = if growth.1 == T::zero() {
            Exterior::Bounded { g, bound: growth.0 }
        } else {
            Exterior::Growth { g, bound: growth.0, gamma: growth.1 }
        };
        Self::from_fn(grid, sigma, times, exterior, move |x, t| f(x, t))
    }

    /// Single-slice field.
    pub fn single(grid: Grid<T>, sigma: T, t: T, values: Vec<T>, exterior: Exterior<T>) -> Result<Self> {
        let mut f = Self::new(grid, sigma, exterior)?;
        f.push_slice(t, values)?;
        Ok(f)
    }

    pub fn push_slice(&mut self, t: T, values: Vec<T>) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::Domain(format!("slice has {} values, grid has {}", values.len(), self.grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(crate::error::numeric(format!(
                "non-finite value at node {:?}, t = {t}",
                &self.grid.point(i)[..self.grid.dim()]
            )));
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Domain(format!("times must increase: {t} after {last}")));
            }
            if self.dt == T::zero() {
                self.dt = t - last;
            }
        }
        self.times.push(t);
        self.slices.push(values);
        Ok(())
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Time step of the run that produced the field (or the first gap between stored slices).
    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn exterior(&self) -> &Exterior<T> {
        &self.exterior
    }

    pub fn values(&self, i: usize) -> &[T] {
        &self.slices[i]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn slice(&self, i: usize) -> FieldSlice<'_, T> {
        FieldSlice::new(&self.grid, &self.slices[i], &self.exterior, self.times[i])
    }

    pub fn last_slice(&self) -> FieldSlice<'_, T> {
        self.slice(self.len() - 1)
    }

    /// Index of the stored time nearest to `t`, if within `10⁻⁹` of the time scale.
    pub fn time_index(&self, t: T) -> Option<usize> {
        let tol = lit::<T>(1e-9) * (T::one() + t.abs());
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    /// Slice at time `t`: a stored slice, or linear interpolation between the
    /// two neighbours. `t` must lie in `[t_first, t_last]`.
    pub fn slice_at(&self, t: T) -> Result<FieldSlice<'_, T>> {
        if let Some(i) = self.time_index(t) {
            return Ok(self.slice(i));
        }
        let (first, last) = match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::Domain("field has no time slices".into())),
        };
        if t < first || t > last {
            return Err(Error::Domain(format!("time {t} outside stored range [{first}, {last}]")));
        }
        let j = self.times.iter().position(|&s| s > t).unwrap();
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        let vals: Vec<T> = self.slices[j - 1].iter().zip(&self.slices[j]).map(|(&a, &b)| a + w * (b - a)).collect();
        Ok(FieldSlice { grid: &self.grid, values: Cow::Owned(vals), exterior: Cow::Borrowed(&self.exterior), t })
    }

    /// Point sample anywhere in `R^n × [t_first, t_last]`.
    pub fn sample(&self, x: &[T; 2], t: T) -> Result<T> {
        Ok(self.slice_at(t)?.value(x))
    }

    /// `a·self + b·other` on identical grids and times.
    pub fn combine(a: T, first: &Self, b: T, second: &Self) -> Result<Self> {
        if first.grid != second.grid || first.times.len() != second.times.len() {
            return Err(Error::Domain("fields live on different grids or time levels".into()));
        }
        if first.times.iter().zip(&second.times).any(|(s, t)| (*s - *t).abs() > lit(1e-12)) {
            return Err(Error::Domain("fields live on different time levels".into()));
        }
        let slices = first
            .slices
            .iter()
            .zip(&second.slices)
            .map(|(u, v)| u.iter().zip(v).map(|(&p, &q)| a * p + b * q).collect())
            .collect();
        Ok(Self {
            grid: first.grid.clone(),
            times: first.times.clone(),
            slices,
            exterior: Exterior::combine(a, &first.exterior, b, &second.exterior),
            sigma: first.sigma,
            dt: first.dt,
        })
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        for s in &mut out.slices {
            for v in s.iter_mut() {
                *v = *v * c;
            }
        }
        out.exterior = self.exterior.scaled(c);
        out
    }

    /// Keeps the stored slices with index in `range`.
    pub fn restrict_times(&self, range: std::ops::Range<usize>) -> Self {
        let mut out = self.clone();
        out.times = self.times[range.clone()].to_vec();
        out.slices = self.slices[range].to_vec();
        out
    }

    pub fn max_abs(&self) -> T {
        self.slices.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        let g = Grid::new(1, 1.0_f64, 0.25).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0)[0], -1.0);
        assert_eq!(g.point(8)[0], 1.0);
        assert!(g.is_boundary(0) && !g.is_boundary(1));
        let p = Grid::periodic(1, 1.0_f64, 0.25).unwrap();
        assert_eq!(p.len(), 8);
        assert_eq!(p.neighbor(7, [1, 0]), Some(0));
        assert!(Grid::new(1, 1.0_f64, 0.3).is_err());
        let g2 = Grid::new(2, 1.0_f64, 0.5).unwrap();
        assert_eq!(g2.len(), 25);
        assert_eq!(g2.point(g2.flat([4, 2])), [1.0, 0.0]);
        assert_eq!(g2.node_at(&[0.5, -1.0]), Some(g2.flat([3, 0])));
    }

    #[test]
    fn interpolation_is_exact_for_bilinear_functions() {
        let g = Grid::new(2, 1.0_f64, 0.25).unwrap();
        let f = |x: &[f64; 2], _t: f64| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
        let u = SpaceTimeField::from_global_fn(g, 1.5, &[0.0], "bilinear", (5.0, 2.0), f).unwrap();
        for p in [[0.1, 0.33], [-0.99, 0.7], [1.0, 1.0], [-1.0, -0.5]] {
            assert!((u.sample(&p, 0.0).unwrap() - f(&p, 0.0)).abs() < 1e-14);
        }
        // Outside the box the exterior takes over.
        assert_eq!(u.sample(&[2.0, 0.0], 0.0).unwrap(), f(&[2.0, 0.0], 0.0));
    }

    #[test]
    fn periodic_interpolation_wraps() {
        let g = Grid::periodic(1, 1.0_f64, 0.25).unwrap();
        let u = SpaceTimeField::from_fn(g, 1.5, &[0.0], Exterior::Zero, |x, _| x[0]).unwrap();
        let s = u.slice(0);
        // Between the last node (0.75) and the wrapped first node (-1 ≡ 1).
        assert!((s.value(&[0.875, 0.0]) - (0.75 - 1.0) / 2.0).abs() < 1e-14);
        assert!((s.value(&[2.25, 0.0]) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn time_interpolation() {
        let g = Grid::new(1, 1.0_f64, 0.5).unwrap();
        let u = SpaceTimeField::from_fn(g, 1.5, &[0.0, 1.0], Exterior::Zero, |_, t| 2.0 * t).unwrap();
        assert_eq!(u.sample(&[0.0, 0.0], 0.25).unwrap(), 0.5);
        assert!(u.sample(&[0.0, 0.0], 1.5).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = Grid::new(1, 1.0_f64, 0.5).unwrap();
        let mut u = SpaceTimeField::new(g, 1.5, Exterior::Zero).unwrap();
        assert!(u.push_slice(0.0, vec![0.0, f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }
}
