//! Kernels `K`, drifts `b`, and the nested operator classes `L0 ⊇ L1 ⊇ L2`.
//!
//! A linear operator of order `σ` acts as
//!
//! ```text
//! L u(x) = (2-σ) ∫ δu(x;y) K(y) / |y|^{n+σ} dy + b·Du(x)
//! ```
//!
//! and belongs to `L0(λ, Λ, β)` when `λ ≤ K ≤ Λ` and the drift generated by
//! the odd part of `K` on annuli `B_1 \ B_r`, added to `b`, stays below `β`
//! for every `r ∈ (0, 1)`. `L1` and `L2` add the scale-invariant derivative
//! bounds `|DK| ≤ Λ/|y|` and `|D²K| ≤ Λ/|y|²`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{numeric, Error, Result};
use crate::quadrature::{gauss_legendre, geometric_panels, half_sphere_rule, mapped_rule, smoothstep};
use crate::scalar::{lit, norm, to_f64, Real};

/// Kernel `K : R^n \ {0} → [0, ∞)`. Points are stored as `[T; 2]`; in one
/// dimension the second coordinate is ignored.
pub type KernelFn<T> = Arc<dyn Fn(&[T; 2]) -> T + Send + Sync>;

/// Smoothness class of a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassTag {
    L0,
    L1,
    L2,
}

/// Ellipticity bounds `λ ≤ K ≤ Λ` and drift budget `β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipticity<T> {
    pub lower: T,
    pub upper: T,
    pub beta: T,
}

impl<T: Real> Ellipticity<T> {
    pub fn new(lower: T, upper: T, beta: T) -> Result<Self> {
        let e = Self { lower, upper, beta };
        e.validate()?;
        Ok(e)
    }

    /// `0 ≤ λ ≤ Λ`, `β ≥ 0`. A zero lower bound is allowed for the
    /// degenerate classes `K ∈ [0, Λ]` used by the boundedness checks.
    pub fn validate(&self) -> Result<()> {
        let ok = self.lower >= T::zero()
            && self.lower <= self.upper
            && self.upper.is_finite()
            && self.beta >= T::zero()
            && self.beta.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "ellipticity bounds require 0 <= lambda <= Lambda < inf and beta >= 0, got lambda={}, Lambda={}, beta={}",
                self.lower, self.upper, self.beta
            )))
        }
    }
}

/// A kernel together with its order, drift, class bounds and smoothness tag.
#[derive(Clone)]
pub struct KernelSpec<T> {
    dim: usize,
    sigma: T,
    kernel: KernelFn<T>,
    drift: [T; 2],
    bounds: Ellipticity<T>,
    class: ClassTag,
    label: String,
}

impl<T: fmt::Debug> fmt::Debug for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("sigma", &self.sigma)
            .field("drift", &&self.drift[..self.dim])
            .field("bounds", &self.bounds)
            .field("class", &self.class)
            .finish()
    }
}

impl<T: Real> KernelSpec<T> {
    /// Builds a kernel of order `sigma` in dimension `dim`. Orders in `(0, 1)`
    /// are accepted with a warning; the estimates this crate targets assume `σ ≥ 1`.
    pub fn new(
        dim: usize,
        sigma: T,
        label: impl Into<String>,
        kernel: impl Fn(&[T; 2]) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Domain(format!("dimension must be 1 or 2, got {dim}")));
        }
        validate_sigma(sigma)?;
        Ok(Self {
            dim,
            sigma,
            kernel: Arc::new(kernel),
            drift: [T::zero(); 2],
            bounds: Ellipticity { lower: T::one(), upper: T::one(), beta: T::zero() },
            class: ClassTag::L0,
            label: label.into(),
        })
    }

    pub fn from_preset(dim: usize, sigma: T, preset: &KernelPreset) -> Result<Self> {
        let (lo, hi) = preset.value_range();
        let f = preset.build::<T>(dim);
        let mut k = Self::new(dim, sigma, preset.to_string(), move |y: &[T; 2]| f(y))?;
        k.bounds = Ellipticity { lower: lit(lo), upper: lit(hi), beta: T::zero() };
        k.class = preset.natural_class();
        Ok(k)
    }

    pub fn with_drift(mut self, drift: [T; 2]) -> Self {
        self.drift = drift;
        if self.dim == 1 {
            self.drift[1] = T::zero();
        }
        self
    }

    pub fn with_bounds(mut self, bounds: Ellipticity<T>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_class(mut self, class: ClassTag) -> Self {
        self.class = class;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn drift(&self) -> [T; 2] {
        self.drift
    }

    pub fn bounds(&self) -> Ellipticity<T> {
        self.bounds
    }

    pub fn class(&self) -> ClassTag {
        self.class
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kernel_fn(&self) -> &KernelFn<T> {
        &self.kernel
    }

    #[inline]
    pub fn eval(&self, y: &[T; 2]) -> T {
        (self.kernel)(y)
    }

    /// `(K(-y), -b)`: the kernel of the formal adjoint operator.
    pub fn reflected(&self) -> Self {
        let inner = Arc::clone(&self.kernel);
        let mut out = self.clone();
        out.kernel = Arc::new(move |y: &[T; 2]| inner(&[-y[0], -y[1]]));
        out.drift = [-self.drift[0], -self.drift[1]];
        out.label = format!("reflect({})", self.label);
        out
    }

    /// `K · χ_{B_r}`: compactly supported truncation.
    pub fn truncated(&self, radius: T) -> Self {
        let inner = Arc::clone(&self.kernel);
        let dim = self.dim;
        let mut out = self.clone();
        out.kernel = Arc::new(move |y: &[T; 2]| if norm(y, dim) < radius { inner(y) } else { T::zero() });
        out.bounds.lower = T::zero();
        out.label = format!("trunc({},{})", self.label, radius);
        out
    }
}

pub(crate) fn validate_sigma<T: Real>(sigma: T) -> Result<()> {
    if !(sigma > T::zero() && sigma < lit(2.0)) {
        return Err(Error::Domain(format!("order sigma must lie in (0, 2), got {sigma}")));
    }
    if sigma < T::one() {
        log::warn!("order sigma = {sigma} is below 1; critical-drift estimates assume sigma in [1, 2)");
    }
    Ok(())
}

/// Named kernels addressable from configuration files.
///
/// With `e₁ = y₁/|y|` and `χ(r) = S((r - 1/4) / (3/4))`, `S` the quintic smoothstep:
///
/// | name | `K(y)` |
/// |---|---|
/// | `const` | `1` |
/// | `odd-bump(a)` | `1 + a·sign(y₁)` |
/// | `smooth-odd(a)` | `1 + a·e₁·χ(|y|)` |
/// | `anisotropic(a)` | `1 + a·e₁²` |
///
/// `smooth-odd` switches its odd part off inside `B_{1/4}`, which keeps the
/// drift compensation finite for `σ ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelPreset {
    Const,
    OddBump(f64),
    SmoothOdd(f64),
    Anisotropic(f64),
}

impl KernelPreset {
    pub fn build<T: Real>(&self, dim: usize) -> KernelFn<T> {
        match *self {
            KernelPreset::Const => Arc::new(|_y: &[T; 2]| T::one()),
            KernelPreset::OddBump(a) => {
                let a: T = lit(a);
                Arc::new(move |y: &[T; 2]| {
                    let s = if y[0] > T::zero() {
                        T::one()
                    } else if y[0] < T::zero() {
                        -T::one()
                    } else {
                        T::zero()
                    };
                    T::one() + a * s
                })
            }
            KernelPreset::SmoothOdd(a) => {
                let a: T = lit(a);
                Arc::new(move |y: &[T; 2]| {
                    let r = norm(y, dim);
                    let chi = smoothstep((r - lit(0.25)) / lit(0.75));
                    T::one() + a * (y[0] / r) * chi
                })
            }
            KernelPreset::Anisotropic(a) => {
                let a: T = lit(a);
                Arc::new(move |y: &[T; 2]| {
                    let e1 = y[0] / norm(y, dim);
                    T::one() + a * e1 * e1
                })
            }
        }
    }

    /// Exact range of the kernel values.
    pub fn value_range(&self) -> (f64, f64) {
        match *self {
            KernelPreset::Const => (1.0, 1.0),
            KernelPreset::OddBump(a) | KernelPreset::SmoothOdd(a) => (1.0 - a.abs(), 1.0 + a.abs()),
            KernelPreset::Anisotropic(a) => ((1.0_f64).min(1.0 + a), (1.0_f64).max(1.0 + a)),
        }
    }

    pub fn is_even(&self) -> bool {
        matches!(self, KernelPreset::Const | KernelPreset::Anisotropic(_))
            || matches!(self, KernelPreset::OddBump(a) | KernelPreset::SmoothOdd(a) if *a == 0.0)
    }

    fn natural_class(&self) -> ClassTag {
        match self {
            KernelPreset::OddBump(_) => ClassTag::L0,
            _ => ClassTag::L2,
        }
    }
}

impl fmt::Display for KernelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelPreset::Const => write!(f, "const"),
            KernelPreset::OddBump(a) => write!(f, "odd-bump({a})"),
            KernelPreset::SmoothOdd(a) => write!(f, "smooth-odd({a})"),
            KernelPreset::Anisotropic(a) => write!(f, "anisotropic({a})"),
        }
    }
}

impl FromStr for KernelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "const" {
            return Ok(KernelPreset::Const);
        }
        let (name, arg) = crate::presets::split_call(s)?;
        let a = crate::presets::parse_args(arg, 1)?[0];
        match name {
            "odd-bump" => Ok(KernelPreset::OddBump(a)),
            "smooth-odd" => Ok(KernelPreset::SmoothOdd(a)),
            "anisotropic" => Ok(KernelPreset::Anisotropic(a)),
            _ => Err(Error::Parse(format!("unknown kernel preset `{s}`"))),
        }
    }
}

/// Outcome of a sampled validation.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    pub passed: bool,
    /// Worst signed slack over the samples; negative values measure the violation.
    pub margin: T,
    /// Sample attaining the worst slack.
    pub worst_point: [T; 2],
    /// Largest measured quantity (kernel value or scaled derivative).
    pub peak: T,
}

/// Default number of radii on the validation shells.
pub const DEFAULT_SHELL_RADII: usize = 48;
const SHELL_DIRECTIONS_2D: usize = 32;

/// Sample points on log-spaced shells between `1e-3` and `1e3`.
/// Directions are `2πj/32` in 2D (axes included) and `±1` in 1D.
pub fn validation_samples<T: Real>(dim: usize, radii: usize) -> Vec<[T; 2]> {
    let radii = radii.max(1);
    let mut out = Vec::new();
    for i in 0..radii {
        let e = if radii == 1 { 0.0 } else { -3.0 + 6.0 * i as f64 / (radii - 1) as f64 };
        let r: T = lit(10f64.powf(e));
        if dim == 1 {
            out.push([r, T::zero()]);
            out.push([-r, T::zero()]);
        } else {
            for j in 0..SHELL_DIRECTIONS_2D {
                let th = 2.0 * std::f64::consts::PI * j as f64 / SHELL_DIRECTIONS_2D as f64;
                out.push([r * lit(th.cos()), r * lit(th.sin())]);
            }
        }
    }
    out
}

fn checked_eval<T: Real>(k: &KernelSpec<T>, y: &[T; 2]) -> Result<T> {
    let v = k.eval(y);
    if !v.is_finite() || v < T::zero() {
        return Err(Error::InvalidKernel { point: y[..k.dim].iter().map(|c| to_f64(*c)).collect(), value: to_f64(v) });
    }
    Ok(v)
}

/// Samples `λ ≤ K ≤ Λ` on the validation shells; `sample_count` is the number of radii.
pub fn check_bounds<T: Real>(k: &KernelSpec<T>, sample_count: usize) -> Result<ValidationReport<T>> {
    if sample_count == 0 {
        return Err(Error::Domain("sample_count must be at least 1".into()));
    }
    let b = k.bounds();
    let mut report =
        ValidationReport { passed: true, margin: T::infinity(), worst_point: [T::zero(); 2], peak: T::zero() };
    for y in validation_samples::<T>(k.dim(), sample_count) {
        let v = checked_eval(k, &y)?;
        let slack = (v - b.lower).min(b.upper - v);
        if slack < report.margin {
            report.margin = slack;
            report.worst_point = y;
        }
        report.peak = report.peak.max(v);
    }
    report.passed = report.margin >= lit(-1e-12);
    Ok(report)
}

/// Smoothness level for [`check_smoothness`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothnessLevel {
    L1,
    L2,
}

/// Finite-difference check of `|DK(y)|·|y| ≤ Λ` and, for `L2`, `|D²K(y)|·|y|² ≤ Λ`,
/// with 5% slack for the difference error. Step `10⁻³·|y|`.
pub fn check_smoothness<T: Real>(k: &KernelSpec<T>, level: SmoothnessLevel) -> Result<ValidationReport<T>> {
    let cap = k.bounds().upper * lit(1.05);
    let dim = k.dim();
    let mut report =
        ValidationReport { passed: true, margin: T::infinity(), worst_point: [T::zero(); 2], peak: T::zero() };
    let f = |y: [T; 2]| checked_eval(k, &y);
    for y in validation_samples::<T>(dim, DEFAULT_SHELL_RADII) {
        let r = norm(&y, dim);
        let d = r * lit(1e-3);
        let shift = |i: usize, s: T| {
            let mut z = y;
            z[i] = z[i] + s;
            z
        };
        let mut grad2 = T::zero();
        for i in 0..dim {
            let g = (f(shift(i, d))? - f(shift(i, -d))?) / (d + d);
            grad2 = grad2 + g * g;
        }
        let mut estimate = grad2.sqrt() * r;
        if level == SmoothnessLevel::L2 {
            let k0 = f(y)?;
            let mut hess = [[T::zero(); 2]; 2];
            for (i, row) in hess.iter_mut().enumerate().take(dim) {
                row[i] = (f(shift(i, d))? - k0 - k0 + f(shift(i, -d))?) / (d * d);
            }
            if dim == 2 {
                let pp = f([y[0] + d, y[1] + d])?;
                let pm = f([y[0] + d, y[1] - d])?;
                let mp = f([y[0] - d, y[1] + d])?;
                let mm = f([y[0] - d, y[1] - d])?;
                let h12 = (pp - pm - mp + mm) / (lit::<T>(4.0) * d * d);
                hess[0][1] = h12;
                hess[1][0] = h12;
            }
            let spectral = if dim == 1 {
                hess[0][0].abs()
            } else {
                let tr = (hess[0][0] + hess[1][1]) * lit(0.5);
                let disc = ((hess[0][0] - hess[1][1]) * lit(0.5)).hypot(hess[0][1]);
                (tr + disc).abs().max((tr - disc).abs())
            };
            estimate = estimate.max(spectral * r * r);
        }
        if !estimate.is_finite() {
            return Err(numeric(format!("kernel derivative estimate at {:?}", &y[..dim])));
        }
        let slack = cap - estimate;
        if slack < report.margin {
            report.margin = slack;
            report.worst_point = y;
        }
        report.peak = report.peak.max(estimate);
    }
    report.passed = report.margin >= T::zero();
    Ok(report)
}

/// Default radii for the supremum over `r ∈ (0, 1)`: 32 log-spaced values in `[1e-3, 1 - 1e-3]`.
pub fn default_drift_radii<T: Real>() -> Vec<T> {
    let (a, b) = (1e-3_f64.ln(), (1.0 - 1e-3_f64).ln());
    (0..32).map(|i| lit((a + (b - a) * i as f64 / 31.0).exp())).collect()
}

/// `max_{r ∈ r_grid} |b + (2-σ) ∫_{B_1 \ B_r} y K(y) / |y|^{n+σ} dy|`.
///
/// In polar coordinates the integral is `∫_r^1 ρ^{-σ} ∫_S θ K(ρθ) dθ dρ`.
/// Directions are paired with their negations, so even kernels contribute
/// exactly zero.
pub fn drift_compensation<T: Real>(k: &KernelSpec<T>, r_grid: &[T]) -> Result<T> {
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r > T::zero() && r < T::one())) {
        return Err(Error::Domain("drift radii must be a nonempty subset of (0, 1)".into()));
    }
    let dim = k.dim();
    let sigma = k.sigma();
    let dirs = half_sphere_rule::<T>(dim, 16);
    let radial = gauss_legendre(8);
    let angular_moment = |rho: T| -> [T; 2] {
        let mut m = [T::zero(); 2];
        for (th, w) in &dirs {
            let plus = k.eval(&[th[0] * rho, th[1] * rho]);
            let minus = k.eval(&[-th[0] * rho, -th[1] * rho]);
            let diff = (plus - minus) * *w;
            m[0] = m[0] + th[0] * diff;
            m[1] = m[1] + th[1] * diff;
        }
        m
    };

    let mut radii: Vec<T> = r_grid.to_vec();
    radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let two_minus = lit::<T>(2.0) - sigma;
    let mut acc = [T::zero(); 2];
    let mut upper = T::one();
    let mut worst = T::zero();
    for r in radii {
        for (lo, hi) in geometric_panels(r, upper, 16) {
            for (tau, w) in mapped_rule(&radial, lo.ln(), hi.ln()) {
                let rho = tau.exp();
                let m = angular_moment(rho);
                let f = w * rho * rho.powf(-sigma) * two_minus;
                acc[0] = acc[0] + f * m[0];
                acc[1] = acc[1] + f * m[1];
            }
        }
        upper = r;
        let b = k.drift();
        let v = [b[0] + acc[0], b[1] + acc[1]];
        let mag = norm(&v, dim);
        if !mag.is_finite() {
            return Err(numeric(format!("drift compensation at r = {r}")));
        }
        worst = worst.max(mag);
    }
    Ok(worst)
}

/// Membership of a kernel in its declared class.
#[derive(Clone, Debug)]
pub struct MembershipReport<T> {
    pub bounds: ValidationReport<T>,
    pub drift: T,
    pub drift_ok: bool,
    pub smoothness: Option<ValidationReport<T>>,
}

impl<T: Real> MembershipReport<T> {
    pub fn passed(&self) -> bool {
        self.bounds.passed && self.drift_ok && self.smoothness.as_ref().map_or(true, |s| s.passed)
    }
}

pub fn check_membership<T: Real>(k: &KernelSpec<T>) -> Result<MembershipReport<T>> {
    let bounds = check_bounds(k, DEFAULT_SHELL_RADII)?;
    let drift = drift_compensation(k, &default_drift_radii::<T>())?;
    let drift_ok = drift <= k.bounds().beta * (T::one() + lit(1e-12)) + lit(1e-14);
    let smoothness = match k.class() {
        ClassTag::L0 => None,
        ClassTag::L1 => Some(check_smoothness(k, SmoothnessLevel::L1)?),
        ClassTag::L2 => Some(check_smoothness(k, SmoothnessLevel::L2)?),
    };
    Ok(MembershipReport { bounds, drift, drift_ok, smoothness })
}

/// How a family produces its nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `inf` over an explicit list of linear operators.
    Finite,
    /// The minimal Pucci operator of the class `(λ, Λ, β)`.
    Pucci,
}

/// The collection of linear operators defining the Bellman nonlinearity.
#[derive(Clone)]
pub struct OperatorFamily<T> {
    members: Vec<KernelSpec<T>>,
    kind: FamilyKind,
    dim: usize,
    sigma: T,
    bounds: Ellipticity<T>,
}

impl<T: fmt::Debug> fmt::Debug for OperatorFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("members", &self.members)
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("sigma", &self.sigma)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl<T: Real> OperatorFamily<T> {
    /// Finite family; members must share `n`, `σ` and `(λ, Λ, β)` and satisfy
    /// the bound and drift conditions of that class.
    pub fn finite(members: Vec<KernelSpec<T>>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::Domain("operator family is empty".into()))?;
        let (dim, sigma, bounds) = (first.dim(), first.sigma(), first.bounds());
        bounds.validate()?;
        for m in &members {
            if m.dim() != dim || m.sigma() != sigma || m.bounds() != bounds {
                return Err(Error::Domain(format!(
                    "family member `{}` differs from `{}` in dimension, order or class bounds",
                    m.label(),
                    first.label()
                )));
            }
            let report = check_membership(m)?;
            if !report.bounds.passed {
                return Err(Error::Domain(format!(
                    "member `{}` violates lambda <= K <= Lambda (margin {})",
                    m.label(),
                    report.bounds.margin
                )));
            }
            if !report.drift_ok {
                return Err(Error::Domain(format!(
                    "member `{}` has drift compensation {} above beta = {}",
                    m.label(),
                    report.drift,
                    bounds.beta
                )));
            }
        }
        Ok(Self { members, kind: FamilyKind::Finite, dim, sigma, bounds })
    }

    pub fn pucci(dim: usize, sigma: T, bounds: Ellipticity<T>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Domain(format!("dimension must be 1 or 2, got {dim}")));
        }
        validate_sigma(sigma)?;
        bounds.validate()?;
        Ok(Self { members: Vec::new(), kind: FamilyKind::Pucci, dim, sigma, bounds })
    }

    pub fn members(&self) -> &[KernelSpec<T>] {
        &self.members
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn bounds(&self) -> Ellipticity<T> {
        self.bounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn const_kernel(dim: usize, lo: f64, hi: f64) -> KernelSpec<f64> {
        KernelSpec::new(dim, 1.5, "const", |_y: &[f64; 2]| 1.0).unwrap().with_bounds(Ellipticity {
            lower: lo,
            upper: hi,
            beta: 0.0,
        })
    }

    #[test]
    fn bounds_on_constant_kernel() {
        let r = check_bounds(&const_kernel(2, 1.0, 1.0), 48).unwrap();
        assert!(r.passed);
        assert_eq!(r.margin, 0.0);

        let r = check_bounds(&const_kernel(1, 2.0, 3.0), 48).unwrap();
        assert!(!r.passed);
        assert_eq!(r.margin, -1.0);
    }

    #[test]
    fn bounds_on_odd_bump() {
        let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::OddBump(0.5)).unwrap();
        assert_eq!(k.bounds().lower, 0.5);
        assert_eq!(k.bounds().upper, 1.5);
        assert!(check_bounds(&k, 48).unwrap().passed);
    }

    #[test]
    fn invalid_kernel_values_are_reported() {
        let k = KernelSpec::new(1, 1.5, "neg", |y: &[f64; 2]| if y[0] > 10.0 { -1.0 } else { 1.0 }).unwrap();
        match check_bounds(&k, 48) {
            Err(Error::InvalidKernel { point, value }) => {
                assert!(point[0] > 10.0);
                assert_eq!(value, -1.0);
            }
            other => panic!("expected invalid-kernel error, got {other:?}"),
        }
        let k = KernelSpec::new(2, 1.5, "nan", |_y: &[f64; 2]| f64::NAN).unwrap();
        assert!(matches!(check_bounds(&k, 4), Err(Error::InvalidKernel { .. })));
    }

    #[test]
    fn enlarging_bounds_never_breaks_a_pass() {
        let k = KernelSpec::from_preset(2, 1.5, &KernelPreset::Anisotropic(0.5)).unwrap();
        assert!(check_bounds(&k, 48).unwrap().passed);
        let wider = k.clone().with_bounds(Ellipticity { lower: 0.5, upper: 3.0, beta: 0.0 });
        assert!(check_bounds(&wider, 48).unwrap().passed);
    }

    #[test]
    fn smoothness_of_constant_and_log_oscillating_kernels() {
        let k = const_kernel(2, 1.0, 1.0);
        for level in [SmoothnessLevel::L1, SmoothnessLevel::L2] {
            let r = check_smoothness(&k, level).unwrap();
            assert!(r.passed);
            assert_eq!(r.peak, 0.0);
        }
        let k = KernelSpec::new(2, 1.5, "log-osc", |y: &[f64; 2]| 1.0 + 0.5 * (y[0].hypot(y[1])).ln().sin())
            .unwrap()
            .with_bounds(Ellipticity { lower: 0.5, upper: 1.0, beta: 0.0 });
        let r = check_smoothness(&k, SmoothnessLevel::L1).unwrap();
        assert!(r.passed);
        assert!(r.peak <= 0.5 + 1e-5, "peak {}", r.peak);
        assert!(check_smoothness(&k, SmoothnessLevel::L2).unwrap().passed);
    }

    #[test]
    fn odd_bump_fails_first_order_smoothness_across_its_plane() {
        let k = KernelSpec::<f64>::from_preset(2, 1.5, &KernelPreset::OddBump(0.5)).unwrap();
        let r = check_smoothness(&k, SmoothnessLevel::L1).unwrap();
        assert!(!r.passed);
        assert!(r.worst_point[0].abs() < 1e-9 * r.worst_point[1].abs().max(1e-300) + 1e-12);
    }

    #[test]
    fn drift_of_even_kernels_is_exactly_the_drift() {
        let radii = default_drift_radii::<f64>();
        for dim in [1, 2] {
            for preset in [KernelPreset::Const, KernelPreset::Anisotropic(0.7)] {
                let k = KernelSpec::from_preset(dim, 1.5, &preset).unwrap();
                assert!(drift_compensation(&k, &radii).unwrap() <= 1e-12);
                let k = k.with_drift([1.0, 0.0]);
                assert_eq!(drift_compensation(&k, &radii).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn drift_of_odd_bump_matches_closed_form() {
        // (2-σ)·2a·∫_r^1 ρ^{-σ} dρ = 2a (r^{-1/2} - 1) at σ = 3/2, largest at r = 1e-3.
        let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::OddBump(0.5)).unwrap();
        let got = drift_compensation(&k, &default_drift_radii::<f64>()).unwrap();
        assert_relative_eq!(got, 1e-3_f64.powf(-0.5) - 1.0, max_relative = 1e-10);
    }

    #[test]
    fn drift_radii_must_lie_in_unit_interval() {
        let k = const_kernel(1, 1.0, 1.0);
        assert!(drift_compensation(&k, &[]).is_err());
        assert!(drift_compensation(&k, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn preset_round_trip() {
        for s in ["const", "odd-bump(0.5)", "smooth-odd(0.25)", "anisotropic(-0.3)"] {
            let p: KernelPreset = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("wiggle(1)".parse::<KernelPreset>().is_err());
    }

    #[test]
    fn family_rejects_mismatched_or_overbudget_members() {
        assert!(OperatorFamily::<f64>::finite(vec![]).is_err());
        let a = const_kernel(1, 1.0, 2.0);
        let b = KernelSpec::new(1, 1.25, "c", |_y: &[f64; 2]| 1.0).unwrap().with_bounds(Ellipticity {
            lower: 1.0,
            upper: 2.0,
            beta: 0.0,
        });
        assert!(OperatorFamily::finite(vec![a.clone(), b]).is_err());
        let drifting = a.clone().with_drift([0.5, 0.0]);
        assert!(OperatorFamily::finite(vec![a.clone(), drifting]).is_err());
        let ok = OperatorFamily::finite(vec![a]).unwrap();
        assert_eq!(ok.kind(), FamilyKind::Finite);
    }
}
