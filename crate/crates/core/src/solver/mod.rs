//! Explicit monotone time stepping for `u_t = inf_L L u + f(t)`.
//!
//! One step is `u ← u + dt (I u + f)` at every updated node. The scheme is a
//! convex combination of neighbouring values as long as `dt · row_sum ≤ 1`,
//! where `row_sum` is the total off-centre weight of the discrete operator
//! (including the upwind drift). That gives a discrete comparison principle.

mod spectral;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{numeric, Error, Result};
use crate::field::{Exterior, FieldSlice, Grid, SpaceTimeField};
use crate::kernel::OperatorFamily;
use crate::nonlocal::{DiscreteFamily, Probe, QuadratureConfig};
use crate::scalar::{lit, to_f64, Real};

pub use spectral::{fractional_symbol, SpectralOracle};

/// The time-dependent source `f(t)`.
#[derive(Clone)]
pub enum Source<T> {
    Zero,
    Constant(T),
    Function { label: String, f: Arc<dyn Fn(T) -> T + Send + Sync> },
}

impl<T: Real> Source<T> {
    pub fn eval(&self, t: T) -> T {
        match self {
            Source::Zero => T::zero(),
            Source::Constant(c) => *c,
            Source::Function { f, .. } => f(t),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Source::Zero => "zero".into(),
            Source::Constant(c) => format!("const({c})"),
            Source::Function { label, .. } => label.clone(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Source<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::Constant(c) => write!(f, "Constant({c:?})"),
            Source::Function { label, .. } => write!(f, "Function({label})"),
        }
    }
}

/// How nodes outside the updated set get their values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Boundary nodes of the box are overwritten with the exterior data.
    ExteriorData,
    Periodic,
}

#[derive(Clone, Debug)]
pub struct SchemeConfig<T> {
    /// Fraction of the monotonicity limit used for `dt`, in `(0, 1]`.
    pub cfl_fraction: T,
    pub source: Source<T>,
    /// Store a slice every `record_interval` time units (every step if `None`).
    pub record_interval: Option<T>,
    pub quadrature: QuadratureConfig<T>,
}

impl<T: Real> Default for SchemeConfig<T> {
    fn default() -> Self {
        Self {
            cfl_fraction: lit(0.9),
            source: Source::Zero,
            record_interval: None,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// A discretized operator family with its stable time step.
#[derive(Clone, Debug)]
pub struct Scheme<T> {
    family: DiscreteFamily<T>,
    cfg: SchemeConfig<T>,
    grid: Grid<T>,
    row_sum: T,
    dt: T,
}

impl<T: Real> Scheme<T> {
    pub fn new(family: OperatorFamily<T>, grid: &Grid<T>, cfg: SchemeConfig<T>) -> Result<Self> {
        if !(cfg.cfl_fraction > T::zero() && cfg.cfl_fraction <= T::one()) {
            return Err(Error::Domain(format!("cfl_fraction must lie in (0, 1], got {}", cfg.cfl_fraction)));
        }
        if let Some(r) = cfg.record_interval {
            if !(r > T::zero()) {
                return Err(Error::Domain("record_interval must be positive".into()));
            }
        }
        let family = DiscreteFamily::new(family, grid, &cfg.quadrature)?;
        let row_sum = family.row_sum();
        if !(row_sum.is_finite() && row_sum > T::zero()) {
            return Err(numeric("scheme row sum"));
        }
        let dt = cfg.cfl_fraction / row_sum;
        if dt * row_sum > T::one() + lit(1e-12) {
            return Err(Error::Cfl { product: to_f64(dt * row_sum) });
        }
        Ok(Self { family, cfg, grid: grid.clone(), row_sum, dt })
    }

    pub fn family(&self) -> &DiscreteFamily<T> {
        &self.family
    }

    pub fn config(&self) -> &SchemeConfig<T> {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Total off-centre weight per node, drift included.
    pub fn row_sum(&self) -> T {
        self.row_sum
    }

    /// Largest time step allowed by the configured CFL fraction.
    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        if self.grid.is_periodic() {
            BoundaryMode::Periodic
        } else {
            BoundaryMode::ExteriorData
        }
    }

    /// Advances one slice by `dt`. Refuses steps that break monotonicity.
    pub fn step(&self, s: &FieldSlice<'_, T>, dt: T) -> Result<StepOutput<T>> {
        let product = dt * self.row_sum;
        if !(dt > T::zero()) || product > T::one() + lit(1e-12) {
            return Err(Error::Cfl { product: to_f64(product) });
        }
        self.family.base_rule().ensure_compatible(s.grid)?;
        let f = self.cfg.source.eval(s.t);
        let t_next = s.t + dt;
        let periodic = s.grid.is_periodic();
        let rows: Vec<Result<(T, T)>> = (0..s.grid.len())
            .into_par_iter()
            .map(|i| {
                if !periodic && s.grid.is_boundary(i) {
                    return Ok((s.exterior.eval(&s.grid.point(i), t_next), T::zero()));
                }
                let e = self.family.bellman_probe(&Probe::at_node(s, i))?;
                Ok((s.node(i) + dt * (e.value + f), e.tail_error_bound))
            })
            .collect();
        let mut values = Vec::with_capacity(rows.len());
        let mut tail = T::zero();
        for r in rows {
            let (v, b) = r?;
            if !v.is_finite() {
                return Err(numeric(format!(
                    "solver step at t = {}, node {:?}",
                    s.t,
                    &s.grid.point(values.len())[..s.grid.dim()]
                )));
            }
            values.push(v);
            tail = tail.max(b);
        }
        Ok(StepOutput { values, t: t_next, max_tail_bound: tail })
    }

    /// Number of steps and the uniform step used to reach `horizon`. When a
    /// record interval is set the step count is a multiple of the number of
    /// records, so stored times are exact multiples of the interval.
    pub fn plan(&self, horizon: T) -> Result<(usize, T, usize)> {
        if !(horizon > T::zero()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        let mut steps = (horizon / self.dt).ceil().to_usize().ok_or_else(|| numeric("step count"))?.max(1);
        let stride = match self.cfg.record_interval {
            None => 1,
            Some(r) => {
                let records = (horizon / r).round().to_usize().unwrap_or(1).max(1);
                steps = steps.div_ceil(records) * records;
                steps / records
            }
        };
        Ok((steps, horizon / lit(steps as f64), stride))
    }
}

/// Values after one step.
#[derive(Clone, Debug)]
pub struct StepOutput<T> {
    pub values: Vec<T>,
    pub t: T,
    pub max_tail_bound: T,
}

/// A solved field with the run diagnostics written to the manifest.
#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub field: SpaceTimeField<T>,
    pub dt: T,
    pub steps: usize,
    pub row_sum: T,
    pub max_tail_bound: T,
    /// `max(sup|u₀|, sup|g|) + T sup|f| + T·tail`, or `None` for unbounded exterior data.
    pub sup_bound: Option<T>,
    pub sup_observed: T,
}

fn exterior_sup<T: Real>(ext: &Exterior<T>) -> Option<T> {
    match ext {
        Exterior::Growth { .. } => None,
        other => Some(other.growth().0),
    }
}

/// Runs `u₀` (the last slice of `initial`) forward for `horizon`.
pub fn solve<T: Real>(initial: &SpaceTimeField<T>, scheme: &Scheme<T>, horizon: T) -> Result<Solution<T>> {
    if initial.is_empty() {
        return Err(Error::Domain("initial field has no slices".into()));
    }
    if initial.grid() != scheme.grid() {
        return Err(Error::Domain("initial data and scheme live on different grids".into()));
    }
    let (steps, dt, stride) = scheme.plan(horizon)?;
    let u0 = initial.last_slice();
    let t0 = u0.t;
    let mut field =
        SpaceTimeField::new(initial.grid().clone(), initial.sigma(), initial.exterior().clone())?.with_dt(dt);
    let mut current: Vec<T> = u0.values.to_vec();
    if !scheme.grid().is_periodic() {
        for (i, v) in current.iter_mut().enumerate() {
            if scheme.grid().is_boundary(i) {
                *v = initial.exterior().eval(&scheme.grid().point(i), t0);
            }
        }
    }
    field.push_slice(t0, current.clone())?;
    let sup0 = current.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut sup_f = scheme.config().source.eval(t0).abs();
    let mut tail = T::zero();
    let mut sup_observed = sup0;
    for n in 1..=steps {
        let t = t0 + dt * lit((n - 1) as f64);
        let slice = FieldSlice::new(field.grid(), &current, field.exterior(), t);
        let out = scheme.step(&slice, dt)?;
        tail = tail.max(out.max_tail_bound);
        sup_f = sup_f.max(scheme.config().source.eval(t).abs());
        current = out.values;
        sup_observed = current.iter().fold(sup_observed, |m, v| m.max(v.abs()));
        if n % stride == 0 || n == steps {
            let t_rec = t0 + dt * lit(n as f64);
            field.push_slice(t_rec, current.clone())?;
        }
    }
    let sup_bound =
        if scheme.grid().is_periodic() { Some(sup0) } else { exterior_sup(initial.exterior()).map(|g| sup0.max(g)) }
            .map(|b| b + horizon * (sup_f + tail));
    if let Some(b) = sup_bound {
        if sup_observed > b * (T::one() + lit(1e-10)) + lit(1e-12) {
            return Err(numeric(format!("stability bound violated: sup |u| = {sup_observed} > {b}")));
        }
    }
    log::debug!("solved {steps} steps, dt = {dt}, row sum = {}", scheme.row_sum());
    Ok(Solution { field, dt, steps, row_sum: scheme.row_sum(), max_tail_bound: tail, sup_bound, sup_observed })
}

/// Result of running two ordered data sets side by side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonReport<T> {
    /// `max (u - v)⁺` over all stored slices and nodes.
    pub max_violation: T,
    pub slices: usize,
    pub passed: bool,
}

/// Tolerance of [`comparison_test`].
pub const COMPARISON_TOLERANCE: f64 = 1e-10;

/// Solves from `u₀ ≤ v₀` (exteriors ordered as well) and checks `u ≤ v + 10⁻¹⁰`
/// at every stored time.
pub fn comparison_test<T: Real>(
    u0: &SpaceTimeField<T>,
    v0: &SpaceTimeField<T>,
    scheme: &Scheme<T>,
    horizon: T,
) -> Result<ComparisonReport<T>> {
    let (su, sv) = (u0.last_slice(), v0.last_slice());
    if su.values.iter().zip(sv.values.iter()).any(|(a, b)| *a > *b) {
        return Err(Error::Precondition("initial data are not ordered".into()));
    }
    if !scheme.grid().is_periodic() {
        let g = scheme.grid();
        let r = g.half_width();
        for j in 0..64 {
            for scale in [1.25, 2.0, 4.0, 16.0] {
                let th = lit::<T>(std::f64::consts::TAU * j as f64 / 64.0);
                let x = if g.dim() == 1 {
                    [if j % 2 == 0 { r } else { -r } * lit(scale), T::zero()]
                } else {
                    [r * lit::<T>(scale) * th.cos(), r * lit::<T>(scale) * th.sin()]
                };
                if u0.exterior().eval(&x, su.t) > v0.exterior().eval(&x, sv.t) {
                    return Err(Error::Precondition("exterior data are not ordered".into()));
                }
            }
        }
    }
    let a = solve(u0, scheme, horizon)?;
    let b = solve(v0, scheme, horizon)?;
    let mut worst = T::zero();
    for k in 0..a.field.len() {
        for (x, y) in a.field.values(k).iter().zip(b.field.values(k)) {
            worst = worst.max(*x - *y);
        }
    }
    Ok(ComparisonReport { max_violation: worst, slices: a.field.len(), passed: worst <= lit(COMPARISON_TOLERANCE) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Ellipticity, KernelPreset, KernelSpec};
    use crate::presets::FieldPreset;

    fn singleton(dim: usize, sigma: f64, drift: [f64; 2]) -> OperatorFamily<f64> {
        let k = KernelSpec::from_preset(dim, sigma, &KernelPreset::Const)
            .unwrap()
            .with_drift(drift)
            .with_bounds(Ellipticity { lower: 1.0, upper: 1.0, beta: drift[0].hypot(drift[1]) });
        OperatorFamily::finite(vec![k]).unwrap()
    }

    #[test]
    fn constants_are_stationary() {
        let grid = Grid::new(1, 1.0, 1.0 / 16.0).unwrap();
        let fam = OperatorFamily::pucci(1, 1.5, Ellipticity { lower: 1.0, upper: 2.0, beta: 0.5 }).unwrap();
        let scheme = Scheme::new(fam, &grid, SchemeConfig::default()).unwrap();
        let u0 = SpaceTimeField::from_fn(grid, 1.5, &[0.0], Exterior::Constant(0.7), |_, _| 0.7).unwrap();
        let sol = solve(&u0, &scheme, 0.2).unwrap();
        for k in 0..sol.field.len() {
            assert!(sol.field.values(k).iter().all(|v: &f64| (*v - 0.7).abs() < 1e-13));
        }
    }

    #[test]
    fn linear_data_move_with_the_drift() {
        let a = [0.8, -0.3];
        let b = [0.5, 0.25];
        let ba = a[0] * b[0] + a[1] * b[1];
        let grid = Grid::new(2, 1.0, 0.125).unwrap();
        let u0 = SpaceTimeField::from_global_fn(grid.clone(), 1.5, &[0.0], "moving linear", (1.0, 1.0), move |x, t| {
            a[0] * x[0] + a[1] * x[1] + t * ba
        })
        .unwrap();
        let scheme = Scheme::new(singleton(2, 1.5, b), &grid, SchemeConfig::default()).unwrap();
        let sol = solve(&u0, &scheme, 0.25).unwrap();
        let last = sol.field.len() - 1;
        let t = sol.field.times()[last];
        for (i, v) in sol.field.values(last).iter().enumerate() {
            let p = grid.point(i);
            assert!((v - (a[0] * p[0] + a[1] * p[1] + t * ba)).abs() < 1e-8 * t.max(1.0));
        }
    }

    #[test]
    fn steps_beyond_the_cfl_limit_are_refused() {
        let grid = Grid::new(1, 1.0, 1.0 / 16.0).unwrap();
        let scheme = Scheme::new(singleton(1, 1.5, [0.0; 2]), &grid, SchemeConfig::default()).unwrap();
        let u0 = SpaceTimeField::from_fn(grid, 1.5, &[0.0], Exterior::Zero, |_, _| 0.0).unwrap();
        let s = u0.slice(0);
        assert!(matches!(scheme.step(&s, scheme.dt() * 1.2), Err(Error::Cfl { .. })));
        assert!(scheme.step(&s, scheme.dt()).is_ok());
    }

    #[test]
    fn source_constant_shifts_linearly() {
        let grid = Grid::new(1, 1.0, 1.0 / 16.0).unwrap();
        let bump = FieldPreset::Bump { amplitude: 1.0, center: 0.0, radius: 0.6 };
        let u0 = SpaceTimeField::from_fn(grid.clone(), 1.5, &[0.0], Exterior::Zero, |x, _| bump.eval(x, 1)).unwrap();
        let fam = singleton(1, 1.5, [0.0; 2]);
        let base = Scheme::new(fam.clone(), &grid, SchemeConfig::default()).unwrap();
        let cfg = SchemeConfig { source: Source::Constant(0.3), ..SchemeConfig::default() };
        let shifted = Scheme::new(fam, &grid, cfg).unwrap();
        // With box boundary data the shift is only exact on the torus.
        let torus = Grid::periodic(1, 1.0, 1.0 / 16.0).unwrap();
        let ut = SpaceTimeField::from_fn(torus.clone(), 1.5, &[0.0], Exterior::Zero, |x, _| bump.eval(x, 1)).unwrap();
        let fam_t = singleton(1, 1.5, [0.0; 2]);
        let a = solve(&ut, &Scheme::new(fam_t.clone(), &torus, SchemeConfig::default()).unwrap(), 0.1).unwrap();
        let cfg_t = SchemeConfig { source: Source::Constant(0.3), ..SchemeConfig::default() };
        let b = solve(&ut, &Scheme::new(fam_t, &torus, cfg_t).unwrap(), 0.1).unwrap();
        for k in 0..a.field.len() {
            let t = a.field.times()[k];
            for (x, y) in a.field.values(k).iter().zip(b.field.values(k)) {
                assert!((y - x - 0.3 * t).abs() < 1e-10);
            }
        }
        // In the box the source still raises the solution.
        let pa = solve(&u0, &base, 0.1).unwrap();
        let pb = solve(&u0, &shifted, 0.1).unwrap();
        let last = pa.field.len() - 1;
        assert!(pa.field.values(last).iter().zip(pb.field.values(last)).all(|(x, y)| y >= x));
    }

    #[test]
    fn comparison_examples() {
        let grid = Grid::new(1, 1.0, 1.0 / 16.0).unwrap();
        let fam = OperatorFamily::pucci(1, 1.25, Ellipticity { lower: 1.0, upper: 2.0, beta: 1.0 }).unwrap();
        let scheme = Scheme::new(fam, &grid, SchemeConfig::default()).unwrap();
        let g = FieldPreset::Gaussian { amplitude: 1.0, center: 0.1, width: 0.3 };
        let u0 = SpaceTimeField::from_fn(grid.clone(), 1.25, &[0.0], Exterior::Zero, |x, _| g.eval(x, 1)).unwrap();
        let v0 =
            SpaceTimeField::from_fn(grid.clone(), 1.25, &[0.0], Exterior::Constant(1.0), |x, _| g.eval(x, 1) + 1.0)
                .unwrap();
        let r = comparison_test(&u0, &v0, &scheme, 0.1).unwrap();
        assert!(r.passed, "{r:?}");
        let same = comparison_test(&u0, &u0, &scheme, 0.1).unwrap();
        assert_eq!(same.max_violation, 0.0);
        assert!(matches!(comparison_test(&v0, &u0, &scheme, 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn record_interval_aligns_times() {
        let grid = Grid::new(1, 1.0, 1.0 / 16.0).unwrap();
        let cfg = SchemeConfig { record_interval: Some(0.025), ..SchemeConfig::default() };
        let scheme = Scheme::new(singleton(1, 1.5, [0.0; 2]), &grid, cfg).unwrap();
        let u0 = SpaceTimeField::from_fn(grid, 1.5, &[-0.1], Exterior::Zero, |_, _| 0.0).unwrap();
        let sol = solve(&u0, &scheme, 0.1).unwrap();
        assert_eq!(sol.field.len(), 5);
        for (k, t) in sol.field.times().iter().enumerate() {
            assert!((t - (-0.1 + 0.025 * k as f64)).abs() < 1e-12);
        }
    }
}
