//! Solve-then-check pipelines for one order `σ` and for a whole sweep.

use std::fs;
use std::path::{Path, PathBuf};

use fracbellman::field::{write_field_csv, write_sidecar, Cylinder, Exterior, Grid, SpaceTimeField};
use fracbellman::harness::{
    check_bound_l, check_comparability, frac_laplacian_holder, oscillation_decay, oscillation_lemma_check,
    point_estimate_check, subsolution_identity_check, time_regularity_check, write_decay_svg, BoundL, Comparability,
    Cutoff, DecayTrace, HolderFit, OscillationLemma, OscillationParams, PnField, PointEstimate, RegularityReport,
    SubsolutionMargin, TimeRegularity,
};
use fracbellman::kernel::{check_membership, KernelSpec, OperatorFamily};
use fracbellman::nonlocal::{
    check_concavity_translation_homogeneity, check_integration_by_parts, check_uniform_ellipticity,
    pucci_extremal_slice, DiscreteFamily, Extremal, Mollifier, QuadratureConfig, QuadratureRule, PROPERTY_SLACK,
};
use fracbellman::presets::FieldPreset;
use fracbellman::solver::{
    comparison_test, fractional_symbol, solve, ComparisonReport, Scheme, SchemeConfig, Solution, Source,
    COMPARISON_TOLERANCE,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Check, Experiment, FamilyKind};
use crate::CliError;

/// Attaches the pipeline stage to a library error.
trait Stage<T> {
    fn stage(self, sigma: f64, what: &str) -> Result<T, CliError>;
}

impl<T> Stage<T> for fracbellman::Result<T> {
    fn stage(self, sigma: f64, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Run { stage: format!("sigma={sigma} {what}"), source })
    }
}

impl Experiment {
    pub fn grid(&self, h: f64) -> fracbellman::Result<Grid<f64>> {
        let c = &self.config;
        if c.periodic {
            Grid::periodic(c.n, c.half_width, h)
        } else {
            Grid::new(c.n, c.half_width, h)
        }
    }

    pub fn family(&self, sigma: f64) -> fracbellman::Result<OperatorFamily<f64>> {
        let n = self.config.n;
        match self.config.family.kind {
            FamilyKind::Pucci => OperatorFamily::pucci(n, sigma, self.bounds()),
            FamilyKind::Finite => {
                let members = self
                    .members
                    .iter()
                    .map(|(k, b)| Ok(KernelSpec::from_preset(n, sigma, k)?.with_bounds(self.bounds()).with_drift(*b)))
                    .collect::<fracbellman::Result<Vec<_>>>()?;
                OperatorFamily::finite(members)
            }
        }
    }

    pub fn scheme(&self, sigma: f64, h: f64) -> fracbellman::Result<Scheme<f64>> {
        let c = &self.config;
        let cfg = SchemeConfig {
            cfl_fraction: c.cfl_fraction,
            source: if c.source == 0.0 { Source::Zero } else { Source::Constant(c.source) },
            record_interval: c.record_interval,
            quadrature: QuadratureConfig::default(),
        };
        Scheme::new(self.family(sigma)?, &self.grid(h)?, cfg)
    }

    fn exterior(&self, shift: f64) -> Exterior<f64> {
        if self.config.periodic {
            return Exterior::Zero;
        }
        let base = self.exterior.exterior::<f64>(self.config.n);
        match (&base, shift) {
            (_, s) if s == 0.0 => base,
            (Exterior::Zero, s) => Exterior::Constant(s),
            (Exterior::Constant(c), s) => Exterior::Constant(c + s),
            _ => Exterior::combine(1.0, &base, shift, &Exterior::Constant(1.0)),
        }
    }

    /// `u₀ + shift + G·extra` at `t0`, with the exterior shifted by `shift`.
    fn initial_field(
        &self,
        sigma: f64,
        grid: &Grid<f64>,
        shift: f64,
        extra: f64,
    ) -> fracbellman::Result<SpaceTimeField<f64>> {
        let n = self.config.n;
        let init = self.initial.clone();
        let lift = FieldPreset::Gaussian { amplitude: 1.0, center: 0.0, width: 0.5 };
        SpaceTimeField::from_fn(grid.clone(), sigma, &[self.config.t0], self.exterior(shift), move |x, _| {
            init.eval(x, n) + shift + extra * lift.eval(x, n)
        })
    }

    /// Runs `u₀` against `u₀ + c(1 + G)` (exterior raised by `c`, `G` a
    /// Gaussian) over the configured comparison horizon.
    pub fn comparison(&self, sigma: f64, h: f64) -> fracbellman::Result<ComparisonReport<f64>> {
        let hp = &self.config.harness;
        let scheme = self.scheme(sigma, h)?;
        let c = hp.comparison_shift;
        let u0 = self.initial_field(sigma, scheme.grid(), 0.0, 0.0)?;
        let v0 = self.initial_field(sigma, scheme.grid(), c, c)?;
        comparison_test(&u0, &v0, &scheme, hp.comparison_horizon)
    }

    pub fn solve(&self, sigma: f64, h: f64, shift: f64) -> fracbellman::Result<Solution<f64>> {
        let scheme = self.scheme(sigma, h)?;
        let u0 = self.initial_field(sigma, scheme.grid(), shift, 0.0)?;
        solve(&u0, &scheme, self.config.horizon)
    }
}

/// Identity residuals of the discrete operators at sampled nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorStats {
    pub points: usize,
    pub homogeneity: f64,
    pub duality: f64,
    pub concavity: f64,
    pub translation: f64,
    pub ellipticity: f64,
    /// Largest relative integration-by-parts residual over the members.
    pub ibp: f64,
}

/// Everything measured at one resolution.
#[derive(Clone, Debug)]
pub struct Measurements {
    pub h: f64,
    pub solution: Solution<f64>,
    pub comparison: Option<ComparisonReport<f64>>,
    pub spectral_error: Option<f64>,
    pub operators: Option<OperatorStats>,
    pub bound_l: Option<BoundL<f64>>,
    pub comparability: Option<Comparability<f64>>,
    pub decay: Option<DecayTrace<f64>>,
    pub holder: Option<HolderFit<f64>>,
    pub point_estimate: Option<PointEstimate<f64>>,
    pub lemma: Option<OscillationLemma<f64>>,
    pub time_regularity: Option<TimeRegularity<f64>>,
    pub subsolution: Option<SubsolutionMargin<f64>>,
}

fn operator_stats(exp: &Experiment, sigma: f64, sol: &Solution<f64>) -> fracbellman::Result<OperatorStats> {
    let grid = sol.field.grid().clone();
    let n = grid.dim();
    let top = sol.field.last_slice();
    let t = top.t;
    // The identities are exact for fields vanishing near the box edge, so
    // the final slice is localized by a radial cutoff first.
    let u = if grid.is_periodic() {
        top.to_field(sigma)?
    } else {
        let outer = grid.half_width() - (grid.spacing() * 4.0).max(0.25);
        let cut = Cutoff::new(outer, 0.5 * outer)?;
        let vals = (0..grid.len()).map(|i| top.values[i] * cut.eval(&grid.point(i), n)).collect();
        SpaceTimeField::single(grid.clone(), sigma, t, vals, Exterior::Zero)?
    };
    let bounds = exp.bounds();
    let q = QuadratureRule::base(&grid, sigma, &QuadratureConfig::default())?;

    let interior: Vec<usize> = (0..grid.len()).filter(|&i| grid.is_periodic() || grid.depth(i) >= 3).collect();
    let count = exp.config.harness.property_points.min(interior.len());
    let mut rng = ChaCha8Rng::seed_from_u64(exp.config.seed);
    let mut points: Vec<usize> = sample(&mut rng, interior.len(), count).into_iter().map(|k| interior[k]).collect();
    points.sort_unstable();

    let props =
        check_concavity_translation_homogeneity(&bounds, &u, t, &q, &Mollifier::tent(n, 2), 2.5, [1.0, 0.0], &points)?;

    let neg = u.scaled(-1.0);
    let (s, sn) = (u.slice_at(t)?, neg.slice_at(t)?);
    let mut duality = 0.0_f64;
    let mut scale = 1.0_f64;
    for &i in &points {
        let x = grid.point(i);
        let plus = pucci_extremal_slice(Extremal::Plus, &bounds, &sn, &x, &q)?.value;
        let minus = pucci_extremal_slice(Extremal::Minus, &bounds, &s, &x, &q)?.value;
        duality = duality.max((plus + minus).abs());
        scale = scale.max(minus.abs());
    }

    let lift = FieldPreset::Gaussian { amplitude: 1.0, center: 0.0, width: 0.5 };
    let ext = if grid.is_periodic() { Exterior::Zero } else { lift.exterior(n) };
    let v = SpaceTimeField::from_fn(grid.clone(), sigma, &[t], ext, move |x, _| lift.eval(x, n))?;
    let family = DiscreteFamily::new(exp.family(sigma)?, &grid, &QuadratureConfig::default())?;
    let ell = check_uniform_ellipticity(&family, &u, &v, t, &points)?;

    let bump = |c: f64| FieldPreset::Bump { amplitude: 1.0, center: c, radius: 0.5 };
    let (pa, pb) = (bump(0.0), bump(0.25));
    let fa = SpaceTimeField::from_fn(grid.clone(), sigma, &[t], Exterior::Zero, move |x, _| pa.eval(x, n))?;
    let fb = SpaceTimeField::from_fn(grid.clone(), sigma, &[t], Exterior::Zero, move |x, _| pb.eval(x, n))?;
    let kernels: Vec<KernelSpec<f64>> = match exp.config.family.kind {
        FamilyKind::Finite => exp.family(sigma)?.members().to_vec(),
        FamilyKind::Pucci => vec![KernelSpec::from_preset(n, sigma, &fracbellman::kernel::KernelPreset::Const)?],
    };
    let mut ibp = 0.0_f64;
    for k in &kernels {
        let r = check_integration_by_parts(k, &fa, &fb, t, &QuadratureConfig::default())?;
        ibp = ibp.max(r.residual / r.scale.max(f64::MIN_POSITIVE));
    }

    Ok(OperatorStats {
        points: points.len(),
        homogeneity: props.homogeneity_error / props.scale,
        duality: duality / scale,
        concavity: props.concavity_violation / props.scale,
        translation: props.translation_violation / props.scale,
        ellipticity: ell.lower_violation.max(ell.upper_violation) / ell.scale,
        ibp,
    })
}

/// Runs every enabled check at spacing `h`.
pub fn measure(exp: &Experiment, sigma: f64, h: f64) -> Result<Measurements, CliError> {
    let hp = &exp.config.harness;
    let top = exp.final_time();
    let solution = exp.solve(sigma, h, 0.0).stage(sigma, "solver")?;
    let u = &solution.field;

    let comparison =
        if exp.enabled(Check::Comparison) { Some(exp.comparison(sigma, h).stage(sigma, "comparison")?) } else { None };

    let spectral_error = if exp.enabled(Check::Spectral) {
        let FieldPreset::Cos(k) = exp.initial else { unreachable!("validated") };
        let mu = fractional_symbol(sigma, k).stage(sigma, "spectral oracle")?;
        let decay = (-mu * exp.config.horizon).exp();
        let s = u.last_slice();
        let grid = u.grid();
        Some((0..grid.len()).map(|i| (s.values[i] - decay * (k * grid.point(i)[0]).cos()).abs()).fold(0.0, f64::max))
    } else {
        None
    };

    let operators = if exp.enabled(Check::Operators) {
        Some(operator_stats(exp, sigma, &solution).stage(sigma, "operators")?)
    } else {
        None
    };

    let region = Cylinder::centered(top, hp.region_radius, hp.region_radius.powf(sigma)).stage(sigma, "harness")?;
    let bound_l = if exp.enabled(Check::BoundL) {
        Some(
            check_bound_l(u, exp.config.upper, exp.config.beta, &region, &QuadratureConfig::default())
                .stage(sigma, "bound_l")?,
        )
    } else {
        None
    };

    let (comparability, decay) = if exp.enabled(Check::Comparability) || exp.enabled(Check::Decay) {
        let pn = PnField::compute(u, top - hp.window, top).stage(sigma, "P/N fields")?;
        let cmp = if exp.enabled(Check::Comparability) {
            Some(
                check_comparability(&pn, exp.config.lambda, exp.config.upper, hp.alpha, hp.comparability_radius)
                    .stage(sigma, "comparability")?,
            )
        } else {
            None
        };
        let dec = if exp.enabled(Check::Decay) {
            let params = OscillationParams::new(hp.kappa, hp.theta, hp.alpha);
            Some(oscillation_decay(&pn, &params).stage(sigma, "decay")?)
        } else {
            None
        };
        (cmp, dec)
    } else {
        (None, None)
    };

    let holder = if exp.enabled(Check::Holder) {
        Some(frac_laplacian_holder(u, top, hp.holder_radius).stage(sigma, "holder")?)
    } else {
        None
    };

    let point_estimate = if exp.enabled(Check::PointEstimate) {
        let v = exp.solve(sigma, h, hp.supersolution_shift).stage(sigma, "point_estimate solver")?;
        let t_a = top + hp.pe_time;
        let f_norm = exp.config.source.abs();
        let probe = point_estimate_check(&v.field, hp.pe_radius, t_a, &[1.0], f_norm).stage(sigma, "point_estimate")?;
        let m = probe.infimum + f_norm;
        let levels: Vec<f64> = hp.pe_levels.iter().map(|l| l * m).collect();
        Some(point_estimate_check(&v.field, hp.pe_radius, t_a, &levels, f_norm).stage(sigma, "point_estimate")?)
    } else {
        None
    };

    let lemma = if exp.enabled(Check::OscillationLemma) {
        let f_norm = exp.config.source.max(0.0) * exp.config.horizon;
        Some(
            oscillation_lemma_check(u, hp.lemma_radius, top + hp.lemma_time, f_norm)
                .stage(sigma, "oscillation_lemma")?,
        )
    } else {
        None
    };

    let time_regularity = if exp.enabled(Check::TimeRegularity) {
        let c = Cylinder::centered(top, hp.region_radius, hp.region_radius).stage(sigma, "time_regularity")?;
        Some(time_regularity_check(u, hp.alpha, &c).stage(sigma, "time_regularity")?)
    } else {
        None
    };

    let subsolution = if exp.enabled(Check::Subsolution) {
        let k = KernelSpec::from_preset(exp.config.n, sigma, &exp.subsolution_kernel)
            .stage(sigma, "subsolution")?
            .truncated(hp.truncation);
        let cutoff = Cutoff::new(hp.cutoff[0], hp.cutoff[1]).stage(sigma, "subsolution")?;
        let c = Cylinder::centered(top, hp.cutoff[1], hp.subsolution_height).stage(sigma, "subsolution")?;
        Some(
            subsolution_identity_check(u, &k, &exp.bounds(), &cutoff, &c, &QuadratureConfig::default())
                .stage(sigma, "subsolution")?,
        )
    } else {
        None
    };

    Ok(Measurements {
        h,
        solution,
        comparison,
        spectral_error,
        operators,
        bound_l,
        comparability,
        decay,
        holder,
        point_estimate,
        lemma,
        time_regularity,
        subsolution,
    })
}

/// `|a - b| / max(|a|, |b|)`, 0 when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

fn finite(r: &mut RegularityReport, check: Check, sigma: f64, quantity: &str, value: f64) {
    r.push(check.name(), sigma, quantity, value, f64::INFINITY, value.is_finite());
}

fn at_most(r: &mut RegularityReport, check: Check, sigma: f64, quantity: &str, value: f64, tol: f64) {
    r.push(check.name(), sigma, quantity, value, tol, value <= tol);
}

fn stable(r: &mut RegularityReport, check: Check, sigma: f64, quantity: &str, coarse: f64, fine: f64, tol: f64) {
    let change = relative_change(coarse, fine);
    r.push(check.name(), sigma, &format!("{quantity}_refinement_change"), change, tol, change <= tol);
}

/// Outcome of the pipeline for one order.
#[derive(Clone, Debug)]
pub struct SigmaOutcome {
    pub sigma: f64,
    pub report: RegularityReport,
    pub coarse: Measurements,
    pub fine: Option<Measurements>,
}

pub fn run_sigma(exp: &Experiment, sigma: f64) -> Result<SigmaOutcome, CliError> {
    let hp = &exp.config.harness;
    let mut r = RegularityReport::new();

    if exp.enabled(Check::Membership) {
        let family = exp.family(sigma).stage(sigma, "kernel_model")?;
        let beta = exp.config.beta;
        for (j, k) in family.members().iter().enumerate() {
            let m = check_membership(k).stage(sigma, "kernel_model")?;
            r.push(
                Check::Membership.name(),
                sigma,
                &format!("bounds_margin[{j}]"),
                m.bounds.margin,
                -1e-12,
                m.bounds.passed,
            );
            at_most(
                &mut r,
                Check::Membership,
                sigma,
                &format!("drift_compensation[{j}]"),
                m.drift,
                beta * (1.0 + 1e-12) + 1e-14,
            );
            if exp.members[j].0.is_even() && k.drift() == [0.0, 0.0] {
                at_most(&mut r, Check::Membership, sigma, &format!("even_drift[{j}]"), m.drift, 1e-12);
            }
            if let Some(s) = &m.smoothness {
                r.push(Check::Membership.name(), sigma, &format!("smoothness_margin[{j}]"), s.margin, -1e-12, s.passed);
            }
        }
        if family.members().is_empty() {
            r.note(Check::Membership.name(), sigma, "pucci_lambda_over_Lambda", exp.config.lambda / exp.config.upper);
        }
    }

    let coarse = measure(exp, sigma, exp.config.h)?;
    let fine = if exp.config.refine { Some(measure(exp, sigma, exp.config.h / 2.0)?) } else { None };
    let c = &coarse;

    if exp.enabled(Check::Solve) {
        let s = &c.solution;
        match s.sup_bound {
            Some(b) => at_most(&mut r, Check::Solve, sigma, "sup_observed", s.sup_observed, b * (1.0 + 1e-10) + 1e-12),
            None => finite(&mut r, Check::Solve, sigma, "sup_observed", s.sup_observed),
        }
        r.note(Check::Solve.name(), sigma, "steps", s.steps as f64);
        r.note(Check::Solve.name(), sigma, "dt", s.dt);
        r.note(Check::Solve.name(), sigma, "tail_bound", s.max_tail_bound);
    }
    if let Some(cmp) = &c.comparison {
        at_most(&mut r, Check::Comparison, sigma, "max_violation", cmp.max_violation, COMPARISON_TOLERANCE);
    }
    if let Some(e) = c.spectral_error {
        at_most(&mut r, Check::Spectral, sigma, "max_error", e, hp.spectral_tolerance);
        if let Some(fe) = fine.as_ref().and_then(|f| f.spectral_error) {
            let gain = if fe > 0.0 { e / fe } else { f64::INFINITY };
            r.push(Check::Spectral.name(), sigma, "refinement_gain", gain, hp.spectral_gain, gain >= hp.spectral_gain);
        }
    }
    if let Some(o) = &c.operators {
        at_most(&mut r, Check::Operators, sigma, "homogeneity", o.homogeneity, 1e-12);
        at_most(&mut r, Check::Operators, sigma, "pucci_duality", o.duality, 0.0);
        at_most(&mut r, Check::Operators, sigma, "ellipticity_sandwich", o.ellipticity, 1e-8);
        at_most(&mut r, Check::Operators, sigma, "concavity_sandwich", o.concavity, PROPERTY_SLACK);
        at_most(&mut r, Check::Operators, sigma, "translation_sandwich", o.translation, PROPERTY_SLACK);
        at_most(&mut r, Check::Operators, sigma, "integration_by_parts", o.ibp, 1e-3);
    }
    if let Some(b) = &c.bound_l {
        finite(&mut r, Check::BoundL, sigma, "sup_l", b.sup_l);
        finite(&mut r, Check::BoundL, sigma, "abs_integral", b.abs_integral);
        r.note(Check::BoundL.name(), sigma, "normalization", b.scale);
        if let Some(fb) = fine.as_ref().and_then(|f| f.bound_l.as_ref()) {
            stable(&mut r, Check::BoundL, sigma, "sup_l", b.sup_l, fb.sup_l, hp.bound_tolerance);
            stable(&mut r, Check::BoundL, sigma, "abs_integral", b.abs_integral, fb.abs_integral, hp.bound_tolerance);
        }
    }
    if let Some(cmp) = &c.comparability {
        finite(&mut r, Check::Comparability, sigma, "C", cmp.c);
        if let Some(fc) = fine.as_ref().and_then(|f| f.comparability.as_ref()) {
            stable(&mut r, Check::Comparability, sigma, "C", cmp.c, fc.c, hp.refine_tolerance);
        }
    }
    if let Some(d) = &c.decay {
        let keep = 1.0 - hp.theta;
        for (k, ratio) in d.ratios.iter().enumerate() {
            let tol = if k < 3 { keep } else { 1.0 };
            at_most(&mut r, Check::Decay, sigma, &format!("ratio_{k}"), *ratio, tol);
        }
        if let Some(a) = d.alpha {
            r.note(Check::Decay.name(), sigma, "fitted_alpha", a);
        }
    }
    if let Some(f) = &c.holder {
        r.push(Check::Holder.name(), sigma, "alpha", f.alpha, hp.holder_min_alpha, f.alpha >= hp.holder_min_alpha);
        finite(&mut r, Check::Holder, sigma, "constant", f.constant);
        r.note(Check::Holder.name(), sigma, "residual", f.residual);
    }
    if let Some(p) = &c.point_estimate {
        finite(&mut r, Check::PointEstimate, sigma, "C", p.c);
        finite(&mut r, Check::PointEstimate, sigma, "eps", p.eps);
        r.note(Check::PointEstimate.name(), sigma, "infimum", p.infimum);
        if let Some(fp) = fine.as_ref().and_then(|f| f.point_estimate.as_ref()) {
            stable(&mut r, Check::PointEstimate, sigma, "C", p.c, fp.c, hp.refine_tolerance);
            stable(&mut r, Check::PointEstimate, sigma, "eps", p.eps, fp.eps, hp.refine_tolerance);
        }
    }
    if let Some(l) = &c.lemma {
        match (&l.skipped, l.c) {
            (Some(_), _) => r.push(Check::OscillationLemma.name(), sigma, "skipped", f64::NAN, f64::NAN, true),
            (None, Some(cv)) => {
                finite(&mut r, Check::OscillationLemma, sigma, "C", cv);
                r.note(Check::OscillationLemma.name(), sigma, "lhs", l.lhs);
                r.note(Check::OscillationLemma.name(), sigma, "rhs", l.rhs);
                if let Some(fc) = fine.as_ref().and_then(|f| f.lemma.as_ref()).and_then(|f| f.c) {
                    stable(&mut r, Check::OscillationLemma, sigma, "C", cv, fc, hp.refine_tolerance);
                }
            }
            // Vanishing left side: any constant works.
            (None, None) => r.push(Check::OscillationLemma.name(), sigma, "C", 0.0, f64::INFINITY, l.lhs == 0.0),
        }
    }
    if let Some(t) = &c.time_regularity {
        finite(&mut r, Check::TimeRegularity, sigma, "C", t.c);
        r.note(Check::TimeRegularity.name(), sigma, "sup_ut", t.sup_ut);
        r.note(Check::TimeRegularity.name(), sigma, "holder_ut", t.holder_ut);
        r.note(Check::TimeRegularity.name(), sigma, "holder_gradient", t.holder_gradient);
        if let Some(ft) = fine.as_ref().and_then(|f| f.time_regularity.as_ref()) {
            stable(&mut r, Check::TimeRegularity, sigma, "C", t.c, ft.c, hp.refine_tolerance);
        }
    }
    if let Some(s) = &c.subsolution {
        finite(&mut r, Check::Subsolution, sigma, "margin", s.margin);
        r.note(Check::Subsolution.name(), sigma, "sup_v", s.sup_v);
        if let Some(fs) = fine.as_ref().and_then(|f| f.subsolution.as_ref()) {
            stable(&mut r, Check::Subsolution, sigma, "margin", s.margin, fs.margin, hp.refine_tolerance);
        }
    }
    Ok(SigmaOutcome { sigma, report: r, coarse, fine })
}

/// Rows comparing the orders of a sweep (`sigma = all`).
pub fn cross_sweep(exp: &Experiment, outcomes: &[SigmaOutcome]) -> RegularityReport {
    let mut r = RegularityReport::new();
    let constants: Vec<f64> = outcomes.iter().filter_map(|o| o.coarse.holder.as_ref().map(|f| f.constant)).collect();
    if constants.len() >= 2 {
        let hi = constants.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = constants.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        let tol = exp.config.harness.holder_spread;
        r.push(Check::Holder.name(), "all", "constant_spread", spread, tol, spread < tol);
    }
    r
}

/// A finished sweep and where it was written.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub outcomes: Vec<SigmaOutcome>,
    pub report: RegularityReport,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

fn sigma_dir(root: &Path, sigma: f64) -> PathBuf {
    root.join(format!("sigma_{sigma}"))
}

fn write_field(dir: &Path, exp: &Experiment, sol: &Solution<f64>) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let sigma = sol.field.sigma();
    write_field_csv(&dir.join("field.csv"), &sol.field).stage(sigma, "output")?;
    let extra = [
        ("name", exp.config.name.clone()),
        ("initial", exp.initial.to_string()),
        ("steps", sol.steps.to_string()),
        ("row_sum", sol.row_sum.to_string()),
    ];
    write_sidecar(&dir.join("field.meta"), &sol.field, &extra).stage(sigma, "output")?;
    Ok(())
}

/// Solves every order and writes only the fields.
pub fn run_solve(exp: &Experiment, sigmas: &[f64], root: &Path) -> Result<PathBuf, CliError> {
    let dir = root.join(&exp.config.name);
    let solutions: Vec<Result<Solution<f64>, CliError>> =
        sigmas.par_iter().map(|&s| exp.solve(s, exp.config.h, 0.0).stage(s, "solver")).collect();
    for (s, sol) in sigmas.iter().zip(solutions) {
        write_field(&sigma_dir(&dir, *s), exp, &sol?)?;
    }
    Ok(dir)
}

/// Runs the pipeline for each order (in parallel), then writes fields,
/// per-order and combined reports, a summary and a manifest.
pub fn run_sweep(exp: &Experiment, sigmas: &[f64], root: &Path, plots: bool) -> Result<SweepOutcome, CliError> {
    let dir = root.join(&exp.config.name);
    fs::create_dir_all(&dir)?;
    let outcomes = sigmas.par_iter().map(|&s| run_sigma(exp, s)).collect::<Result<Vec<_>, _>>()?;
    let mut report = RegularityReport::new();
    let mut files = Vec::new();
    for o in &outcomes {
        let sd = sigma_dir(&dir, o.sigma);
        write_field(&sd, exp, &o.coarse.solution)?;
        o.report.write_csv(&sd.join("report.csv")).stage(o.sigma, "output")?;
        for f in ["field.csv", "field.meta", "report.csv"] {
            files.push(format!("sigma_{}/{f}", o.sigma));
        }
        report.extend(o.report.clone());
    }
    report.extend(cross_sweep(exp, &outcomes));
    report.write_csv(&dir.join("report.csv")).stage(f64::NAN, "output")?;
    fs::write(dir.join("summary.txt"), report.summary())?;
    files.extend(["report.csv".to_string(), "summary.txt".to_string()]);
    if plots {
        let series: Vec<(String, Vec<f64>)> = outcomes
            .iter()
            .filter_map(|o| o.coarse.decay.as_ref().map(|d| (format!("sigma={}", o.sigma), d.sups.clone())))
            .collect();
        if !series.is_empty() {
            write_decay_svg(&dir.join("decay.svg"), &format!("{}: sup (P+N) per scale", exp.config.name), &series)
                .stage(f64::NAN, "output")?;
            files.push("decay.svg".into());
        }
    }
    let checks: Vec<&str> = exp.config.checks.iter().map(|c| c.name()).collect();
    let manifest = json!({
        "name": exp.config.name,
        "sigma": sigmas,
        "h": exp.config.h,
        "refine": exp.config.refine,
        "checks": checks,
        "rows": report.rows().len(),
        "failures": report.failures().count(),
        "passed": report.passed(),
        "files": files,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is valid JSON");
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(SweepOutcome { dir, outcomes, report })
}
