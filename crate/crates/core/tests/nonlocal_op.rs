mod common;

use fracbellman::field::{DataFn, Exterior, Grid, SpaceTimeField};
use fracbellman::kernel::{Ellipticity, KernelPreset, KernelSpec, OperatorFamily};
use fracbellman::nonlocal::{
    adjoint_pair, bellman, check_concavity_translation_homogeneity, check_integration_by_parts,
    check_uniform_ellipticity, delta_u, evaluate_linear, pucci_extremal, DiscreteFamily, Extremal, Mollifier,
    QuadratureConfig, QuadratureRule,
};
use fracbellman::presets::FieldPreset;
use fracbellman::solver::fractional_symbol;

fn cfg() -> QuadratureConfig<f64> {
    QuadratureConfig::default()
}

fn linear(grid: Grid<f64>, sigma: f64, a: [f64; 2]) -> SpaceTimeField<f64> {
    SpaceTimeField::from_global_fn(grid, sigma, &[0.0], "linear", (a[0].hypot(a[1]), 1.0), move |x, _| {
        a[0] * x[0] + a[1] * x[1]
    })
    .unwrap()
}

fn cosine(grid: Grid<f64>, sigma: f64) -> SpaceTimeField<f64> {
    let g = DataFn::from_fn("cos", |x: &[f64; 2], _| x[0].cos());
    SpaceTimeField::from_fn(grid, sigma, &[0.0], Exterior::Bounded { g, bound: 1.0 }, |x, _| x[0].cos()).unwrap()
}

fn preset(grid: &Grid<f64>, sigma: f64, p: FieldPreset) -> SpaceTimeField<f64> {
    let n = grid.dim();
    SpaceTimeField::from_fn(grid.clone(), sigma, &[0.0], Exterior::Zero, move |x, _| p.eval(x, n)).unwrap()
}

fn bump(a: f64, c: f64, r: f64) -> FieldPreset {
    FieldPreset::Bump { amplitude: a, center: c, radius: r }
}

fn interior(grid: &Grid<f64>, depth: usize, stride: usize) -> Vec<usize> {
    (0..grid.len()).filter(|&i| grid.depth(i) >= depth).step_by(stride).collect()
}

#[test]
fn delta_u_examples() {
    let g = Grid::new(1, 2.0, 1.0 / 16.0).unwrap();
    let c = SpaceTimeField::from_fn(g.clone(), 1.5, &[0.0], Exterior::Constant(2.0), |_, _| 2.0).unwrap();
    for y in [0.25, -0.75, 1.5, 5.0] {
        assert_eq!(delta_u(&c, &[0.0, 0.0], 0.0, &[y, 0.0]).unwrap(), 0.0);
    }
    let l = linear(g.clone(), 1.5, [0.7, 0.0]);
    for y in [0.25, -0.5, 0.9375] {
        assert!(delta_u(&l, &[0.25, 0.0], 0.0, &[y, 0.0]).unwrap().abs() <= 1e-12);
    }
    for y in [1.0, -1.5, 3.0] {
        assert!((delta_u(&l, &[0.25, 0.0], 0.0, &[y, 0.0]).unwrap() - 0.7 * y).abs() <= 1e-12);
    }
    let q = SpaceTimeField::from_fn(g, 1.5, &[0.0], Exterior::Zero, |x, _| x[0] * x[0]).unwrap();
    assert!((delta_u(&q, &[0.0, 0.0], 0.0, &[0.5, 0.0]).unwrap() - 0.25).abs() <= 1e-12);
}

#[test]
fn symmetric_pairs_cancel_the_gradient() {
    let g = Grid::new(2, 2.0, 1.0 / 8.0).unwrap();
    let u = preset(&g, 1.5, FieldPreset::Gaussian { amplitude: 1.0, center: 0.2, width: 0.6 });
    let tilted = SpaceTimeField::combine(1.0, &u, 1.0, &linear(g.clone(), 1.5, [0.3, -1.1])).unwrap();
    let x = [0.125, -0.25];
    for y in [[0.25, 0.0], [0.125, 0.375], [-0.5, 0.25]] {
        let neg = [-y[0], -y[1]];
        let a = delta_u(&u, &x, 0.0, &y).unwrap() + delta_u(&u, &x, 0.0, &neg).unwrap();
        let b = delta_u(&tilted, &x, 0.0, &y).unwrap() + delta_u(&tilted, &x, 0.0, &neg).unwrap();
        assert!((a - b).abs() <= 1e-13, "{a} vs {b}");
    }
}

#[test]
fn quadrature_weights_are_nonnegative_and_carry_the_mass() {
    for (n, sigma) in [(1, 1.0), (1, 1.5), (1, 1.99), (2, 1.25), (2, 1.75)] {
        let g = Grid::new(n, 2.0, 1.0 / 16.0).unwrap();
        let q = QuadratureRule::base(&g, sigma, &cfg()).unwrap();
        assert!(q.pairs().iter().all(|p| p.plus >= 0.0 && p.minus >= 0.0));
        assert!(q.shells().iter().all(|p| p.plus >= 0.0 && p.minus >= 0.0));
        assert!(q.cell0().iter().all(|c| *c >= 0.0));
        let (m, a) = (q.zeroth_mass(), q.analytic_mass());
        assert!((m - a).abs() <= 0.01 * a, "n={n} sigma={sigma}: {m} vs {a}");
    }
}

#[test]
fn linear_operator_examples() {
    let g = Grid::new(1, 2.0, 1.0 / 32.0).unwrap();
    let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap();
    let q = QuadratureRule::for_kernel(&g, &k, &cfg()).unwrap();
    let c = SpaceTimeField::from_fn(g.clone(), 1.5, &[0.0], Exterior::Constant(3.0), |_, _| 3.0).unwrap();
    assert!(evaluate_linear(&k, &c, &[0.25, 0.0], 0.0, &q).unwrap().value.abs() <= 1e-10);

    for b in [0.0, 0.4, -0.8] {
        let kb = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap().with_drift([b, 0.0]);
        let qb = QuadratureRule::for_kernel(&g, &kb, &cfg()).unwrap();
        let l = linear(g.clone(), 1.5, [0.7, 0.0]);
        let v = evaluate_linear(&kb, &l, &[0.5, 0.0], 0.0, &qb).unwrap().value;
        assert!((v - 0.7 * b).abs() <= 1e-10, "b={b}: {v}");
    }

    let g2 = Grid::new(2, 2.0, 1.0 / 8.0).unwrap();
    let ka = KernelSpec::from_preset(2, 1.5, &KernelPreset::Anisotropic(0.4)).unwrap().with_drift([0.2, -0.3]);
    let qa = QuadratureRule::for_kernel(&g2, &ka, &cfg()).unwrap();
    let l = linear(g2.clone(), 1.5, [0.5, 1.0]);
    let v = evaluate_linear(&ka, &l, &[0.25, -0.25], 0.0, &qa).unwrap().value;
    assert!((v - (0.2 * 0.5 - 0.3)).abs() <= 1e-10, "{v}");
}

#[test]
fn cosine_matches_the_brute_force_symbol() {
    let mu = common::brute_mu(1.5);
    assert!(
        (fractional_symbol(1.5, 1.0).unwrap() - mu).abs() <= 1e-6 * mu,
        "{} vs {mu}",
        fractional_symbol(1.5, 1.0).unwrap()
    );
    let g = Grid::new(1, 2.0, 1.0 / 64.0).unwrap();
    let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap();
    let q = QuadratureRule::for_kernel(&g, &k, &cfg()).unwrap();
    let v = evaluate_linear(&k, &cosine(g.clone(), 1.5), &[0.0, 0.0], 0.0, &q).unwrap().value;
    assert!((v + mu).abs() <= 0.01 * mu, "{v} vs {}", -mu);

    let bounds = Ellipticity::new(1.0, 2.0, 0.0).unwrap();
    let qb = QuadratureRule::base(&g, 1.5, &cfg()).unwrap();
    let u = cosine(g, 1.5);
    let plus = pucci_extremal(Extremal::Plus, &bounds, &u, &[0.0, 0.0], 0.0, &qb).unwrap().value;
    let minus = pucci_extremal(Extremal::Minus, &bounds, &u, &[0.0, 0.0], 0.0, &qb).unwrap().value;
    assert!((plus + mu).abs() <= 0.01 * mu, "{plus}");
    assert!((minus + 2.0 * mu).abs() <= 0.02 * mu, "{minus}");
}

#[test]
fn pucci_zero_and_duality() {
    let g = Grid::new(2, 2.0, 1.0 / 8.0).unwrap();
    let bounds = Ellipticity::new(0.5, 1.5, 0.5).unwrap();
    let q = QuadratureRule::base(&g, 1.25, &cfg()).unwrap();
    let zero = preset(&g, 1.25, FieldPreset::Zero);
    let u = preset(&g, 1.25, bump(1.0, 0.3, 1.2));
    let neg = u.scaled(-1.0);
    for i in interior(&g, 2, 7) {
        let x = g.point(i);
        for s in [Extremal::Plus, Extremal::Minus] {
            assert_eq!(pucci_extremal(s, &bounds, &zero, &x, 0.0, &q).unwrap().value, 0.0);
        }
        let p = pucci_extremal(Extremal::Plus, &bounds, &neg, &x, 0.0, &q).unwrap().value;
        let m = pucci_extremal(Extremal::Minus, &bounds, &u, &x, 0.0, &q).unwrap().value;
        assert_eq!(p, -m);
    }
}

#[test]
fn symmetric_operator_stays_finite_as_the_order_approaches_two() {
    let g = Grid::periodic(1, std::f64::consts::PI, std::f64::consts::PI / 64.0).unwrap();
    let vals: Vec<f64> = [1.99, 1.999]
        .iter()
        .map(|&s| {
            let k = KernelSpec::from_preset(1, s, &KernelPreset::Const).unwrap();
            let q = QuadratureRule::for_kernel(&g, &k, &cfg()).unwrap();
            let u = SpaceTimeField::from_fn(g.clone(), s, &[0.0], Exterior::Zero, |x, _| x[0].cos()).unwrap();
            evaluate_linear(&k, &u, &[0.0, 0.0], 0.0, &q).unwrap().value
        })
        .collect();
    assert!(vals.iter().all(|v| v.is_finite() && *v < 0.0));
    assert!((vals[0] / vals[1] - 1.0).abs() < 0.02, "{vals:?}");
}

fn finite_family(n: usize, sigma: f64) -> OperatorFamily<f64> {
    let b = Ellipticity::new(0.5, 1.5, 0.5).unwrap();
    let members = [KernelPreset::SmoothOdd(0.15), KernelPreset::SmoothOdd(-0.15), KernelPreset::Anisotropic(0.4)]
        .iter()
        .map(|p| KernelSpec::from_preset(n, sigma, p).unwrap().with_bounds(b))
        .collect();
    OperatorFamily::finite(members).unwrap()
}

#[test]
fn bellman_examples() {
    let g = Grid::new(1, 2.0, 1.0 / 16.0).unwrap();
    let b = Ellipticity::new(1.0, 1.0, 1.0).unwrap();
    let k0 = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap().with_bounds(b);
    let k1 = k0.clone().with_drift([1.0, 0.0]);

    let single = DiscreteFamily::new(OperatorFamily::finite(vec![k1.clone()]).unwrap(), &g, &cfg()).unwrap();
    let u = preset(&g, 1.5, bump(1.0, 0.25, 1.0));
    let q = QuadratureRule::for_kernel(&g, &k1, &cfg()).unwrap();
    for i in interior(&g, 2, 5) {
        let x = g.point(i);
        let e = bellman(&single, &u, &x, 0.0).unwrap();
        assert_eq!(e.value, evaluate_linear(&k1, &u, &x, 0.0, &q).unwrap().value);
        assert_eq!(e.argmin, Some(0));
    }

    let pair = DiscreteFamily::new(OperatorFamily::finite(vec![k0, k1]).unwrap(), &g, &cfg()).unwrap();
    for a in [0.7, -0.7] {
        let l = linear(g.clone(), 1.5, [a, 0.0]);
        let v = bellman(&pair, &l, &[0.25, 0.0], 0.0).unwrap().value;
        assert!((v - a.min(0.0)).abs() <= 1e-10, "a={a}: {v}");
    }
}

#[test]
fn bellman_is_superadditive() {
    let g = Grid::new(2, 2.0, 1.0 / 8.0).unwrap();
    let fam = DiscreteFamily::new(finite_family(2, 1.5), &g, &cfg()).unwrap();
    let pairs = [
        (bump(1.0, 0.2, 1.0), FieldPreset::Gaussian { amplitude: -0.7, center: -0.3, width: 0.5 }),
        (bump(-0.5, -0.4, 1.3), bump(0.9, 0.5, 0.8)),
    ];
    let mut checked = 0;
    for (a, b) in pairs {
        let u = preset(&g, 1.5, a);
        let v = preset(&g, 1.5, b);
        let w = SpaceTimeField::combine(1.0, &u, 1.0, &v).unwrap();
        for i in interior(&g, 3, 5).into_iter().take(50) {
            let x = g.point(i);
            let lhs = bellman(&fam, &w, &x, 0.0).unwrap().value;
            let rhs = bellman(&fam, &u, &x, 0.0).unwrap().value + bellman(&fam, &v, &x, 0.0).unwrap().value;
            assert!(lhs >= rhs - 1e-10 * (1.0 + lhs.abs()), "{lhs} < {rhs}");
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn adjoint_examples() {
    let even = KernelSpec::from_preset(2, 1.5, &KernelPreset::Anisotropic(0.4)).unwrap();
    let odd = KernelSpec::from_preset(1, 1.5, &KernelPreset::OddBump(0.5)).unwrap().with_drift([1.0, 0.0]);
    let (ae, ao) = (adjoint_pair(&even), adjoint_pair(&odd));
    for y in [[0.3, 0.1], [-0.7, 0.4], [2.0, -1.0]] {
        assert_eq!(ae.eval(&y), even.eval(&y));
    }
    assert_eq!(ae.drift(), [0.0, 0.0]);
    assert_eq!(ao.eval(&[0.5, 0.0]), 0.5);
    assert_eq!(ao.eval(&[-0.5, 0.0]), 1.5);
    assert_eq!(ao.drift(), [-1.0, 0.0]);
}

#[test]
fn integration_by_parts() {
    let g = Grid::new(1, 2.0, 1.0 / 32.0).unwrap();
    let even = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap();
    let v = preset(&g, 1.5, bump(1.0, 0.0, 0.75));
    let r = check_integration_by_parts(&even, &v, &v, 0.0, &cfg()).unwrap();
    assert!(r.residual <= 1e-12 * r.scale.max(1.0));

    let zero = preset(&g, 1.5, FieldPreset::Zero);
    assert_eq!(check_integration_by_parts(&even, &v, &zero, 0.0, &cfg()).unwrap().residual, 0.0);

    let odd = KernelSpec::from_preset(1, 1.5, &KernelPreset::SmoothOdd(0.5)).unwrap().with_drift([0.3, 0.0]);
    let w = preset(&g, 1.5, bump(1.0, 0.4, 0.75));
    let r = check_integration_by_parts(&odd, &v, &w, 0.0, &cfg()).unwrap();
    assert!(r.lhs.abs() > 1e-3);
    assert!(r.residual <= 1e-3 * r.scale, "{r:?}");

    let wide = SpaceTimeField::from_fn(g, 1.5, &[0.0], Exterior::Constant(1.0), |_, _| 1.0).unwrap();
    assert!(check_integration_by_parts(&odd, &v, &wide, 0.0, &cfg()).is_err());
}

#[test]
fn homogeneity_concavity_translation() {
    let g = Grid::new(1, 2.0, 1.0 / 32.0).unwrap();
    let bounds = Ellipticity::new(1.0, 2.0, 0.5).unwrap();
    let q = QuadratureRule::base(&g, 1.5, &cfg()).unwrap();
    let u = preset(&g, 1.5, bump(1.0, 0.2, 1.2));
    let pts = interior(&g, 4, 3);
    let tent = Mollifier::tent(1, 2);
    for alpha in [0.0, 2.0] {
        let r = check_concavity_translation_homogeneity(&bounds, &u, 0.0, &q, &tent, alpha, [1.0, 0.0], &pts).unwrap();
        assert!(r.homogeneity_error <= 1e-12 * r.scale.max(1.0), "{r:?}");
        assert!(r.concavity_violation <= 1e-6 * r.scale, "{r:?}");
        assert!(r.translation_violation <= 1e-6 * r.scale, "{r:?}");
    }
    let doubled = u.scaled(2.0);
    for &i in &pts {
        let x = g.point(i);
        for s in [Extremal::Plus, Extremal::Minus] {
            let a = pucci_extremal(s, &bounds, &doubled, &x, 0.0, &q).unwrap().value;
            let b = pucci_extremal(s, &bounds, &u, &x, 0.0, &q).unwrap().value;
            assert_eq!(a, 2.0 * b);
        }
    }
    assert!(Mollifier::new(vec![[0, 0], [1, 0]], vec![1.5, -0.5]).is_err());
}

#[test]
fn uniform_ellipticity_sandwich() {
    let g = Grid::new(2, 2.0, 1.0 / 8.0).unwrap();
    let fam = DiscreteFamily::new(finite_family(2, 1.75), &g, &cfg()).unwrap();
    let u = preset(&g, 1.75, bump(1.0, 0.25, 1.25));
    let v = preset(&g, 1.75, FieldPreset::Gaussian { amplitude: 0.8, center: -0.2, width: 0.6 });
    let r = check_uniform_ellipticity(&fam, &u, &v, 0.0, &interior(&g, 3, 1)).unwrap();
    assert!(r.points > 100);
    assert!(r.lower_violation <= 1e-8 * r.scale && r.upper_violation <= 1e-8 * r.scale, "{r:?}");
}
