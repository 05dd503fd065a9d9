use fracbellman::kernel::{
    check_bounds, check_membership, check_smoothness, default_drift_radii, drift_compensation, Ellipticity,
    KernelPreset, KernelSpec, SmoothnessLevel,
};

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn bounded(k: KernelSpec<f64>, lower: f64, upper: f64, beta: f64) -> KernelSpec<f64> {
    k.with_bounds(Ellipticity::new(lower, upper, beta).unwrap())
}

#[test]
fn bounds_examples() {
    let one = KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap();
    let r = check_bounds(&bounded(one.clone(), 1.0, 1.0, 0.0), 48).unwrap();
    assert!(r.passed);
    assert_eq!(r.margin, 0.0);

    let odd = KernelSpec::from_preset(1, 1.5, &KernelPreset::OddBump(0.5)).unwrap();
    assert!(check_bounds(&bounded(odd, 0.5, 1.5, 0.0), 48).unwrap().passed);

    let r = check_bounds(&bounded(one, 2.0, 3.0, 0.0), 48).unwrap();
    assert!(!r.passed);
    assert_eq!(r.margin, -1.0);
}

#[test]
fn bounds_are_monotone_in_the_interval() {
    let k = KernelSpec::from_preset(2, 1.5, &KernelPreset::Anisotropic(0.4)).unwrap();
    let tight = check_bounds(&bounded(k.clone(), 1.0, 1.4, 0.0), 48).unwrap();
    let wide = check_bounds(&bounded(k, 0.5, 2.0, 0.0), 48).unwrap();
    assert!(tight.passed && wide.passed);
    assert!(wide.margin >= tight.margin);
}

#[test]
fn invalid_kernel_values_are_reported() {
    let k = KernelSpec::new(1, 1.5, "neg", |y: &[f64; 2]| if y[0] > 10.0 { -1.0 } else { 1.0 }).unwrap();
    assert!(check_bounds(&k, 48).is_err());
}

#[test]
fn drift_compensation_of_even_kernels() {
    let radii = default_drift_radii::<f64>();
    for (n, preset) in [(1, KernelPreset::Const), (2, KernelPreset::Anisotropic(0.4))] {
        let k = KernelSpec::from_preset(n, 1.5, &preset).unwrap();
        assert!(drift_compensation(&k, &radii).unwrap() <= 1e-12);
        let shifted = k.with_drift([1.0, 0.0]);
        assert!((drift_compensation(&shifted, &radii).unwrap() - 1.0).abs() <= 1e-12);
    }
}

/// `(2-σ) ∫_{r<|y|<1} y K(y) |y|^{-1-σ} dy` for `K = 1 + ½ sign(y)`, by a
/// midpoint rule in `log ρ` with a million nodes per radius.
fn brute_odd_bump(sigma: f64, r: f64) -> f64 {
    let nodes = 1_000_000;
    let (a, b) = (r.ln(), 0.0);
    let dl = (b - a) / nodes as f64;
    let mut sum = 0.0;
    for i in 0..nodes {
        let rho = (a + (i as f64 + 0.5) * dl).exp();
        // y = ρ contributes ρ·1.5, y = -ρ contributes -ρ·0.5; dρ = ρ dl.
        sum += (1.5 - 0.5) * rho * rho.powf(-1.0 - sigma) * rho * dl;
    }
    (2.0 - sigma) * sum
}

#[test]
fn drift_compensation_of_the_odd_bump_matches_brute_force() {
    let radii = default_drift_radii::<f64>();
    let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::OddBump(0.5)).unwrap();
    let got = drift_compensation(&k, &radii).unwrap();
    let want = radii.iter().map(|&r| brute_odd_bump(1.5, r)).fold(0.0, f64::max);
    assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
}

#[test]
fn drift_compensation_is_linear_in_the_odd_part() {
    let radii = default_drift_radii::<f64>();
    let a = 0.3;
    let full = KernelSpec::from_preset(2, 1.5, &KernelPreset::SmoothOdd(a)).unwrap().with_drift([0.1, -0.2]);
    let f = KernelPreset::SmoothOdd(a).build::<f64>(2);
    let odd_only = KernelSpec::new(2, 1.5, "odd part", move |y: &[f64; 2]| 0.5 * (f(y) - f(&[-y[0], -y[1]])))
        .unwrap()
        .with_drift([0.1, -0.2]);
    let (x, y) = (drift_compensation(&full, &radii).unwrap(), drift_compensation(&odd_only, &radii).unwrap());
    assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
}

#[test]
fn compensation_as_beta_gives_membership() {
    for preset in [KernelPreset::SmoothOdd(0.2), KernelPreset::OddBump(0.3), KernelPreset::Const] {
        let k = KernelSpec::from_preset(1, 1.5, &preset).unwrap().with_drift([0.05, 0.0]);
        let beta = drift_compensation(&k, &default_drift_radii::<f64>()).unwrap();
        let (lo, hi) = preset.value_range();
        let k = bounded(k, lo, hi, beta);
        assert!(check_membership(&k).unwrap().drift_ok, "{preset}");
    }
}

#[test]
fn smoothness_examples() {
    let one = bounded(KernelSpec::from_preset(1, 1.5, &KernelPreset::Const).unwrap(), 1.0, 1.0, 0.0);
    for level in [SmoothnessLevel::L1, SmoothnessLevel::L2] {
        let r = check_smoothness(&one, level).unwrap();
        assert!(r.passed);
        assert!(r.peak.abs() <= 1e-12);
    }

    let wavy = KernelSpec::new(1, 1.5, "wavy", |y: &[f64; 2]| 1.0 + 0.5 * y[0].abs().ln().sin()).unwrap();
    let wavy = bounded(wavy, 0.5, 1.5, 0.0);
    let r = check_smoothness(&wavy, SmoothnessLevel::L1).unwrap();
    assert!(r.passed);
    assert!(r.peak <= 0.5 * 1.01);
    assert!(check_smoothness(&wavy, SmoothnessLevel::L2).unwrap().passed);

    let step = KernelSpec::new(1, 1.5, "step", |y: &[f64; 2]| 1.0 + 0.5 * sign(y[0])).unwrap();
    let step = bounded(step, 0.5, 1.5, 0.0);
    assert!(check_bounds(&step, 48).unwrap().passed);
    // In 1D the jump sits at the excluded origin, so no sample sees it.
    assert!(check_smoothness(&step, SmoothnessLevel::L1).unwrap().passed);
}

#[test]
fn odd_bump_fails_smoothness_in_2d() {
    let k = bounded(KernelSpec::from_preset(2, 1.5, &KernelPreset::OddBump(0.5)).unwrap(), 0.5, 1.5, 0.0);
    assert!(!check_smoothness(&k, SmoothnessLevel::L1).unwrap().passed);
}
