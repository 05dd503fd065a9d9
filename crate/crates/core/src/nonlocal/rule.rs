//! Singular quadrature for `(2-σ) ∫ δu(x;y) K(y) |y|^{-n-σ} dy`.
//!
//! The offset space is split into three parts.
//!
//! * **Cell 0**, `[-h/2, h/2]^n`. Here `δu ≈ ½ yᵀD²u y` and the integral
//!   becomes `Σ_i C0_i ∂_ii u` with `C0_i = ∫ ½ y_i² K ν`. The second
//!   derivatives are discrete pure second differences, so the weights are
//!   positive. The radial singularity is removed by `s = r^{2-σ}`.
//! * **Lattice cells** `k h + [-h/2, h/2]^n`, `0 < |k|_∞ ≤ M`. Each cell is
//!   collapsed onto its centre. Cells with centre inside `B_1` get the weight
//!   `∫_cell K ν |y|² / |kh|²`, matching the second moment, which makes the
//!   rule exact for quadratics in 1D; cells outside get `∫_cell K ν`.
//! * **Shells** beyond the lattice square out to `R_tail`, on log-spaced
//!   radial panels along fixed directions. They sample `u` by interpolation
//!   or exterior data.
//!
//! Weights at `y` and `-y` are computed from exactly negated points, so even
//! kernels give bitwise symmetric pairs. The gradient part of `δu` is
//! collected into a first moment `g = Σ_{|y|<1} w y` that shifts the drift.
//!
//! On the torus the lattice is folded modulo the period. Offsets in the same
//! residue class see identical values, so this is exact also for the
//! pointwise extremal selections.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Grid, R_TAIL};
use crate::kernel::KernelSpec;
use crate::quadrature::{
    gauss_legendre, geometric_panels, half_sphere_uniform, mapped_rule, octant_rule, square_exit_radius,
};
use crate::scalar::{lit, norm, Real};

/// Tunable resolution of a [`QuadratureRule`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig<T> {
    /// Half-width of the lattice square; defaults to the grid half-width.
    pub r_mid: Option<T>,
    /// Shells stop here; the remainder is reported as a bound.
    pub r_tail: T,
    /// Shell directions over the full circle (2D).
    pub angular_nodes: usize,
    /// Radial panels per decade on the shells.
    pub per_decade: usize,
    /// Gauss–Legendre nodes per radial panel.
    pub radial_order: usize,
    /// Lattice half-width in periods for 2D tori.
    pub torus_periods: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self { r_mid: None, r_tail: lit(R_TAIL), angular_nodes: 64, per_decade: 8, radial_order: 4, torus_periods: 2 }
    }
}

/// Symmetric pair of lattice nodes `x ± off·h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticePair<T> {
    pub off: [isize; 2],
    pub plus: T,
    pub minus: T,
}

/// Symmetric pair of shell nodes `x ± y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellPair<T> {
    pub y: [T; 2],
    pub plus: T,
    pub minus: T,
}

/// Precomputed weights for one kernel on one grid geometry.
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    dim: usize,
    sigma: T,
    spacing: T,
    periodic: bool,
    per_axis: usize,
    lattice_half: usize,
    r_tail: T,
    cell0: [T; 2],
    pairs: Vec<LatticePair<T>>,
    shells: Vec<ShellPair<T>>,
    first_moment: [T; 2],
    zeroth_mass: T,
    kernel_upper: T,
}

struct CellMoments<T> {
    zeroth: [T; 2],
    second: [T; 2],
}

impl<T: Real> QuadratureRule<T> {
    /// Rule for the constant kernel `K ≡ 1`.
    pub fn base(grid: &Grid<T>, sigma: T, cfg: &QuadratureConfig<T>) -> Result<Self> {
        let k = KernelSpec::new(grid.dim(), sigma, "const", |_y: &[T; 2]| T::one())?;
        Self::for_kernel(grid, &k, cfg)
    }

    pub fn for_kernel(grid: &Grid<T>, k: &KernelSpec<T>, cfg: &QuadratureConfig<T>) -> Result<Self> {
        if k.dim() != grid.dim() {
            return Err(Error::Domain(format!(
                "kernel dimension {} does not match grid dimension {}",
                k.dim(),
                grid.dim()
            )));
        }
        if !(cfg.r_tail > T::zero()) || cfg.per_decade == 0 || cfg.radial_order == 0 {
            return Err(Error::Domain("quadrature configuration needs r_tail > 0 and nonzero resolutions".into()));
        }
        let dim = grid.dim();
        let sigma = k.sigma();
        let h = grid.spacing();
        let kernel = |y: &[T; 2]| k.eval(y);
        let n_axis = grid.per_axis();
        let lattice_half = if grid.is_periodic() {
            if dim == 1 {
                (cfg.r_tail / h).ceil().to_usize().unwrap_or(1)
            } else {
                cfg.torus_periods.max(1) * n_axis
            }
        } else {
            let r_mid = cfg.r_mid.unwrap_or(grid.half_width());
            (r_mid / h).round().to_usize().unwrap_or(1).max(1)
        };
        let m = lattice_half as isize;

        // Half lattice: first nonzero coordinate positive.
        let half: Vec<[isize; 2]> = if dim == 1 {
            (1..=m).map(|i| [i, 0]).collect()
        } else {
            let mut v: Vec<[isize; 2]> = (1..=m).map(|j| [0, j]).collect();
            for i in 1..=m {
                for j in -m..=m {
                    v.push([i, j]);
                }
            }
            v
        };
        let two_minus: T = lit::<T>(2.0) - sigma;
        let results: Vec<(CellMoments<T>, [T; 2])> = half
            .par_iter()
            .map(|&off| {
                let c = [h * lit(off[0] as f64), h * lit(off[1] as f64)];
                (cell_moments(dim, off, c, h, sigma, &kernel), c)
            })
            .collect();

        let mut first_moment = [T::zero(); 2];
        let mut zeroth_mass = T::zero();
        let mut raw: Vec<LatticePair<T>> = Vec::with_capacity(half.len());
        for (&off, (mom, c)) in half.iter().zip(&results) {
            let r = norm(c, dim);
            let (plus, minus) = if r < T::one() {
                let r2 = r * r;
                (mom.second[0] / r2, mom.second[1] / r2)
            } else {
                (mom.zeroth[0], mom.zeroth[1])
            };
            if r < T::one() {
                first_moment[0] = first_moment[0] + (plus - minus) * c[0];
                first_moment[1] = first_moment[1] + (plus - minus) * c[1];
            }
            zeroth_mass = zeroth_mass + mom.zeroth[0] + mom.zeroth[1];
            raw.push(LatticePair { off, plus, minus });
        }
        let pairs = if grid.is_periodic() { fold(dim, n_axis, &raw) } else { raw };

        let mut shells = Vec::new();
        if !(grid.is_periodic() && dim == 1) {
            let a = h * (lit::<T>(lattice_half as f64) + lit(0.5));
            let radial = gauss_legendre(cfg.radial_order);
            for (theta, dtheta) in half_sphere_uniform::<T>(dim, cfg.angular_nodes) {
                let start = square_exit_radius(a, &theta, dim);
                for (lo, hi) in geometric_panels(start, cfg.r_tail, cfg.per_decade) {
                    for (tau, w) in mapped_rule(&radial, lo.ln(), hi.ln()) {
                        let r = tau.exp();
                        let y = [theta[0] * r, theta[1] * r];
                        let base = two_minus * r.powf(-sigma) * w * dtheta;
                        let plus = base * kernel(&y);
                        let minus = base * kernel(&[-y[0], -y[1]]);
                        if r < T::one() {
                            first_moment[0] = first_moment[0] + (plus - minus) * y[0];
                            first_moment[1] = first_moment[1] + (plus - minus) * y[1];
                        }
                        zeroth_mass = zeroth_mass + plus + minus;
                        shells.push(ShellPair { y, plus, minus });
                    }
                }
            }
        }

        let cell0 = inner_cell(dim, h, sigma, &kernel);
        let rule = Self {
            dim,
            sigma,
            spacing: h,
            periodic: grid.is_periodic(),
            per_axis: n_axis,
            lattice_half,
            r_tail: cfg.r_tail,
            cell0,
            pairs,
            shells,
            first_moment,
            zeroth_mass,
            kernel_upper: far_upper(k, cfg.r_tail),
        };
        rule.validate()?;
        Ok(rule)
    }

    fn validate(&self) -> Result<()> {
        let bad = |w: T| !(w >= T::zero()) || !w.is_finite();
        let neg_pair = self.pairs.iter().find(|p| bad(p.plus) || bad(p.minus));
        let neg_shell = self.shells.iter().find(|p| bad(p.plus) || bad(p.minus));
        if neg_pair.is_some() || neg_shell.is_some() || self.cell0.iter().any(|&c| bad(c)) {
            return Err(Error::InvalidKernel {
                point: neg_pair.map(|p| p.off.iter().map(|&o| o as f64).collect()).unwrap_or_default(),
                value: f64::NAN,
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn lattice_half(&self) -> usize {
        self.lattice_half
    }

    pub fn r_tail(&self) -> T {
        self.r_tail
    }

    /// `C0_i = ∫_{cell 0} ½ y_i² K ν`.
    pub fn cell0(&self) -> [T; 2] {
        self.cell0
    }

    pub fn pairs(&self) -> &[LatticePair<T>] {
        &self.pairs
    }

    pub fn shells(&self) -> &[ShellPair<T>] {
        &self.shells
    }

    /// `g = Σ_{|y|<1} w(y) y`, the gradient compensation carried by the rule.
    pub fn first_moment(&self) -> [T; 2] {
        self.first_moment
    }

    /// Upper kernel bound beyond `R_tail`, used for the truncation estimate.
    /// Zero for kernels that vanish there (compactly supported kernels).
    pub fn kernel_upper(&self) -> T {
        self.kernel_upper
    }

    /// `Σ ∫_cell K ν` over lattice cells plus the shell weights.
    pub fn zeroth_mass(&self) -> T {
        self.zeroth_mass
    }

    /// `(2-σ) ∫ |y|^{-n-σ}` over the covered region (outside cell 0, inside `|y| < R_tail`).
    pub fn analytic_mass(&self) -> T {
        let s = self.sigma;
        let two_minus = lit::<T>(2.0) - s;
        let half_h = self.spacing * lit(0.5);
        let rt = self.r_tail.powf(-s);
        if self.dim == 1 {
            let far = if self.periodic {
                (self.spacing * (lit::<T>(self.lattice_half as f64) + lit(0.5))).powf(-s)
            } else {
                rt
            };
            return lit::<T>(2.0) * two_minus / s * (half_h.powf(-s) - far);
        }
        octant_rule::<T>(24)
            .iter()
            .map(|(th, w)| *w * two_minus / s * (square_exit_radius(half_h, th, 2).powf(-s) - rt))
            .sum()
    }

    /// Sum of all off-centre coefficients of the diffusion part (no drift).
    pub fn diffusion_row_sum(&self) -> T {
        let h2 = self.spacing * self.spacing;
        let lattice: T = self.pairs.iter().map(|p| p.plus + p.minus).sum();
        let shells: T = self.shells.iter().map(|p| p.plus + p.minus).sum();
        let inner: T = self.cell0[..self.dim].iter().map(|&c| lit::<T>(2.0) * c / h2).sum();
        lattice + shells + inner
    }

    /// Checks that the rule was built for this grid geometry.
    pub fn ensure_compatible(&self, grid: &Grid<T>) -> Result<()> {
        let ok = grid.dim() == self.dim
            && grid.is_periodic() == self.periodic
            && (grid.spacing() - self.spacing).abs() <= self.spacing * lit(1e-12)
            && (!self.periodic || grid.per_axis() == self.per_axis);
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("quadrature rule was built for a different grid".into()))
        }
    }
}

/// `Λ`, or 0 when `K` vanishes at every sample beyond `r_tail`.
fn far_upper<T: Real>(k: &KernelSpec<T>, r_tail: T) -> T {
    let dirs = half_sphere_uniform::<T>(k.dim(), 32);
    let vanishes = (0..16).all(|j| {
        let r = r_tail * lit::<T>(10f64.powf(j as f64 / 15.0));
        dirs.iter()
            .all(|(d, _)| k.eval(&[r * d[0], r * d[1]]) == T::zero() && k.eval(&[-r * d[0], -r * d[1]]) == T::zero())
    });
    if vanishes {
        T::zero()
    } else {
        k.bounds().upper
    }
}

/// Moments of `K ν` over the cell at `c` (index 0) and its mirror (index 1).
fn cell_moments<T: Real>(
    dim: usize,
    off: [isize; 2],
    c: [T; 2],
    h: T,
    sigma: T,
    kernel: &(dyn Fn(&[T; 2]) -> T + Sync),
) -> CellMoments<T> {
    let kmax = off[0].abs().max(off[1].abs());
    let (sub, order) = if dim == 1 {
        (if kmax <= 3 { 4 } else { 1 }, 4)
    } else if kmax <= 3 {
        (4, 3)
    } else if off[0] == 0 || off[1] == 0 {
        (2, 3)
    } else {
        (1, 3)
    };
    let gl = gauss_legendre(order);
    let two_minus = lit::<T>(2.0) - sigma;
    let exponent = -(lit::<T>(dim as f64) + sigma);
    let sub_h = h / lit(sub as f64);
    let lo = [c[0] - h * lit(0.5), c[1] - h * lit(0.5)];
    let mut zeroth = [T::zero(); 2];
    let mut second = [T::zero(); 2];
    let mut add = |y: [T; 2], w: T| {
        let r = norm(&y, dim);
        let nu = two_minus * r.powf(exponent) * w;
        let kp = kernel(&y);
        let km = kernel(&[-y[0], -y[1]]);
        zeroth[0] = zeroth[0] + kp * nu;
        zeroth[1] = zeroth[1] + km * nu;
        second[0] = second[0] + kp * nu * r * r;
        second[1] = second[1] + km * nu * r * r;
    };
    let nodes_1d = |start: T| -> Vec<(T, T)> {
        let mut out = Vec::with_capacity(sub * gl.len());
        for s in 0..sub {
            let a = start + sub_h * lit(s as f64);
            out.extend(mapped_rule(&gl, a, a + sub_h));
        }
        out
    };
    let xs = nodes_1d(lo[0]);
    if dim == 1 {
        for (x, w) in xs {
            add([x, T::zero()], w);
        }
    } else {
        let ys = nodes_1d(lo[1]);
        for &(x, wx) in &xs {
            for &(y, wy) in &ys {
                add([x, y], wx * wy);
            }
        }
    }
    CellMoments { zeroth, second }
}

/// `C0_i = ½ ∫_{cell 0} y_i² K(y) (2-σ)|y|^{-n-σ} dy` in polar form with `s = r^{2-σ}`.
fn inner_cell<T: Real>(dim: usize, h: T, sigma: T, kernel: &dyn Fn(&[T; 2]) -> T) -> [T; 2] {
    let gl = gauss_legendre(8);
    let p = T::one() / (lit::<T>(2.0) - sigma);
    let half_h = h * lit(0.5);
    let radial = |theta: [T; 2], rho: T| -> T {
        let top = rho.powf(lit::<T>(2.0) - sigma);
        let mut acc = T::zero();
        for panel in 0..2 {
            let a = top * lit(panel as f64 * 0.5);
            for (s, w) in mapped_rule(&gl, a, a + top * lit(0.5)) {
                let r = s.powf(p);
                acc = acc + w * kernel(&[theta[0] * r, theta[1] * r]);
            }
        }
        acc
    };
    if dim == 1 {
        let v = lit::<T>(0.5) * (radial([T::one(), T::zero()], half_h) + radial([-T::one(), T::zero()], half_h));
        return [v, T::zero()];
    }
    let mut c = [T::zero(); 2];
    for (theta, w) in octant_rule::<T>(8) {
        let rho = square_exit_radius(half_h, &theta, 2);
        let f = radial(theta, rho) * w * lit(0.5);
        c[0] = c[0] + f * theta[0] * theta[0];
        c[1] = c[1] + f * theta[1] * theta[1];
    }
    c
}

/// Folds lattice weights by residue modulo the period and re-pairs residues with their negatives.
fn fold<T: Real>(dim: usize, n: usize, raw: &[LatticePair<T>]) -> Vec<LatticePair<T>> {
    let ni = n as isize;
    let cells = if dim == 1 { n } else { n * n };
    let index = |o: [isize; 2]| -> usize {
        let a = o[0].rem_euclid(ni) as usize;
        if dim == 1 {
            a
        } else {
            a + n * o[1].rem_euclid(ni) as usize
        }
    };
    let mut acc = vec![T::zero(); cells];
    for p in raw {
        acc[index(p.off)] = acc[index(p.off)] + p.plus;
        acc[index([-p.off[0], -p.off[1]])] = acc[index([-p.off[0], -p.off[1]])] + p.minus;
    }
    // Representatives in (-n/2, n/2].
    let centred = |j: usize| -> isize {
        let j = j as isize;
        if j > ni / 2 {
            j - ni
        } else {
            j
        }
    };
    let mut seen = vec![false; cells];
    seen[0] = true;
    let mut out = Vec::new();
    for j in 0..cells {
        if seen[j] {
            continue;
        }
        let off = if dim == 1 { [centred(j), 0] } else { [centred(j % n), centred(j / n)] };
        let mirror = index([-off[0], -off[1]]);
        seen[j] = true;
        seen[mirror] = true;
        let (plus, minus) = if mirror == j {
            let half = acc[j] * lit(0.5);
            (half, half)
        } else {
            (acc[j], acc[mirror])
        };
        if plus > T::zero() || minus > T::zero() {
            out.push(LatticePair { off, plus, minus });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelPreset;
    use approx::assert_relative_eq;

    #[test]
    fn inner_cell_matches_closed_form_for_constant_kernel() {
        let g = Grid::new(1, 2.0_f64, 1.0 / 64.0).unwrap();
        for sigma in [1.0, 1.5, 1.99] {
            let q = QuadratureRule::base(&g, sigma, &QuadratureConfig::default()).unwrap();
            assert_relative_eq!(q.cell0()[0], (1.0_f64 / 128.0).powf(2.0 - sigma), max_relative = 1e-12);
        }
    }

    #[test]
    fn even_kernels_give_bitwise_symmetric_pairs() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 1.0_f64, 1.0 / 8.0).unwrap();
            let k = KernelSpec::from_preset(dim, 1.5, &KernelPreset::Anisotropic(0.5)).unwrap();
            let q = QuadratureRule::for_kernel(&g, &k, &QuadratureConfig::default()).unwrap();
            assert!(q.pairs().iter().all(|p| p.plus == p.minus));
            assert!(q.shells().iter().all(|p| p.plus == p.minus));
            assert_eq!(q.first_moment(), [0.0, 0.0]);
        }
    }

    #[test]
    fn mass_matches_analytic_measure() {
        for (dim, h) in [(1, 1.0 / 64.0), (2, 1.0 / 16.0)] {
            let g = Grid::new(dim, 2.0_f64, h).unwrap();
            for sigma in [1.0, 1.5, 1.9] {
                let q = QuadratureRule::base(&g, sigma, &QuadratureConfig::default()).unwrap();
                assert_relative_eq!(q.zeroth_mass(), q.analytic_mass(), max_relative = 1e-2);
            }
        }
        let g = Grid::periodic(1, std::f64::consts::PI, std::f64::consts::PI / 128.0).unwrap();
        let q = QuadratureRule::base(&g, 1.5, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(q.zeroth_mass(), q.analytic_mass(), max_relative = 1e-2);
    }

    #[test]
    fn folding_preserves_total_weight() {
        let g = Grid::periodic(1, 1.0_f64, 1.0 / 8.0).unwrap();
        let k = KernelSpec::from_preset(1, 1.5, &KernelPreset::OddBump(0.5)).unwrap();
        let q = QuadratureRule::for_kernel(&g, &k, &QuadratureConfig::default()).unwrap();
        assert!(q.pairs().len() <= 8);
        let folded: f64 = q.pairs().iter().map(|p| p.plus + p.minus).sum();
        let cfg = QuadratureConfig::default();
        let lattice = QuadratureRule::for_kernel(
            &Grid::new(1, 1000.0, 1.0 / 8.0).unwrap(),
            &k,
            &QuadratureConfig { r_mid: Some(1000.0), ..cfg },
        )
        .unwrap();
        // Offsets that are whole periods drop out on the torus.
        let direct: f64 = lattice.pairs().iter().filter(|p| p.off[0] % 16 != 0).map(|p| p.plus + p.minus).sum();
        assert_relative_eq!(folded, direct, max_relative = 1e-10);
    }
}
