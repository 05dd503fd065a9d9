//! Reference values printed by `fracbellman oracle`.

use fracbellman::field::Grid;
use fracbellman::kernel::{default_drift_radii, drift_compensation, KernelPreset, KernelSpec};
use fracbellman::nonlocal::{QuadratureConfig, QuadratureRule};
use fracbellman::solver::fractional_symbol;

/// `mu(k) = …` lines, eight decimals.
pub fn spectral(sigma: f64, ks: &[f64]) -> fracbellman::Result<String> {
    let mut out = String::new();
    for &k in ks {
        out.push_str(&format!("mu({k}) = {:.8}\n", fractional_symbol(sigma, k)?));
    }
    Ok(out)
}

/// Masses and moments of the quadrature rule of `kernel` on a 1D or 2D box
/// grid, plus the drift compensation of the kernel.
pub fn quadrature(
    dim: usize,
    sigma: f64,
    h: f64,
    half_width: f64,
    kernel: &KernelPreset,
) -> fracbellman::Result<String> {
    let grid = Grid::new(dim, half_width, h)?;
    let k = KernelSpec::from_preset(dim, sigma, kernel)?;
    let q = QuadratureRule::for_kernel(&grid, &k, &QuadratureConfig::default())?;
    let c0 = q.cell0();
    let g = q.first_moment();
    let lines = [
        format!("kernel = {kernel}"),
        format!("zeroth_mass = {:.10e}", q.zeroth_mass()),
        format!("analytic_mass = {:.10e}", q.analytic_mass()),
        format!("cell0 = {:.10e} {:.10e}", c0[0], c0[1]),
        format!("first_moment = {:.10e} {:.10e}", g[0], g[1]),
        format!("row_sum = {:.10e}", q.diffusion_row_sum()),
        format!("drift_compensation = {:.10e}", drift_compensation(&k, &default_drift_radii::<f64>())?),
    ];
    Ok(lines.join("\n") + "\n")
}
