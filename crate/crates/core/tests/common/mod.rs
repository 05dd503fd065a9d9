#![allow(dead_code)]

/// `μ(1) = (2-σ) ∫_ℝ (1 - cos y) |y|^{-1-σ} dy` by brute force: with
/// `y = s²` the integrand `4 (1 - cos s²) s^{-1-2σ}` is bounded at the origin,
/// and ten million midpoints cover `s ∈ (0, 100)`. The remaining tail is
/// `∫_A^∞ y^{-1-σ} dy` up to an oscillatory term of size `A^{-1-σ}`.
pub fn brute_mu(sigma: f64) -> f64 {
    let nodes = 10_000_000;
    let top = 100.0_f64;
    let ds = top / nodes as f64;
    let mut sum = 0.0;
    for i in 0..nodes {
        let s = (i as f64 + 0.5) * ds;
        let y = s * s;
        // 1 - cos y = 2 sin²(y/2) avoids cancellation near the origin.
        sum += 8.0 * (0.5 * y).sin().powi(2) * s.powf(-1.0 - 2.0 * sigma) * ds;
    }
    let a = top * top;
    let tail = 2.0 * a.powf(-sigma) / sigma;
    (2.0 - sigma) * (sum + tail)
}
