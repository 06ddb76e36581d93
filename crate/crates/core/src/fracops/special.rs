//! Special functions used by the singular-integral weights.

use statrs::function::gamma::gamma;

/// Normalization `C(n, s) = 2^s Γ((n+s)/2) / (π^{n/2} |Γ(-s/2)|)` of the
/// singular integral, chosen so that it reproduces the `|ξ|^s` symbol.
///
/// At `s = 2` the constant vanishes (pole of `Γ(-s/2)`); callers switch to the
/// local Laplacian stencil there.
pub fn normalization(dim: usize, s: f64) -> f64 {
    if s >= 2.0 {
        return 0.0;
    }
    let n = dim as f64;
    2f64.powf(s) * gamma((n + s) / 2.0) / (std::f64::consts::PI.powf(n / 2.0) * gamma(-s / 2.0).abs())
}

const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];

/// Hurwitz zeta `ζ(p, a) = Σ_{k≥0} (a + k)^{-p}` for `p > 1`, `a > 0`.
///
/// Direct summation up to `a + k ≥ 20`, then Euler–Maclaurin with four
/// Bernoulli corrections (truncation below 1e-15 relative).
pub fn hurwitz_zeta(p: f64, a: f64) -> f64 {
    debug_assert!(p > 1.0 && a > 0.0);
    let mut sum = 0.0;
    let mut b = a;
    while b < 20.0 {
        sum += b.powf(-p);
        b += 1.0;
    }
    let mut tail = b.powf(1.0 - p) / (p - 1.0) + 0.5 * b.powf(-p);
    // rising factorial p (p+1) ... (p+2k-2) and (2k)!
    let mut rising = p;
    let mut fact = 2.0;
    for (k, bern) in BERNOULLI.iter().enumerate() {
        let k = k + 1;
        tail += bern / fact * rising * b.powf(-p - 2.0 * k as f64 + 1.0);
        let m = 2.0 * k as f64;
        rising *= (p + m - 1.0) * (p + m);
        fact *= (m + 1.0) * (m + 2.0);
    }
    sum + tail
}

/// `∫_a^b z^{-1-s} dz`.
pub(crate) fn moment0(s: f64, a: f64, b: f64) -> f64 {
    (a.powf(-s) - b.powf(-s)) / s
}

/// `∫_a^b z^{-s} dz`, stable through `s = 1`.
pub(crate) fn moment1(s: f64, a: f64, b: f64) -> f64 {
    power_moment(1.0 - s, a, b)
}

/// `∫_a^b z^{1-s} dz`, stable through `s = 2`.
pub(crate) fn moment2(s: f64, a: f64, b: f64) -> f64 {
    power_moment(2.0 - s, a, b)
}

/// `∫_a^b z^{c-1} dz` for `0 < a < b`.
fn power_moment(c: f64, a: f64, b: f64) -> f64 {
    let log_ratio = (b / a).ln();
    if c.abs() < 1e-12 {
        log_ratio
    } else {
        a.powf(c) * (c * log_ratio).exp_m1() / c
    }
}
