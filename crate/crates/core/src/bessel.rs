//! Bessel functions of the first kind, restricted to what the Schoenberg
//! radial profiles need: half-integer orders by trigonometric recurrence,
//! integer orders by power series below |z| = 12 and Hankel's asymptotic
//! expansion above.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::numeric::TAYLOR_SWITCH;

/// Crossover between the power series and the asymptotic expansion.
pub const ASYMPTOTIC_SWITCH: f64 = 12.0;

/// `Γ(d/2)` for a positive integer `d`, by exact products.
pub fn gamma_half(d: usize) -> f64 {
    assert!(d >= 1);
    if d.is_multiple_of(2) {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        // Γ(n + 1/2) = (2n-1)!! √π / 2^n with n = (d-1)/2
        let n = (d - 1) / 2;
        let mut g = PI.sqrt();
        for k in 0..n {
            g *= k as f64 + 0.5;
        }
        g
    }
}

/// `J_{l+1/2}(z)` for `l ≥ -1`, from `J_{-1/2}` and `J_{1/2}` by upward recurrence.
pub fn bessel_j_half_integer(l: i32, z: f64) -> f64 {
    assert!(l >= -1);
    if z == 0.0 {
        return if l == -1 { f64::INFINITY } else { 0.0 };
    }
    let scale = (2.0 / (PI * z)).sqrt();
    let mut prev = scale * z.cos(); // J_{-1/2}
    if l == -1 {
        return prev;
    }
    let mut cur = scale * z.sin(); // J_{1/2}
    for k in 0..l {
        let nu = k as f64 + 0.5;
        let next = 2.0 * nu / z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `J_n(z)` for integer `n ≥ 0` and `z ≥ 0`.
pub fn bessel_j_integer(n: u32, z: f64) -> f64 {
    let z = z.abs();
    if z < ASYMPTOTIC_SWITCH.max(n as f64) {
        // J_n(z) = (z/2)^n / n! · 0F1(; n+1; -z²/4)
        let mut lead = 1.0;
        for k in 1..=n {
            lead *= 0.5 * z / k as f64;
        }
        return lead * hyp0f1_neg(n as f64 + 1.0, z);
    }
    let j0 = hankel_asymptotic(0.0, z);
    if n == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = hankel_asymptotic(1.0, z);
    for k in 1..n {
        let next = 2.0 * k as f64 / z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `0F1(; b; -z²/4) = Σ_k (-z²/4)^k / (k! (b)_k)`, summed to convergence.
fn hyp0f1_neg(b: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..500 {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (b + kf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && kf + 1.0 > 0.5 * z {
            break;
        }
    }
    sum
}

/// Four-term Taylor polynomial of `0F1(; b; -z²/4)` around 0.
fn hyp0f1_neg_taylor(b: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    1.0 + q / b * (1.0 + q / (2.0 * (b + 1.0)) * (1.0 + q / (3.0 * (b + 2.0))))
}

fn hankel_asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let chi = z - nu * FRAC_PI_2 - FRAC_PI_4;
    // a_k(ν)/z^k with a_k = Π_{j=1..k} (μ - (2j-1)²) / (k! 8^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Schoenberg's basis profile on `ℝ^d`,
/// `Ω_d(z) = Γ(d/2) (2/z)^{(d-2)/2} J_{(d-2)/2}(z)`, with `Ω_d(0) = 1`.
///
/// `Ω_1 = cos`, `Ω_3(z) = sin(z)/z`, `Ω_2 = J_0`.
pub fn schoenberg_basis(d: usize, z: f64) -> f64 {
    assert!(d >= 1);
    let z = z.abs();
    let b = 0.5 * d as f64;
    if z < TAYLOR_SWITCH {
        return hyp0f1_neg_taylor(b, z);
    }
    if d % 2 == 1 {
        // d = 2l + 3, Ω_d(z) = (2l+1)!! j_l(z) / z^l
        let l = (d as i32 - 3) / 2;
        match l {
            -1 => z.cos(),
            0 => z.sin() / z,
            _ if z < l as f64 + 1.5 => hyp0f1_neg(b, z),
            _ => {
                let mut prev = z.sin() / z;
                let mut cur = prev / z - z.cos() / z;
                for k in 1..l {
                    let next = (2 * k + 1) as f64 / z * cur - prev;
                    prev = cur;
                    cur = next;
                }
                let mut factor = 1.0;
                for k in 1..=l {
                    factor *= (2 * k + 1) as f64 / z;
                }
                factor * cur
            }
        }
    } else {
        let n = (d / 2 - 1) as u32;
        if z < ASYMPTOTIC_SWITCH.max(n as f64) {
            hyp0f1_neg(b, z)
        } else {
            let mut factor = gamma_half(d);
            for _ in 0..n {
                factor *= 2.0 / z;
            }
            factor * bessel_j_integer(n, z)
        }
    }
}
