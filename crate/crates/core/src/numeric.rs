//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Componentwise compensated sum of complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    values.into_iter().for_each(|v| acc.add(v));
    acc.value()
}

/// Below this magnitude removable singularities switch to their Taylor series.
pub const TAYLOR_SWITCH: f64 = 1e-6;

/// sin(z)/z with the removable singularity at 0 filled in.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < TAYLOR_SWITCH {
        let z2 = z * z;
        // 1 - z²/6 + z⁴/120 - z⁶/5040
        1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))
    } else {
        z.sin() / z
    }
}

/// sin(πt) with exact argument reduction, so integers give exactly 0.
pub fn sin_pi(t: f64) -> f64 {
    if !t.is_finite() {
        return f64::NAN;
    }
    // r = t − 2n ∈ [−1, 1] is exact
    let r = t - 2.0 * (0.5 * t).round();
    let (sign, r) = if r < 0.0 { (-1.0, -r) } else { (1.0, r) };
    // sin(πr) = sin(π(1 − r))
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// sin(πt)/(πt), exactly zero at nonzero integers.
pub fn sinc_pi(t: f64) -> f64 {
    let z = PI * t;
    if z.abs() < TAYLOR_SWITCH {
        sinc(z)
    } else {
        let s = sin_pi(t);
        // +0 rather than a signed zero at the nonzero integers
        if s == 0.0 {
            0.0
        } else {
            s / z
        }
    }
}

pub fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
