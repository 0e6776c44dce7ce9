use crate::error::{Error, Result};
use crate::numeric::DdSum;

/// The two-sided series for `P(z)` directly; well conditioned for `z`
/// within a few octaves of 1.
pub fn p_series(z: f64) -> f64 {
    let mut sum = DdSum::new();
    for j in -64i32..=64 {
        let weight = 2f64.powf(-(j as f64) * (j as f64 + 1.0) / 2.0);
        if weight == 0.0 {
            continue;
        }
        let s = 2f64.powi(j) * z;
        let term = weight * s / (s + 1.0);
        sum.add(if j.rem_euclid(2) == 1 { -term } else { term });
    }
    sum.value()
}

/// `P(z)` for real `z > 0`: the series on `[1/4, 4]`, and `P(z) = z P(2z)`
/// to bring other arguments into that range.
pub fn p_func(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::pre(format!("P needs a finite z > 0, got {z}")));
    }
    let mut z = z;
    let mut scale = 1.0f64;
    while z < 0.25 {
        scale *= z;
        z *= 2.0;
    }
    while z > 4.0 {
        z /= 2.0;
        scale /= z;
    }
    Ok(scale * p_series(z))
}

/// `Q(z) = 2^(z(z-1)/2) P(2^z)`, reduced to `z mod 1` by periodicity.
pub fn q_func(z: f64) -> f64 {
    let f = z - z.floor();
    2f64.powf(f * (f - 1.0) / 2.0) * p_series(2f64.powf(f))
}

/// `theta_4(z, q) = 1 + 2 sum_{i>=1} (-1)^i q^(i^2) cos(2iz)`.
pub fn theta4(z: f64, q: f64) -> Result<f64> {
    if !(q.abs() < 1.0) {
        return Err(Error::pre(format!("theta_4 needs |q| < 1, got {q}")));
    }
    let mut sum = DdSum::new();
    sum.add(1.0);
    let mut i = 1i32;
    loop {
        let w = q.powi(i * i);
        if w.abs() < 1e-30 {
            break;
        }
        let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
        sum.add(2.0 * sign * w * (2.0 * i as f64 * z).cos());
        i += 1;
    }
    Ok(sum.value())
}
