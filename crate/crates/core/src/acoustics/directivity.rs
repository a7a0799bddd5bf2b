use serde::{Deserialize, Serialize};

/// Element radiation pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Directivity {
    /// Far-field baffled circular piston, `2 J1(ka sin t) / (ka sin t)`.
    #[default]
    Piston,
    /// Omnidirectional point source.
    Monopole,
}

impl Directivity {
    /// `ka` is wavenumber times piston radius; `cos_theta` is measured from the element axis.
    #[inline]
    pub fn factor(self, ka: f64, cos_theta: f64) -> f64 {
        match self {
            Directivity::Monopole => 1.0,
            Directivity::Piston => {
                let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
                let x = ka * sin_theta;
                if x < 1e-8 {
                    1.0
                } else {
                    2.0 * bessel_j1(x) / x
                }
            }
        }
    }
}

/// Bessel function of the first kind, order one.
///
/// Power series below |x| = 12, Hankel asymptotic expansion above.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 12.0 { j1_series(ax) } else { j1_asymptotic(ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn j1_series(x: f64) -> f64 {
    let half = x / 2.0;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    for m in 1..200 {
        let m = m as f64;
        term *= q / (m * (m + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn j1_asymptotic(x: f64) -> f64 {
    const MU: f64 = 4.0;
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        a *= (MU - odd * odd) / (k as f64 * z);
        if a.abs() >= prev || a.abs() < 1e-18 {
            break;
        }
        prev = a.abs();
        // k odd -> Q, k even -> P, alternating in pairs.
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    let chi = x - 0.75 * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// J1(x) = (1/pi) * integral_0^pi cos(t - x sin t) dt, composite Simpson.
    fn j1_integral(x: f64) -> f64 {
        let n = 20_000;
        let h = PI / n as f64;
        let f = |t: f64| (t - x * t.sin()).cos();
        let mut s = f(0.0) + f(PI);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0 / PI
    }

    #[test]
    fn matches_integral_representation() {
        for &x in &[0.1, 0.5, 1.0, 2.0, 3.3, 3.8317, 5.0, 8.0, 11.9, 12.1, 15.0, 25.0, 40.0] {
            let got = bessel_j1(x);
            let want = j1_integral(x);
            assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn known_values() {
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!(bessel_j1(3.831_705_970_207_512).abs() < 1e-14);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_eq!(bessel_j1(-2.0), -bessel_j1(2.0));
    }

    #[test]
    fn piston_is_one_on_axis_and_below_one_off_axis() {
        let ka = 2.0 * PI / 8.5e-3 * 4.5e-3;
        assert_eq!(Directivity::Piston.factor(ka, 1.0), 1.0);
        let off = Directivity::Piston.factor(ka, (30f64).to_radians().cos());
        assert!(off < 1.0 && off > 0.5);
        assert_eq!(Directivity::Monopole.factor(ka, 0.0), 1.0);
    }
}
