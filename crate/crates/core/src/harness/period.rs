use crate::acoustics::sum::sum_f64;
use crate::error::{invalid, Error, Result};

/// Period of a short, uniformly sampled series from the mean spacing of its
/// interior local maxima after removing the mean.
///
/// A sample is a maximum when it is strictly above its left neighbour and at
/// least its right neighbour, so a flat top counts once. End samples have only
/// one neighbour and never count. Each maximum is refined to the vertex of the
/// parabola through it and its neighbours.
pub fn dominant_period(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 6 {
        return Err(invalid(format!(
            "period estimation needs at least 6 samples, got {}",
            series.len()
        )));
    }
    let step = series[1].0 - series[0].0;
    if !(step > 0.0) {
        return Err(invalid("series abscissae must increase"));
    }
    for w in series.windows(2) {
        if ((w[1].0 - w[0].0) - step).abs() > 1e-9 * step.abs().max(1.0) {
            return Err(invalid("series must be uniformly spaced"));
        }
    }
    let mean = sum_f64(series.iter().map(|s| s.1)) / series.len() as f64;
    let y: Vec<f64> = series.iter().map(|s| s.1 - mean).collect();
    let maxima: Vec<usize> = (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect();
    if maxima.len() < 2 {
        return Err(Error::NoPeriod(format!(
            "found {} interior maxima, need at least 2",
            maxima.len()
        )));
    }
    let refined = |i: usize| {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let curvature = a - 2.0 * b + c;
        let offset = if curvature < 0.0 { 0.5 * (a - c) / curvature } else { 0.0 };
        i as f64 + offset
    };
    let first = refined(maxima[0]);
    let last = refined(maxima[maxima.len() - 1]);
    Ok((last - first) / (maxima.len() - 1) as f64 * step)
}
