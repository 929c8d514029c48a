//! Limits of finite-order sequences: least squares in n^{-1/2} and n^{-1}.

use crate::numeric::least_squares;

const BASIS: [fn(f64) -> f64; 3] = [|_| 1.0, |n| n.powf(-0.5), |n| 1.0 / n];

/// Extrapolated limit of `ys` (indexed by the orders `ns`) with a half-width
/// covering the residuals and the drift of a fit restricted to the tail.
pub(crate) fn limit(ns: &[usize], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = ns.iter().zip(ys).filter(|(_, y)| y.is_finite()).map(|(&n, &y)| (n as f64, y)).collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if pts.is_empty() {
        return (f64::NAN, f64::INFINITY);
    }
    let last = *vs.last().unwrap();
    let Some((coef, rms)) = least_squares(&xs, &vs, &BASIS) else {
        // too few points: the last value with its spread as the uncertainty
        let spread = vs.iter().fold(0.0f64, |a, v| a.max((v - last).abs()));
        return (last, spread);
    };
    let tail = xs.len() - xs.len() / 3;
    let drift = if tail >= 4 && tail < xs.len() {
        let start = xs.len() - tail;
        least_squares(&xs[start..], &vs[start..], &BASIS).map_or(0.0, |(c, _)| (c[0] - coef[0]).abs())
    } else {
        0.0
    };
    (coef[0], drift + 2.0 * rms + 1e-4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_limit() {
        let ns: Vec<usize> = (8..=24).step_by(2).collect();
        let ys: Vec<f64> = ns.iter().map(|&n| 0.7 - 0.3 / (n as f64).sqrt() + 0.5 / n as f64).collect();
        let (v, h) = limit(&ns, &ys);
        assert!((v - 0.7).abs() < 1e-9 && h < 1e-3);
    }
}
