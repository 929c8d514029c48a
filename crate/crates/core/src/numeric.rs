//! Small floating-point helpers shared across modules.

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// log(e^a + e^b), tolerant of -inf.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + compensated_sum(v.iter().map(|x| (x - hi).exp())).ln()
}

/// Relative closeness used when two exact computations sum the same terms in
/// different orders.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Least-squares fit of `ys` against the given basis columns.
///
/// Returns the coefficients and the root-mean-square residual, or `None` when
/// there are fewer points than columns or the normal equations are singular.
pub fn least_squares(xs: &[f64], ys: &[f64], basis: &[fn(f64) -> f64]) -> Option<(Vec<f64>, f64)> {
    let p = basis.len();
    if xs.len() < p || xs.len() != ys.len() {
        return None;
    }
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| basis.iter().map(|b| b(x)).collect()).collect();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &y) in rows.iter().zip(ys) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * y;
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for i in 0..p {
            if i != col {
                let r = a[i][col] / a[col][col];
                for j in col..=p {
                    a[i][j] -= r * a[col][j];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..p).map(|i| a[i][p] / a[i][i]).collect();
    let sse: f64 = rows
        .iter()
        .zip(ys)
        .map(|(row, y)| {
            let fit: f64 = row.iter().zip(&coef).map(|(r, c)| r * c).sum();
            (fit - y).powi(2)
        })
        .sum();
    Some((coef, (sse / xs.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 + 2.0 / x).collect();
        let (c, rms) = least_squares(&xs, &ys, &[|_| 1.0, |x| 1.0 / x]).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12 && rms < 1e-12);
        assert!(least_squares(&xs[..1], &ys[..1], &[|_| 1.0, |x| x]).is_none());
    }

    #[test]
    fn log_add_matches_direct() {
        let a: f64 = 0.3;
        let b: f64 = -1.7;
        assert!((log_add(a, b) - (a.exp() + b.exp()).ln()).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 2.0), 2.0);
    }

    #[test]
    fn compensated_beats_naive() {
        let xs = std::iter::once(1e16).chain(std::iter::repeat(1.0).take(1000)).chain(std::iter::once(-1e16));
        assert_eq!(compensated_sum(xs), 1000.0);
    }
}
