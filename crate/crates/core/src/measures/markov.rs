use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{input, precondition, Error, Result};
use crate::symbolic::{BlockPotential, Subshift, Word};

const ROW_TOL: f64 = 1e-12;

/// A stationary Markov measure on sequences over `{0,..,k-1}`.
///
/// When built from rationals the exact parameters are kept alongside the
/// floating-point ones and used by [`MarkovMeasure::cylinder_measure_exact`].
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovMeasure {
    k: usize,
    trans: Vec<f64>,
    log_trans: Vec<f64>,
    stationary: Vec<f64>,
    exact: Option<Exact>,
    iid: bool,
}

#[derive(Clone, Debug, PartialEq)]
struct Exact {
    trans: Vec<BigRational>,
    stationary: Vec<BigRational>,
}

/// Parses "0.3", "-1.25e-2", "3/10" or "7" into an exact rational.
pub fn rational_from_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Input(format!("cannot read {s:?} as a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().map_err(|_| bad())? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl MarkovMeasure {
    /// Product measure with the given symbol probabilities.
    pub fn bernoulli(probs: &[f64]) -> Result<Self> {
        let k = probs.len();
        let trans: Vec<f64> = (0..k).flat_map(|_| probs.iter().copied()).collect();
        Self::build(k, trans, Some(probs.to_vec()), None)
    }

    pub fn bernoulli_exact(probs: &[BigRational]) -> Result<Self> {
        let k = probs.len();
        let trans: Vec<BigRational> = (0..k).flat_map(|_| probs.iter().cloned()).collect();
        Self::build_exact(k, trans, Some(probs.to_vec()))
    }

    /// Stationary chain with row-stochastic `matrix`. The stationary vector is
    /// computed when not given; it must then be unique.
    pub fn markov(matrix: &[Vec<f64>], stationary: Option<Vec<f64>>) -> Result<Self> {
        let k = matrix.len();
        if matrix.iter().any(|r| r.len() != k) {
            return input("transition matrix must be square");
        }
        Self::build(k, matrix.iter().flatten().copied().collect(), stationary, None)
    }

    pub fn markov_exact(matrix: &[Vec<BigRational>], stationary: Option<Vec<BigRational>>) -> Result<Self> {
        let k = matrix.len();
        if matrix.iter().any(|r| r.len() != k) {
            return input("transition matrix must be square");
        }
        Self::build_exact(k, matrix.iter().flatten().cloned().collect(), stationary)
    }

    fn build_exact(k: usize, trans: Vec<BigRational>, stationary: Option<Vec<BigRational>>) -> Result<Self> {
        if k < 2 {
            return input("a measure needs at least two symbols");
        }
        for (i, p) in trans.iter().enumerate() {
            if p.is_negative() {
                return input(format!("negative transition probability at ({}, {})", i / k, i % k));
            }
        }
        for a in 0..k {
            let s: BigRational = trans[a * k..(a + 1) * k].iter().cloned().sum();
            if !s.is_one() {
                return input(format!("row {a} sums to {s}, not exactly 1"));
            }
        }
        let pi = match stationary {
            Some(pi) => {
                if pi.len() != k || pi.iter().any(|p| p.is_negative()) {
                    return input("stationary vector must be a probability vector of length k");
                }
                let s: BigRational = pi.iter().cloned().sum();
                if !s.is_one() {
                    return input("stationary vector does not sum to 1");
                }
                for b in 0..k {
                    let lhs: BigRational = (0..k).map(|a| &pi[a] * &trans[a * k + b]).sum();
                    if lhs != pi[b] {
                        return input("stationary vector is not invariant");
                    }
                }
                pi
            }
            None => stationary_exact(k, &trans)?,
        };
        let f_trans = trans.iter().map(rat_to_f64).collect();
        let f_pi = pi.iter().map(rat_to_f64).collect();
        let mut m = Self::build(k, f_trans, Some(f_pi), Some(()))?;
        m.exact = Some(Exact { trans, stationary: pi });
        Ok(m)
    }

    fn build(k: usize, trans: Vec<f64>, stationary: Option<Vec<f64>>, trusted: Option<()>) -> Result<Self> {
        if k < 2 {
            return input("a measure needs at least two symbols");
        }
        if trans.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return input("transition probabilities must be finite and nonnegative");
        }
        if trusted.is_none() {
            for a in 0..k {
                let s: f64 = trans[a * k..(a + 1) * k].iter().sum();
                if (s - 1.0).abs() > ROW_TOL {
                    return input(format!("row {a} sums to {s}, not 1"));
                }
            }
        }
        let stationary = match stationary {
            Some(pi) => {
                if pi.len() != k || pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return input("stationary vector must be a probability vector of length k");
                }
                if trusted.is_none() {
                    if (pi.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
                        return input("stationary vector does not sum to 1");
                    }
                    for b in 0..k {
                        let lhs: f64 = (0..k).map(|a| pi[a] * trans[a * k + b]).sum();
                        if (lhs - pi[b]).abs() > 1e-10 {
                            return input("stationary vector is not invariant");
                        }
                    }
                }
                pi
            }
            None => stationary_f64(k, &trans)?,
        };
        let iid = (1..k).all(|a| trans[a * k..(a + 1) * k] == trans[..k]);
        let log_trans = trans.iter().map(|p| if *p > 0.0 { p.ln() } else { f64::NEG_INFINITY }).collect();
        Ok(MarkovMeasure { k, trans, log_trans, stationary, exact: None, iid })
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn transition(&self, a: u8, b: u8) -> f64 {
        self.trans[a as usize * self.k + b as usize]
    }

    pub fn log_transition(&self, a: u8, b: u8) -> f64 {
        self.log_trans[a as usize * self.k + b as usize]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        self.trans.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    /// Rows are identical, so the measure is a product measure.
    pub fn is_iid(&self) -> bool {
        self.iid
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Transitions carrying positive probability must be allowed in `sys`.
    pub fn check_compatible(&self, sys: &Subshift) -> Result<()> {
        if sys.alphabet_size() != self.k {
            return input("measure and subshift have different alphabets");
        }
        for a in 0..self.k as u8 {
            for b in 0..self.k as u8 {
                if self.transition(a, b) > 0.0 && !sys.allows(a, b) && self.stationary[a as usize] > 0.0 {
                    return input(format!("measure charges the forbidden transition {a}{b}"));
                }
            }
        }
        Ok(())
    }

    /// Irreducibility of the transition graph restricted to the support of π.
    pub fn is_ergodic(&self) -> bool {
        let support: Vec<usize> = (0..self.k).filter(|&a| self.stationary[a] > 0.0).collect();
        if support.is_empty() {
            return false;
        }
        let n = support.len();
        let allowed: Vec<bool> = support
            .iter()
            .flat_map(|&a| support.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.trans[a * self.k + b] > 0.0)
            .collect();
        n == 1 || crate::symbolic::subshift_strongly_connected(n, &allowed)
    }

    /// Has a row with a single outgoing transition among charged states, so
    /// that the measure may have atoms.
    pub fn has_deterministic_row(&self) -> bool {
        (0..self.k).any(|a| self.stationary[a] > 0.0 && self.trans[a * self.k..(a + 1) * self.k].iter().any(|p| *p == 1.0))
    }

    pub fn cylinder_measure(&self, w: &Word) -> f64 {
        self.log_cylinder_measure(w.symbols()).exp()
    }

    /// log μ([w]), −∞ outside the support; the empty word has measure 1.
    pub fn log_cylinder_measure(&self, w: &[u8]) -> f64 {
        let Some(&first) = w.first() else { return 0.0 };
        if first as usize >= self.k || self.stationary[first as usize] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut acc = crate::numeric::CompensatedSum::new();
        acc.add(self.stationary[first as usize].ln());
        for p in w.windows(2) {
            if p[1] as usize >= self.k {
                return f64::NEG_INFINITY;
            }
            let l = self.log_transition(p[0], p[1]);
            if l == f64::NEG_INFINITY {
                return l;
            }
            acc.add(l);
        }
        acc.value()
    }

    /// Exact cylinder probability when the measure was built from rationals.
    pub fn cylinder_measure_exact(&self, w: &Word) -> Option<BigRational> {
        let ex = self.exact.as_ref()?;
        let s = w.symbols();
        let Some(&first) = s.first() else { return Some(BigRational::one()) };
        if s.iter().any(|&b| b as usize >= self.k) {
            return Some(BigRational::zero());
        }
        let mut p = ex.stationary[first as usize].clone();
        for pair in s.windows(2) {
            if p.is_zero() {
                break;
            }
            p *= &ex.trans[pair[0] as usize * self.k + pair[1] as usize];
        }
        Some(p)
    }

    /// Kolmogorov–Sinai entropy −Σ π_a P_ab log P_ab.
    pub fn entropy(&self) -> f64 {
        let mut acc = crate::numeric::CompensatedSum::new();
        for a in 0..self.k {
            for b in 0..self.k {
                let p = self.trans[a * self.k + b];
                if p > 0.0 && self.stationary[a] > 0.0 {
                    acc.add(-self.stationary[a] * p * p.ln());
                }
            }
        }
        acc.value()
    }

    /// ∫ f dμ = Σ_blocks μ([w]) f(w).
    pub fn integral(&self, f: &BlockPotential) -> f64 {
        let mut acc = crate::numeric::CompensatedSum::new();
        for (block, v) in f.allowed_blocks() {
            if v != 0.0 {
                let mu = self.log_cylinder_measure(&block).exp();
                acc.add(mu * v);
            }
        }
        acc.value()
    }

    /// The target h_μ + ∫ f dμ.
    pub fn free_energy(&self, f: &BlockPotential) -> f64 {
        self.entropy() + self.integral(f)
    }

    /// μ-marginal on blocks of length `len` (only blocks of positive measure).
    pub fn block_marginal(&self, len: usize) -> BTreeMap<Word, f64> {
        let mut out = BTreeMap::new();
        let mut stack: Vec<(Vec<u8>, f64)> = vec![(Vec::new(), 0.0)];
        while let Some((w, lp)) = stack.pop() {
            if w.len() == len {
                out.insert(Word::new(w), lp.exp());
                continue;
            }
            for b in 0..self.k as u8 {
                let l = match w.last() {
                    None => {
                        if self.stationary[b as usize] > 0.0 {
                            self.stationary[b as usize].ln()
                        } else {
                            f64::NEG_INFINITY
                        }
                    }
                    Some(&a) => lp + self.log_transition(a, b),
                };
                if l > f64::NEG_INFINITY {
                    let mut v = w.clone();
                    v.push(b);
                    stack.push((v, l));
                }
            }
        }
        out
    }

    /// Relabels symbols by `perm` (symbol a becomes perm[a]).
    pub fn permuted(&self, perm: &[u8]) -> Result<Self> {
        let k = self.k;
        if perm.len() != k {
            return precondition("permutation length must equal the alphabet size");
        }
        let mut m = vec![vec![0.0; k]; k];
        let mut pi = vec![0.0; k];
        for a in 0..k {
            pi[perm[a] as usize] = self.stationary[a];
            for b in 0..k {
                m[perm[a] as usize][perm[b] as usize] = self.trans[a * k + b];
            }
        }
        Self::markov(&m, Some(pi))
    }
}

fn stationary_f64(k: usize, trans: &[f64]) -> Result<Vec<f64>> {
    // rows of (P^T − I) with the last equation replaced by Σπ = 1
    let mut a = vec![vec![0.0f64; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = trans[j * k + i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..k {
        a[k - 1][j] = 1.0;
    }
    a[k - 1][k] = 1.0;
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        if a[piv][col].abs() < 1e-12 {
            return input("stationary distribution is not unique; give it explicitly");
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let pi: Vec<f64> = (0..k).map(|i| (a[i][k] / a[i][i]).max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|p| p / s).collect())
}

fn stationary_exact(k: usize, trans: &[BigRational]) -> Result<Vec<BigRational>> {
    let mut a = vec![vec![BigRational::zero(); k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = trans[j * k + i].clone() - if i == j { BigRational::one() } else { BigRational::zero() };
        }
    }
    for j in 0..k {
        a[k - 1][j] = BigRational::one();
    }
    a[k - 1][k] = BigRational::one();
    for col in 0..k {
        let Some(piv) = (col..k).find(|&r| !a[r][col].is_zero()) else {
            return input("stationary distribution is not unique; give it explicitly");
        };
        a.swap(col, piv);
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..=k {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    Ok((0..k).map(|i| &a[i][k] / &a[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(rational_from_decimal("0.3").unwrap(), BigRational::new(3.into(), 10.into()));
        assert_eq!(rational_from_decimal("3/10").unwrap(), BigRational::new(3.into(), 10.into()));
        assert_eq!(rational_from_decimal("-1.5e-1").unwrap(), BigRational::new((-3).into(), 20.into()));
        assert_eq!(rational_from_decimal("2").unwrap(), BigRational::from_integer(2.into()));
        assert!(rational_from_decimal("x").is_err());
        assert!(rational_from_decimal("1/0").is_err());
    }

    #[test]
    fn cylinder_examples() {
        let half = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        assert!((half.cylinder_measure(&w("0110")) - 1.0 / 16.0).abs() < 1e-15);
        let b = MarkovMeasure::bernoulli(&[0.3, 0.7]).unwrap();
        assert!((b.cylinder_measure(&w("01")) - 0.21).abs() < 1e-15);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let g = MarkovMeasure::markov(&[vec![1.0 / phi, 1.0 / (phi * phi)], vec![1.0, 0.0]], None).unwrap();
        assert_eq!(g.cylinder_measure(&w("11")), 0.0);
    }

    #[test]
    fn exact_rational_cylinders() {
        let p = [rational_from_decimal("0.3").unwrap(), rational_from_decimal("0.7").unwrap()];
        let b = MarkovMeasure::bernoulli_exact(&p).unwrap();
        assert_eq!(b.cylinder_measure_exact(&w("01")).unwrap(), BigRational::new(21.into(), 100.into()));
        let bad = [rational_from_decimal("0.3").unwrap(), rational_from_decimal("0.71").unwrap()];
        assert!(MarkovMeasure::bernoulli_exact(&bad).is_err());
    }

    #[test]
    fn entropy_examples() {
        let half = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        assert!((half.entropy() - 2f64.ln()).abs() < 1e-15);
        let b = MarkovMeasure::bernoulli(&[0.3, 0.7]).unwrap();
        assert!((b.entropy() - 0.610864).abs() < 1e-6);
        let cyc = MarkovMeasure::markov(&[vec![0.0, 1.0], vec![1.0, 0.0]], None).unwrap();
        assert_eq!(cyc.entropy(), 0.0);
        assert_eq!(cyc.stationary(), &[0.5, 0.5]);
    }

    #[test]
    fn integral_examples() {
        let x = Subshift::full(2).unwrap();
        let b = MarkovMeasure::bernoulli(&[0.3, 0.7]).unwrap();
        let f = BlockPotential::from_symbols(&x, &[0.0, 1.0]).unwrap();
        assert!((b.integral(&f) - 0.7).abs() < 1e-15);
        assert!((b.integral(&BlockPotential::constant(&x, 2.5)) - 2.5).abs() < 1e-15);
        let point = MarkovMeasure::bernoulli(&[1.0, 0.0]).unwrap();
        let g = BlockPotential::from_symbols(&x, &[0.25, 9.0]).unwrap();
        assert_eq!(point.integral(&g), 0.25);
    }

    #[test]
    fn stationary_solves_balance() {
        let m = MarkovMeasure::markov(&[vec![0.9, 0.1], vec![0.4, 0.6]], None).unwrap();
        assert!((m.stationary()[0] - 0.8).abs() < 1e-12);
        let e = MarkovMeasure::markov_exact(
            &[
                vec![rational_from_decimal("0.9").unwrap(), rational_from_decimal("0.1").unwrap()],
                vec![rational_from_decimal("0.4").unwrap(), rational_from_decimal("0.6").unwrap()],
            ],
            None,
        )
        .unwrap();
        assert_eq!(e.cylinder_measure_exact(&w("0")).unwrap(), BigRational::new(4.into(), 5.into()));
        // reducible chain needs an explicit stationary vector
        assert!(MarkovMeasure::markov(&[vec![1.0, 0.0], vec![0.0, 1.0]], None).is_err());
        assert!(MarkovMeasure::markov(&[vec![1.0, 0.0], vec![0.0, 1.0]], Some(vec![0.5, 0.5])).is_ok());
    }

    #[test]
    fn ergodicity() {
        assert!(MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap().is_ergodic());
        assert!(MarkovMeasure::bernoulli(&[1.0, 0.0]).unwrap().is_ergodic());
        let mix = MarkovMeasure::markov(&[vec![1.0, 0.0], vec![0.0, 1.0]], Some(vec![0.5, 0.5])).unwrap();
        assert!(!mix.is_ergodic());
    }
}
