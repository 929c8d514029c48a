use super::set::SymbolicSet;
use super::subshift::{Resolution, Subshift};
use super::word::Word;
use crate::error::{precondition, Error, Result};

/// Length of the cylinder equal to the open ball B_n(x, 2^-m).
pub fn open_ball_len(n: usize, res: Resolution) -> usize {
    n + res.m()
}

/// Length of the cylinder equal to the closed ball B̄_n(x, 2^-m).
pub fn closed_ball_len(n: usize, res: Resolution) -> usize {
    n + res.m() - 1
}

fn ball(center_prefix: &Word, n: usize, len: usize) -> Result<Word> {
    if n == 0 {
        return precondition("ball order n must be at least 1");
    }
    if center_prefix.len() < len {
        return Err(Error::InsufficientPrecision(format!(
            "ball needs a center prefix of length {len}, got {}",
            center_prefix.len()
        )));
    }
    Ok(center_prefix.prefix(len))
}

/// The word whose cylinder is B_n(x, 2^-m) for any x starting with `center_prefix`.
pub fn open_ball_cylinder(center_prefix: &Word, n: usize, res: Resolution) -> Result<Word> {
    ball(center_prefix, n, open_ball_len(n, res))
}

/// The word whose cylinder is B̄_n(x, 2^-m).
pub fn closed_ball_cylinder(center_prefix: &Word, n: usize, res: Resolution) -> Result<Word> {
    ball(center_prefix, n, closed_ball_len(n, res))
}

pub fn words_of_length(sys: &Subshift, n: usize) -> Result<Vec<Word>> {
    if n == 0 {
        return precondition("word length must be at least 1");
    }
    Ok(sys.words_of_length(n))
}

/// Largest (n, 2^-m)-separated subset of Z: one point per length-(n+m−1) cylinder meeting Z.
pub fn separated_set_size(z: &SymbolicSet, n: usize, res: Resolution) -> Result<u128> {
    if n == 0 {
        return precondition("order n must be at least 1");
    }
    Ok(z.count_meeting(closed_ball_len(n, res)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn res(m: usize) -> Resolution {
        Resolution::new(m).unwrap()
    }

    #[test]
    fn ball_examples() {
        assert_eq!(open_ball_cylinder(&w("0110"), 2, res(1)).unwrap(), w("011"));
        assert_eq!(open_ball_cylinder(&w("00000"), 3, res(1)).unwrap(), w("0000"));
        assert!(open_ball_cylinder(&w("0"), 0, res(1)).is_err());
        assert!(open_ball_cylinder(&w("01"), 2, res(1)).is_err());
        assert_eq!(closed_ball_cylinder(&w("011"), 2, res(2)).unwrap(), w("011"));
        assert_eq!(closed_ball_cylinder(&w("0110"), 4, res(1)).unwrap(), w("0110"));
    }

    #[test]
    fn separated_examples() {
        let x = Subshift::full(2).unwrap();
        assert_eq!(separated_set_size(&SymbolicSet::whole(&x), 3, res(1)).unwrap(), 8);
        assert_eq!(separated_set_size(&SymbolicSet::empty(&x), 3, res(1)).unwrap(), 0);
        let g = Subshift::golden_mean();
        assert_eq!(separated_set_size(&SymbolicSet::whole(&g), 2, res(1)).unwrap(), 3);
    }
}
