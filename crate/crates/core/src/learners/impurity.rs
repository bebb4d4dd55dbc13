use crate::error::{Error, Result};

fn total(counts: &[usize]) -> usize {
    counts.iter().sum()
}

/// 1 - Σ p².
pub fn gini_impurity(counts: &[usize]) -> Result<f64> {
    let n = total(counts);
    if n == 0 {
        return Err(Error::InvalidParameter("gini impurity of an empty node".into()));
    }
    Ok(gini_unchecked(counts, n))
}

/// Shannon entropy in bits.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let n = total(counts);
    if n == 0 {
        return Err(Error::InvalidParameter("entropy of an empty node".into()));
    }
    Ok(entropy_unchecked(counts, n))
}

/// Entropy reduction of splitting `parent` into `left` and `right`.
pub fn info_gain(parent: &[usize], left: &[usize], right: &[usize]) -> Result<f64> {
    if parent.len() != left.len() || parent.len() != right.len() {
        return Err(Error::InvalidParameter("count vectors differ in length".into()));
    }
    if parent.iter().zip(left).zip(right).any(|((p, l), r)| l + r != *p) {
        return Err(Error::InvalidParameter("children do not sum to the parent".into()));
    }
    let (nl, nr) = (total(left), total(right));
    if nl == 0 || nr == 0 {
        return Err(Error::InvalidParameter("split has an empty child".into()));
    }
    let n = (nl + nr) as f64;
    let gain = entropy_unchecked(parent, nl + nr)
        - (nl as f64 / n) * entropy_unchecked(left, nl)
        - (nr as f64 / n) * entropy_unchecked(right, nr);
    Ok(gain.max(0.0))
}

pub(crate) fn gini_unchecked(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

pub(crate) fn entropy_unchecked(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Entropy straight from the definition with natural logs, converted to bits.
    fn entropy_oracle(counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        let mut h = 0.0;
        for &c in counts {
            if c > 0 {
                let p = c as f64 / n as f64;
                h -= p * p.ln() / std::f64::consts::LN_2;
            }
        }
        h
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini_impurity(&[10, 10]).unwrap(), 0.5);
        assert_eq!(gini_impurity(&[7, 0]).unwrap(), 0.0);
        assert!((gini_impurity(&[7, 3]).unwrap() - 0.42).abs() < 1e-12);
        assert!(gini_impurity(&[0, 0]).is_err());
    }

    #[test]
    fn info_gain_examples() {
        assert!((info_gain(&[5, 5], &[5, 0], &[0, 5]).unwrap() - 1.0).abs() < 1e-12);
        assert!(info_gain(&[5, 5], &[3, 3], &[2, 2]).unwrap().abs() < 1e-12);
        let oracle = entropy_oracle(&[8, 4]) - (7.0 / 12.0) * entropy_oracle(&[6, 1]) - (5.0 / 12.0) * entropy_oracle(&[2, 3]);
        // H(8,4) = 0.918296, H(6,1) = 0.591673, H(2,3) = 0.970951
        assert!((oracle - 0.168_590_632_192).abs() < 1e-9, "{oracle}");
        assert!((info_gain(&[8, 4], &[6, 1], &[2, 3]).unwrap() - oracle).abs() < 1e-12);
        assert!(info_gain(&[5, 5], &[5, 5], &[0, 0]).is_err());
        assert!(info_gain(&[5, 5], &[4, 5], &[0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn entropy_matches_oracle(counts in proptest::collection::vec(0usize..50, 2..5)) {
            prop_assume!(counts.iter().sum::<usize>() > 0);
            prop_assert!((entropy(&counts).unwrap() - entropy_oracle(&counts)).abs() < 1e-12);
            let g = gini_impurity(&counts).unwrap();
            prop_assert!((0.0..1.0).contains(&g));
        }
    }
}
