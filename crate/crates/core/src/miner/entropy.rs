//! Label entropy of a reference-set column over a post prefix.

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::refset::ReferenceSet;

/// Mass tolerance when checking that a distribution sums to one.
pub const MASS_TOLERANCE: f64 = 1e-9;

pub type Distribution = BTreeMap<String, f64>;

/// Probability that a token occurrence labeled with column `level` is a
/// given token.
///
/// Every occurrence in `posts` of a token that belongs to some value in the
/// column counts once; multi-token values contribute each constituent
/// token. Returns `None` when no occurrence is labeled (the column cannot
/// be evaluated yet).
pub fn label_distribution(posts: &Corpus, refset: &ReferenceSet, level: usize) -> Option<Distribution> {
    let labeled: std::collections::BTreeSet<&str> = refset
        .column_values(level)
        .into_iter()
        .flat_map(|v| v.tokens())
        .collect();
    if labeled.is_empty() {
        return None;
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for post in posts.posts() {
        for tok in &post.tokens {
            if labeled.contains(tok.as_str()) {
                *counts.entry(tok.clone()).or_default() += 1;
                total += 1;
            }
        }
    }
    if total == 0 {
        return None;
    }
    Some(
        counts
            .into_iter()
            .map(|(tok, c)| (tok, c as f64 / total as f64))
            .collect(),
    )
}

/// Shannon entropy in nats. An empty distribution has entropy 0.
pub fn entropy<'a, I>(probabilities: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a f64>,
{
    let mut sum = 0.0;
    let mut h = 0.0;
    let mut any = false;
    for &p in probabilities {
        any = true;
        if p.is_nan() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!("negative or NaN mass {p}")));
        }
        sum += p;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    if any && (sum - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("mass sums to {sum}")));
    }
    Ok(h)
}

/// `H / ln N`, comparable across prefixes of different size.
pub fn normalized_entropy(h: f64, posts: usize) -> Result<f64> {
    if posts < 2 {
        return Err(Error::TooFewPosts(posts));
    }
    Ok(h / (posts as f64).ln())
}

/// Absolute difference over the mean. Defined as 0 when both are equal,
/// which covers the 0/0 case.
pub fn percent_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / (0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Term;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0]).unwrap(), 0.0);
        assert_eq!(entropy(&[]).unwrap(), 0.0);
        for k in 1..10 {
            let u = vec![1.0 / k as f64; k];
            let h = entropy(&u).unwrap();
            assert!((h - (k as f64).ln()).abs() <= 1e-12 * (k as f64).ln().max(1.0));
        }
        let h = entropy(&[0.5, 0.25, 0.25]).unwrap();
        assert!((h - 1.0397207708399179).abs() < 1e-12);
        assert_eq!(entropy(&[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_bad_mass() {
        assert!(entropy(&[0.5, 0.6]).is_err());
        assert!(entropy(&[-0.1, 1.1]).is_err());
        assert!(entropy(&[f64::NAN]).is_err());
    }

    #[test]
    fn normalized_entropy_examples() {
        assert_eq!(normalized_entropy(0.0, 7).unwrap(), 0.0);
        assert!((normalized_entropy((50f64).ln(), 50).unwrap() - 1.0).abs() < 1e-15);
        let hn = normalized_entropy(1.0397, 100).unwrap();
        assert!((hn - 0.22577).abs() < 1e-4);
        assert!(matches!(normalized_entropy(1.0, 1), Err(Error::TooFewPosts(1))));
        assert!(normalized_entropy(1.0, 0).is_err());
    }

    #[test]
    fn percent_diff_examples() {
        assert_eq!(percent_diff(0.3, 0.3), 0.0);
        assert_eq!(percent_diff(0.0, 0.0), 0.0);
        assert!((percent_diff(0.2, 0.3) - 0.4).abs() < 1e-15);
        assert_eq!(percent_diff(0.2, 0.3), percent_diff(0.3, 0.2));
    }

    fn refset(rows: &[&[&str]]) -> ReferenceSet {
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        ReferenceSet::new(
            width,
            rows.iter()
                .map(|r| r.iter().map(|v| Term::parse(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn label_distribution_table1() {
        let posts = Corpus::from_texts([
            "Honda civic is cool",
            "Look at cheap Honda civic",
            "Honda accord rules",
            "A Honda accord 4 u!",
        ]);
        let rs = refset(&[&["honda", "civic"], &["honda", "accord"]]);
        let d = label_distribution(&posts, &rs, 1).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d["civic"], 0.5);
        assert_eq!(d["accord"], 0.5);
        let d0 = label_distribution(&posts, &rs, 0).unwrap();
        assert_eq!(d0["honda"], 1.0);
        assert!(label_distribution(&posts, &rs, 2).is_none());
        assert!(label_distribution(&Corpus::default(), &rs, 0).is_none());
    }

    #[test]
    fn label_distribution_splits_multi_token_values() {
        let posts = Corpus::from_texts(["ford crown victoria", "ford crown victoria lx", "ford focus"]);
        let rs = refset(&[&["ford", "crown victoria"], &["ford", "focus"]]);
        let d = label_distribution(&posts, &rs, 1).unwrap();
        assert_eq!(d["crown"], 0.4);
        assert_eq!(d["victoria"], 0.4);
        assert!((d["focus"] - 0.2).abs() < 1e-15);
    }
}
