//! The asymmetric co-occurrence subsumption rule, its union form for
//! general tokens, and mutual-subsumption merging of adjacent tokens into
//! multi-token terms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{BigramInfo, CooccurrenceStats, Term};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.75;
pub const DEFAULT_MIN_COOCCUR: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubsumptionConfig {
    /// Minimum `P(parent | child)`.
    pub threshold: f64,
    /// Minimum number of posts in which parent and child co-occur.
    pub min_cooccur: usize,
    /// Also require `P(q | ∪parents) <= P(∪parents | q)` in the union rule.
    pub two_sided_union: bool,
}

impl Default for SubsumptionConfig {
    fn default() -> Self {
        SubsumptionConfig {
            threshold: DEFAULT_THRESHOLD,
            min_cooccur: DEFAULT_MIN_COOCCUR,
            two_sided_union: true,
        }
    }
}

impl SubsumptionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold must be in (0, 1], got {}",
                self.threshold
            )));
        }
        if self.min_cooccur < 1 {
            return Err(Error::InvalidConfig("min-cooccur must be at least 1".into()));
        }
        Ok(())
    }
}

/// `x` subsumes `y`: they co-occur in at least `min_cooccur` posts,
/// `P(x|y) >= threshold` and `P(y|x) <= P(x|y)`.
pub fn subsumes(stats: &CooccurrenceStats, x: &Term, y: &Term, cfg: &SubsumptionConfig) -> bool {
    if x == y {
        return false;
    }
    let pair = stats.pair_post_count(x, y);
    if pair < cfg.min_cooccur {
        return false;
    }
    let x_given_y = stats.cond_prob(x, y);
    let y_given_x = stats.cond_prob(y, x);
    x_given_y >= cfg.threshold && y_given_x <= x_given_y
}

/// Union form of [`subsumes`]: the parents jointly subsume `q`.
pub fn set_subsumes(stats: &CooccurrenceStats, parents: &[Term], q: &Term, cfg: &SubsumptionConfig) -> Result<bool> {
    if parents.is_empty() {
        return Err(Error::EmptyTermSet);
    }
    if parents.contains(q) {
        return Ok(false);
    }
    if stats.union_pair_post_count(parents, q) < cfg.min_cooccur {
        return Ok(false);
    }
    let union_given_q = stats.union_cond_prob(parents, q)?;
    if union_given_q < cfg.threshold {
        return Ok(false);
    }
    if cfg.two_sided_union {
        let q_given_union = stats.cond_prob_given_union(q, parents)?;
        return Ok(q_given_union <= union_given_q);
    }
    Ok(true)
}

pub fn mutually_subsume(stats: &CooccurrenceStats, x: &Term, y: &Term, cfg: &SubsumptionConfig) -> bool {
    subsumes(stats, x, y, cfg) && subsumes(stats, y, x, cfg)
}

/// True when `first` followed by `second` is the dominant adjacency order:
/// higher bigram frequency wins, ties go to the order seen first.
pub fn dominant_order(stats: &CooccurrenceStats, first: &str, second: &str) -> bool {
    prefer_forward(stats.bigram(first, second), stats.bigram(second, first))
}

fn prefer_forward(fwd: Option<&BigramInfo>, rev: Option<&BigramInfo>) -> bool {
    match (fwd, rev) {
        (Some(f), Some(r)) => {
            (f.frequency, std::cmp::Reverse(f.first_seen)) >= (r.frequency, std::cmp::Reverse(r.first_seen))
        }
        (None, Some(_)) => false,
        _ => true,
    }
}

/// Merged term for a mutually subsuming pair, in dominant surface order.
pub fn mutual_merge(stats: &CooccurrenceStats, x: &Term, y: &Term, cfg: &SubsumptionConfig) -> Option<Term> {
    if x == y || !mutually_subsume(stats, x, y, cfg) {
        return None;
    }
    let x_then_y = stats.bigram(x.last_token(), y.first_token());
    let y_then_x = stats.bigram(y.last_token(), x.first_token());
    if prefer_forward(x_then_y, y_then_x) {
        Some(x.join(y))
    } else {
        Some(y.join(x))
    }
}

/// Mapping from tokens to the terms they belong to after merging.
///
/// Merging scans ordered bigrams in first-seen order. Two groups join when
/// every token of one mutually subsumes every token of the other; the
/// triggering bigram's dominant order decides which group goes first.
/// Tokens of fixed terms (seeds, locked values) never merge.
#[derive(Debug, Clone, Default)]
pub struct TermVocabulary {
    term_of: HashMap<String, Term>,
    merged: Vec<Term>,
}

impl TermVocabulary {
    /// No merging: every token is its own term.
    pub fn unigrams() -> Self {
        Self::default()
    }

    pub fn build(stats: &CooccurrenceStats, cfg: &SubsumptionConfig, fixed: &[Term]) -> Result<Self> {
        let mut groups: Vec<(Vec<String>, bool)> = Vec::new();
        let mut group_of: HashMap<String, usize> = HashMap::new();

        for term in fixed {
            let tokens: Vec<String> = term.tokens().map(str::to_owned).collect();
            for tok in &tokens {
                if let Some(&g) = group_of.get(tok) {
                    let other = Term::from_tokens(&groups[g].0);
                    if &other != term {
                        return Err(Error::OverlappingSeeds {
                            first: other.to_string(),
                            second: term.to_string(),
                            token: tok.clone(),
                        });
                    }
                }
            }
            if group_of.contains_key(term.first_token()) {
                continue;
            }
            let g = groups.len();
            for tok in &tokens {
                group_of.insert(tok.clone(), g);
            }
            groups.push((tokens, true));
        }

        let mut candidates: Vec<(&str, &str, (usize, usize))> = stats
            .ordered_bigrams()
            .map(|(a, b, info)| (a, b, info.first_seen))
            .collect();
        candidates.sort_by_key(|c| c.2);

        for (a, b, _) in candidates {
            let ga = group_index(&mut groups, &mut group_of, a);
            let gb = group_index(&mut groups, &mut group_of, b);
            if ga == gb || groups[ga].1 || groups[gb].1 {
                continue;
            }
            let all_mutual = groups[ga].0.iter().all(|u| {
                groups[gb]
                    .0
                    .iter()
                    .all(|v| mutually_subsume(stats, &Term::unigram(u.as_str()), &Term::unigram(v.as_str()), cfg))
            });
            if !all_mutual {
                continue;
            }
            let (keep, absorb) = if dominant_order(stats, a, b) {
                (ga, gb)
            } else {
                (gb, ga)
            };
            let absorbed = std::mem::take(&mut groups[absorb].0);
            for tok in &absorbed {
                group_of.insert(tok.clone(), keep);
            }
            let mut tokens = std::mem::take(&mut groups[keep].0);
            tokens.extend(absorbed);
            groups[keep].0 = tokens;
        }

        let mut vocab = TermVocabulary::default();
        for (tokens, _) in &groups {
            if tokens.len() < 2 {
                continue;
            }
            let term = Term::from_tokens(tokens);
            for tok in tokens {
                vocab.term_of.insert(tok.clone(), term.clone());
            }
            vocab.merged.push(term);
        }
        vocab.merged.sort();
        Ok(vocab)
    }

    pub fn term(&self, token: &str) -> Term {
        self.term_of.get(token).cloned().unwrap_or_else(|| Term::unigram(token))
    }

    /// Multi-token terms, sorted.
    pub fn merged_terms(&self) -> &[Term] {
        &self.merged
    }
}

fn group_index(groups: &mut Vec<(Vec<String>, bool)>, group_of: &mut HashMap<String, usize>, token: &str) -> usize {
    if let Some(&g) = group_of.get(token) {
        return g;
    }
    let g = groups.len();
    groups.push((vec![token.to_owned()], false));
    group_of.insert(token.to_owned(), g);
    g
}

/// Ordered bigrams lifted from tokens to vocabulary terms. A pair whose
/// tokens fall into the same term disappears.
#[derive(Debug, Clone, Default)]
pub struct TermBigrams {
    successors: BTreeMap<Term, BTreeSet<Term>>,
    predecessors: BTreeMap<Term, BTreeSet<Term>>,
}

impl TermBigrams {
    pub fn build(stats: &CooccurrenceStats, vocab: &TermVocabulary) -> Self {
        let mut out = TermBigrams::default();
        for (a, b, _) in stats.ordered_bigrams() {
            let (ta, tb) = (vocab.term(a), vocab.term(b));
            if ta == tb {
                continue;
            }
            out.successors.entry(ta.clone()).or_default().insert(tb.clone());
            out.predecessors.entry(tb).or_default().insert(ta);
        }
        out
    }

    pub fn successors(&self, term: &Term) -> impl Iterator<Item = &Term> {
        self.successors.get(term).into_iter().flatten()
    }

    pub fn predecessors(&self, term: &Term) -> impl Iterator<Item = &Term> {
        self.predecessors.get(term).into_iter().flatten()
    }

    /// Terms that appear first in at least one pair, sorted.
    pub fn heads(&self) -> impl Iterator<Item = &Term> {
        self.successors.keys()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.successors
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (a, b)))
    }
}
