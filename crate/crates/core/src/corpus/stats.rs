use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{Corpus, Post, Term};
use crate::error::{Error, Result};

const CHUNK: usize = 256;

/// Occurrence data for one ordered bigram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BigramInfo {
    /// Adjacent occurrences over the whole corpus (not post-level).
    pub frequency: usize,
    /// `(post index, token position)` of the first occurrence.
    pub first_seen: (usize, usize),
}

/// Post-level token counts and the ordered bigram candidate set.
///
/// Counts are set-valued per post: a token repeated inside one post counts
/// once. Term-level queries intersect token posting lists, so a multi-token
/// term counts the posts that contain all of its tokens.
#[derive(Debug, Clone, Default)]
pub struct CooccurrenceStats {
    num_posts: usize,
    postings: HashMap<String, Vec<u32>>,
    bigrams: BTreeMap<(String, String), BigramInfo>,
}

#[derive(Default)]
struct Partial {
    postings: HashMap<String, Vec<u32>>,
    bigrams: HashMap<(String, String), BigramInfo>,
}

impl Partial {
    fn add_post(&mut self, index: usize, post: &Post) {
        let mut seen: Vec<&str> = post.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for token in seen {
            self.postings.entry(token.to_owned()).or_default().push(index as u32);
        }
        for (pos, w) in post.tokens.windows(2).enumerate() {
            if w[0] == w[1] {
                continue;
            }
            let info = self.bigrams.entry((w[0].clone(), w[1].clone())).or_insert(BigramInfo {
                frequency: 0,
                first_seen: (index, pos),
            });
            info.frequency += 1;
            info.first_seen = info.first_seen.min((index, pos));
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (token, list) in other.postings {
            self.postings.entry(token).or_default().extend(list);
        }
        for (pair, info) in other.bigrams {
            self.bigrams
                .entry(pair)
                .and_modify(|mine| {
                    mine.frequency += info.frequency;
                    mine.first_seen = mine.first_seen.min(info.first_seen);
                })
                .or_insert(info);
        }
        self
    }
}

impl CooccurrenceStats {
    /// Parallel fold over post chunks. The merge is commutative and posting
    /// lists are sorted afterwards, so the result does not depend on the
    /// number of worker threads.
    pub fn build(corpus: &Corpus) -> Self {
        let partial = corpus
            .posts()
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(chunk, posts)| {
                let mut p = Partial::default();
                for (i, post) in posts.iter().enumerate() {
                    p.add_post(chunk * CHUNK + i, post);
                }
                p
            })
            .reduce(Partial::default, Partial::merge);

        let mut postings = partial.postings;
        for list in postings.values_mut() {
            list.sort_unstable();
        }
        CooccurrenceStats {
            num_posts: corpus.len(),
            postings,
            bigrams: partial.bigrams.into_iter().collect(),
        }
    }

    pub fn num_posts(&self) -> usize {
        self.num_posts
    }

    /// Distinct tokens, sorted.
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.postings.keys().map(String::as_str).collect();
        v.sort_unstable();
        v
    }

    fn token_postings(&self, token: &str) -> &[u32] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sorted indices of the posts containing every token of `term`.
    pub fn term_postings(&self, term: &Term) -> Cow<'_, [u32]> {
        let mut tokens = term.tokens();
        let first = self.token_postings(tokens.next().unwrap_or(""));
        let mut acc: Option<Vec<u32>> = None;
        for token in tokens {
            let next = self.token_postings(token);
            let cur = acc.as_deref().unwrap_or(first);
            acc = Some(intersect(cur, next));
        }
        match acc {
            Some(v) => Cow::Owned(v),
            None => Cow::Borrowed(first),
        }
    }

    pub fn post_count(&self, term: &Term) -> usize {
        self.term_postings(term).len()
    }

    pub fn pair_post_count(&self, x: &Term, y: &Term) -> usize {
        intersect(&self.term_postings(x), &self.term_postings(y)).len()
    }

    pub fn union_post_count(&self, set: &[Term]) -> usize {
        self.union_postings(set).len()
    }

    pub fn union_pair_post_count(&self, set: &[Term], q: &Term) -> usize {
        intersect(&self.union_postings(set), &self.term_postings(q)).len()
    }

    fn union_postings(&self, set: &[Term]) -> Vec<u32> {
        let mut all: Vec<u32> = set.iter().flat_map(|t| self.term_postings(t).into_owned()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// `P(x | y)`: share of the posts containing `y` that also contain `x`.
    /// Zero when `y` never occurs.
    pub fn cond_prob(&self, x: &Term, y: &Term) -> f64 {
        ratio(self.pair_post_count(x, y), self.post_count(y))
    }

    /// `P(∪set | q)`: share of the posts containing `q` that contain at
    /// least one term of `set`.
    pub fn union_cond_prob(&self, set: &[Term], q: &Term) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::EmptyTermSet);
        }
        Ok(ratio(self.union_pair_post_count(set, q), self.post_count(q)))
    }

    /// `P(q | ∪set)`, the reverse direction of [`Self::union_cond_prob`].
    pub fn cond_prob_given_union(&self, q: &Term, set: &[Term]) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::EmptyTermSet);
        }
        Ok(ratio(self.union_pair_post_count(set, q), self.union_post_count(set)))
    }

    pub fn ordered_bigrams(&self) -> impl Iterator<Item = (&str, &str, &BigramInfo)> {
        self.bigrams.iter().map(|((a, b), info)| (a.as_str(), b.as_str(), info))
    }

    pub fn bigram(&self, first: &str, second: &str) -> Option<&BigramInfo> {
        self.bigrams.get(&(first.to_owned(), second.to_owned()))
    }

    pub fn has_bigram(&self, first: &str, second: &str) -> bool {
        self.bigram(first, second).is_some()
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
