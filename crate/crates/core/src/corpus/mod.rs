//! Posts, tokenization and corpus-level co-occurrence statistics.
//!
//! A post is a short free-text record such as a classified ad or an auction
//! title. Everything downstream works on the normalized token sequence of a
//! post and on post-level counts computed by [`CooccurrenceStats`].

mod io;
mod stats;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{read_posts, read_seeds, read_stoplist, InputFormat};
pub use stats::{BigramInfo, CooccurrenceStats};

/// Lowercase, split on whitespace and strip leading/trailing punctuation.
///
/// Interior characters are kept, so model numbers such as `t41` or `4x4`
/// survive intact. Tokens that are pure punctuation disappear.
pub fn tokenize(raw: &str) -> Vec<String> {
    raw.split_whitespace().filter_map(normalize_token).collect()
}

fn normalize_token(word: &str) -> Option<String> {
    // Lowercase first: some case mappings emit combining marks that the
    // trim below must see, or re-tokenizing would not be a no-op.
    let lower = word.to_lowercase();
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_owned())
    }
}

/// Tokenizer with an optional stoplist applied after normalization.
#[derive(Debug, Clone, Default)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stopwords are normalized the same way as post text.
    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let stopwords = words.into_iter().flat_map(|w| tokenize(w.as_ref())).collect();
        Self { stopwords }
    }

    pub fn tokenize(&self, raw: &str) -> Vec<String> {
        let mut tokens = tokenize(raw);
        if !self.stopwords.is_empty() {
            tokens.retain(|t| !self.stopwords.contains(t));
        }
        tokens
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }
}

/// An attribute value: one token or a merged multi-token phrase.
///
/// Stored as the space-joined token sequence. A term is present in a post
/// when every one of its tokens occurs in that post.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Term(String);

impl Term {
    /// Builds a term from raw text, normalizing it like post text.
    /// Returns `None` when nothing survives tokenization.
    pub fn parse(raw: &str) -> Option<Term> {
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            None
        } else {
            Some(Term(tokens.join(" ")))
        }
    }

    /// Term from an already-normalized token.
    pub fn unigram(token: impl Into<String>) -> Term {
        Term(token.into())
    }

    pub fn from_tokens<I, S>(tokens: I) -> Term
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let parts: Vec<String> = tokens.into_iter().map(|t| t.as_ref().to_owned()).collect();
        Term(parts.join(" "))
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + Clone {
        self.0.split(' ')
    }

    pub fn len(&self) -> usize {
        self.tokens().count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first_token(&self) -> &str {
        self.tokens().next().unwrap_or("")
    }

    pub fn last_token(&self) -> &str {
        self.tokens().last().unwrap_or("")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Concatenation of two terms, `self` first.
    pub fn join(&self, other: &Term) -> Term {
        Term(format!("{} {}", self.0, other.0))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::parse(s).unwrap_or_else(|| Term(String::new()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub raw: String,
    pub tokens: Vec<String>,
}

impl Post {
    pub fn new(id: impl Into<String>, raw: impl Into<String>) -> Self {
        Self::with_tokenizer(id, raw, &Tokenizer::default())
    }

    pub fn with_tokenizer(id: impl Into<String>, raw: impl Into<String>, tokenizer: &Tokenizer) -> Self {
        let raw = raw.into();
        let tokens = tokenizer.tokenize(&raw);
        Post {
            id: id.into(),
            raw,
            tokens,
        }
    }

    pub fn contains_token(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }
}

/// Ordered collection of posts. Order matters: batch prefixes in the
/// locking miner are taken from the front.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    posts: Vec<Post>,
}

impl Corpus {
    pub fn new(posts: Vec<Post>) -> Self {
        Corpus { posts }
    }

    /// Posts numbered from 1 in input order.
    pub fn from_texts<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let posts = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Post::new((i + 1).to_string(), t.as_ref()))
            .collect();
        Corpus { posts }
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn push(&mut self, post: Post) {
        self.posts.push(post);
    }

    /// The first `n` posts (all of them when `n` exceeds the size).
    pub fn prefix(&self, n: usize) -> Corpus {
        Corpus {
            posts: self.posts[..n.min(self.posts.len())].to_vec(),
        }
    }

    /// Every ordered adjacent token pair with distinct tokens.
    pub fn bigrams(&self) -> std::collections::BTreeSet<(String, String)> {
        self.posts
            .iter()
            .flat_map(|p| p.tokens.windows(2))
            .filter(|w| w[0] != w[1])
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_basic_post() {
        assert_eq!(tokenize("Honda civic is cool"), toks(&["honda", "civic", "is", "cool"]));
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t ").is_empty());
    }

    #[test]
    fn tokenize_strips_punctuation_and_keeps_model_numbers() {
        assert_eq!(
            tokenize("2001 Nissan Pathfinder LE - $15000"),
            toks(&["2001", "nissan", "pathfinder", "le", "15000"])
        );
        assert_eq!(tokenize("IBM T41, (mint)!"), toks(&["ibm", "t41", "mint"]));
        assert_eq!(
            tokenize("A Honda accord 4 u!"),
            toks(&["a", "honda", "accord", "4", "u"])
        );
        assert_eq!(tokenize("w/ 145K,Remote"), toks(&["w", "145k,remote"]));
    }

    #[test]
    fn tokenize_is_idempotent_on_examples() {
        for raw in [
            "98 Corolla LE 145K, Remote entry w/ alarm, $4600",
            "—  $$ ..",
            "Ünïcode Straße",
        ] {
            let once = tokenize(raw);
            assert_eq!(tokenize(&once.join(" ")), once);
        }
    }

    #[test]
    fn stoplist_filters_after_normalization() {
        let t = Tokenizer::with_stopwords(["The", "for"]);
        assert_eq!(t.tokenize("The skis for sale"), toks(&["skis", "sale"]));
    }

    #[test]
    fn bigrams_of_single_post() {
        let c = Corpus::from_texts(["honda civic is cool"]);
        let got: Vec<_> = c.bigrams().into_iter().collect();
        let want = vec![
            ("civic".to_string(), "is".to_string()),
            ("honda".to_string(), "civic".to_string()),
            ("is".to_string(), "cool".to_string()),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn bigrams_skip_single_tokens_and_self_pairs() {
        let c = Corpus::from_texts(["honda", "very very nice"]);
        let got: Vec<_> = c.bigrams().into_iter().collect();
        assert_eq!(got, vec![("very".to_string(), "nice".to_string())]);
    }

    #[test]
    fn term_parse_and_tokens() {
        let t = Term::parse("Crown  Victoria").unwrap();
        assert_eq!(t.as_str(), "crown victoria");
        assert_eq!(t.len(), 2);
        assert_eq!(t.first_token(), "crown");
        assert_eq!(t.last_token(), "victoria");
        assert!(Term::parse(" - ").is_none());
    }
}
