//! Baseline reference-set extractor and field-level scoring.
//!
//! Each post is matched to the tuple sharing the most tokens with it, and
//! the tuple's values are labeled where they occur in the post. A field is
//! one (post, column) pair; it is correct only when the labeled token
//! positions equal the gold positions exactly.
//!
//! Gold files are JSON Lines, one post per line:
//!
//! ```text
//! {"id": "7", "text": "2004 Honda Accord 4 Dr DX", "labels": {"0": [[1,2]], "1": [[2,3]], "2": [[3,6]]}}
//! ```
//!
//! Label keys are column indexes, spans are half-open token ranges over the
//! default tokenization of `text`. A column may be omitted or list no spans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::corpus::{Post, Term};
use crate::error::{Error, Result};
use crate::refset::{default_label, ReferenceSet, Tuple};

/// Half-open token range `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn positions(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldPost {
    pub post: Post,
    /// Column index to labeled spans, sorted by start.
    pub labels: BTreeMap<usize, Vec<Span>>,
}

impl GoldPost {
    /// Checks that spans are non-empty, inside the post, and disjoint per column.
    pub fn new(post: Post, labels: BTreeMap<usize, Vec<Span>>) -> Result<Self> {
        let mut checked = BTreeMap::new();
        for (col, mut spans) in labels {
            spans.sort();
            for s in &spans {
                if s.is_empty() || s.end > post.tokens.len() {
                    return Err(Error::MalformedGold {
                        id: post.id.clone(),
                        reason: format!(
                            "span [{}, {}) for column {col} is outside the {} tokens",
                            s.start,
                            s.end,
                            post.tokens.len()
                        ),
                    });
                }
            }
            if let Some(w) = spans.windows(2).find(|w| w[1].start < w[0].end) {
                return Err(Error::MalformedGold {
                    id: post.id.clone(),
                    reason: format!(
                        "spans [{}, {}) and [{}, {}) overlap in column {col}",
                        w[0].start, w[0].end, w[1].start, w[1].end
                    ),
                });
            }
            if !spans.is_empty() {
                checked.insert(col, spans);
            }
        }
        Ok(GoldPost { post, labels: checked })
    }

    pub fn spans(&self, column: usize) -> &[Span] {
        self.labels.get(&column).map_or(&[], Vec::as_slice)
    }

    /// One past the largest labeled column, 0 when nothing is labeled.
    pub fn width(&self) -> usize {
        self.labels.keys().next_back().map_or(0, |c| c + 1)
    }
}

#[derive(Deserialize)]
struct GoldRecord {
    id: serde_json::Value,
    text: String,
    #[serde(default)]
    labels: BTreeMap<String, Vec<(usize, usize)>>,
}

/// Parses gold JSON Lines; blank lines are skipped.
pub fn parse_gold(content: &str) -> Result<Vec<GoldPost>> {
    let mut gold = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = (i + 1).to_string();
        let rec: GoldRecord = serde_json::from_str(line).map_err(|e| Error::MalformedGold {
            id: format!("line {lineno}"),
            reason: e.to_string(),
        })?;
        let id = match rec.id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(Error::MalformedGold {
                    id: format!("line {lineno}"),
                    reason: format!("id must be a string or number, got {other}"),
                })
            }
        };
        let mut labels = BTreeMap::new();
        for (key, spans) in rec.labels {
            let col: usize = key.parse().map_err(|_| Error::MalformedGold {
                id: id.clone(),
                reason: format!("label key {key:?} is not a column index"),
            })?;
            labels.insert(col, spans.into_iter().map(|(s, e)| Span::new(s, e)).collect());
        }
        gold.push(GoldPost::new(Post::new(id, rec.text), labels)?);
    }
    Ok(gold)
}

pub fn read_gold(path: &Path) -> Result<Vec<GoldPost>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gold(&content)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionResult {
    pub matched: Option<Tuple>,
    /// Labeled spans per column, sorted.
    pub spans: Vec<Vec<Span>>,
}

/// (tokens present, columns with at least one token present)
fn overlap(tokens: &BTreeSet<&str>, tuple: &Tuple) -> (usize, usize) {
    let mut score = 0;
    let mut columns = 0;
    for value in tuple.iter().flatten() {
        let hits = value.tokens().filter(|t| tokens.contains(t)).count();
        score += hits;
        columns += usize::from(hits > 0);
    }
    (score, columns)
}

/// Best tuple for `post`: most value tokens present in the post, then most
/// columns hit, then the lexicographically smallest tuple. `None` when no
/// tuple shares a token with the post.
pub fn match_post<'r>(post: &Post, refset: &'r ReferenceSet) -> Option<&'r Tuple> {
    let tokens: BTreeSet<&str> = post.tokens.iter().map(String::as_str).collect();
    let mut best: Option<((usize, usize), &Tuple)> = None;
    // Tuples are sorted, so the first tuple reaching a score wins ties.
    for tuple in refset.tuples() {
        let key = overlap(&tokens, tuple);
        if key.0 == 0 {
            continue;
        }
        if best.is_none_or(|(b, _)| key > b) {
            best = Some((key, tuple));
        }
    }
    best.map(|(_, t)| t)
}

fn label_value(tokens: &[String], value: &Term) -> Vec<Span> {
    let needle: Vec<&str> = value.tokens().collect();
    if let Some(start) = tokens
        .windows(needle.len())
        .position(|w| w.iter().map(String::as_str).eq(needle.iter().copied()))
    {
        return vec![Span::new(start, start + needle.len())];
    }
    let mut spans: Vec<Span> = needle
        .iter()
        .filter_map(|n| tokens.iter().position(|t| t == n))
        .map(|i| Span::new(i, i + 1))
        .collect();
    spans.sort();
    spans.dedup();
    spans
}

/// Labels each column value of `tuple` in `post`: the first contiguous
/// occurrence as one span, otherwise the first occurrence of each of its
/// tokens separately.
pub fn extract(post: &Post, tuple: &Tuple) -> ExtractionResult {
    let spans = tuple
        .iter()
        .map(|v| v.as_ref().map_or_else(Vec::new, |v| label_value(&post.tokens, v)))
        .collect();
    ExtractionResult {
        matched: Some(tuple.clone()),
        spans,
    }
}

/// Match and extract in one step; an unmatched post yields no spans.
pub fn extract_post(post: &Post, refset: &ReferenceSet) -> ExtractionResult {
    match match_post(post, refset) {
        Some(t) => extract(post, t),
        None => ExtractionResult {
            matched: None,
            spans: vec![Vec::new(); refset.width()],
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnScore {
    pub label: String,
    /// Fields with a gold label.
    pub expected: usize,
    /// Fields the extractor labeled.
    pub attempted: usize,
    pub correct: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ColumnScore {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.attempted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.expected)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub columns: Vec<ColumnScore>,
}

pub const REPORT_HEADER: &str = "column,label,expected,attempted,correct,precision,recall,f1";

impl EvalReport {
    /// One row per column, ratios with four decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(REPORT_HEADER.split(','))?;
        for (i, c) in self.columns.iter().enumerate() {
            w.write_record([
                i.to_string(),
                c.label.clone(),
                c.expected.to_string(),
                c.attempted.to_string(),
                c.correct.to_string(),
                format!("{:.4}", c.precision()),
                format!("{:.4}", c.recall()),
                format!("{:.4}", c.f1()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    /// Fixed-width table for terminals.
    pub fn summary(&self) -> String {
        let width = self.columns.iter().map(|c| c.label.len()).max().unwrap_or(0).max(6);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<width$}  {:>8}  {:>9}  {:>7}  {:>9}  {:>6}  {:>6}",
            "column", "expected", "attempted", "correct", "precision", "recall", "f1"
        );
        for c in &self.columns {
            let _ = writeln!(
                s,
                "{:<width$}  {:>8}  {:>9}  {:>7}  {:>9.4}  {:>6.4}  {:>6.4}",
                c.label,
                c.expected,
                c.attempted,
                c.correct,
                c.precision(),
                c.recall(),
                c.f1()
            );
        }
        s
    }
}

fn positions(spans: &[Span]) -> BTreeSet<usize> {
    spans.iter().flat_map(Span::positions).collect()
}

/// Field-level scores of `predictions[i]` (spans per column) against
/// `gold[i]`. Column labels come from `labels`, then `attributeN`.
pub fn score_fields(gold: &[GoldPost], predictions: &[Vec<Vec<Span>>], labels: &[String]) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    if gold.len() != predictions.len() {
        return Err(Error::InvalidConfig(format!(
            "{} gold posts but {} predictions",
            gold.len(),
            predictions.len()
        )));
    }
    let width = gold
        .iter()
        .map(GoldPost::width)
        .chain(predictions.iter().map(Vec::len))
        .chain([labels.len()])
        .max()
        .unwrap_or(0);
    let mut columns: Vec<ColumnScore> = (0..width)
        .map(|i| ColumnScore {
            label: labels.get(i).cloned().unwrap_or_else(|| default_label(i)),
            expected: 0,
            attempted: 0,
            correct: 0,
        })
        .collect();
    for (g, pred) in gold.iter().zip(predictions) {
        for (col, score) in columns.iter_mut().enumerate() {
            let want = positions(g.spans(col));
            let got = positions(pred.get(col).map_or(&[], Vec::as_slice));
            score.expected += usize::from(!want.is_empty());
            score.attempted += usize::from(!got.is_empty());
            score.correct += usize::from(!want.is_empty() && want == got);
        }
    }
    Ok(EvalReport { columns })
}

/// Runs the baseline extractor over every gold post and scores it.
pub fn evaluate(gold: &[GoldPost], refset: &ReferenceSet) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let predictions: Vec<Vec<Vec<Span>>> = gold.par_iter().map(|g| extract_post(&g.post, refset).spans).collect();
    score_fields(gold, &predictions, refset.columns())
}
