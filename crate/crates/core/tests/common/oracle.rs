//! Brute-force reference miner.
//!
//! Every count is a fresh scan over the posts, adjacency is read straight
//! from token sequences, and forests are plain sets of root paths. Nothing
//! here reuses the indexed statistics, vocabulary or arena forest of the
//! library; only `Term` and the config structs are shared.

use std::collections::{BTreeMap, BTreeSet};

use refmine::{Corpus, SubsumptionConfig, Term};

pub type Paths = BTreeSet<Vec<Term>>;

pub struct Oracle {
    posts: Vec<Vec<String>>,
    cfg: SubsumptionConfig,
}

/// Adjacent distinct token pairs in scan order, with occurrence counts.
fn scan_bigrams(posts: &[Vec<String>]) -> Vec<((String, String), usize)> {
    let mut out: Vec<((String, String), usize)> = Vec::new();
    for p in posts {
        for w in p.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let key = (w[0].clone(), w[1].clone());
            match out.iter_mut().find(|(k, _)| *k == key) {
                Some((_, n)) => *n += 1,
                None => out.push((key, 1)),
            }
        }
    }
    out
}

impl Oracle {
    pub fn new(corpus: &Corpus, cfg: SubsumptionConfig) -> Self {
        Oracle {
            posts: corpus.posts().iter().map(|p| p.tokens.clone()).collect(),
            cfg,
        }
    }

    fn has(post: &[String], term: &Term) -> bool {
        term.tokens().all(|t| post.iter().any(|p| p == t))
    }

    fn count(&self, pred: impl Fn(&[String]) -> bool) -> usize {
        self.posts.iter().filter(|p| pred(p)).count()
    }

    fn ratio(a: usize, b: usize) -> f64 {
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    pub fn subsumes(&self, x: &Term, y: &Term) -> bool {
        if x == y {
            return false;
        }
        let both = self.count(|p| Self::has(p, x) && Self::has(p, y));
        if both < self.cfg.min_cooccur {
            return false;
        }
        let x_given_y = Self::ratio(both, self.count(|p| Self::has(p, y)));
        let y_given_x = Self::ratio(both, self.count(|p| Self::has(p, x)));
        x_given_y >= self.cfg.threshold && y_given_x <= x_given_y
    }

    pub fn union_subsumes(&self, parents: &BTreeSet<Term>, q: &Term) -> bool {
        assert!(!parents.is_empty());
        if parents.contains(q) {
            return false;
        }
        let any = |p: &[String]| parents.iter().any(|t| Self::has(p, t));
        let both = self.count(|p| Self::has(p, q) && any(p));
        if both < self.cfg.min_cooccur {
            return false;
        }
        let u_given_q = Self::ratio(both, self.count(|p| Self::has(p, q)));
        if u_given_q < self.cfg.threshold {
            return false;
        }
        !self.cfg.two_sided_union || Self::ratio(both, self.count(any)) <= u_given_q
    }

    /// Token to term mapping after mutual-subsumption merging.
    pub fn vocabulary(&self, fixed: &BTreeSet<Term>) -> BTreeMap<String, Term> {
        let bigrams = scan_bigrams(&self.posts);
        let freq = |a: &str, b: &str| {
            bigrams
                .iter()
                .position(|((x, y), _)| x == a && y == b)
                .map(|i| (bigrams[i].1, i))
        };
        let mut groups: Vec<(Vec<String>, bool)> = fixed
            .iter()
            .map(|t| (t.tokens().map(str::to_owned).collect(), true))
            .collect();
        let find = |groups: &mut Vec<(Vec<String>, bool)>, tok: &str| -> usize {
            if let Some(i) = groups.iter().position(|g| g.0.iter().any(|t| t == tok)) {
                return i;
            }
            groups.push((vec![tok.to_owned()], false));
            groups.len() - 1
        };
        for ((a, b), _) in &bigrams {
            let ga = find(&mut groups, a);
            let gb = find(&mut groups, b);
            if ga == gb || groups[ga].1 || groups[gb].1 {
                continue;
            }
            let mutual = groups[ga].0.iter().all(|u| {
                groups[gb].0.iter().all(|v| {
                    let (u, v) = (Term::unigram(u.as_str()), Term::unigram(v.as_str()));
                    self.subsumes(&u, &v) && self.subsumes(&v, &u)
                })
            });
            if !mutual {
                continue;
            }
            // Higher frequency wins; on a tie the pair scanned first wins.
            let forward = match (freq(a, b), freq(b, a)) {
                (Some((f, i)), Some((r, j))) => f > r || (f == r && i < j),
                (None, Some(_)) => false,
                _ => true,
            };
            let (first, second) = if forward { (ga, gb) } else { (gb, ga) };
            let moved = std::mem::take(&mut groups[second].0);
            groups[first].0.extend(moved);
        }
        let mut out = BTreeMap::new();
        for (tokens, _) in groups {
            if tokens.len() >= 2 {
                let term = Term::from_tokens(&tokens);
                for t in tokens {
                    out.insert(t, term.clone());
                }
            }
        }
        out
    }

    fn term_of(vocab: &BTreeMap<String, Term>, tok: &str) -> Term {
        vocab.get(tok).cloned().unwrap_or_else(|| Term::unigram(tok))
    }

    /// Terms `b` such that some token of `a` is directly followed by some
    /// token of `b` in a post.
    fn successors(&self, vocab: &BTreeMap<String, Term>, a: &Term) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for p in &self.posts {
            for w in p.windows(2) {
                if w[0] == w[1] {
                    continue;
                }
                let (x, y) = (Self::term_of(vocab, &w[0]), Self::term_of(vocab, &w[1]));
                if &x == a && x != y {
                    out.insert(y);
                }
            }
        }
        out
    }

    fn all_pairs(&self, vocab: &BTreeMap<String, Term>) -> BTreeSet<(Term, Term)> {
        let mut out = BTreeSet::new();
        for p in &self.posts {
            for w in p.windows(2) {
                let (x, y) = (Self::term_of(vocab, &w[0]), Self::term_of(vocab, &w[1]));
                if w[0] != w[1] && x != y {
                    out.insert((x, y));
                }
            }
        }
        out
    }

    fn unfold(&self, vocab: &BTreeMap<String, Term>, paths: &mut Paths, start: Vec<Vec<Term>>, min_len: usize) {
        let mut stack = start;
        while let Some(path) = stack.pop() {
            if path.len() < min_len {
                continue;
            }
            let last = path.last().unwrap().clone();
            for t in self.successors(vocab, &last) {
                if path.contains(&t) {
                    continue;
                }
                let mut next = path.clone();
                next.push(t.clone());
                if paths.contains(&next) || !self.subsumes(&last, &t) {
                    continue;
                }
                paths.insert(next.clone());
                stack.push(next);
            }
        }
    }

    /// Number of rounds that added something.
    fn general_rounds(&self, vocab: &BTreeMap<String, Term>, paths: &mut Paths, min_len: usize) -> usize {
        let mut rounds = 0;
        loop {
            let present: BTreeSet<Term> = paths.iter().flatten().cloned().collect();
            let hosts: Vec<Vec<Term>> = paths.iter().filter(|p| p.len() >= min_len).cloned().collect();
            let host_terms: BTreeSet<Term> = hosts.iter().map(|p| p.last().unwrap().clone()).collect();
            let mut candidates: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
            for h in &host_terms {
                for q in self.successors(vocab, h) {
                    if !present.contains(&q) {
                        candidates.entry(q).or_default().insert(h.clone());
                    }
                }
            }
            let accepted: Vec<(Term, BTreeSet<Term>)> = candidates
                .into_iter()
                .filter(|(q, ps)| self.union_subsumes(ps, q))
                .collect();
            if accepted.is_empty() {
                return rounds;
            }
            rounds += 1;
            for (q, ps) in accepted {
                for h in hosts.iter().filter(|h| ps.contains(h.last().unwrap())) {
                    let mut next = h.clone();
                    next.push(q.clone());
                    paths.insert(next);
                }
            }
        }
    }
}

pub fn prune(paths: &Paths, protected: &BTreeSet<Term>) -> Paths {
    paths
        .iter()
        .filter(|p| p.len() > 1 || protected.contains(&p[0]) || paths.iter().any(|q| q.len() > 1 && q[0] == p[0]))
        .cloned()
        .collect()
}

pub fn truncate(paths: &Paths, k: usize) -> Paths {
    paths.iter().filter(|p| p.len() <= k).cloned().collect()
}

/// Leaf paths padded to the longest path.
pub fn flatten(paths: &Paths) -> BTreeSet<Vec<Option<Term>>> {
    let width = paths.iter().map(Vec::len).max().unwrap_or(0);
    paths
        .iter()
        .filter(|p| !paths.iter().any(|q| q.len() == p.len() + 1 && q.starts_with(p)))
        .map(|p| {
            let mut row: Vec<Option<Term>> = p.iter().cloned().map(Some).collect();
            row.resize(width, None);
            row
        })
        .collect()
}

pub enum OracleRoots<'a> {
    Seeds(&'a BTreeSet<Term>),
    Free,
    Locked(&'a Paths, usize),
}

pub struct OracleForest {
    pub paths: Paths,
    pub general_rounds: usize,
}

pub fn mine(corpus: &Corpus, roots: OracleRoots<'_>, cfg: SubsumptionConfig, general: bool) -> OracleForest {
    let o = Oracle::new(corpus, cfg);
    let fixed: BTreeSet<Term> = match &roots {
        OracleRoots::Seeds(s) => (*s).clone(),
        OracleRoots::Free => BTreeSet::new(),
        OracleRoots::Locked(prev, k) => truncate(prev, *k).into_iter().flatten().collect(),
    };
    let vocab = o.vocabulary(&fixed);
    let mut protected = BTreeSet::new();
    let (mut paths, start, min_len) = match roots {
        OracleRoots::Seeds(seeds) => {
            let paths: Paths = seeds
                .iter()
                .filter(|s| o.count(|p| Oracle::has(p, s)) > 0)
                .map(|s| vec![s.clone()])
                .collect();
            let start = paths.iter().cloned().collect();
            (paths, start, 1)
        }
        OracleRoots::Free => {
            let edges: Vec<(Term, Term)> = o
                .all_pairs(&vocab)
                .into_iter()
                .filter(|(x, y)| o.subsumes(x, y))
                .collect();
            let targets: BTreeSet<&Term> = edges.iter().map(|e| &e.1).collect();
            let paths: Paths = edges
                .iter()
                .filter(|e| !targets.contains(&e.0))
                .map(|e| vec![e.0.clone()])
                .collect();
            let start = paths.iter().cloned().collect();
            (paths, start, 1)
        }
        OracleRoots::Locked(prev, k) => {
            let paths = truncate(prev, k);
            protected = paths.iter().map(|p| p[0].clone()).collect();
            let start = paths.iter().filter(|p| p.len() == k).cloned().collect();
            (paths, start, k)
        }
    };
    o.unfold(&vocab, &mut paths, start, min_len);
    paths = prune(&paths, &protected);
    let general_rounds = if general {
        o.general_rounds(&vocab, &mut paths, min_len)
    } else {
        0
    };
    paths = prune(&paths, &protected);
    OracleForest { paths, general_rounds }
}

/// Shannon entropy from raw counts, `Σ (c/T) ln(T/c)`.
pub fn entropy_from_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| (c as f64 / t) * (t / c as f64).ln())
        .sum()
}

pub fn normalized(h: f64, n: usize) -> f64 {
    h / (n as f64).ln()
}

pub fn pd(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        2.0 * (a - b).abs() / (a + b)
    }
}

/// Occurrence counts of the tokens labeling column `level`, or `None`
/// when nothing is labeled.
pub fn label_counts(corpus: &Corpus, tuples: &BTreeSet<Vec<Option<Term>>>, level: usize) -> Option<Vec<usize>> {
    let tokens: BTreeSet<String> = tuples
        .iter()
        .filter_map(|r| r.get(level).cloned().flatten())
        .flat_map(|t| t.tokens().map(str::to_owned).collect::<Vec<_>>())
        .collect();
    let counts: Vec<usize> = tokens
        .iter()
        .map(|tok| {
            corpus
                .posts()
                .iter()
                .map(|p| p.tokens.iter().filter(|t| *t == tok).count())
                .sum()
        })
        .filter(|&c| c > 0)
        .collect();
    if counts.is_empty() {
        None
    } else {
        Some(counts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTraceRow {
    pub iteration: usize,
    pub posts: usize,
    pub level: usize,
    pub h: f64,
    pub h_n: f64,
    pub pd: f64,
    pub locked_now: bool,
}

pub struct OracleIla {
    /// (posts, locked depth used to build it, paths)
    pub snapshots: Vec<(usize, usize, Paths)>,
    pub trace: Vec<OracleTraceRow>,
    pub converged: bool,
}

/// Batch-wise mining with greedy-minimum level locking.
pub fn ila(stream: &Corpus, start: usize, step: usize, cfg: SubsumptionConfig, general: bool) -> OracleIla {
    let total = stream.len();
    let mut out = OracleIla {
        snapshots: Vec::new(),
        trace: Vec::new(),
        converged: false,
    };
    if total == 0 {
        return out;
    }
    let mut locked: Vec<bool> = Vec::new();
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut n = start.min(total);
    let mut prev = mine(&stream.prefix(n), OracleRoots::Free, cfg, general).paths;
    out.snapshots.push((n, 0, prev.clone()));
    let mut iteration = 0;
    while n < total {
        iteration += 1;
        let m = (n + step).min(total);
        let k = locked.iter().take_while(|&&l| l).count();
        let roots = if k == 0 {
            OracleRoots::Free
        } else {
            OracleRoots::Locked(&prev, k)
        };
        let cur = mine(&stream.prefix(m), roots, cfg, general).paths;

        let width = prev.iter().map(Vec::len).max().unwrap_or(0);
        if locked.len() < width {
            locked.resize(width, false);
            history.resize(width, Vec::new());
        }
        let was_locked = locked.clone();
        let (prev_rows, cur_rows) = (flatten(&prev), flatten(&cur));
        let (prev_posts, cur_posts) = (stream.prefix(n), stream.prefix(m));
        for level in 0..width {
            if was_locked[level] || (level > 0 && !was_locked[level - 1]) || n < 2 {
                continue;
            }
            let (Some(cp), Some(cc)) = (
                label_counts(&prev_posts, &prev_rows, level),
                label_counts(&cur_posts, &cur_rows, level),
            ) else {
                continue;
            };
            let hn_prev = normalized(entropy_from_counts(&cp), n);
            let h = entropy_from_counts(&cc);
            let hn = normalized(h, m);
            let d = pd(hn_prev, hn);
            history[level].push(d);
            let hist = &history[level];
            let lock = d == 0.0 || (hist.len() >= 2 && hist[hist.len() - 1] > hist[hist.len() - 2]);
            if lock {
                locked[level] = true;
            }
            out.trace.push(OracleTraceRow {
                iteration,
                posts: m,
                level,
                h,
                h_n: hn,
                pd: d,
                locked_now: lock,
            });
        }
        out.snapshots.push((m, k, cur.clone()));
        n = m;
        prev = cur;
        if width > 0 && locked.iter().take_while(|&&l| l).count() >= width {
            out.converged = true;
            break;
        }
    }
    out
}
