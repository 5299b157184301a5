//! Reference-set construction in three modes: rooted on seeds, unrooted,
//! and batch-wise with entropy-driven level locking.

pub mod entropy;
mod ila;
mod locking;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{CooccurrenceStats, Corpus, Term};
use crate::error::{Error, Result};
use crate::forest::{expand_children, general_token_fixpoint, EntityForest, GeneralAttachment, NodeId};
use crate::refset::ReferenceSet;
use crate::subsumption::{subsumes, SubsumptionConfig, TermBigrams, TermVocabulary};

pub use entropy::{entropy, label_distribution, normalized_entropy, percent_diff, Distribution};
pub use ila::{ila_mine, IlaConfig, IlaOutcome, IlaSnapshot, LockTraceRecord, DEFAULT_BATCH_STEP};
pub use locking::{locking_step, GreedyMinimum, LevelEvaluation, LevelLock, LockRule, LockState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MinerConfig {
    pub subsumption: SubsumptionConfig,
    /// Run general-token rounds to a fixpoint; `false` is the single-pass variant.
    pub general_tokens: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            subsumption: SubsumptionConfig::default(),
            general_tokens: true,
        }
    }
}

/// Normalized, deduplicated seed terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet(BTreeSet<Term>);

impl SeedSet {
    pub fn new<I, S>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let seeds: BTreeSet<Term> = raw.into_iter().filter_map(|s| Term::parse(s.as_ref())).collect();
        if seeds.is_empty() {
            return Err(Error::EmptySeedSet);
        }
        Ok(SeedSet(seeds))
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.0.iter()
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Where entity trees may start.
#[derive(Debug, Clone, Copy)]
pub enum Roots<'a> {
    /// Only seed values may root a tree.
    Seeds(&'a SeedSet),
    /// Any term that subsumes something and is subsumed by nothing.
    Unconstrained,
    /// Levels `0..depth` are copied from `forest` and closed to new
    /// values; growth starts from the nodes at `depth - 1`.
    Locked { forest: &'a EntityForest, depth: usize },
}

#[derive(Debug, Clone)]
pub struct MiningOutcome {
    pub forest: EntityForest,
    pub reference_set: ReferenceSet,
    /// Multi-token terms produced by mutual-subsumption merging.
    pub merged_terms: Vec<Term>,
    /// General tokens accepted per round, in round order.
    pub general_rounds: Vec<Vec<GeneralAttachment>>,
    pub warnings: Vec<String>,
}

/// Builds the forest for one corpus: statistics, term merging, pairwise
/// growth, singleton pruning, then general-token rounds.
pub fn build_forest(corpus: &Corpus, roots: Roots<'_>, cfg: &MinerConfig) -> Result<MiningOutcome> {
    cfg.subsumption.validate()?;
    let scfg = &cfg.subsumption;
    let stats = CooccurrenceStats::build(corpus);
    let mut warnings = Vec::new();

    let fixed: Vec<Term> = match roots {
        Roots::Seeds(seeds) => seeds.terms().cloned().collect(),
        Roots::Unconstrained => Vec::new(),
        Roots::Locked { forest, depth } => forest.truncate(depth).terms().into_iter().cloned().collect(),
    };
    let vocab = TermVocabulary::build(&stats, scfg, &fixed)?;
    let bigrams = TermBigrams::build(&stats, &vocab);

    let mut protected = BTreeSet::new();
    let (mut forest, frontier, min_child_depth): (EntityForest, Vec<NodeId>, usize) = match roots {
        Roots::Seeds(seeds) => {
            let mut f = EntityForest::new();
            for seed in seeds.terms() {
                if stats.post_count(seed) > 0 {
                    f.add_root(seed.clone());
                }
            }
            let frontier = f.roots().collect();
            (f, frontier, 0)
        }
        Roots::Unconstrained => {
            let mut parents = BTreeSet::new();
            let mut children = BTreeSet::new();
            for (x, y) in bigrams.pairs() {
                if subsumes(&stats, x, y, scfg) {
                    parents.insert(x);
                    children.insert(y);
                }
            }
            let mut f = EntityForest::new();
            for root in parents.difference(&children) {
                f.add_root((*root).clone());
            }
            let frontier = f.roots().collect();
            (f, frontier, 0)
        }
        Roots::Locked { forest, depth } => {
            if depth == 0 {
                return Err(Error::InvalidConfig("locked depth must be at least 1".into()));
            }
            let f = forest.truncate(depth);
            protected.extend(f.root_terms().cloned());
            let frontier = f.nodes_at_depth(depth - 1);
            (f, frontier, depth)
        }
    };

    expand_children(&mut forest, &stats, &bigrams, scfg, &frontier, min_child_depth);
    forest = forest.prune_singletons_except(&protected);

    let general_rounds = if cfg.general_tokens {
        general_token_fixpoint(&mut forest, &stats, &bigrams, scfg, min_child_depth)
    } else {
        Vec::new()
    };
    forest = forest.prune_singletons_except(&protected);

    if let Roots::Seeds(_) = roots {
        if forest.is_empty() {
            warnings.push("no seed rooted an entity tree".to_owned());
        }
    }

    let reference_set = forest.flatten();
    Ok(MiningOutcome {
        forest,
        reference_set,
        merged_terms: vocab.merged_terms().to_vec(),
        general_rounds,
        warnings,
    })
}

/// Trees rooted only on seeds. Seeds that never root a tree are dropped.
pub fn mine_seeded(corpus: &Corpus, seeds: &SeedSet, cfg: &MinerConfig) -> Result<MiningOutcome> {
    if seeds.is_empty() {
        return Err(Error::EmptySeedSet);
    }
    build_forest(corpus, Roots::Seeds(seeds), cfg)
}

/// Trees rooted on any term the rule allows.
pub fn mine_unseeded(corpus: &Corpus, cfg: &MinerConfig) -> Result<MiningOutcome> {
    build_forest(corpus, Roots::Unconstrained, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        Term::from(s)
    }

    fn table1() -> Corpus {
        Corpus::from_texts([
            "Honda civic is cool",
            "Look at cheap Honda civic",
            "Honda accord rules",
            "A Honda accord 4 u!",
        ])
    }

    #[test]
    fn seeded_table1_level_one() {
        let seeds = SeedSet::new(["Honda"]).unwrap();
        let out = mine_seeded(&table1(), &seeds, &MinerConfig::default()).unwrap();
        assert_eq!(
            out.forest.terms_at_depth(1),
            [t("accord"), t("civic")].into_iter().collect()
        );
        assert_eq!(out.forest.root_terms().collect::<Vec<_>>(), vec![&t("honda")]);
        assert_eq!(
            out.forest.render(),
            "honda\n  accord\n    4 u\n    rules\n  civic\n    is cool\n"
        );
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn seeded_drops_absent_and_bare_seeds() {
        let seeds = SeedSet::new(["honda", "kia", "cheap"]).unwrap();
        let out = mine_seeded(&table1(), &seeds, &MinerConfig::default()).unwrap();
        assert_eq!(out.forest.root_terms().collect::<Vec<_>>(), vec![&t("honda")]);
    }

    #[test]
    fn no_tree_warns() {
        let seeds = SeedSet::new(["kia"]).unwrap();
        let out = mine_seeded(&table1(), &seeds, &MinerConfig::default()).unwrap();
        assert!(out.reference_set.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn empty_seed_set_is_an_error() {
        assert!(matches!(SeedSet::new(["", " - "]), Err(Error::EmptySeedSet)));
    }

    #[test]
    fn unseeded_table1() {
        let out = mine_unseeded(&table1(), &MinerConfig::default()).unwrap();
        assert_eq!(out.forest.root_terms().collect::<Vec<_>>(), vec![&t("honda")]);
        assert_eq!(out.reference_set.len(), 3);
        assert!(out.merged_terms.contains(&t("is cool")));
    }

    #[test]
    fn unseeded_empty_corpus() {
        let out = mine_unseeded(&Corpus::default(), &MinerConfig::default()).unwrap();
        assert!(out.reference_set.is_empty());
        assert!(out.forest.is_empty());
    }

    #[test]
    fn free_shipping_tree_only_without_seeds() {
        let c = Corpus::from_texts([
            "honda civic free shipping",
            "honda accord free handling",
            "ford focus free shipping",
            "honda civic",
            "ford focus free handling",
        ]);
        let unseeded = mine_unseeded(&c, &MinerConfig::default()).unwrap();
        assert!(unseeded.forest.root(&t("free")).is_some());
        let seeds = SeedSet::new(["honda", "ford"]).unwrap();
        let seeded = mine_seeded(&c, &seeds, &MinerConfig::default()).unwrap();
        assert!(seeded.forest.root(&t("free")).is_none());
    }

    #[test]
    fn locked_levels_accept_no_new_values() {
        let early = Corpus::from_texts(["honda civic", "honda accord", "honda civic"]);
        let first = mine_unseeded(&early, &MinerConfig::default()).unwrap();
        let later = Corpus::from_texts([
            "honda civic",
            "honda accord",
            "honda civic",
            "brand new",
            "brand new",
            "honda civic lx",
        ]);
        let out = build_forest(
            &later,
            Roots::Locked {
                forest: &first.forest,
                depth: 1,
            },
            &MinerConfig::default(),
        )
        .unwrap();
        assert_eq!(out.forest.terms_at_depth(0), first.forest.terms_at_depth(0));
        assert!(out.forest.root(&t("brand")).is_none());
    }
}
