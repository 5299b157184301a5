use serde::{Deserialize, Serialize};

use super::locking::{locking_step, GreedyMinimum, LockRule, LockState};
use super::{build_forest, MinerConfig, Roots};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::forest::EntityForest;
use crate::refset::ReferenceSet;

pub const DEFAULT_BATCH_STEP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IlaConfig {
    /// Posts in the first batch.
    pub batch_start: usize,
    /// Posts added per iteration.
    pub batch_step: usize,
    pub miner: MinerConfig,
}

impl Default for IlaConfig {
    fn default() -> Self {
        IlaConfig {
            batch_start: DEFAULT_BATCH_STEP,
            batch_step: DEFAULT_BATCH_STEP,
            miner: MinerConfig::default(),
        }
    }
}

/// One line of the lock trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LockTraceRecord {
    pub iteration: usize,
    pub posts_consumed: usize,
    pub level: usize,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "H_N")]
    pub h_n: f64,
    #[serde(rename = "prevH")]
    pub h_prev: f64,
    #[serde(rename = "prevH_N")]
    pub h_n_prev: f64,
    #[serde(rename = "PD")]
    pub pd: f64,
    pub locked_now: bool,
}

/// Forest built at one iteration, and the locked depth it was built under.
#[derive(Debug, Clone)]
pub struct IlaSnapshot {
    pub posts: usize,
    pub locked_depth: usize,
    pub forest: EntityForest,
}

#[derive(Debug, Clone)]
pub struct IlaOutcome {
    pub reference_set: ReferenceSet,
    pub forest: EntityForest,
    /// Every known level locked before the stream ran out.
    pub converged: bool,
    pub posts_consumed: usize,
    pub iterations: usize,
    pub trace: Vec<LockTraceRecord>,
    pub snapshots: Vec<IlaSnapshot>,
    pub lock_state: LockState,
}

impl IlaOutcome {
    /// Trace as JSON Lines.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|r| serde_json::to_string(r).expect("trace records serialize") + "\n")
            .collect()
    }
}

fn build_snapshot(posts: &Corpus, previous: &EntityForest, locked: usize, cfg: &MinerConfig) -> Result<EntityForest> {
    let roots = if locked == 0 {
        Roots::Unconstrained
    } else {
        Roots::Locked {
            forest: previous,
            depth: locked,
        }
    };
    Ok(build_forest(posts, roots, cfg)?.forest)
}

/// Iterative locking: mine growing prefixes of `stream` and freeze levels
/// whose normalized label entropy has settled, top level first. Stops when
/// every level of the previous snapshot is locked, or when the stream runs
/// out (not converged).
pub fn ila_mine(stream: &Corpus, cfg: &IlaConfig) -> Result<IlaOutcome> {
    ila_mine_with(stream, cfg, &GreedyMinimum)
}

pub fn ila_mine_with(stream: &Corpus, cfg: &IlaConfig, rule: &dyn LockRule) -> Result<IlaOutcome> {
    if cfg.batch_start < 1 || cfg.batch_step < 1 {
        return Err(Error::InvalidConfig("batch start and step must be at least 1".into()));
    }
    cfg.miner.subsumption.validate()?;

    let total = stream.len();
    let mut state = LockState::new();
    if total == 0 {
        return Ok(IlaOutcome {
            reference_set: ReferenceSet::empty(),
            forest: EntityForest::new(),
            converged: false,
            posts_consumed: 0,
            iterations: 0,
            trace: Vec::new(),
            snapshots: Vec::new(),
            lock_state: state,
        });
    }

    let mut consumed = cfg.batch_start.min(total);
    let mut prev_posts = stream.prefix(consumed);
    let mut prev_forest = build_snapshot(&prev_posts, &EntityForest::new(), 0, &cfg.miner)?;
    let mut prev_refset = prev_forest.flatten();
    let mut snapshots = vec![IlaSnapshot {
        posts: consumed,
        locked_depth: 0,
        forest: prev_forest.clone(),
    }];
    let mut trace = Vec::new();
    let mut iteration = 0;

    let converged = loop {
        if consumed == total {
            break false;
        }
        iteration += 1;
        let next = (consumed + cfg.batch_step).min(total);
        let posts = stream.prefix(next);
        let locked = state.locked_prefix();
        let forest = build_snapshot(&posts, &prev_forest, locked, &cfg.miner)?;
        let refset = forest.flatten();

        let attributes = prev_refset.width();
        let evaluations = locking_step(attributes, &prev_posts, &posts, &prev_refset, &refset, &mut state, rule)?;
        trace.extend(evaluations.into_iter().map(|e| LockTraceRecord {
            iteration,
            posts_consumed: next,
            level: e.level,
            h: e.h,
            h_n: e.h_n,
            h_prev: e.h_prev,
            h_n_prev: e.h_n_prev,
            pd: e.pd,
            locked_now: e.locked_now,
        }));
        snapshots.push(IlaSnapshot {
            posts: next,
            locked_depth: locked,
            forest: forest.clone(),
        });

        consumed = next;
        prev_posts = posts;
        prev_forest = forest;
        prev_refset = refset;
        if attributes > 0 && state.locked_prefix() >= attributes {
            break true;
        }
    };

    Ok(IlaOutcome {
        reference_set: prev_refset,
        forest: prev_forest,
        converged,
        posts_consumed: consumed,
        iterations: iteration,
        trace,
        snapshots,
        lock_state: state,
    })
}
