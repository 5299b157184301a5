use serde::Serialize;

use super::entropy::{entropy, label_distribution, normalized_entropy, percent_diff};
use crate::corpus::Corpus;
use crate::error::Result;
use crate::refset::ReferenceSet;

/// Decides from a level's PD history whether it should lock now.
pub trait LockRule {
    fn should_lock(&self, history: &[f64]) -> bool;
}

/// Locks as soon as PD is exactly zero, or when the newest PD rises above
/// the previous one (the previous value was a local minimum).
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyMinimum;

impl LockRule for GreedyMinimum {
    fn should_lock(&self, history: &[f64]) -> bool {
        match history {
            [.., last] if *last == 0.0 => true,
            [.., prev, last] => last > prev,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelLock {
    pub locked: bool,
    pub locked_at_posts: Option<usize>,
    pub pd_history: Vec<f64>,
}

/// Per-level lock flags. Locks never revert and a level only locks after
/// its parent, so the locked levels always form a prefix `0..k`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LockState {
    levels: Vec<LevelLock>,
}

impl LockState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn levels(&self) -> &[LevelLock] {
        &self.levels
    }

    pub fn is_locked(&self, level: usize) -> bool {
        self.levels.get(level).is_some_and(|l| l.locked)
    }

    /// Number of leading locked levels.
    pub fn locked_prefix(&self) -> usize {
        self.levels.iter().take_while(|l| l.locked).count()
    }

    pub fn locked_count(&self) -> usize {
        self.levels.iter().filter(|l| l.locked).count()
    }

    fn level_mut(&mut self, level: usize) -> &mut LevelLock {
        if self.levels.len() <= level {
            self.levels.resize_with(level + 1, LevelLock::default);
        }
        &mut self.levels[level]
    }
}

/// Entropy comparison for one level between two prefixes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelEvaluation {
    pub level: usize,
    pub h_prev: f64,
    pub h_n_prev: f64,
    pub h: f64,
    pub h_n: f64,
    pub pd: f64,
    pub locked_now: bool,
}

/// One locking round over `attributes` levels.
///
/// `posts_prev` must be a prefix of `posts_next`, with `refset_prev` and
/// `refset_next` mined from them. A level is evaluated when it is unlocked
/// and its parent was locked before this round started (level 0 has no
/// parent). Levels whose label distribution is empty on either side, or
/// whose prefix has fewer than two posts, are skipped.
pub fn locking_step(
    attributes: usize,
    posts_prev: &Corpus,
    posts_next: &Corpus,
    refset_prev: &ReferenceSet,
    refset_next: &ReferenceSet,
    state: &mut LockState,
    rule: &dyn LockRule,
) -> Result<Vec<LevelEvaluation>> {
    debug_assert!(posts_prev.len() <= posts_next.len());
    let locked_before: Vec<bool> = (0..attributes).map(|a| state.is_locked(a)).collect();
    let mut evaluations = Vec::new();
    for level in 0..attributes {
        if locked_before[level] || (level > 0 && !locked_before[level - 1]) {
            continue;
        }
        if posts_prev.len() < 2 || posts_next.len() < 2 {
            continue;
        }
        let (Some(d_prev), Some(d_next)) = (
            label_distribution(posts_prev, refset_prev, level),
            label_distribution(posts_next, refset_next, level),
        ) else {
            continue;
        };
        let h_prev = entropy(d_prev.values())?;
        let h = entropy(d_next.values())?;
        let h_n_prev = normalized_entropy(h_prev, posts_prev.len())?;
        let h_n = normalized_entropy(h, posts_next.len())?;
        let pd = percent_diff(h_n_prev, h_n);

        let entry = state.level_mut(level);
        entry.pd_history.push(pd);
        let locked_now = rule.should_lock(&entry.pd_history);
        if locked_now {
            entry.locked = true;
            entry.locked_at_posts = Some(posts_next.len());
        }
        evaluations.push(LevelEvaluation {
            level,
            h_prev,
            h_n_prev,
            h,
            h_n,
            pd,
            locked_now,
        });
    }
    Ok(evaluations)
}
