//! Entity trees: rooted trees whose depth maps onto reference-set columns.
//!
//! A node's children are keyed by term, so sibling values are unique. The
//! same term may occur in several places (under different parents or at
//! different depths) but never twice on one root-to-leaf path.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::corpus::{CooccurrenceStats, Term};
use crate::error::{Error, Result};
use crate::refset::ReferenceSet;
use crate::subsumption::{set_subsumes, subsumes, SubsumptionConfig, TermBigrams};

pub type NodeId = usize;

#[derive(Debug, Clone)]
struct Node {
    term: Term,
    parent: Option<NodeId>,
    depth: usize,
    children: BTreeMap<Term, NodeId>,
}

#[derive(Debug, Clone, Default)]
pub struct EntityForest {
    nodes: Vec<Node>,
    roots: BTreeMap<Term, NodeId>,
}

/// A general token accepted by one union-subsumption round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralAttachment {
    pub term: Term,
    /// Every forest term that precedes `term` in some bigram.
    pub parents: Vec<Term>,
    pub nodes: Vec<NodeId>,
}

impl EntityForest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Adds a root, or returns the existing one with that value.
    pub fn add_root(&mut self, term: Term) -> NodeId {
        if let Some(&id) = self.roots.get(&term) {
            return id;
        }
        let id = self.push(term.clone(), None, 0);
        self.roots.insert(term, id);
        id
    }

    fn push(&mut self, term: Term, parent: Option<NodeId>, depth: usize) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            term,
            parent,
            depth,
            children: BTreeMap::new(),
        });
        id
    }

    /// Attaches `term` under `parent`. Idempotent: an existing child with the
    /// same value is returned. A value already on the parent's root path is
    /// rejected as a cycle.
    pub fn attach_child(&mut self, parent: NodeId, term: Term) -> Result<NodeId> {
        let node = self.nodes.get(parent).ok_or(Error::UnknownNode(parent))?;
        if let Some(&existing) = node.children.get(&term) {
            return Ok(existing);
        }
        if self.on_path(parent, &term) {
            return Err(Error::Cycle {
                parent: node.term.to_string(),
                child: term.to_string(),
            });
        }
        let depth = node.depth + 1;
        let id = self.push(term.clone(), Some(parent), depth);
        self.nodes[parent].children.insert(term, id);
        Ok(id)
    }

    /// Whether `term` is the value of `node` or of one of its ancestors.
    pub fn on_path(&self, node: NodeId, term: &Term) -> bool {
        let mut cur = Some(node);
        while let Some(id) = cur {
            if &self.nodes[id].term == term {
                return true;
            }
            cur = self.nodes[id].parent;
        }
        false
    }

    pub fn term(&self, id: NodeId) -> &Term {
        &self.nodes[id].term
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id].depth
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[id].children.values().copied()
    }

    pub fn child(&self, id: NodeId, term: &Term) -> Option<NodeId> {
        self.nodes[id].children.get(term).copied()
    }

    pub fn root(&self, term: &Term) -> Option<NodeId> {
        self.roots.get(term).copied()
    }

    /// Roots in value order.
    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.roots.values().copied()
    }

    pub fn root_terms(&self) -> impl Iterator<Item = &Term> {
        self.roots.keys()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// All nodes in depth-first, value-ordered traversal.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<NodeId> = self.roots.values().rev().copied().collect();
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.values().rev().copied());
        }
        out
    }

    pub fn nodes_with_term<'a>(&'a self, term: &'a Term) -> impl Iterator<Item = NodeId> + 'a {
        self.preorder()
            .into_iter()
            .filter(move |&id| &self.nodes[id].term == term)
    }

    pub fn nodes_at_depth(&self, depth: usize) -> Vec<NodeId> {
        self.preorder()
            .into_iter()
            .filter(|&id| self.nodes[id].depth == depth)
            .collect()
    }

    /// Distinct values anywhere in the forest.
    pub fn terms(&self) -> BTreeSet<&Term> {
        self.preorder().into_iter().map(|id| &self.nodes[id].term).collect()
    }

    /// Distinct values at one depth.
    pub fn terms_at_depth(&self, depth: usize) -> BTreeSet<Term> {
        self.nodes_at_depth(depth)
            .into_iter()
            .map(|id| self.nodes[id].term.clone())
            .collect()
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.preorder().into_iter().map(|id| self.nodes[id].depth).max()
    }

    pub fn leaf_count(&self) -> usize {
        self.preorder()
            .into_iter()
            .filter(|&id| self.nodes[id].children.is_empty())
            .count()
    }

    /// Values from the root down to `id`.
    pub fn path(&self, id: NodeId) -> Vec<&Term> {
        let mut out = Vec::with_capacity(self.nodes[id].depth + 1);
        let mut cur = Some(id);
        while let Some(n) = cur {
            out.push(&self.nodes[n].term);
            cur = self.nodes[n].parent;
        }
        out.reverse();
        out
    }

    /// Every root-to-node path. Two forests with the same path set have
    /// identical structure.
    pub fn paths(&self) -> BTreeSet<Vec<Term>> {
        self.preorder()
            .into_iter()
            .map(|id| self.path(id).into_iter().cloned().collect())
            .collect()
    }

    /// Copy keeping only the nodes for which `keep` holds; a rejected node
    /// drops its whole subtree.
    fn filtered(&self, mut keep: impl FnMut(&EntityForest, NodeId) -> bool) -> EntityForest {
        let mut out = EntityForest::new();
        let mut stack: Vec<(NodeId, Option<NodeId>)> = Vec::new();
        for root in self.roots.values().rev() {
            stack.push((*root, None));
        }
        while let Some((id, new_parent)) = stack.pop() {
            if !keep(self, id) {
                continue;
            }
            let term = self.nodes[id].term.clone();
            let new_id = match new_parent {
                None => out.add_root(term),
                Some(p) => {
                    let depth = out.nodes[p].depth + 1;
                    let nid = out.push(term.clone(), Some(p), depth);
                    out.nodes[p].children.insert(term, nid);
                    nid
                }
            };
            for child in self.nodes[id].children.values().rev() {
                stack.push((*child, Some(new_id)));
            }
        }
        out
    }

    /// Removes every tree that is a bare root.
    pub fn prune_singletons(&self) -> EntityForest {
        self.prune_singletons_except(&BTreeSet::new())
    }

    /// Like [`Self::prune_singletons`], but bare roots in `protected` stay.
    pub fn prune_singletons_except(&self, protected: &BTreeSet<Term>) -> EntityForest {
        self.filtered(|f, id| {
            let n = &f.nodes[id];
            n.parent.is_some() || !n.children.is_empty() || protected.contains(&n.term)
        })
    }

    /// Keeps depths `0..depth` only.
    pub fn truncate(&self, depth: usize) -> EntityForest {
        self.filtered(|f, id| f.nodes[id].depth < depth)
    }

    /// One tuple per root-to-leaf path, right-padded with nulls to the
    /// forest's maximum depth.
    pub fn flatten(&self) -> ReferenceSet {
        let width = match self.max_depth() {
            Some(d) => d + 1,
            None => return ReferenceSet::empty(),
        };
        let tuples = self
            .preorder()
            .into_iter()
            .filter(|&id| self.nodes[id].children.is_empty())
            .map(|leaf| {
                let mut row: Vec<Option<Term>> = self.path(leaf).into_iter().cloned().map(Some).collect();
                row.resize(width, None);
                row
            })
            .collect();
        ReferenceSet::new(width, tuples)
    }

    /// Rebuilds a forest by grouping tuples on shared prefixes.
    pub fn from_reference_set(refset: &ReferenceSet) -> Result<EntityForest> {
        let mut forest = EntityForest::new();
        for row in refset.tuples() {
            let mut values = row.iter().map_while(|v| v.as_ref());
            let Some(root) = values.next() else { continue };
            let mut cur = forest.add_root(root.clone());
            for v in values {
                cur = forest.attach_child(cur, v.clone())?;
            }
        }
        Ok(forest)
    }

    /// Indented text dump: one node per line, two spaces per depth level,
    /// siblings in value order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for id in self.preorder() {
            let n = &self.nodes[id];
            let _ = writeln!(out, "{:indent$}{}", "", n.term, indent = 2 * n.depth);
        }
        out
    }

    /// Structural checks used by tests: depth bookkeeping, parent links,
    /// unique root values and no value repeated on a path.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for id in self.preorder() {
            let n = &self.nodes[id];
            match n.parent {
                None => {
                    if n.depth != 0 || self.roots.get(&n.term) != Some(&id) {
                        return Err(format!("root {} has bad bookkeeping", n.term));
                    }
                }
                Some(p) => {
                    let pn = &self.nodes[p];
                    if n.depth != pn.depth + 1 {
                        return Err(format!("{} at depth {} under depth {}", n.term, n.depth, pn.depth));
                    }
                    if pn.children.get(&n.term) != Some(&id) {
                        return Err(format!("{} missing from parent's children", n.term));
                    }
                    if self.on_path(p, &n.term) {
                        return Err(format!("{} repeats on its own path", n.term));
                    }
                }
            }
        }
        Ok(())
    }
}

impl PartialEq for EntityForest {
    fn eq(&self, other: &Self) -> bool {
        self.paths() == other.paths()
    }
}

impl Eq for EntityForest {}

/// Grows the forest below `frontier` with the pairwise rule, to exhaustion.
///
/// For every node `s` and every term `t` that follows `s` in a bigram, `t`
/// becomes a child of `s` when `s` subsumes `t`. New nodes join the
/// frontier. Children are only created at depth `>= min_child_depth`.
/// Returns the nodes added.
pub fn expand_children(
    forest: &mut EntityForest,
    stats: &CooccurrenceStats,
    bigrams: &TermBigrams,
    cfg: &SubsumptionConfig,
    frontier: &[NodeId],
    min_child_depth: usize,
) -> Vec<NodeId> {
    let mut queue: VecDeque<NodeId> = frontier.iter().copied().collect();
    let mut added = Vec::new();
    while let Some(id) = queue.pop_front() {
        if forest.depth(id) + 1 < min_child_depth {
            continue;
        }
        let parent = forest.term(id).clone();
        for t in bigrams.successors(&parent) {
            if forest.child(id, t).is_some() || forest.on_path(id, t) {
                continue;
            }
            if subsumes(stats, &parent, t, cfg) {
                let child = forest.attach_child(id, t.clone()).expect("child is new and off-path");
                added.push(child);
                queue.push_back(child);
            }
        }
    }
    added
}

/// One round of general-token discovery.
///
/// Candidates are terms not yet in the forest that follow at least one
/// forest term in a bigram. A candidate whose full predecessor set
/// subsumes it under the union rule becomes a child of every node holding
/// one of those predecessors. All candidates are judged against the forest
/// as it stood at the start of the round.
pub fn general_token_pass(
    forest: &mut EntityForest,
    stats: &CooccurrenceStats,
    bigrams: &TermBigrams,
    cfg: &SubsumptionConfig,
    min_child_depth: usize,
) -> Vec<GeneralAttachment> {
    let order = forest.preorder();
    let present: BTreeSet<Term> = order.iter().map(|&id| forest.term(id).clone()).collect();
    let mut hosts: BTreeMap<Term, Vec<NodeId>> = BTreeMap::new();
    for &id in &order {
        if forest.depth(id) + 1 >= min_child_depth {
            hosts.entry(forest.term(id).clone()).or_default().push(id);
        }
    }

    let mut candidates: BTreeMap<Term, Vec<Term>> = BTreeMap::new();
    for parent in hosts.keys() {
        for q in bigrams.successors(parent) {
            if !present.contains(q) {
                candidates.entry(q.clone()).or_default().push(parent.clone());
            }
        }
    }

    let accepted: Vec<(Term, Vec<Term>)> = candidates
        .into_iter()
        .filter(|(q, parents)| set_subsumes(stats, parents, q, cfg).unwrap_or(false))
        .collect();

    accepted
        .into_iter()
        .map(|(q, parents)| {
            let nodes = parents
                .iter()
                .flat_map(|p| hosts[p].iter().copied())
                .map(|host| {
                    forest
                        .attach_child(host, q.clone())
                        .expect("general token is new to the forest")
                })
                .collect();
            GeneralAttachment {
                term: q,
                parents,
                nodes,
            }
        })
        .collect()
}

/// Repeats [`general_token_pass`] until a round adds nothing. Returns the
/// accepted attachments grouped by round (empty rounds excluded).
pub fn general_token_fixpoint(
    forest: &mut EntityForest,
    stats: &CooccurrenceStats,
    bigrams: &TermBigrams,
    cfg: &SubsumptionConfig,
    min_child_depth: usize,
) -> Vec<Vec<GeneralAttachment>> {
    let mut rounds = Vec::new();
    loop {
        let round = general_token_pass(forest, stats, bigrams, cfg, min_child_depth);
        if round.is_empty() {
            return rounds;
        }
        rounds.push(round);
    }
}
