//! Mine relational reference sets from short, noisy text posts.
//!
//! Terms are organized into entity trees by a co-occurrence subsumption
//! rule, and each root-to-leaf path becomes one tuple of the reference set.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod extract;
pub mod forest;
pub mod miner;
pub mod refset;
pub mod subsumption;

pub use corpus::{Corpus, Post, Term, Tokenizer};
pub use error::{Error, Result};
pub use forest::EntityForest;
pub use miner::{ila_mine, mine_seeded, mine_unseeded, IlaConfig, IlaOutcome, MinerConfig, MiningOutcome, SeedSet};
pub use refset::{column_homogeneity, ReferenceSet};
pub use subsumption::SubsumptionConfig;
