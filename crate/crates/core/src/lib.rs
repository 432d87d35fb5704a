//! Weakly supervised user type classification over a heterogeneous
//! information graph.
//!
//! The pipeline has four stages:
//!
//! 1. [`corpus`]: ingest users (profile description, tweets, mentions) or
//!    generate a synthetic corpus, and normalize all text.
//! 2. [`weak_labeler`]: apply keyword rules to profile descriptions to get
//!    a small set of noisy labels.
//! 3. [`graph`] + [`trainer`]: build the user / description / type graph and
//!    learn a joint embedding with negative sampling. User vectors come from
//!    a trainable text [`encoder`] over the user's tweets.
//! 4. [`em`]: alternate embedding training with similarity-ranked promotion
//!    of unlabeled users until predicted labels stop changing.
//!
//! [`eval`] holds the metrics, ablation driver and embedding export.

pub mod config;
pub mod corpus;
pub mod em;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod graph;
pub mod seed;
pub mod trainer;
pub mod weak_labeler;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Index of a user type within [`corpus::Corpus::type_names`]. Always 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserTypeId(pub usize);

impl UserTypeId {
    pub const FIRST: UserTypeId = UserTypeId(0);
    pub const SECOND: UserTypeId = UserTypeId(1);

    pub fn index(self) -> usize {
        self.0
    }

    /// The other of the two types.
    pub fn other(self) -> UserTypeId {
        UserTypeId(1 - self.0)
    }
}
