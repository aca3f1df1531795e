//! Cross-lingual and cross-domain classification of crisis-related social
//! media messages.
//!
//! The crate covers the full experimental pipeline:
//!
//! * [`corpus`] and [`unify`]: the unified message/event data model, label
//!   merging, crisis taxonomy annotation and language identification.
//! * [`lingfeat`] and [`embed`]: the seven message representations.
//! * [`scenario`]: the seven transfer-learning scenarios with event-level
//!   train/test separation, balancing and test augmentation.
//! * [`forest`]: a random forest classifier.
//! * [`evalx`]: metrics, repeated runs and report emission.
//! * [`pipeline`]: resource loading and whole-grid runs.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod evalx;
pub mod forest;
pub mod lingfeat;
pub mod matrix;
pub mod pipeline;
pub mod scenario;
pub mod seed;
pub mod synthetic;
pub mod unify;

pub use error::{Error, Result};
