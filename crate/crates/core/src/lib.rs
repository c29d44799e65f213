//! Curiosity-driven exploration with group-structured internal world models.
//!
//! An agent keeps a Gaussian belief about where an object sits in its
//! internal world model, scores each candidate move by the mutual
//! information the next observation would carry once the belief is
//! transported by the move's group action, and executes the best one. With
//! a Euclidean internal model every move scores the same and the agent
//! idles; with a projective one, approaching the object magnifies the
//! belief and wins.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod belief;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod oracle;
pub mod pushforward;

pub use error::{Error, Result};
