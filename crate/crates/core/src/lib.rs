//! Default-theory rule learning: FOLD-style sequential covering with
//! exceptions, demotion-weighted information gain, and K-means++ clustering of
//! the positive examples.

pub mod clustering;
pub mod dataset;
pub mod error;
pub mod evalcv;
pub mod fold;
pub mod hypothesis;
pub mod pipeline;
pub mod scoring;
pub mod translate;

pub use dataset::{Dataset, Example, FeatureSchema, Label};
pub use error::{DataError, HypothesisError, TranslateError};
pub use hypothesis::{Head, Hypothesis, Literal, Rule};
