//! Bayesian logistic sequence prediction with compressed parameters.
//!
//! Models the next state of a discrete sequence with a logistic regression on
//! interaction-pattern indicators of every order up to `O`. Coefficients whose
//! indicator columns coincide on the training data are summed into a single
//! compressed parameter per group; symmetric stable priors (Gaussian or
//! Cauchy) make the prior of each sum available in closed form, so MCMC runs
//! over the much smaller compressed parameter set. At prediction time the
//! sums are split back into the test-relevant sub-sums by sampling exact
//! conditional distributions.
//!
//! Module map:
//! - [`dataset`]: sequence datasets, windowing, plain-text file format
//! - [`grouping`]: the pattern-grouping recursion and superpattern matching
//! - [`stabledist`]: stable-law widths, priors, split distributions, inversion
//! - [`slice`]: univariate slice sampler (stepping out + shrinkage)
//! - [`sampler`]: the Gibbs/slice Markov chain over compressed parameters
//! - [`oracle`]: uncompressed reference implementation for validation
//! - [`predict`]: test-case decomposition, predictive probabilities, metrics
//! - [`datagen`]: HMM sequence generator and text encoder
//! - [`stats`]: small statistical helpers shared with the test suites

// Negated comparisons like `!(x > 0.0)` are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod dataset;
pub mod error;
pub mod grouping;
pub mod oracle;
pub mod predict;
pub mod sampler;
pub mod slice;
pub mod stabledist;
pub mod stats;

pub use dataset::SequenceDataset;
pub use error::SeqError;
pub use grouping::{Grouping, Pattern, SuperPattern};
pub use sampler::{ChainRecord, ChainState, McmcConfig, PriorSpec};
pub use stabledist::{Law, SplitSpec};
