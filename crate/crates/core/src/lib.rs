//! Estimation of finitely decorated graphons from a single observed network.
//!
//! A decorated graph labels every node pair with one element of a finite
//! decoration space (for multiplex networks, the tuple of layer indicators).
//! The estimator fits a stochastic shape model by least squares on the
//! one-hot encoding of the graph: nodes are grouped into balanced blocks,
//! blocks are merged into shapes, and each shape gets one probability vector.

pub mod decoration;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod format;
pub mod graphon;
pub mod metrics;
pub mod parallel;
pub mod rng;

pub use decoration::{
    bernoulli2_reparam, decode_one_hot, decorated_to_layers, encode_one_hot,
    multiplex_to_decorated, BinaryMatrix, BivariateBernoulliParams, DecoratedGraph,
    DecorationSpace, OneHotTensor,
};
pub use error::{Error, Result};
pub use estimator::{fit, Assignment, Fit, FitConfig, ShapeMap, ShapeParams};
pub use graphon::{
    eval_graphon, sample_graph, sample_graph_at, theta_matrix, GraphonDocument, GraphonSpec, ProbabilityArray,
    SampleDocument, SampleResult,
};
pub use parallel::Execution;
