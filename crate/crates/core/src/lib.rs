//! satcast — a CDCL SAT solver instrumented to predict its own search cost
//! online, together with the training, evaluation and two-solver portfolio
//! tooling built around that prediction.
//!
//! The pipeline: generate or load CNF instances ([`cnf`]), solve them while a
//! probe observes the conflict stream through an observation window
//! ([`solver`], [`probe`]), assemble feature vectors and labeled datasets
//! ([`features`]), fit ridge-regression cost models with feature selection
//! ([`model`]), and evaluate predictions or race two solver configurations
//! ([`eval`], [`portfolio`]).

pub mod cnf;
pub mod features;
pub mod fingerprint;
pub mod model;
pub mod probe;
pub mod solver;
