//! Multi-gene genetic programming (MGGP) for symbolic regression.
//!
//! An individual is an ordered set of expression trees ("genes") combined
//! linearly: the gene outputs form a design matrix whose weights (plus a
//! bias term) are fitted by least squares on every evaluation. Selection is
//! plain lexicographic tournament (fitness first, node count on ties), and
//! the single-gene variant (SGGP) is the same engine restricted to one tree
//! per individual.
//!
//! The crate also ships the surrounding tooling used for the solar
//! clearness-index application: dataset ingestion and scaling, a
//! statistics-matched synthetic data generator, classical polynomial
//! regression baselines, post-run Pareto front analysis, and the
//! solar-geometry formulas behind the S/S0 and H/H0 ratios.

pub mod baselines;
pub mod dataio;
pub mod engine;
pub mod exprtree;
pub mod fitting;
pub mod pareto;
pub mod solar;
