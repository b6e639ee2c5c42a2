//! Entropy-based dimension of compact sets in `C^n`.
//!
//! The crate computes two-sided ε-entropy bounds for spaces of bounded
//! holomorphic traces, fits the growth exponent Ψ, searches for integer
//! polynomials that are exponentially small on a sample, builds witness sets
//! for the converse direction, and validates Gevrey-class graph data with
//! exact jet arithmetic.
//!
//! Module map:
//!
//! * [`metric_entropy`]: covering and packing counts of finite metric spaces.
//! * [`polynomials`]: multivariate polynomials, polydisk sup norms, growth bounds.
//! * [`trace_space`]: point clouds and entropy bounds for their trace spaces.
//! * [`gevrey`]: jets, Gevrey constants and graph-form samples.
//! * [`kdim`]: Ψ fits and predicted entropy bounds.
//! * [`smallpoly`]: small integer polynomial search and certificates.
//! * [`witness`]: packed witness sets and the LP lower-bound oracle.

pub mod dyadic;
pub mod error;
pub mod fit;
pub mod gevrey;
pub mod kdim;
pub mod lattice;
pub mod lp;
pub mod metric_entropy;
pub mod polynomials;
pub mod smallpoly;
pub mod trace_space;
pub mod witness;

pub use error::{Error, Result};
pub use num_complex::Complex64;
