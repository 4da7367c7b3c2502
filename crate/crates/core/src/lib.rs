//! Simulation and analysis toolkit for topological error correction with
//! Abelian and non-Abelian anyons.
//!
//! The crate is organised around the syndrome lattice of a toric code-like
//! model: anyons live on plaquettes of a 2D code lattice, errors live on
//! edges of a (2D or 3D) syndrome lattice, and decoders pair up the defects
//! that errors leave behind.
//!
//! * [`lattice`] — code/syndrome lattice construction, the integer metric,
//!   and cluster/chunk geometry.
//! * [`noise`] — independent per-edge error model, aggregate rates, and
//!   samplers for single-shot bursts and round-by-round simulation.
//! * [`abelian`] — D(Z_n) anyon algebra, defect extraction from measurement
//!   histories, neutral-cluster correction, and homological failure checks.
//! * [`chunks`] — chunk decomposition of error sets, level-separation
//!   checks, and the analytic threshold/logical-rate bound evaluators.
//! * [`decoders`] — the four greedy hard-decision RG decoders behind a
//!   common clustering engine, plus correction-width and factorization
//!   checks.
//! * [`nonabelian`] — stochastic fusion models (Fibonacci built in),
//!   single-shot decoding with physical fusion, and the world-net machinery
//!   for active error correction with noisy measurements.
//! * [`harness`] — seeded Monte Carlo runners, threshold scans, trace
//!   serialization, and the ASCII replay renderer used by the CLI.

pub mod abelian;
pub mod chunks;
pub mod decoders;
pub mod harness;
pub mod lattice;
pub mod noise;
pub mod nonabelian;
