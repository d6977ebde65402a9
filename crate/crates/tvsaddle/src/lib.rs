//! Decentralized saddle-point optimization over time-varying networks.
//!
//! A group of `M` nodes cooperatively solves `min_x max_y f(x, y)` where
//! `f = (1/M) Σ f_m` and node `m` only ever evaluates its own operator
//! `F_m(z) = (∇_x f_m, -∇_y f_m)`. Nodes exchange state over a communication
//! graph that may change every round. The crate provides:
//!
//! - [`graph`]: static baselines (ring, path, complete, star), a rotating
//!   star, and seeded random connected graph sequences;
//! - [`mixing`]: graph Laplacians as gossip matrices, their condition number
//!   `chi` and contraction factor `rho`, and an assumption validator;
//! - [`gossip`]: repeated mixing-matrix multiplication driving node states to
//!   consensus;
//! - [`problems`]: quadratic saddle instances and bilinear matrix games with
//!   exact solutions, duality-gap oracles, and a regularization wrapper that
//!   turns a merely convex-concave problem into a strongly monotone one;
//! - [`solver`]: the decentralized extra-step loop and a centralized
//!   extragradient reference;
//! - [`metrics`]: distance/gap/consensus measurements and least-squares rate
//!   fitting;
//! - [`config`]: plain-text run configuration, execution, sweeps, and CSV/JSON
//!   output (also exposed through the `tvsaddle` binary).
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --example gossip_averaging        # consensus + per-round contraction
//! cargo run --example spectral_quantities     # chi and rho across topologies
//! cargo run --example quadratic_linear_rate   # strongly monotone case, linear rate
//! cargo run --example matrix_game_rate        # convex-concave case, 1/k gap decay
//! cargo run --example centralized_equivalence # complete graph == centralized method
//! cargo run --example regularization_trick    # eps-accurate games via regularization
//! cargo run --example assumption_validation   # random graphs vs. the gossip assumptions
//! ```
//!
//! The one binary drives the same machinery from config files:
//!
//! ```text
//! cargo run --bin tvsaddle -- run experiment.cfg --out results/
//! ```

pub mod config;
pub mod error;
pub mod gossip;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod mixing;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
