//! Renewal risk process `R_t = u b + p t − Σ_{i ≤ N_t} X_i` and crude Monte
//! Carlo estimates of the ruin probability `ψ(u) = P(R_t ∈ L for some t)`.
//!
//! Ruin can only happen at claim instants, so the process is simulated as
//! the random walk `S_n = Σ (X_i − Y_i p)` and ruin at level `u` is
//! `max_k p_kᵀS_n > u` for some `n`.

mod compare;
mod config;
mod engine;

pub use compare::{asymptote_curve, ruin_vs_asymptote, Comparison, ComparisonRow, H_MC_FACTOR};
pub use config::{Horizon, Interarrival, RiskConfig, Solvency, DEFAULT_MAX_STEPS, GIVE_UP_FACTOR};
pub use engine::{
    estimate_at, simulate_path, simulate_paths, simulate_ruin, simulate_ruin_grid, PathEnd, PathOutcome, RuinEstimate, CI_Z,
};
