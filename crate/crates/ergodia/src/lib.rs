//! Simulation and analysis toolkit for K-user ergodic fading interference
//! networks.
//!
//! The crate covers four things:
//!
//! * [`channel`] / [`alignment`] — a symbol-level Monte Carlo of ergodic
//!   interference alignment: channel uses with complementary states are
//!   paired, symbols are repeated across each pair, and the post-combining
//!   SINR reproduces the per-user rate (1/2)*log2(1 + 2*SNR).
//! * [`bottleneck`] — certification, classification, counting and
//!   enumeration of bottleneck states through a fractional-perfect-matching
//!   criterion, with an independent brute-force oracle.
//! * [`bounds`] — the closed-form capacity values of bottleneck networks,
//!   the parallel-channel separability calculators, and an LP sum-rate
//!   outer bound from pairwise bottleneck constraints, again with an
//!   independent oracle.
//! * [`scaling`] — dense-network sweeps showing the per-user capacity gap
//!   closing as the network grows, against the analytic Chebyshev bound.
//!
//! All rates are bits per channel use. Everything is deterministic given a
//! seed; parallel trial execution never changes results.

pub mod alignment;
pub mod bottleneck;
pub mod bounds;
pub mod channel;
pub mod config;
pub mod error;
pub mod matching;
pub mod scaling;

pub use alignment::{ergodic_alignment_rate, pair_states, run_alignment, run_alignment_trials, MatchStats, Pairing, PairingMode};
pub use bottleneck::{brute_fpm, certificate, classify, count_minimal_states, enumerate_minimal_states, has_fpm, minimal_link_count, BottleneckGraph, StateClass};
pub use bounds::{achievable_ia_sum, inseparability_example, lp_oracle, lp_outer_bound, pair_bound, parallel_same_state_capacity, separability_example, single_user_capacity, sum_capacity_minimal, BoundKind, RateBound};
pub use channel::{sample_state, ChannelState, QuantizedState};
pub use config::{CrossDist, NetworkConfig};
pub use error::{Error, Result};
pub use matching::CoverElement;
pub use scaling::{analytic_delta, bottleneck_indicators, chebyshev_bound, is_eps_bottleneck, scaling_experiment, uv_statistics, DenseNetwork, ScalingOutcome, ScalingRecord, ScalingTrial, UvStatistics};
