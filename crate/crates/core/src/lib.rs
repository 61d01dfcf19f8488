//! Numerical laboratory for pure-exchange economies under differential
//! information.
//!
//! The crate models a finite economy (random states, weighted agents with
//! private information partitions, state-dependent utilities and
//! endowments), computes per-state Walrasian equilibria, samples and
//! aggregates preferred sets as compact point clouds, and constructs
//! maximin rational expectations equilibria together with independently
//! checkable certificates.
//!
//! Modules follow the pipeline:
//! * [`economy`]: model types, structural invariants, validation.
//! * [`correspondences`]: budget sets, truncation bounds, demand,
//!   preferred-set sampling.
//! * [`setval`]: Hausdorff distance, finite Kuratowski limits, weighted
//!   Minkowski aggregation of point clouds.
//! * [`walras`]: per-state excess demand and price solving.
//! * [`maximin`]: price systems, information joins, maximin utilities, and
//!   equilibrium certificates.
//! * [`synth`]: seeded random economies for suites and calibration.

pub mod config;
pub mod correspondences;
pub mod economy;
pub mod maximin;
pub mod setval;
pub mod synth;
pub mod walras;

pub(crate) mod util;

pub use config::Config;
pub use correspondences::{BudgetQuery, PreferredMode, TruncationBox};
pub use economy::{Economy, PriceVector};
pub use maximin::{
    build_price_system, compute_maximin_ree, information_structure, maximin_utility,
    sigma_pi_partition, verify_maximin_ree, MaximinCertificate, MreeSolution, PriceSystem,
};
pub use setval::{
    aggregate_preferred_set, aumann_integral, continuity_probe, hausdorff_distance,
    kuratowski_limits, AumannIntegral, AumannMethod, CompactSetApprox,
};
pub use walras::{
    aggregate_excess_certificate, excess_demand, solve_all_states, solve_state_equilibrium,
    StateEquilibrium,
};
