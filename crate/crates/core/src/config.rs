//! Shared numeric configuration: tolerances, budgets, and solver knobs.
//!
//! Every tolerance has a single authoritative default here. Commands and
//! tests that need a different value override the field on [`Config`]
//! instead of hardcoding a literal at the call site.

use serde::Serialize;

/// Market-clearing tolerance: a price is accepted as an equilibrium when the
/// sup-norm of aggregate excess demand falls below this.
pub const DEFAULT_TOL_CLEAR: f64 = 1e-8;

/// Budget-feasibility slack on `<p, x> <= <p, a>`. Closed-form demands
/// exhaust the budget to machine precision, so this is effectively a
/// guard against accumulated rounding.
pub const DEFAULT_TOL_BUDGET: f64 = 1e-10;

/// Utility slack in preferred-set membership: `U(x) >= U(demand) - tol`.
pub const DEFAULT_TOL_PREF: f64 = 1e-9;

/// Two state prices closer than this in the sup norm are treated as equal
/// when the price partition is built.
pub const DEFAULT_TOL_PRICE: f64 = 1e-7;

/// Largest utility improvement the deviation search may find before an
/// allocation is rejected. Must dominate the utility Lipschitz constant
/// times the deviation grid step for the instances under test.
pub const DEFAULT_TOL_DEV: f64 = 1e-4;

/// Default grid step for point-cloud sampling of preferred sets.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;

/// Deviation search: number of segments per axis on the budget frontier.
pub const DEFAULT_GRID_N: usize = 50;

/// Iteration cap shared by the price solvers.
pub const DEFAULT_MAX_ITER: usize = 50_000;

/// Every price coordinate is kept at or above this floor; prices are
/// normalized points of the open simplex.
pub const DEFAULT_PRICE_FLOOR: f64 = 1e-9;

/// Simplex coordinates must sum to one within this.
pub const PRICE_SUM_TOL: f64 = 1e-12;

/// State probabilities must sum to one within this.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Largest point cloud `sample_preferred_set` will materialize.
pub const DEFAULT_POINT_BUDGET: usize = 8_000_000;

/// Largest number of grid columns the streaming support-function sampler
/// will walk when aggregating preferred sets.
pub const DEFAULT_COLUMN_BUDGET: usize = 2_000_000;

/// Cap on exhaustive combination counts (Minkowski sums, deviation plans).
pub const DEFAULT_COMBO_BUDGET: usize = 200_000;

/// Number of support directions used when aggregating convex clouds.
pub const DEFAULT_SUPPORT_DIRECTIONS: usize = 512;

/// Number of random selections drawn when a Minkowski sum is too large to
/// enumerate and the inputs are not all convex.
pub const DEFAULT_SAMPLED_SELECTIONS: usize = 4096;

/// Knobs shared across solvers, samplers, and verifiers.
///
/// `Default` yields the documented defaults above; the CLI overrides the
/// subset it exposes as flags and echoes the full struct in every report.
#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub tol_clear: f64,
    pub tol_budget: f64,
    pub tol_pref: f64,
    pub tol_price: f64,
    pub tol_dev: f64,
    pub resolution: f64,
    pub grid_n: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub parallel: bool,
    pub price_floor: f64,
    pub point_budget: usize,
    pub column_budget: usize,
    pub combo_budget: usize,
    pub support_directions: usize,
    pub sampled_selections: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol_clear: DEFAULT_TOL_CLEAR,
            tol_budget: DEFAULT_TOL_BUDGET,
            tol_pref: DEFAULT_TOL_PREF,
            tol_price: DEFAULT_TOL_PRICE,
            tol_dev: DEFAULT_TOL_DEV,
            resolution: DEFAULT_RESOLUTION,
            grid_n: DEFAULT_GRID_N,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            parallel: true,
            price_floor: DEFAULT_PRICE_FLOOR,
            point_budget: DEFAULT_POINT_BUDGET,
            column_budget: DEFAULT_COLUMN_BUDGET,
            combo_budget: DEFAULT_COMBO_BUDGET,
            support_directions: DEFAULT_SUPPORT_DIRECTIONS,
            sampled_selections: DEFAULT_SAMPLED_SELECTIONS,
        }
    }
}
