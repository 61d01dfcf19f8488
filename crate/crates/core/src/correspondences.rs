//! Budget and preferred-set correspondences for a single (agent, state)
//! pair at a given price.
//!
//! The central object is [`BudgetQuery`], a borrowed context bundling the
//! economy, an agent, a state, and a price. All correspondence operations
//! hang off it: wealth, the truncation box, budget membership, demand,
//! preferred-set membership, and grid sampling of the truncated preferred
//! set as a point cloud.
//!
//! Demand is exact: every supported family admits a closed form (corner
//! solutions for linear utilities, waterfilling for shifted logs, interior
//! ratios for CES and Cobb-Douglas), so there is no inner optimizer and no
//! convergence failure path.

use thiserror::Error;

use crate::config::Config;
use crate::economy::{Economy, PriceVector, Utility};
use crate::setval::CompactSetApprox;
use crate::util::dot;

/// Smallest price coordinate; strictly positive for any valid price.
pub fn delta_min(p: &PriceVector) -> f64 {
    p.min_coord()
}

/// Axis-aligned truncation box `[0, gamma]^l` with
/// `gamma = (sum of endowment coordinates) / delta_min(p)`.
///
/// The box contains the budget set: every affordable bundle satisfies
/// `x_h <= <p, a> / p_h <= gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationBox {
    upper: Vec<f64>,
}

impl TruncationBox {
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn gamma(&self) -> f64 {
        self.upper[0]
    }

    /// Membership with a relative slack so exact corner points survive
    /// floating-point roundoff.
    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.upper.len());
        x.iter()
            .zip(&self.upper)
            .all(|(v, b)| *v >= -1e-12 && *v <= b + 1e-12 * (1.0 + b.abs()))
    }
}

/// Which preferred set a membership test targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreferredMode {
    /// `C`: bundles weakly preferred to everything affordable.
    Full,
    /// `C` intersected with the truncation box.
    Truncated,
}

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("resolution must be finite and > 0, got {0}")]
    BadResolution(f64),
    #[error(
        "grid of {required} points exceeds the point budget {budget}; \
         coarsest feasible resolution is about {suggested:.3e}"
    )]
    PointBudget {
        required: u128,
        budget: usize,
        suggested: f64,
    },
    #[error("grid of {required} columns exceeds the column budget {budget}")]
    ColumnBudget { required: u128, budget: usize },
}

/// Borrowed (economy, agent, state, price) context for correspondence
/// queries. Construction asserts index and dimension consistency.
#[derive(Debug, Clone)]
pub struct BudgetQuery<'e> {
    econ: &'e Economy,
    agent: usize,
    state: usize,
    price: PriceVector,
}

impl<'e> BudgetQuery<'e> {
    pub fn new(econ: &'e Economy, agent: usize, state: usize, price: PriceVector) -> Self {
        assert!(agent < econ.n_agents(), "agent index out of range");
        assert!(state < econ.n_states(), "state index out of range");
        assert_eq!(price.dim(), econ.n_goods(), "price dimension mismatch");
        BudgetQuery {
            econ,
            agent,
            state,
            price,
        }
    }

    pub fn price(&self) -> &PriceVector {
        &self.price
    }

    pub fn endowment(&self) -> &[f64] {
        self.econ.endowment(self.agent, self.state)
    }

    pub fn utility(&self) -> &Utility {
        self.econ.utility(self.agent, self.state)
    }

    /// Market value of the endowment at the query price.
    pub fn wealth(&self) -> f64 {
        dot(self.price.coords(), self.endowment())
    }

    pub fn truncation_bound(&self) -> TruncationBox {
        let gamma: f64 = self.endowment().iter().sum::<f64>() / delta_min(&self.price);
        TruncationBox {
            upper: vec![gamma; self.econ.n_goods()],
        }
    }

    /// Budget membership `<p, x> <= <p, a>` with slack `tol_budget`.
    pub fn in_budget(&self, x: &[f64], tol_budget: f64) -> bool {
        assert_eq!(x.len(), self.econ.n_goods());
        dot(self.price.coords(), x) <= self.wealth() + tol_budget
    }

    /// Exact utility-maximizing bundle on the budget set.
    ///
    /// Linear utilities pick the corner with the best coefficient-to-price
    /// ratio; ties resolve to the lexicographically smallest corner bundle.
    /// Zero wealth collapses every family to the zero bundle.
    pub fn demand(&self) -> Vec<f64> {
        let p = self.price.coords();
        let a = self.endowment();
        let l = p.len();
        let w = dot(p, a);
        match self.utility() {
            Utility::Linear { coeffs } => {
                let ratios: Vec<f64> = coeffs.iter().zip(p).map(|(c, ph)| c / ph).collect();
                let best = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                // Larger index <=> lexicographically smaller corner bundle.
                let h = (0..l).filter(|&h| ratios[h] == best).max().unwrap();
                let mut x = vec![0.0; l];
                if w > 0.0 {
                    x[h] = w / p[h];
                }
                x
            }
            Utility::CobbDouglasLog { alphas } => {
                let total: f64 = alphas.iter().sum();
                if w <= 0.0 || total <= 0.0 {
                    return vec![0.0; l];
                }
                (0..l).map(|h| alphas[h] / total * w / p[h]).collect()
            }
            Utility::LogShifted { alphas } => log_shifted_demand(alphas, p, w),
            Utility::Ces { weights, rho } => {
                if w <= 0.0 {
                    return vec![0.0; l];
                }
                let sigma = 1.0 / (1.0 - rho);
                let shares: Vec<f64> = weights
                    .iter()
                    .zip(p)
                    .map(|(wh, ph)| (wh / ph).powf(sigma))
                    .collect();
                let denom = dot(p, &shares);
                shares.iter().map(|s| w * s / denom).collect()
            }
        }
    }

    /// Preferred-set membership: `U(x) >= U(demand) - tol_pref`, with the
    /// truncation box intersected in [`PreferredMode::Truncated`] mode.
    /// Boundary bundles of interior-only families evaluate to `-inf` and
    /// are never preferred (unless the demand utility itself is `-inf`).
    pub fn preferred(&self, x: &[f64], mode: PreferredMode, tol_pref: f64) -> bool {
        assert_eq!(x.len(), self.econ.n_goods());
        if mode == PreferredMode::Truncated && !self.truncation_bound().contains(x) {
            return false;
        }
        let u = self.utility();
        u.eval_extended(x) >= u.eval_extended(&self.demand()) - tol_pref
    }

    /// Point cloud of the truncated preferred set: every lattice point of
    /// the truncation box at step `resolution` passing the membership test,
    /// with the demand bundle appended when it is not itself a passing
    /// lattice point. Never empty.
    pub fn sample_preferred_set(
        &self,
        resolution: f64,
        cfg: &Config,
    ) -> Result<CompactSetApprox, SampleError> {
        let l = self.econ.n_goods();
        let k_max = grid_steps(self.truncation_bound().gamma(), resolution)?;
        let axis = k_max as u128 + 1;
        let required = axis.checked_pow(l as u32).unwrap_or(u128::MAX);
        if required > cfg.point_budget as u128 {
            let per_axis = (cfg.point_budget as f64).powf(1.0 / l as f64);
            let gamma = self.truncation_bound().gamma();
            return Err(SampleError::PointBudget {
                required,
                budget: cfg.point_budget,
                suggested: gamma / (per_axis - 2.0).max(1.0),
            });
        }

        let demand = self.demand();
        let utility = self.utility();
        let threshold = utility.eval_extended(&demand) - cfg.tol_pref;

        let mut points: Vec<f64> = Vec::new();
        let mut x = vec![0.0; l];
        let mut idx = vec![0usize; l];
        let mut demand_emitted = false;
        'grid: loop {
            for h in 0..l {
                x[h] = idx[h] as f64 * resolution;
            }
            if utility.eval_extended(&x) >= threshold {
                points.extend_from_slice(&x);
                if x == demand {
                    demand_emitted = true;
                }
            }
            // odometer, last axis fastest
            for h in (0..l).rev() {
                if idx[h] < k_max {
                    idx[h] += 1;
                    continue 'grid;
                }
                idx[h] = 0;
            }
            break;
        }
        if !demand_emitted {
            points.extend_from_slice(&demand);
        }
        Ok(
            CompactSetApprox::new(l, points, resolution, utility.concave())
                .expect("sampled cloud is well-formed"),
        )
    }

    /// Support-function samples of the lattice cloud that
    /// [`BudgetQuery::sample_preferred_set`] would produce, computed without
    /// materializing it.
    ///
    /// Strict monotonicity makes membership monotone along the last axis, so
    /// each grid column contributes only its lowest member and its top point
    /// as support candidates; the demand bundle is always a candidate.
    /// Returns one `(value, point)` maximizer per direction.
    pub(crate) fn support_samples(
        &self,
        dirs: &[Vec<f64>],
        resolution: f64,
        cfg: &Config,
    ) -> Result<Vec<(f64, Vec<f64>)>, SampleError> {
        let l = self.econ.n_goods();
        let k_max = grid_steps(self.truncation_bound().gamma(), resolution)?;
        let axis = k_max as u128 + 1;
        let columns = axis.checked_pow(l as u32 - 1).unwrap_or(u128::MAX);
        if columns > cfg.column_budget as u128 {
            return Err(SampleError::ColumnBudget {
                required: columns,
                budget: cfg.column_budget,
            });
        }

        let demand = self.demand();
        let utility = self.utility();
        let threshold = utility.eval_extended(&demand) - cfg.tol_pref;

        let mut best: Vec<(f64, Vec<f64>)> = vec![(f64::NEG_INFINITY, Vec::new()); dirs.len()];
        let update = |best: &mut Vec<(f64, Vec<f64>)>, x: &[f64]| {
            for (d, slot) in dirs.iter().zip(best.iter_mut()) {
                let v = dot(d, x);
                if v > slot.0 {
                    *slot = (v, x.to_vec());
                }
            }
        };

        let mut x = vec![0.0; l];
        let mut idx = vec![0usize; l.saturating_sub(1)];
        'columns: loop {
            for h in 0..l - 1 {
                x[h] = idx[h] as f64 * resolution;
            }
            // Lowest member of the column by bisection; membership is
            // monotone in the last coordinate.
            x[l - 1] = k_max as f64 * resolution;
            if utility.eval_extended(&x) >= threshold {
                let (mut lo, mut hi) = (0usize, k_max);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    x[l - 1] = mid as f64 * resolution;
                    if utility.eval_extended(&x) >= threshold {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                x[l - 1] = lo as f64 * resolution;
                update(&mut best, &x);
                if lo < k_max {
                    x[l - 1] = k_max as f64 * resolution;
                    update(&mut best, &x);
                }
            }
            for h in (0..l - 1).rev() {
                if idx[h] < k_max {
                    idx[h] += 1;
                    continue 'columns;
                }
                idx[h] = 0;
            }
            break;
        }
        update(&mut best, &demand);
        Ok(best)
    }
}

/// Waterfilling solution of `max sum alpha_h ln(1 + x_h)` subject to
/// `<p, x> <= w`, `x >= 0`: active coordinates share a common multiplier
/// `lambda = (sum of active alphas) / (w + sum of active prices)`.
fn log_shifted_demand(alphas: &[f64], p: &[f64], w: f64) -> Vec<f64> {
    let l = p.len();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&i, &j| {
        (alphas[j] / p[j])
            .partial_cmp(&(alphas[i] / p[i]))
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut alpha_sum = 0.0;
    let mut price_sum = 0.0;
    let mut lambda = f64::INFINITY;
    let mut active = 0;
    for k in 0..l {
        let h = order[k];
        alpha_sum += alphas[h];
        price_sum += p[h];
        let cand = alpha_sum / (w + price_sum);
        // Consistent iff every included ratio exceeds the multiplier.
        if alphas[h] / p[h] > cand {
            lambda = cand;
            active = k + 1;
        }
    }
    let mut x = vec![0.0; l];
    for &h in order.iter().take(active) {
        x[h] = (alphas[h] / (lambda * p[h]) - 1.0).max(0.0);
    }
    x
}

/// Number of lattice steps fitting in `[0, gamma]` at the given step size.
pub(crate) fn grid_steps(gamma: f64, resolution: f64) -> Result<usize, SampleError> {
    if !resolution.is_finite() || resolution <= 0.0 {
        return Err(SampleError::BadResolution(resolution));
    }
    let ratio = gamma / resolution;
    // Tiny relative slack so an exact multiple stays on the grid.
    Ok((ratio * (1.0 + 1e-12) + 1e-12).floor() as usize)
}
