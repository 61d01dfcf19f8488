//! Per-state Walrasian equilibria: excess demand, a damped tatonnement
//! solver with a proximal homotopy fallback, and a set-valued clearing
//! certificate at a candidate price.
//!
//! Demand is closed-form, so excess demand is exact and satisfies Walras'
//! law to roundoff; the only numerical work is the price search on the
//! simplex.

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::Config;
use crate::correspondences::BudgetQuery;
use crate::economy::{Economy, PriceVector};
use crate::setval::{aggregate_preferred_set, AumannMethod, SetError};
use crate::util::{euclid_dist, linf_norm};

/// Aggregate excess demand `sum_t mu_t (demand_t(p) - a_t)` in one state.
pub fn excess_demand(econ: &Economy, state: usize, price: &PriceVector) -> Vec<f64> {
    assert!(state < econ.n_states(), "state index out of range");
    let l = econ.n_goods();
    let mut z = vec![0.0; l];
    for t in 0..econ.n_agents() {
        let w = econ.agents().weight(t);
        let q = BudgetQuery::new(econ, t, state, price.clone());
        let d = q.demand();
        let a = econ.endowment(t, state);
        for h in 0..l {
            z[h] += w * (d[h] - a[h]);
        }
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Tatonnement,
    Homotopy,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "state {state}: no price with clearing residual <= {tol:.3e} found \
         after {iterations} iterations (best residual {residual:.3e})"
    )]
    NonConvergence {
        state: usize,
        iterations: usize,
        residual: f64,
        tol: f64,
    },
}

/// A cleared spot market in one state. `clearing_residual` is the full
/// excess-demand vector recomputed from scratch at the returned price;
/// `trajectory_hash` digests every accepted price iterate, so identical
/// runs are bit-identical end to end.
#[derive(Debug, Clone, Serialize)]
pub struct StateEquilibrium {
    pub state: usize,
    pub price: PriceVector,
    /// Demand bundle per agent at the equilibrium price.
    pub allocation: Vec<Vec<f64>>,
    pub clearing_residual: Vec<f64>,
    pub iterations: usize,
    pub method: SolveMethod,
    pub trajectory_hash: String,
}

impl StateEquilibrium {
    /// Sup norm of the clearing residual, the certified quantity.
    pub fn residual_sup(&self) -> f64 {
        linf_norm(&self.clearing_residual)
    }
}

struct Search<'e> {
    econ: &'e Economy,
    state: usize,
    floor: f64,
    iterations: usize,
    hasher: Sha256,
}

impl Search<'_> {
    fn accept(&mut self, p: &PriceVector) {
        for c in p.coords() {
            self.hasher.update(c.to_le_bytes());
        }
    }

    fn step(&self, p: &PriceVector, dir: &[f64], lambda: f64) -> PriceVector {
        let raw: Vec<f64> = p
            .coords()
            .iter()
            .zip(dir)
            .map(|(pi, di)| pi + lambda * di)
            .collect();
        PriceVector::project(&raw, self.floor)
    }

    /// Damped ascent along `g(p)`; halves the step on residual increase,
    /// grows it gently on success. Returns the best iterate reached.
    fn damped_phase<G>(
        &mut self,
        start: PriceVector,
        g: G,
        tol: f64,
        budget: usize,
    ) -> (PriceVector, f64)
    where
        G: Fn(&Self, &PriceVector) -> Vec<f64>,
    {
        let mut p = start;
        let mut gp = g(self, &p);
        let mut r = linf_norm(&gp);
        let mut lambda = 0.25;
        let mut spent = 0;
        while r > tol && spent < budget && lambda > 1e-16 {
            let cand = self.step(&p, &gp, lambda);
            let gc = g(self, &cand);
            let rc = linf_norm(&gc);
            spent += 1;
            self.iterations += 1;
            if rc < r {
                p = cand;
                gp = gc;
                r = rc;
                lambda = (lambda * 1.05).min(4.0);
                self.accept(&p);
            } else {
                lambda *= 0.5;
            }
        }
        (p, r)
    }
}

/// Solve one state's market for a clearing price.
///
/// Phase one is adaptive tatonnement from the uniform price. If it stalls,
/// a proximal homotopy takes over: stages solve `z(p) - kappa (p - anchor)`
/// with `kappa` shrinking geometrically, each warm-started from the last,
/// followed by a final tatonnement polish.
pub fn solve_state_equilibrium(
    econ: &Economy,
    state: usize,
    cfg: &Config,
) -> Result<StateEquilibrium, SolveError> {
    assert!(state < econ.n_states(), "state index out of range");
    let l = econ.n_goods();
    let mut search = Search {
        econ,
        state,
        floor: cfg.price_floor,
        iterations: 0,
        hasher: Sha256::new(),
    };
    let start = PriceVector::uniform(l);
    search.accept(&start);

    let mut method = SolveMethod::Tatonnement;
    let (mut p, mut r) = search.damped_phase(
        start,
        |s, q| excess_demand(s.econ, s.state, q),
        cfg.tol_clear,
        cfg.max_iter,
    );

    if r > cfg.tol_clear {
        method = SolveMethod::Homotopy;
        let anchor = PriceVector::uniform(l);
        let mut kappa: f64 = 1.0;
        while kappa > 1e-14 {
            let stage_tol = (kappa * 1e-3).max(cfg.tol_clear * 0.5);
            let (next, _) = search.damped_phase(
                p,
                |s, q| {
                    let mut g = excess_demand(s.econ, s.state, q);
                    for h in 0..l {
                        g[h] -= kappa * (q.coords()[h] - anchor.coords()[h]);
                    }
                    g
                },
                stage_tol,
                400,
            );
            p = next;
            kappa *= 0.35;
        }
        let (polished, pr) = search.damped_phase(
            p,
            |s, q| excess_demand(s.econ, s.state, q),
            cfg.tol_clear,
            cfg.max_iter,
        );
        p = polished;
        r = pr;
    }

    if r > cfg.tol_clear {
        return Err(SolveError::NonConvergence {
            state,
            iterations: search.iterations,
            residual: r,
            tol: cfg.tol_clear,
        });
    }

    let clearing_residual = excess_demand(econ, state, &p);
    let allocation: Vec<Vec<f64>> = (0..econ.n_agents())
        .map(|t| BudgetQuery::new(econ, t, state, p.clone()).demand())
        .collect();
    let digest = search.hasher.finalize();
    let trajectory_hash = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(StateEquilibrium {
        state,
        price: p,
        allocation,
        clearing_residual,
        iterations: search.iterations,
        method,
        trajectory_hash,
    })
}

/// Clearing prices for every state, in state order.
pub fn solve_all_states(econ: &Economy, cfg: &Config) -> Result<Vec<StateEquilibrium>, SolveError> {
    if cfg.parallel && econ.n_states() > 1 {
        use rayon::prelude::*;
        (0..econ.n_states())
            .into_par_iter()
            .map(|s| solve_state_equilibrium(econ, s, cfg))
            .collect()
    } else {
        (0..econ.n_states())
            .map(|s| solve_state_equilibrium(econ, s, cfg))
            .collect()
    }
}

/// Set-valued clearing check: distance from the aggregate endowment to the
/// sampled aggregate preferred set at a candidate price.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateCertificate {
    pub state: usize,
    /// Euclidean distance from the target to the nearest aggregate point.
    pub distance: f64,
    pub method: AumannMethod,
    pub target: Vec<f64>,
    pub witness: Vec<f64>,
}

pub fn aggregate_excess_certificate(
    econ: &Economy,
    state: usize,
    price: &PriceVector,
    resolution: f64,
    cfg: &Config,
) -> Result<AggregateCertificate, SetError> {
    let target: Vec<f64> = {
        let mut sum = vec![0.0; econ.n_goods()];
        for t in 0..econ.n_agents() {
            let w = econ.agents().weight(t);
            for (h, v) in econ.endowment(t, state).iter().enumerate() {
                sum[h] += w * v;
            }
        }
        sum
    };
    let agg = aggregate_preferred_set(econ, state, price, resolution, cfg)?;
    let mut distance = f64::INFINITY;
    let mut witness = agg.set.point(0).to_vec();
    for pt in agg.set.iter() {
        let d = euclid_dist(pt, &target);
        if d < distance {
            distance = d;
            witness = pt.to_vec();
        }
    }
    Ok(AggregateCertificate {
        state,
        distance,
        method: agg.method,
        target,
        witness,
    })
}
