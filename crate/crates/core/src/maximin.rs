//! Maximin rational expectations equilibria.
//!
//! A price system (one clearing price per state) reveals information: two
//! states are indistinguishable from prices alone when their prices chain
//! together within `tol_price`. Each agent refines their private partition
//! with that price information; the maximin payoff of a state plan is the
//! worst utility across the refined block. The candidate equilibrium
//! allocates every agent their per-state demand, and a certificate checks
//! budgets, market clearing, and the absence of profitable block deviations
//! by brute-force search over budget-frontier grids.

use serde::Serialize;

use crate::config::Config;
use crate::correspondences::{BudgetQuery, PreferredMode};
use crate::economy::{Economy, Partition, PriceVector};
use crate::util::{dot, linf_norm};
use crate::walras::{solve_all_states, SolveError, StateEquilibrium};

/// One clearing price and demand profile per state.
#[derive(Debug, Clone, Serialize)]
pub struct PriceSystem {
    pub equilibria: Vec<StateEquilibrium>,
}

impl PriceSystem {
    pub fn n_states(&self) -> usize {
        self.equilibria.len()
    }

    pub fn price(&self, s: usize) -> &PriceVector {
        &self.equilibria[s].price
    }

    pub fn prices(&self) -> Vec<PriceVector> {
        self.equilibria.iter().map(|e| e.price.clone()).collect()
    }
}

pub fn build_price_system(econ: &Economy, cfg: &Config) -> Result<PriceSystem, SolveError> {
    Ok(PriceSystem {
        equilibria: solve_all_states(econ, cfg)?,
    })
}

/// Partition of states by price revelation: the transitive closure of
/// "prices within `tol_price` in sup norm". Chaining keeps the relation an
/// equivalence at the cost of lumping slow price drifts together.
pub fn sigma_pi_partition(prices: &[PriceVector], tol_price: f64) -> Partition {
    let n = prices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut s: usize) -> usize {
        while parent[s] != s {
            parent[s] = parent[parent[s]];
            s = parent[s];
        }
        s
    }
    for i in 0..n {
        for j in i + 1..n {
            if prices[i].linf_dist(&prices[j]) <= tol_price {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for s in 0..n {
        let r = find(&mut parent, s);
        groups.entry(r).or_default().push(s);
    }
    Partition::new(n, groups.into_values().collect()).expect("closure blocks cover states")
}

/// Price-refined information: `G_t` is the join of the agent's private
/// partition with the price partition.
#[derive(Debug, Clone, Serialize)]
pub struct InfoStructure {
    pub sigma_pi: Partition,
    pub refined: Vec<Partition>,
}

pub fn information_structure(
    econ: &Economy,
    prices: &[PriceVector],
    tol_price: f64,
) -> InfoStructure {
    assert_eq!(prices.len(), econ.n_states());
    let sigma_pi = sigma_pi_partition(prices, tol_price);
    let refined = (0..econ.n_agents())
        .map(|t| {
            econ.partition(t)
                .join(&sigma_pi)
                .expect("partitions share the state universe")
        })
        .collect();
    InfoStructure { sigma_pi, refined }
}

/// Worst-case utility of a state plan across a block of states.
/// Boundary bundles of interior-only utilities contribute `-inf`.
pub fn maximin_utility(econ: &Economy, agent: usize, block: &[usize], plan: &[Vec<f64>]) -> f64 {
    block
        .iter()
        .map(|&s| econ.utility(agent, s).eval_extended(&plan[s]))
        .fold(f64::INFINITY, f64::min)
}

/// Membership in the product budget set: the plan is affordable state by
/// state at the state prices.
pub fn in_bree(
    econ: &Economy,
    agent: usize,
    plan: &[Vec<f64>],
    prices: &[PriceVector],
    tol_budget: f64,
) -> bool {
    (0..econ.n_states()).all(|s| {
        BudgetQuery::new(econ, agent, s, prices[s].clone()).in_budget(&plan[s], tol_budget)
    })
}

/// Replace any bundle that is unaffordable or outside the truncated
/// preferred set with that agent-state demand. Demand-built allocations
/// come back untouched; the return lists the `(agent, state)` pairs
/// repaired.
pub fn repair_allocation(
    econ: &Economy,
    prices: &[PriceVector],
    allocation: &mut [Vec<Vec<f64>>],
    cfg: &Config,
) -> Vec<(usize, usize)> {
    let mut repaired = Vec::new();
    for t in 0..econ.n_agents() {
        for s in 0..econ.n_states() {
            let q = BudgetQuery::new(econ, t, s, prices[s].clone());
            let x = &allocation[t][s];
            if !q.in_budget(x, cfg.tol_budget)
                || !q.preferred(x, PreferredMode::Truncated, cfg.tol_pref)
            {
                allocation[t][s] = q.demand();
                repaired.push((t, s));
            }
        }
    }
    repaired
}

/// Outcome of the block deviation search for one agent and one refined
/// information block.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationRecord {
    pub agent: usize,
    pub block: Vec<usize>,
    /// Maximin utility of the candidate allocation on this block.
    pub baseline: f64,
    /// Best maximin utility over the searched deviation plans.
    pub best: f64,
    /// `best - baseline`; `+inf` when the baseline is `-inf` and some
    /// deviation is finite.
    pub improvement: f64,
    pub candidates_per_state: Vec<usize>,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximinCertificate {
    pub budget_ok: bool,
    pub max_budget_residual: f64,
    pub clearing_ok: bool,
    pub max_clearing_residual: f64,
    pub deviation_ok: bool,
    /// Largest deviation improvement over all agents and blocks; at most
    /// `tol_dev` when `deviation_ok`.
    pub max_improvement: f64,
    pub deviations: Vec<DeviationRecord>,
    pub sigma_pi_blocks: Vec<Vec<usize>>,
    pub refined_blocks: Vec<Vec<Vec<usize>>>,
    pub tol_budget: f64,
    pub tol_clear: f64,
    pub tol_dev: f64,
    pub grid_n: usize,
    pub passed: bool,
}

/// All compositions `k` of `total` into `parts` nonnegative integers, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    assert!(parts >= 1);
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[pos] = k;
            rec(cur, pos + 1, left - k, out);
        }
    }
    rec(&mut cur, 0, total, &mut out);
    out
}

/// Budget-frontier candidate bundles for one agent-state: wealth split
/// across goods in integer shares of `grid_n`, plus the demand bundle.
/// Every candidate spends the whole budget, so all are affordable.
fn frontier_candidates(q: &BudgetQuery<'_>, grid_n: usize) -> Vec<Vec<f64>> {
    let p = q.price().coords();
    let w = q.wealth();
    let l = p.len();
    let mut cands: Vec<Vec<f64>> = compositions(grid_n, l)
        .into_iter()
        .map(|k| {
            (0..l)
                .map(|h| k[h] as f64 / grid_n as f64 * w / p[h])
                .collect()
        })
        .collect();
    cands.push(q.demand());
    cands
}

/// Search for a block deviation improving the maximin payoff.
///
/// Candidates per state are the budget-frontier grid plus demand. Over a
/// product of independent per-state sets, the best maximin equals the min
/// of per-state maxima, so small blocks are enumerated exhaustively and
/// large ones fall back to the per-state argmax plan; both find the same
/// optimum over the candidate set, the flag records which ran.
fn deviation_search(
    econ: &Economy,
    agent: usize,
    block: &[usize],
    allocation: &[Vec<Vec<f64>>],
    prices: &[PriceVector],
    cfg: &Config,
) -> DeviationRecord {
    let baseline = maximin_utility(econ, agent, block, &allocation[agent]);
    let per_state: Vec<Vec<Vec<f64>>> = block
        .iter()
        .map(|&s| {
            frontier_candidates(
                &BudgetQuery::new(econ, agent, s, prices[s].clone()),
                cfg.grid_n,
            )
        })
        .collect();
    let counts: Vec<usize> = per_state.iter().map(|c| c.len()).collect();
    let combos = counts
        .iter()
        .map(|&c| c as u128)
        .try_fold(1u128, |a, c| a.checked_mul(c))
        .unwrap_or(u128::MAX);

    let best = if combos <= cfg.combo_budget as u128 {
        let mut best = f64::NEG_INFINITY;
        let mut idx = vec![0usize; block.len()];
        'combo: loop {
            let val = block
                .iter()
                .enumerate()
                .map(|(i, &s)| econ.utility(agent, s).eval_extended(&per_state[i][idx[i]]))
                .fold(f64::INFINITY, f64::min);
            if val > best {
                best = val;
            }
            for i in (0..block.len()).rev() {
                if idx[i] + 1 < per_state[i].len() {
                    idx[i] += 1;
                    continue 'combo;
                }
                idx[i] = 0;
            }
            break;
        }
        best
    } else {
        block
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                per_state[i]
                    .iter()
                    .map(|x| econ.utility(agent, s).eval_extended(x))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    };

    let improvement = if best > baseline {
        best - baseline
    } else {
        0.0
    };
    DeviationRecord {
        agent,
        block: block.to_vec(),
        baseline,
        best,
        improvement,
        candidates_per_state: counts,
        exhaustive: combos <= cfg.combo_budget as u128,
    }
}

/// Certify a candidate allocation and price system as a maximin
/// equilibrium. Never errs: failed conditions come back as verdicts.
pub fn verify_maximin_ree(
    econ: &Economy,
    allocation: &[Vec<Vec<f64>>],
    prices: &[PriceVector],
    cfg: &Config,
) -> MaximinCertificate {
    assert_eq!(allocation.len(), econ.n_agents());
    assert_eq!(prices.len(), econ.n_states());

    let mut max_budget_residual = f64::NEG_INFINITY;
    for t in 0..econ.n_agents() {
        for s in 0..econ.n_states() {
            let p = prices[s].coords();
            let spent = dot(p, &allocation[t][s]);
            let wealth = dot(p, econ.endowment(t, s));
            max_budget_residual = max_budget_residual.max(spent - wealth);
        }
    }
    let budget_ok = max_budget_residual <= cfg.tol_budget;

    let mut max_clearing_residual = f64::NEG_INFINITY;
    for s in 0..econ.n_states() {
        let mut z = vec![0.0; econ.n_goods()];
        for t in 0..econ.n_agents() {
            let w = econ.agents().weight(t);
            let a = econ.endowment(t, s);
            for h in 0..econ.n_goods() {
                z[h] += w * (allocation[t][s][h] - a[h]);
            }
        }
        max_clearing_residual = max_clearing_residual.max(linf_norm(&z));
    }
    let clearing_ok = max_clearing_residual <= cfg.tol_clear;

    let info = information_structure(econ, prices, cfg.tol_price);
    let jobs: Vec<(usize, Vec<usize>)> = (0..econ.n_agents())
        .flat_map(|t| info.refined[t].blocks().iter().map(move |b| (t, b.clone())))
        .collect();
    let deviations: Vec<DeviationRecord> = if cfg.parallel && jobs.len() > 1 {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|(t, b)| deviation_search(econ, *t, b, allocation, prices, cfg))
            .collect()
    } else {
        jobs.iter()
            .map(|(t, b)| deviation_search(econ, *t, b, allocation, prices, cfg))
            .collect()
    };
    let max_improvement = deviations
        .iter()
        .map(|d| d.improvement)
        .fold(0.0f64, f64::max);
    let deviation_ok = max_improvement <= cfg.tol_dev;

    MaximinCertificate {
        budget_ok,
        max_budget_residual,
        clearing_ok,
        max_clearing_residual,
        deviation_ok,
        max_improvement,
        deviations,
        sigma_pi_blocks: info.sigma_pi.blocks().to_vec(),
        refined_blocks: info.refined.iter().map(|p| p.blocks().to_vec()).collect(),
        tol_budget: cfg.tol_budget,
        tol_clear: cfg.tol_clear,
        tol_dev: cfg.tol_dev,
        grid_n: cfg.grid_n,
        passed: budget_ok && clearing_ok && deviation_ok,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MreeSolution {
    pub equilibria: Vec<StateEquilibrium>,
    pub sigma_pi: Partition,
    pub refined: Vec<Partition>,
    /// `allocation[agent][state]` is the consumed bundle.
    pub allocation: Vec<Vec<Vec<f64>>>,
    pub repairs: Vec<(usize, usize)>,
    pub certificate: MaximinCertificate,
}

/// Construct a maximin equilibrium: clear every state market, refine
/// information with the price partition, allocate per-state demand, repair
/// any stray bundle, and certify the result.
pub fn compute_maximin_ree(econ: &Economy, cfg: &Config) -> Result<MreeSolution, SolveError> {
    let ps = build_price_system(econ, cfg)?;
    let prices = ps.prices();
    let info = information_structure(econ, &prices, cfg.tol_price);
    let mut allocation: Vec<Vec<Vec<f64>>> = (0..econ.n_agents())
        .map(|t| {
            (0..econ.n_states())
                .map(|s| ps.equilibria[s].allocation[t].clone())
                .collect()
        })
        .collect();
    let repairs = repair_allocation(econ, &prices, &mut allocation, cfg);
    let certificate = verify_maximin_ree(econ, &allocation, &prices, cfg);
    Ok(MreeSolution {
        equilibria: ps.equilibria,
        sigma_pi: info.sigma_pi,
        refined: info.refined,
        allocation,
        repairs,
        certificate,
    })
}
