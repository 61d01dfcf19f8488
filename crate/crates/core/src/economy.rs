//! Economy model: states, weighted agents, information partitions, random
//! utilities, endowments, and prices.
//!
//! Construction enforces structural invariants (shapes, positivity of
//! probabilities and weights, partitions covering the state space) and fails
//! with a path-annotated error. Economic assumptions that a well-formed
//! economy can still violate (positive aggregate endowment, monotone and
//! concave utilities, parameter ranges) are checked by [`Economy::validate`],
//! which returns a report instead of an error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{DEFAULT_PRICE_FLOOR, PRICE_SUM_TOL, PROB_SUM_TOL};
use crate::util::dot;

#[derive(Debug, Error)]
pub enum EconomyError {
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
}

impl EconomyError {
    pub(crate) fn at(path: impl Into<String>, msg: impl Into<String>) -> Self {
        EconomyError::Invalid {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn path(&self) -> &str {
        match self {
            EconomyError::Invalid { path, .. } => path,
        }
    }
}

fn ensure(cond: bool, path: &str, msg: impl Into<String>) -> Result<(), EconomyError> {
    if cond {
        Ok(())
    } else {
        Err(EconomyError::at(path, msg))
    }
}

fn ensure_unique(ids: &[String], path: &str) -> Result<(), EconomyError> {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        ensure(seen.insert(id), path, format!("duplicate id {id:?}"))?;
    }
    Ok(())
}

/// Finite state space with strictly positive probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpace {
    ids: Vec<String>,
    probs: Vec<f64>,
}

impl StateSpace {
    pub fn new(ids: Vec<String>, probs: Vec<f64>) -> Result<Self, EconomyError> {
        ensure(!ids.is_empty(), "states", "at least one state required")?;
        ensure(
            ids.len() == probs.len(),
            "states",
            format!("{} ids but {} probabilities", ids.len(), probs.len()),
        )?;
        ensure_unique(&ids, "states.id")?;
        for (i, p) in probs.iter().enumerate() {
            ensure(
                p.is_finite() && *p > 0.0,
                &format!("states[{i}].prob"),
                format!("probability must be finite and > 0, got {p}"),
            )?;
        }
        let sum: f64 = probs.iter().sum();
        ensure(
            (sum - 1.0).abs() <= PROB_SUM_TOL,
            "states.prob",
            format!("probabilities sum to {sum}, expected 1"),
        )?;
        Ok(StateSpace { ids, probs })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, s: usize) -> &str {
        &self.ids[s]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn prob(&self, s: usize) -> f64 {
        self.probs[s]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

/// Finite grid of agents with strictly positive weights (atom masses).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentGrid {
    ids: Vec<String>,
    weights: Vec<f64>,
}

impl AgentGrid {
    pub fn new(ids: Vec<String>, weights: Vec<f64>) -> Result<Self, EconomyError> {
        ensure(!ids.is_empty(), "agents", "at least one agent required")?;
        ensure(
            ids.len() == weights.len(),
            "agents",
            format!("{} ids but {} weights", ids.len(), weights.len()),
        )?;
        ensure_unique(&ids, "agents.id")?;
        for (i, w) in weights.iter().enumerate() {
            ensure(
                w.is_finite() && *w > 0.0,
                &format!("agents[{i}].weight"),
                format!("weight must be finite and > 0, got {w}"),
            )?;
        }
        Ok(AgentGrid { ids, weights })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, t: usize) -> &str {
        &self.ids[t]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weight(&self, t: usize) -> f64 {
        self.weights[t]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

/// Partition of the state indices `0..n` into disjoint covering blocks.
///
/// Canonical form: blocks sorted internally, ordered by first element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    n_states: usize,
    blocks: Vec<Vec<usize>>,
    /// block index per state; inverse of `blocks`.
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(n_states: usize, blocks: Vec<Vec<usize>>) -> Result<Self, EconomyError> {
        let mut block_of = vec![usize::MAX; n_states];
        for (b, block) in blocks.iter().enumerate() {
            ensure(!block.is_empty(), "partition", "empty block")?;
            for &s in block {
                ensure(
                    s < n_states,
                    "partition",
                    format!("state index {s} out of range (n_states = {n_states})"),
                )?;
                ensure(
                    block_of[s] == usize::MAX,
                    "partition",
                    format!("state {s} appears in more than one block"),
                )?;
                block_of[s] = b;
            }
        }
        ensure(
            block_of.iter().all(|&b| b != usize::MAX),
            "partition",
            "blocks do not cover the state space",
        )?;
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_unstable_by_key(|b| b[0]);
        for (b, block) in blocks.iter().enumerate() {
            for &s in block {
                block_of[s] = b;
            }
        }
        Ok(Partition {
            n_states,
            blocks,
            block_of,
        })
    }

    /// One block containing every state.
    pub fn trivial(n_states: usize) -> Self {
        Partition::new(n_states, vec![(0..n_states).collect()]).expect("trivial partition")
    }

    /// Every state its own block.
    pub fn discrete(n_states: usize) -> Self {
        Partition::new(n_states, (0..n_states).map(|s| vec![s]).collect())
            .expect("discrete partition")
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_containing(&self, s: usize) -> &[usize] {
        &self.blocks[self.block_of[s]]
    }

    pub fn block_index(&self, s: usize) -> usize {
        self.block_of[s]
    }

    /// Coarsest common refinement: blocks are the nonempty pairwise
    /// intersections of `self` and `other`.
    pub fn join(&self, other: &Partition) -> Result<Partition, EconomyError> {
        ensure(
            self.n_states == other.n_states,
            "partition.join",
            format!(
                "operands partition different universes ({} vs {} states)",
                self.n_states, other.n_states
            ),
        )?;
        let mut groups: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
            std::collections::BTreeMap::new();
        for s in 0..self.n_states {
            groups
                .entry((self.block_of[s], other.block_of[s]))
                .or_default()
                .push(s);
        }
        Partition::new(self.n_states, groups.into_values().collect())
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n_states == coarser.n_states
            && self.blocks.iter().all(|b| {
                b.iter()
                    .all(|&s| coarser.block_of[s] == coarser.block_of[b[0]])
            })
    }
}

/// Per-(agent, state) utility over consumption bundles.
///
/// All families are concave; all except `CobbDouglasLog` are continuous and
/// strictly monotone on the whole nonnegative orthant. `CobbDouglasLog` is
/// the interior-only family: it diverges to `-inf` on the boundary and is
/// kept for its exact closed-form demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Utility {
    Linear { coeffs: Vec<f64> },
    LogShifted { alphas: Vec<f64> },
    Ces { weights: Vec<f64>, rho: f64 },
    CobbDouglasLog { alphas: Vec<f64> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UtilityError {
    #[error("interior-only utility evaluated on the boundary (coordinate {coord} is zero)")]
    BoundaryPoint { coord: usize },
}

impl Utility {
    pub fn family_name(&self) -> &'static str {
        match self {
            Utility::Linear { .. } => "linear",
            Utility::LogShifted { .. } => "log_shifted",
            Utility::Ces { .. } => "ces",
            Utility::CobbDouglasLog { .. } => "cobb_douglas_log",
        }
    }

    pub fn goods(&self) -> usize {
        match self {
            Utility::Linear { coeffs } => coeffs.len(),
            Utility::LogShifted { alphas } => alphas.len(),
            Utility::Ces { weights, .. } => weights.len(),
            Utility::CobbDouglasLog { alphas } => alphas.len(),
        }
    }

    /// True when the family is only defined (finite) on the open orthant.
    pub fn interior_only(&self) -> bool {
        matches!(self, Utility::CobbDouglasLog { .. })
    }

    /// Utility of `x >= 0`. Errors on boundary points of interior-only
    /// families; use [`Utility::eval_extended`] for `-inf` semantics.
    pub fn eval(&self, x: &[f64]) -> Result<f64, UtilityError> {
        if self.interior_only() {
            if let Some(coord) = x.iter().position(|&v| v <= 0.0) {
                return Err(UtilityError::BoundaryPoint { coord });
            }
        }
        Ok(self.eval_extended(x))
    }

    /// Utility with extended-real semantics: boundary points of
    /// interior-only families map to `-inf` instead of an error.
    pub fn eval_extended(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.goods(), "bundle dimension mismatch");
        debug_assert!(x.iter().all(|&v| v >= 0.0), "bundles are nonnegative");
        match self {
            Utility::Linear { coeffs } => dot(coeffs, x),
            Utility::LogShifted { alphas } => {
                x.iter().zip(alphas).map(|(v, a)| a * (1.0 + v).ln()).sum()
            }
            Utility::Ces { weights, rho } => {
                let s: f64 = x.iter().zip(weights).map(|(v, w)| w * v.powf(*rho)).sum();
                s.powf(1.0 / rho)
            }
            Utility::CobbDouglasLog { alphas } => {
                let mut u = 0.0;
                for (v, a) in x.iter().zip(alphas) {
                    if *v <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    u += a * v.ln();
                }
                u
            }
        }
    }

    fn params(&self) -> &[f64] {
        match self {
            Utility::Linear { coeffs } => coeffs,
            Utility::LogShifted { alphas } => alphas,
            Utility::Ces { weights, .. } => weights,
            Utility::CobbDouglasLog { alphas } => alphas,
        }
    }

    /// Family parameter ranges that the declared invariants require.
    /// Violations are validation findings, not construction errors.
    pub fn params_valid(&self) -> bool {
        let positive = self.params().iter().all(|v| v.is_finite() && *v > 0.0);
        match self {
            Utility::Linear { .. } | Utility::LogShifted { .. } => positive,
            Utility::Ces { rho, .. } => positive && *rho > 0.0 && *rho < 1.0,
            Utility::CobbDouglasLog { alphas } => {
                positive && (alphas.iter().sum::<f64>() - 1.0).abs() <= 1e-9
            }
        }
    }

    /// Strict monotonicity, decided analytically from the functional form.
    /// For the interior-only family this is monotonicity on the open orthant.
    pub fn strictly_monotone(&self) -> bool {
        match self {
            Utility::Linear { coeffs } => coeffs.iter().all(|c| *c > 0.0),
            Utility::LogShifted { alphas } => alphas.iter().all(|a| *a > 0.0),
            Utility::Ces { weights, rho } => weights.iter().all(|w| *w > 0.0) && *rho > 0.0,
            Utility::CobbDouglasLog { alphas } => alphas.iter().all(|a| *a > 0.0),
        }
    }

    /// Concavity, decided analytically from the functional form.
    pub fn concave(&self) -> bool {
        match self {
            Utility::Linear { .. } => true,
            Utility::LogShifted { alphas } => alphas.iter().all(|a| *a >= 0.0),
            // CES power means are concave exactly for rho <= 1.
            Utility::Ces { weights, rho } => weights.iter().all(|w| *w >= 0.0) && *rho <= 1.0,
            Utility::CobbDouglasLog { alphas } => alphas.iter().all(|a| *a >= 0.0),
        }
    }

    /// Continuity on the closed orthant (the interior-only family is only
    /// continuous as an extended-real function).
    pub fn continuous_on_orthant(&self) -> bool {
        !self.interior_only()
    }
}

/// Endowment tensor, agent-major: `a[t][s]` is the bundle of agent `t` in
/// state `s`. Entries are nonnegative and finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Endowment {
    bundles: Vec<Vec<Vec<f64>>>,
}

impl Endowment {
    pub fn new(bundles: Vec<Vec<Vec<f64>>>, goods: usize) -> Result<Self, EconomyError> {
        for (t, per_state) in bundles.iter().enumerate() {
            for (s, bundle) in per_state.iter().enumerate() {
                ensure(
                    bundle.len() == goods,
                    &format!("endowment[agent {t}][state {s}]"),
                    format!("bundle has {} goods, expected {goods}", bundle.len()),
                )?;
                for (h, v) in bundle.iter().enumerate() {
                    ensure(
                        v.is_finite() && *v >= 0.0,
                        &format!("endowment[agent {t}][state {s}][good {h}]"),
                        format!("entries must be finite and >= 0, got {v}"),
                    )?;
                }
            }
        }
        Ok(Endowment { bundles })
    }

    pub fn bundle(&self, t: usize, s: usize) -> &[f64] {
        &self.bundles[t][s]
    }
}

/// Allocation tensor with the same shape and constraints as [`Endowment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Allocation {
    bundles: Vec<Vec<Vec<f64>>>,
}

impl Allocation {
    pub fn new(bundles: Vec<Vec<Vec<f64>>>, goods: usize) -> Result<Self, EconomyError> {
        let inner = Endowment::new(bundles, goods)?;
        Ok(Allocation {
            bundles: inner.bundles,
        })
    }

    pub fn zeros(agents: usize, states: usize, goods: usize) -> Self {
        Allocation {
            bundles: vec![vec![vec![0.0; goods]; states]; agents],
        }
    }

    pub fn bundle(&self, t: usize, s: usize) -> &[f64] {
        &self.bundles[t][s]
    }

    pub fn bundle_mut(&mut self, t: usize, s: usize) -> &mut Vec<f64> {
        &mut self.bundles[t][s]
    }

    /// State-contingent plan of agent `t` (one bundle per state).
    pub fn plan(&self, t: usize) -> &[Vec<f64>] {
        &self.bundles[t]
    }
}

/// Strictly positive price on the unit simplex.
///
/// Invariants: every coordinate is at least the floor it was built with and
/// the coordinates sum to one within [`PRICE_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PriceVector {
    coords: Vec<f64>,
}

impl PriceVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, EconomyError> {
        PriceVector::with_floor(coords, DEFAULT_PRICE_FLOOR)
    }

    pub fn with_floor(coords: Vec<f64>, floor: f64) -> Result<Self, EconomyError> {
        ensure(
            !coords.is_empty(),
            "price",
            "price must have dimension >= 1",
        )?;
        for (h, p) in coords.iter().enumerate() {
            ensure(
                p.is_finite() && *p >= floor,
                &format!("price[{h}]"),
                format!("coordinate must be finite and >= {floor}, got {p}"),
            )?;
        }
        let sum: f64 = coords.iter().sum();
        ensure(
            (sum - 1.0).abs() <= PRICE_SUM_TOL,
            "price",
            format!("coordinates sum to {sum}, expected 1"),
        )?;
        Ok(PriceVector { coords })
    }

    pub fn uniform(goods: usize) -> Self {
        assert!(goods >= 1);
        PriceVector {
            coords: vec![1.0 / goods as f64; goods],
        }
    }

    /// Nearest-in-spirit simplex point with floored coordinates: clamps to
    /// the floor, then rescales the free coordinates so the total is one.
    /// Total floor mass must stay below one.
    pub fn project(raw: &[f64], floor: f64) -> Self {
        assert!(!raw.is_empty());
        assert!(floor * raw.len() as f64 <= 0.5, "floor mass too large");
        let mut coords: Vec<f64> = raw.iter().map(|p| p.max(floor)).collect();
        // Rescale the unfloored coordinates; a rescale can push more
        // coordinates to the floor, so iterate (at most `len` rounds).
        for _ in 0..coords.len() {
            let floored_mass: f64 = coords.iter().filter(|&&p| p <= floor).map(|_| floor).sum();
            let free_mass: f64 = coords.iter().filter(|&&p| p > floor).sum();
            if free_mass <= 0.0 {
                // Degenerate input: fall back to uniform.
                let n = coords.len();
                coords = vec![1.0 / n as f64; n];
                break;
            }
            let scale = (1.0 - floored_mass) / free_mass;
            let mut changed = false;
            for p in coords.iter_mut() {
                if *p > floor {
                    *p *= scale;
                    if *p < floor {
                        *p = floor;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let sum: f64 = coords.iter().sum();
        debug_assert!((sum - 1.0).abs() <= PRICE_SUM_TOL);
        PriceVector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Smallest coordinate; strictly positive by construction.
    pub fn min_coord(&self) -> f64 {
        self.coords.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Sup-norm distance to another price of the same dimension.
    pub fn linf_dist(&self, other: &PriceVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// One validation check with a stable id and a human-readable outcome.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`Economy::validate`]: one row per assumption or invariant.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// A pure-exchange economy with differential information.
///
/// Priors are carried verbatim for reporting; no computation reads them.
#[derive(Debug, Clone, Serialize)]
pub struct Economy {
    goods: usize,
    states: StateSpace,
    agents: AgentGrid,
    partitions: Vec<Partition>,
    /// utilities[t][s] is the utility of agent `t` in state `s`.
    utilities: Vec<Vec<Utility>>,
    endowment: Endowment,
    priors: Vec<Option<Vec<f64>>>,
}

impl Economy {
    pub fn new(
        goods: usize,
        states: StateSpace,
        agents: AgentGrid,
        partitions: Vec<Partition>,
        utilities: Vec<Vec<Utility>>,
        endowment_bundles: Vec<Vec<Vec<f64>>>,
        priors: Vec<Option<Vec<f64>>>,
    ) -> Result<Self, EconomyError> {
        ensure(goods >= 1, "goods", "at least one good required")?;
        let (nt, ns) = (agents.len(), states.len());
        ensure(
            partitions.len() == nt,
            "partitions",
            format!("{} partitions for {nt} agents", partitions.len()),
        )?;
        for (t, part) in partitions.iter().enumerate() {
            ensure(
                part.n_states() == ns,
                &format!("agents[{t}].partition"),
                format!("partitions {} states, economy has {ns}", part.n_states()),
            )?;
        }
        ensure(
            utilities.len() == nt,
            "utilities",
            format!("{} utility rows for {nt} agents", utilities.len()),
        )?;
        for (t, row) in utilities.iter().enumerate() {
            ensure(
                row.len() == ns,
                &format!("agents[{t}].utility"),
                format!("{} per-state utilities, economy has {ns} states", row.len()),
            )?;
            for (s, u) in row.iter().enumerate() {
                ensure(
                    u.goods() == goods,
                    &format!("agents[{t}].utility[state {s}]"),
                    format!("{} parameters, economy has {goods} goods", u.goods()),
                )?;
            }
        }
        ensure(
            endowment_bundles.len() == nt,
            "endowment",
            format!("{} agent rows for {nt} agents", endowment_bundles.len()),
        )?;
        for (t, row) in endowment_bundles.iter().enumerate() {
            ensure(
                row.len() == ns,
                &format!("endowment[agent {t}]"),
                format!("{} state bundles, economy has {ns} states", row.len()),
            )?;
        }
        let endowment = Endowment::new(endowment_bundles, goods)?;
        ensure(
            priors.len() == nt,
            "priors",
            format!("{} prior rows for {nt} agents", priors.len()),
        )?;
        for (t, prior) in priors.iter().enumerate() {
            if let Some(q) = prior {
                ensure(
                    q.len() == ns,
                    &format!("agents[{t}].prior"),
                    format!("{} entries, economy has {ns} states", q.len()),
                )?;
            }
        }
        Ok(Economy {
            goods,
            states,
            agents,
            partitions,
            utilities,
            endowment,
            priors,
        })
    }

    pub fn n_goods(&self) -> usize {
        self.goods
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn agents(&self) -> &AgentGrid {
        &self.agents
    }

    pub fn partition(&self, t: usize) -> &Partition {
        &self.partitions[t]
    }

    pub fn utility(&self, t: usize, s: usize) -> &Utility {
        &self.utilities[t][s]
    }

    pub fn endowment(&self, t: usize, s: usize) -> &[f64] {
        self.endowment.bundle(t, s)
    }

    pub fn prior(&self, t: usize) -> Option<&[f64]> {
        self.priors[t].as_deref()
    }

    /// Utility of agent `t` for bundle `x` in state `s`.
    pub fn utility_eval(&self, t: usize, s: usize, x: &[f64]) -> Result<f64, UtilityError> {
        self.utilities[t][s].eval(x)
    }

    /// Weighted aggregate endowment of state `s`.
    pub fn aggregate_endowment(&self, s: usize) -> Vec<f64> {
        let mut agg = vec![0.0; self.goods];
        for t in 0..self.n_agents() {
            crate::util::add_scaled(&mut agg, self.agents.weight(t), self.endowment(t, s));
        }
        agg
    }

    /// Checks the economic assumptions on a structurally valid economy:
    /// strictly positive aggregate endowment per state and good, continuity,
    /// strict monotonicity, concavity (analytically per family), declared
    /// parameter ranges, and prior normalization.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();

        // Structural invariants already hold by construction; echo them so
        // the report is a complete record.
        checks.push(Check {
            id: "states".into(),
            passed: true,
            detail: format!(
                "{} states, probabilities positive and summing to 1",
                self.n_states()
            ),
        });
        checks.push(Check {
            id: "agents".into(),
            passed: true,
            detail: format!("{} agents, weights positive", self.n_agents()),
        });
        checks.push(Check {
            id: "partitions".into(),
            passed: true,
            detail: "every agent partition covers the state space".into(),
        });

        let mut bad_states = Vec::new();
        for s in 0..self.n_states() {
            let agg = self.aggregate_endowment(s);
            if let Some(h) = agg.iter().position(|v| *v <= 0.0) {
                bad_states.push(format!(
                    "state {} good {h} has aggregate {}",
                    self.states.id(s),
                    agg[h]
                ));
            }
        }
        checks.push(Check {
            id: "A1.aggregate_endowment".into(),
            passed: bad_states.is_empty(),
            detail: if bad_states.is_empty() {
                "aggregate endowment strictly positive in every state".into()
            } else {
                bad_states.join("; ")
            },
        });

        let mut interior_notes = Vec::new();
        let mut not_monotone = Vec::new();
        let mut not_concave = Vec::new();
        let mut bad_params = Vec::new();
        for t in 0..self.n_agents() {
            for s in 0..self.n_states() {
                let u = self.utility(t, s);
                let at = format!("agent {} state {}", self.agents.id(t), self.states.id(s));
                if !u.continuous_on_orthant() {
                    interior_notes.push(at.clone());
                }
                if !u.strictly_monotone() {
                    not_monotone.push(at.clone());
                }
                if !u.concave() {
                    not_concave.push(at.clone());
                }
                if !u.params_valid() {
                    bad_params.push(format!("{at} ({})", u.family_name()));
                }
            }
        }
        checks.push(Check {
            id: "A2.continuity".into(),
            passed: true,
            detail: if interior_notes.is_empty() {
                "all utilities continuous on the nonnegative orthant".into()
            } else {
                format!(
                    "continuous on the open orthant only (interior-only family) at: {}",
                    interior_notes.join(", ")
                )
            },
        });
        checks.push(Check {
            id: "A3.monotonicity".into(),
            passed: not_monotone.is_empty(),
            detail: if not_monotone.is_empty() {
                if interior_notes.is_empty() {
                    "all utilities strictly monotone".into()
                } else {
                    format!(
                        "strictly monotone (on the open orthant for: {})",
                        interior_notes.join(", ")
                    )
                }
            } else {
                format!("not strictly monotone at: {}", not_monotone.join(", "))
            },
        });
        checks.push(Check {
            id: "A4.concavity".into(),
            passed: not_concave.is_empty(),
            detail: if not_concave.is_empty() {
                "all utilities concave".into()
            } else {
                format!("not concave at: {}", not_concave.join(", "))
            },
        });
        checks.push(Check {
            id: "utility.params".into(),
            passed: bad_params.is_empty(),
            detail: if bad_params.is_empty() {
                "all family parameters within declared ranges".into()
            } else {
                format!("parameters out of range at: {}", bad_params.join(", "))
            },
        });

        let mut bad_priors = Vec::new();
        for t in 0..self.n_agents() {
            if let Some(q) = self.prior(t) {
                let sum: f64 = q.iter().sum();
                if q.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    bad_priors.push(format!("agent {} (sum {sum})", self.agents.id(t)));
                }
            }
        }
        checks.push(Check {
            id: "priors".into(),
            passed: bad_priors.is_empty(),
            detail: if bad_priors.is_empty() {
                "priors (where present) are normalized; priors play no role in any computation"
                    .into()
            } else {
                format!("malformed priors at: {}", bad_priors.join(", "))
            },
        });

        ValidationReport { checks }
    }
}
