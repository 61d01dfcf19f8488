//! On-disk JSON schemas: economy specifications and equilibrium files.
//!
//! The economy schema is agent-centric: each agent carries one default
//! utility plus optional per-state overrides, an endowment given either
//! once (all states) or per state id, an optional partition over state
//! ids, and an optional prior. Conversion errors carry a JSON-ish path to
//! the offending field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use mree::economy::{AgentGrid, Economy, EconomyError, Partition, StateSpace, Utility};
use mree::maximin::MreeSolution;

pub const ECONOMY_SCHEMA: &str = "mree.economy/1";
pub const EQUILIBRIUM_SCHEMA: &str = "mree.equilibrium/1";

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error(transparent)]
    Economy(#[from] EconomyError),
}

fn invalid(path: impl Into<String>, msg: impl Into<String>) -> SpecError {
    SpecError::Invalid {
        path: path.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpec {
    pub id: String,
    pub prob: f64,
}

/// One bundle for every state, or a map keyed by state id.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndowmentSpec {
    Uniform(Vec<f64>),
    PerState(BTreeMap<String, Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    #[serde(default = "default_weight")]
    pub weight: f64,
    /// Blocks of state ids; omitted means no private information.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<String>>>,
    pub utility: Utility,
    /// Utility overrides keyed by state id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_state: BTreeMap<String, Utility>,
    pub endowment: EndowmentSpec,
    /// Parsed and carried, never used in computations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomySpecFile {
    pub schema: String,
    pub goods: usize,
    pub states: Vec<StateSpec>,
    pub agents: Vec<AgentSpec>,
}

impl EconomySpecFile {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let spec: EconomySpecFile = serde_json::from_str(text)
            .map_err(|e| invalid("$", format!("not a valid economy spec: {e}")))?;
        if spec.schema != ECONOMY_SCHEMA {
            return Err(invalid(
                "$.schema",
                format!("expected \"{ECONOMY_SCHEMA}\", got \"{}\"", spec.schema),
            ));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    pub fn to_economy(&self) -> Result<Economy, SpecError> {
        let states = StateSpace::new(
            self.states.iter().map(|s| s.id.clone()).collect(),
            self.states.iter().map(|s| s.prob).collect(),
        )?;
        let state_index = |id: &str, path: &str| {
            states
                .index_of(id)
                .ok_or_else(|| invalid(path, format!("unknown state id \"{id}\"")))
        };
        let agents = AgentGrid::new(
            self.agents.iter().map(|a| a.id.clone()).collect(),
            self.agents.iter().map(|a| a.weight).collect(),
        )?;

        let mut partitions = Vec::with_capacity(self.agents.len());
        let mut utilities = Vec::with_capacity(self.agents.len());
        let mut endowments = Vec::with_capacity(self.agents.len());
        let mut priors = Vec::with_capacity(self.agents.len());
        for (t, agent) in self.agents.iter().enumerate() {
            let apath = format!("$.agents[{t}]");
            let partition = match &agent.partition {
                None => Partition::trivial(states.len()),
                Some(blocks) => {
                    let mut index_blocks = Vec::with_capacity(blocks.len());
                    for (b, block) in blocks.iter().enumerate() {
                        let mut ib = Vec::with_capacity(block.len());
                        for id in block {
                            ib.push(state_index(id, &format!("{apath}.partition[{b}]"))?);
                        }
                        index_blocks.push(ib);
                    }
                    Partition::new(states.len(), index_blocks)?
                }
            };
            partitions.push(partition);

            for id in agent.per_state.keys() {
                state_index(id, &format!("{apath}.per_state"))?;
            }
            let mut row = Vec::with_capacity(states.len());
            for s in 0..states.len() {
                let u = agent
                    .per_state
                    .get(states.id(s))
                    .unwrap_or(&agent.utility)
                    .clone();
                if u.goods() != self.goods {
                    return Err(invalid(
                        format!("{apath}.utility"),
                        format!(
                            "utility for state \"{}\" has {} coefficients, economy has {} goods",
                            states.id(s),
                            u.goods(),
                            self.goods
                        ),
                    ));
                }
                row.push(u);
            }
            utilities.push(row);

            let bundles = match &agent.endowment {
                EndowmentSpec::Uniform(b) => vec![b.clone(); states.len()],
                EndowmentSpec::PerState(map) => {
                    for id in map.keys() {
                        state_index(id, &format!("{apath}.endowment"))?;
                    }
                    let mut out = Vec::with_capacity(states.len());
                    for s in 0..states.len() {
                        let id = states.id(s);
                        let b = map.get(id).ok_or_else(|| {
                            invalid(
                                format!("{apath}.endowment"),
                                format!("missing bundle for state \"{id}\""),
                            )
                        })?;
                        out.push(b.clone());
                    }
                    out
                }
            };
            endowments.push(bundles);
            priors.push(agent.prior.clone());
        }

        Ok(Economy::new(
            self.goods, states, agents, partitions, utilities, endowments, priors,
        )?)
    }

    /// Inverse of [`EconomySpecFile::to_economy`]: per-state endowment maps,
    /// a default utility with overrides only where states differ, explicit
    /// partitions.
    pub fn from_economy(econ: &Economy) -> Self {
        let states: Vec<StateSpec> = (0..econ.n_states())
            .map(|s| StateSpec {
                id: econ.states().id(s).to_string(),
                prob: econ.states().prob(s),
            })
            .collect();
        let agents = (0..econ.n_agents())
            .map(|t| {
                let default_u = econ.utility(t, 0).clone();
                let mut per_state = BTreeMap::new();
                for s in 1..econ.n_states() {
                    let u = econ.utility(t, s);
                    if *u != default_u {
                        per_state.insert(econ.states().id(s).to_string(), u.clone());
                    }
                }
                let endowment = EndowmentSpec::PerState(
                    (0..econ.n_states())
                        .map(|s| {
                            (
                                econ.states().id(s).to_string(),
                                econ.endowment(t, s).to_vec(),
                            )
                        })
                        .collect(),
                );
                let partition = Some(
                    econ.partition(t)
                        .blocks()
                        .iter()
                        .map(|b| b.iter().map(|&s| econ.states().id(s).to_string()).collect())
                        .collect(),
                );
                AgentSpec {
                    id: econ.agents().id(t).to_string(),
                    weight: econ.agents().weight(t),
                    partition,
                    utility: default_u,
                    per_state,
                    endowment,
                    prior: econ.prior(t).map(|p| p.to_vec()),
                }
            })
            .collect();
        EconomySpecFile {
            schema: ECONOMY_SCHEMA.to_string(),
            goods: econ.n_goods(),
            states,
            agents,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumStateRecord {
    pub id: String,
    pub price: Vec<f64>,
    pub clearing_residual: Vec<f64>,
    pub iterations: usize,
    pub method: String,
    pub trajectory_hash: String,
    /// Bundle per agent id.
    pub allocation: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumFile {
    pub schema: String,
    pub states: Vec<EquilibriumStateRecord>,
    /// Price-revealed blocks of state ids.
    pub sigma_pi: Vec<Vec<String>>,
    /// Refined information blocks per agent id.
    pub refined: BTreeMap<String, Vec<Vec<String>>>,
    /// `(agent id, state id)` bundles replaced during repair.
    pub repairs: Vec<(String, String)>,
    pub certificate: serde_json::Value,
}

impl EquilibriumFile {
    pub fn from_solution(econ: &Economy, sol: &MreeSolution) -> Self {
        let id_of_state = |s: usize| econ.states().id(s).to_string();
        let blocks_to_ids = |blocks: &[Vec<usize>]| -> Vec<Vec<String>> {
            blocks
                .iter()
                .map(|b| b.iter().map(|&s| id_of_state(s)).collect())
                .collect()
        };
        let states = sol
            .equilibria
            .iter()
            .map(|eq| EquilibriumStateRecord {
                id: id_of_state(eq.state),
                price: eq.price.coords().to_vec(),
                clearing_residual: eq.clearing_residual.clone(),
                iterations: eq.iterations,
                method: match eq.method {
                    mree::walras::SolveMethod::Tatonnement => "tatonnement".into(),
                    mree::walras::SolveMethod::Homotopy => "homotopy".into(),
                },
                trajectory_hash: eq.trajectory_hash.clone(),
                allocation: (0..econ.n_agents())
                    .map(|t| {
                        (
                            econ.agents().id(t).to_string(),
                            sol.allocation[t][eq.state].clone(),
                        )
                    })
                    .collect(),
            })
            .collect();
        EquilibriumFile {
            schema: EQUILIBRIUM_SCHEMA.to_string(),
            states,
            sigma_pi: blocks_to_ids(sol.sigma_pi.blocks()),
            refined: (0..econ.n_agents())
                .map(|t| {
                    (
                        econ.agents().id(t).to_string(),
                        blocks_to_ids(sol.refined[t].blocks()),
                    )
                })
                .collect(),
            repairs: sol
                .repairs
                .iter()
                .map(|&(t, s)| (econ.agents().id(t).to_string(), id_of_state(s)))
                .collect(),
            certificate: serde_json::to_value(&sol.certificate).expect("certificate serializes"),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let file: EquilibriumFile = serde_json::from_str(text)
            .map_err(|e| invalid("$", format!("not a valid equilibrium file: {e}")))?;
        if file.schema != EQUILIBRIUM_SCHEMA {
            return Err(invalid(
                "$.schema",
                format!("expected \"{EQUILIBRIUM_SCHEMA}\", got \"{}\"", file.schema),
            ));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("equilibrium serializes");
        s.push('\n');
        s
    }

    /// Allocation tensor and price list in the spec economy's index order.
    pub fn into_arrays(
        &self,
        econ: &Economy,
    ) -> Result<(Vec<Vec<Vec<f64>>>, Vec<mree::economy::PriceVector>), SpecError> {
        if self.states.len() != econ.n_states() {
            return Err(invalid(
                "$.states",
                format!(
                    "equilibrium has {} states, economy has {}",
                    self.states.len(),
                    econ.n_states()
                ),
            ));
        }
        let mut prices = vec![None; econ.n_states()];
        let mut allocation = vec![vec![Vec::new(); econ.n_states()]; econ.n_agents()];
        for (r, rec) in self.states.iter().enumerate() {
            let path = format!("$.states[{r}]");
            let s = econ
                .states()
                .index_of(&rec.id)
                .ok_or_else(|| invalid(&path, format!("unknown state id \"{}\"", rec.id)))?;
            if prices[s].is_some() {
                return Err(invalid(&path, format!("duplicate state id \"{}\"", rec.id)));
            }
            if rec.price.len() != econ.n_goods() {
                return Err(invalid(
                    format!("{path}.price"),
                    format!(
                        "price has {} coordinates, economy has {} goods",
                        rec.price.len(),
                        econ.n_goods()
                    ),
                ));
            }
            prices[s] = Some(
                mree::economy::PriceVector::new(rec.price.clone())
                    .map_err(|e| invalid(format!("{path}.price"), e.to_string()))?,
            );
            for t in 0..econ.n_agents() {
                let id = econ.agents().id(t);
                let bundle = rec.allocation.get(id).ok_or_else(|| {
                    invalid(
                        format!("{path}.allocation"),
                        format!("missing bundle for agent \"{id}\""),
                    )
                })?;
                if bundle.len() != econ.n_goods() {
                    return Err(invalid(
                        format!("{path}.allocation.{id}"),
                        format!(
                            "bundle has {} coordinates, economy has {} goods",
                            bundle.len(),
                            econ.n_goods()
                        ),
                    ));
                }
                allocation[t][s] = bundle.clone();
            }
        }
        let prices = prices
            .into_iter()
            .map(|p| p.expect("every state filled"))
            .collect();
        Ok((allocation, prices))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_spec() -> &'static str {
        r#"{
            "schema": "mree.economy/1",
            "goods": 2,
            "states": [
                {"id": "g", "prob": 0.5},
                {"id": "b", "prob": 0.5}
            ],
            "agents": [
                {
                    "id": "a1",
                    "weight": 1.0,
                    "utility": {"family": "log_shifted", "alphas": [0.6, 0.4]},
                    "per_state": {
                        "b": {"family": "log_shifted", "alphas": [0.4, 0.6]}
                    },
                    "endowment": {"g": [1.0, 0.0], "b": [1.5, 0.0]},
                    "prior": [0.5, 0.5]
                },
                {
                    "id": "a2",
                    "partition": [["g"], ["b"]],
                    "utility": {"family": "ces", "weights": [1.0, 2.0], "rho": 0.5},
                    "endowment": [0.0, 1.0]
                }
            ]
        }"#
    }

    #[test]
    fn parses_and_converts() {
        let spec = EconomySpecFile::from_json(sample_spec()).unwrap();
        let econ = spec.to_economy().unwrap();
        assert_eq!(econ.n_goods(), 2);
        assert_eq!(econ.n_states(), 2);
        assert_eq!(econ.n_agents(), 2);
        // Default weight, per-state override, uniform endowment fanout.
        assert_eq!(econ.agents().weight(1), 1.0);
        assert_eq!(
            econ.utility(0, 1),
            &Utility::LogShifted {
                alphas: vec![0.4, 0.6]
            }
        );
        assert_eq!(econ.endowment(1, 0), &[0.0, 1.0]);
        assert_eq!(econ.endowment(1, 1), &[0.0, 1.0]);
        // Missing partition means no information.
        assert_eq!(econ.partition(0).blocks(), &[vec![0, 1]]);
        assert_eq!(econ.partition(1).blocks(), &[vec![0], vec![1]]);
        // Prior is carried verbatim.
        assert_eq!(econ.prior(0), Some(&[0.5, 0.5][..]));
        assert_eq!(econ.prior(1), None);
    }

    #[test]
    fn round_trips_through_economy() {
        let spec = EconomySpecFile::from_json(sample_spec()).unwrap();
        let econ = spec.to_economy().unwrap();
        let back = EconomySpecFile::from_economy(&econ);
        let econ2 = back.to_economy().unwrap();
        assert_eq!(format!("{econ:?}"), format!("{econ2:?}"));
    }

    #[test]
    fn rejects_wrong_schema() {
        let text = sample_spec().replace("mree.economy/1", "mree.economy/9");
        let err = EconomySpecFile::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("$.schema"), "{err}");
    }

    #[test]
    fn rejects_unknown_state_id_in_endowment() {
        let text = sample_spec().replace("\"b\": [1.5, 0.0]", "\"zz\": [1.5, 0.0]");
        let spec = EconomySpecFile::from_json(&text).unwrap();
        let err = spec.to_economy().unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("$.agents[0].endowment") && msg.contains("zz"),
            "{msg}"
        );
    }

    #[test]
    fn rejects_missing_state_bundle() {
        let text = sample_spec().replace(", \"b\": [1.5, 0.0]", "");
        let spec = EconomySpecFile::from_json(&text).unwrap();
        let err = spec.to_economy().unwrap_err();
        assert!(err.to_string().contains("missing bundle"), "{err}");
    }

    #[test]
    fn rejects_utility_dimension_mismatch() {
        let text = sample_spec().replace("[0.6, 0.4]", "[0.6, 0.4, 0.1]");
        let spec = EconomySpecFile::from_json(&text).unwrap();
        let err = spec.to_economy().unwrap_err();
        assert!(err.to_string().contains("coefficients"), "{err}");
    }

    #[test]
    fn rejects_bad_partition_state() {
        let text = sample_spec().replace("[[\"g\"], [\"b\"]]", "[[\"g\"], [\"nope\"]]");
        let spec = EconomySpecFile::from_json(&text).unwrap();
        let err = spec.to_economy().unwrap_err();
        assert!(err.to_string().contains("partition"), "{err}");
    }

    #[test]
    fn rejects_incomplete_partition() {
        let text = sample_spec().replace("[[\"g\"], [\"b\"]]", "[[\"g\"]]");
        let spec = EconomySpecFile::from_json(&text).unwrap();
        let err = spec.to_economy().unwrap_err();
        assert!(err.to_string().contains("cover"), "{err}");
    }

    #[test]
    fn equilibrium_file_round_trip() {
        let spec = EconomySpecFile::from_json(sample_spec()).unwrap();
        let econ = spec.to_economy().unwrap();
        let cfg = mree::Config::default();
        let sol = mree::compute_maximin_ree(&econ, &cfg).unwrap();
        let file = EquilibriumFile::from_solution(&econ, &sol);
        let parsed = EquilibriumFile::from_json(&file.to_json()).unwrap();
        let (alloc, prices) = parsed.into_arrays(&econ).unwrap();
        assert_eq!(alloc, sol.allocation);
        for s in 0..econ.n_states() {
            assert_eq!(prices[s].coords(), sol.equilibria[s].price.coords());
        }
    }
}
