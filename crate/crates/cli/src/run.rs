//! Command dispatch: each subcommand loads its inputs, runs the library,
//! and assembles a [`RunReport`] whose body is plain JSON data. Reports
//! carry no timing or host information, so identical inputs render
//! identical bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use mree::config::Config;
use mree::correspondences::SampleError;
use mree::economy::{Economy, PriceVector};
use mree::maximin::MreeSolution;
use mree::setval::SetError;
use mree::walras::{SolveError, SolveMethod};

use crate::specfile::{EconomySpecFile, EquilibriumFile, SpecError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Set(#[from] SetError),
}

impl CliError {
    /// 2 for unusable inputs, 3 for solver non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Spec(_) | CliError::Set(_) => 2,
            CliError::Solve(_) => 3,
        }
    }
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> Self {
        CliError::Set(SetError::Sample(e))
    }
}

#[derive(Debug, Clone)]
pub enum Command {
    Validate {
        spec: PathBuf,
    },
    Solve {
        spec: PathBuf,
    },
    Ree {
        spec: PathBuf,
        out: Option<PathBuf>,
    },
    Verify {
        economy: PathBuf,
        equilibrium: PathBuf,
    },
    AggregateSet {
        spec: PathBuf,
        state: String,
        price: Option<Vec<f64>>,
    },
    ProbeContinuity {
        spec: PathBuf,
        state: String,
        price: Option<Vec<f64>>,
        direction: Vec<f64>,
        steps: usize,
    },
}

/// Result of one command: a verdict, the numeric configuration that
/// produced it, and a JSON body. Echoing the config makes every report
/// self-describing.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: &'static str,
    pub passed: bool,
    pub config: Value,
    pub body: Value,
}

fn config_echo(cfg: &Config) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn load_economy(path: &Path) -> Result<(EconomySpecFile, Economy), CliError> {
    let spec = EconomySpecFile::from_json(&read_file(path)?)?;
    let econ = spec.to_economy()?;
    Ok((spec, econ))
}

fn state_index(econ: &Economy, id: &str) -> Result<usize, CliError> {
    econ.states().index_of(id).ok_or_else(|| {
        CliError::Spec(SpecError::Invalid {
            path: "--state".into(),
            msg: format!("unknown state id \"{id}\""),
        })
    })
}

fn parse_price(econ: &Economy, coords: &[f64]) -> Result<PriceVector, CliError> {
    if coords.len() != econ.n_goods() {
        return Err(CliError::Spec(SpecError::Invalid {
            path: "--price".into(),
            msg: format!(
                "price has {} coordinates, economy has {} goods",
                coords.len(),
                econ.n_goods()
            ),
        }));
    }
    PriceVector::new(coords.to_vec()).map_err(|e| {
        CliError::Spec(SpecError::Invalid {
            path: "--price".into(),
            msg: e.to_string(),
        })
    })
}

fn method_name(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::Tatonnement => "tatonnement",
        SolveMethod::Homotopy => "homotopy",
    }
}

fn state_records(econ: &Economy, sol: &MreeSolution) -> Value {
    let records: Vec<Value> = sol
        .equilibria
        .iter()
        .map(|eq| {
            let allocation: BTreeMap<String, Vec<f64>> = (0..econ.n_agents())
                .map(|t| {
                    (
                        econ.agents().id(t).to_string(),
                        sol.allocation[t][eq.state].clone(),
                    )
                })
                .collect();
            json!({
                "id": econ.states().id(eq.state),
                "price": eq.price.coords(),
                "clearing_residual": eq.clearing_residual,
                "iterations": eq.iterations,
                "method": method_name(eq.method),
                "trajectory_hash": eq.trajectory_hash,
                "allocation": allocation,
            })
        })
        .collect();
    Value::Array(records)
}

pub fn run_command(cmd: &Command, cfg: &Config) -> Result<RunReport, CliError> {
    match cmd {
        Command::Validate { spec } => {
            let (_, econ) = load_economy(spec)?;
            let report = econ.validate();
            Ok(RunReport {
                config: config_echo(cfg),
                command: "validate",
                passed: report.passed(),
                body: json!({
                    "economy": {
                        "goods": econ.n_goods(),
                        "states": econ.states().ids(),
                        "agents": econ.agents().ids(),
                    },
                    "checks": serde_json::to_value(&report).expect("report serializes"),
                }),
            })
        }
        Command::Solve { spec } => {
            let (_, econ) = load_economy(spec)?;
            let equilibria = mree::solve_all_states(&econ, cfg)?;
            let records: Vec<Value> = equilibria
                .iter()
                .map(|eq| {
                    let allocation: BTreeMap<String, Vec<f64>> = (0..econ.n_agents())
                        .map(|t| (econ.agents().id(t).to_string(), eq.allocation[t].clone()))
                        .collect();
                    json!({
                        "id": econ.states().id(eq.state),
                        "price": eq.price.coords(),
                        "clearing_residual": eq.clearing_residual,
                        "iterations": eq.iterations,
                        "method": method_name(eq.method),
                        "trajectory_hash": eq.trajectory_hash,
                        "allocation": allocation,
                    })
                })
                .collect();
            Ok(RunReport {
                config: config_echo(cfg),
                command: "solve",
                passed: true,
                body: json!({ "states": records }),
            })
        }
        Command::Ree { spec, out } => {
            let (_, econ) = load_economy(spec)?;
            let sol = mree::compute_maximin_ree(&econ, cfg)?;
            let file = EquilibriumFile::from_solution(&econ, &sol);
            if let Some(out_path) = out {
                std::fs::write(out_path, file.to_json()).map_err(|e| CliError::Io {
                    path: out_path.clone(),
                    msg: e.to_string(),
                })?;
            }
            let cert = &sol.certificate;
            Ok(RunReport {
                config: config_echo(cfg),
                command: "ree",
                passed: cert.passed,
                body: json!({
                    "equilibrium": serde_json::to_value(&file).expect("file serializes"),
                    "summary": {
                        "states": state_records(&econ, &sol),
                        "budget_ok": cert.budget_ok,
                        "max_budget_residual": cert.max_budget_residual,
                        "clearing_ok": cert.clearing_ok,
                        "max_clearing_residual": cert.max_clearing_residual,
                        "deviation_ok": cert.deviation_ok,
                        "max_improvement": cert.max_improvement,
                        "repairs": sol.repairs.len(),
                    },
                }),
            })
        }
        Command::Verify {
            economy,
            equilibrium,
        } => {
            let (_, econ) = load_economy(economy)?;
            let file = EquilibriumFile::from_json(&read_file(equilibrium)?)?;
            let (allocation, prices) = file.into_arrays(&econ)?;
            let cert = mree::verify_maximin_ree(&econ, &allocation, &prices, cfg);
            Ok(RunReport {
                config: config_echo(cfg),
                command: "verify",
                passed: cert.passed,
                body: json!({
                    "certificate": serde_json::to_value(&cert)
                        .expect("certificate serializes"),
                }),
            })
        }
        Command::AggregateSet { spec, state, price } => {
            let (_, econ) = load_economy(spec)?;
            let s = state_index(&econ, state)?;
            let (p, price_source) = match price {
                Some(coords) => (parse_price(&econ, coords)?, "given"),
                None => (
                    mree::solve_state_equilibrium(&econ, s, cfg)?.price,
                    "solved",
                ),
            };
            let agg = mree::aggregate_preferred_set(&econ, s, &p, cfg.resolution, cfg)?;
            let target = econ.aggregate_endowment(s);
            let mut distance = f64::INFINITY;
            for pt in agg.set.iter() {
                let d: f64 = pt
                    .iter()
                    .zip(&target)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                distance = distance.min(d);
            }
            let (lo, hi) = agg.set.bbox();
            let count = agg.set.len();
            let mut body = json!({
                "state": state,
                "price": p.coords(),
                "price_source": price_source,
                "resolution": cfg.resolution,
                "method": serde_json::to_value(agg.method).expect("method serializes"),
                "count": count,
                "bbox": { "lower": lo, "upper": hi },
                "target": target,
                "distance_to_aggregate_endowment": distance,
            });
            if count <= 50_000 {
                body["points"] =
                    serde_json::to_value(agg.set.sorted_rows()).expect("points serialize");
            }
            Ok(RunReport {
                config: config_echo(cfg),
                command: "aggregate-set",
                passed: true,
                body,
            })
        }
        Command::ProbeContinuity {
            spec,
            state,
            price,
            direction,
            steps,
        } => {
            let (_, econ) = load_economy(spec)?;
            let s = state_index(&econ, state)?;
            if direction.len() != econ.n_goods() {
                return Err(CliError::Spec(SpecError::Invalid {
                    path: "--direction".into(),
                    msg: format!(
                        "direction has {} coordinates, economy has {} goods",
                        direction.len(),
                        econ.n_goods()
                    ),
                }));
            }
            let (base, price_source) = match price {
                Some(coords) => (parse_price(&econ, coords)?, "given"),
                None => (
                    mree::solve_state_equilibrium(&econ, s, cfg)?.price,
                    "solved",
                ),
            };
            // A probe coordinate below the sampling resolution would blow the
            // truncation box past any column budget, so clamp there instead of
            // at the solver's interior floor.
            let probe_floor = cfg.price_floor.max(2.0 * cfg.resolution);
            let probes: Vec<PriceVector> = (1..=*steps)
                .map(|n| {
                    let scale = 0.5f64.powi(n as i32);
                    let raw: Vec<f64> = base
                        .coords()
                        .iter()
                        .zip(direction)
                        .map(|(b, d)| b + scale * d)
                        .collect();
                    PriceVector::project(&raw, probe_floor)
                })
                .collect();
            let distances = mree::continuity_probe(&econ, s, &base, &probes, cfg.resolution, cfg)?;
            let rows: Vec<Value> = distances
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    json!({
                        "n": i + 1,
                        "scale": 0.5f64.powi(i as i32 + 1),
                        "price": probes[i].coords(),
                        "hausdorff_distance": d,
                    })
                })
                .collect();
            Ok(RunReport {
                config: config_echo(cfg),
                command: "probe-continuity",
                passed: true,
                body: json!({
                    "state": state,
                    "base_price": base.coords(),
                    "price_source": price_source,
                    "direction": direction,
                    "resolution": cfg.resolution,
                    "steps": rows,
                }),
            })
        }
    }
}
