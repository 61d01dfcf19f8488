//! Seeded random economies for test suites and calibration runs.
//!
//! Generation is a pure function of the spec (including its seed): the same
//! spec always yields the same economy, bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::economy::{AgentGrid, Economy, Partition, StateSpace, Utility};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Linear,
    LogShifted,
    Ces,
    CobbDouglasLog,
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_goods: usize,
    pub n_states: usize,
    pub n_agents: usize,
    /// Families drawn uniformly per agent-state.
    pub families: Vec<FamilyKind>,
    /// Uniform range for utility coefficients; must be positive.
    pub coeff_range: (f64, f64),
    /// Uniform range for endowment entries; must be positive so aggregate
    /// endowments stay strictly positive.
    pub endow_range: (f64, f64),
    /// Attach a random (inert) prior to every other agent.
    pub with_priors: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_goods: 2,
            n_states: 2,
            n_agents: 2,
            families: vec![
                FamilyKind::LogShifted,
                FamilyKind::Ces,
                FamilyKind::CobbDouglasLog,
            ],
            coeff_range: (0.5, 1.5),
            endow_range: (0.1, 1.5),
            with_priors: false,
            seed: 0,
        }
    }
}

fn draw_probs(rng: &mut ChaCha12Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // Pin the last entry so the sum is exactly 1 despite rounding.
    let head: f64 = probs[..n - 1].iter().sum();
    probs[n - 1] = 1.0 - head;
    probs
}

fn draw_partition(rng: &mut ChaCha12Rng, n_states: usize) -> Partition {
    match rng.gen_range(0..3u8) {
        0 => Partition::trivial(n_states),
        1 => Partition::discrete(n_states),
        _ => {
            if n_states < 2 {
                return Partition::trivial(n_states);
            }
            let labels: Vec<bool> = (0..n_states).map(|_| rng.gen_bool(0.5)).collect();
            let a: Vec<usize> = (0..n_states).filter(|&s| labels[s]).collect();
            let b: Vec<usize> = (0..n_states).filter(|&s| !labels[s]).collect();
            if a.is_empty() || b.is_empty() {
                Partition::trivial(n_states)
            } else {
                Partition::new(n_states, vec![a, b]).expect("two-block partition")
            }
        }
    }
}

fn draw_utility(rng: &mut ChaCha12Rng, spec: &SynthSpec) -> Utility {
    let (lo, hi) = spec.coeff_range;
    let family = spec.families[rng.gen_range(0..spec.families.len())];
    let coeffs: Vec<f64> = (0..spec.n_goods).map(|_| rng.gen_range(lo..hi)).collect();
    match family {
        FamilyKind::Linear => Utility::Linear { coeffs },
        FamilyKind::LogShifted => Utility::LogShifted { alphas: coeffs },
        FamilyKind::Ces => Utility::Ces {
            weights: coeffs,
            rho: rng.gen_range(0.2..0.8),
        },
        FamilyKind::CobbDouglasLog => {
            let total: f64 = coeffs.iter().sum();
            let mut alphas: Vec<f64> = coeffs.iter().map(|c| c / total).collect();
            let head: f64 = alphas[..spec.n_goods - 1].iter().sum();
            alphas[spec.n_goods - 1] = 1.0 - head;
            Utility::CobbDouglasLog { alphas }
        }
    }
}

/// Deterministic random economy. Panics on a degenerate spec (zero counts,
/// empty family list, nonpositive ranges): generated economies always pass
/// construction and the soft validation suite.
pub fn random_economy(spec: &SynthSpec) -> Economy {
    assert!(spec.n_goods >= 1 && spec.n_states >= 1 && spec.n_agents >= 1);
    assert!(!spec.families.is_empty());
    assert!(spec.coeff_range.0 > 0.0 && spec.coeff_range.1 > spec.coeff_range.0);
    assert!(spec.endow_range.0 > 0.0 && spec.endow_range.1 > spec.endow_range.0);
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);

    let states = StateSpace::new(
        (0..spec.n_states).map(|s| format!("s{s}")).collect(),
        draw_probs(&mut rng, spec.n_states),
    )
    .expect("generated state space");
    let agents = AgentGrid::new(
        (0..spec.n_agents).map(|t| format!("a{}", t + 1)).collect(),
        (0..spec.n_agents)
            .map(|_| rng.gen_range(0.5..1.5))
            .collect(),
    )
    .expect("generated agent grid");

    let partitions: Vec<Partition> = (0..spec.n_agents)
        .map(|_| draw_partition(&mut rng, spec.n_states))
        .collect();
    let utilities: Vec<Vec<Utility>> = (0..spec.n_agents)
        .map(|_| {
            (0..spec.n_states)
                .map(|_| draw_utility(&mut rng, spec))
                .collect()
        })
        .collect();
    let (lo, hi) = spec.endow_range;
    let endowments: Vec<Vec<Vec<f64>>> = (0..spec.n_agents)
        .map(|_| {
            (0..spec.n_states)
                .map(|_| (0..spec.n_goods).map(|_| rng.gen_range(lo..hi)).collect())
                .collect()
        })
        .collect();
    let priors: Vec<Option<Vec<f64>>> = (0..spec.n_agents)
        .map(|t| {
            if spec.with_priors && t % 2 == 0 {
                Some(draw_probs(&mut rng, spec.n_states))
            } else {
                None
            }
        })
        .collect();

    Economy::new(
        spec.n_goods,
        states,
        agents,
        partitions,
        utilities,
        endowments,
        priors,
    )
    .expect("generated economy is structurally valid")
}
