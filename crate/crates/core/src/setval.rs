//! Finite surrogates for set-valued analysis: point-cloud sets, Hausdorff
//! distance, Kuratowski limit markers, and weighted Minkowski aggregation
//! of per-agent preferred sets.
//!
//! Everything here operates on [`CompactSetApprox`], a finite point cloud
//! standing in for a compact set. Producers are deterministic, so clouds
//! carry no global canonical order; tests compare via
//! [`CompactSetApprox::sorted_rows`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::Config;
use crate::correspondences::{grid_steps, BudgetQuery, SampleError};
use crate::economy::{Economy, PriceVector};
use crate::util::dot;

#[derive(Debug, Error, PartialEq)]
pub enum SetError {
    #[error("point cloud must be nonempty")]
    Empty,
    #[error("dimension must be >= 1")]
    ZeroDim,
    #[error("flat point buffer of length {len} is not a multiple of dim {dim}")]
    RaggedBuffer { len: usize, dim: usize },
    #[error("coordinate {idx} is not finite")]
    BadCoordinate { idx: usize },
    #[error("set dimensions disagree: {a} vs {b}")]
    DimMismatch { a: usize, b: usize },
    #[error("{weights} weights for {sets} sets")]
    WeightMismatch { weights: usize, sets: usize },
    #[error("weight {idx} must be finite and > 0")]
    BadWeight { idx: usize },
    #[error("tail window {tail} invalid for a sequence of length {len}")]
    BadTail { tail: usize, len: usize },
    #[error(
        "{combos} selection combinations exceed the budget {budget} and the \
         family is not marked convex; sampling is disabled"
    )]
    TooLarge { combos: u128, budget: usize },
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Finite point cloud approximating a compact subset of the nonnegative
/// orthant. `resolution` records the grid step of the producer;
/// `convex_hint` records whether the underlying set is known convex, which
/// licenses support-function shortcuts downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSetApprox {
    dim: usize,
    points: Vec<f64>,
    resolution: f64,
    convex_hint: bool,
}

impl CompactSetApprox {
    pub fn new(
        dim: usize,
        points: Vec<f64>,
        resolution: f64,
        convex_hint: bool,
    ) -> Result<Self, SetError> {
        if dim == 0 {
            return Err(SetError::ZeroDim);
        }
        if points.is_empty() {
            return Err(SetError::Empty);
        }
        if points.len() % dim != 0 {
            return Err(SetError::RaggedBuffer {
                len: points.len(),
                dim,
            });
        }
        if let Some(idx) = points.iter().position(|v| !v.is_finite()) {
            return Err(SetError::BadCoordinate { idx });
        }
        Ok(CompactSetApprox {
            dim,
            points,
            resolution,
            convex_hint,
        })
    }

    pub fn from_rows(
        rows: &[Vec<f64>],
        resolution: f64,
        convex_hint: bool,
    ) -> Result<Self, SetError> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(SetError::RaggedBuffer { len: r.len(), dim });
            }
            flat.extend_from_slice(r);
        }
        CompactSetApprox::new(dim, flat, resolution, convex_hint)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty clouds
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn convex_hint(&self) -> bool {
        self.convex_hint
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Componentwise bounding box `(lower, upper)`.
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for h in 0..self.dim {
                lo[h] = lo[h].min(p[h]);
                hi[h] = hi[h].max(p[h]);
            }
        }
        (lo, hi)
    }

    /// Rows in lexicographic order with exact duplicates removed; the
    /// canonical form used for set equality in tests.
    pub fn sorted_rows(&self) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = self.iter().map(|p| p.to_vec()).collect();
        sort_dedup(&mut rows);
        rows
    }
}

fn sort_dedup(rows: &mut Vec<Vec<f64>>) {
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
}

fn squared_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn one_sided_sq(from: &CompactSetApprox, to: &CompactSetApprox) -> f64 {
    let body = |p: &[f64]| {
        to.iter()
            .map(|q| squared_dist(p, q))
            .fold(f64::INFINITY, f64::min)
    };
    if from.len().saturating_mul(to.len()) > 4_000_000 {
        // f64::max over nonnegative values is order-independent.
        (0..from.len())
            .into_par_iter()
            .map(|i| body(from.point(i)))
            .reduce(|| f64::NEG_INFINITY, f64::max)
    } else {
        from.iter().map(body).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Hausdorff distance between two clouds of equal dimension.
pub fn hausdorff_distance(a: &CompactSetApprox, b: &CompactSetApprox) -> f64 {
    assert_eq!(a.dim(), b.dim(), "hausdorff over mismatched dimensions");
    one_sided_sq(a, b).max(one_sided_sq(b, a)).sqrt()
}

/// Finite-tail surrogates for the Kuratowski lower and upper limits of a
/// set sequence. `li` keeps the candidate points within `tol` of every set
/// in the tail window; `ls` keeps those within `tol` of at least one.
/// Empty limits come back as `None`.
#[derive(Debug, Clone)]
pub struct KuratowskiLimits {
    pub li: Option<CompactSetApprox>,
    pub ls: Option<CompactSetApprox>,
}

pub fn kuratowski_limits(
    seq: &[CompactSetApprox],
    tail: usize,
    tol: f64,
) -> Result<KuratowskiLimits, SetError> {
    if seq.is_empty() {
        return Err(SetError::Empty);
    }
    if tail == 0 || tail > seq.len() {
        return Err(SetError::BadTail {
            tail,
            len: seq.len(),
        });
    }
    let dim = seq[0].dim();
    for s in seq {
        if s.dim() != dim {
            return Err(SetError::DimMismatch { a: dim, b: s.dim() });
        }
    }
    let window = &seq[seq.len() - tail..];
    let mut candidates: Vec<Vec<f64>> = seq
        .iter()
        .flat_map(|s| s.iter().map(|p| p.to_vec()))
        .collect();
    sort_dedup(&mut candidates);

    let tol_sq = tol * tol;
    let mut li_rows = Vec::new();
    let mut ls_rows = Vec::new();
    for x in &candidates {
        let mut max_d = f64::NEG_INFINITY;
        let mut min_d = f64::INFINITY;
        for set in window {
            let d = set
                .iter()
                .map(|q| squared_dist(x, q))
                .fold(f64::INFINITY, f64::min);
            max_d = max_d.max(d);
            min_d = min_d.min(d);
        }
        if max_d <= tol_sq {
            li_rows.push(x.clone());
        }
        if min_d <= tol_sq {
            ls_rows.push(x.clone());
        }
    }
    let res = seq.iter().map(|s| s.resolution()).fold(0.0f64, f64::max);
    let build = |rows: Vec<Vec<f64>>| {
        if rows.is_empty() {
            None
        } else {
            Some(CompactSetApprox::from_rows(&rows, res, false).unwrap())
        }
    };
    Ok(KuratowskiLimits {
        li: build(li_rows),
        ls: build(ls_rows),
    })
}

/// How a weighted Minkowski sum was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AumannMethod {
    /// Every selection combination enumerated.
    Exact,
    /// Support-function maximizers over a fixed direction grid.
    Support,
    /// Seeded random selections.
    Sampled,
}

#[derive(Debug, Clone)]
pub struct AumannIntegral {
    pub set: CompactSetApprox,
    pub method: AumannMethod,
}

/// Weighted Minkowski sum of a family of clouds: the set of
/// `sum_i w_i x_i` over selections `x_i` from cloud `i`.
///
/// Routes by cost: exact enumeration while the combination count fits the
/// combo budget; support-function sampling when every cloud is marked
/// convex; seeded random selections otherwise (an error if
/// `sampled_selections` is zero).
pub fn aumann_integral(
    family: &[CompactSetApprox],
    weights: &[f64],
    cfg: &Config,
) -> Result<AumannIntegral, SetError> {
    if family.is_empty() {
        return Err(SetError::Empty);
    }
    if weights.len() != family.len() {
        return Err(SetError::WeightMismatch {
            weights: weights.len(),
            sets: family.len(),
        });
    }
    if let Some(idx) = weights.iter().position(|w| !w.is_finite() || *w <= 0.0) {
        return Err(SetError::BadWeight { idx });
    }
    let dim = family[0].dim();
    for s in family {
        if s.dim() != dim {
            return Err(SetError::DimMismatch { a: dim, b: s.dim() });
        }
    }
    let res = family.iter().map(|s| s.resolution()).fold(0.0f64, f64::max);
    let all_convex = family.iter().all(|s| s.convex_hint());

    let combos = family
        .iter()
        .map(|s| s.len() as u128)
        .try_fold(1u128, |acc, n| acc.checked_mul(n))
        .unwrap_or(u128::MAX);

    if combos <= cfg.combo_budget as u128 {
        let mut rows = Vec::with_capacity(combos as usize);
        let mut idx = vec![0usize; family.len()];
        'combo: loop {
            let mut sum = vec![0.0; dim];
            for (i, set) in family.iter().enumerate() {
                let x = set.point(idx[i]);
                for h in 0..dim {
                    sum[h] += weights[i] * x[h];
                }
            }
            rows.push(sum);
            for i in (0..family.len()).rev() {
                if idx[i] + 1 < family[i].len() {
                    idx[i] += 1;
                    continue 'combo;
                }
                idx[i] = 0;
            }
            break;
        }
        sort_dedup(&mut rows);
        return Ok(AumannIntegral {
            set: CompactSetApprox::from_rows(&rows, res, all_convex)?,
            method: AumannMethod::Exact,
        });
    }

    if all_convex {
        let dirs = direction_set(dim, cfg.support_directions, cfg.seed);
        let mut rows = Vec::with_capacity(dirs.len());
        for d in &dirs {
            let mut sum = vec![0.0; dim];
            for (i, set) in family.iter().enumerate() {
                let mut best = f64::NEG_INFINITY;
                let mut best_pt = set.point(0);
                for p in set.iter() {
                    let v = dot(d, p);
                    if v > best {
                        best = v;
                        best_pt = p;
                    }
                }
                for h in 0..dim {
                    sum[h] += weights[i] * best_pt[h];
                }
            }
            rows.push(sum);
        }
        sort_dedup(&mut rows);
        return Ok(AumannIntegral {
            set: CompactSetApprox::from_rows(&rows, res, true)?,
            method: AumannMethod::Support,
        });
    }

    if cfg.sampled_selections == 0 {
        return Err(SetError::TooLarge {
            combos,
            budget: cfg.combo_budget,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.sampled_selections);
    for _ in 0..cfg.sampled_selections {
        let mut sum = vec![0.0; dim];
        for (i, set) in family.iter().enumerate() {
            let x = set.point(rng.gen_range(0..set.len()));
            for h in 0..dim {
                sum[h] += weights[i] * x[h];
            }
        }
        rows.push(sum);
    }
    sort_dedup(&mut rows);
    Ok(AumannIntegral {
        set: CompactSetApprox::from_rows(&rows, res, false)?,
        method: AumannMethod::Sampled,
    })
}

/// Deterministic direction grid on the unit sphere. Dimension 1 uses the
/// two signs, dimension 2 a uniform circle (including the diagonals when
/// `m` is a multiple of 8), dimension 3 a Fibonacci sphere, and higher
/// dimensions the signed axes plus seeded Gaussian directions.
pub(crate) fn direction_set(dim: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        0 => panic!("direction set in dimension 0"),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..m.max(4))
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / m.max(4) as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let n = m.max(8);
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(m.max(2 * dim));
            for h in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut e = vec![0.0; dim];
                    e[h] = sign;
                    dirs.push(e);
                }
            }
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x6469_7273);
            while dirs.len() < m.max(2 * dim) {
                let v: Vec<f64> = (0..dim)
                    .map(|_| {
                        // Box-Muller from two uniforms.
                        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                        let u2: f64 = rng.gen_range(0.0..1.0);
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    })
                    .collect();
                let norm = dot(&v, &v).sqrt();
                if norm > 1e-9 {
                    dirs.push(v.iter().map(|x| x / norm).collect());
                }
            }
            dirs
        }
    }
}

/// Weighted aggregate of all agents' truncated preferred sets in one state.
///
/// Small instances materialize every per-agent cloud and enumerate
/// selections exactly. Larger convex instances stream: support samples of
/// each agent cloud are computed column-by-column without materialization,
/// summed per direction, and the demand aggregate is appended as a known
/// selection. Non-convex oversized instances fall back to materialized
/// sampled selections.
pub fn aggregate_preferred_set(
    econ: &Economy,
    state: usize,
    price: &PriceVector,
    resolution: f64,
    cfg: &Config,
) -> Result<AumannIntegral, SetError> {
    assert!(state < econ.n_states(), "state index out of range");
    let n = econ.n_agents();
    let queries: Vec<BudgetQuery<'_>> = (0..n)
        .map(|t| BudgetQuery::new(econ, t, state, price.clone()))
        .collect();
    let weights: Vec<f64> = (0..n).map(|t| econ.agents().weight(t)).collect();

    // Upper bound on materialized combination count: full lattice plus the
    // appended demand point per agent.
    let mut bound = 1u128;
    for q in &queries {
        let k = grid_steps(q.truncation_bound().gamma(), resolution)?;
        let cloud_cap = ((k as u128 + 1).checked_pow(econ.n_goods() as u32))
            .map(|c| c + 1)
            .unwrap_or(u128::MAX);
        bound = bound.checked_mul(cloud_cap).unwrap_or(u128::MAX);
    }

    if bound <= cfg.combo_budget as u128 {
        let clouds: Vec<CompactSetApprox> = queries
            .iter()
            .map(|q| q.sample_preferred_set(resolution, cfg))
            .collect::<Result<_, _>>()?;
        return aumann_integral(&clouds, &weights, cfg);
    }

    let anchor = {
        let mut sum = vec![0.0; econ.n_goods()];
        for (q, w) in queries.iter().zip(&weights) {
            for (h, v) in q.demand().iter().enumerate() {
                sum[h] += w * v;
            }
        }
        sum
    };

    if queries.iter().all(|q| q.utility().concave()) {
        let dirs = direction_set(econ.n_goods(), cfg.support_directions, cfg.seed);
        let mut sums = vec![vec![0.0; econ.n_goods()]; dirs.len()];
        for (q, w) in queries.iter().zip(&weights) {
            let samples = q.support_samples(&dirs, resolution, cfg)?;
            for (sum, (_, pt)) in sums.iter_mut().zip(&samples) {
                for h in 0..econ.n_goods() {
                    sum[h] += w * pt[h];
                }
            }
        }
        sums.push(anchor);
        sort_dedup(&mut sums);
        return Ok(AumannIntegral {
            set: CompactSetApprox::from_rows(&sums, resolution, true)?,
            method: AumannMethod::Support,
        });
    }

    let clouds: Vec<CompactSetApprox> = queries
        .iter()
        .map(|q| q.sample_preferred_set(resolution, cfg))
        .collect::<Result<_, _>>()?;
    let out = aumann_integral(&clouds, &weights, cfg)?;
    let mut rows = out.set.sorted_rows();
    rows.push(anchor);
    sort_dedup(&mut rows);
    Ok(AumannIntegral {
        set: CompactSetApprox::from_rows(&rows, resolution, out.set.convex_hint())?,
        method: out.method,
    })
}

/// Largest support-function gap between two clouds over a direction panel.
/// For convex sets this converges to the Hausdorff distance as the panel
/// densifies; on a finite panel it avoids the arc-spacing error that point
/// matching suffers when both clouds sample one boundary point per direction.
fn support_gap(a: &CompactSetApprox, b: &CompactSetApprox, dirs: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for d in dirs {
        let ha = a
            .iter()
            .map(|p| dot(p, d))
            .fold(f64::NEG_INFINITY, f64::max);
        let hb = b
            .iter()
            .map(|p| dot(p, d))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((ha - hb).abs());
    }
    worst
}

/// Hausdorff distances from the aggregate at each probe price to the
/// aggregate at the base price, in probe order. Pairs of convex-hinted
/// clouds are compared through their support functions on a shared panel;
/// all other pairs through the point-cloud metric.
pub fn continuity_probe(
    econ: &Economy,
    state: usize,
    base: &PriceVector,
    probes: &[PriceVector],
    resolution: f64,
    cfg: &Config,
) -> Result<Vec<f64>, SetError> {
    let base_agg = aggregate_preferred_set(econ, state, base, resolution, cfg)?;
    let dirs = direction_set(econ.n_goods(), cfg.support_directions, cfg.seed);
    probes
        .iter()
        .map(|p| {
            aggregate_preferred_set(econ, state, p, resolution, cfg).map(|agg| {
                if agg.set.convex_hint() && base_agg.set.convex_hint() {
                    support_gap(&agg.set, &base_agg.set, &dirs)
                } else {
                    hausdorff_distance(&agg.set, &base_agg.set)
                }
            })
        })
        .collect()
}
