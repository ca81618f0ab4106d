//! Ground metrics on rows, exact Earth Mover's Distance between weighted
//! distributions, max-over-orders metrics, local novelty distance, and the
//! lower-bound checkers.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::PeriodicSet;
use crate::invariants::{self, InvariantError, WeightedRowDistribution};
use crate::transport::{self, TransportError};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("vectors of lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("distributions with {0} and {1} columns")]
    ColumnMismatch(usize, usize),
    #[error("Minkowski exponent must satisfy q >= 1, got {0}")]
    InvalidQ(f64),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Ground metric on rows: Minkowski L_q (q in [1, inf]) or L_2 / sqrt(k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundMetric {
    Lq(f64),
    Linf,
    Rms,
}

impl GroundMetric {
    pub fn minkowski(q: f64) -> Result<Self, MetricError> {
        if q.is_nan() || q < 1.0 {
            return Err(MetricError::InvalidQ(q));
        }
        Ok(if q.is_infinite() {
            GroundMetric::Linf
        } else {
            GroundMetric::Lq(q)
        })
    }
}

impl fmt::Display for GroundMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundMetric::Lq(q) if *q == 2.0 => write!(f, "l2"),
            GroundMetric::Lq(q) => write!(f, "q:{q}"),
            GroundMetric::Linf => write!(f, "linf"),
            GroundMetric::Rms => write!(f, "rms"),
        }
    }
}

impl FromStr for GroundMetric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, MetricError> {
        match s.to_ascii_lowercase().as_str() {
            "linf" | "inf" => Ok(GroundMetric::Linf),
            "rms" => Ok(GroundMetric::Rms),
            "l1" => Ok(GroundMetric::Lq(1.0)),
            "l2" => Ok(GroundMetric::Lq(2.0)),
            other => match other.strip_prefix("q:") {
                Some(q) => {
                    let q: f64 = q.parse().map_err(|_| MetricError::InvalidQ(f64::NAN))?;
                    GroundMetric::minkowski(q)
                }
                None => Err(MetricError::InvalidQ(f64::NAN)),
            },
        }
    }
}

/// Distance between two equal-length vectors under the ground metric.
pub fn ground_distance(u: &[f64], v: &[f64], g: GroundMetric) -> Result<f64, MetricError> {
    if u.len() != v.len() {
        return Err(MetricError::LengthMismatch(u.len(), v.len()));
    }
    Ok(match g {
        GroundMetric::Linf => u
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        GroundMetric::Rms => {
            let l2: f64 = u
                .iter()
                .zip(v)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            l2 / (u.len() as f64).sqrt()
        }
        GroundMetric::Lq(q) => u
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q),
    })
}

/// The flow matrix realizing an EMD value.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    flows: Vec<f64>,
    rows: usize,
    cols: usize,
    pub cost: f64,
    pub residual: f64,
}

impl TransportPlan {
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flows[i * self.cols + j]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn total_flow(&self) -> f64 {
        self.flows.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.flow(i, j)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.flow(i, j)).sum())
            .collect()
    }

    /// Verifies the transportation constraints against the marginals.
    pub fn is_feasible(&self, a: &WeightedRowDistribution, b: &WeightedRowDistribution) -> bool {
        let tol = 1e-9;
        let rs = self.row_sums();
        let cs = self.col_sums();
        rs.iter()
            .zip(a.rows())
            .all(|(s, r)| *s <= r.weight + tol)
            && cs.iter().zip(b.rows()).all(|(s, r)| *s <= r.weight + tol)
            && (self.total_flow() - 1.0).abs() <= tol
            && self.flows.iter().all(|&f| f >= -tol)
    }
}

/// Exact Earth Mover's Distance between two weighted distributions under a
/// ground metric on rows.
pub fn emd(
    a: &WeightedRowDistribution,
    b: &WeightedRowDistribution,
    g: GroundMetric,
) -> Result<(f64, TransportPlan), MetricError> {
    if a.columns() != b.columns() {
        return Err(MetricError::ColumnMismatch(a.columns(), b.columns()));
    }
    let m = a.rows().len();
    let n = b.rows().len();
    let mut cost = Vec::with_capacity(m * n);
    for ra in a.rows() {
        for rb in b.rows() {
            cost.push(ground_distance(&ra.values, &rb.values, g)?);
        }
    }
    let supply: Vec<f64> = a.rows().iter().map(|r| r.weight).collect();
    let demand: Vec<f64> = b.rows().iter().map(|r| r.weight).collect();
    let sol = transport::solve(&supply, &demand, &cost)?;
    let plan = TransportPlan {
        flows: sol.flows,
        rows: m,
        cols: n,
        cost: sol.cost,
        residual: sol.residual,
    };
    Ok((sol.cost, plan))
}

/// Which invariant family a comparison runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    Pdd,
    Pda,
}

impl fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantKind::Pdd => write!(f, "pdd"),
            InvariantKind::Pda => write!(f, "pda"),
        }
    }
}

impl FromStr for InvariantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pdd" => Ok(InvariantKind::Pdd),
            "pda" => Ok(InvariantKind::Pda),
            other => Err(format!("unknown invariant {other:?}")),
        }
    }
}

fn order_distribution(
    set: &PeriodicSet,
    h: usize,
    k: usize,
    kind: InvariantKind,
) -> Result<WeightedRowDistribution, InvariantError> {
    match kind {
        InvariantKind::Pdd => invariants::pdd_h(set, h, k),
        InvariantKind::Pda => invariants::pda_h(set, h, k),
    }
}

/// EMD between the order-h distributions of two sets.
pub fn emd_h(
    set_a: &PeriodicSet,
    set_b: &PeriodicSet,
    h: usize,
    k: usize,
    g: GroundMetric,
    kind: InvariantKind,
) -> Result<f64, MetricError> {
    let a = order_distribution(set_a, h, k, kind)?;
    let b = order_distribution(set_b, h, k, kind)?;
    Ok(emd(&a, &b, g)?.0)
}

/// Max of the order-i EMDs for i = 1..h.
pub fn emd_max(
    set_a: &PeriodicSet,
    set_b: &PeriodicSet,
    h: usize,
    k: usize,
    g: GroundMetric,
    kind: InvariantKind,
) -> Result<f64, MetricError> {
    let mut best = 0.0f64;
    for order in 1..=h {
        best = best.max(emd_h(set_a, set_b, order, k, g, kind)?);
    }
    Ok(best)
}

/// Configuration of the metric used by the novelty distance.
#[derive(Debug, Clone, Copy)]
pub struct LndConfig {
    pub h: usize,
    pub k: usize,
    pub ground: GroundMetric,
    pub invariant: InvariantKind,
    /// Use the max over orders 1..h rather than order h alone.
    pub max_over_orders: bool,
}

impl Default for LndConfig {
    fn default() -> Self {
        LndConfig {
            h: 2,
            k: 100,
            ground: GroundMetric::Linf,
            invariant: InvariantKind::Pda,
            max_over_orders: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LndResult {
    pub distance: f64,
    pub index: usize,
    pub id: Option<String>,
    /// All corpus distances in corpus order.
    pub distances: Vec<f64>,
}

/// Local novelty distance: the minimum configured distance from the query
/// to any corpus entry. Ties break toward the earlier corpus index.
pub fn lnd(
    query: &PeriodicSet,
    corpus: &[PeriodicSet],
    config: &LndConfig,
) -> Result<LndResult, MetricError> {
    if corpus.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let mut distances = Vec::with_capacity(corpus.len());
    for entry in corpus {
        let d = if config.max_over_orders {
            emd_max(query, entry, config.h, config.k, config.ground, config.invariant)?
        } else {
            emd_h(query, entry, config.h, config.k, config.ground, config.invariant)?
        };
        distances.push(d);
    }
    let mut best = 0usize;
    for (i, d) in distances.iter().enumerate() {
        if *d < distances[best] {
            best = i;
        }
    }
    Ok(LndResult {
        distance: distances[best],
        index: best,
        id: corpus[best].id().map(str::to_string),
        distances,
    })
}

#[derive(Debug, Clone)]
pub struct BoundViolation {
    pub kind: &'static str,
    pub detail: String,
    pub slack: f64,
}

/// Checks the lower-bound relations between EMDs of different orders,
/// truncations, and their centroid vectors. Returns violations beyond a
/// 1e-9 slack; the expected result is an empty list.
pub fn check_bounds(
    set_a: &PeriodicSet,
    set_b: &PeriodicSet,
    h: usize,
    k: usize,
    g: GroundMetric,
) -> Result<Vec<BoundViolation>, MetricError> {
    const SLACK: f64 = 1e-9;
    let mut violations = Vec::new();

    let dist_a: Vec<WeightedRowDistribution> = (1..=h)
        .map(|o| invariants::pdd_h(set_a, o, k))
        .collect::<Result<_, _>>()?;
    let dist_b: Vec<WeightedRowDistribution> = (1..=h)
        .map(|o| invariants::pdd_h(set_b, o, k))
        .collect::<Result<_, _>>()?;

    let per_order: Vec<f64> = dist_a
        .iter()
        .zip(&dist_b)
        .map(|(a, b)| emd(a, b, g).map(|(d, _)| d))
        .collect::<Result<_, _>>()?;

    // (a) the max over orders 1..g is non-decreasing in g.
    let mut running = 0.0f64;
    let mut prev = 0.0f64;
    for (o, d) in per_order.iter().enumerate() {
        running = running.max(*d);
        if running < prev - SLACK {
            violations.push(BoundViolation {
                kind: "order",
                detail: format!("max over orders dropped at order {}", o + 1),
                slack: prev - running,
            });
        }
        prev = running;
    }

    // (b) truncating columns cannot increase the distance. RMS renormalizes
    // by the truncated length, so rescale to keep the L2/sqrt(k) of the
    // full width; the bound is stated for a fixed normalization.
    for (o, (da, db)) in dist_a.iter().zip(&dist_b).enumerate() {
        let full = per_order[o];
        for k_small in truncation_ladder(k) {
            let ta = da.truncate_columns(k_small)?;
            let tb = db.truncate_columns(k_small)?;
            let (mut d, _) = emd(&ta, &tb, g)?;
            if g == GroundMetric::Rms {
                d *= (k_small as f64 / k as f64).sqrt();
            }
            if d > full + SLACK {
                violations.push(BoundViolation {
                    kind: "truncation",
                    detail: format!("order {} at k'={k_small}: {d} > {full}", o + 1),
                    slack: d - full,
                });
            }
        }
    }

    // (c) the ground distance of the centroids lower-bounds the EMD.
    for (o, (da, db)) in dist_a.iter().zip(&dist_b).enumerate() {
        let centroid = ground_distance(&da.column_means(), &db.column_means(), g)?;
        if centroid > per_order[o] + SLACK {
            violations.push(BoundViolation {
                kind: "centroid",
                detail: format!("order {}: {centroid} > {}", o + 1, per_order[o]),
                slack: centroid - per_order[o],
            });
        }
    }
    Ok(violations)
}

fn truncation_ladder(k: usize) -> Vec<usize> {
    let mut out = vec![1];
    for cand in [k / 4, k / 2, k] {
        if cand >= 1 && Some(&cand) != out.last() {
            out.push(cand);
        }
    }
    out.dedup();
    out
}
