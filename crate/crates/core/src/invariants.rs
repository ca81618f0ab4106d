//! Pointwise distance distributions and their higher-order extensions.
//!
//! For a motif point p and order h, the h-order average of a tuple
//! {p_1..p_h} is 2/(h(h+1)) times the sum of all pairwise distances among
//! {p, p_1..p_h}. The k smallest averages per motif point form the rows of
//! the order-h distribution; order 1 reduces to plain nearest-neighbor
//! distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Ball, GeometryError, PeriodicSet};
use crate::linalg;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("order must be >= 1, got {0}")]
    InvalidOrder(usize),
    #[error("neighbor count must be >= 1, got {0}")]
    InvalidNeighborCount(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("operation requires a 1-dimensional set, got dim {0}")]
    NotOneDimensional(usize),
    #[error("finite set of {have} points cannot support k = {need}")]
    TooFewPoints { have: usize, need: usize },
    #[error("finite set has no neighbors to measure")]
    NoNeighbors,
    #[error("matrix is not a realizable shift distribution: {0}")]
    UnrealizablePsd(String),
    #[error("malformed row: {0}")]
    MalformedRow(String),
    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),
}

/// One weighted row of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub weight: f64,
    pub values: Vec<f64>,
}

/// An unordered collection of weighted rows of k reals with weights summing
/// to one. Houses PDD, higher-order PDD, PDA and PSD matrices.
///
/// Rows of distance-valued distributions are non-decreasing; deviation
/// (PDA) rows are not, since an increasing curve is subtracted columnwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedRowDistribution {
    rows: Vec<Row>,
    columns: usize,
    /// Number of expanded (uncollapsed) rows; the m of the source motif.
    source_rows: usize,
    collapsed: bool,
}

impl WeightedRowDistribution {
    /// Builds a distribution of equally weighted rows.
    pub fn from_equal_rows(rows: Vec<Vec<f64>>) -> Result<Self, InvariantError> {
        let m = rows.len();
        if m == 0 {
            return Err(InvariantError::MalformedDistribution("no rows".into()));
        }
        let w = 1.0 / m as f64;
        Self::from_parts(
            rows.into_iter()
                .map(|values| Row { weight: w, values })
                .collect(),
            m,
            false,
        )
    }

    /// Builds a distribution from explicit weighted rows.
    pub fn from_parts(
        rows: Vec<Row>,
        source_rows: usize,
        collapsed: bool,
    ) -> Result<Self, InvariantError> {
        if rows.is_empty() {
            return Err(InvariantError::MalformedDistribution("no rows".into()));
        }
        let columns = rows[0].values.len();
        if columns == 0 {
            return Err(InvariantError::MalformedDistribution("empty rows".into()));
        }
        if rows.iter().any(|r| r.values.len() != columns) {
            return Err(InvariantError::MalformedDistribution(
                "rows have differing lengths".into(),
            ));
        }
        if rows.iter().any(|r| !(r.weight > 0.0 && r.weight <= 1.0)) {
            return Err(InvariantError::MalformedDistribution(
                "row weights must lie in (0, 1]".into(),
            ));
        }
        let total: f64 = rows.iter().map(|r| r.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(InvariantError::MalformedDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(WeightedRowDistribution {
            rows,
            columns,
            source_rows,
            collapsed,
        })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    /// The expanded row count m (denominator of the rational weights).
    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn is_collapsed(&self) -> bool {
        self.collapsed
    }

    /// Merges rows that are equal entrywise within `tol`, summing weights.
    pub fn collapse(&self, tol: f64) -> Self {
        let mut kept: Vec<Row> = Vec::new();
        for row in &self.rows {
            if let Some(prev) = kept.iter_mut().find(|r| {
                r.values
                    .iter()
                    .zip(&row.values)
                    .all(|(a, b)| (a - b).abs() <= tol)
            }) {
                prev.weight += row.weight;
            } else {
                kept.push(row.clone());
            }
        }
        WeightedRowDistribution {
            rows: kept,
            columns: self.columns,
            source_rows: self.source_rows,
            collapsed: true,
        }
    }

    /// Weighted column means (the first-moment row).
    pub fn column_means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.columns];
        for row in &self.rows {
            for (o, v) in out.iter_mut().zip(&row.values) {
                *o += row.weight * v;
            }
        }
        out
    }

    /// Restriction to the first `k` columns.
    pub fn truncate_columns(&self, k: usize) -> Result<Self, InvariantError> {
        if k == 0 || k > self.columns {
            return Err(InvariantError::InvalidNeighborCount(k));
        }
        Ok(WeightedRowDistribution {
            rows: self
                .rows
                .iter()
                .map(|r| Row {
                    weight: r.weight,
                    values: r.values[..k].to_vec(),
                })
                .collect(),
            columns: k,
            source_rows: self.source_rows,
            collapsed: self.collapsed,
        })
    }

    /// CSV rendering: one line per row, weight first.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&format!("{}", row.weight));
            for v in &row.values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV produced by [`Self::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, InvariantError> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let weight: f64 = fields
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|_| InvariantError::MalformedRow(format!("line {}", ln + 1)))?;
            let values: Result<Vec<f64>, _> = fields.map(|f| f.trim().parse::<f64>()).collect();
            let values =
                values.map_err(|_| InvariantError::MalformedRow(format!("line {}", ln + 1)))?;
            rows.push(Row { weight, values });
        }
        let n = rows.len();
        Self::from_parts(rows, n, false)
    }
}

/// Which distribution a moments matrix came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsProvenance {
    pub invariant: String,
    pub order: usize,
}

/// The t x k matrix of column moments of a weighted distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentsMatrix {
    rows: Vec<Vec<f64>>,
    pub provenance: MomentsProvenance,
}

impl MomentsMatrix {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Records which distribution and order the moments were taken from.
    pub fn with_provenance(mut self, invariant: impl Into<String>, order: usize) -> Self {
        self.provenance = MomentsProvenance {
            invariant: invariant.into(),
            order,
        };
        self
    }

    pub fn t(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Row-major flattening into a t*k vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

/// Column moments mu_1..mu_t: mu_t(A) = (m^(1-t) sum w_i a_i^t)^(1/t).
///
/// Negative inputs (deviation distributions) use a signed root for odd t;
/// even t takes the root of the absolute power mean with the sign of the
/// plain mean.
pub fn moments(dist: &WeightedRowDistribution, t: usize) -> Result<MomentsMatrix, InvariantError> {
    if t == 0 {
        return Err(InvariantError::InvalidOrder(0));
    }
    let m = dist.source_rows() as f64;
    let mut rows = Vec::with_capacity(t);
    for ord in 1..=t {
        let mut row = Vec::with_capacity(dist.columns());
        for col in 0..dist.columns() {
            let mean: f64 = dist
                .rows()
                .iter()
                .map(|r| r.weight * r.values[col])
                .sum();
            if ord == 1 {
                row.push(mean);
                continue;
            }
            let scale = m.powi(1 - ord as i32);
            if ord % 2 == 1 {
                let signed: f64 = dist
                    .rows()
                    .iter()
                    .map(|r| r.weight * r.values[col].powi(ord as i32))
                    .sum::<f64>()
                    * scale;
                row.push(signed.signum() * signed.abs().powf(1.0 / ord as f64));
            } else {
                let abs_mean: f64 = dist
                    .rows()
                    .iter()
                    .map(|r| r.weight * r.values[col].abs().powi(ord as i32))
                    .sum::<f64>()
                    * scale;
                let sign = if mean < 0.0 { -1.0 } else { 1.0 };
                row.push(sign * abs_mean.powf(1.0 / ord as f64));
            }
        }
        rows.push(row);
    }
    Ok(MomentsMatrix {
        rows,
        provenance: MomentsProvenance {
            invariant: "custom".into(),
            order: 1,
        },
    })
}

/// Per-point sorted distances to the k nearest neighbors in the whole set.
/// Finite sets with fewer than k neighbors repeat the largest distance.
pub fn knn_rows(set: &PeriodicSet, k: usize) -> Result<Vec<Vec<f64>>, InvariantError> {
    if k == 0 {
        return Err(InvariantError::InvalidNeighborCount(0));
    }
    let rows: Vec<Vec<f64>> = (0..set.motif_len())
        .into_par_iter()
        .map(|i| set.neighbor_distances(i, k))
        .collect();
    rows.into_iter()
        .map(|mut row| {
            if row.is_empty() {
                return Err(InvariantError::NoNeighbors);
            }
            while row.len() < k {
                row.push(*row.last().unwrap());
            }
            Ok(row)
        })
        .collect()
}

/// The pointwise distance distribution PDD(S; k).
pub fn pdd(
    set: &PeriodicSet,
    k: usize,
    collapse: bool,
) -> Result<WeightedRowDistribution, InvariantError> {
    let dist = WeightedRowDistribution::from_equal_rows(knn_rows(set, k)?)?;
    Ok(if collapse {
        dist.collapse(COLLAPSE_TOL)
    } else {
        dist
    })
}

/// Entrywise tolerance for merging equal rows.
pub const COLLAPSE_TOL: f64 = 1e-10;

/// Uncollapsed order-h rows in motif order.
pub fn pdd_h_rows(set: &PeriodicSet, h: usize, k: usize) -> Result<Vec<Vec<f64>>, InvariantError> {
    if h == 0 {
        return Err(InvariantError::InvalidOrder(0));
    }
    if k == 0 {
        return Err(InvariantError::InvalidNeighborCount(0));
    }
    if h == 1 {
        return knn_rows(set, k);
    }
    (0..set.motif_len())
        .into_par_iter()
        .map(|i| order_h_row(set, i, h, k))
        .collect()
}

/// The order-h pointwise distance distribution PDD^{h}(S; k).
pub fn pdd_h(
    set: &PeriodicSet,
    h: usize,
    k: usize,
) -> Result<WeightedRowDistribution, InvariantError> {
    WeightedRowDistribution::from_equal_rows(pdd_h_rows(set, h, k)?)
}

/// Orders 1..h concatenated per motif point into k*h columns.
pub fn pdd_concat(
    set: &PeriodicSet,
    h: usize,
    k: usize,
) -> Result<WeightedRowDistribution, InvariantError> {
    if h == 0 {
        return Err(InvariantError::InvalidOrder(0));
    }
    let mut rows = vec![Vec::with_capacity(h * k); set.motif_len()];
    for order in 1..=h {
        for (row, part) in rows.iter_mut().zip(pdd_h_rows(set, order, k)?) {
            row.extend(part);
        }
    }
    WeightedRowDistribution::from_equal_rows(rows)
}

/// Average minimum distances: the weighted column means of PDD(S; k).
pub fn amd(set: &PeriodicSet, k: usize) -> Result<Vec<f64>, InvariantError> {
    Ok(pdd(set, k, false)?.column_means())
}

/// Generalized binomial coefficient b(b-1)...(b-h+1) / h!.
fn generalized_binomial(b: f64, h: usize) -> f64 {
    let mut num = 1.0;
    for i in 0..h {
        num *= b - i as f64;
    }
    let mut fact = 1.0;
    for i in 2..=h {
        fact *= i as f64;
    }
    num / fact
}

/// The candidate-count coefficient b(h, k): one plus the real b >= h whose
/// generalized binomial over h lands in (k-1, k].
pub fn b_coefficient(h: usize, k: usize) -> f64 {
    assert!(h >= 1 && k >= 1);
    match h {
        1 => (k + 1) as f64,
        2 => 1.5 + (2.0 * k as f64).sqrt(),
        _ => {
            // Bisect the strictly increasing binomial to hit k exactly.
            let target = k as f64;
            let mut lo = h as f64;
            let mut hi = h as f64 + 1.0;
            while generalized_binomial(hi, h) < target {
                hi = (hi - h as f64) * 2.0 + h as f64;
            }
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if generalized_binomial(mid, h) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi) + 1.0
        }
    }
}

/// The fitted curve value c * (h! j)^(1/(h n)) uses this basis function.
pub fn asymptotic_basis(h: usize, n: usize, j: usize) -> f64 {
    let mut fact = 1.0;
    for i in 2..=h {
        fact *= i as f64;
    }
    (fact * j as f64).powf(1.0 / (h * n) as f64)
}

/// rho_k = sum_j g_j / sum_j g_j^2 for the basis g_j = (h! j)^(1/(hn)),
/// the Lipschitz factor of the fitted coefficient.
pub fn rho_k(h: usize, n: usize, k: usize) -> f64 {
    if h == 1 {
        return 0.0;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 1..=k {
        let g = asymptotic_basis(h, n, j);
        num += g;
        den += g * g;
    }
    num / den
}

/// Least-squares coefficient of the asymptotic curve. Order 1 returns the
/// point packing coefficient exactly.
pub fn fit_coefficient(set: &PeriodicSet, h: usize, k: usize) -> Result<f64, InvariantError> {
    if h == 0 {
        return Err(InvariantError::InvalidOrder(0));
    }
    if h == 1 {
        return Ok(set.ppc()?);
    }
    let means = pdd_h(set, h, k)?.column_means();
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, a) in means.iter().enumerate() {
        let g = asymptotic_basis(h, set.dim(), j + 1);
        num += a * g;
        den += g * g;
    }
    Ok(num / den)
}

/// Pointwise deviation from asymptotic: PDD^{h} minus the fitted curve
/// c(S;h,k) * (h! j)^(1/(hn)) in every column. Row values may be negative.
pub fn pda_h(
    set: &PeriodicSet,
    h: usize,
    k: usize,
) -> Result<WeightedRowDistribution, InvariantError> {
    let c = fit_coefficient(set, h, k)?;
    let pdd = pdd_h(set, h, k)?;
    let curve: Vec<f64> = (1..=k)
        .map(|j| c * asymptotic_basis(h, set.dim(), j))
        .collect();
    let rows = pdd
        .rows()
        .iter()
        .map(|r| Row {
            weight: r.weight,
            values: r.values.iter().zip(&curve).map(|(v, c)| v - c).collect(),
        })
        .collect();
    WeightedRowDistribution::from_parts(rows, pdd.source_rows(), pdd.is_collapsed())
}

/// Average deviation from asymptotic: column means of PDA^{h}.
pub fn ada_h(set: &PeriodicSet, h: usize, k: usize) -> Result<Vec<f64>, InvariantError> {
    Ok(pda_h(set, h, k)?.column_means())
}

/// Deviations of orders 1..h concatenated per motif point.
pub fn pda_concat(
    set: &PeriodicSet,
    h: usize,
    k: usize,
) -> Result<WeightedRowDistribution, InvariantError> {
    if h == 0 {
        return Err(InvariantError::InvalidOrder(0));
    }
    let mut rows = vec![Vec::with_capacity(h * k); set.motif_len()];
    for order in 1..=h {
        for (row, part) in rows.iter_mut().zip(pda_h(set, order, k)?.rows()) {
            row.extend(part.values.iter().copied());
        }
    }
    WeightedRowDistribution::from_equal_rows(rows)
}

// ---------------------------------------------------------------------------
// Order-h row computation: bounded-heap enumeration over a candidate pool
// gathered by the two-stage radius procedure.
// ---------------------------------------------------------------------------

fn order_h_row(
    set: &PeriodicSet,
    index: usize,
    h: usize,
    k: usize,
) -> Result<Vec<f64>, InvariantError> {
    let center = &set.motif_cartesian()[index];

    if set.is_finite() {
        let mut pool: Vec<Vec<f64>> = set
            .motif_cartesian()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != index)
            .map(|(_, p)| p.clone())
            .collect();
        if pool.is_empty() {
            return Err(InvariantError::NoNeighbors);
        }
        pool.sort_by(|a, b| linalg::dist(a, center).total_cmp(&linalg::dist(b, center)));
        let mut sums = k_smallest_averages(center, &pool, h, k);
        if sums.is_empty() {
            return Err(InvariantError::NoNeighbors);
        }
        // Non-existing tuples take the largest existing value.
        while sums.len() < k {
            sums.push(*sums.last().unwrap());
        }
        return Ok(sums);
    }

    let candidates = (b_coefficient(h, k) - 1.0).ceil().max(1.0) as usize;
    let nearest = set.neighbor_points(index, candidates);
    let radius = nearest.last().expect("periodic set has neighbors").distance;

    let pool = pool_in_ball(set, index, center, radius);
    let sums = k_smallest_averages(center, &pool, h, k);
    // The slack only covers rounding on exact-boundary ties; a spurious
    // failure merely triggers the (always correct) expansion below.
    let verified = sums.len() >= k
        && *sums.last().unwrap()
            <= 2.0 * radius / (h as f64 + 1.0) + 1e-12 * (1.0 + radius);
    if verified {
        return Ok(sums);
    }

    // One guaranteed fallback: any tuple reaching beyond h*radius averages
    // strictly above the k candidates already found inside radius.
    let wide = pool_in_ball(set, index, center, h as f64 * radius);
    let sums = k_smallest_averages(center, &wide, h, k);
    assert!(
        sums.len() >= k
            && *sums.last().unwrap()
                <= 2.0 * (h as f64) * radius / (h as f64 + 1.0) + 1e-9,
        "expanded radius must suffice"
    );
    Ok(sums)
}

fn pool_in_ball(
    set: &PeriodicSet,
    index: usize,
    center: &[f64],
    radius: f64,
) -> Vec<Vec<f64>> {
    let ball = Ball::new(center.to_vec(), radius).expect("non-negative radius");
    let mut pts: Vec<_> = set
        .points_in_ball(&ball)
        .into_iter()
        .filter(|bp| !(bp.motif_index == index && bp.shift.iter().all(|&c| c == 0)))
        .collect();
    pts.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.motif_index.cmp(&b.motif_index))
            .then(a.shift.cmp(&b.shift))
    });
    pts.into_iter().map(|bp| bp.point).collect()
}

/// A candidate tuple: its total pairwise sum and the largest distance from
/// the center among its points (kept for the distance-bound assertion).
#[derive(PartialEq)]
struct HeapEntry {
    sum: f64,
    r_max: f64,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sum
            .total_cmp(&other.sum)
            .then(self.r_max.total_cmp(&other.r_max))
    }
}

/// The k smallest order-h averages over tuples from `pool`, ascending.
/// Returns fewer when the pool admits fewer than k tuples.
fn k_smallest_averages(center: &[f64], pool: &[Vec<f64>], h: usize, k: usize) -> Vec<f64> {
    let n = pool.len();
    if n < h {
        return Vec::new();
    }
    let cdist: Vec<f64> = pool.iter().map(|p| linalg::dist(p, center)).collect();
    // Pool arrives sorted by distance; the pruning bound relies on it.
    debug_assert!(cdist.windows(2).all(|w| w[0] <= w[1] + 1e-12));

    let pair_matrix = if h >= 3 && n <= 1024 {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = linalg::dist(&pool[i], &pool[j]);
                m[i * n + j] = d;
                m[j * n + i] = d;
            }
        }
        Some(m)
    } else {
        None
    };
    let pair = |i: usize, j: usize| -> f64 {
        match &pair_matrix {
            Some(m) => m[i * n + j],
            None => linalg::dist(&pool[i], &pool[j]),
        }
    };

    let scale = 2.0 / (h as f64 * (h as f64 + 1.0));
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
    let mut chosen: Vec<usize> = Vec::with_capacity(h);

    // Depth-first over index combinations i_1 < ... < i_h with partial sums.
    // `partial` holds the pairwise-distance sum over {center} U chosen.
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        pool_len: usize,
        h: usize,
        k: usize,
        cdist: &[f64],
        pair: &dyn Fn(usize, usize) -> f64,
        chosen: &mut Vec<usize>,
        partial: f64,
        heap: &mut BinaryHeap<HeapEntry>,
    ) {
        let depth = chosen.len();
        let remaining = h - depth;
        let start = chosen.last().map_or(0, |&i| i + 1);
        for j in start..=pool_len - remaining {
            // Lower bound on any completion through j: pairwise terms among
            // future points are non-negative and center distances ascend.
            if heap.len() == k {
                let mut bound = partial + cdist[j];
                for r in 1..remaining {
                    bound += cdist[j + r];
                }
                if bound >= heap.peek().unwrap().sum {
                    break;
                }
            }
            let mut add = cdist[j];
            for &c in chosen.iter() {
                add += pair(c, j);
            }
            let sum = partial + add;
            if remaining == 1 {
                // The farthest point of a tuple squeezes its average into
                // [2R/(h+1), 2hR/(h+1)]; checked on emission.
                let r_max = cdist[j].max(chosen.iter().fold(0.0, |m, &c| m.max(cdist[c])));
                debug_assert!({
                    let avg = sum * 2.0 / (h as f64 * (h as f64 + 1.0));
                    avg >= 2.0 * r_max / (h as f64 + 1.0) - 1e-9
                        && avg <= 2.0 * (h as f64) * r_max / (h as f64 + 1.0) + 1e-9
                });
                if heap.len() < k {
                    heap.push(HeapEntry { sum, r_max });
                } else if sum < heap.peek().unwrap().sum {
                    heap.pop();
                    heap.push(HeapEntry { sum, r_max });
                }
            } else {
                chosen.push(j);
                recurse(pool_len, h, k, cdist, pair, chosen, sum, heap);
                chosen.pop();
            }
        }
    }

    recurse(n, h, k, &cdist, &pair, &mut chosen, 0.0, &mut heap);

    let mut sums: Vec<f64> = heap.into_iter().map(|e| e.sum * scale).collect();
    sums.sort_by(f64::total_cmp);
    sums
}
