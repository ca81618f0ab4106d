//! Pointwise shift distributions for 1-dimensional sets.
//!
//! Rows list distances from each motif point to its k nearest neighbors to
//! the right. For periodic sequences PSD(S; m) is complete under rigid
//! motion and any row reconstructs the sequence up to translation.

use crate::geometry::PeriodicSet;
use crate::invariants::{InvariantError, WeightedRowDistribution};
use crate::metrics::{self, GroundMetric};

/// The pointwise shift distribution PSD(S; k).
///
/// Periodic sequences use the closed form over the sorted motif. Finite
/// sets need m >= k+1 points and emit one row per point that still has k
/// neighbors to its right.
pub fn psd(set: &PeriodicSet, k: usize) -> Result<WeightedRowDistribution, InvariantError> {
    if set.dim() != 1 {
        return Err(InvariantError::NotOneDimensional(set.dim()));
    }
    if k == 0 {
        return Err(InvariantError::InvalidNeighborCount(0));
    }
    let mut xs: Vec<f64> = set.motif_cartesian().iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    let m = xs.len();

    if set.is_finite() {
        if m < k + 1 {
            return Err(InvariantError::TooFewPoints { have: m, need: k + 1 });
        }
        let rows: Vec<Vec<f64>> = (0..m - k)
            .map(|i| (1..=k).map(|j| xs[i + j] - xs[i]).collect())
            .collect();
        return WeightedRowDistribution::from_equal_rows(rows);
    }

    let period = set.basis()[0][0].abs();
    // Distance from p_i to its k-th right neighbor: p_{i+k-mN} - p_i + L N.
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (1..=k)
                .map(|j| {
                    let big_n = j / m;
                    let idx = i + j - m * big_n;
                    let x = if idx < m {
                        xs[idx]
                    } else {
                        xs[idx - m] + period
                    };
                    x - xs[i] + period * big_n as f64
                })
                .collect()
        })
        .collect();
    WeightedRowDistribution::from_equal_rows(rows)
}

/// Rebuilds a periodic sequence from a PSD(S; m) matrix, using its first
/// row: motif points a_{j+1} - a_1 with period a_m. The result is verified
/// by recomputing its PSD against the input.
pub fn psd_reconstruct(dist: &WeightedRowDistribution) -> Result<PeriodicSet, InvariantError> {
    let row = &dist.rows()[0].values;
    let m = row.len();
    if row[0] <= 0.0 {
        return Err(InvariantError::UnrealizablePsd(
            "first shift must be positive".into(),
        ));
    }
    if row.windows(2).any(|w| w[1] <= w[0]) {
        return Err(InvariantError::UnrealizablePsd(
            "row must be strictly increasing".into(),
        ));
    }
    let period = row[m - 1];
    let mut motif = vec![vec![0.0]];
    for j in 1..m {
        motif.push(vec![(row[j] - row[0]) / period]);
    }
    let set = PeriodicSet::new(1, 1, vec![vec![period]], motif, None, None)
        .map_err(|e| InvariantError::UnrealizablePsd(e.to_string()))?;

    let check = psd(&set, m)?;
    let d = metrics::emd(&check, dist, GroundMetric::Linf)
        .map_err(|e| InvariantError::UnrealizablePsd(e.to_string()))?
        .0;
    if d > 1e-9 {
        return Err(InvariantError::UnrealizablePsd(format!(
            "round-trip distance {d}"
        )));
    }
    Ok(set)
}

/// The PSD row of the mirror image: (L - a_{m-1}, ..., L - a_1, L) for a
/// full m-column row ending at the period L.
pub fn psd_mirror(row: &[f64], period: f64) -> Result<Vec<f64>, InvariantError> {
    let m = row.len();
    if m == 0 {
        return Err(InvariantError::MalformedRow("empty row".into()));
    }
    if row.windows(2).any(|w| w[1] < w[0]) {
        return Err(InvariantError::MalformedRow("row must be sorted".into()));
    }
    if (row[m - 1] - period).abs() > 1e-9 {
        return Err(InvariantError::MalformedRow(format!(
            "last entry {} must equal the period {period}",
            row[m - 1]
        )));
    }
    let mut out = Vec::with_capacity(m);
    for j in (0..m - 1).rev() {
        out.push(period - row[j]);
    }
    out.push(period);
    Ok(out)
}
