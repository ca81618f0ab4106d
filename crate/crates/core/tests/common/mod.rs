//! Shared fixtures and oracles for integration tests.

#![allow(dead_code)]

use perinv_core::geometry::PeriodicSet;
use rand::RngExt;
use rand_chacha::ChaCha12Rng;

pub mod lp_oracle;

pub fn integer_lattice(dim: usize) -> PeriodicSet {
    let basis: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v
        })
        .collect();
    PeriodicSet::new(dim, dim, basis, vec![vec![0.0; dim]], None, None).unwrap()
}

/// The 4-point sequence {0, r, 2+r, 4} + 8Z.
pub fn sequence_s(r: f64) -> PeriodicSet {
    PeriodicSet::new(
        1,
        1,
        vec![vec![8.0]],
        vec![
            vec![0.0],
            vec![r / 8.0],
            vec![(2.0 + r) / 8.0],
            vec![4.0 / 8.0],
        ],
        None,
        None,
    )
    .unwrap()
}

/// The 6-point 1-periodic pair in R^2 (x-period 4) sharing a PDD; `flip_c`
/// selects the second member.
pub fn six_point_set(a: f64, b: f64, c: f64, flip_c: bool) -> PeriodicSet {
    let sign = if flip_c { -1.0 } else { 1.0 };
    PeriodicSet::from_cartesian(
        2,
        1,
        vec![vec![4.0, 0.0]],
        vec![
            vec![0.0, a],
            vec![2.0, -a],
            vec![b, 0.0],
            vec![2.0 + b, 0.0],
            vec![1.0, sign * c],
            vec![3.0, -sign * c],
        ],
        None,
        None,
    )
    .unwrap()
}

/// The six 2D reference lattices with their packing coefficients and
/// cell diagonals.
pub fn reference_lattices() -> Vec<(&'static str, PeriodicSet, f64)> {
    let lattice = |v1: [f64; 2], v2: [f64; 2]| {
        PeriodicSet::new(
            2,
            2,
            vec![v1.to_vec(), v2.to_vec()],
            vec![vec![0.0, 0.0]],
            None,
            None,
        )
        .unwrap()
    };
    let pi = std::f64::consts::PI;
    vec![
        ("generic", lattice([1.25, 0.25], [0.25, 0.75]), (7.0 / (8.0 * pi)).sqrt()),
        ("hexagonal", lattice([1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]), (3f64.sqrt() / (2.0 * pi)).sqrt()),
        ("rhombic", lattice([1.0, 0.5], [1.0, -0.5]), (1.0 / pi).sqrt()),
        ("rhombic-tall", lattice([1.0, 1.5], [1.0, -1.5]), (3.0 / pi).sqrt()),
        ("square", lattice([1.0, 0.0], [0.0, 1.0]), (1.0 / pi).sqrt()),
        ("rectangular", lattice([2.0, 0.0], [0.0, 1.0]), (2.0 / pi).sqrt()),
    ]
}

/// A random full-rank periodic set with a near-orthogonal cell and a motif
/// kept apart by `min_separation`.
pub fn random_full_rank_set(
    rng: &mut ChaCha12Rng,
    dim: usize,
    max_motif: usize,
    min_separation: f64,
) -> PeriodicSet {
    loop {
        let mut basis = vec![vec![0.0; dim]; dim];
        for (i, row) in basis.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = if i == j {
                    rng.random_range(2.0..3.2)
                } else {
                    rng.random_range(-0.3..0.3)
                };
            }
        }
        let m = rng.random_range(1..=max_motif);
        let motif: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let Ok(set) = PeriodicSet::new(dim, dim, basis, motif, None, None) else {
            continue;
        };
        if set.packing_radius() >= min_separation / 2.0 {
            return set;
        }
    }
}

/// A random 1D periodic sequence with m <= max_motif points.
pub fn random_sequence(rng: &mut ChaCha12Rng, max_motif: usize) -> PeriodicSet {
    loop {
        let period = rng.random_range(2.0..10.0);
        let m = rng.random_range(1..=max_motif);
        let mut fracs: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        fracs.sort_by(f64::total_cmp);
        let motif: Vec<Vec<f64>> = fracs.iter().map(|&f| vec![f]).collect();
        let Ok(set) = PeriodicSet::new(1, 1, vec![vec![period]], motif, None, None) else {
            continue;
        };
        if set.packing_radius() > 0.01 {
            return set;
        }
    }
}

/// Applies a rigid motion: rotation matrix on basis and motif plus a shift.
pub fn apply_isometry(set: &PeriodicSet, rotation: &[Vec<f64>], shift: &[f64]) -> PeriodicSet {
    let rotate = |v: &[f64]| -> Vec<f64> {
        rotation
            .iter()
            .map(|row| row.iter().zip(v).map(|(r, x)| r * x).sum())
            .collect()
    };
    let basis: Vec<Vec<f64>> = set.basis().iter().map(|v| rotate(v)).collect();
    let motif: Vec<Vec<f64>> = set
        .motif_cartesian()
        .iter()
        .map(|p| {
            rotate(p)
                .iter()
                .zip(shift)
                .map(|(a, b)| a + b)
                .collect()
        })
        .collect();
    PeriodicSet::from_cartesian(set.dim(), set.rank(), basis, motif, None, None).unwrap()
}

pub fn rotation_2d(theta: f64) -> Vec<Vec<f64>> {
    vec![
        vec![theta.cos(), -theta.sin()],
        vec![theta.sin(), theta.cos()],
    ]
}

pub fn rotation_3d(alpha: f64, beta: f64, gamma: f64) -> Vec<Vec<f64>> {
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let (cb, sb) = (beta.cos(), beta.sin());
    let (cg, sg) = (gamma.cos(), gamma.sin());
    // Rz(alpha) * Ry(beta) * Rx(gamma).
    vec![
        vec![ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg],
        vec![sa * cb, sa * sb * sg + ca * cg, sa * sb * cg - ca * sg],
        vec![-sb, cb * sg, cb * cg],
    ]
}

/// Rows sorted lexicographically for order-free comparison.
pub fn sorted_rows(dist: &perinv_core::WeightedRowDistribution) -> Vec<(f64, Vec<f64>)> {
    let mut rows: Vec<(f64, Vec<f64>)> = dist
        .rows()
        .iter()
        .map(|r| (r.weight, r.values.clone()))
        .collect();
    rows.sort_by(|a, b| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

pub fn assert_rows_close(
    a: &perinv_core::WeightedRowDistribution,
    b: &perinv_core::WeightedRowDistribution,
    tol: f64,
) {
    let ra = sorted_rows(a);
    let rb = sorted_rows(b);
    assert_eq!(ra.len(), rb.len(), "row counts differ");
    for ((wa, va), (wb, vb)) in ra.iter().zip(&rb) {
        assert!((wa - wb).abs() < tol, "weights {wa} vs {wb}");
        for (x, y) in va.iter().zip(vb) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }
}
