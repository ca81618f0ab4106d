//! Shared fixtures for unit tests.

use crate::geometry::PeriodicSet;

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

pub fn hexagonal_lattice() -> PeriodicSet {
    PeriodicSet::new(
        2,
        2,
        vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]],
        vec![vec![0.0, 0.0]],
        None,
        None,
    )
    .unwrap()
}

/// The 4-point sequence {0, r, 2+r, 4} + 8Z as a 1D periodic set.
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

/// Homometric counterpart {0, r, 2, 4+r} + 8Z with a different PDD.
pub fn sequence_q(r: f64) -> PeriodicSet {
    PeriodicSet::new(
        1,
        1,
        vec![vec![8.0]],
        vec![
            vec![0.0],
            vec![r / 8.0],
            vec![2.0 / 8.0],
            vec![(4.0 + r) / 8.0],
        ],
        None,
        None,
    )
    .unwrap()
}

/// The 6-point 1-periodic sets in R^2 with x-period 4 that share a PDD for
/// all k but differ at order 2 for generic parameters. `flip_c` selects the
/// second member of the pair (its third point class reflected in y).
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
