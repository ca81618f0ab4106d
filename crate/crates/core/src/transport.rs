//! Exact solver for the balanced transportation problem.
//!
//! Transportation simplex over the dense bipartite graph: a spanning-tree
//! basis, Bland's entering rule (first negative reduced cost in row-major
//! order) with first-match leaving ties, and a final complementary
//! slackness certification. All arithmetic stays in floating point.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("supplies sum to {supply}, demands to {demand}")]
    Unbalanced { supply: f64, demand: f64 },
    #[error("simplex exceeded {0} pivots without converging")]
    Stalled(usize),
    #[error("optimality certification failed: residual {0}")]
    Certification(f64),
}

#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub cost: f64,
    /// Row-major m x n flow matrix.
    pub flows: Vec<f64>,
    /// Largest complementary-slackness residual observed at optimality.
    pub residual: f64,
}

/// Minimizes sum f_ij c_ij subject to row sums = supply, column sums =
/// demand, f >= 0. Supplies and demands must balance within 1e-9.
pub fn solve(
    supply: &[f64],
    demand: &[f64],
    cost: &[f64],
) -> Result<TransportSolution, TransportError> {
    let m = supply.len();
    let n = demand.len();
    assert_eq!(cost.len(), m * n, "cost matrix shape");
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 {
        return Err(TransportError::Unbalanced {
            supply: total_s,
            demand: total_d,
        });
    }

    if m == 1 {
        let flows = demand.to_vec();
        let cost_val = flows.iter().zip(cost).map(|(f, c)| f * c).sum();
        return Ok(TransportSolution {
            cost: cost_val,
            flows,
            residual: 0.0,
        });
    }
    if n == 1 {
        let flows = supply.to_vec();
        let cost_val = flows.iter().zip(cost).map(|(f, c)| f * c).sum();
        return Ok(TransportSolution {
            cost: cost_val,
            flows,
            residual: 0.0,
        });
    }

    let cmax = cost.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    let enter_tol = 1e-11 * (1.0 + cmax);
    let cert_tol = 1e-10 * (1.0 + cmax);

    let mut flows = vec![0.0; m * n];
    let mut basic = vec![false; m * n];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);

    // Northwest-corner initial basis: exactly m + n - 1 cells.
    {
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let f = s[i].min(d[j]).max(0.0);
            flows[i * n + j] = f;
            basic[i * n + j] = true;
            basis.push((i, j));
            s[i] -= f;
            d[j] -= f;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if s[i] <= d[j] && i < m - 1 {
                i += 1;
            } else if j < n - 1 {
                j += 1;
            } else {
                i += 1;
            }
        }
        debug_assert_eq!(basis.len(), m + n - 1);
    }

    let max_pivots = 1000 + 200 * (m + n) * (m + n);
    let mut duals_u = vec![0.0; m];
    let mut duals_v = vec![0.0; n];

    for _pivot in 0..max_pivots {
        compute_duals(m, n, &basis, cost, &mut duals_u, &mut duals_v);

        // Bland: first nonbasic cell with a negative reduced cost.
        let mut entering = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if basic[i * n + j] {
                    continue;
                }
                let r = cost[i * n + j] - duals_u[i] - duals_v[j];
                if r < -enter_tol {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let residual = certify(m, n, &flows, &basic, cost, &duals_u, &duals_v);
            if residual > cert_tol {
                return Err(TransportError::Certification(residual));
            }
            let cost_val = flows.iter().zip(cost).map(|(f, c)| f * c).sum();
            return Ok(TransportSolution {
                cost: cost_val,
                flows,
                residual,
            });
        };

        // Unique tree path from row node ei to column node ej.
        let path = tree_path(m, n, &basis, ei, m + ej);

        // Entering flow rises; path edges alternate starting with a drop.
        // Leaving: smallest cell index among the minimum-flow drop edges.
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for (s, &(i, j)) in path.iter().enumerate() {
            if s % 2 == 0 {
                let f = flows[i * n + j];
                if f < theta
                    || (f == theta && leaving != usize::MAX && (i, j) < path[leaving])
                {
                    theta = f;
                    leaving = s;
                }
            }
        }
        debug_assert!(leaving != usize::MAX);

        flows[ei * n + ej] += theta;
        for (s, &(i, j)) in path.iter().enumerate() {
            if s % 2 == 0 {
                flows[i * n + j] -= theta;
            } else {
                flows[i * n + j] += theta;
            }
        }
        let out_cell = path[leaving];
        flows[out_cell.0 * n + out_cell.1] = 0.0;
        basic[out_cell.0 * n + out_cell.1] = false;
        basic[ei * n + ej] = true;
        let pos = basis.iter().position(|&c| c == out_cell).unwrap();
        basis[pos] = (ei, ej);
    }
    Err(TransportError::Stalled(max_pivots))
}

/// Solves u_i + v_j = c_ij over the spanning tree with u_0 = 0.
fn compute_duals(
    m: usize,
    n: usize,
    basis: &[(usize, usize)],
    cost: &[f64],
    u: &mut [f64],
    v: &mut [f64],
) {
    let nodes = m + n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (idx, &(i, j)) in basis.iter().enumerate() {
        adj[i].push(idx);
        adj[m + j].push(idx);
    }
    let mut known = vec![false; nodes];
    let mut stack = vec![0usize];
    u[0] = 0.0;
    known[0] = true;
    while let Some(node) = stack.pop() {
        for &idx in &adj[node] {
            let (i, j) = basis[idx];
            let (a, b) = (i, m + j);
            let next = if node == a { b } else { a };
            if known[next] {
                continue;
            }
            if next >= m {
                v[next - m] = cost[i * n + j] - u[i];
            } else {
                u[next] = cost[i * n + j] - v[j];
            }
            known[next] = true;
            stack.push(next);
        }
    }
}

/// The edge list of the unique tree path between two nodes, in order.
fn tree_path(
    m: usize,
    _n: usize,
    basis: &[(usize, usize)],
    from: usize,
    to: usize,
) -> Vec<(usize, usize)> {
    let nodes = m + _n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (idx, &(i, j)) in basis.iter().enumerate() {
        adj[i].push(idx);
        adj[m + j].push(idx);
    }
    let mut parent_edge: Vec<Option<usize>> = vec![None; nodes];
    let mut parent_node: Vec<usize> = vec![usize::MAX; nodes];
    let mut seen = vec![false; nodes];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(node) = stack.pop() {
        if node == to {
            break;
        }
        for &idx in &adj[node] {
            let (i, j) = basis[idx];
            let (a, b) = (i, m + j);
            let next = if node == a { b } else { a };
            if seen[next] {
                continue;
            }
            seen[next] = true;
            parent_edge[next] = Some(idx);
            parent_node[next] = node;
            stack.push(next);
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        let idx = parent_edge[node].expect("tree is connected");
        path.push(basis[idx]);
        node = parent_node[node];
    }
    path.reverse();
    path
}

fn certify(
    m: usize,
    n: usize,
    flows: &[f64],
    basic: &[bool],
    cost: &[f64],
    u: &[f64],
    v: &[f64],
) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let r = cost[i * n + j] - u[i] - v[j];
            if !basic[i * n + j] {
                worst = worst.max(-r);
            }
            if flows[i * n + j] > 1e-12 {
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}
