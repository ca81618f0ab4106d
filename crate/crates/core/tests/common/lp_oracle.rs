//! Brute-force LP oracle: a two-phase dense tableau simplex with Bland's
//! rule, independent of the library's network-simplex path. Only fit for
//! the small instances used in tests.

#![allow(clippy::needless_range_loop)]

/// Minimizes c.x subject to A x = b, x >= 0. Returns the optimum value and
/// a solution vector, or None if infeasible.
pub fn simplex_lp(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    assert!(a.iter().all(|row| row.len() == n));
    assert_eq!(b.len(), m);

    // Canonical tableau with artificial variables m columns wide:
    // columns [0..n) structural, [n..n+m) artificial, last column rhs.
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials.
    for j in 0..width {
        t[m][j] = 0.0;
    }
    for i in 0..m {
        for j in 0..width {
            t[m][j] -= t[i][j];
        }
    }
    for i in 0..m {
        t[m][n + i] = 0.0;
    }
    run_simplex(&mut t, &mut basis, n + m)?;
    if t[m][width - 1].abs() > 1e-7 {
        return None; // infeasible
    }

    // Phase 2: original objective, artificials barred from entering.
    for j in 0..width {
        t[m][j] = 0.0;
    }
    t[m][..n].copy_from_slice(c);
    for i in 0..m {
        if t[m][basis[i]] != 0.0 {
            let coeff = t[m][basis[i]];
            for j in 0..width {
                t[m][j] -= coeff * t[i][j];
            }
        }
    }
    run_simplex(&mut t, &mut basis, n)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][width - 1];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Some((value, x))
}

/// Bland's rule pivoting until no reduced cost below -1e-9. `cols` limits
/// which columns may enter.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], cols: usize) -> Option<()> {
    let m = t.len() - 1;
    let width = t[0].len();
    for _ in 0..100_000 {
        let mut entering = None;
        for j in 0..cols {
            if t[m][j] < -1e-9 {
                entering = Some(j);
                break;
            }
        }
        let Some(e) = entering else { return Some(()) };
        let mut leaving = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][e] > 1e-11 {
                let ratio = t[i][width - 1] / t[i][e];
                let better = match leaving {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-12
                            || (ratio < best + 1e-12 && basis[i] < basis[l as usize])
                    }
                };
                if better {
                    best = ratio;
                    leaving = Some(i as u32);
                }
            }
        }
        let l = leaving? as usize; // None means unbounded
        let pivot = t[l][e];
        for j in 0..width {
            t[l][j] /= pivot;
        }
        for i in 0..=m {
            if i != l && t[i][e].abs() > 0.0 {
                let f = t[i][e];
                for j in 0..width {
                    t[i][j] -= f * t[l][j];
                }
            }
        }
        basis[l] = e;
    }
    None
}

/// Exact minimum transportation cost via the tableau simplex: row sums
/// equal supplies, column sums equal demands (last redundant row dropped).
pub fn transport_oracle(supply: &[f64], demand: &[f64], cost: &[f64]) -> f64 {
    let m = supply.len();
    let n = demand.len();
    assert_eq!(cost.len(), m * n);
    let rows = m + n - 1;
    let vars = m * n;
    let mut a = vec![vec![0.0; vars]; rows];
    let mut b = vec![0.0; rows];
    for i in 0..m {
        for j in 0..n {
            a[i][i * n + j] = 1.0;
        }
        b[i] = supply[i];
    }
    for j in 0..n - 1 {
        for i in 0..m {
            a[m + j][i * n + j] = 1.0;
        }
        b[m + j] = demand[j];
    }
    let (value, _) = simplex_lp(&a, &b, cost).expect("balanced instances are feasible");
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_lp() {
        // min -x - y s.t. x + y = 1 -> value -1.
        let (v, _) = simplex_lp(&[vec![1.0, 1.0]], &[1.0], &[-1.0, -1.0]).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn transport_matches_hand_value() {
        let v = transport_oracle(&[1.0], &[0.5, 0.5], &[0.0, 2.0]);
        assert!((v - 1.0).abs() < 1e-9);
    }
}
