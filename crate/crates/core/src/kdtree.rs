//! A k-d tree over fixed-length vectors with exact L-infinity range queries.
//!
//! Used by the dedup pipeline for candidate generation; queries return every
//! stored vector within the box, never a subset.

#[derive(Debug)]
struct Node {
    point: usize,
    axis: usize,
    left: Option<Box<Node>>,
    right: Option<Box<Node>>,
}

#[derive(Debug)]
pub struct KdTree {
    points: Vec<Vec<f64>>,
    root: Option<Box<Node>>,
    dim: usize,
}

impl KdTree {
    /// Builds a tree over the given equal-length vectors.
    pub fn build(points: Vec<Vec<f64>>) -> Self {
        let dim = points.first().map_or(0, Vec::len);
        assert!(points.iter().all(|p| p.len() == dim), "ragged points");
        let mut idx: Vec<usize> = (0..points.len()).collect();
        let root = Self::build_node(&points, &mut idx, 0, dim);
        KdTree { points, root, dim }
    }

    fn build_node(
        points: &[Vec<f64>],
        idx: &mut [usize],
        depth: usize,
        dim: usize,
    ) -> Option<Box<Node>> {
        if idx.is_empty() {
            return None;
        }
        let axis = depth % dim.max(1);
        idx.sort_by(|&a, &b| {
            points[a][axis]
                .total_cmp(&points[b][axis])
                .then(a.cmp(&b))
        });
        let mid = idx.len() / 2;
        let point = idx[mid];
        let (left, rest) = idx.split_at_mut(mid);
        let right = &mut rest[1..];
        Some(Box::new(Node {
            point,
            axis,
            left: Self::build_node(points, left, depth + 1, dim),
            right: Self::build_node(points, right, depth + 1, dim),
        }))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    /// Indices of all points within L-infinity distance `radius` of `query`,
    /// in ascending index order.
    pub fn range_query(&self, query: &[f64], radius: f64) -> Vec<usize> {
        assert_eq!(query.len(), self.dim, "query dimension");
        let mut out = Vec::new();
        self.visit(&self.root, query, radius, &mut out);
        out.sort_unstable();
        out
    }

    fn visit(
        &self,
        node: &Option<Box<Node>>,
        query: &[f64],
        radius: f64,
        out: &mut Vec<usize>,
    ) {
        let Some(node) = node else { return };
        let p = &self.points[node.point];
        let within = p
            .iter()
            .zip(query)
            .all(|(a, b)| (a - b).abs() <= radius);
        if within {
            out.push(node.point);
        }
        let split = p[node.axis];
        if query[node.axis] - radius <= split {
            self.visit(&node.left, query, radius, out);
        }
        if query[node.axis] + radius >= split {
            self.visit(&node.right, query, radius, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linf(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn matches_exhaustive_scan() {
        // Deterministic pseudo-random points via a small LCG.
        let mut state: u64 = 42;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let points: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..5).map(|_| next() * 10.0).collect())
            .collect();
        let tree = KdTree::build(points.clone());
        for qi in [0usize, 17, 63, 131] {
            let q = &points[qi];
            for radius in [0.0, 0.5, 1.5, 4.0] {
                let got = tree.range_query(q, radius);
                let want: Vec<usize> = (0..points.len())
                    .filter(|&i| linf(&points[i], q) <= radius)
                    .collect();
                assert_eq!(got, want, "radius {radius}");
            }
        }
    }

    #[test]
    fn duplicate_points_found_at_zero_radius() {
        let tree = KdTree::build(vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 1.0]]);
        assert_eq!(tree.range_query(&[1.0, 2.0], 0.0), vec![0, 1]);
    }
}
