//! Finite and l-periodic point sets with lattice translate enumeration.
//!
//! A set is stored as a motif of points over an l-dimensional lattice in
//! R^n (l = 0 means a plain finite set). Motif coordinates are fractional
//! along the lattice basis and absolute along an orthonormal complement of
//! the lattice span, so partially periodic sets (l < n) work uniformly.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::linalg;

/// Relative Gram-determinant threshold below which a basis is rejected.
const EPS_RANK: f64 = 1e-12;
/// Two motif points closer than twice this distance are duplicates.
const EPS_POINT: f64 = 1e-12;
/// Fractional coordinates within this tolerance of 1 wrap to 0.
const EPS_FRAC: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("basis is rank deficient (relative Gram determinant <= {EPS_RANK:e})")]
    RankDeficientBasis,
    #[error("motif points {0} and {1} coincide")]
    DuplicateMotifPoint(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation requires a full-rank periodic set (rank {rank} < dim {dim})")]
    NotFullRank { rank: usize, dim: usize },
    #[error("motif must contain at least one point")]
    EmptyMotif,
    #[error("ball radius must be non-negative, got {0}")]
    NegativeRadius(f64),
}

/// A closed ball used for lattice point enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self, GeometryError> {
        if radius.is_nan() || radius < 0.0 {
            return Err(GeometryError::NegativeRadius(radius));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// One enumerated point of the infinite set: its cartesian coordinates, the
/// motif point it translates, and the integer lattice shift.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    pub point: Vec<f64>,
    pub motif_index: usize,
    pub shift: Vec<i64>,
    pub distance: f64,
}

/// A finite (rank 0) or l-periodic point set in R^n.
///
/// Immutable after construction; all operations are pure, so values can be
/// shared freely across threads.
#[derive(Debug, Clone)]
pub struct PeriodicSet {
    dim: usize,
    rank: usize,
    basis: Vec<Vec<f64>>,
    /// Orthonormal rows spanning the complement of the lattice span.
    complement: Vec<Vec<f64>>,
    /// Dual rows: dual[i] . basis[j] = delta_ij, dual[i] in span(basis).
    dual: Vec<Vec<f64>>,
    /// Mixed coordinates: first `rank` entries fractional, rest absolute
    /// along `complement`.
    motif: Vec<Vec<f64>>,
    /// Cached cartesian coordinates of the motif.
    cart: Vec<Vec<f64>>,
    species: Option<Vec<String>>,
    id: Option<String>,
}

impl PeriodicSet {
    /// Builds a set from mixed motif coordinates (fractional along the
    /// basis, absolute in the remaining directions). Fractional parts are
    /// canonicalized into [0, 1).
    pub fn new(
        dim: usize,
        rank: usize,
        basis: Vec<Vec<f64>>,
        motif: Vec<Vec<f64>>,
        species: Option<Vec<String>>,
        id: Option<String>,
    ) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::DimensionMismatch("dim must be >= 1".into()));
        }
        if rank > dim {
            return Err(GeometryError::DimensionMismatch(format!(
                "rank {rank} exceeds dim {dim}"
            )));
        }
        if basis.len() != rank {
            return Err(GeometryError::DimensionMismatch(format!(
                "expected {rank} basis vectors, got {}",
                basis.len()
            )));
        }
        if let Some(v) = basis.iter().find(|v| v.len() != dim) {
            return Err(GeometryError::DimensionMismatch(format!(
                "basis vector of length {} in dimension {dim}",
                v.len()
            )));
        }
        if motif.is_empty() {
            return Err(GeometryError::EmptyMotif);
        }
        if let Some(p) = motif.iter().find(|p| p.len() != dim) {
            return Err(GeometryError::DimensionMismatch(format!(
                "motif point of length {} in dimension {dim}",
                p.len()
            )));
        }
        if let Some(sp) = &species {
            if sp.len() != motif.len() {
                return Err(GeometryError::DimensionMismatch(format!(
                    "{} species labels for {} motif points",
                    sp.len(),
                    motif.len()
                )));
            }
        }

        if rank > 0 {
            let gram: Vec<Vec<f64>> = basis
                .iter()
                .map(|u| basis.iter().map(|v| linalg::dot(u, v)).collect())
                .collect();
            let scale: f64 = basis.iter().map(|v| linalg::dot(v, v)).product();
            if scale == 0.0 || linalg::det(&gram) / scale <= EPS_RANK {
                return Err(GeometryError::RankDeficientBasis);
            }
        }

        let complement = orthonormal_complement(dim, &basis);
        let dual = dual_rows(&basis);

        let motif: Vec<Vec<f64>> = motif
            .iter()
            .map(|p| {
                let mut q = p.clone();
                for f in q.iter_mut().take(rank) {
                    *f -= f.floor();
                    if *f >= 1.0 - EPS_FRAC {
                        *f = 0.0;
                    }
                }
                q
            })
            .collect();

        let mut set = PeriodicSet {
            dim,
            rank,
            basis,
            complement,
            dual,
            motif,
            cart: Vec::new(),
            species,
            id,
        };
        set.cart = set.motif.iter().map(|p| set.cartesian_of(p)).collect();

        for i in 0..set.cart.len() {
            for j in i + 1..set.cart.len() {
                if set.min_image_distance(&set.cart[i], &set.cart[j]) <= 2.0 * EPS_POINT {
                    return Err(GeometryError::DuplicateMotifPoint(i, j));
                }
            }
        }
        Ok(set)
    }

    /// Builds a finite set (rank 0) from cartesian points.
    pub fn finite(
        dim: usize,
        points: Vec<Vec<f64>>,
        species: Option<Vec<String>>,
        id: Option<String>,
    ) -> Result<Self, GeometryError> {
        PeriodicSet::new(dim, 0, Vec::new(), points, species, id)
    }

    /// Builds a set from cartesian motif coordinates, converting them to the
    /// mixed fractional/absolute representation.
    pub fn from_cartesian(
        dim: usize,
        rank: usize,
        basis: Vec<Vec<f64>>,
        cart_motif: Vec<Vec<f64>>,
        species: Option<Vec<String>>,
        id: Option<String>,
    ) -> Result<Self, GeometryError> {
        // Construct once with a zero motif to get the frames, then convert.
        let probe = PeriodicSet::new(
            dim,
            rank,
            basis.clone(),
            vec![vec![0.0; dim]],
            None,
            None,
        )?;
        if let Some(p) = cart_motif.iter().find(|p| p.len() != dim) {
            return Err(GeometryError::DimensionMismatch(format!(
                "motif point of length {} in dimension {dim}",
                p.len()
            )));
        }
        let mixed = cart_motif.iter().map(|p| probe.mixed_of(p)).collect();
        PeriodicSet::new(dim, rank, basis, mixed, species, id)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_finite(&self) -> bool {
        self.rank == 0
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.dim
    }

    pub fn motif_len(&self) -> usize {
        self.motif.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Mixed motif coordinates (fractional along the basis, absolute in the
    /// complement directions).
    pub fn motif(&self) -> &[Vec<f64>] {
        &self.motif
    }

    /// Cartesian coordinates of the motif points.
    pub fn motif_cartesian(&self) -> &[Vec<f64>] {
        &self.cart
    }

    pub fn species(&self) -> Option<&[String]> {
        self.species.as_deref()
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    /// Cartesian point for mixed coordinates.
    pub fn cartesian_of(&self, mixed: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.basis.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(v) {
                *o += mixed[i] * x;
            }
        }
        for (i, w) in self.complement.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(w) {
                *o += mixed[self.rank + i] * x;
            }
        }
        out
    }

    /// Mixed coordinates for a cartesian point.
    pub fn mixed_of(&self, cart: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        for d in &self.dual {
            out.push(linalg::dot(d, cart));
        }
        for w in &self.complement {
            out.push(linalg::dot(w, cart));
        }
        out
    }

    /// The lattice translate for an integer shift vector.
    pub fn lattice_vector(&self, shift: &[i64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (c, v) in shift.iter().zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += *c as f64 * x;
            }
        }
        out
    }

    /// Longest diagonal of the unit cell: the maximum of |sum (+-v_i)| over
    /// sign choices. Zero for finite sets.
    pub fn cell_diagonal(&self) -> f64 {
        if self.rank == 0 {
            return 0.0;
        }
        let mut best: f64 = 0.0;
        for signs in 0..(1u32 << (self.rank - 1)) {
            // v_1 fixed positive: |sum s_i v_i| is even in global sign flips.
            let mut acc = self.basis[0].clone();
            for (i, v) in self.basis.iter().enumerate().skip(1) {
                let s = if signs >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += s * x;
                }
            }
            best = best.max(linalg::norm(&acc));
        }
        best
    }

    /// Volume of the unit cell spanned by the basis (l-dimensional measure).
    pub fn cell_volume(&self) -> f64 {
        if self.rank == 0 {
            return 0.0;
        }
        let gram: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|u| self.basis.iter().map(|v| linalg::dot(u, v)).collect())
            .collect();
        linalg::det(&gram).abs().sqrt()
    }

    /// Point packing coefficient (vol[U] / (m V_n))^(1/n). Requires full
    /// periodic rank; the ratio is undefined for slabs.
    pub fn ppc(&self) -> Result<f64, GeometryError> {
        if !self.is_full_rank() || self.rank == 0 {
            return Err(GeometryError::NotFullRank {
                rank: self.rank,
                dim: self.dim,
            });
        }
        let vol = self.cell_volume();
        let m = self.motif.len() as f64;
        Ok((vol / (m * unit_ball_volume(self.dim))).powf(1.0 / self.dim as f64))
    }

    /// Half the minimum distance between any two points of the infinite set.
    pub fn packing_radius(&self) -> f64 {
        let mut min_d = f64::INFINITY;
        for i in 0..self.motif.len() {
            let d = self.neighbor_distances(i, 1);
            if let Some(&first) = d.first() {
                min_d = min_d.min(first);
            }
        }
        min_d / 2.0
    }

    /// All points p + v (p motif, v lattice) inside the closed ball.
    pub fn points_in_ball(&self, ball: &Ball) -> Vec<BallPoint> {
        assert_eq!(ball.center.len(), self.dim, "ball center dimension");
        let mut out = Vec::new();
        if self.rank == 0 {
            for (idx, p) in self.cart.iter().enumerate() {
                let d = linalg::dist(p, &ball.center);
                if d <= ball.radius {
                    out.push(BallPoint {
                        point: p.clone(),
                        motif_index: idx,
                        shift: Vec::new(),
                        distance: d,
                    });
                }
            }
            return out;
        }

        let diag = self.cell_diagonal();
        let exts: Vec<f64> = self
            .dual
            .iter()
            .map(|d| (ball.radius + diag) * linalg::norm(d))
            .collect();
        for (idx, p) in self.cart.iter().enumerate() {
            let offset = linalg::sub(&ball.center, p);
            let centers: Vec<f64> = self.dual.iter().map(|d| linalg::dot(d, &offset)).collect();
            let lo: Vec<i64> = centers
                .iter()
                .zip(&exts)
                .map(|(c, e)| (c - e).floor() as i64)
                .collect();
            let hi: Vec<i64> = centers
                .iter()
                .zip(&exts)
                .map(|(c, e)| (c + e).ceil() as i64)
                .collect();
            let mut shift = lo.clone();
            'outer: loop {
                let v = self.lattice_vector(&shift);
                let cand: Vec<f64> = p.iter().zip(&v).map(|(a, b)| a + b).collect();
                let d = linalg::dist(&cand, &ball.center);
                if d <= ball.radius {
                    out.push(BallPoint {
                        point: cand,
                        motif_index: idx,
                        shift: shift.clone(),
                        distance: d,
                    });
                }
                // Odometer increment over the integer box.
                for ax in 0..self.rank {
                    if shift[ax] < hi[ax] {
                        shift[ax] += 1;
                        continue 'outer;
                    }
                    shift[ax] = lo[ax];
                }
                break;
            }
        }
        out
    }

    /// Sorted distances from motif point `index` to its `k` nearest
    /// neighbors in the infinite set (the point itself excluded). Finite
    /// sets may return fewer than `k` values.
    pub fn neighbor_distances(&self, index: usize, k: usize) -> Vec<f64> {
        self.neighbor_points(index, k)
            .into_iter()
            .map(|bp| bp.distance)
            .collect()
    }

    /// Like [`Self::neighbor_distances`] but returns the full points.
    pub fn neighbor_points(&self, index: usize, k: usize) -> Vec<BallPoint> {
        let center = &self.cart[index];
        if self.rank == 0 {
            let ball = Ball::new(center.clone(), f64::INFINITY).unwrap();
            let mut pts: Vec<BallPoint> = self
                .points_in_ball(&ball)
                .into_iter()
                .filter(|bp| bp.motif_index != index)
                .collect();
            pts.sort_by(|a, b| a.distance.total_cmp(&b.distance));
            pts.truncate(k);
            return pts;
        }

        let diag = self.cell_diagonal();
        let mut radius = match self.ppc() {
            Ok(ppc) => ppc * ((k + 1) as f64).powf(1.0 / self.dim as f64) + 1.5 * diag,
            Err(_) => diag + 1.0,
        };
        loop {
            let ball = Ball::new(center.clone(), radius).unwrap();
            let mut pts: Vec<BallPoint> = self
                .points_in_ball(&ball)
                .into_iter()
                .filter(|bp| {
                    !(bp.motif_index == index && bp.shift.iter().all(|&c| c == 0))
                })
                .collect();
            let strictly_inside = pts.iter().filter(|bp| bp.distance < radius).count();
            if strictly_inside >= k {
                pts.sort_by(|a, b| {
                    a.distance
                        .total_cmp(&b.distance)
                        .then(a.motif_index.cmp(&b.motif_index))
                        .then(a.shift.cmp(&b.shift))
                });
                pts.truncate(k);
                return pts;
            }
            radius *= 2.0;
        }
    }

    /// Minimum distance between two points over all lattice translates of
    /// the second.
    fn min_image_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.rank == 0 {
            return linalg::dist(a, b);
        }
        let diag = self.cell_diagonal();
        let direct = linalg::dist(a, b);
        let ball = Ball::new(a.to_vec(), direct + diag).unwrap();
        let offset = linalg::sub(a, b);
        let mut best = direct;
        let exts: Vec<f64> = self
            .dual
            .iter()
            .map(|d| (ball.radius + diag) * linalg::norm(d))
            .collect();
        let centers: Vec<f64> = self.dual.iter().map(|d| linalg::dot(d, &offset)).collect();
        let lo: Vec<i64> = centers
            .iter()
            .zip(&exts)
            .map(|(c, e)| (c - e).floor() as i64)
            .collect();
        let hi: Vec<i64> = centers
            .iter()
            .zip(&exts)
            .map(|(c, e)| (c + e).ceil() as i64)
            .collect();
        let mut shift = lo.clone();
        'outer: loop {
            let v = self.lattice_vector(&shift);
            let cand: Vec<f64> = b.iter().zip(&v).map(|(x, y)| x + y).collect();
            best = best.min(linalg::dist(a, &cand));
            for ax in 0..self.rank {
                if shift[ax] < hi[ax] {
                    shift[ax] += 1;
                    continue 'outer;
                }
                shift[ax] = lo[ax];
            }
            break;
        }
        best
    }

    /// Displaces every motif point by an independent uniform vector in the
    /// ball of radius `epsilon`. The basis is unchanged and the result is
    /// deterministic for a given seed.
    pub fn perturb(&self, epsilon: f64, seed: u64) -> Result<PeriodicSet, GeometryError> {
        assert!(epsilon >= 0.0, "perturbation radius must be non-negative");
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let moved: Vec<Vec<f64>> = self
            .cart
            .iter()
            .map(|p| {
                let delta = uniform_in_ball(&mut rng, self.dim, epsilon);
                p.iter().zip(&delta).map(|(x, d)| x + d).collect()
            })
            .collect();
        let mixed: Vec<Vec<f64>> = moved.iter().map(|p| self.mixed_of(p)).collect();
        PeriodicSet::new(
            self.dim,
            self.rank,
            self.basis.clone(),
            mixed,
            self.species.clone(),
            self.id.clone(),
        )
    }
}

/// Volume of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1).
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

fn uniform_in_ball(rng: &mut ChaCha12Rng, dim: usize, radius: f64) -> Vec<f64> {
    if radius == 0.0 {
        return vec![0.0; dim];
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if linalg::dot(&v, &v) <= 1.0 {
            return v.into_iter().map(|x| x * radius).collect();
        }
    }
}

/// Orthonormal rows spanning the orthogonal complement of the given rows,
/// built deterministically by Gram-Schmidt over the standard axes.
fn orthonormal_complement(dim: usize, basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::new();
    for v in basis {
        let mut u = v.clone();
        for f in &frame {
            let c = linalg::dot(&u, f);
            for (a, b) in u.iter_mut().zip(f) {
                *a -= c * b;
            }
        }
        let n = linalg::norm(&u);
        frame.push(u.into_iter().map(|x| x / n).collect());
    }
    let mut out = Vec::new();
    for axis in 0..dim {
        if frame.len() == dim {
            break;
        }
        let mut u = vec![0.0; dim];
        u[axis] = 1.0;
        for f in &frame {
            let c = linalg::dot(&u, f);
            for (a, b) in u.iter_mut().zip(f) {
                *a -= c * b;
            }
        }
        let n = linalg::norm(&u);
        if n > 1e-8 {
            let unit: Vec<f64> = u.into_iter().map(|x| x / n).collect();
            frame.push(unit.clone());
            out.push(unit);
        }
    }
    out
}

/// Dual rows d_i with d_i . v_j = delta_ij, each lying in span(basis).
fn dual_rows(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let l = basis.len();
    if l == 0 {
        return Vec::new();
    }
    let gram: Vec<Vec<f64>> = basis
        .iter()
        .map(|u| basis.iter().map(|v| linalg::dot(u, v)).collect())
        .collect();
    (0..l)
        .map(|i| {
            let mut e = vec![0.0; l];
            e[i] = 1.0;
            let coeff = linalg::solve(&gram, &e).expect("basis checked non-degenerate");
            let mut row = vec![0.0; basis[0].len()];
            for (c, v) in coeff.iter().zip(basis) {
                for (r, x) in row.iter_mut().zip(v) {
                    *r += c * x;
                }
            }
            row
        })
        .collect()
}
