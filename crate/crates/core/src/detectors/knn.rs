//! Exact k-nearest-neighbour search over fixed-length vectors.
//!
//! Vectors are kept sorted by their projection onto a fixed unit vector.
//! Since `|u·a - u·b| <= ||a - b||` for unit `u`, the search walks outward
//! from the query's projection and stops once the projection gap alone
//! exceeds the current k-th distance. Each candidate distance is an
//! early-abandoned sum of squares in coordinate order; a completed sum is
//! bit-identical to the plain brute-force sum, and neighbours are ranked by
//! `(distance, insertion id)`, so the result equals exhaustive search.

#[derive(Debug, Clone)]
pub struct ProjectedStore {
    dim: usize,
    direction: Vec<f64>,
    // Sorted by key.
    keys: Vec<f64>,
    ids: Vec<usize>,
    data: Vec<f64>,
}

/// A neighbour: squared distance and insertion id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub dist_sq: f64,
    pub id: usize,
}

fn ranks_before(a: &Neighbor, b: &Neighbor) -> bool {
    a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.id < b.id)
}

// Projection gaps are compared against distances with a small slack so
// floating-point rounding in either quantity can never prune a true
// neighbour.
fn gap_exceeds(gap: f64, bound_sq: f64) -> bool {
    let gap_sq = gap * gap;
    gap_sq > bound_sq * (1.0 + 1e-9) + 1e-12
}

impl ProjectedStore {
    /// `direction` must be a unit vector of length `dim`.
    pub fn new(dim: usize, direction: Vec<f64>, vectors: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(direction.len(), dim);
        let mut keyed: Vec<(f64, usize, Vec<f64>)> = vectors
            .into_iter()
            .enumerate()
            .map(|(id, v)| {
                debug_assert_eq!(v.len(), dim);
                (dot(&direction, &v), id, v)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut keys = Vec::with_capacity(keyed.len());
        let mut ids = Vec::with_capacity(keyed.len());
        let mut data = Vec::with_capacity(keyed.len() * dim);
        for (k, id, v) in keyed {
            keys.push(k);
            ids.push(id);
            data.extend_from_slice(&v);
        }
        Self {
            dim,
            direction,
            keys,
            ids,
            data,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored vector by insertion id (linear lookup; only for tests and
    /// diagnostics).
    pub fn vector(&self, id: usize) -> Option<&[f64]> {
        let pos = self.ids.iter().position(|&i| i == id)?;
        Some(&self.data[pos * self.dim..(pos + 1) * self.dim])
    }

    /// Squared distance, abandoned (returning `None`) once the partial sum
    /// exceeds `bound`.
    fn dist_sq_bounded(&self, query: &[f64], pos: usize, bound: f64) -> Option<f64> {
        let row = &self.data[pos * self.dim..(pos + 1) * self.dim];
        let mut acc = 0.0;
        for (chunk_q, chunk_r) in query.chunks(8).zip(row.chunks(8)) {
            for (q, r) in chunk_q.iter().zip(chunk_r) {
                let d = q - r;
                acc += d * d;
            }
            if acc > bound {
                return None;
            }
        }
        Some(acc)
    }

    /// The `k` nearest stored vectors to `query`, excluding insertion id
    /// `exclude`, sorted by `(distance, id)`.
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
        if k == 0 || self.is_empty() {
            return best;
        }
        let key = dot(&self.direction, query);
        let split = self.keys.partition_point(|&x| x < key);
        let (mut left, mut right) = (split, split);
        loop {
            let bound = if best.len() == k {
                best[k - 1].dist_sq
            } else {
                f64::INFINITY
            };
            let left_gap = (left > 0).then(|| key - self.keys[left - 1]);
            let right_gap = (right < self.len()).then(|| self.keys[right] - key);
            let take_left = match (left_gap, right_gap) {
                (None, None) => break,
                (Some(l), Some(r)) => l <= r,
                (Some(_), None) => true,
                (None, Some(_)) => false,
            };
            let (pos, gap) = if take_left {
                left -= 1;
                (left, left_gap.unwrap())
            } else {
                right += 1;
                (right - 1, right_gap.unwrap())
            };
            if bound.is_finite() && gap_exceeds(gap, bound) {
                // The gap on the other side is at least as large, and gaps
                // only grow outward.
                break;
            }
            let id = self.ids[pos];
            if exclude == Some(id) {
                continue;
            }
            let Some(dist_sq) = self.dist_sq_bounded(query, pos, bound) else {
                continue;
            };
            let cand = Neighbor { dist_sq, id };
            if best.len() == k && !ranks_before(&cand, &best[k - 1]) {
                continue;
            }
            let at = best.partition_point(|b| ranks_before(b, &cand));
            best.insert(at, cand);
            best.truncate(k);
        }
        best
    }

    /// Smallest squared distance to any stored vector.
    pub fn nearest_dist_sq(&self, query: &[f64]) -> Option<f64> {
        self.knn(query, 1, None).first().map(|n| n.dist_sq)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Plain sum of squared differences in coordinate order.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}
