//! Exact two-dimensional star discrepancy.

use super::UniformBatch;
use crate::{Error, Result};

/// Brute-force cost guard on the point count.
pub const STAR_DISCREPANCY_MAX_N: usize = 512;

/// Exact star discrepancy of a two-dimensional batch.
///
/// The supremum of `|A([0,b])/N - vol([0,b])|` over anchored boxes is
/// attained on the critical grid spanned by the point coordinates and 1:
/// with the box closed at a grid corner the count is maximal for the
/// smallest volume, and approaching a corner from below the box is open and
/// the volume maximal. Both cases are enumerated with cumulative counts
/// over a coordinate-rank tree, O(n^2 log n) overall.
pub fn star_discrepancy_2d(batch: &UniformBatch) -> Result<f64> {
    if batch.d() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: batch.d(),
        });
    }
    let n = batch.n();
    if n > STAR_DISCREPANCY_MAX_N {
        return Err(Error::CostGuard {
            n,
            max: STAR_DISCREPANCY_MAX_N,
        });
    }

    let mut pts: Vec<(f64, f64)> = (0..n).map(|i| (batch.get(i, 0), batch.get(i, 1))).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.push(1.0);
    xs.dedup();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.push(1.0);
    ys.dedup();

    let y_rank = |y: f64| ys.partition_point(|&v| v < y); // rank of first >= y

    let nf = n as f64;
    let mut best = 0.0f64;
    let mut tree = RankTree::new(ys.len());
    let mut next = 0usize; // points inserted so far (sorted by x)

    // Closed boxes: count points with px <= cx, py <= cy.
    for &cx in &xs {
        while next < n && pts[next].0 <= cx {
            tree.insert(y_rank(pts[next].1));
            next += 1;
        }
        for (yi, &cy) in ys.iter().enumerate() {
            let count = tree.prefix(yi + 1) as f64; // ranks <= yi, i.e. py <= cy
            best = best.max(count / nf - cx * cy);
        }
    }

    // Open boxes: count points with px < cx, py < cy.
    tree.clear();
    next = 0;
    for &cx in &xs {
        while next < n && pts[next].0 < cx {
            tree.insert(y_rank(pts[next].1));
            next += 1;
        }
        for (yi, &cy) in ys.iter().enumerate() {
            let count = tree.prefix(yi) as f64; // ranks < yi, i.e. py < cy
            best = best.max(cx * cy - count / nf);
        }
    }

    Ok(best)
}

/// Fenwick tree over coordinate ranks.
struct RankTree {
    tree: Vec<u32>,
}

impl RankTree {
    fn new(len: usize) -> Self {
        RankTree {
            tree: vec![0; len + 1],
        }
    }

    fn clear(&mut self) {
        self.tree.fill(0);
    }

    fn insert(&mut self, rank: usize) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks < `upto`.
    fn prefix(&self, upto: usize) -> u32 {
        let mut i = upto;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_center_point() {
        let batch = UniformBatch::from_points(vec![0.5, 0.5], 1, 2).unwrap();
        let d = star_discrepancy_2d(&batch).unwrap();
        assert!((d - 0.75).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn rejects_wrong_dimension() {
        let batch = UniformBatch::from_points(vec![0.5], 1, 1).unwrap();
        assert!(matches!(
            star_discrepancy_2d(&batch),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_oversized_batch() {
        let batch = UniformBatch::from_points(vec![0.25; 2 * 600], 600, 2).unwrap();
        assert!(matches!(
            star_discrepancy_2d(&batch),
            Err(Error::CostGuard { .. })
        ));
    }

    #[test]
    fn always_positive() {
        let batch = UniformBatch::from_points(vec![0.1, 0.9, 0.6, 0.3, 0.8, 0.2], 3, 2).unwrap();
        assert!(star_discrepancy_2d(&batch).unwrap() > 0.0);
    }
}
