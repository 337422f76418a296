//! Exact nearest-neighbour queries under the max-norm, by sweeping outward from each
//! point along the coordinate with the widest spread.

use super::Points;

pub(crate) struct SweepIndex<'a> {
    pts: &'a Points,
    axis: usize,
    /// Point indices sorted by the sweep axis.
    order: Vec<usize>,
    /// Position of each point within `order`.
    rank: Vec<usize>,
}

#[inline]
fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |d, (x, y)| d.max((x - y).abs()))
}

impl<'a> SweepIndex<'a> {
    pub fn new(pts: &'a Points) -> Self {
        let dim = pts.dim();
        let axis = (0..dim)
            .max_by(|&a, &b| {
                pts.coordinate_range(a)
                    .partial_cmp(&pts.coordinate_range(b))
                    .expect("finite coordinates")
            })
            .unwrap_or(0);
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&i, &j| {
            pts.row(i)[axis]
                .partial_cmp(&pts.row(j)[axis])
                .expect("finite coordinates")
                .then(i.cmp(&j))
        });
        let mut rank = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Self {
            pts,
            axis,
            order,
            rank,
        }
    }

    /// Distance from point `i` to its `k`-th nearest other point.
    pub fn kth_distance(&self, i: usize, k: usize) -> f64 {
        debug_assert!(k >= 1 && k < self.pts.len());
        let q = self.pts.row(i);
        let qa = q[self.axis];
        // Sorted ascending; best[k-1] is the current k-th distance.
        let mut best = vec![f64::INFINITY; k];
        let consider = |j: usize, best: &mut Vec<f64>| {
            let d = chebyshev(q, self.pts.row(j));
            if d < best[k - 1] {
                let pos = best.partition_point(|&b| b <= d);
                best.insert(pos, d);
                best.pop();
            }
        };
        let r = self.rank[i];
        let (mut lo, mut hi) = (r, r + 1);
        let n = self.order.len();
        loop {
            let left = (lo > 0).then(|| qa - self.pts.row(self.order[lo - 1])[self.axis]);
            let right = (hi < n).then(|| self.pts.row(self.order[hi])[self.axis] - qa);
            let go_left = match (left, right) {
                (None, None) => break,
                (Some(l), None) => {
                    if l > best[k - 1] {
                        break;
                    }
                    true
                }
                (None, Some(h)) => {
                    if h > best[k - 1] {
                        break;
                    }
                    false
                }
                (Some(l), Some(h)) => {
                    if l.min(h) > best[k - 1] {
                        break;
                    }
                    l <= h
                }
            };
            if go_left {
                lo -= 1;
                consider(self.order[lo], &mut best);
            } else {
                consider(self.order[hi], &mut best);
                hi += 1;
            }
        }
        best[k - 1]
    }

    /// Number of points other than `i` strictly closer than `eps` to point `i`.
    pub fn count_within(&self, i: usize, eps: f64) -> usize {
        let q = self.pts.row(i);
        let qa = q[self.axis];
        let r = self.rank[i];
        let mut count = 0;
        for &j in self.order[r + 1..].iter() {
            let p = self.pts.row(j);
            if p[self.axis] - qa >= eps {
                break;
            }
            count += usize::from(chebyshev(q, p) < eps);
        }
        for &j in self.order[..r].iter().rev() {
            let p = self.pts.row(j);
            if qa - p[self.axis] >= eps {
                break;
            }
            count += usize::from(chebyshev(q, p) < eps);
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_kth(p: &Points, i: usize, k: usize) -> f64 {
        let mut d: Vec<f64> = (0..p.len())
            .filter(|&j| j != i)
            .map(|j| chebyshev(p.row(i), p.row(j)))
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d[k - 1]
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=4 {
            let data: Vec<f64> = (0..300 * dim)
                .map(|c| rng.random::<f64>() * if c % dim == 0 { 1.0 } else { 5.0 })
                .collect();
            let p = Points::new(data, dim).unwrap();
            let idx = SweepIndex::new(&p);
            for i in (0..300).step_by(17) {
                for k in [1, 3, 7] {
                    let d = idx.kth_distance(i, k);
                    assert_eq!(d, brute_kth(&p, i, k));
                    let brute = (0..300)
                        .filter(|&j| j != i && chebyshev(p.row(i), p.row(j)) < d)
                        .count();
                    assert_eq!(idx.count_within(i, d), brute);
                    assert_eq!(brute, k - 1);
                }
            }
        }
    }
}
