//! Agglomerative nearest-prototype clustering in joint `(x, y)` space.
//!
//! Every point starts as its own cluster. The two clusters whose prototypes
//! (centroids) are closest are merged, repeatedly, until `L` remain. Distances
//! are Euclidean on standardized coordinates so that no column, including the
//! response, dominates by scale alone.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster of each point, in `0..L`. Labels are ordered by each cluster's
    /// smallest member index.
    pub assignments: Vec<usize>,
    /// Centroid of each cluster's `(x, y)` vectors in the original units; the
    /// response is the last coordinate.
    pub prototypes: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
}

impl Clustering {
    /// Every point in its own cluster, labelled by its index.
    pub fn singletons<R: AsRef<[f64]>>(x: &[R], y: &[f64]) -> Self {
        Clustering {
            assignments: (0..y.len()).collect(),
            prototypes: x
                .iter()
                .zip(y)
                .map(|(row, &v)| joint(row.as_ref(), v))
                .collect(),
            sizes: vec![1; y.len()],
        }
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_points(&self) -> usize {
        self.assignments.len()
    }

    /// Point indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

fn joint(x: &[f64], y: f64) -> Vec<f64> {
    let mut v = x.to_vec();
    v.push(y);
    v
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Centers every coordinate and scales it to unit (population) standard
/// deviation; constant coordinates are only centered.
pub(crate) fn standardize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len() as f64;
    let p = points[0].len();
    let mut mean = vec![0.0; p];
    for row in points {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut sd = vec![0.0; p];
    for row in points {
        for ((s, v), m) in sd.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut sd {
        *s = (*s / n).sqrt();
    }
    points
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .zip(&sd)
                .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { v - m })
                .collect()
        })
        .collect()
}

/// Merges the `n` points `(x_i, y_i)` down to `l` clusters.
///
/// Ties between equally distant pairs go to the lexicographically smallest
/// pair of cluster ids, where a merged cluster keeps the smaller id.
pub fn cluster<R: AsRef<[f64]>>(x: &[R], y: &[f64], l: usize) -> Result<Clustering> {
    let n = y.len();
    if x.len() != n {
        return Err(Error::invalid("cluster: x and y lengths differ"));
    }
    if l < 1 || l > n {
        return Err(Error::invalid(format!(
            "cluster count must lie in 1..={n}, got {l}"
        )));
    }
    let raw: Vec<Vec<f64>> = x
        .iter()
        .zip(y)
        .map(|(row, &v)| joint(row.as_ref(), v))
        .collect();
    let mut proto = standardize(&raw);
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    // Union-find style parent pointer: a merged cluster points at its absorber.
    let mut parent: Vec<usize> = (0..n).collect();

    let nearest = |a: usize, proto: &[Vec<f64>], active: &[bool]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for b in 0..proto.len() {
            if b != a && active[b] {
                let d = sq_dist(&proto[a], &proto[b]);
                if d < best.1 {
                    best = (b, d);
                }
            }
        }
        best
    };

    let mut nn: Vec<(usize, f64)> = (0..n).map(|a| nearest(a, &proto, &active)).collect();
    let mut remaining = n;
    let mut merges = 0usize;
    while remaining > l {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            let (b, d) = nn[a];
            let key = (d, a.min(b), a.max(b));
            if best.map_or(true, |k| key < k) {
                best = Some(key);
            }
        }
        let (_, i, j) = best.expect("at least two active clusters");

        let (si, sj) = (size[i] as f64, size[j] as f64);
        let merged: Vec<f64> = proto[i]
            .iter()
            .zip(&proto[j])
            .map(|(a, b)| (si * a + sj * b) / (si + sj))
            .collect();
        proto[i] = merged;
        size[i] += size[j];
        active[j] = false;
        parent[j] = i;
        remaining -= 1;
        merges += 1;

        if remaining > 1 {
            nn[i] = nearest(i, &proto, &active);
            for c in 0..n {
                if !active[c] || c == i {
                    continue;
                }
                if nn[c].0 == i || nn[c].0 == j {
                    nn[c] = nearest(c, &proto, &active);
                } else {
                    let d = sq_dist(&proto[c], &proto[i]);
                    if (d, i) < (nn[c].1, nn[c].0) {
                        nn[c] = (i, d);
                    }
                }
            }
        }
    }
    debug_assert_eq!(merges, n - l);

    let root = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };
    // Label clusters by first appearance, i.e. by smallest member index.
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut assignments = Vec::with_capacity(n);
    for i in 0..n {
        let r = root(i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        assignments.push(label[r]);
    }
    let p = raw[0].len();
    let mut sizes = vec![0usize; l];
    let mut prototypes = vec![vec![0.0; p]; l];
    for (i, &c) in assignments.iter().enumerate() {
        sizes[c] += 1;
        for (acc, v) in prototypes[c].iter_mut().zip(&raw[i]) {
            *acc += v;
        }
    }
    for (proto, &s) in prototypes.iter_mut().zip(&sizes) {
        for v in proto.iter_mut() {
            *v /= s as f64;
        }
    }
    Ok(Clustering {
        assignments,
        prototypes,
        sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SplitMix64;
    use proptest::prelude::*;

    /// Quadratic-per-step reference: recompute every pair distance at every
    /// merge.
    fn naive(x: &[Vec<f64>], y: &[f64], l: usize) -> Vec<usize> {
        let raw: Vec<Vec<f64>> = x.iter().zip(y).map(|(r, &v)| joint(r, v)).collect();
        let z = standardize(&raw);
        let mut clusters: Vec<(usize, Vec<usize>, Vec<f64>)> =
            (0..y.len()).map(|i| (i, vec![i], z[i].clone())).collect();
        while clusters.len() > l {
            let mut best = (f64::INFINITY, 0, 0);
            for a in 0..clusters.len() {
                for b in a + 1..clusters.len() {
                    let d = sq_dist(&clusters[a].2, &clusters[b].2);
                    let (ia, ib) = (clusters[a].0, clusters[b].0);
                    let key = (d, ia.min(ib), ia.max(ib));
                    if key < best {
                        best = key;
                    }
                }
            }
            let ia = clusters.iter().position(|c| c.0 == best.1).unwrap();
            let ib = clusters.iter().position(|c| c.0 == best.2).unwrap();
            let cb = clusters.remove(ib);
            let ca = &mut clusters[if ib < ia { ia - 1 } else { ia }];
            let (sa, sb) = (ca.1.len() as f64, cb.1.len() as f64);
            for (p, q) in ca.2.iter_mut().zip(&cb.2) {
                *p = (sa * *p + sb * q) / (sa + sb);
            }
            ca.1.extend(cb.1);
        }
        let mut labels = vec![0; y.len()];
        for c in &clusters {
            for &m in &c.1 {
                labels[m] = c.0;
            }
        }
        canonical(&labels)
    }

    fn canonical(labels: &[usize]) -> Vec<usize> {
        let mut map = std::collections::HashMap::new();
        labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect()
    }

    fn random_points(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = SplitMix64::new(seed);
        let x = (0..n).map(|_| (0..d).map(|_| rng.uniform_in(-3.0, 3.0)).collect()).collect();
        let y = (0..n).map(|_| rng.normal() * 5.0).collect();
        (x, y)
    }

    #[test]
    fn matches_naive_reference() {
        for seed in 0..20 {
            let (x, y) = random_points(seed, 40, 2);
            for l in [1, 3, 7, 40] {
                let fast = cluster(&x, &y, l).unwrap();
                assert_eq!(fast.assignments, naive(&x, &y, l), "seed {seed}, L={l}");
            }
        }
    }

    #[test]
    fn l_equals_n_and_one() {
        let (x, y) = random_points(1, 12, 3);
        let c = cluster(&x, &y, 12).unwrap();
        assert_eq!(c.assignments, (0..12).collect::<Vec<_>>());
        for i in 0..12 {
            assert_eq!(c.prototypes[i], joint(&x[i], y[i]));
        }
        let c = cluster(&x, &y, 1).unwrap();
        assert_eq!(c.sizes, vec![12]);
        let mean_y = y.iter().sum::<f64>() / 12.0;
        assert!((c.prototypes[0][3] - mean_y).abs() < 1e-12);
        assert!(cluster(&x, &y, 0).is_err());
        assert!(cluster(&x, &y, 13).is_err());
    }

    #[test]
    fn two_blobs_split_cleanly() {
        let mut rng = SplitMix64::new(8);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let c = if i % 2 == 0 { 0.0 } else { 10.0 };
            x.push(vec![c + rng.uniform_in(-0.1, 0.1)]);
            y.push(c + rng.uniform_in(-0.1, 0.1));
        }
        let c = cluster(&x, &y, 2).unwrap();
        for i in 0..20 {
            assert_eq!(c.assignments[i], i % 2);
        }
        assert_eq!(c.sizes, vec![10, 10]);
        assert_eq!(naive(&x, &y, 2), c.assignments);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn invariants(seed in 0u64..1000, n in 2usize..30, l_frac in 0.0..1.0f64) {
            let (x, y) = random_points(seed, n, 2);
            let l = 1 + ((n - 1) as f64 * l_frac) as usize;
            let c = cluster(&x, &y, l).unwrap();
            prop_assert_eq!(c.sizes.iter().sum::<usize>(), n);
            prop_assert!(c.sizes.iter().all(|&s| s > 0));
            for (k, members) in c.members().iter().enumerate() {
                let mean_y = members.iter().map(|&i| y[i]).sum::<f64>() / members.len() as f64;
                prop_assert!((c.prototypes[k][2] - mean_y).abs() < 1e-9);
            }
        }

        #[test]
        fn permutation_relabels_only(seed in 0u64..1000, n in 3usize..25) {
            let (x, y) = random_points(seed, n, 2);
            let l = 1 + n / 3;
            let base = cluster(&x, &y, l).unwrap();
            let mut rng = SplitMix64::new(seed ^ 0xABCD);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.below(i as u64 + 1) as usize);
            }
            let px: Vec<Vec<f64>> = perm.iter().map(|&i| x[i].clone()).collect();
            let py: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
            let other = cluster(&px, &py, l).unwrap();
            // Same partition: points i and j together in one iff in the other.
            for a in 0..n {
                for b in 0..n {
                    prop_assert_eq!(
                        other.assignments[a] == other.assignments[b],
                        base.assignments[perm[a]] == base.assignments[perm[b]]
                    );
                }
            }
        }

        #[test]
        fn scaling_a_coordinate_keeps_partition(seed in 0u64..1000, scale in 0.01..100.0f64, col in 0usize..3) {
            let (mut x, mut y) = random_points(seed, 20, 2);
            let base = cluster(&x, &y, 5).unwrap();
            if col < 2 {
                for row in &mut x {
                    row[col] *= scale;
                }
            } else {
                for v in &mut y {
                    *v *= scale;
                }
            }
            prop_assert_eq!(cluster(&x, &y, 5).unwrap().assignments, base.assignments);
        }
    }
}
