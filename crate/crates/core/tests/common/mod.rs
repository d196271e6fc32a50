//! Independent reference implementations shared by the integration tests.
//! Nothing here calls the library's criterion or search code.
#![allow(dead_code)]

use blocknem::seed::rng_from_seed;
use blocknem::{BinaryNetwork, BlockImage, BlockType};
use rand::Rng;

/// Every labelling of `n` units into exactly `k` non-empty clusters, as
/// restricted growth strings (each partition appears once).
pub fn set_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, n: usize, k: usize, used: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == n {
            if used == k {
                out.push(cur.clone());
            }
            return;
        }
        // not enough units left to open the remaining clusters
        if k - used > n - pos {
            return;
        }
        for c in 0..=used.min(k - 1) {
            cur.push(c);
            rec(pos + 1, n, k, used.max(c + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Criterion by plain cell enumeration. With an image the block types are
/// fixed; without one each block takes its cheaper type.
pub fn naive_criterion(net: &BinaryNetwork, labels: &[usize], k: usize, image: Option<&BlockImage>) -> u64 {
    let n = net.n();
    let mut total = 0;
    for g in 0..k {
        for h in 0..k {
            let (mut links, mut holes) = (0u64, 0u64);
            for i in (0..n).filter(|&i| labels[i] == g) {
                for j in (0..n).filter(|&j| labels[j] == h && j != i) {
                    if net.get(i, j) == 1 {
                        links += 1;
                    } else {
                        holes += 1;
                    }
                }
            }
            total += match image.map(|img| img.get(g, h)) {
                Some(BlockType::Null) => links,
                Some(BlockType::Complete) => holes,
                None => links.min(holes),
            };
        }
    }
    total
}

/// Exhaustive minimum. A prescribed image is not symmetric under cluster
/// relabeling, so then every labelling of every partition is tried.
pub fn brute_force_min(net: &BinaryNetwork, k: usize, image: Option<&BlockImage>) -> u64 {
    let perms = permutations(k);
    set_partitions(net.n(), k)
        .iter()
        .flat_map(|labels| {
            let relabelings: &[Vec<usize>] = if image.is_some() { &perms } else { &perms[..1] };
            relabelings.iter().map(move |perm| {
                let relabeled: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
                naive_criterion(net, &relabeled, k, image)
            })
        })
        .min()
        .expect("at least one partition")
}

/// All orderings of 0..k, identity first.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in (0..=p.len()).rev() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Random network with its own random density in (0.1, 0.9).
pub fn random_network(n: usize, directed: bool, seed: u64) -> BinaryNetwork {
    let mut rng = rng_from_seed(seed);
    let p: f64 = rng.random_range(0.1..0.9);
    let mut net = BinaryNetwork::empty(n, directed);
    for i in 0..n {
        for j in 0..n {
            if i != j && (directed || i < j) && rng.random_bool(p) {
                net.set(i, j, true);
            }
        }
    }
    net
}

/// Ideal symmetric core-cohesive network: cluster 0 is the core, every other
/// cluster is a clique tied to the core only. Returns the network and the
/// planted labels (units shuffled).
pub fn planted_core_cohesive(sizes: &[usize], seed: u64) -> (BinaryNetwork, Vec<usize>) {
    let mut rng = rng_from_seed(seed);
    let n: usize = sizes.iter().sum();
    let mut labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(g, &s)| std::iter::repeat_n(g, s)).collect();
    // Fisher-Yates so the planted clusters are not contiguous
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let mut net = BinaryNetwork::empty(n, false);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (labels[i], labels[j]);
            if a == b || a == 0 || b == 0 {
                net.set(i, j, true);
            }
        }
    }
    (net, labels)
}

/// True when two labellings induce the same clustering.
pub fn same_clusters(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len()
        && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}
