//! Generalized blockmodeling of binary networks under structural
//! equivalence: null and complete blocks, the inconsistency criterion, and
//! multi-restart local search over partitions.

mod search;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::BinaryNetwork;
use crate::seed::rng_from_seed;

pub use search::local_search;

/// Ideal block types admitted by structural equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockType {
    #[serde(rename = "null")]
    Null,
    #[serde(rename = "com")]
    Complete,
}

impl BlockType {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockType::Null => "null",
            BlockType::Complete => "com",
        }
    }
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BlockType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "null" | "nul" | "n" | "0" => Ok(BlockType::Null),
            "com" | "complete" | "c" | "1" => Ok(BlockType::Complete),
            other => Err(Error::Parse(format!("unknown block type {other:?}"))),
        }
    }
}

/// A k x k image matrix of block types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<BlockType>>", into = "Vec<Vec<BlockType>>")]
pub struct BlockImage {
    k: usize,
    cells: Vec<BlockType>,
}

impl BlockImage {
    pub fn filled(k: usize, t: BlockType) -> Self {
        BlockImage {
            k,
            cells: vec![t; k * k],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BlockType>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::Model("image must have at least one cluster".into()));
        }
        let mut cells = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::Model(format!(
                    "image row has {} entries, expected {k}",
                    row.len()
                )));
            }
            cells.extend(row);
        }
        Ok(BlockImage { k, cells })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, g: usize, h: usize) -> BlockType {
        self.cells[g * self.k + h]
    }

    pub fn set(&mut self, g: usize, h: usize, t: BlockType) {
        self.cells[g * self.k + h] = t;
    }

    pub fn rows(&self) -> Vec<Vec<BlockType>> {
        self.cells.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    /// Relabels clusters: cluster `perm[g]` of the result is cluster `g` here.
    pub fn permuted(&self, perm: &[usize]) -> BlockImage {
        let mut out = self.clone();
        for g in 0..self.k {
            for h in 0..self.k {
                out.cells[perm[g] * self.k + perm[h]] = self.get(g, h);
            }
        }
        out
    }

    pub fn count(&self, t: BlockType) -> usize {
        self.cells.iter().filter(|&&c| c == t).count()
    }
}

impl TryFrom<Vec<Vec<BlockType>>> for BlockImage {
    type Error = Error;

    fn try_from(rows: Vec<Vec<BlockType>>) -> Result<Self> {
        BlockImage::from_rows(rows)
    }
}

impl From<BlockImage> for Vec<Vec<BlockType>> {
    fn from(img: BlockImage) -> Self {
        img.rows()
    }
}

/// Parses `com,com;com,null` (rows split by `;` or newlines, cells by `,` or
/// whitespace).
impl FromStr for BlockImage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows: Result<Vec<Vec<BlockType>>> = s
            .split([';', '\n'])
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(|r| {
                r.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(BlockType::from_str)
                    .collect()
            })
            .collect();
        BlockImage::from_rows(rows?)
    }
}

impl fmt::Display for BlockImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, row) in self.cells.chunks(self.k).enumerate() {
            if g > 0 {
                f.write_str(";")?;
            }
            let names: Vec<&str> = row.iter().map(BlockType::as_str).collect();
            f.write_str(&names.join(","))?;
        }
        Ok(())
    }
}

/// Assignment of units to `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for (u, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::Partition(format!(
                    "unit {u} has cluster {l}, but k = {k}"
                )));
            }
            seen[l] = true;
        }
        if let Some(g) = seen.iter().position(|&s| !s) {
            return Err(Error::Partition(format!("cluster {g} is empty")));
        }
        Ok(Partition { labels, k })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.k];
        for (u, &l) in self.labels.iter().enumerate() {
            c[l].push(u);
        }
        c
    }

    /// Labels renumbered by order of first appearance; two partitions are the
    /// same clustering iff their canonical labels agree.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect()
    }

    pub fn same_clustering(&self, other: &Partition) -> bool {
        self.n() == other.n() && self.canonical_labels() == other.canonical_labels()
    }

    /// Uniform random labels with every cluster guaranteed non-empty: a random
    /// set of k units seeds the k clusters, the rest are assigned uniformly.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Config(format!(
                "cannot split {n} units into {k} non-empty clusters"
            )));
        }
        let seeds = rand::seq::index::sample(rng, n, k);
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        for (g, u) in seeds.iter().enumerate() {
            labels[u] = g;
        }
        Partition::new(labels, k)
    }
}

/// Whether block types are chosen per block or prescribed by an image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    NonSpecified,
    Specified(BlockImage),
}

impl Model {
    fn check(&self, k: usize) -> Result<()> {
        match self {
            Model::Specified(img) if img.k() != k => Err(Error::Model(format!(
                "image is {0}x{0} but the partition has {k} clusters",
                img.k()
            ))),
            _ => Ok(()),
        }
    }
}

/// Number of ordered off-diagonal cells in block (g, h) given cluster sizes.
#[inline]
pub(crate) fn block_cells(sizes: &[usize], g: usize, h: usize) -> u64 {
    if g == h {
        (sizes[g] * sizes[g].saturating_sub(1)) as u64
    } else {
        (sizes[g] * sizes[h]) as u64
    }
}

/// `(null_error, complete_error)` for block (g, h): the number of links, and
/// the number of missing links, over its cells. Diagonal cells of diagonal
/// blocks are not part of any block.
pub fn block_errors(net: &BinaryNetwork, p: &Partition, g: usize, h: usize) -> Result<(u64, u64)> {
    check_partition(net, p)?;
    if g >= p.k() || h >= p.k() {
        return Err(Error::Partition(format!(
            "block ({g}, {h}) outside a {}-cluster partition",
            p.k()
        )));
    }
    let ones = block_ones(net, p)[g * p.k() + h];
    let cells = block_cells(&p.sizes(), g, h);
    Ok((ones, cells - ones))
}

fn check_partition(net: &BinaryNetwork, p: &Partition) -> Result<()> {
    if p.n() != net.n() {
        return Err(Error::Partition(format!(
            "partition covers {} units, network has {}",
            p.n(),
            net.n()
        )));
    }
    Ok(())
}

/// Link counts of every block, row-major k x k.
fn block_ones(net: &BinaryNetwork, p: &Partition) -> Vec<u64> {
    let k = p.k();
    let mut ones = vec![0u64; k * k];
    for i in 0..net.n() {
        let gi = p.label(i) * k;
        for (j, &v) in net.row(i).iter().enumerate() {
            ones[gi + p.label(j)] += v as u64;
        }
    }
    ones
}

#[inline]
pub(crate) fn best_type(null_err: u64, com_err: u64) -> BlockType {
    if com_err < null_err {
        BlockType::Complete
    } else {
        BlockType::Null
    }
}

/// Criterion value and image of a partition. Under the non-specified model
/// each block takes its cheaper type (ties go to null).
pub fn criterion(net: &BinaryNetwork, p: &Partition, model: &Model) -> Result<(u64, BlockImage)> {
    let (total, image, _) = evaluate(net, p, model)?;
    Ok((total, image))
}

fn evaluate(net: &BinaryNetwork, p: &Partition, model: &Model) -> Result<(u64, BlockImage, Vec<Vec<u64>>)> {
    check_partition(net, p)?;
    model.check(p.k())?;
    let k = p.k();
    let sizes = p.sizes();
    let ones = block_ones(net, p);
    let mut image = BlockImage::filled(k, BlockType::Null);
    let mut errors = vec![vec![0u64; k]; k];
    let mut total = 0;
    for g in 0..k {
        for h in 0..k {
            let o = ones[g * k + h];
            let (null_err, com_err) = (o, block_cells(&sizes, g, h) - o);
            let t = match model {
                Model::NonSpecified => best_type(null_err, com_err),
                Model::Specified(img) => img.get(g, h),
            };
            let e = match t {
                BlockType::Null => null_err,
                BlockType::Complete => com_err,
            };
            image.set(g, h, t);
            errors[g][h] = e;
            total += e;
        }
    }
    Ok((total, image, errors))
}

/// Image with each block labelled by its cheaper ideal type (ties -> null).
pub fn classify_blocks(net: &BinaryNetwork, p: &Partition) -> Result<BlockImage> {
    Ok(criterion(net, p, &Model::NonSpecified)?.1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockmodelFit {
    pub partition: Partition,
    pub image: BlockImage,
    pub criterion: u64,
    pub block_errors: Vec<Vec<u64>>,
}

impl BlockmodelFit {
    pub fn from_partition(net: &BinaryNetwork, partition: Partition, model: &Model) -> Result<Self> {
        let (criterion, image, block_errors) = evaluate(net, &partition, model)?;
        Ok(BlockmodelFit {
            partition,
            image,
            criterion,
            block_errors,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    pub k: usize,
    pub restarts: usize,
    pub model: Model,
}

impl FitOptions {
    pub fn non_specified(k: usize, restarts: usize) -> Self {
        FitOptions {
            k,
            restarts,
            model: Model::NonSpecified,
        }
    }

    pub fn specified(image: BlockImage, restarts: usize) -> Self {
        FitOptions {
            k: image.k(),
            restarts,
            model: Model::Specified(image),
        }
    }
}

/// Best partition found by `restarts` independent steepest-descent runs from
/// random partitions. Restart seeds are drawn from `rng` up front, so the
/// result is deterministic however the restarts are scheduled; ties keep the
/// lowest restart index.
pub fn fit<R: RngCore + ?Sized>(net: &BinaryNetwork, opts: &FitOptions, rng: &mut R) -> Result<BlockmodelFit> {
    let n = net.n();
    if opts.k == 0 || opts.k > n {
        return Err(Error::Config(format!(
            "cannot fit {} clusters to {n} units",
            opts.k
        )));
    }
    if opts.restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    opts.model.check(opts.k)?;
    let seeds: Vec<u64> = (0..opts.restarts).map(|_| rng.next_u64()).collect();
    let run = |(idx, seed): (usize, &u64)| -> Result<(u64, usize, Partition)> {
        let mut r = rng_from_seed(*seed);
        let start = Partition::random(n, opts.k, &mut r)?;
        let (p, c) = local_search(net, start, &opts.model);
        Ok((c, idx, p))
    };
    let results: Result<Vec<_>> = if opts.restarts > 1 && n >= 12 {
        seeds.par_iter().enumerate().map(run).collect()
    } else {
        seeds.iter().enumerate().map(run).collect()
    };
    let (_, _, best) = results?
        .into_iter()
        .min_by_key(|(c, idx, _)| (*c, *idx))
        .expect("restarts >= 1");
    BlockmodelFit::from_partition(net, best, &opts.model)
}

/// Convenience wrapper for a fit driven by a plain seed.
pub fn fit_seeded(net: &BinaryNetwork, opts: &FitOptions, seed: u64) -> Result<BlockmodelFit> {
    fit(net, opts, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use BlockType::{Complete as C, Null as N};

    fn cohesive_two_by_three() -> (BinaryNetwork, Partition) {
        let links = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)];
        (
            BinaryNetwork::from_links(6, false, &links).unwrap(),
            Partition::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap(),
        )
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 0, 1], 3).is_err());
        assert!(Partition::new(vec![0, 3, 1], 3).is_err());
        let p = Partition::new(vec![2, 0, 1, 2], 3).unwrap();
        assert_eq!(p.sizes(), vec![1, 1, 2]);
        assert_eq!(p.canonical_labels(), vec![0, 1, 2, 0]);
        assert!(p.same_clustering(&Partition::new(vec![0, 1, 2, 0], 3).unwrap()));
    }

    #[test]
    fn random_partition_nonempty() {
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let p = Partition::random(5, 3, &mut rng).unwrap();
            assert!(p.sizes().iter().all(|&s| s > 0));
        }
        assert!(Partition::random(2, 3, &mut rng).is_err());
    }

    #[test]
    fn block_error_examples() {
        let full = BinaryNetwork::complete(4, false);
        let p = Partition::new(vec![0; 4], 1).unwrap();
        assert_eq!(block_errors(&full, &p, 0, 0).unwrap(), (12, 0));

        let empty = BinaryNetwork::empty(5, false);
        let p = Partition::new(vec![0, 0, 0, 1, 1], 2).unwrap();
        assert_eq!(block_errors(&empty, &p, 0, 1).unwrap(), (0, 6));

        let one = BinaryNetwork::from_links(4, true, &[(0, 2)]).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(block_errors(&one, &p, 0, 1).unwrap(), (1, 3));
        assert_eq!(block_errors(&one, &p, 1, 0).unwrap(), (0, 4));
    }

    #[test]
    fn criterion_examples() {
        let (net, p) = cohesive_two_by_three();
        let (c, img) = criterion(&net, &p, &Model::NonSpecified).unwrap();
        assert_eq!(c, 0);
        assert_eq!(img.rows(), vec![vec![C, N], vec![N, C]]);

        let all_null = Model::Specified(BlockImage::filled(2, N));
        assert_eq!(criterion(&net, &p, &all_null).unwrap().0, 12);

        let wrong = Model::Specified(BlockImage::filled(3, N));
        assert!(matches!(criterion(&net, &p, &wrong), Err(Error::Model(_))));
    }

    #[test]
    fn single_cluster_criterion() {
        let net = BinaryNetwork::from_links(5, true, &[(0, 1), (1, 2), (3, 4), (4, 0)]).unwrap();
        let p = Partition::new(vec![0; 5], 1).unwrap();
        assert_eq!(criterion(&net, &p, &Model::NonSpecified).unwrap().0, 4);
        let dense = net.complement();
        assert_eq!(criterion(&dense, &p, &Model::NonSpecified).unwrap().0, 4);
    }

    #[test]
    fn classify_examples() {
        let full = BinaryNetwork::complete(4, true);
        let p = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(classify_blocks(&full, &p).unwrap(), BlockImage::filled(2, C));
        let empty = BinaryNetwork::empty(4, true);
        assert_eq!(classify_blocks(&empty, &p).unwrap(), BlockImage::filled(2, N));
        let half = BinaryNetwork::from_links(4, true, &[(0, 2), (1, 3)]).unwrap();
        assert_eq!(classify_blocks(&half, &p).unwrap().get(0, 1), N);
    }

    #[test]
    fn image_parse_and_display() {
        let img: BlockImage = "com,com,com; com,com,null; com,null,com".parse().unwrap();
        assert_eq!(img.k(), 3);
        assert_eq!(img.get(1, 2), N);
        assert_eq!(img.to_string(), "com,com,com;com,com,null;com,null,com");
        assert!("com,null;com".parse::<BlockImage>().is_err());
        let json = serde_json::to_string(&img).unwrap();
        assert_eq!(json, r#"[["com","com","com"],["com","com","null"],["com","null","com"]]"#);
        assert_eq!(serde_json::from_str::<BlockImage>(&json).unwrap(), img);
    }

    #[test]
    fn fit_empty_network() {
        let net = BinaryNetwork::empty(7, false);
        let f = fit_seeded(&net, &FitOptions::non_specified(3, 5), 0).unwrap();
        assert_eq!(f.criterion, 0);
        assert_eq!(f.image, BlockImage::filled(3, N));
    }

    #[test]
    fn fit_rejects_bad_k() {
        let net = BinaryNetwork::empty(3, false);
        assert!(matches!(
            fit_seeded(&net, &FitOptions::non_specified(4, 5), 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fit_planted_core_cohesive() {
        // core {0..4}, cohesive groups {4..8} and {8..12}
        let group = |u: usize| u / 4;
        let mut links = Vec::new();
        for i in 0..12 {
            for j in (i + 1)..12 {
                if group(i) == 0 || group(i) == group(j) {
                    links.push((i, j));
                }
            }
        }
        let net = BinaryNetwork::from_links(12, false, &links).unwrap();
        let f = fit_seeded(&net, &FitOptions::non_specified(3, 50), 42).unwrap();
        assert_eq!(f.criterion, 0);
        let planted = Partition::new((0..12).map(group).collect(), 3).unwrap();
        assert!(f.partition.same_clustering(&planted));
    }
}
