//! Ideal blockmodel types, inconsistent-block counting, density-matched
//! randomization and the relative-fit statistic.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockmodel::{fit, BlockImage, BlockType, FitOptions};
use crate::error::{Error, Result};
use crate::network::BinaryNetwork;
use crate::seed::rng_from_seed;

pub const DEFAULT_K_RAND: usize = 20;

/// Blockmodel types the toolkit can test for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum IdealType {
    /// One core cluster tied to everyone, plus mutually unlinked cohesive
    /// clusters. Cluster 0 is the core.
    SymmetricCoreCohesive { k: usize },
    Cohesive { k: usize },
    SymmetricCorePeriphery,
}

impl IdealType {
    /// The three types compared in the simulations, at three (or two) clusters.
    pub const STANDARD: [IdealType; 3] = [
        IdealType::SymmetricCoreCohesive { k: 3 },
        IdealType::Cohesive { k: 3 },
        IdealType::SymmetricCorePeriphery,
    ];

    pub fn k(&self) -> usize {
        match *self {
            IdealType::SymmetricCoreCohesive { k } | IdealType::Cohesive { k } => k,
            IdealType::SymmetricCorePeriphery => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            IdealType::SymmetricCoreCohesive { k } if k < 3 => Err(Error::Config(format!(
                "symmetric core-cohesive blockmodel needs k >= 3, got {k}"
            ))),
            IdealType::Cohesive { k } if k < 2 => Err(Error::Config(format!(
                "cohesive blockmodel needs k >= 2, got {k}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IdealType::SymmetricCoreCohesive { .. } => "core-cohesive",
            IdealType::Cohesive { .. } => "cohesive",
            IdealType::SymmetricCorePeriphery => "core-periphery",
        }
    }
}

impl fmt::Display for IdealType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealType::SymmetricCorePeriphery => f.write_str(self.name()),
            _ => write!(f, "{}:{}", self.name(), self.k()),
        }
    }
}

/// `core-cohesive[:k]`, `cohesive[:k]` (default k = 3) or `core-periphery`.
impl FromStr for IdealType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, k) = match s.split_once(':') {
            Some((name, k)) => (
                name,
                Some(
                    k.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad cluster count in {s:?}")))?,
                ),
            ),
            None => (s, None),
        };
        let t = match name.trim().to_ascii_lowercase().as_str() {
            "core-cohesive" | "symmetric-core-cohesive" => {
                IdealType::SymmetricCoreCohesive { k: k.unwrap_or(3) }
            }
            "cohesive" => IdealType::Cohesive { k: k.unwrap_or(3) },
            "core-periphery" | "symmetric-core-periphery" => match k {
                None | Some(2) => IdealType::SymmetricCorePeriphery,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "core-periphery has exactly 2 clusters, got {other}"
                    )))
                }
            },
            other => return Err(Error::Parse(format!("unknown blockmodel type {other:?}"))),
        };
        t.validate()?;
        Ok(t)
    }
}

pub fn ideal_image(t: IdealType) -> Result<BlockImage> {
    t.validate()?;
    use BlockType::{Complete, Null};
    let k = t.k();
    let mut img = BlockImage::filled(k, Null);
    match t {
        IdealType::SymmetricCoreCohesive { .. } => {
            for g in 0..k {
                img.set(g, g, Complete);
                img.set(0, g, Complete);
                img.set(g, 0, Complete);
            }
        }
        IdealType::Cohesive { .. } => {
            for g in 0..k {
                img.set(g, g, Complete);
            }
        }
        IdealType::SymmetricCorePeriphery => {
            img.set(0, 0, Complete);
            img.set(0, 1, Complete);
            img.set(1, 0, Complete);
        }
    }
    Ok(img)
}

/// Fewest differing cells between `observed` and `ideal` over all
/// simultaneous row/column relabelings of `observed`.
pub fn inconsistent_blocks(observed: &BlockImage, ideal: &BlockImage) -> Result<usize> {
    let k = ideal.k();
    if observed.k() != k {
        return Err(Error::Dimension(format!(
            "observed image is {}x{0}, ideal is {k}x{k}",
            observed.k()
        )));
    }
    let best = (0..k)
        .permutations(k)
        .map(|perm| {
            let mut diff = 0;
            for g in 0..k {
                for h in 0..k {
                    if observed.get(g, h) != ideal.get(perm[g], perm[h]) {
                        diff += 1;
                    }
                }
            }
            diff
        })
        .min()
        .unwrap_or(0);
    Ok(best)
}

/// Uniform draw from all loop-free networks with the same unit count,
/// directedness and number of links as `net`.
pub fn randomize<R: Rng + ?Sized>(net: &BinaryNetwork, rng: &mut R) -> BinaryNetwork {
    let n = net.n();
    let mut out = BinaryNetwork::empty(n, net.is_directed());
    let links = net.link_count();
    let slots = net.possible_links();
    if links == 0 {
        return out;
    }
    for slot in rand::seq::index::sample(rng, slots, links) {
        let (i, j) = if net.is_directed() {
            // row i holds the n - 1 off-diagonal cells, skipping column i
            let (i, c) = (slot / (n - 1), slot % (n - 1));
            (i, if c >= i { c + 1 } else { c })
        } else {
            upper_pair(n, slot)
        };
        out.set(i, j, true);
    }
    out
}

/// Maps an index in 0..n(n-1)/2 to the unordered pair (i, j), i < j, in
/// row-major order of the upper triangle.
fn upper_pair(n: usize, mut idx: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
        i += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfReport {
    pub ideal: IdealType,
    /// criterion on the analysed network
    pub p_m: u64,
    /// criteria on the randomized networks
    pub p_r: Vec<u64>,
    /// `None` when every randomized criterion is zero but `p_m` is not
    pub rf: Option<f64>,
    pub k_rand: usize,
    pub restarts: usize,
    pub fit_seed: u64,
    pub baseline_seeds: Vec<(u64, u64)>,
}

impl RfReport {
    pub fn mean_baseline(&self) -> f64 {
        self.p_r.iter().sum::<u64>() as f64 / self.p_r.len() as f64
    }
}

/// `1 - p_m / mean(p_r)`.
pub fn rf_value(p_m: u64, p_r: &[u64]) -> Option<f64> {
    let mean = p_r.iter().sum::<u64>() as f64 / p_r.len() as f64;
    if mean == 0.0 {
        return (p_m == 0).then_some(1.0);
    }
    Some(1.0 - p_m as f64 / mean)
}

/// Relative fit of `net` to a pre-specified ideal blockmodel, against
/// `k_rand` density-matched random networks fitted the same way.
pub fn relative_fit<R: RngCore + ?Sized>(
    net: &BinaryNetwork,
    t: IdealType,
    k_rand: usize,
    restarts: usize,
    rng: &mut R,
) -> Result<RfReport> {
    if k_rand < 1 {
        return Err(Error::Config("at least one randomized network is required".into()));
    }
    let opts = FitOptions::specified(ideal_image(t)?, restarts);
    let fit_seed = rng.next_u64();
    let baseline_seeds: Vec<(u64, u64)> = (0..k_rand).map(|_| (rng.next_u64(), rng.next_u64())).collect();
    let p_m = fit(net, &opts, &mut rng_from_seed(fit_seed))?.criterion;
    let p_r: Result<Vec<u64>> = baseline_seeds
        .par_iter()
        .map(|&(net_seed, seed)| {
            let random = randomize(net, &mut rng_from_seed(net_seed));
            Ok(fit(&random, &opts, &mut rng_from_seed(seed))?.criterion)
        })
        .collect();
    let p_r = p_r?;
    Ok(RfReport {
        ideal: t,
        rf: rf_value(p_m, &p_r),
        p_m,
        p_r,
        k_rand,
        restarts,
        fit_seed,
        baseline_seeds,
    })
}
