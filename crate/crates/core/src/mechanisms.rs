//! Per-alter network statistics for the five tie-formation mechanisms and
//! their weighted combination into candidate scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::BinaryNetwork;

pub const MECHANISM_COUNT: usize = 5;
pub const MECHANISM_NAMES: [&str; MECHANISM_COUNT] =
    ["mutuality", "popularity", "assortativity", "transitivity", "osp"];

/// Strengths of the five mechanisms. Sign gives the direction of the effect.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MechanismWeights {
    pub mutuality: f64,
    pub popularity: f64,
    pub assortativity: f64,
    pub transitivity: f64,
    pub osp: f64,
}

impl MechanismWeights {
    pub const fn new(
        mutuality: f64,
        popularity: f64,
        assortativity: f64,
        transitivity: f64,
        osp: f64,
    ) -> Self {
        MechanismWeights {
            mutuality,
            popularity,
            assortativity,
            transitivity,
            osp,
        }
    }

    pub fn from_array(w: [f64; MECHANISM_COUNT]) -> Self {
        Self::new(w[0], w[1], w[2], w[3], w[4])
    }

    pub fn to_array(&self) -> [f64; MECHANISM_COUNT] {
        [
            self.mutuality,
            self.popularity,
            self.assortativity,
            self.transitivity,
            self.osp,
        ]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_array(self.to_array().map(|w| w * c))
    }

    pub fn squared_norm(&self) -> f64 {
        self.to_array().iter().map(|w| w * w).sum()
    }
}

/// Statistics of a focal unit against every other unit.
///
/// `candidates[c]` is the alter described by column `c` of `raw` and
/// `normalized`; the focal unit itself never appears.
#[derive(Debug, Clone, PartialEq)]
pub struct StatRow {
    pub focal: usize,
    pub candidates: Vec<usize>,
    pub raw: [Vec<f64>; MECHANISM_COUNT],
    pub normalized: [Vec<f64>; MECHANISM_COUNT],
}

/// Raw statistics for focal unit `i` and each alter `j != i`:
///
/// * mutuality: `j -> i` exists
/// * popularity: in-degree of `j`
/// * assortativity: `-|indeg(i) - indeg(j)|`
/// * transitivity: number of two-paths `i -> k -> j`
/// * osp: number of shared out-partners `k` with `i -> k` and `j -> k`
pub fn raw_stats(net: &BinaryNetwork, i: usize) -> Result<(Vec<usize>, [Vec<f64>; MECHANISM_COUNT])> {
    let n = net.n();
    if i >= n {
        return Err(Error::Index { index: i, n });
    }
    let in_deg = net.in_degrees();
    let focal_row = net.row(i);

    // two-path counts i -> k -> j, accumulated row by row
    let mut two_paths = vec![0u32; n];
    for (k, &ik) in focal_row.iter().enumerate() {
        if ik == 1 {
            for (j, &kj) in net.row(k).iter().enumerate() {
                two_paths[j] += kj as u32;
            }
        }
    }

    let candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let m = candidates.len();
    let mut raw: [Vec<f64>; MECHANISM_COUNT] = std::array::from_fn(|_| Vec::with_capacity(m));
    for &j in &candidates {
        let shared: u32 = focal_row
            .iter()
            .zip(net.row(j))
            .map(|(&a, &b)| (a & b) as u32)
            .sum();
        raw[0].push(net.get(j, i) as f64);
        raw[1].push(in_deg[j] as f64);
        raw[2].push(-(in_deg[i] as f64 - in_deg[j] as f64).abs());
        raw[3].push(two_paths[j] as f64);
        raw[4].push(shared as f64);
    }
    Ok((candidates, raw))
}

/// Min-max scaling onto [0, 1]. A constant row maps to all zeros.
pub fn normalize(row: &[f64]) -> Result<Vec<f64>> {
    if row.len() < 2 {
        return Err(Error::Dimension(format!(
            "normalization needs at least 2 candidates, got {}",
            row.len()
        )));
    }
    let (min, max) = row
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max == min {
        return Ok(vec![0.0; row.len()]);
    }
    let span = max - min;
    Ok(row.iter().map(|&v| (v - min) / span).collect())
}

impl StatRow {
    pub fn compute(net: &BinaryNetwork, i: usize) -> Result<Self> {
        let (candidates, raw) = raw_stats(net, i)?;
        let mut normalized: [Vec<f64>; MECHANISM_COUNT] = Default::default();
        for (slot, row) in normalized.iter_mut().zip(&raw) {
            *slot = normalize(row)?;
        }
        Ok(StatRow {
            focal: i,
            candidates,
            raw,
            normalized,
        })
    }

    /// Weighted score of every candidate: the sum over mechanisms of weight
    /// times normalized statistic.
    pub fn weighted(&self, theta: &MechanismWeights) -> Vec<f64> {
        let w = theta.to_array();
        (0..self.candidates.len())
            .map(|c| {
                let mut s = 0.0;
                for (m, wm) in w.iter().enumerate() {
                    s += wm * self.normalized[m][c];
                }
                s
            })
            .collect()
    }
}

/// Candidate scores for focal unit `i`, paired with the candidate unit ids.
pub fn phi(net: &BinaryNetwork, i: usize, theta: &MechanismWeights) -> Result<(Vec<usize>, Vec<f64>)> {
    let row = StatRow::compute(net, i)?;
    let scores = row.weighted(theta);
    Ok((row.candidates, scores))
}
