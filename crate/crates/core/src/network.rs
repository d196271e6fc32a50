//! Network representation, binarization of interaction counts,
//! symmetrization and degree/density primitives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed interaction counts between units (row = ego, column = alter).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountNetwork {
    n: usize,
    counts: Vec<u64>,
}

impl CountNetwork {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = rows.len();
        let mut counts = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            if row[i] != 0 {
                return Err(Error::InvalidNetwork(format!(
                    "count matrix has non-zero diagonal entry at unit {i}"
                )));
            }
            counts.extend(row);
        }
        Ok(CountNetwork { n, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }
}

/// A loop-free 0/1 network, directed or undirected.
///
/// Undirected networks are stored as symmetric matrices; every mutation
/// through [`BinaryNetwork::set`] keeps both triangles in sync.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryNetwork {
    n: usize,
    directed: bool,
    adj: Vec<u8>,
}

impl BinaryNetwork {
    pub fn empty(n: usize, directed: bool) -> Self {
        BinaryNetwork {
            n,
            directed,
            adj: vec![0; n * n],
        }
    }

    /// Complete network: every off-diagonal cell is a link.
    pub fn complete(n: usize, directed: bool) -> Self {
        let mut net = Self::empty(n, directed);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    net.adj[i * n + j] = 1;
                }
            }
        }
        net
    }

    /// Builds a network from a square 0/1 matrix. Undirected input must be symmetric.
    pub fn from_rows(rows: &[Vec<u8>], directed: bool) -> Result<Self> {
        let n = rows.len();
        let mut adj = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidNetwork(format!(
                        "entry ({i}, {j}) is {v}, expected 0 or 1"
                    )));
                }
                if i == j && v != 0 {
                    return Err(Error::InvalidNetwork(format!("loop at unit {i}")));
                }
            }
            adj.extend_from_slice(row);
        }
        let net = BinaryNetwork { n, directed, adj };
        if !directed && !net.is_symmetric() {
            return Err(Error::InvalidNetwork(
                "undirected network requires a symmetric matrix".into(),
            ));
        }
        Ok(net)
    }

    /// Builds a network from 0-based endpoint pairs. Loops are rejected.
    pub fn from_links(n: usize, directed: bool, links: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(n, directed);
        for &(i, j) in links {
            if i >= n {
                return Err(Error::Index { index: i, n });
            }
            if j >= n {
                return Err(Error::Index { index: j, n });
            }
            if i == j {
                return Err(Error::InvalidNetwork(format!("loop at unit {i}")));
            }
            net.set(i, j, true);
        }
        Ok(net)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.adj[i * self.n + j]
    }

    #[inline]
    pub fn has_link(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] != 0
    }

    /// Sets or clears the link i -> j (and j -> i for undirected networks).
    /// Returns whether any cell changed. Setting a loop is ignored.
    pub fn set(&mut self, i: usize, j: usize, link: bool) -> bool {
        if i == j {
            return false;
        }
        let v = link as u8;
        let n = self.n;
        let changed = self.adj[i * n + j] != v;
        self.adj[i * n + j] = v;
        if !self.directed {
            self.adj[j * n + i] = v;
        }
        changed
    }

    /// Row i of the adjacency matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.adj[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Number of arcs (directed) or edges (undirected).
    pub fn link_count(&self) -> usize {
        let ones: usize = self.adj.iter().map(|&v| v as usize).sum();
        if self.directed {
            ones
        } else {
            ones / 2
        }
    }

    /// Number of possible links: n(n-1) ordered pairs or n(n-1)/2 unordered ones.
    pub fn possible_links(&self) -> usize {
        let ordered = self.n * self.n.saturating_sub(1);
        if self.directed {
            ordered
        } else {
            ordered / 2
        }
    }

    pub fn density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::Dimension(format!(
                "density needs at least 2 units, got {}",
                self.n
            )));
        }
        Ok(self.link_count() as f64 / self.possible_links() as f64)
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let n = self.n;
        let mut deg = vec![0usize; n];
        for i in 0..n {
            for (j, &v) in self.row(i).iter().enumerate() {
                deg[j] += v as usize;
            }
        }
        deg
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|&v| v as usize).sum())
            .collect()
    }

    pub fn degrees(&self) -> Degrees {
        Degrees {
            in_degree: self.in_degrees(),
            out_degree: self.out_degrees(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (i + 1..n).all(|j| self.adj[i * n + j] == self.adj[j * n + i]))
    }

    /// Undirected union: i and j are linked if at least one of them chose the other.
    pub fn symmetrize_union(&self) -> BinaryNetwork {
        let n = self.n;
        let mut out = BinaryNetwork::empty(n, false);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.adj[i * n + j] | self.adj[j * n + i];
                out.adj[i * n + j] = v;
                out.adj[j * n + i] = v;
            }
        }
        out
    }

    /// Loop-free complement: every off-diagonal cell flipped.
    pub fn complement(&self) -> BinaryNetwork {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.adj[i * n + j] ^= 1;
                }
            }
        }
        out
    }

    /// Relabels units: unit `perm[i]` of the result is unit `i` of `self`.
    pub fn relabel(&self, perm: &[usize]) -> BinaryNetwork {
        let n = self.n;
        assert_eq!(perm.len(), n, "permutation length must equal unit count");
        let mut out = BinaryNetwork::empty(n, self.directed);
        for i in 0..n {
            for j in 0..n {
                out.adj[perm[i] * n + perm[j]] = self.adj[i * n + j];
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degrees {
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
}

/// Median of the pairwise totals c[i][j] + c[j][i] over unordered pairs.
/// Even-sized samples use the mean of the two central order statistics.
fn pair_median(values: &mut [u64]) -> f64 {
    values.sort_unstable();
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2] as f64
    } else {
        (values[m / 2 - 1] as f64 + values[m / 2] as f64) / 2.0
    }
}

/// Turns interaction counts into an undirected binary network: a pair is
/// linked when its summed two-way count is strictly above half the median
/// pair count.
pub fn binarize(counts: &CountNetwork) -> Result<BinaryNetwork> {
    let n = counts.n();
    if n < 2 {
        return Err(Error::Dimension(format!(
            "binarization needs at least 2 units, got {n}"
        )));
    }
    let mut pair_totals = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pair_totals.push(counts.get(i, j) + counts.get(j, i));
        }
    }
    let threshold = pair_median(&mut pair_totals.clone()) / 2.0;
    let mut out = BinaryNetwork::empty(n, false);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if pair_totals[idx] as f64 > threshold {
                out.set(i, j, true);
            }
            idx += 1;
        }
    }
    Ok(out)
}
