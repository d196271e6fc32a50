//! Steepest-descent local search over partitions with incremental block
//! link counts. Moves are single-unit relocations (the source cluster must
//! stay non-empty) and exchanges of two units from different clusters.

use super::{block_cells, BlockType, Model, Partition};
use crate::network::BinaryNetwork;

#[derive(Debug, Clone, Copy)]
enum Move {
    Relocate { u: usize, to: usize },
    Exchange { u: usize, v: usize },
}

struct SearchState<'a> {
    net: &'a BinaryNetwork,
    k: usize,
    /// per block: Some(true) complete, Some(false) null, None free choice
    prescribed: Vec<Option<bool>>,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    /// links in block (g, h), row-major
    ones: Vec<i64>,
    /// cost of each block under the current partition
    block_cost: Vec<i64>,
    total: i64,
    /// For a prescribed image the criterion is linear in the block link
    /// counts: +1 per link in a null block, -1 in a complete block.
    signs: Option<Vec<i64>>,
    /// pull[u * k + c]: signed links of u if it sat in cluster c
    pull: Vec<i64>,
    /// cell term of relocating any unit from a to b, for prescribed images
    reloc_cells: Vec<i64>,
    /// out_links[u * k + c]: links from u to members of cluster c
    out_links: Vec<i64>,
    /// in_links[u * k + c]: links from members of cluster c to u
    in_links: Vec<i64>,
}

impl<'a> SearchState<'a> {
    fn new(net: &'a BinaryNetwork, start: &Partition, model: &Model) -> Self {
        let n = net.n();
        let k = start.k();
        let labels = start.labels().to_vec();
        let mut ones = vec![0i64; k * k];
        let mut out_links = vec![0i64; n * k];
        let mut in_links = vec![0i64; n * k];
        for i in 0..n {
            for (j, &v) in net.row(i).iter().enumerate() {
                if v == 1 {
                    ones[labels[i] * k + labels[j]] += 1;
                    out_links[i * k + labels[j]] += 1;
                    in_links[j * k + labels[i]] += 1;
                }
            }
        }
        let prescribed = match model {
            Model::NonSpecified => vec![None; k * k],
            Model::Specified(img) => (0..k * k)
                .map(|idx| Some(img.get(idx / k, idx % k) == BlockType::Complete))
                .collect(),
        };
        let signs = match model {
            Model::NonSpecified => None,
            Model::Specified(_) => Some(
                prescribed
                    .iter()
                    .map(|p| if *p == Some(true) { -1 } else { 1 })
                    .collect(),
            ),
        };
        let mut state = SearchState {
            net,
            k,
            prescribed,
            signs,
            pull: Vec::new(),
            reloc_cells: vec![0; k * k],
            sizes: start.sizes(),
            labels,
            ones,
            block_cost: vec![0; k * k],
            total: 0,
            out_links,
            in_links,
        };
        state.refresh_costs();
        state
    }

    #[inline]
    fn cost_of(&self, idx: usize, ones: i64, cells: i64) -> i64 {
        match self.prescribed[idx] {
            None => ones.min(cells - ones),
            Some(true) => cells - ones,
            Some(false) => ones,
        }
    }

    #[inline]
    fn cells(sizes_g: usize, sizes_h: usize, diagonal: bool) -> i64 {
        if diagonal {
            (sizes_g * sizes_g.saturating_sub(1)) as i64
        } else {
            (sizes_g * sizes_h) as i64
        }
    }

    fn refresh_costs(&mut self) {
        let k = self.k;
        let mut total = 0;
        for g in 0..k {
            for h in 0..k {
                let idx = g * k + h;
                let c = self.cost_of(idx, self.ones[idx], block_cells(&self.sizes, g, h) as i64);
                self.block_cost[idx] = c;
                total += c;
            }
        }
        self.total = total;
        if let Some(signs) = &self.signs {
            let n = self.net.n();
            let mut pull = vec![0i64; n * k];
            for u in 0..n {
                let out = &self.out_links[u * k..(u + 1) * k];
                let inn = &self.in_links[u * k..(u + 1) * k];
                for c in 0..k {
                    let mut acc = 0;
                    for h in 0..k {
                        acc += signs[c * k + h] * out[h] + signs[h * k + c] * inn[h];
                    }
                    pull[u * k + c] = acc;
                }
            }
            self.pull = pull;
            for a in 0..k {
                for b in 0..k {
                    if a == b || self.sizes[a] == 0 {
                        continue;
                    }
                    let size_of = |c: usize| {
                        if c == a {
                            self.sizes[c] - 1
                        } else if c == b {
                            self.sizes[c] + 1
                        } else {
                            self.sizes[c]
                        }
                    };
                    let mut delta = 0;
                    for g in 0..k {
                        for h in 0..k {
                            if self.prescribed[g * k + h] == Some(true) && (g == a || g == b || h == a || h == b) {
                                delta += Self::cells(size_of(g), size_of(h), g == h)
                                    - Self::cells(self.sizes[g], self.sizes[h], g == h);
                            }
                        }
                    }
                    self.reloc_cells[a * k + b] = delta;
                }
            }
        }
    }

    /// Criterion after moving unit `u` to cluster `b`. Only blocks in the rows
    /// and columns of the two clusters involved are recomputed.
    fn eval_relocate(&self, u: usize, b: usize) -> i64 {
        let k = self.k;
        let a = self.labels[u];
        if self.signs.is_some() {
            return self.total + self.pull[u * k + b] - self.pull[u * k + a] + self.reloc_cells[a * k + b];
        }
        let out = &self.out_links[u * k..(u + 1) * k];
        let inn = &self.in_links[u * k..(u + 1) * k];
        let size_of = |c: usize| -> usize {
            if c == a {
                self.sizes[c] - 1
            } else if c == b {
                self.sizes[c] + 1
            } else {
                self.sizes[c]
            }
        };
        let mut total = self.total;
        for g in 0..k {
            let row_hit = g == a || g == b;
            for h in 0..k {
                if !row_hit && h != a && h != b {
                    continue;
                }
                let idx = g * k + h;
                let mut o = self.ones[idx];
                if g == a {
                    o -= out[h];
                }
                if h == a {
                    o -= inn[g];
                }
                if g == b {
                    o += out[h];
                }
                if h == b {
                    o += inn[g];
                }
                let cells = Self::cells(size_of(g), size_of(h), g == h);
                total += self.cost_of(idx, o, cells) - self.block_cost[idx];
            }
        }
        total
    }

    /// Criterion after swapping units `u` (cluster a) and `v` (cluster b).
    fn eval_exchange(&self, u: usize, v: usize) -> i64 {
        let k = self.k;
        let (a, b) = (self.labels[u], self.labels[v]);
        if let Some(s) = &self.signs {
            let (vu, uv) = (self.net.get(v, u) as i64, self.net.get(u, v) as i64);
            let (aa, ab, ba, bb) = (s[a * k + a], s[a * k + b], s[b * k + a], s[b * k + b]);
            return self.total + self.pull[u * k + b] - self.pull[u * k + a] + self.pull[v * k + a]
                - self.pull[v * k + b]
                + vu * ((ab - aa) - (bb - ba))
                + uv * ((ba - aa) - (bb - ab));
        }
        let out_u = &self.out_links[u * k..(u + 1) * k];
        let in_u = &self.in_links[u * k..(u + 1) * k];
        let out_v = &self.out_links[v * k..(v + 1) * k];
        let in_v = &self.in_links[v * k..(v + 1) * k];
        // v's links to a and b change once u has moved from a to b
        let (vu, uv) = (self.net.get(v, u) as i64, self.net.get(u, v) as i64);
        let out_v_at = |c: usize| out_v[c] - if c == a { vu } else { 0 } + if c == b { vu } else { 0 };
        let in_v_at = |c: usize| in_v[c] - if c == a { uv } else { 0 } + if c == b { uv } else { 0 };
        let mut total = self.total;
        for g in 0..k {
            let row_hit = g == a || g == b;
            for h in 0..k {
                if !row_hit && h != a && h != b {
                    continue;
                }
                let idx = g * k + h;
                let mut o = self.ones[idx];
                // u: a -> b
                if g == a {
                    o -= out_u[h];
                }
                if h == a {
                    o -= in_u[g];
                }
                if g == b {
                    o += out_u[h];
                }
                if h == b {
                    o += in_u[g];
                }
                // v: b -> a
                if g == b {
                    o -= out_v_at(h);
                }
                if h == b {
                    o -= in_v_at(g);
                }
                if g == a {
                    o += out_v_at(h);
                }
                if h == a {
                    o += in_v_at(g);
                }
                let cells = Self::cells(self.sizes[g], self.sizes[h], g == h);
                total += self.cost_of(idx, o, cells) - self.block_cost[idx];
            }
        }
        total
    }

    fn commit_relocate(&mut self, u: usize, to: usize) {
        let k = self.k;
        let from = self.labels[u];
        if from == to {
            return;
        }
        for c in 0..k {
            let (out, inn) = (self.out_links[u * k + c], self.in_links[u * k + c]);
            self.ones[from * k + c] -= out;
            self.ones[c * k + from] -= inn;
            self.ones[to * k + c] += out;
            self.ones[c * k + to] += inn;
        }
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        self.labels[u] = to;
        for w in 0..self.net.n() {
            let wu = self.net.get(w, u) as i64;
            let uw = self.net.get(u, w) as i64;
            self.out_links[w * k + from] -= wu;
            self.out_links[w * k + to] += wu;
            self.in_links[w * k + from] -= uw;
            self.in_links[w * k + to] += uw;
        }
    }

    fn commit(&mut self, mv: Move) {
        match mv {
            Move::Relocate { u, to } => self.commit_relocate(u, to),
            Move::Exchange { u, v } => {
                let (a, b) = (self.labels[u], self.labels[v]);
                self.commit_relocate(u, b);
                self.commit_relocate(v, a);
            }
        }
        self.refresh_costs();
    }

    /// Best strictly improving move, scanning relocations then exchanges;
    /// the first of several equally good moves wins.
    fn best_move(&self) -> Option<(Move, i64)> {
        let n = self.net.n();
        let k = self.k;
        let mut best: Option<(Move, i64)> = None;
        let mut best_cost = self.total;
        for u in 0..n {
            let from = self.labels[u];
            if self.sizes[from] < 2 {
                continue;
            }
            for to in 0..k {
                if to == from {
                    continue;
                }
                let c = self.eval_relocate(u, to);
                if c < best_cost {
                    best_cost = c;
                    best = Some((Move::Relocate { u, to }, c));
                }
            }
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if self.labels[u] == self.labels[v] {
                    continue;
                }
                let c = self.eval_exchange(u, v);
                if c < best_cost {
                    best_cost = c;
                    best = Some((Move::Exchange { u, v }, c));
                }
            }
        }
        best
    }
}

/// Runs steepest descent from `start` to a local optimum and returns it with
/// its criterion value.
pub fn local_search(net: &BinaryNetwork, start: Partition, model: &Model) -> (Partition, u64) {
    let k = start.k();
    let mut state = SearchState::new(net, &start, model);
    while let Some((mv, cost)) = state.best_move() {
        state.commit(mv);
        debug_assert_eq!(cost, state.total);
    }
    let total = state.total as u64;
    let p = Partition::new(state.labels, k).expect("moves keep clusters non-empty");
    (p, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmodel::criterion;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_net(n: usize, p: f64, directed: bool, seed: u64) -> BinaryNetwork {
        let mut rng = rng_from_seed(seed);
        let mut net = BinaryNetwork::empty(n, directed);
        for i in 0..n {
            for j in 0..n {
                if (directed || i < j) && i != j && rng.random_bool(p) {
                    net.set(i, j, true);
                }
            }
        }
        net
    }

    proptest! {
        #[test]
        fn incremental_moves_match_direct_criterion(
            n in 4usize..12,
            k in 2usize..4,
            directed in any::<bool>(),
            specified in any::<bool>(),
            seed in any::<u64>(),
            moves in proptest::collection::vec((any::<usize>(), any::<usize>(), any::<bool>()), 1..20),
        ) {
            let net = random_net(n, 0.4, directed, seed);
            let mut rng = rng_from_seed(seed ^ 1);
            let start = Partition::random(n, k, &mut rng).unwrap();
            let model = if specified {
                Model::Specified(crate::blockmodel::BlockImage::from_rows(
                    (0..k).map(|g| (0..k).map(|h| if (g + h + seed as usize) % 2 == 0 { BlockType::Complete } else { BlockType::Null }).collect()).collect()
                ).unwrap())
            } else {
                Model::NonSpecified
            };
            let mut state = SearchState::new(&net, &start, &model);
            for (a, b, exchange) in moves {
                let u = a % n;
                let mv = if exchange {
                    let v = b % n;
                    if state.labels[u] == state.labels[v] { continue; }
                    let predicted = state.eval_exchange(u, v);
                    (Move::Exchange { u, v }, predicted)
                } else {
                    let to = b % k;
                    if to == state.labels[u] || state.sizes[state.labels[u]] < 2 { continue; }
                    let predicted = state.eval_relocate(u, to);
                    (Move::Relocate { u, to }, predicted)
                };
                state.commit(mv.0);
                let p = Partition::new(state.labels.clone(), k).unwrap();
                let direct = criterion(&net, &p, &model).unwrap().0 as i64;
                prop_assert_eq!(mv.1, direct);
                prop_assert_eq!(state.total, direct);
            }
        }

        #[test]
        fn local_search_never_worsens(n in 4usize..12, k in 1usize..4, seed in any::<u64>(), directed in any::<bool>()) {
            prop_assume!(k <= n);
            let net = random_net(n, 0.5, directed, seed);
            let start = Partition::random(n, k, &mut rng_from_seed(seed)).unwrap();
            let model = Model::NonSpecified;
            let before = criterion(&net, &start, &model).unwrap().0;
            let (p, after) = local_search(&net, start, &model);
            prop_assert!(after <= before);
            prop_assert_eq!(criterion(&net, &p, &model).unwrap().0, after);
        }
    }
}
