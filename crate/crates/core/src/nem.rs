//! The network evolution model: each step picks a focal unit, scores every
//! alter by the weighted mechanism statistics, and then either creates a tie
//! to a high-scoring alter or dissolves a tie to a low-scoring one.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{MechanismWeights, StatRow, MECHANISM_COUNT};
use crate::network::BinaryNetwork;
use crate::seed::rng_from_seed;

/// Reference checkpoint iterations. They differ slightly from the pure
/// geometric schedule past 1303.
pub const REFERENCE_ITERATIONS: [usize; 12] = [
    100, 190, 361, 686, 1303, 2478, 4705, 8939, 16948, 32969, 61311, 116490,
];

pub const DEFAULT_Q: f64 = 5.0 / 9.0;
pub const DEFAULT_ITERATIONS: usize = 116_490;
pub const DEFAULT_UNITS: usize = 24;

/// Scales a raw draw onto the unit sphere. `None` for the all-zero draw.
pub fn theta_from_draw(draw: [f64; MECHANISM_COUNT]) -> Option<MechanismWeights> {
    let norm = draw.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(MechanismWeights::from_array(draw.map(|v| v / norm)))
}

/// Uniformly distributed direction on the unit sphere in five dimensions.
pub fn sample_theta<R: Rng + ?Sized>(rng: &mut R) -> MechanismWeights {
    loop {
        let draw: [f64; MECHANISM_COUNT] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if let Some(theta) = theta_from_draw(draw) {
            return theta;
        }
    }
}

/// Quantile by linear interpolation between order statistics of a sorted
/// slice, with inclusive endpoints (p = 0 -> min, p = 1 -> max).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    // clamp keeps the value between its bracketing order statistics under rounding
    (a + (b - a) * (pos - lo as f64)).clamp(a.min(b), a.max(b))
}

/// Positions of scores at or above the third quartile (creation candidates)
/// and at or below the first quartile (dissolution candidates).
pub fn quartile_sets(scores: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let create = (0..scores.len()).filter(|&c| scores[c] >= q3).collect();
    let dissolve = (0..scores.len()).filter(|&c| scores[c] <= q1).collect();
    (create, dissolve)
}

/// Creation (C) and dissolution (F) candidate sets of unit ids for focal `i`.
pub fn candidate_sets(
    net: &BinaryNetwork,
    i: usize,
    theta: &MechanismWeights,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let row = StatRow::compute(net, i)?;
    let (c, f) = quartile_sets(&row.weighted(theta));
    Ok((
        c.into_iter().map(|p| row.candidates[p]).collect(),
        f.into_iter().map(|p| row.candidates[p]).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub focal: usize,
    pub target: usize,
    /// true when the step set a link, false when it dissolved one
    pub create: bool,
    /// false when the link already had the requested state
    pub changed: bool,
}

/// One iteration of the evolution model, applied in place. The network must
/// be directed; at most the single cell (focal, target) changes.
pub fn step_in_place<R: Rng + ?Sized>(
    net: &mut BinaryNetwork,
    theta: &MechanismWeights,
    q: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Stepper::new(net).step(net, theta, q, rng)
}

/// Scratch space for running many steps on one network. In-degrees are
/// carried from step to step rather than recounted, and no step allocates.
/// Scores are computed with the same operations as [`StatRow`], so results
/// match [`candidate_sets`] bit for bit.
#[derive(Debug, Clone)]
pub struct Stepper {
    in_deg: Vec<usize>,
    two_paths: Vec<u32>,
    stats: [Vec<f64>; MECHANISM_COUNT],
    scores: Vec<f64>,
    sorted: Vec<f64>,
    pool: Vec<usize>,
}

impl Stepper {
    pub fn new(net: &BinaryNetwork) -> Self {
        let n = net.n();
        let m = n.saturating_sub(1);
        Stepper {
            in_deg: net.in_degrees(),
            two_paths: vec![0; n],
            stats: std::array::from_fn(|_| vec![0.0; m]),
            scores: vec![0.0; m],
            sorted: vec![0.0; m],
            pool: Vec::with_capacity(m),
        }
    }

    /// Applies one step to `net`, which must be the network this stepper was
    /// built from, as left by earlier calls.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        net: &mut BinaryNetwork,
        theta: &MechanismWeights,
        q: f64,
        rng: &mut R,
    ) -> Result<StepOutcome> {
        let n = net.n();
        if n < 4 {
            return Err(Error::Dimension(format!(
                "the evolution model needs at least 4 units, got {n}"
            )));
        }
        if !net.is_directed() {
            return Err(Error::InvalidNetwork(
                "the evolution model operates on directed networks".into(),
            ));
        }
        if self.in_deg.len() != n {
            return Err(Error::Dimension(format!(
                "stepper built for {} units, network has {n}",
                self.in_deg.len()
            )));
        }
        let focal = rng.random_range(0..n);
        self.score(net, focal, theta);

        let mut sorted = std::mem::take(&mut self.sorted);
        sorted.copy_from_slice(&self.scores);
        sorted.sort_by(|a, b| a.total_cmp(b));
        let create = rng.random_bool(q);
        self.pool.clear();
        if create {
            let q3 = quantile_sorted(&sorted, 0.75);
            self.pool.extend((0..self.scores.len()).filter(|&c| self.scores[c] >= q3));
        } else {
            let q1 = quantile_sorted(&sorted, 0.25);
            self.pool.extend((0..self.scores.len()).filter(|&c| self.scores[c] <= q1));
        }
        self.sorted = sorted;
        let c = self.pool[rng.random_range(0..self.pool.len())];
        let target = if c < focal { c } else { c + 1 };
        let changed = net.set(focal, target, create);
        if changed {
            if create {
                self.in_deg[target] += 1;
            } else {
                self.in_deg[target] -= 1;
            }
        }
        Ok(StepOutcome {
            focal,
            target,
            create,
            changed,
        })
    }

    /// Fills `scores` for focal unit `i`; candidate `c` is unit `c` below `i`
    /// and `c + 1` from `i` on.
    fn score(&mut self, net: &BinaryNetwork, i: usize, theta: &MechanismWeights) {
        let n = net.n();
        let focal_row = net.row(i);
        self.two_paths.fill(0);
        for (k, &ik) in focal_row.iter().enumerate() {
            if ik == 1 {
                for (t, &kj) in self.two_paths.iter_mut().zip(net.row(k)) {
                    *t += kj as u32;
                }
            }
        }
        let in_i = self.in_deg[i] as f64;
        for (c, j) in (0..n).filter(|&j| j != i).enumerate() {
            let shared: u32 = focal_row
                .iter()
                .zip(net.row(j))
                .map(|(&a, &b)| (a & b) as u32)
                .sum();
            let in_j = self.in_deg[j] as f64;
            self.stats[0][c] = net.get(j, i) as f64;
            self.stats[1][c] = in_j;
            self.stats[2][c] = -(in_i - in_j).abs();
            self.stats[3][c] = self.two_paths[j] as f64;
            self.stats[4][c] = shared as f64;
        }
        for row in self.stats.iter_mut() {
            let (min, max) = row
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if max == min {
                row.fill(0.0);
            } else {
                let span = max - min;
                row.iter_mut().for_each(|v| *v = (*v - min) / span);
            }
        }
        let w = theta.to_array();
        for (c, score) in self.scores.iter_mut().enumerate() {
            let mut s = 0.0;
            for (m, wm) in w.iter().enumerate() {
                s += wm * self.stats[m][c];
            }
            *score = s;
        }
    }
}

/// Functional form of [`step_in_place`].
pub fn nem_step<R: Rng + ?Sized>(
    net: &BinaryNetwork,
    theta: &MechanismWeights,
    q: f64,
    rng: &mut R,
) -> Result<BinaryNetwork> {
    let mut next = net.clone();
    step_in_place(&mut next, theta, q, rng)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub q: f64,
    pub iterations: usize,
    pub n: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            q: DEFAULT_Q,
            iterations: DEFAULT_ITERATIONS,
            n: DEFAULT_UNITS,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::Config(format!("q = {} is outside [0, 1]", self.q)));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.n < 4 {
            return Err(Error::Config(format!(
                "n = {} is too small, need at least 4 units",
                self.n
            )));
        }
        Ok(())
    }
}

/// Strictly increasing iteration counts at which snapshots are taken.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckpointSchedule {
    points: Vec<usize>,
}

impl CheckpointSchedule {
    pub fn new(points: Vec<usize>) -> Result<Self> {
        if points.first() == Some(&0) {
            return Err(Error::Config("checkpoints must be positive".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "checkpoints must be strictly increasing: {points:?}"
            )));
        }
        Ok(CheckpointSchedule { points })
    }

    /// `m_1 = m1`, `m_i = round(m1 * growth^(i-1))` while not above `total`,
    /// with `total` appended when the sequence does not land on it.
    pub fn geometric(m1: usize, growth: f64, total: usize) -> Result<Self> {
        if m1 < 1 {
            return Err(Error::Config("first checkpoint must be at least 1".into()));
        }
        if !(growth > 1.0) {
            return Err(Error::Config(format!("growth {growth} must exceed 1")));
        }
        if m1 > total {
            return Err(Error::Config(format!(
                "first checkpoint {m1} exceeds total {total}"
            )));
        }
        let mut points: Vec<usize> = Vec::new();
        let mut exact = m1 as f64;
        loop {
            let m = exact.round() as usize;
            if m > total {
                break;
            }
            if points.last().is_none_or(|&last| m > last) {
                points.push(m);
            }
            exact *= growth;
        }
        if points.last() != Some(&total) {
            points.push(total);
        }
        Self::new(points)
    }

    /// The default schedule: factor 1.9 from 100 up to 116,490.
    pub fn default_geometric() -> Self {
        Self::geometric(100, 1.9, DEFAULT_ITERATIONS).expect("static schedule is valid")
    }

    /// Checkpoints at the reference iterations.
    pub fn reference() -> Self {
        Self::new(REFERENCE_ITERATIONS.to_vec()).expect("static schedule is valid")
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.points.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    /// `(iteration, network after that many steps)` for each checkpoint.
    pub snapshots: Vec<(usize, BinaryNetwork)>,
    pub final_network: BinaryNetwork,
}

/// Runs `config.iterations` steps from `initial`, recording a copy of the
/// network at each scheduled iteration. The RNG is seeded from `config.seed`.
pub fn generate(
    config: &GeneratorConfig,
    theta: &MechanismWeights,
    schedule: &CheckpointSchedule,
    initial: &BinaryNetwork,
) -> Result<Trajectory> {
    config.validate()?;
    if initial.n() != config.n {
        return Err(Error::Config(format!(
            "initial network has {} units, config expects {}",
            initial.n(),
            config.n
        )));
    }
    if let Some(last) = schedule.last() {
        if last > config.iterations {
            return Err(Error::Config(format!(
                "checkpoint {last} exceeds the {} iterations",
                config.iterations
            )));
        }
    }
    let mut rng = rng_from_seed(config.seed);
    let mut net = if initial.is_directed() {
        initial.clone()
    } else {
        let mut d = BinaryNetwork::empty(initial.n(), true);
        for i in 0..initial.n() {
            for j in 0..initial.n() {
                d.set(i, j, initial.has_link(i, j));
            }
        }
        d
    };
    let mut snapshots = Vec::with_capacity(schedule.len());
    let mut pending = schedule.points().iter().peekable();
    let mut stepper = Stepper::new(&net);
    for iteration in 1..=config.iterations {
        stepper.step(&mut net, theta, config.q, &mut rng)?;
        if pending.peek() == Some(&&iteration) {
            pending.next();
            snapshots.push((iteration, net.clone()));
        }
    }
    Ok(Trajectory {
        snapshots,
        final_network: net,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn stepper_matches_reference_scores() {
        let mut rng = rng_from_seed(21);
        let theta = sample_theta(&mut rng);
        let mut net = BinaryNetwork::empty(15, true);
        let mut stepper = Stepper::new(&net);
        let mut twin = net.clone();
        let mut twin_rng = rng.clone();
        for step in 0..3000 {
            if step % 97 == 0 {
                for i in 0..15 {
                    stepper.score(&net, i, &theta);
                    let reference = StatRow::compute(&net, i).unwrap().weighted(&theta);
                    assert_eq!(stepper.scores, reference);
                }
            }
            let a = stepper.step(&mut net, &theta, DEFAULT_Q, &mut rng).unwrap();
            let b = step_in_place(&mut twin, &theta, DEFAULT_Q, &mut twin_rng).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(net, twin);
        assert_eq!(stepper.in_deg, net.in_degrees());
    }

    #[test]
    fn theta_axis_and_diagonal() {
        let t = theta_from_draw([3.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(t.to_array(), [1.0, 0.0, 0.0, 0.0, 0.0]);
        let t = theta_from_draw([1.0; 5]).unwrap();
        let expected = 1.0 / 5f64.sqrt();
        for w in t.to_array() {
            assert!((w - expected).abs() < 1e-15);
        }
        assert!((t.squared_norm() - 1.0).abs() < 1e-12);
        assert!(theta_from_draw([0.0; 5]).is_none());
    }

    #[test]
    fn sampled_theta_has_unit_norm() {
        let mut rng = rng_from_seed(3);
        for _ in 0..1000 {
            assert!((sample_theta(&mut rng).squared_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.25), 2.0);
        assert_eq!(quantile_sorted(&s, 0.75), 4.0);
        let s = [0.0, 1.0, 2.0, 10.0];
        assert_eq!(quantile_sorted(&s, 0.25), 0.75);
        assert_eq!(quantile_sorted(&s, 0.75), 4.0);
    }

    #[test]
    fn quartile_sets_include_ties() {
        let (c, f) = quartile_sets(&[0.0; 7]);
        assert_eq!(c.len(), 7);
        assert_eq!(f.len(), 7);
        let (c, f) = quartile_sets(&[0.0, 1.0, 2.0, 10.0]);
        assert_eq!(c, vec![3]);
        assert_eq!(f, vec![0]);
    }

    #[test]
    fn empty_network_step() {
        let theta = MechanismWeights::new(0.2, 0.4, -0.1, 0.3, 0.5);
        for seed in 0..50 {
            let mut rng = rng_from_seed(seed);
            let mut net = BinaryNetwork::empty(6, true);
            let out = step_in_place(&mut net, &theta, 0.5, &mut rng).unwrap();
            assert_ne!(out.focal, out.target);
            assert_eq!(net.link_count(), out.create as usize);
        }
    }

    #[test]
    fn q_one_never_deletes() {
        let theta = MechanismWeights::new(-0.5, 0.5, 0.5, -0.3, 0.4);
        let mut rng = rng_from_seed(11);
        let mut net = BinaryNetwork::empty(8, true);
        let mut last = 0;
        for _ in 0..300 {
            step_in_place(&mut net, &theta, 1.0, &mut rng).unwrap();
            assert!(net.link_count() >= last);
            last = net.link_count();
        }
    }

    #[test]
    fn q_zero_on_complete_deletes() {
        let theta = MechanismWeights::new(0.1, 0.2, 0.3, 0.4, 0.5);
        let mut rng = rng_from_seed(5);
        let mut net = BinaryNetwork::complete(6, true);
        let out = step_in_place(&mut net, &theta, 0.0, &mut rng).unwrap();
        assert!(!out.create && out.changed);
        assert_eq!(net.link_count(), 29);
        assert!(!net.has_link(out.focal, out.target));
    }

    #[test]
    fn step_rejects_small_or_undirected() {
        let theta = MechanismWeights::default();
        let mut rng = rng_from_seed(0);
        assert!(step_in_place(&mut BinaryNetwork::empty(3, true), &theta, 0.5, &mut rng).is_err());
        assert!(step_in_place(&mut BinaryNetwork::empty(5, false), &theta, 0.5, &mut rng).is_err());
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(
            CheckpointSchedule::geometric(100, 2.0, 400).unwrap().points(),
            &[100, 200, 400]
        );
        assert_eq!(
            CheckpointSchedule::geometric(500, 1.9, 500).unwrap().points(),
            &[500]
        );
        assert_eq!(
            CheckpointSchedule::default_geometric().points(),
            &[100, 190, 361, 686, 1303, 2476, 4705, 8939, 16984, 32269, 61311, 116490]
        );
        assert_eq!(
            CheckpointSchedule::geometric(100, 1.9, 1000).unwrap().points(),
            &[100, 190, 361, 686, 1000]
        );
        assert!(CheckpointSchedule::new(vec![5, 5]).is_err());
        assert!(CheckpointSchedule::geometric(100, 1.0, 400).is_err());
    }

    #[test]
    fn generate_counts_and_bounds() {
        let theta = MechanismWeights::new(0.3, 0.3, 0.3, 0.3, 0.3);
        let cfg = GeneratorConfig {
            q: 1.0,
            iterations: 10,
            n: 6,
            seed: 9,
        };
        let traj = generate(
            &cfg,
            &theta,
            &CheckpointSchedule::default(),
            &BinaryNetwork::empty(6, true),
        )
        .unwrap();
        assert!(traj.snapshots.is_empty());
        let links = traj.final_network.link_count();
        assert!((1..=10).contains(&links));

        let sched = CheckpointSchedule::new(vec![3, 10]).unwrap();
        let traj2 = generate(&cfg, &theta, &sched, &BinaryNetwork::empty(6, true)).unwrap();
        assert_eq!(traj2.snapshots.len(), 2);
        assert_eq!(traj2.snapshots[1].1, traj.final_network);
        assert_eq!(traj2, generate(&cfg, &theta, &sched, &BinaryNetwork::empty(6, true)).unwrap());

        let late = CheckpointSchedule::new(vec![11]).unwrap();
        assert!(matches!(
            generate(&cfg, &theta, &late, &BinaryNetwork::empty(6, true)),
            Err(Error::Config(_))
        ));
    }
}
