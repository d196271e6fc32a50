use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::run::SimulationRecord;

/// Means over repetitions for one theta at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub theta_id: usize,
    pub iter: usize,
    pub reps: usize,
    pub mean_inconsistent_blocks: f64,
    pub mean_density: f64,
    pub mean_rf_core_cohesive: Option<f64>,
    pub mean_rf_cohesive: Option<f64>,
    pub mean_rf_core_periphery: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub theta_id: usize,
    pub final_iter: usize,
    /// mean core-cohesive relative fit at the final checkpoint
    pub mrf: Option<f64>,
    pub checkpoints: Vec<CheckpointSummary>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean over the defined values, `None` if there are none.
fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| mean(&v))
}

/// Aggregates records per theta and checkpoint. Records are ordered by
/// repetition before summation, so the result does not depend on input order.
pub fn summarize(records: &[SimulationRecord]) -> Vec<ThetaSummary> {
    let mut groups: BTreeMap<usize, BTreeMap<usize, Vec<&SimulationRecord>>> = BTreeMap::new();
    for r in records {
        groups
            .entry(r.theta_id)
            .or_default()
            .entry(r.iter)
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|(theta_id, by_iter)| {
            let checkpoints: Vec<CheckpointSummary> = by_iter
                .into_iter()
                .map(|(iter, mut rs)| {
                    rs.sort_by_key(|r| r.rep);
                    let inc: Vec<f64> = rs.iter().map(|r| r.inconsistent_blocks as f64).collect();
                    let dens: Vec<f64> = rs.iter().map(|r| r.density).collect();
                    CheckpointSummary {
                        theta_id,
                        iter,
                        reps: rs.len(),
                        mean_inconsistent_blocks: mean(&inc),
                        mean_density: mean(&dens),
                        mean_rf_core_cohesive: mean_defined(rs.iter().map(|r| r.rf_core_cohesive)),
                        mean_rf_cohesive: mean_defined(rs.iter().map(|r| r.rf_cohesive)),
                        mean_rf_core_periphery: mean_defined(rs.iter().map(|r| r.rf_core_periphery)),
                    }
                })
                .collect();
            let last = checkpoints.last().expect("group is non-empty");
            ThetaSummary {
                theta_id,
                final_iter: last.iter,
                mrf: last.mean_rf_core_cohesive,
                checkpoints,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(theta_id: usize, rep: usize, iter: usize, inc: usize, rf: Option<f64>) -> SimulationRecord {
        SimulationRecord {
            theta_id,
            rep,
            iter,
            density: 0.1 * (rep + 1) as f64,
            inconsistent_blocks: inc,
            rf_core_cohesive: rf,
            rf_cohesive: None,
            rf_core_periphery: None,
        }
    }

    #[test]
    fn single_record() {
        let s = summarize(&[rec(4, 0, 100, 2, Some(0.5))]);
        assert_eq!(s.len(), 1);
        let c = &s[0].checkpoints[0];
        assert_eq!(c.mean_inconsistent_blocks, 2.0);
        assert_eq!(c.mean_density, 0.1);
        assert_eq!(s[0].mrf, Some(0.5));
        assert_eq!(c.mean_rf_cohesive, None);
    }

    #[test]
    fn mean_over_reps() {
        let s = summarize(&[rec(1, 0, 100, 0, None), rec(1, 1, 100, 1, None)]);
        assert_eq!(s[0].checkpoints[0].mean_inconsistent_blocks, 0.5);
    }

    #[test]
    fn perfect_fit_mrf() {
        let recs: Vec<_> = (0..5).map(|r| rec(2, r, 400, 0, Some(1.0))).collect();
        assert_eq!(summarize(&recs)[0].mrf, Some(1.0));
    }

    #[test]
    fn empty_input() {
        assert!(summarize(&[]).is_empty());
    }

    #[test]
    fn order_invariant() {
        let mut recs: Vec<_> = (0..7)
            .flat_map(|r| [100, 200].map(|it| rec(1 + r % 2, r, it, r % 3, Some(0.1 * r as f64))))
            .collect();
        let a = summarize(&recs);
        recs.reverse();
        recs.swap(1, 5);
        assert_eq!(summarize(&recs), a);
    }
}
