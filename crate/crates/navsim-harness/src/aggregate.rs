//! Batch statistics: success counts, and mean / sample standard deviation of
//! path length and mission time over the successful runs only. Failed runs
//! contribute nothing but their cause tally, matching the dash convention of
//! results tables.

use crate::run::{FailureCause, RunMetrics};
use navsim_core::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Statistic {
    pub mean: Real,
    /// Sample standard deviation (n - 1); absent below two values.
    pub std_dev: Option<Real>,
}

/// Mean and sample standard deviation; `None` on an empty slice.
pub fn mean_and_std(values: &[Real]) -> Option<Statistic> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as Real;
    let mean = values.iter().sum::<Real>() / n;
    let std_dev = (values.len() >= 2).then(|| {
        let squares = values.iter().map(|v| (v - mean).powi(2)).sum::<Real>();
        (squares / (n - 1.0)).sqrt()
    });
    Some(Statistic { mean, std_dev })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub successes: usize,
    /// Statistics over successful runs; absent when none succeeded.
    pub path_length: Option<Statistic>,
    pub mission_time: Option<Statistic>,
    /// Tally of observed failure causes, in declaration order.
    pub failure_counts: Vec<(FailureCause, usize)>,
}

impl Summary {
    /// The most common failure cause; later declaration order wins ties.
    pub fn dominant_failure(&self) -> Option<FailureCause> {
        self.failure_counts
            .iter()
            .max_by_key(|(_, count)| *count)
            .map(|(cause, _)| *cause)
    }

    pub fn failures_of(&self, cause: FailureCause) -> usize {
        self.failure_counts
            .iter()
            .find(|(c, _)| *c == cause)
            .map_or(0, |(_, count)| *count)
    }
}

/// Fold a batch of run outcomes into one summary.
pub fn aggregate(results: &[RunMetrics]) -> Summary {
    let over_successes = |value: fn(&RunMetrics) -> Real| -> Vec<Real> {
        results.iter().filter(|r| r.success).map(value).collect()
    };
    let paths = over_successes(|r| r.path_length);
    let times = over_successes(|r| r.mission_time);

    use FailureCause::*;
    let failure_counts = [Collision, Livelock, Infeasible, Timeout]
        .into_iter()
        .filter_map(|cause| {
            let count = results
                .iter()
                .filter(|r| r.failure_cause == Some(cause))
                .count();
            (count > 0).then_some((cause, count))
        })
        .collect();

    Summary {
        runs: results.len(),
        successes: paths.len(),
        path_length: mean_and_std(&paths),
        mission_time: mean_and_std(&times),
        failure_counts,
    }
}
