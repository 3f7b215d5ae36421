//! Multi-start pattern search over box-bounded problems.
//!
//! The tracker eliminates states through the dynamics, so its decision vector
//! is the stacked inputs; constraints arrive folded into the objective as
//! penalties. The search needs no gradients: it polls coordinate steps on a
//! mesh, expanding on success and contracting on failure.

use crate::scalar::Scalar;
use rand::Rng;
use std::time::{Duration, Instant};

/// Relative mesh size (fraction of each dimension's range) at the start of
/// every search.
const INITIAL_MESH: f64 = 0.25;
/// Search stops once the relative mesh drops below this.
const MESH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("no start point lies within the bounds")]
    NoStartInBounds,
    #[error("bounds and start dimensions disagree")]
    DimensionMismatch,
}

/// Computation allowance for one solve. Iteration budgets are deterministic;
/// wall-clock budgets are for live runs and may overshoot by at most one
/// poll sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(u64),
    WallClock(Duration),
}

pub struct SearchProblem<'a, S> {
    pub lower: &'a [S],
    pub upper: &'a [S],
    pub starts: &'a [Vec<S>],
    pub budget: Budget,
    /// Per-start cap on poll sweeps, applied on top of the shared budget.
    pub max_iterations: u64,
    pub objective: &'a dyn Fn(&[S]) -> S,
}

impl<S: Scalar> SearchProblem<'_, S> {
    pub fn dimension(&self) -> usize {
        self.lower.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<S> {
    pub best: Vec<S>,
    pub best_value: S,
    pub evaluations: u64,
    /// True when the winning start terminated by mesh tolerance rather than
    /// by exhausting the budget or the iteration cap.
    pub converged: bool,
    pub elapsed: Duration,
}

/// Generalized pattern search from every in-bounds start; the budget is
/// rationed evenly across the starts that remain, and unused allowance rolls
/// over. Returns the lowest value found; ties keep the earliest start.
pub fn pattern_search<S: Scalar>(problem: &SearchProblem<S>) -> Result<SearchResult<S>, SearchError> {
    let n = problem.dimension();
    if problem.upper.len() != n || problem.starts.iter().any(|s| s.len() != n) {
        return Err(SearchError::DimensionMismatch);
    }
    let in_bounds = |x: &[S]| {
        x.iter()
            .zip(problem.lower)
            .zip(problem.upper)
            .all(|((&v, &lo), &hi)| v >= lo && v <= hi)
    };
    let starts: Vec<&Vec<S>> = problem.starts.iter().filter(|s| in_bounds(s)).collect();
    if starts.is_empty() {
        return Err(SearchError::NoStartInBounds);
    }

    let clock = Instant::now();
    let mut evaluations = 0u64;
    let mut evaluate = |x: &[S]| {
        evaluations += 1;
        (problem.objective)(x)
    };

    let mut best: Option<(S, Vec<S>, bool)> = None;
    let mut iterations_left = match problem.budget {
        Budget::Iterations(n) => n,
        Budget::WallClock(_) => u64::MAX,
    };
    for (index, start) in starts.iter().enumerate() {
        let ration = match problem.budget {
            Budget::Iterations(_) => {
                (iterations_left / (starts.len() - index) as u64).min(problem.max_iterations)
            }
            Budget::WallClock(_) => problem.max_iterations,
        };
        let deadline = match problem.budget {
            Budget::WallClock(total) => {
                let left = total.saturating_sub(clock.elapsed());
                Some(clock.elapsed() + left / (starts.len() - index) as u32)
            }
            Budget::Iterations(_) => None,
        };
        let (value, point, sweeps, converged) = search_from(
            start,
            problem.lower,
            problem.upper,
            &mut evaluate,
            ration,
            deadline.map(|d| (clock, d)),
        );
        iterations_left = iterations_left.saturating_sub(sweeps);
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value < *bv,
        };
        if better {
            best = Some((value, point, converged));
        }
    }

    let (best_value, best, converged) = best.expect("at least one start searched");
    Ok(SearchResult {
        best,
        best_value,
        evaluations,
        converged,
        elapsed: clock.elapsed(),
    })
}

/// One pattern search sweep loop. Each sweep polls every coordinate in both
/// directions (remembered successful sign first) and accepts improvements
/// immediately; an accepted probe is extended along its coordinate while it
/// keeps improving, and an improving sweep ends with a pattern move that
/// extrapolates the whole displacement. The mesh doubles on success (capped
/// at the initial size); on failure it contracts by 0.5 per consecutive
/// failure (so repeated failures skip ahead, since a level that just failed
/// from the same point rarely succeeds after one halving). Returns
/// (value, point, sweeps used, hit mesh tolerance).
fn search_from<S: Scalar>(
    start: &[S],
    lower: &[S],
    upper: &[S],
    evaluate: &mut impl FnMut(&[S]) -> S,
    max_sweeps: u64,
    deadline: Option<(Instant, Duration)>,
) -> (S, Vec<S>, u64, bool) {
    let n = start.len();
    let range: Vec<S> = lower.iter().zip(upper).map(|(&lo, &hi)| hi - lo).collect();
    let clamp = |v: S, i: usize| v.max(lower[i]).min(upper[i]);
    let mut x = start.to_vec();
    let mut fx = evaluate(&x);
    let mut mesh = INITIAL_MESH;
    let mut sweeps = 0u64;
    let mut failure_streak = 0u32;
    let mut preferred: Vec<S> = vec![S::one(); n];
    while sweeps < max_sweeps {
        if let Some((clock, total)) = deadline {
            if clock.elapsed() >= total {
                break;
            }
        }
        if mesh < MESH_TOLERANCE {
            return (fx, x, sweeps, true);
        }
        sweeps += 1;
        let before = x.clone();
        let mut improved = false;
        for i in 0..n {
            let step = range[i] * S::lit(mesh);
            for sign in [preferred[i], -preferred[i]] {
                let candidate = x[i] + step * sign;
                if candidate < lower[i] || candidate > upper[i] {
                    continue;
                }
                let saved = x[i];
                x[i] = candidate;
                let fc = evaluate(&x);
                if fc < fx {
                    fx = fc;
                    preferred[i] = sign;
                    improved = true;
                    // Ride the improving direction while it pays off.
                    loop {
                        let next = x[i] + step * sign;
                        if next < lower[i] || next > upper[i] {
                            break;
                        }
                        let held = x[i];
                        x[i] = next;
                        let fn_ = evaluate(&x);
                        if fn_ < fx {
                            fx = fn_;
                        } else {
                            x[i] = held;
                            break;
                        }
                    }
                    break;
                }
                x[i] = saved;
            }
        }
        if improved {
            // Pattern move: extrapolate the sweep's total displacement while
            // it keeps paying off.
            loop {
                let probe: Vec<S> = x
                    .iter()
                    .zip(&before)
                    .enumerate()
                    .map(|(i, (&now, &was))| clamp(now + (now - was), i))
                    .collect();
                if probe == x {
                    break;
                }
                let fp = evaluate(&probe);
                if fp < fx {
                    fx = fp;
                    x = probe;
                } else {
                    break;
                }
            }
            failure_streak = 0;
            mesh = (mesh * 2.0).min(INITIAL_MESH);
        } else {
            failure_streak += 1;
            mesh *= 0.5_f64.powi(failure_streak.min(4) as i32);
        }
    }
    (fx, x, sweeps, mesh < MESH_TOLERANCE)
}

/// Start points for the tracker's solve: the shifted previous solution when
/// available, then the reference inputs, then seeded uniform samples, clamped
/// into bounds and truncated to `count`.
pub fn make_starts<S: Scalar>(
    warm_start: Option<&[S]>,
    reference: &[S],
    count: usize,
    lower: &[S],
    upper: &[S],
    rng: &mut impl Rng,
) -> Vec<Vec<S>> {
    assert!(count >= 1, "at least one start");
    let clamp = |v: &[S]| -> Vec<S> {
        v.iter()
            .zip(lower)
            .zip(upper)
            .map(|((&x, &lo), &hi)| x.max(lo).min(hi))
            .collect()
    };
    let mut starts = Vec::with_capacity(count);
    if let Some(warm) = warm_start {
        starts.push(clamp(warm));
    }
    if starts.len() < count {
        starts.push(clamp(reference));
    }
    while starts.len() < count {
        let sample: Vec<S> = lower
            .iter()
            .zip(upper)
            .map(|(&lo, &hi)| {
                let t: f64 = rng.gen_range(0.0..=1.0);
                lo + (hi - lo) * S::lit(t)
            })
            .collect();
        starts.push(sample);
    }
    starts
}
