//! Deterministic parallel execution over Monte Carlo paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::solver::EnergySummary;

/// Seed of path `index` under `base_seed`.
pub fn path_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Runs `job(seed)` for `paths` consecutive seeds on a pool of `workers`
/// threads. Results come back in path order whatever the scheduling.
pub fn run_paths<T, E, F>(paths: usize, base_seed: u64, workers: usize, job: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    pool.install(|| (0..paths).into_par_iter().map(|i| job(path_seed(base_seed, i))).collect())
}

/// Per-path summary kept by an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub seed: u64,
    pub energy: EnergySummary,
    /// `sup_{t,x} (u − S′)⁺`, when a dominator is present.
    pub sup_excess: Option<f64>,
    /// De Giorgi energies `V^m`, when computed.
    pub levels: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEnsemble {
    pub base_seed: u64,
    pub runs: Vec<PathSummary>,
}

impl McEnsemble {
    pub fn count(&self) -> usize {
        self.runs.len()
    }

    pub fn seeds_distinct(&self) -> bool {
        let mut s: Vec<u64> = self.runs.iter().map(|r| r.seed).collect();
        s.sort_unstable();
        s.windows(2).all(|w| w[0] != w[1])
    }

    pub fn sup_excess(&self) -> Vec<f64> {
        self.runs.iter().filter_map(|r| r.sup_excess).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_in_path_order_for_any_worker_count() {
        let job = |s: u64| Ok::<_, ()>(s * s);
        let a = run_paths(50, 10, 1, job).unwrap();
        let b = run_paths(50, 10, 4, job).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[3], 13 * 13);
    }
}
