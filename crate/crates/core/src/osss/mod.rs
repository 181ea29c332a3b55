//! Space-time blocks, the decision tree `T_k`, revealment, influence,
//! pivotal points and the Russo-type derivative of the crossing event.

mod blocks;
mod influence;
mod pivotal;
mod tree;

pub use blocks::{partition_blocks, resample_block, BlockIndex, BlockPartition};
pub use influence::{
    estimate_influence, estimate_revealment, influence_profile, osss_check, revealment_bound_check,
    revealment_profile, OsssCheck, RevealmentBound,
};
pub use pivotal::{c_lambda, pivotal_points, russo_check, PivotalReport, RussoCheck};
pub use tree::{determine, run_decision_tree, DecisionTreeTrace, Determination, HaltReason};

use crate::error::Result;
use crate::graphical::{Mark, PointConfiguration, Sweeper};
use crate::lattice::floor_radius;
use crate::lattice::region::NO_SITE;
use crate::lattice::IndexedRegion;
use crate::percolation::crossing_from_bits;

/// For every window site, the `Lambda_n` sites whose truncated bit can
/// depend on points of that site's axis.
pub(crate) struct Dependents {
    targets: Vec<Vec<u32>>,
}

impl Dependents {
    pub(crate) fn new(region: &IndexedRegion, n: u64, radius: f64) -> Self {
        let reach = floor_radius(radius);
        let targets = (0..region.len() as u32)
            .map(|s| {
                let mut out: Vec<u32> = within(region, s, reach)
                    .into_iter()
                    .filter(|&t| region.norm(t) <= n)
                    .collect();
                out.sort_unstable();
                out
            })
            .collect();
        Dependents { targets }
    }

    pub(crate) fn of(&self, site: u32) -> &[u32] {
        &self.targets[site as usize]
    }
}

/// Window sites within graph distance `reach` of `site`, clipped to the
/// region.
pub(crate) fn within(region: &IndexedRegion, site: u32, reach: u64) -> Vec<u32> {
    let mut seen = vec![site];
    let mut frontier = vec![site];
    for _ in 0..reach {
        let mut next = Vec::new();
        for &s in &frontier {
            for d in 0..2 * region.dim() {
                let w = region.neighbor_raw(s, d);
                if w != NO_SITE && !seen.contains(&w) {
                    seen.push(w);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Truncated bits of all `Lambda_n` sites (other sites read as vacant).
pub(crate) fn lambda_n_bits(
    config: &PointConfiguration,
    marks: &[Mark],
    n: u64,
    radius: f64,
    sweeper: &mut Sweeper,
) -> Result<Vec<bool>> {
    let region = config.window().region();
    (0..region.len() as u32)
        .map(|s| {
            if region.norm(s) <= n {
                sweeper.bit(config, marks, s, radius)
            } else {
                Ok(false)
            }
        })
        .collect()
}

/// Crossing indicator after a local change: only `targets` are recomputed
/// on `config`/`marks`, every other bit is taken from `base`.
pub(crate) fn crossing_after_change(
    config: &PointConfiguration,
    marks: &[Mark],
    base: &[bool],
    base_outcome: bool,
    targets: &[u32],
    n: u64,
    radius: f64,
    sweeper: &mut Sweeper,
) -> Result<bool> {
    let mut changed = Vec::new();
    for &t in targets {
        let b = sweeper.bit(config, marks, t, radius)?;
        if b != base[t as usize] {
            changed.push((t, b));
        }
    }
    if changed.is_empty() {
        return Ok(base_outcome);
    }
    let mut bits = base.to_vec();
    for (t, b) in changed {
        bits[t as usize] = b;
    }
    crossing_from_bits(&mut bits, config.window().region(), n)
}
