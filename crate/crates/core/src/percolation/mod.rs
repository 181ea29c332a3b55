//! Clusters, connection events and Monte Carlo observables of the occupied
//! set.

mod crossing;
mod estimators;

pub use crossing::{crossing_indicator, crossing_window, truncation_radius};
pub(crate) use crossing::{crossing_from_bits, crossing_with_marks, LazyField, SiteBits};
pub use estimators::{
    cluster_size_tail, estimate_s, estimate_theta, estimate_theta_curve, theta_indicator,
    theta_matrix, truncation_gap_at_radii, truncation_gap_curve, GapCurve, TailResult, ThetaCurve,
};

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graphical::OccupiedField;
use crate::lattice::Vertex;

/// Occupied vertices reachable from the sources inside an exploration
/// region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    /// Lexicographically sorted.
    pub members: Vec<Vertex>,
    /// One flag per target set passed to [`cluster_touching`].
    pub touched_targets: Vec<bool>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.members.binary_search(v).is_ok()
    }

    pub fn touches(&self, set: &[Vertex]) -> bool {
        set.iter().any(|v| self.contains(v))
    }
}

/// Union of the occupied components (nearest-neighbour paths through
/// occupied vertices of `region`) that contain an occupied source.
/// Breadth-first with a lexicographically ordered queue; empty when no
/// source is occupied.
pub fn cluster_of(field: &OccupiedField, sources: &[Vertex], region: &[Vertex]) -> Result<Cluster> {
    cluster_touching(field, sources, region, &[])
}

/// [`cluster_of`] plus a record of which `targets` the cluster meets.
pub fn cluster_touching(
    field: &OccupiedField,
    sources: &[Vertex],
    region: &[Vertex],
    targets: &[&[Vertex]],
) -> Result<Cluster> {
    let region: BTreeSet<&Vertex> = region.iter().collect();
    if let Some(s) = sources.iter().find(|s| !region.contains(s)) {
        return Err(Error::OutsideRegion((*s).clone()));
    }
    let members = explore(field, sources, &region);
    let touched_targets = targets
        .iter()
        .map(|t| t.iter().any(|v| members.contains(v)))
        .collect();
    Ok(Cluster {
        members: members.into_iter().collect(),
        touched_targets,
    })
}

fn explore(field: &OccupiedField, sources: &[Vertex], region: &BTreeSet<&Vertex>) -> BTreeSet<Vertex> {
    let mut seeds: Vec<&Vertex> = sources
        .iter()
        .filter(|s| region.contains(s) && field.occupied(s))
        .collect();
    seeds.sort();
    seeds.dedup();
    let mut seen: BTreeSet<Vertex> = seeds.iter().map(|&v| v.clone()).collect();
    let mut queue: VecDeque<Vertex> = seeds.into_iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for w in v.neighbors() {
            if !seen.contains(&w) && region.contains(&w) && field.occupied(&w) {
                seen.insert(w.clone());
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Whether an occupied path inside `region` joins an occupied vertex of
/// `set_a` to one of `set_b`. Vertices outside `region` are ignored.
pub fn connects(field: &OccupiedField, set_a: &[Vertex], set_b: &[Vertex], region: &[Vertex]) -> bool {
    let region: BTreeSet<&Vertex> = region.iter().collect();
    let members = explore(field, set_a, &region);
    set_b.iter().any(|v| members.contains(v))
}
