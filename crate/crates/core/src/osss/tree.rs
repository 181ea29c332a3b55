use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphical::{Mark, PointConfiguration};
use crate::lattice::region::NO_SITE;
use crate::lattice::{floor_radius, Direction, Vertex};
use crate::percolation::{LazyField, SiteBits};

use super::blocks::{BlockIndex, BlockPartition};
use super::within;

/// Result of `Determine(v)`: the truncated bit of `v` and the vertex axes
/// whose blocks were revealed (all slots of each).
#[derive(Clone, Debug, PartialEq)]
pub struct Determination {
    pub bit: bool,
    /// Lexicographically sorted.
    pub revealed: Vec<Vertex>,
    slots: u32,
}

impl Determination {
    pub fn revealed_blocks(&self) -> Vec<BlockIndex> {
        expand(&self.revealed, self.slots)
    }
}

fn expand(vertices: &[Vertex], slots: u32) -> Vec<BlockIndex> {
    vertices
        .iter()
        .flat_map(|v| (0..slots).map(move |j| BlockIndex::new(v.clone(), j)))
        .collect()
}

fn site_of(config: &PointConfiguration, v: &Vertex, radius: f64) -> Result<u32> {
    config
        .window()
        .region()
        .site(v)
        .ok_or_else(|| Error::WindowTooSmall {
            vertex: v.clone(),
            needed_floor: -radius,
        })
}

/// Truncated bit of `v` at radius `n^alpha` together with every partition
/// block within distance `n^alpha` of `v`.
pub fn determine(
    partition: &BlockPartition,
    config: &PointConfiguration,
    lambda: f64,
    v: &Vertex,
) -> Result<Determination> {
    let marks = config.marks(lambda)?;
    let site = site_of(config, v, partition.radius())?;
    let mut field = LazyField::new(config, &marks, partition.radius());
    let bit = field.bit(site)?;
    let region = config.window().region();
    let outer = partition.outer_radius();
    let mut revealed: Vec<Vertex> = within(region, site, floor_radius(partition.radius()))
        .into_iter()
        .filter(|&s| region.norm(s) <= outer)
        .map(|s| region.vertex(s).clone())
        .collect();
    revealed.sort();
    Ok(Determination {
        bit,
        revealed,
        slots: partition.slots(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaltReason {
    FoundCrossing,
    ClusterExhausted,
}

/// Full record of one run of `T_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTreeTrace {
    pub k: u32,
    /// In the order `Determine` was called.
    pub determined_vertices: Vec<Vertex>,
    /// Revealed block count after each `Determine` call.
    pub revealed_counts: Vec<usize>,
    /// Vertices whose axes were revealed, lexicographically sorted.
    pub revealed_vertices: Vec<Vertex>,
    pub slots: u32,
    pub outcome: bool,
    pub halt_reason: HaltReason,
}

impl DecisionTreeTrace {
    pub fn revealed_blocks(&self) -> Vec<BlockIndex> {
        expand(&self.revealed_vertices, self.slots)
    }

    pub fn reveals(&self, block: &BlockIndex) -> bool {
        block.slot < self.slots && self.revealed_vertices.binary_search(&block.vertex).is_ok()
    }

    /// Header line, then `vertex cumulative_blocks` per `Determine` call.
    pub fn dump(&self) -> String {
        let halt = match self.halt_reason {
            HaltReason::FoundCrossing => "found-crossing",
            HaltReason::ClusterExhausted => "cluster-exhausted",
        };
        let mut out = format!("# k={} outcome={} halt={}\n", self.k, u8::from(self.outcome), halt);
        for (v, c) in self.determined_vertices.iter().zip(&self.revealed_counts) {
            let _ = writeln!(out, "{v} {c}");
        }
        out
    }
}

/// Site-level output of the tree, indexed by window site.
pub(crate) struct TreeRun {
    pub(crate) outcome: bool,
    pub(crate) halt: HaltReason,
    pub(crate) determined: Vec<u32>,
    pub(crate) revealed_counts: Vec<usize>,
    pub(crate) revealed: Vec<bool>,
}

struct Components {
    parent: Vec<u32>,
    has_origin: Vec<bool>,
    has_boundary: Vec<bool>,
}

impl Components {
    fn new(len: usize) -> Self {
        Components {
            parent: (0..len as u32).collect(),
            has_origin: vec![false; len],
            has_boundary: vec![false; len],
        }
    }

    fn find(&mut self, mut s: u32) -> u32 {
        while self.parent[s as usize] != s {
            let p = self.parent[s as usize];
            self.parent[s as usize] = self.parent[p as usize];
            s = p;
        }
        s
    }

    /// Merges and reports whether the merged component holds both flags.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb as usize] = ra;
            self.has_origin[ra as usize] |= self.has_origin[rb as usize];
            self.has_boundary[ra as usize] |= self.has_boundary[rb as usize];
        }
        self.has_origin[ra as usize] && self.has_boundary[ra as usize]
    }
}

pub(crate) fn check_k(k: u32, n: u32) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    Ok(())
}

/// `T_k` on window sites: Determine on `dLambda_k` in lexicographic order,
/// then FIFO over occupied determined vertices, each determining its
/// undetermined `Lambda_n` neighbours in lexicographic direction order.
pub(crate) fn run_tree(
    partition: &BlockPartition,
    config: &PointConfiguration,
    bits: &mut impl SiteBits,
    k: u32,
) -> Result<TreeRun> {
    check_k(k, partition.n)?;
    let region = config.window().region();
    let n = u64::from(partition.n);
    let outer = partition.outer_radius();
    let reach = floor_radius(partition.radius());
    let len = region.len();
    let origin = region
        .site(&Vertex::origin(region.dim()))
        .ok_or_else(|| Error::OutsideRegion(Vertex::origin(region.dim())))?;

    let mut determined = vec![false; len];
    let mut occupied = vec![false; len];
    let mut revealed = vec![false; len];
    let mut revealed_axes = 0usize;
    let mut run = TreeRun {
        outcome: false,
        halt: HaltReason::ClusterExhausted,
        determined: Vec::new(),
        revealed_counts: Vec::new(),
        revealed: Vec::new(),
    };
    let mut comps = Components::new(len);
    let mut queue = VecDeque::new();
    let dirs: Vec<usize> = Direction::lexicographic(region.dim()).map(Direction::index).collect();

    // Returns true when the crossing has been found.
    let mut call = |s: u32,
                    determined: &mut Vec<bool>,
                    occupied: &mut Vec<bool>,
                    queue: &mut VecDeque<u32>,
                    run: &mut TreeRun|
     -> Result<bool> {
        determined[s as usize] = true;
        for w in within(region, s, reach) {
            if region.norm(w) <= outer && !revealed[w as usize] {
                revealed[w as usize] = true;
                revealed_axes += 1;
            }
        }
        run.determined.push(s);
        run.revealed_counts.push(revealed_axes * partition.slots() as usize);
        if !bits.bit(s)? {
            return Ok(false);
        }
        occupied[s as usize] = true;
        comps.has_origin[s as usize] = s == origin;
        comps.has_boundary[s as usize] = region.norm(s) == n;
        let mut found = comps.has_origin[s as usize] && comps.has_boundary[s as usize];
        for d in 0..2 * region.dim() {
            let w = region.neighbor_raw(s, d);
            if w != NO_SITE && occupied[w as usize] && region.norm(w) <= n {
                found |= comps.union(s, w);
            }
        }
        queue.push_back(s);
        Ok(found)
    };

    let sphere: Vec<u32> = (0..len as u32).filter(|&s| region.norm(s) == u64::from(k)).collect();
    let mut found = false;
    for s in sphere {
        if call(s, &mut determined, &mut occupied, &mut queue, &mut run)? {
            found = true;
            break;
        }
    }
    while !found {
        let Some(u) = queue.pop_front() else { break };
        for &d in &dirs {
            let w = region.neighbor_raw(u, d);
            if w == NO_SITE || determined[w as usize] || region.norm(w) > n {
                continue;
            }
            if call(w, &mut determined, &mut occupied, &mut queue, &mut run)? {
                found = true;
                break;
            }
        }
    }
    if found {
        run.outcome = true;
        run.halt = HaltReason::FoundCrossing;
    }
    run.revealed = revealed;
    Ok(run)
}

pub(crate) fn trace_from_run(
    partition: &BlockPartition,
    config: &PointConfiguration,
    k: u32,
    run: TreeRun,
) -> DecisionTreeTrace {
    let region = config.window().region();
    DecisionTreeTrace {
        k,
        determined_vertices: run.determined.iter().map(|&s| region.vertex(s).clone()).collect(),
        revealed_counts: run.revealed_counts,
        // Sites are numbered in lexicographic vertex order.
        revealed_vertices: (0..region.len() as u32)
            .filter(|&s| run.revealed[s as usize])
            .map(|s| region.vertex(s).clone())
            .collect(),
        slots: partition.slots(),
        outcome: run.outcome,
        halt_reason: run.halt,
    }
}

/// Runs the decision tree `T_k` for the crossing event at scale
/// `partition.n` on `config` at `lambda`.
pub fn run_decision_tree(
    partition: &BlockPartition,
    config: &PointConfiguration,
    lambda: f64,
    k: u32,
) -> Result<DecisionTreeTrace> {
    let marks: Vec<Mark> = config.marks(lambda)?;
    let mut field = LazyField::new(config, &marks, partition.radius());
    let run = run_tree(partition, config, &mut field, k)?;
    Ok(trace_from_run(partition, config, k, run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphical::sample_points;
    use crate::osss::partition_blocks;
    use crate::percolation::crossing_indicator;
    use crate::rng::seed_for;

    fn partition() -> BlockPartition {
        partition_blocks(2, 4, 0.5, 0.25).unwrap()
    }

    /// One point per axis at time -0.5 with the given label.
    fn fixture(p: &BlockPartition, uniform: f64) -> PointConfiguration {
        let points = p
            .vertices()
            .iter()
            .map(|v| crate::graphical::SpaceTimePoint {
                vertex: v.clone(),
                time: -0.5,
                uniform,
                direction: Direction(0),
            })
            .collect();
        PointConfiguration::new(p.window().clone(), points).unwrap()
    }

    #[test]
    fn determine_reveals_the_local_ball() {
        let p = partition();
        let config = fixture(&p, 1.0);
        let d = determine(&p, &config, 1.0, &Vertex::origin(2)).unwrap();
        assert!(d.bit);
        assert_eq!(d.revealed.len(), 13);
        assert_eq!(d.revealed_blocks().len(), 104);
        let edge = determine(&p, &config, 1.0, &Vertex::new(vec![4, 0])).unwrap();
        assert_eq!(edge.revealed.len(), 13);
        assert!(edge.revealed_blocks().iter().all(|b| p.contains(b)));
    }

    #[test]
    fn determine_outside_window_fails() {
        let p = partition();
        let config = fixture(&p, 1.0);
        assert!(matches!(
            determine(&p, &config, 1.0, &Vertex::new(vec![6, 0])),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn all_occupied_and_all_vacant_fixtures() {
        let p = partition();
        let arrows = fixture(&p, 1.0);
        let stars = fixture(&p, 0.0);
        for k in 1..=4 {
            let t = run_decision_tree(&p, &arrows, 1.0, k).unwrap();
            assert!(t.outcome);
            assert_eq!(t.halt_reason, HaltReason::FoundCrossing);
            let t = run_decision_tree(&p, &stars, 1.0, k).unwrap();
            assert!(!t.outcome);
            assert_eq!(t.halt_reason, HaltReason::ClusterExhausted);
            assert_eq!(t.determined_vertices.len(), 4 * k as usize);
            assert!(t.determined_vertices.iter().all(|v| v.norm() == u64::from(k)));
            assert!(t.determined_vertices.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(run_decision_tree(&p, &arrows, 1.0, 0).is_err());
        assert!(run_decision_tree(&p, &arrows, 1.0, 5).is_err());
    }

    #[test]
    fn outcome_matches_full_reveal() {
        let p = partition();
        for i in 0..100 {
            let config = sample_points(p.window(), &mut seed_for(11, i).rng());
            let truth = crossing_indicator(&config, 0.6, 4, 2.0).unwrap();
            for k in 1..=4 {
                let t = run_decision_tree(&p, &config, 0.6, k).unwrap();
                assert_eq!(t.outcome, truth);
                assert_eq!(*t.revealed_counts.last().unwrap(), t.revealed_blocks().len());
                assert!(t.revealed_counts.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn dump_lists_determined_vertices() {
        let p = partition();
        let t = run_decision_tree(&p, &fixture(&p, 0.0), 1.0, 1).unwrap();
        let dump = t.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines[0], "# k=1 outcome=0 halt=cluster-exhausted");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "-1,0 104");
    }
}
