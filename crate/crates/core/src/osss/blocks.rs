use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphical::{draw_axis, PointConfiguration, SpaceTimeWindow};
use crate::lattice::{floor_radius, Vertex};
use crate::montecarlo::check_alpha;
use crate::percolation::{crossing_window, truncation_radius};
use crate::rng::ReplicaRng;

const DIVISIBILITY_TOLERANCE: f64 = 1e-9;

/// Block `{vertex} x (-(slot + 1) eps, -slot eps]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockIndex {
    pub vertex: Vertex,
    pub slot: u32,
}

impl BlockIndex {
    pub fn new(vertex: Vertex, slot: u32) -> Self {
        BlockIndex { vertex, slot }
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.vertex, self.slot)
    }
}

/// Discretisation of `Lambda_{n+n^alpha} x (-n^alpha, 0]` into blocks of
/// height `epsilon`.
#[derive(Clone, Debug)]
pub struct BlockPartition {
    pub n: u32,
    pub alpha: f64,
    pub epsilon: f64,
    radius: f64,
    slots: u32,
    window: SpaceTimeWindow,
}

/// Validates `n^alpha / epsilon` as a positive integer and builds the
/// partition of the crossing window at scale `n`.
pub fn partition_blocks(dim: usize, n: u32, alpha: f64, epsilon: f64) -> Result<BlockPartition> {
    check_alpha(alpha, dim)?;
    if n == 0 {
        return Err(Error::Invalid {
            field: "n",
            reason: "must be at least 1".into(),
        });
    }
    let radius = truncation_radius(n, alpha);
    let non_divisible = Error::NonDivisibleEpsilon {
        epsilon,
        horizon: radius,
    };
    if !(epsilon > 0.0) || epsilon > radius * (1.0 + DIVISIBILITY_TOLERANCE) {
        return Err(non_divisible);
    }
    let q = radius / epsilon;
    let slots = q.round();
    if (q - slots).abs() > DIVISIBILITY_TOLERANCE * q.max(1.0) || slots < 1.0 {
        return Err(non_divisible);
    }
    Ok(BlockPartition {
        n,
        alpha,
        epsilon,
        radius,
        slots: slots as u32,
        window: crossing_window(dim, n, alpha)?,
    })
}

impl BlockPartition {
    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// `n^alpha`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }

    /// The crossing window `Lambda_{n+n^alpha} x [-n^alpha, 0]`.
    pub fn window(&self) -> &SpaceTimeWindow {
        &self.window
    }

    pub fn vertices(&self) -> &[Vertex] {
        self.window.region().vertices()
    }

    pub fn len(&self) -> usize {
        self.vertices().len() * self.slots as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All blocks, vertex-major in lexicographic order.
    pub fn blocks(&self) -> impl Iterator<Item = BlockIndex> + '_ {
        self.vertices()
            .iter()
            .flat_map(move |v| (0..self.slots).map(move |j| BlockIndex::new(v.clone(), j)))
    }

    pub fn contains(&self, block: &BlockIndex) -> bool {
        block.slot < self.slots && self.window.region().contains(&block.vertex)
    }

    /// Position of `block` in [`Self::blocks`].
    pub fn id(&self, block: &BlockIndex) -> Option<usize> {
        if block.slot >= self.slots {
            return None;
        }
        let site = self.window.region().site(&block.vertex)?;
        Some(site as usize * self.slots as usize + block.slot as usize)
    }

    /// `(lo, hi]` time interval of `block`.
    pub fn interval(&self, block: &BlockIndex) -> (f64, f64) {
        let hi = if block.slot == 0 {
            0.0
        } else {
            -f64::from(block.slot) * self.epsilon
        };
        let lo = if block.slot + 1 == self.slots {
            -self.radius
        } else {
            -f64::from(block.slot + 1) * self.epsilon
        };
        (lo, hi)
    }

    /// Slot holding time `t` of the window.
    pub fn slot_of(&self, t: f64) -> u32 {
        let j = (-t / self.epsilon).floor();
        (j.max(0.0) as u32).min(self.slots - 1)
    }

    /// `floor(n + n^alpha)`, the radius of the block region.
    pub(crate) fn outer_radius(&self) -> u64 {
        floor_radius(f64::from(self.n) + self.radius)
    }

    pub(crate) fn check_block(&self, block: &BlockIndex) -> Result<()> {
        if self.contains(block) {
            Ok(())
        } else {
            Err(Error::UnknownBlock(block.to_string()))
        }
    }
}

/// Replaces the points of `config` inside `block` by a fresh rate-1 Poisson
/// draw with fresh labels; every other point is kept.
pub fn resample_block(
    config: &PointConfiguration,
    partition: &BlockPartition,
    block: &BlockIndex,
    rng: &mut ReplicaRng,
) -> Result<PointConfiguration> {
    partition.check_block(block)?;
    let (lo, hi) = partition.interval(block);
    let mut fresh = Vec::new();
    draw_axis(&block.vertex, lo, hi, rng, &mut fresh);
    replace_block(config, block, lo, hi, fresh)
}

pub(crate) fn in_block(p: &crate::graphical::SpaceTimePoint, block: &BlockIndex, lo: f64, hi: f64) -> bool {
    p.vertex == block.vertex && p.time > lo && p.time <= hi
}

pub(crate) fn replace_block(
    config: &PointConfiguration,
    block: &BlockIndex,
    lo: f64,
    hi: f64,
    fresh: Vec<crate::graphical::SpaceTimePoint>,
) -> Result<PointConfiguration> {
    let mut points: Vec<_> = config
        .points()
        .iter()
        .filter(|p| !in_block(p, block, lo, hi))
        .cloned()
        .collect();
    points.extend(fresh);
    let out = PointConfiguration::new(config.window().clone(), points)?;
    Ok(match config.seed() {
        Some(s) => out.with_seed(s),
        None => out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphical::sample_points;
    use crate::rng::seed_for;

    #[test]
    fn slot_counts() {
        let p = partition_blocks(2, 4, 0.5, 0.25).unwrap();
        assert_eq!(p.slots(), 8);
        assert_eq!(p.vertices().len(), 85);
        assert_eq!(p.len(), 680);
        assert_eq!(p.blocks().count(), 680);
        let single = partition_blocks(2, 4, 0.5, 2.0).unwrap();
        assert_eq!(single.slots(), 1);
        assert_eq!(single.interval(&BlockIndex::new(Vertex::origin(2), 0)), (-2.0, 0.0));
    }

    #[test]
    fn rejects_non_divisible_epsilon() {
        assert!(matches!(
            partition_blocks(2, 4, 0.5, 0.3),
            Err(Error::NonDivisibleEpsilon { .. })
        ));
        assert!(partition_blocks(2, 4, 0.5, 2.5).is_err());
        assert!(partition_blocks(2, 4, 0.5, 0.0).is_err());
        // 3^0.5 / (3^0.5 / 4) is 4 up to rounding.
        assert_eq!(partition_blocks(2, 3, 0.5, 3f64.sqrt() / 4.0).unwrap().slots(), 4);
    }

    #[test]
    fn intervals_tile_the_horizon() {
        let p = partition_blocks(2, 4, 0.5, 0.25).unwrap();
        let o = Vertex::origin(2);
        let mut hi = 0.0;
        for j in 0..p.slots() {
            let (lo, h) = p.interval(&BlockIndex::new(o.clone(), j));
            assert_eq!(h, hi);
            assert!((h - lo - 0.25).abs() < 1e-12);
            hi = lo;
            assert_eq!(p.slot_of(h), j);
            assert_eq!(p.slot_of((lo + h) / 2.0), j);
        }
        assert_eq!(hi, -2.0);
    }

    #[test]
    fn ids_match_enumeration_order() {
        let p = partition_blocks(2, 2, 0.5, 2f64.sqrt() / 2.0).unwrap();
        for (i, b) in p.blocks().enumerate() {
            assert_eq!(p.id(&b), Some(i));
        }
        assert_eq!(p.id(&BlockIndex::new(Vertex::new(vec![9, 9]), 0)), None);
    }

    #[test]
    fn resampling_is_local() {
        let p = partition_blocks(2, 4, 0.5, 0.25).unwrap();
        let config = sample_points(p.window(), &mut seed_for(1, 0).rng());
        let block = BlockIndex::new(Vertex::new(vec![1, 0]), 3);
        let (lo, hi) = p.interval(&block);
        let out = resample_block(&config, &p, &block, &mut seed_for(1, 1).rng()).unwrap();
        let outside = |c: &PointConfiguration| -> Vec<_> {
            c.points()
                .iter()
                .filter(|q| !in_block(q, &block, lo, hi))
                .map(|q| (q.vertex.clone(), q.time.to_bits(), q.uniform.to_bits()))
                .collect()
        };
        assert_eq!(outside(&config), outside(&out));
        let bad = BlockIndex::new(Vertex::new(vec![7, 0]), 0);
        assert!(matches!(
            resample_block(&config, &p, &bad, &mut seed_for(1, 1).rng()),
            Err(Error::UnknownBlock(_))
        ));
    }

    #[test]
    fn empty_block_with_empty_draw_is_unchanged() {
        let p = partition_blocks(2, 4, 0.5, 0.25).unwrap();
        let config = sample_points(p.window(), &mut seed_for(2, 0).rng());
        let block = BlockIndex::new(Vertex::origin(2), 0);
        let (lo, hi) = p.interval(&block);
        let emptied = replace_block(&config, &block, lo, hi, Vec::new()).unwrap();
        let again = replace_block(&emptied, &block, lo, hi, Vec::new()).unwrap();
        let key = |c: &PointConfiguration| -> Vec<_> {
            c.points().iter().map(|q| (q.vertex.clone(), q.time.to_bits())).collect()
        };
        assert_eq!(key(&emptied), key(&again));
    }
}
