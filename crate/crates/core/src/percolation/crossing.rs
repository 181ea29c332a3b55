use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graphical::{Mark, PointConfiguration, SpaceTimeWindow, Sweeper};
use crate::lattice::region::NO_SITE;
use crate::lattice::{Direction, IndexedRegion, Vertex};

/// `n^alpha`.
pub fn truncation_radius(n: u32, alpha: f64) -> f64 {
    f64::from(n).powf(alpha)
}

/// Smallest window on which the crossing event at scale `n` is defined:
/// `ball(0, n + n^alpha) x [-n^alpha, 0]`.
pub fn crossing_window(dim: usize, n: u32, alpha: f64) -> Result<SpaceTimeWindow> {
    let r = truncation_radius(n, alpha);
    SpaceTimeWindow::ball(&Vertex::origin(dim), f64::from(n) + r, r)
}

/// Occupancy lookup by window site.
pub(crate) trait SiteBits {
    fn bit(&mut self, site: u32) -> Result<bool>;
}

const UNKNOWN: u8 = 0;
const OCCUPIED: u8 = 1;
const VACANT: u8 = 2;

/// Truncated field evaluated on demand and memoised per site.
pub(crate) struct LazyField<'a> {
    config: &'a PointConfiguration,
    marks: &'a [Mark],
    radius: f64,
    memo: Vec<u8>,
    sweeper: Sweeper,
}

impl<'a> LazyField<'a> {
    pub(crate) fn new(config: &'a PointConfiguration, marks: &'a [Mark], radius: f64) -> Self {
        LazyField {
            config,
            marks,
            radius,
            memo: vec![UNKNOWN; config.window().region().len()],
            sweeper: Sweeper::new(),
        }
    }
}

impl SiteBits for LazyField<'_> {
    fn bit(&mut self, site: u32) -> Result<bool> {
        match self.memo[site as usize] {
            OCCUPIED => Ok(true),
            VACANT => Ok(false),
            _ => {
                let b = self.sweeper.bit(self.config, self.marks, site, self.radius)?;
                self.memo[site as usize] = if b { OCCUPIED } else { VACANT };
                Ok(b)
            }
        }
    }
}

impl SiteBits for Vec<bool> {
    fn bit(&mut self, site: u32) -> Result<bool> {
        Ok(self[site as usize])
    }
}

fn origin_site(region: &IndexedRegion) -> Result<u32> {
    let o = Vertex::origin(region.dim());
    region.site(&o).ok_or(Error::OutsideRegion(o))
}

/// `0 <-> dLambda_n` through occupied sites of `Lambda_n`. Stops at the first
/// occupied site of the sphere reached from the origin.
pub(crate) fn crossing_from_bits(bits: &mut impl SiteBits, region: &IndexedRegion, n: u64) -> Result<bool> {
    let origin = origin_site(region)?;
    if !bits.bit(origin)? {
        return Ok(false);
    }
    if n == 0 {
        return Ok(true);
    }
    let mut seen = vec![false; region.len()];
    seen[origin as usize] = true;
    let mut queue = VecDeque::from([origin]);
    let dirs: Vec<usize> = Direction::lexicographic(region.dim()).map(Direction::index).collect();
    while let Some(site) = queue.pop_front() {
        for &d in &dirs {
            let next = region.neighbor_raw(site, d);
            if next == NO_SITE || seen[next as usize] || region.norm(next) > n {
                continue;
            }
            seen[next as usize] = true;
            if bits.bit(next)? {
                if region.norm(next) == n {
                    return Ok(true);
                }
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

/// Size of the occupied cluster of the origin inside `Lambda_box` and
/// whether it reaches the sphere `d(0, .) = box_radius`.
pub(crate) fn cluster_stats(bits: &mut impl SiteBits, region: &IndexedRegion, box_radius: u64) -> Result<(usize, bool)> {
    let origin = origin_site(region)?;
    if !bits.bit(origin)? {
        return Ok((0, false));
    }
    let mut seen = vec![false; region.len()];
    seen[origin as usize] = true;
    let mut queue = VecDeque::from([origin]);
    let mut size = 1;
    let mut touches = box_radius == 0;
    while let Some(site) = queue.pop_front() {
        for d in 0..2 * region.dim() {
            let next = region.neighbor_raw(site, d);
            if next == NO_SITE || seen[next as usize] || region.norm(next) > box_radius {
                continue;
            }
            seen[next as usize] = true;
            if bits.bit(next)? {
                size += 1;
                touches |= region.norm(next) == box_radius;
                queue.push_back(next);
            }
        }
    }
    Ok((size, touches))
}

/// Indicator of `0 <-> dLambda_n` through `{v in Lambda_n : sigma_v = 1}`
/// for the field truncated at `radius`, given precomputed marks.
pub(crate) fn crossing_with_marks(
    config: &PointConfiguration,
    marks: &[Mark],
    n: u32,
    radius: f64,
) -> Result<bool> {
    let mut field = LazyField::new(config, marks, radius);
    crossing_from_bits(&mut field, config.window().region(), u64::from(n))
}

/// Indicator of the crossing event `0 <-> dLambda_n` through the field
/// truncated at `radius`, evaluated lazily along the exploration.
pub fn crossing_indicator(config: &PointConfiguration, lambda: f64, n: u32, radius: f64) -> Result<bool> {
    let marks = config.marks(lambda)?;
    crossing_with_marks(config, &marks, n, radius)
}
