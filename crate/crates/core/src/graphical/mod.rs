//! Marked Poisson point process on a finite space-time window and the
//! reachability structure it induces.
//!
//! Time runs in the rescaled clock where every vertex axis carries a rate-1
//! Poisson process. Each point holds a uniform label `U` and a direction
//! label `rho`; the infection parameter only enters when a point's mark is
//! read off through [`mark_at`]: a star if `U <= 1/(2 d lambda + 1)`, the
//! arrow `rho` otherwise. Sharing one labelled configuration across several
//! lambdas therefore gives the monotone coupling for free.

mod dump;
mod sweep;

pub use sweep::{active_path_exists, coupled_fields, truncated_field};
pub(crate) use sweep::{check_lambdas, Sweeper};

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Direction, IndexedRegion, Vertex};
use crate::rng::{ReplicaRng, StreamSeed};

/// One Poisson event with its coupling labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub vertex: Vertex,
    pub time: f64,
    pub uniform: f64,
    pub direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mark {
    Star,
    Arrow(Direction),
}

impl Mark {
    pub fn is_star(self) -> bool {
        matches!(self, Mark::Star)
    }

    /// Star <-> Arrow(rho) swap of a point with direction label `rho`.
    pub fn flipped(self, rho: Direction) -> Mark {
        match self {
            Mark::Star => Mark::Arrow(rho),
            Mark::Arrow(_) => Mark::Star,
        }
    }
}

/// Healing threshold `1/(2 d lambda + 1)`.
pub fn star_threshold(dim: usize, lambda: f64) -> f64 {
    1.0 / (2.0 * dim as f64 * lambda + 1.0)
}

pub fn mark_at(point: &SpaceTimePoint, lambda: f64) -> Result<Mark> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let dim = point.vertex.dim();
    if point.direction.axis() >= dim {
        return Err(Error::DimensionMismatch {
            left: point.direction.axis() + 1,
            right: dim,
        });
    }
    Ok(if point.uniform <= star_threshold(dim, lambda) {
        Mark::Star
    } else {
        Mark::Arrow(point.direction)
    })
}

/// `vertex_region x [time_floor, 0]`.
#[derive(Clone, Debug)]
pub struct SpaceTimeWindow {
    region: Arc<IndexedRegion>,
    time_floor: f64,
}

impl SpaceTimeWindow {
    pub fn new(dim: usize, vertices: Vec<Vertex>, time_floor: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        if let Some(v) = vertices.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: v.dim(),
                right: dim,
            });
        }
        if vertices.is_empty() {
            return Err(Error::Invalid {
                field: "window",
                reason: "empty vertex region".into(),
            });
        }
        if !(time_floor <= 0.0) {
            return Err(Error::Invalid {
                field: "time_floor",
                reason: format!("must be <= 0, got {time_floor}"),
            });
        }
        Ok(SpaceTimeWindow {
            region: Arc::new(IndexedRegion::new(dim, vertices)),
            time_floor,
        })
    }

    /// `ball(center, radius) x [-height, 0]`.
    pub fn ball(center: &Vertex, radius: f64, height: f64) -> Result<Self> {
        Self::new(
            center.dim(),
            crate::lattice::ball_vertices(center, radius),
            -height,
        )
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn region(&self) -> &IndexedRegion {
        &self.region
    }

    pub fn time_floor(&self) -> f64 {
        self.time_floor
    }

    pub fn contains(&self, v: &Vertex, t: f64) -> bool {
        t >= self.time_floor && t <= 0.0 && self.region.contains(v)
    }
}

/// All points of one realization inside a window, sorted by (time, vertex).
#[derive(Clone, Debug)]
pub struct PointConfiguration {
    window: SpaceTimeWindow,
    points: Vec<SpaceTimePoint>,
    sites: Vec<u32>,
    /// Point indices per site, increasing in time.
    by_site: Vec<Vec<u32>>,
    seed: Option<StreamSeed>,
}

impl PointConfiguration {
    pub fn new(window: SpaceTimeWindow, mut points: Vec<SpaceTimePoint>) -> Result<Self> {
        let dim = window.dim();
        for p in &points {
            if p.vertex.dim() != dim || p.direction.axis() >= dim {
                return Err(Error::DimensionMismatch {
                    left: p.vertex.dim(),
                    right: dim,
                });
            }
            if !window.contains(&p.vertex, p.time) {
                return Err(Error::Invalid {
                    field: "points",
                    reason: format!("({:?}, {}) outside the window", p.vertex, p.time),
                });
            }
            if !(0.0..=1.0).contains(&p.uniform) {
                return Err(Error::Invalid {
                    field: "points",
                    reason: format!("uniform label {} outside [0, 1]", p.uniform),
                });
            }
        }
        points.sort_by(|a, b| a.time.total_cmp(&b.time).then_with(|| a.vertex.cmp(&b.vertex)));
        let region = window.region();
        let sites: Vec<u32> = points
            .iter()
            .map(|p| region.site(&p.vertex).expect("checked above"))
            .collect();
        let mut by_site = vec![Vec::new(); region.len()];
        for (i, &s) in sites.iter().enumerate() {
            by_site[s as usize].push(i as u32);
        }
        Ok(PointConfiguration {
            window,
            points,
            sites,
            by_site,
            seed: None,
        })
    }

    pub fn empty(window: SpaceTimeWindow) -> Self {
        Self::new(window, Vec::new()).expect("empty configuration is valid")
    }

    pub fn with_seed(mut self, seed: StreamSeed) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn window(&self) -> &SpaceTimeWindow {
        &self.window
    }

    pub fn points(&self) -> &[SpaceTimePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> Option<StreamSeed> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub(crate) fn site_of(&self, point: usize) -> u32 {
        self.sites[point]
    }

    pub(crate) fn points_at(&self, site: u32) -> &[u32] {
        &self.by_site[site as usize]
    }

    /// Marks of all points at `lambda`, indexed like [`Self::points`].
    pub fn marks(&self, lambda: f64) -> Result<Vec<Mark>> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::NonPositiveLambda(lambda));
        }
        let threshold = star_threshold(self.dim(), lambda);
        Ok(self
            .points
            .iter()
            .map(|p| {
                if p.uniform <= threshold {
                    Mark::Star
                } else {
                    Mark::Arrow(p.direction)
                }
            })
            .collect())
    }

    /// Number of points on each vertex axis, in site order.
    pub fn counts_per_axis(&self) -> Vec<usize> {
        self.by_site.iter().map(Vec::len).collect()
    }
}

/// Draws one labelled point at a uniform time in `(lo, hi]`.
pub(crate) fn draw_point(vertex: &Vertex, lo: f64, hi: f64, rng: &mut ReplicaRng) -> SpaceTimePoint {
    let dim = vertex.dim();
    // random::<f64>() is in [0, 1); map to (lo, hi].
    let time = hi - rng.random::<f64>() * (hi - lo);
    let uniform = rng.random::<f64>();
    let direction = Direction(rng.random_range(0..2 * dim) as u8);
    SpaceTimePoint {
        vertex: vertex.clone(),
        time,
        uniform,
        direction,
    }
}

/// Points of independent rate-1 Poisson processes on each axis of `vertex`
/// over `(lo, hi]`.
pub(crate) fn draw_axis(
    vertex: &Vertex,
    lo: f64,
    hi: f64,
    rng: &mut ReplicaRng,
    out: &mut Vec<SpaceTimePoint>,
) {
    let length = hi - lo;
    if length <= 0.0 {
        return;
    }
    let count: f64 = Poisson::new(length)
        .expect("positive Poisson mean")
        .sample(rng);
    for _ in 0..count as u64 {
        out.push(draw_point(vertex, lo, hi, rng));
    }
}

/// Samples an independent rate-1 Poisson process on every axis of the
/// window with independent `U ~ Uniform[0,1]` and uniform directions.
/// Axes are drawn in lexicographic vertex order.
pub fn sample_points(window: &SpaceTimeWindow, rng: &mut ReplicaRng) -> PointConfiguration {
    let mut points = Vec::new();
    for v in window.region().vertices() {
        draw_axis(v, window.time_floor(), 0.0, rng, &mut points);
    }
    PointConfiguration::new(window.clone(), points).expect("sampled points lie in the window")
}

/// Anything that can produce a configuration for a replica. Estimators are
/// generic over it so that fixtures can replace the Poisson sampler.
pub trait ConfigSource: Sync {
    fn sample(&self, window: &SpaceTimeWindow, rng: &mut ReplicaRng) -> PointConfiguration;
}

/// The rate-1 Poisson sampler of [`sample_points`].
#[derive(Clone, Copy, Debug, Default)]
pub struct PoissonSource;

impl ConfigSource for PoissonSource {
    fn sample(&self, window: &SpaceTimeWindow, rng: &mut ReplicaRng) -> PointConfiguration {
        sample_points(window, rng)
    }
}

/// Provenance recorded with every occupancy field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub lambda: f64,
    pub truncation_radius: f64,
    pub seed: Option<StreamSeed>,
}

/// Occupancy bits on a finite vertex set, stored in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupiedField {
    region: Vec<Vertex>,
    bits: Vec<bool>,
    pub provenance: Provenance,
}

impl OccupiedField {
    /// Builds a field from `(vertex, bit)` pairs in any order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Vertex, bool)>, provenance: Provenance) -> Self {
        let mut pairs: Vec<(Vertex, bool)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (region, bits) = pairs.into_iter().unzip();
        OccupiedField {
            region,
            bits,
            provenance,
        }
    }

    /// Same value on every vertex of `region`.
    pub fn constant(region: Vec<Vertex>, bit: bool) -> Self {
        Self::from_pairs(
            region.into_iter().map(|v| (v, bit)),
            Provenance {
                lambda: f64::NAN,
                truncation_radius: f64::NAN,
                seed: None,
            },
        )
    }

    pub fn region(&self) -> &[Vertex] {
        &self.region
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, v: &Vertex) -> Option<bool> {
        self.region.binary_search(v).ok().map(|i| self.bits[i])
    }

    /// True when `v` is in the region and occupied.
    pub fn occupied(&self, v: &Vertex) -> bool {
        self.get(v).unwrap_or(false)
    }

    pub fn set(&mut self, v: &Vertex, bit: bool) -> bool {
        match self.region.binary_search(v) {
            Ok(i) => {
                self.bits[i] = bit;
                true
            }
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vertex, bool)> {
        self.region.iter().zip(self.bits.iter().copied())
    }

    /// Pointwise `self <= other` on the common region.
    pub fn dominated_by(&self, other: &OccupiedField) -> bool {
        self.iter()
            .all(|(v, b)| !b || other.get(v).unwrap_or(true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ball_vertices;
    use crate::rng::seed_for;

    fn pt(c: &[i32], time: f64, uniform: f64, dir: Direction) -> SpaceTimePoint {
        SpaceTimePoint {
            vertex: Vertex::new(c.to_vec()),
            time,
            uniform,
            direction: dir,
        }
    }

    #[test]
    fn mark_examples() {
        let e1 = Direction::new(0, true);
        assert_eq!(mark_at(&pt(&[0, 0], -1.0, 0.1, e1), 1.0).unwrap(), Mark::Star);
        assert_eq!(mark_at(&pt(&[0, 0], -1.0, 0.5, e1), 1.0).unwrap(), Mark::Arrow(e1));
        assert_eq!(mark_at(&pt(&[0, 0], -1.0, 1.0 / 3.0, e1), 0.5).unwrap(), Mark::Star);
        assert!(matches!(
            mark_at(&pt(&[0, 0], -1.0, 0.5, e1), 0.0),
            Err(Error::NonPositiveLambda(_))
        ));
        assert!(mark_at(&pt(&[0, 0], -1.0, 0.5, Direction::new(2, true)), 1.0).is_err());
    }

    #[test]
    fn zero_height_window_has_no_points() {
        let w = SpaceTimeWindow::ball(&Vertex::origin(2), 2.0, 0.0).unwrap();
        let c = sample_points(&w, &mut seed_for(1, 0).rng());
        assert!(c.is_empty());
    }

    #[test]
    fn sampled_points_are_sorted_and_inside() {
        let w = SpaceTimeWindow::ball(&Vertex::origin(2), 2.0, 10.0).unwrap();
        let c = sample_points(&w, &mut seed_for(1, 0).rng());
        assert!(c.points().windows(2).all(|p| p[0].time <= p[1].time));
        assert!(c.points().iter().all(|p| w.contains(&p.vertex, p.time)));
        // 130 expected; a generous band
        assert!((60..220).contains(&c.len()), "{}", c.len());
    }

    #[test]
    fn mean_total_count_matches_axis_count_times_length() {
        let w = SpaceTimeWindow::ball(&Vertex::origin(2), 2.0, 10.0).unwrap();
        let reps = 2000u64;
        let total: usize = (0..reps)
            .map(|i| sample_points(&w, &mut seed_for(9, i).rng()).len())
            .sum();
        let mean = total as f64 / reps as f64;
        // sd of the mean = sqrt(130 / 2000) ~ 0.25
        assert!((mean - 130.0).abs() < 1.5, "{mean}");
    }

    #[test]
    fn configuration_rejects_points_outside() {
        let w = SpaceTimeWindow::new(2, ball_vertices(&Vertex::origin(2), 1.0), -1.0).unwrap();
        let e1 = Direction::new(0, true);
        assert!(PointConfiguration::new(w.clone(), vec![pt(&[0, 0], -2.0, 0.5, e1)]).is_err());
        assert!(PointConfiguration::new(w.clone(), vec![pt(&[3, 0], -0.5, 0.5, e1)]).is_err());
        assert!(PointConfiguration::new(w, vec![pt(&[1, 0], -0.5, 0.5, e1)]).is_ok());
    }

    #[test]
    fn marks_are_monotone_in_lambda() {
        let w = SpaceTimeWindow::ball(&Vertex::origin(2), 3.0, 4.0).unwrap();
        let c = sample_points(&w, &mut seed_for(5, 3).rng());
        let lo = c.marks(0.3).unwrap();
        let hi = c.marks(1.7).unwrap();
        for (a, b) in lo.iter().zip(&hi) {
            assert!(!(b.is_star() && !a.is_star()));
        }
    }

    #[test]
    fn field_lookup_and_domination() {
        let region = ball_vertices(&Vertex::origin(2), 1.0);
        let ones = OccupiedField::constant(region.clone(), true);
        let zeros = OccupiedField::constant(region, false);
        assert!(zeros.dominated_by(&ones));
        assert!(!ones.dominated_by(&zeros));
        assert_eq!(ones.get(&Vertex::new(vec![5, 5])), None);
    }
}
