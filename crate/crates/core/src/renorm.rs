//! Block events, good vertices and the independence structure of the
//! renormalization step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphical::{ConfigSource, OccupiedField, PointConfiguration, SpaceTimeWindow};
use crate::lattice::region::NO_SITE;
use crate::lattice::{ball_size, ball_vertices, graph_distance, IndexedRegion, Vertex};
use crate::montecarlo::{check_alpha, MonteCarlo};
use crate::percolation::{cluster_of, truncation_radius, LazyField, SiteBits};
use crate::stats::Estimate;

/// Block `v` at side `N`: physical centre `vN`, inner radius `dN/2`, outer
/// radius `dN`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    pub side: u32,
    pub v: Vertex,
}

impl BlockSpec {
    pub fn new(v: Vertex, side: u32) -> Result<Self> {
        if side == 0 || side % 2 == 1 {
            return Err(Error::OddBlockSide(side));
        }
        Ok(BlockSpec { side, v })
    }

    pub fn center(&self) -> Vertex {
        self.v.scaled(self.side as i32)
    }

    pub fn inner_radius(&self) -> u64 {
        self.v.dim() as u64 * u64::from(self.side) / 2
    }

    pub fn outer_radius(&self) -> u64 {
        self.v.dim() as u64 * u64::from(self.side)
    }

    /// `ball(vN, dN + N^alpha) x [-N^alpha, 0]`, the space-time region the
    /// block event reads.
    pub fn window(&self, alpha: f64) -> Result<SpaceTimeWindow> {
        let r = truncation_radius(self.side, alpha);
        SpaceTimeWindow::ball(&self.center(), self.outer_radius() as f64 + r, r)
    }
}

/// Occupied path inside `ball(center, outer)` from the sphere of radius
/// `inner` to the sphere of radius `outer`.
pub(crate) fn annulus_crossing(
    bits: &mut impl SiteBits,
    region: &IndexedRegion,
    center: &Vertex,
    inner: u64,
    outer: u64,
) -> Result<bool> {
    let dist = |s: u32| graph_distance(center, region.vertex(s)).expect("same dimension");
    let mut seen = vec![false; region.len()];
    let mut stack = Vec::new();
    for v in ball_vertices(center, inner as f64) {
        if graph_distance(center, &v)? != inner {
            continue;
        }
        let s = region.site(&v).ok_or_else(|| Error::WindowTooSmall {
            vertex: v.clone(),
            needed_floor: 0.0,
        })?;
        if bits.bit(s)? {
            if inner == outer {
                return Ok(true);
            }
            seen[s as usize] = true;
            stack.push(s);
        }
    }
    while let Some(s) = stack.pop() {
        for d in 0..2 * region.dim() {
            let w = region.neighbor_raw(s, d);
            if w == NO_SITE {
                return Err(Error::WindowTooSmall {
                    vertex: region.vertex(s).step(crate::lattice::Direction(d as u8)),
                    needed_floor: 0.0,
                });
            }
            if seen[w as usize] {
                continue;
            }
            let dw = dist(w);
            if dw > outer {
                continue;
            }
            seen[w as usize] = true;
            if bits.bit(w)? {
                if dw == outer {
                    return Ok(true);
                }
                stack.push(w);
            }
        }
    }
    Ok(false)
}

/// Block event `A_v`: the field truncated at `N^alpha` joins the spheres
/// of radii `dN/2` and `dN` around `vN` inside `ball(vN, dN)`.
pub fn block_event_indicator(
    block: &BlockSpec,
    config: &PointConfiguration,
    lambda: f64,
    alpha: f64,
) -> Result<bool> {
    check_alpha(alpha, block.v.dim())?;
    let marks = config.marks(lambda)?;
    let mut field = LazyField::new(config, &marks, truncation_radius(block.side, alpha));
    annulus_crossing(
        &mut field,
        config.window().region(),
        &block.center(),
        block.inner_radius(),
        block.outer_radius(),
    )
}

/// Block event read off an already sampled field; sites outside the field
/// count as vacant.
pub fn block_event_in_field(block: &BlockSpec, field: &OccupiedField) -> bool {
    let center = block.center();
    let (inner, outer) = (block.inner_radius(), block.outer_radius());
    let ball: Vec<Vertex> = ball_vertices(&center, outer as f64)
        .into_iter()
        .filter(|w| field.occupied(w))
        .collect();
    let inner_sphere: Vec<Vertex> = ball
        .iter()
        .filter(|w| graph_distance(&center, w) == Ok(inner))
        .cloned()
        .collect();
    let outer_sphere: Vec<Vertex> = ball
        .iter()
        .filter(|w| graph_distance(&center, w) == Ok(outer))
        .cloned()
        .collect();
    crate::percolation::connects(field, &inner_sphere, &outer_sphere, &ball)
}

/// Block indices marked good for one field sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodSet {
    /// Lexicographically sorted.
    pub members: Vec<Vertex>,
}

impl GoodSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.members.binary_search(v).is_ok()
    }
}

/// The `v` in `block_region` whose ball `Lambda^{vN}_{dN/2}` meets the
/// occupied cluster of the origin in `field`.
pub fn good_vertices(field: &OccupiedField, side: u32, block_region: &[Vertex]) -> Result<GoodSet> {
    let Some(first) = block_region.first() else {
        return Ok(GoodSet { members: Vec::new() });
    };
    let origin = Vertex::origin(first.dim());
    let cluster = if field.get(&origin).is_some() {
        cluster_of(field, &[origin], field.region())?
    } else {
        return Ok(GoodSet { members: Vec::new() });
    };
    let mut members = Vec::new();
    for v in block_region {
        let b = BlockSpec::new(v.clone(), side)?;
        let c = b.center();
        let r = b.inner_radius();
        if cluster.members.iter().any(|w| graph_distance(&c, w).map_or(false, |d| d <= r)) {
            members.push(v.clone());
        }
    }
    members.sort();
    Ok(GoodSet { members })
}

/// Block indices whose inner ball can meet `Lambda_radius`.
pub fn covering_blocks(dim: usize, side: u32, radius: u64) -> Vec<Vertex> {
    let inner = dim as u64 * u64::from(side) / 2;
    let reach = (radius + inner) / u64::from(side);
    ball_vertices(&Vertex::origin(dim), reach as f64)
        .into_iter()
        .filter(|v| graph_distance(&Vertex::origin(dim), &v.scaled(side as i32)).unwrap() <= radius + inner)
        .collect()
}

/// `|C| >= m  =>  |S| >= m / |Lambda_{dN/2}|` at `m = |C|`.
pub fn covering_holds(cluster_size: usize, good: usize, dim: usize, side: u32) -> bool {
    let ball = ball_size(dim, dim as u64 * u64::from(side) / 2) as usize;
    good * ball >= cluster_size
}

/// Greedy subset of `vertices` (in the given order) with pairwise distance
/// at least `separation`.
pub fn greedy_separated(vertices: &[Vertex], separation: u64) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::new();
    for v in vertices {
        if out.iter().all(|w| graph_distance(v, w).map_or(false, |d| d >= separation)) {
            out.push(v.clone());
        }
    }
    out
}

/// Correlation of two block events at separated centres.
#[derive(Clone, Debug, Serialize)]
pub struct IndependenceCheck {
    pub corr: Estimate,
    pub p_v: Estimate,
    pub p_w: Estimate,
    /// The space-time regions read by the two events are disjoint.
    pub disjoint_regions: bool,
    /// One of the indicators was constant over all replicas.
    pub degenerate: bool,
}

/// Whether the two events read disjoint parts of the point process:
/// `d(vN, wN) > 2 (dN + floor(N^alpha))`.
pub fn regions_disjoint(v: &BlockSpec, w: &BlockSpec, alpha: f64) -> bool {
    let reach = v.outer_radius() + truncation_radius(v.side, alpha).floor() as u64;
    graph_distance(&v.center(), &w.center()).map_or(false, |d| d > 2 * reach)
}

/// Sample correlation of `A_v` and `A_w` with standard error
/// `sqrt((1 - rho^2) / (R - 2))`. Requires `d(vN, wN) >= 3dN`.
pub fn independence_check<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    v: &Vertex,
    w: &Vertex,
    side: u32,
    lambda: f64,
    alpha: f64,
) -> Result<IndependenceCheck> {
    mc.validate()?;
    check_alpha(alpha, mc.dim)?;
    let (bv, bw) = (BlockSpec::new(v.clone(), side)?, BlockSpec::new(w.clone(), side)?);
    let distance = graph_distance(&bv.center(), &bw.center())?;
    let required = 3 * bv.outer_radius();
    if distance < required {
        return Err(Error::SeparationViolated { distance, required });
    }
    let r = truncation_radius(side, alpha);
    let mut vertices = ball_vertices(&bv.center(), bv.outer_radius() as f64 + r);
    vertices.extend(ball_vertices(&bw.center(), bw.outer_radius() as f64 + r));
    vertices.sort();
    vertices.dedup();
    let window = SpaceTimeWindow::new(mc.dim, vertices, -r)?;
    let pairs: Vec<(bool, bool)> = mc
        .run(&window, |_, config, _| {
            Ok((
                block_event_indicator(&bv, &config, lambda, alpha)?,
                block_event_indicator(&bw, &config, lambda, alpha)?,
            ))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let p_v = Estimate::from_indicators(pairs.iter().map(|p| p.0));
    let p_w = Estimate::from_indicators(pairs.iter().map(|p| p.1));
    let reps = pairs.len() as f64;
    let both = pairs.iter().filter(|p| p.0 && p.1).count() as f64 / reps;
    let cov = both - p_v.mean * p_w.mean;
    let var = p_v.mean * (1.0 - p_v.mean) * p_w.mean * (1.0 - p_w.mean);
    let degenerate = var == 0.0;
    let rho = if degenerate { 0.0 } else { cov / var.sqrt() };
    let stderr = if degenerate || reps <= 2.0 {
        0.0
    } else {
        ((1.0 - rho * rho) / (reps - 2.0)).sqrt()
    };
    Ok(IndependenceCheck {
        corr: Estimate {
            mean: rho,
            stderr,
            replicas: pairs.len() as u64,
        },
        p_v,
        p_w,
        disjoint_regions: regions_disjoint(&bv, &bw, alpha),
        degenerate,
    })
}

/// Output of [`block_tail_experiment`].
#[derive(Clone, Debug, Serialize)]
pub struct BlockTail {
    pub side: u32,
    pub box_radius: u64,
    pub sizes: Vec<u64>,
    /// `P(|C| >= sizes[i])` for the origin's cluster in the box.
    pub direct: Vec<Estimate>,
    /// `P(A_0)`.
    pub block_event: Estimate,
    /// Samples breaking `|C| >= m => |S| >= m / |Lambda_{dN/2}|`.
    pub covering_violations: u64,
    /// Samples with a good `v` outside `Lambda_d` for which `A_v` failed.
    pub good_implies_event_violations: u64,
}

/// Samples the field truncated at `N^alpha` on `Lambda_{(2d+1)N}` and
/// reports the direct cluster tail, `P(A_0)`, and per-sample checks of the
/// covering inequality and of `{v good} subset A_v` for `v` outside
/// `Lambda_d` whose outer ball fits in the box.
pub fn block_tail_experiment<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    lambda: f64,
    side: u32,
    alpha: f64,
    sizes: &[u64],
) -> Result<BlockTail> {
    mc.validate()?;
    check_alpha(alpha, mc.dim)?;
    let dim = mc.dim;
    let origin_block = BlockSpec::new(Vertex::origin(dim), side)?;
    let box_radius = (2 * dim as u64 + 1) * u64::from(side);
    let r = truncation_radius(side, alpha);
    let window = SpaceTimeWindow::ball(&Vertex::origin(dim), box_radius as f64 + r, r)?;
    let blocks = covering_blocks(dim, side, box_radius);
    let checked: Vec<BlockSpec> = blocks
        .iter()
        .filter(|v| v.norm() > dim as u64)
        .map(|v| BlockSpec::new(v.clone(), side).expect("validated side"))
        .filter(|b| b.center().norm() + b.outer_radius() <= box_radius)
        .collect();
    struct Record {
        size: usize,
        event: bool,
        covering_ok: bool,
        implication_ok: bool,
    }
    let records: Vec<Record> = mc
        .run(&window, |_, config, _| {
            let marks = config.marks(lambda)?;
            let mut lazy = LazyField::new(&config, &marks, r);
            let region = config.window().region();
            let event = annulus_crossing(
                &mut lazy,
                region,
                &origin_block.center(),
                origin_block.inner_radius(),
                origin_block.outer_radius(),
            )?;
            let mut pairs = Vec::new();
            for s in 0..region.len() as u32 {
                if region.norm(s) <= box_radius {
                    pairs.push((region.vertex(s).clone(), lazy.bit(s)?));
                }
            }
            let field = OccupiedField::from_pairs(
                pairs,
                crate::graphical::Provenance {
                    lambda,
                    truncation_radius: r,
                    seed: config.seed(),
                },
            );
            let cluster = cluster_of(&field, &[Vertex::origin(dim)], field.region())?;
            let good = good_vertices(&field, side, &blocks)?;
            let implication_ok = checked
                .iter()
                .filter(|b| good.contains(&b.v))
                .all(|b| block_event_in_field(b, &field));
            Ok(Record {
                size: cluster.len(),
                event,
                covering_ok: covering_holds(cluster.len(), good.len(), dim, side),
                implication_ok,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(BlockTail {
        side,
        box_radius,
        sizes: sizes.to_vec(),
        direct: sizes
            .iter()
            .map(|&m| Estimate::from_indicators(records.iter().map(|x| x.size as u64 >= m)))
            .collect(),
        block_event: Estimate::from_indicators(records.iter().map(|x| x.event)),
        covering_violations: records.iter().filter(|x| !x.covering_ok).count() as u64,
        good_implies_event_violations: records.iter().filter(|x| !x.implication_ok).count() as u64,
    })
}

/// `P(A_0)` for each block side on one shared configuration per replica,
/// sampled on the window of the largest side.
pub fn block_event_curve<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    lambda: f64,
    sides: &[u32],
    alpha: f64,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    check_alpha(alpha, mc.dim)?;
    crate::montecarlo::check_ascending(sides, "sides")?;
    let specs: Vec<BlockSpec> = sides
        .iter()
        .map(|&n| BlockSpec::new(Vertex::origin(mc.dim), n))
        .collect::<Result<_>>()?;
    let largest = specs.last().expect("non-empty");
    let window = largest.window(alpha)?;
    let rows: Vec<Vec<bool>> = mc
        .run(&window, |_, config, _| {
            specs
                .iter()
                .map(|b| block_event_indicator(b, &config, lambda, alpha))
                .collect()
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok((0..specs.len())
        .map(|i| Estimate::from_indicators(rows.iter().map(|r| r[i])))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphical::{sample_points, truncated_field, SpaceTimePoint};
    use crate::lattice::Direction;
    use crate::rng::seed_for;

    fn fixture(window: &SpaceTimeWindow, uniform: f64) -> PointConfiguration {
        let points = window
            .region()
            .vertices()
            .iter()
            .map(|v| SpaceTimePoint {
                vertex: v.clone(),
                time: window.time_floor() / 2.0,
                uniform,
                direction: Direction(0),
            })
            .collect();
        PointConfiguration::new(window.clone(), points).unwrap()
    }

    #[test]
    fn block_geometry() {
        let b = BlockSpec::new(Vertex::new(vec![1, -1]), 4).unwrap();
        assert_eq!(b.center(), Vertex::new(vec![4, -4]));
        assert_eq!((b.inner_radius(), b.outer_radius()), (4, 8));
        assert!(matches!(BlockSpec::new(Vertex::origin(2), 3), Err(Error::OddBlockSide(3))));
        assert!(BlockSpec::new(Vertex::origin(2), 0).is_err());
    }

    #[test]
    fn constant_fixtures() {
        let b = BlockSpec::new(Vertex::new(vec![1, 0]), 2).unwrap();
        let w = b.window(0.5).unwrap();
        assert!(block_event_indicator(&b, &fixture(&w, 1.0), 1.0, 0.5).unwrap());
        assert!(!block_event_indicator(&b, &fixture(&w, 0.0), 1.0, 0.5).unwrap());
        let small = SpaceTimeWindow::ball(&b.center(), 4.0, 2.0).unwrap();
        assert!(block_event_indicator(&b, &PointConfiguration::empty(small), 1.0, 0.5).is_err());
    }

    #[test]
    fn lazy_and_field_versions_agree() {
        let b = BlockSpec::new(Vertex::origin(2), 2).unwrap();
        let w = b.window(0.5).unwrap();
        let r = truncation_radius(2, 0.5);
        for i in 0..100 {
            let config = sample_points(&w, &mut seed_for(8, i).rng());
            let lazy = block_event_indicator(&b, &config, 0.9, 0.5).unwrap();
            let targets = ball_vertices(&b.center(), b.outer_radius() as f64);
            let field = truncated_field(&config, 0.9, &targets, r).unwrap();
            assert_eq!(lazy, block_event_in_field(&b, &field));
        }
    }

    #[test]
    fn good_set_fixtures() {
        let region = ball_vertices(&Vertex::origin(2), 6.0);
        let blocks = covering_blocks(2, 2, 6);
        let mut field = OccupiedField::constant(region.clone(), true);
        let all = good_vertices(&field, 2, &blocks).unwrap();
        let expected: Vec<Vertex> = blocks
            .iter()
            .filter(|v| ball_vertices(&v.scaled(2), 2.0).iter().any(|w| w.norm() <= 6))
            .cloned()
            .collect();
        assert_eq!(all.members, {
            let mut e = expected;
            e.sort();
            e
        });
        field.set(&Vertex::origin(2), false);
        assert!(good_vertices(&field, 2, &blocks).unwrap().is_empty());
    }

    #[test]
    fn separation_and_disjointness() {
        let mc = MonteCarlo::new(2, 10, 1);
        let (v, w) = (Vertex::origin(2), Vertex::new(vec![6, 0]));
        // d(vN, wN) = 24 = 3dN at N = 4.
        assert!(independence_check(&mc, &v, &w, 4, 1.0, 0.5).is_ok());
        let close = Vertex::new(vec![5, 0]);
        assert!(matches!(
            independence_check(&mc, &v, &close, 4, 1.0, 0.5),
            Err(Error::SeparationViolated { distance: 20, required: 24 })
        ));
        let (bv, bw) = (BlockSpec::new(v, 4).unwrap(), BlockSpec::new(w, 4).unwrap());
        assert!(regions_disjoint(&bv, &bw, 0.5));
    }

    #[test]
    fn greedy_subset_is_separated() {
        let vs = ball_vertices(&Vertex::origin(2), 4.0);
        let sub = greedy_separated(&vs, 3);
        for a in &sub {
            for b in &sub {
                assert!(a == b || graph_distance(a, b).unwrap() >= 3);
            }
        }
        assert!(vs.iter().all(|v| sub.iter().any(|s| graph_distance(v, s).unwrap() < 3)));
    }
}
