use crate::error::{Error, Result};
use crate::lattice::region::NO_SITE;
use crate::lattice::{floor_radius, Vertex};

use super::{Mark, OccupiedField, PointConfiguration, Provenance};

const TIME_SLACK: f64 = 1e-9;

/// Reusable scratch space for truncated-occupancy sweeps.
///
/// For a target `v` and radius `r` the sweep runs forward in time over
/// `ball(v, r) x (-r, 0]`: every site starts active at `-r`, the shell
/// `d(v, .) = floor(r)` stays active throughout, a star switches an interior
/// site off and an arrow from an active site switches its target on.
#[derive(Default)]
pub(crate) struct Sweeper {
    local: Vec<u32>,
    ball: Vec<u32>,
    depth: Vec<u32>,
    active: Vec<bool>,
    events: Vec<u32>,
}

impl Sweeper {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Window sites of `ball(target, radius)`, failing if the window does
    /// not contain the whole ball.
    fn collect_ball(&mut self, config: &PointConfiguration, target: u32, radius_floor: u32) -> Result<()> {
        let region = config.window().region();
        if self.local.len() < region.len() {
            self.local.resize(region.len(), NO_SITE);
        }
        self.ball.clear();
        self.depth.clear();
        self.ball.push(target);
        self.depth.push(0);
        self.local[target as usize] = 0;
        let directions = 2 * region.dim();
        let mut i = 0;
        while i < self.ball.len() {
            let (site, depth) = (self.ball[i], self.depth[i]);
            if depth < radius_floor {
                for dir in 0..directions {
                    let n = region.neighbor_raw(site, dir);
                    if n == NO_SITE {
                        let missing = region
                            .vertex(site)
                            .step(crate::lattice::Direction(dir as u8));
                        self.reset_local();
                        return Err(Error::WindowTooSmall {
                            vertex: missing,
                            needed_floor: config.window().time_floor(),
                        });
                    }
                    if self.local[n as usize] == NO_SITE {
                        self.local[n as usize] = self.ball.len() as u32;
                        self.ball.push(n);
                        self.depth.push(depth + 1);
                    }
                }
            }
            i += 1;
        }
        Ok(())
    }

    fn reset_local(&mut self) {
        for &s in &self.ball {
            self.local[s as usize] = NO_SITE;
        }
    }

    /// Truncated occupancy bit of window site `target` at radius `radius`.
    pub(crate) fn bit(
        &mut self,
        config: &PointConfiguration,
        marks: &[Mark],
        target: u32,
        radius: f64,
    ) -> Result<bool> {
        let window = config.window();
        if window.time_floor() > -radius + TIME_SLACK {
            return Err(Error::WindowTooSmall {
                vertex: window.region().vertex(target).clone(),
                needed_floor: -radius,
            });
        }
        let shell = floor_radius(radius) as u32;
        if shell == 0 {
            return Ok(true);
        }
        self.collect_ball(config, target, shell)?;

        let points = config.points();
        self.events.clear();
        for &site in &self.ball {
            let on_axis = config.points_at(site);
            let start = on_axis.partition_point(|&p| points[p as usize].time <= -radius);
            self.events.extend_from_slice(&on_axis[start..]);
        }
        // Point indices are in time order.
        self.events.sort_unstable();

        self.active.clear();
        self.active.resize(self.ball.len(), true);
        let region = window.region();
        for &p in &self.events {
            let site = config.site_of(p as usize);
            let l = self.local[site as usize] as usize;
            match marks[p as usize] {
                Mark::Star => {
                    if self.depth[l] < shell {
                        self.active[l] = false;
                    }
                }
                Mark::Arrow(dir) => {
                    if self.active[l] {
                        let n = region.neighbor_raw(site, dir.index());
                        if n != NO_SITE {
                            let ln = self.local[n as usize];
                            if ln != NO_SITE {
                                self.active[ln as usize] = true;
                            }
                        }
                    }
                }
            }
        }
        let bit = self.active[0];
        self.reset_local();
        Ok(bit)
    }
}

fn target_sites(config: &PointConfiguration, targets: &[Vertex], radius: f64) -> Result<Vec<u32>> {
    targets
        .iter()
        .map(|v| {
            config
                .window()
                .region()
                .site(v)
                .ok_or_else(|| Error::WindowTooSmall {
                    vertex: v.clone(),
                    needed_floor: -radius,
                })
        })
        .collect()
}

pub(crate) fn field_from_marks(
    config: &PointConfiguration,
    marks: &[Mark],
    lambda: f64,
    targets: &[Vertex],
    radius: f64,
) -> Result<OccupiedField> {
    let sites = target_sites(config, targets, radius)?;
    let mut sweeper = Sweeper::new();
    let mut pairs = Vec::with_capacity(targets.len());
    for (v, &s) in targets.iter().zip(&sites) {
        pairs.push((v.clone(), sweeper.bit(config, marks, s, radius)?));
    }
    Ok(OccupiedField::from_pairs(
        pairs,
        Provenance {
            lambda,
            truncation_radius: radius,
            seed: config.seed(),
        },
    ))
}

/// The truncated occupancy field on `targets` at truncation radius `radius`.
///
/// A target is occupied iff some active path reaches `(v, 0)` from the time
/// floor `-radius` or from the shell `d(v, .) = floor(radius)` of its own
/// ball. The window must contain `ball(v, radius) x [-radius, 0]` for every
/// target; otherwise `WindowTooSmall` is returned.
pub fn truncated_field(
    config: &PointConfiguration,
    lambda: f64,
    targets: &[Vertex],
    radius: f64,
) -> Result<OccupiedField> {
    let marks = config.marks(lambda)?;
    field_from_marks(config, &marks, lambda, targets, radius)
}

/// Fields for every lambda in `lambdas`, all read off the same labelled
/// configuration.
pub fn coupled_fields(
    config: &PointConfiguration,
    lambdas: &[f64],
    targets: &[Vertex],
    radius: f64,
) -> Result<Vec<OccupiedField>> {
    check_lambdas(lambdas)?;
    lambdas
        .iter()
        .map(|&l| truncated_field(config, l, targets, radius))
        .collect()
}

pub(crate) fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty()
        || !(lambdas[0] > 0.0)
        || lambdas.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(Error::UnsortedLambdas);
    }
    Ok(())
}

/// Whether an active path runs from `from = (u, s)` to `to = (w, t)`:
/// upward along axes without crossing a star in `(s, t]`, jumping to a
/// neighbour only at an arrow pointing there.
pub fn active_path_exists(
    config: &PointConfiguration,
    lambda: f64,
    from: (&Vertex, f64),
    to: (&Vertex, f64),
) -> Result<bool> {
    let window = config.window();
    if !(from.1 < to.1) {
        return Err(Error::MalformedEndpoints(format!(
            "start time {} not before end time {}",
            from.1, to.1
        )));
    }
    for (v, t) in [from, to] {
        if !window.contains(v, t) {
            return Err(Error::MalformedEndpoints(format!("({v:?}, {t}) outside the window")));
        }
    }
    let marks = config.marks(lambda)?;
    let region = window.region();
    let start = region.site(from.0).expect("checked");
    let end = region.site(to.0).expect("checked");
    let mut active = vec![false; region.len()];
    active[start as usize] = true;
    let points = config.points();
    let first = points.partition_point(|p| p.time <= from.1);
    for (i, p) in points.iter().enumerate().skip(first) {
        if p.time > to.1 {
            break;
        }
        let site = config.site_of(i) as usize;
        match marks[i] {
            Mark::Star => active[site] = false,
            Mark::Arrow(dir) => {
                if active[site] {
                    if let Some(n) = region.neighbor(site as u32, dir) {
                        active[n as usize] = true;
                    }
                }
            }
        }
    }
    Ok(active[end as usize])
}
