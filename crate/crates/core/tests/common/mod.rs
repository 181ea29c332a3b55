//! Independent reference implementations shared by the integration tests.
//! They work on raw point lists and recompute marks, distances and
//! connectivity from scratch.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use contact_perc::graphical::{sample_points, PointConfiguration, SpaceTimePoint, SpaceTimeWindow};
use contact_perc::rng::seed_for;
use contact_perc::Vertex;

pub fn l1(a: &Vertex, b: &Vertex) -> u64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).unsigned_abs() as u64)
        .sum()
}

pub fn neighbours(v: &Vertex) -> Vec<Vertex> {
    let mut out = Vec::new();
    for axis in 0..v.dim() {
        for delta in [-1, 1] {
            let mut c = v.coords().to_vec();
            c[axis] += delta;
            out.push(Vertex::new(c));
        }
    }
    out
}

/// Brute-force L1 ball by scanning the enclosing cube.
pub fn cube_ball(center: &Vertex, radius: u64) -> Vec<Vertex> {
    let dim = center.dim();
    let r = radius as i32;
    let mut out = Vec::new();
    let mut offset = vec![-r; dim];
    loop {
        let v = Vertex::new(
            center
                .coords()
                .iter()
                .zip(&offset)
                .map(|(c, o)| c + o)
                .collect::<Vec<_>>(),
        );
        if l1(&v, center) <= radius {
            out.push(v);
        }
        let mut i = 0;
        loop {
            if i == dim {
                out.sort();
                return out;
            }
            offset[i] += 1;
            if offset[i] <= r {
                break;
            }
            offset[i] = -r;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Event {
    Star,
    Arrow,
}

/// Event graph of one configuration at one lambda.
pub struct EventGraph {
    dim: usize,
    /// Events on each axis, sorted by time.
    axis: HashMap<Vertex, Vec<(f64, Event)>>,
    /// Arrows arriving at each vertex as `(time, source)`.
    incoming: HashMap<Vertex, Vec<(f64, Vertex)>>,
    /// Arrows leaving each vertex as `(time, target)`.
    outgoing: HashMap<Vertex, Vec<(f64, Vertex)>>,
}

impl EventGraph {
    pub fn new(points: &[SpaceTimePoint], dim: usize, lambda: f64) -> Self {
        let threshold = 1.0 / (2.0 * dim as f64 * lambda + 1.0);
        let mut axis: HashMap<Vertex, Vec<(f64, Event)>> = HashMap::new();
        let mut incoming: HashMap<Vertex, Vec<(f64, Vertex)>> = HashMap::new();
        let mut outgoing: HashMap<Vertex, Vec<(f64, Vertex)>> = HashMap::new();
        for p in points {
            if p.uniform <= threshold {
                axis.entry(p.vertex.clone()).or_default().push((p.time, Event::Star));
            } else {
                let target = p.vertex.step(p.direction);
                axis.entry(p.vertex.clone()).or_default().push((p.time, Event::Arrow));
                incoming.entry(target.clone()).or_default().push((p.time, p.vertex.clone()));
                outgoing.entry(p.vertex.clone()).or_default().push((p.time, target));
            }
        }
        for list in axis.values_mut() {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        EventGraph {
            dim,
            axis,
            incoming,
            outgoing,
        }
    }

    fn stars(&self, v: &Vertex) -> impl Iterator<Item = f64> + '_ {
        self.axis
            .get(v)
            .into_iter()
            .flatten()
            .filter(|e| matches!(e.1, Event::Star))
            .map(|e| e.0)
    }

    /// Truncated bit of `v` at radius `r` by backward search from `(v, 0)`.
    pub fn occupied(&self, v: &Vertex, r: f64) -> bool {
        let shell = r.floor() as u64;
        let mut seen: HashSet<(Vertex, u64)> = HashSet::new();
        let mut stack = vec![(v.clone(), 0.0_f64)];
        while let Some((w, s)) = stack.pop() {
            if !seen.insert((w.clone(), s.to_bits())) {
                continue;
            }
            if l1(&w, v) == shell {
                return true;
            }
            let block = self
                .stars(&w)
                .filter(|&t| t < s && t >= -r)
                .fold(f64::NEG_INFINITY, f64::max);
            if block == f64::NEG_INFINITY {
                return true;
            }
            for (t, u) in self.incoming.get(&w).into_iter().flatten() {
                if *t > block && *t < s && l1(u, v) <= shell {
                    stack.push((u.clone(), *t));
                }
            }
        }
        false
    }

    /// Forward search for an active path from `(u, s)` to `(w, t)` that
    /// stays on `region`.
    pub fn path(&self, from: (&Vertex, f64), to: (&Vertex, f64), region: &HashSet<Vertex>) -> bool {
        let mut seen: HashSet<(Vertex, u64)> = HashSet::new();
        let mut stack = vec![(from.0.clone(), from.1)];
        while let Some((u, s)) = stack.pop() {
            if !seen.insert((u.clone(), s.to_bits())) {
                continue;
            }
            let stop = self
                .stars(&u)
                .filter(|&x| x > s)
                .fold(f64::INFINITY, f64::min);
            if &u == to.0 && stop > to.1 {
                return true;
            }
            for (t, target) in self.outgoing.get(&u).into_iter().flatten() {
                if *t > s && *t < stop && *t <= to.1 && region.contains(target) {
                    stack.push((target.clone(), *t));
                }
            }
        }
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Whether the occupied vertices connect `from` to `to` inside `region`.
pub fn bfs_connects(
    occupied: &HashSet<Vertex>,
    region: &HashSet<Vertex>,
    from: &[Vertex],
    to: &HashSet<Vertex>,
) -> bool {
    let mut seen: HashSet<Vertex> = HashSet::new();
    let mut queue: VecDeque<Vertex> = from
        .iter()
        .filter(|v| occupied.contains(*v) && region.contains(*v))
        .cloned()
        .collect();
    while let Some(v) = queue.pop_front() {
        if !seen.insert(v.clone()) {
            continue;
        }
        if to.contains(&v) {
            return true;
        }
        for w in neighbours(&v) {
            if occupied.contains(&w) && region.contains(&w) && !seen.contains(&w) {
                queue.push_back(w);
            }
        }
    }
    false
}

/// Occupied vertices of `targets` at truncation radius `r`.
pub fn occupied_set(graph: &EventGraph, targets: &[Vertex], r: f64) -> HashSet<Vertex> {
    targets.iter().filter(|v| graph.occupied(v, r)).cloned().collect()
}

/// `0 <-> dLambda_n` inside `Lambda_n` at truncation radius `r`.
pub fn crossing(points: &[SpaceTimePoint], dim: usize, lambda: f64, n: u32, r: f64) -> bool {
    let graph = EventGraph::new(points, dim, lambda);
    let origin = Vertex::origin(dim);
    let region = cube_ball(&origin, u64::from(n));
    let occupied = occupied_set(&graph, &region, r);
    let boundary: HashSet<Vertex> = region.iter().filter(|v| l1(v, &origin) == u64::from(n)).cloned().collect();
    let region: HashSet<Vertex> = region.into_iter().collect();
    bfs_connects(&occupied, &region, &[origin], &boundary)
}

/// Annulus crossing in `ball(c, outer)` from distance `inner` to `outer`.
pub fn annulus(points: &[SpaceTimePoint], dim: usize, lambda: f64, c: &Vertex, inner: u64, outer: u64, r: f64) -> bool {
    let graph = EventGraph::new(points, dim, lambda);
    let ball = cube_ball(c, outer);
    let occupied = occupied_set(&graph, &ball, r);
    let from: Vec<Vertex> = ball.iter().filter(|v| l1(v, c) == inner).cloned().collect();
    let to: HashSet<Vertex> = ball.iter().filter(|v| l1(v, c) == outer).cloned().collect();
    let region: HashSet<Vertex> = ball.into_iter().collect();
    bfs_connects(&occupied, &region, &from, &to)
}

/// Connected subsets of Z^2 of the given size containing the origin, by
/// scanning all subsets of the ball of radius `size - 1`.
pub fn animals_brute_force(size: usize) -> u64 {
    let origin = Vertex::origin(2);
    let others: Vec<Vertex> = cube_ball(&origin, size as u64 - 1)
        .into_iter()
        .filter(|v| *v != origin)
        .collect();
    let mut count = 0;
    let mut chosen = Vec::new();
    fn rec(others: &[Vertex], start: usize, left: usize, chosen: &mut Vec<Vertex>, origin: &Vertex, count: &mut u64) {
        if left == 0 {
            let mut set: HashSet<Vertex> = chosen.iter().cloned().collect();
            set.insert(origin.clone());
            let region = set.clone();
            let mut seen = HashSet::new();
            let mut stack = vec![origin.clone()];
            while let Some(v) = stack.pop() {
                if seen.insert(v.clone()) {
                    stack.extend(neighbours(&v).into_iter().filter(|w| region.contains(w)));
                }
            }
            if seen.len() == set.len() {
                *count += 1;
            }
            return;
        }
        for i in start..others.len() {
            chosen.push(others[i].clone());
            rec(others, i + 1, left - 1, chosen, origin, count);
            chosen.pop();
        }
    }
    rec(&others, 0, size - 1, &mut chosen, &origin, &mut count);
    count
}

/// Replica `i` of a Poisson run on `window` with master seed `seed`.
pub fn replica(window: &SpaceTimeWindow, seed: u64, i: u64) -> PointConfiguration {
    sample_points(window, &mut seed_for(seed, i).rng())
}

/// Copy of `config` where point `i` has its mark forced: `star` sets the
/// label below every threshold, otherwise above.
pub fn force_mark(config: &PointConfiguration, i: usize, star: bool) -> PointConfiguration {
    let mut points = config.points().to_vec();
    points[i].uniform = if star { 0.0 } else { 1.0 };
    PointConfiguration::new(config.window().clone(), points).unwrap()
}

/// Upper quantile of chi-square with `k` degrees of freedom by the
/// Wilson-Hilferty approximation at standard normal quantile `z`.
pub fn chi_square_quantile(k: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Pearson statistic of `counts` against Poisson(`mean`) with bins
/// `0, 1, ..., last - 1` and a pooled tail bin `>= last`.
pub fn poisson_chi_square(counts: &[u64], mean: f64, last: usize) -> (f64, f64) {
    let total = counts.len() as f64;
    let mut observed = vec![0.0; last + 1];
    for &c in counts {
        observed[(c as usize).min(last)] += 1.0;
    }
    let mut pmf = Vec::with_capacity(last + 1);
    let mut p = (-mean).exp();
    for j in 0..last {
        pmf.push(p);
        p *= mean / (j + 1) as f64;
    }
    pmf.push(1.0 - pmf.iter().sum::<f64>());
    let stat = observed
        .iter()
        .zip(&pmf)
        .map(|(o, p)| (o - total * p).powi(2) / (total * p))
        .sum();
    (stat, last as f64)
}

/// Poisson draws with every label forced to an arrow.
pub struct NoStars;

impl contact_perc::graphical::ConfigSource for NoStars {
    fn sample(&self, window: &SpaceTimeWindow, rng: &mut contact_perc::rng::ReplicaRng) -> PointConfiguration {
        let mut points = sample_points(window, rng).points().to_vec();
        for p in &mut points {
            p.uniform = 1.0;
        }
        PointConfiguration::new(window.clone(), points).unwrap()
    }
}

/// One star just below time 0 on every axis and nothing else, so every
/// target of every truncated field is vacant.
pub struct LateStars;

impl contact_perc::graphical::ConfigSource for LateStars {
    fn sample(&self, window: &SpaceTimeWindow, _: &mut contact_perc::rng::ReplicaRng) -> PointConfiguration {
        let points = window
            .region()
            .vertices()
            .iter()
            .map(|v| SpaceTimePoint {
                vertex: v.clone(),
                time: -1e-3,
                uniform: 0.0,
                direction: contact_perc::Direction(0),
            })
            .collect();
        PointConfiguration::new(window.clone(), points).unwrap()
    }
}
