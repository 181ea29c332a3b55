//! Geometry of the hypercubic lattice Z^d.
//!
//! Vertices are integer vectors ordered lexicographically; every vertex set
//! produced here comes back sorted in that order so downstream traversals
//! are reproducible.

mod animals;
pub(crate) mod region;

pub use animals::{count_lattice_animals, MAX_ANIMAL_SIZE};
pub use region::IndexedRegion;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of Z^d.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex(pub Vec<i32>);

impl Vertex {
    pub fn new(coords: impl Into<Vec<i32>>) -> Self {
        Vertex(coords.into())
    }

    pub fn origin(dim: usize) -> Self {
        Vertex(vec![0; dim])
    }

    /// Unit vector `e_axis` scaled by `scale`.
    pub fn axis(dim: usize, axis: usize, scale: i32) -> Self {
        let mut c = vec![0; dim];
        c[axis] = scale;
        Vertex(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    /// Graph distance to the origin.
    pub fn norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    pub fn offset(&self, other: &Vertex) -> Vertex {
        Vertex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, factor: i32) -> Vertex {
        Vertex(self.0.iter().map(|c| c * factor).collect())
    }

    /// Neighbour in signed direction `dir` (see [`Direction`]).
    pub fn step(&self, dir: Direction) -> Vertex {
        let mut c = self.0.clone();
        c[dir.axis()] += dir.sign();
        Vertex(c)
    }

    /// The 2d nearest neighbours in lexicographic order.
    pub fn neighbors(&self) -> Vec<Vertex> {
        Direction::lexicographic(self.dim())
            .map(|d| self.step(d))
            .collect()
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<i32>()
                    .map_err(|e| Error::Parse(format!("vertex {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}

/// One of the 2d signed unit directions ±e_i, encoded as `2i` for +e_i and
/// `2i + 1` for -e_i.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Direction(pub u8);

impl Direction {
    pub fn new(axis: usize, positive: bool) -> Self {
        Direction((2 * axis + usize::from(!positive)) as u8)
    }

    pub fn axis(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn sign(self) -> i32 {
        if self.0 % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn reversed(self) -> Self {
        Direction(self.0 ^ 1)
    }

    pub fn all(dim: usize) -> impl Iterator<Item = Direction> {
        (0..2 * dim).map(|i| Direction(i as u8))
    }

    /// Directions ordered so that `v.step(dir)` is lexicographically
    /// increasing: -e_1, -e_2, ..., -e_d, +e_d, ..., +e_1.
    pub fn lexicographic(dim: usize) -> impl Iterator<Item = Direction> {
        (0..dim)
            .map(|a| Direction::new(a, false))
            .chain((0..dim).rev().map(|a| Direction::new(a, true)))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign() > 0 { '+' } else { '-' };
        write!(f, "{s}e{}", self.axis() + 1)
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("direction {s:?}"));
        let (sign, rest) = s.split_at(s.len().min(1));
        let positive = match sign {
            "+" => true,
            "-" => false,
            _ => return Err(bad()),
        };
        let axis: usize = rest
            .strip_prefix('e')
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        if axis == 0 {
            return Err(bad());
        }
        Ok(Direction::new(axis - 1, positive))
    }
}

/// Shortest-path (L1) distance in Z^d.
pub fn graph_distance(u: &Vertex, v: &Vertex) -> Result<u64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    Ok(u.0
        .iter()
        .zip(&v.0)
        .map(|(a, b)| (a - b).unsigned_abs() as u64)
        .sum())
}

pub(crate) fn floor_radius(radius: f64) -> u64 {
    if radius <= 0.0 {
        0
    } else {
        radius.floor() as u64
    }
}

/// Appends all offsets with L1 norm in `[lo, hi]` in lexicographic order.
fn push_offsets(
    dim: usize,
    lo: u64,
    hi: u64,
    prefix: &mut Vec<i32>,
    used: u64,
    out: &mut Vec<Vec<i32>>,
) {
    if prefix.len() == dim {
        if used >= lo {
            out.push(prefix.clone());
        }
        return;
    }
    let remaining_axes = (dim - prefix.len() - 1) as u64;
    let budget = (hi - used) as i64;
    for c in -budget..=budget {
        let used_here = used + c.unsigned_abs();
        if remaining_axes == 0 && used_here < lo {
            continue;
        }
        prefix.push(c as i32);
        push_offsets(dim, lo, hi, prefix, used_here, out);
        prefix.pop();
    }
}

fn annulus(center: &Vertex, lo: u64, hi: u64) -> Vec<Vertex> {
    let mut offsets = Vec::new();
    push_offsets(center.dim(), lo, hi, &mut Vec::with_capacity(center.dim()), 0, &mut offsets);
    offsets
        .into_iter()
        .map(|o| Vertex(o.iter().zip(&center.0).map(|(a, b)| a + b).collect()))
        .collect()
}

/// `{w : d(center, w) <= radius}` in lexicographic order.
pub fn ball_vertices(center: &Vertex, radius: f64) -> Vec<Vertex> {
    if radius < 0.0 {
        return Vec::new();
    }
    annulus(center, 0, floor_radius(radius))
}

/// `{w : d(center, w) = floor(radius)}` in lexicographic order.
pub fn sphere_vertices(center: &Vertex, radius: f64) -> Vec<Vertex> {
    if radius < 0.0 {
        return Vec::new();
    }
    let r = floor_radius(radius);
    annulus(center, r, r)
}

/// Number of vertices in an L1 ball of integer radius `r` in Z^d.
pub fn ball_size(dim: usize, r: u64) -> u64 {
    // |B_d(r)| = sum_k 2^k C(d,k) C(r,k)
    let mut total = 0u64;
    let mut c_dk = 1u64;
    let mut c_rk = 1u64;
    for k in 0..=dim as u64 {
        if k > 0 {
            c_dk = c_dk * (dim as u64 - k + 1) / k;
            if k > r {
                break;
            }
            c_rk = c_rk * (r - k + 1) / k;
        }
        total += (1u64 << k) * c_dk * c_rk;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    Ball,
    Sphere,
}

/// A ball or sphere around a vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Vertex,
    pub radius: f64,
    pub kind: RegionKind,
}

impl Region {
    pub fn ball(center: Vertex, radius: f64) -> Self {
        Region {
            center,
            radius,
            kind: RegionKind::Ball,
        }
    }

    pub fn sphere(center: Vertex, radius: f64) -> Self {
        Region {
            center,
            radius,
            kind: RegionKind::Sphere,
        }
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        match self.kind {
            RegionKind::Ball => ball_vertices(&self.center, self.radius),
            RegionKind::Sphere => sphere_vertices(&self.center, self.radius),
        }
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        let Ok(dist) = graph_distance(&self.center, v) else {
            return false;
        };
        match self.kind {
            RegionKind::Ball => (dist as f64) <= self.radius,
            RegionKind::Sphere => self.radius >= 0.0 && dist == floor_radius(self.radius),
        }
    }
}
