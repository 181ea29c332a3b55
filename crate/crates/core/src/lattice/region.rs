use std::collections::HashMap;

use super::{Direction, Vertex};

pub(crate) const NO_SITE: u32 = u32::MAX;

/// A finite vertex set with dense site indices and a precomputed
/// nearest-neighbour table. Sites are numbered in lexicographic order.
#[derive(Clone, Debug)]
pub struct IndexedRegion {
    dim: usize,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, u32>,
    /// `neighbors[site * 2d + dir]`, `NO_SITE` when outside the region.
    neighbors: Vec<u32>,
    norms: Vec<u64>,
}

impl IndexedRegion {
    /// Builds a region from any collection of same-dimension vertices;
    /// duplicates are dropped.
    pub fn new(dim: usize, mut vertices: Vec<Vertex>) -> Self {
        vertices.sort();
        vertices.dedup();
        debug_assert!(vertices.iter().all(|v| v.dim() == dim));
        let index: HashMap<Vertex, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        let mut neighbors = vec![NO_SITE; vertices.len() * 2 * dim];
        for (i, v) in vertices.iter().enumerate() {
            for dir in Direction::all(dim) {
                if let Some(&j) = index.get(&v.step(dir)) {
                    neighbors[i * 2 * dim + dir.index()] = j;
                }
            }
        }
        let norms = vertices.iter().map(Vertex::norm).collect();
        IndexedRegion {
            dim,
            vertices,
            index,
            neighbors,
            norms,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, site: u32) -> &Vertex {
        &self.vertices[site as usize]
    }

    pub fn site(&self, v: &Vertex) -> Option<u32> {
        self.index.get(v).copied()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.index.contains_key(v)
    }

    /// Graph distance of a site to the origin.
    pub fn norm(&self, site: u32) -> u64 {
        self.norms[site as usize]
    }

    pub fn neighbor(&self, site: u32, dir: Direction) -> Option<u32> {
        let j = self.neighbors[site as usize * 2 * self.dim + dir.index()];
        (j != NO_SITE).then_some(j)
    }

    #[inline]
    pub(crate) fn neighbor_raw(&self, site: u32, dir: usize) -> u32 {
        self.neighbors[site as usize * 2 * self.dim + dir]
    }
}
