use std::collections::HashSet;

use super::Vertex;
use crate::error::{Error, Result};

/// Largest animal size the enumerator accepts.
pub const MAX_ANIMAL_SIZE: usize = 8;

/// Number of connected vertex sets of Z^d with `size` elements that contain
/// the origin.
///
/// Uses Redelmeier's untried-set recursion rooted at the origin: a vertex
/// leaves the untried set for good once its branch has been explored, so
/// every animal is generated exactly once.
pub fn count_lattice_animals(dim: usize, size: usize) -> Result<u64> {
    if dim < 2 {
        return Err(Error::BadDimension(dim));
    }
    if size == 0 {
        return Err(Error::Invalid {
            field: "size",
            reason: "lattice animals have positive size".into(),
        });
    }
    if size > MAX_ANIMAL_SIZE {
        return Err(Error::EnumerationLimit {
            requested: size,
            limit: MAX_ANIMAL_SIZE,
        });
    }
    let origin = Vertex::origin(dim);
    let mut reached = HashSet::from([origin.clone()]);
    let mut animal = HashSet::new();
    Ok(extend(vec![origin], &mut animal, &mut reached, size))
}

fn extend(
    mut untried: Vec<Vertex>,
    animal: &mut HashSet<Vertex>,
    reached: &mut HashSet<Vertex>,
    target: usize,
) -> u64 {
    let mut count = 0;
    while let Some(cell) = untried.pop() {
        animal.insert(cell.clone());
        if animal.len() == target {
            count += 1;
        } else {
            let fresh: Vec<Vertex> = cell
                .neighbors()
                .into_iter()
                .filter(|n| !reached.contains(n))
                .collect();
            for n in &fresh {
                reached.insert(n.clone());
            }
            let mut next = untried.clone();
            next.extend(fresh.iter().cloned());
            count += extend(next, animal, reached, target);
            for n in &fresh {
                reached.remove(n);
            }
        }
        animal.remove(&cell);
    }
    count
}
