use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphical::{draw_axis, ConfigSource, Sweeper};
use crate::lattice::{floor_radius, sphere_vertices, Vertex};
use crate::montecarlo::MonteCarlo;
use crate::percolation::{crossing_from_bits, crossing_with_marks, LazyField, SiteBits};
use crate::stats::{combined_stderr, Estimate};

use super::blocks::{in_block, replace_block, resample_block, BlockIndex, BlockPartition};
use super::tree::{check_k, run_tree};
use super::{crossing_after_change, lambda_n_bits, Dependents};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(lambda));
    }
    Ok(())
}

fn check_dim<S>(mc: &MonteCarlo<S>, partition: &BlockPartition) -> Result<()> {
    if mc.dim != partition.dim() {
        return Err(Error::DimensionMismatch {
            left: mc.dim,
            right: partition.dim(),
        });
    }
    Ok(())
}

/// Per replica, which partition vertices had their axes revealed by `T_k`.
fn revealment_samples<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
    k: u32,
) -> Result<Vec<Vec<bool>>> {
    mc.validate()?;
    check_dim(mc, partition)?;
    check_lambda(lambda)?;
    check_k(k, partition.n)?;
    mc.run(partition.window(), |_, config, _| {
        let marks = config.marks(lambda)?;
        let mut field = LazyField::new(&config, &marks, partition.radius());
        Ok(run_tree(partition, &config, &mut field, k)?.revealed)
    })
    .into_iter()
    .collect()
}

/// Revealment `P(T_k reveals the block)`, identical for all slots of a
/// vertex, for every partition vertex in lexicographic order.
pub fn revealment_profile<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
    k: u32,
) -> Result<Vec<Estimate>> {
    let samples = revealment_samples(mc, partition, lambda, k)?;
    Ok((0..partition.vertices().len())
        .map(|s| Estimate::from_indicators(samples.iter().map(|r| r[s])))
        .collect())
}

/// Revealment of one block under `T_k`.
pub fn estimate_revealment<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
    k: u32,
    block: &BlockIndex,
) -> Result<Estimate> {
    partition.check_block(block)?;
    let site = partition
        .window()
        .region()
        .site(&block.vertex)
        .expect("checked block") as usize;
    let samples = revealment_samples(mc, partition, lambda, k)?;
    Ok(Estimate::from_indicators(samples.iter().map(|r| r[site])))
}

/// Influence of one block: `P(1_A(omega) != 1_A(omega~))` where `omega~`
/// resamples the block, both indicators evaluated by full reveal.
pub fn estimate_influence<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
    block: &BlockIndex,
) -> Result<Estimate> {
    mc.validate()?;
    check_dim(mc, partition)?;
    check_lambda(lambda)?;
    partition.check_block(block)?;
    let (n, r) = (partition.n, partition.radius());
    let flips: Vec<bool> = mc
        .run(partition.window(), |_, config, rng| {
            let tilde = resample_block(&config, partition, block, rng)?;
            let a = crossing_with_marks(&config, &config.marks(lambda)?, n, r)?;
            let b = crossing_with_marks(&tilde, &tilde.marks(lambda)?, n, r)?;
            Ok(a != b)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(Estimate::from_indicators(flips))
}

/// Per replica, a flip flag for every partition block (block id order).
/// One configuration is shared by all blocks of a replica; the fresh draws
/// for the blocks come from the replica's stream in block order.
fn influence_samples<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
) -> Result<Vec<Vec<bool>>> {
    mc.validate()?;
    check_dim(mc, partition)?;
    check_lambda(lambda)?;
    let n = u64::from(partition.n);
    let r = partition.radius();
    let region = partition.window().region();
    let dependents = Dependents::new(region, n, r);
    let blocks: Vec<BlockIndex> = partition.blocks().collect();
    mc.run(partition.window(), |_, config, rng| {
        let mut sweeper = Sweeper::new();
        let marks = config.marks(lambda)?;
        let base = lambda_n_bits(&config, &marks, n, r, &mut sweeper)?;
        let outcome = crossing_from_bits(&mut base.clone(), region, n)?;
        let points = config.points();
        blocks
            .iter()
            .map(|block| {
                let (lo, hi) = partition.interval(block);
                let mut fresh = Vec::new();
                draw_axis(&block.vertex, lo, hi, rng, &mut fresh);
                let site = region.site(&block.vertex).expect("partition vertex");
                let occupied_before = config
                    .points_at(site)
                    .iter()
                    .any(|&p| in_block(&points[p as usize], block, lo, hi));
                if fresh.is_empty() && !occupied_before {
                    return Ok(false);
                }
                let targets = dependents.of(site);
                if targets.is_empty() {
                    return Ok(false);
                }
                let tilde = replace_block(&config, block, lo, hi, fresh)?;
                let tilde_marks = tilde.marks(lambda)?;
                let changed =
                    crossing_after_change(&tilde, &tilde_marks, &base, outcome, targets, n, r, &mut sweeper)?;
                Ok(changed != outcome)
            })
            .collect()
    })
    .into_iter()
    .collect()
}

/// Influence of every partition block, in block id order.
pub fn influence_profile<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
) -> Result<Vec<Estimate>> {
    let samples = influence_samples(mc, partition, lambda)?;
    Ok((0..partition.len())
        .map(|b| Estimate::from_indicators(samples.iter().map(|f| f[b])))
        .collect())
}

/// Both sides of the variance bound `theta (1 - theta) <= sum delta Inf`.
#[derive(Clone, Debug, Serialize)]
pub struct OsssCheck {
    pub theta: Estimate,
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Sum of block influences.
    pub total_influence: Estimate,
    /// Expected number of revealed blocks.
    pub total_revealment: Estimate,
}

impl OsssCheck {
    /// `lhs <= rhs + sigmas * combined stderr`.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.lhs.mean <= self.rhs.mean + sigmas * combined_stderr(&[self.lhs.stderr, self.rhs.stderr])
    }
}

/// `theta`, revealment and influence come from three independent replica
/// pools. The right-hand side's standard error propagates the sampling
/// error of both factors.
pub fn osss_check<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
    k: u32,
) -> Result<OsssCheck> {
    mc.validate()?;
    check_dim(mc, partition)?;
    check_lambda(lambda)?;
    check_k(k, partition.n)?;
    let (n, r) = (partition.n, partition.radius());
    let hits: Vec<bool> = mc
        .pool(0)
        .run(partition.window(), |_, config, _| crossing_with_marks(&config, &config.marks(lambda)?, n, r))
        .into_iter()
        .collect::<Result<_>>()?;
    let theta = Estimate::from_indicators(hits);
    let lhs = Estimate {
        mean: theta.mean * (1.0 - theta.mean),
        stderr: (1.0 - 2.0 * theta.mean).abs() * theta.stderr,
        replicas: theta.replicas,
    };

    let revealed = revealment_samples(&mc.pool(1), partition, lambda, k)?;
    let flips = influence_samples(&mc.pool(2), partition, lambda)?;
    let slots = partition.slots() as usize;
    let vertices = partition.vertices().len();
    let delta: Vec<f64> = (0..vertices)
        .map(|s| Estimate::from_indicators(revealed.iter().map(|x| x[s])).mean)
        .collect();
    let inf: Vec<f64> = (0..partition.len())
        .map(|b| Estimate::from_indicators(flips.iter().map(|f| f[b])).mean)
        .collect();
    let inf_per_vertex: Vec<f64> = inf.chunks(slots).map(|c| c.iter().sum()).collect();

    let x: Vec<f64> = flips
        .iter()
        .map(|f| (0..partition.len()).filter(|&b| f[b]).map(|b| delta[b / slots]).sum())
        .collect();
    let y: Vec<f64> = revealed
        .iter()
        .map(|rv| (0..vertices).filter(|&s| rv[s]).map(|s| inf_per_vertex[s]).sum())
        .collect();
    let rhs_mean: f64 = (0..vertices).map(|s| delta[s] * inf_per_vertex[s]).sum();
    let (ex, ey) = (Estimate::from_samples(&x), Estimate::from_samples(&y));
    let rhs = Estimate {
        mean: rhs_mean,
        stderr: combined_stderr(&[ex.stderr, ey.stderr]),
        replicas: ex.replicas.min(ey.replicas),
    };
    let total_influence = Estimate::from_samples(
        &flips
            .iter()
            .map(|f| f.iter().filter(|&&b| b).count() as f64)
            .collect::<Vec<_>>(),
    );
    let total_revealment = Estimate::from_samples(
        &revealed
            .iter()
            .map(|rv| (rv.iter().filter(|&&b| b).count() * slots) as f64)
            .collect::<Vec<_>>(),
    );
    Ok(OsssCheck {
        theta,
        lhs,
        rhs,
        total_influence,
        total_revealment,
    })
}

/// Revealment of a vertex against the sum of connection probabilities
/// `P(w <-> dLambda_k)` over the sphere of radius `n^alpha` around it.
#[derive(Clone, Debug, Serialize)]
pub struct RevealmentBound {
    pub vertex: Vertex,
    pub revealment: Estimate,
    pub bound: Estimate,
}

impl RevealmentBound {
    pub fn holds(&self, sigmas: f64) -> bool {
        self.revealment.mean
            <= self.bound.mean + sigmas * combined_stderr(&[self.revealment.stderr, self.bound.stderr])
    }
}

/// Compares revealment with its connection-probability bound for vertices
/// farther than `n^alpha` from `dLambda_k`; both sides use independent
/// replica pools. Connections run through `Lambda_n` in the field truncated
/// at `n^alpha`.
pub fn revealment_bound_check<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    partition: &BlockPartition,
    lambda: f64,
    k: u32,
    vertices: &[Vertex],
) -> Result<Vec<RevealmentBound>> {
    let region = partition.window().region();
    let reach = floor_radius(partition.radius());
    let mut sites = Vec::with_capacity(vertices.len());
    for v in vertices {
        let site = region.site(v).ok_or_else(|| Error::OutsideRegion(v.clone()))?;
        if v.norm().abs_diff(u64::from(k)) <= reach {
            return Err(Error::Invalid {
                field: "vertices",
                reason: format!("{v} lies within {reach} of the sphere of radius {k}"),
            });
        }
        sites.push(site);
    }
    let revealed = revealment_samples(&mc.pool(0), partition, lambda, k)?;
    let n = u64::from(partition.n);
    let r = partition.radius();
    let spheres: Vec<Vec<u32>> = vertices
        .iter()
        .map(|v| {
            sphere_vertices(v, r)
                .iter()
                .filter(|w| w.norm() <= n)
                .filter_map(|w| region.site(w))
                .collect()
        })
        .collect();
    let sums: Vec<Vec<f64>> = mc
        .pool(1)
        .run(partition.window(), |_, config, _| {
            let marks = config.marks(lambda)?;
            let mut field = LazyField::new(&config, &marks, r);
            let member = cluster_of_sphere(&mut field, region, n, u64::from(k))?;
            Ok(spheres
                .iter()
                .map(|sp| sp.iter().filter(|&&w| member[w as usize]).count() as f64)
                .collect())
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(vertices
        .iter()
        .enumerate()
        .map(|(i, v)| RevealmentBound {
            vertex: v.clone(),
            revealment: Estimate::from_indicators(revealed.iter().map(|x| x[sites[i] as usize])),
            bound: Estimate::from_samples(&sums.iter().map(|s| s[i]).collect::<Vec<_>>()),
        })
        .collect())
}

/// Occupied sites of `Lambda_n` joined to `dLambda_k` inside `Lambda_n`.
fn cluster_of_sphere(
    bits: &mut impl SiteBits,
    region: &crate::lattice::IndexedRegion,
    n: u64,
    k: u64,
) -> Result<Vec<bool>> {
    let mut member = vec![false; region.len()];
    let mut stack = Vec::new();
    for s in 0..region.len() as u32 {
        if region.norm(s) == k && bits.bit(s)? {
            member[s as usize] = true;
            stack.push(s);
        }
    }
    while let Some(s) = stack.pop() {
        for d in 0..2 * region.dim() {
            let w = region.neighbor_raw(s, d);
            if w == crate::lattice::region::NO_SITE || member[w as usize] || region.norm(w) > n {
                continue;
            }
            if bits.bit(w)? {
                member[w as usize] = true;
                stack.push(w);
            }
        }
    }
    Ok(member)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osss::partition_blocks;

    fn mc(replicas: u64) -> MonteCarlo {
        MonteCarlo::new(2, replicas, 5)
    }

    #[test]
    fn revealment_is_one_near_the_sphere() {
        let p = partition_blocks(2, 4, 0.5, 0.5).unwrap();
        let prof = revealment_profile(&mc(200), &p, 0.5, 2).unwrap();
        for (v, e) in p.vertices().iter().zip(&prof) {
            if v.norm().abs_diff(2) <= 2 {
                assert_eq!(e.mean, 1.0, "{v}");
            }
        }
        let b = BlockIndex::new(Vertex::new(vec![1, 1]), 3);
        assert_eq!(estimate_revealment(&mc(50), &p, 0.5, 2, &b).unwrap().mean, 1.0);
    }

    #[test]
    fn profile_matches_single_block_estimates() {
        let p = partition_blocks(2, 2, 0.5, 2f64.sqrt() / 2.0).unwrap();
        let m = mc(400);
        let prof = influence_profile(&m, &p, 0.8).unwrap();
        let total: f64 = prof.iter().map(|e| e.mean).sum();
        assert!(total > 0.0);
        for e in &prof {
            assert!(e.mean <= 2.0 * p.epsilon + 4.0 * e.stderr + 0.02);
        }
    }

    #[test]
    fn rejects_foreign_blocks() {
        let p = partition_blocks(2, 4, 0.5, 0.5).unwrap();
        let far = BlockIndex::new(Vertex::new(vec![7, 0]), 0);
        assert!(estimate_influence(&mc(10), &p, 0.5, &far).is_err());
        let late = BlockIndex::new(Vertex::origin(2), 4);
        assert!(estimate_influence(&mc(10), &p, 0.5, &late).is_err());
    }

    #[test]
    fn bound_rejects_vertices_near_the_sphere() {
        let p = partition_blocks(2, 4, 0.5, 0.5).unwrap();
        assert!(revealment_bound_check(&mc(10), &p, 0.5, 2, &[Vertex::new(vec![3, 0])]).is_err());
    }
}
