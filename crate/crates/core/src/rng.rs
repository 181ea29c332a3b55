//! Deterministic per-replica random streams.
//!
//! Every replica owns a ChaCha8 stream keyed by the master seed and selected
//! by the replica index, so results never depend on which worker ran which
//! replica.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type ReplicaRng = ChaCha8Rng;

/// Key of one replica's random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed {
    pub master: u64,
    pub stream: u64,
}

impl StreamSeed {
    pub fn rng(self) -> ReplicaRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Injective in `replica` for a fixed master seed.
pub fn seed_for(master_seed: u64, replica: u64) -> StreamSeed {
    StreamSeed {
        master: master_seed,
        stream: replica,
    }
}

/// Master seed of an auxiliary replica pool, decorrelated from `master_seed`
/// through a splitmix64 round.
pub fn pool_seed(master_seed: u64, pool: u64) -> u64 {
    let mut z = master_seed ^ pool.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `replica_fn` for replicas `0..replicas` on the current rayon pool
/// and returns the records in replica order.
pub fn run_replicas<T, F>(master_seed: u64, replicas: u64, replica_fn: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ReplicaRng) -> T + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed_for(master_seed, i).rng();
            replica_fn(i, &mut rng)
        })
        .collect()
}
