//! Replica-parallel Monte Carlo driver shared by all estimators.

use crate::error::{Error, Result};
use crate::graphical::{ConfigSource, PointConfiguration, PoissonSource, SpaceTimeWindow};
use crate::rng::{pool_seed, run_replicas, seed_for, ReplicaRng};

/// Replica count, master seed, lattice dimension and configuration source
/// of one estimator run.
#[derive(Clone, Debug)]
pub struct MonteCarlo<S = PoissonSource> {
    pub dim: usize,
    pub replicas: u64,
    pub master_seed: u64,
    pub source: S,
}

impl MonteCarlo<PoissonSource> {
    pub fn new(dim: usize, replicas: u64, master_seed: u64) -> Self {
        MonteCarlo {
            dim,
            replicas,
            master_seed,
            source: PoissonSource,
        }
    }
}

impl<S: ConfigSource> ConfigSource for &S {
    fn sample(&self, window: &SpaceTimeWindow, rng: &mut ReplicaRng) -> PointConfiguration {
        (*self).sample(window, rng)
    }
}

impl<S: ConfigSource> MonteCarlo<S> {
    pub fn with_source<T: ConfigSource>(self, source: T) -> MonteCarlo<T> {
        MonteCarlo {
            dim: self.dim,
            replicas: self.replicas,
            master_seed: self.master_seed,
            source,
        }
    }

    pub fn with_replicas(&self, replicas: u64) -> MonteCarlo<&S> {
        MonteCarlo {
            dim: self.dim,
            replicas,
            master_seed: self.master_seed,
            source: &self.source,
        }
    }

    /// Same settings on an independent seed stream.
    pub fn pool(&self, pool: u64) -> MonteCarlo<&S> {
        MonteCarlo {
            dim: self.dim,
            replicas: self.replicas,
            master_seed: pool_seed(self.master_seed, pool),
            source: &self.source,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::BadDimension(self.dim));
        }
        if self.replicas == 0 {
            return Err(Error::Invalid {
                field: "replicas",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }

    /// Samples one configuration per replica on `window` and maps it through
    /// `f`. The replica's stream continues into `f` for any further draws.
    pub fn run<T, F>(&self, window: &SpaceTimeWindow, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, PointConfiguration, &mut ReplicaRng) -> T + Sync,
    {
        run_replicas(self.master_seed, self.replicas, |i, rng| {
            let config = self
                .source
                .sample(window, rng)
                .with_seed(seed_for(self.master_seed, i));
            f(i, config, rng)
        })
    }
}

/// `0 < alpha < 1/(d - 1)`.
pub fn check_alpha(alpha: f64, dim: usize) -> Result<()> {
    let upper = 1.0 / (dim as f64 - 1.0);
    if !(alpha > 0.0 && alpha < upper) {
        return Err(Error::AlphaOutOfRange { alpha, dim });
    }
    Ok(())
}

pub(crate) fn check_ascending(xs: &[u32], what: &'static str) -> Result<()> {
    if xs.is_empty() || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedList(what));
    }
    Ok(())
}
