use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::check_alpha;
use crate::percolation::truncation_radius;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ThetaCurve,
    Tail,
    TvGap,
    OsssCheck,
    RussoCheck,
    Revealment,
    RenormIndependence,
    RenormTail,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ThetaCurve => "theta-curve",
            Experiment::Tail => "tail",
            Experiment::TvGap => "tv-gap",
            Experiment::OsssCheck => "osss-check",
            Experiment::RussoCheck => "russo-check",
            Experiment::Revealment => "revealment",
            Experiment::RenormIndependence => "renorm-independence",
            Experiment::RenormTail => "renorm-tail",
        }
    }

    fn uses_blocks(self) -> bool {
        matches!(self, Experiment::OsssCheck | Experiment::Revealment)
    }

    fn uses_side(self) -> bool {
        matches!(self, Experiment::RenormIndependence | Experiment::RenormTail)
    }
}

/// Every knob of one run. Optional fields are filled by
/// [`ExperimentConfig::resolve`]; the resolved form is what the JSON sidecar
/// records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub d: usize,
    pub lambda: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub n: Option<u32>,
    pub n_list: Option<Vec<u32>>,
    pub k: Option<u32>,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    /// Block side `N` of the renormalization experiments.
    pub cap_n: Option<u32>,
    pub replicas: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    /// Finite-difference step of `russo-check`.
    pub h: f64,
    /// Cluster sizes for `tail` and `renorm-tail`.
    pub sizes: Option<Vec<u64>>,
    /// Reference radius factor of `tv-gap`.
    pub ref_multiplier: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            d: 2,
            lambda: None,
            lambda_grid: None,
            n: None,
            n_list: None,
            k: None,
            alpha: 0.5,
            epsilon: None,
            cap_n: None,
            replicas: 1000,
            seed: 0,
            workers: None,
            out: None,
            h: 0.05,
            sizes: None,
            ref_multiplier: 2.0,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Parses `lo:hi:step` into the inclusive grid `lo, lo + step, ...`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(Error::Parse(format!("grid {text:?} is not lo:hi:step")));
    };
    let num = |s: &str| f64::from_str(s.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parse(format!("grid {text:?} needs lo <= hi and step > 0")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.experiment.ok_or_else(|| invalid("experiment", "missing"))
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        match (&self.lambda_grid, self.lambda) {
            (Some(g), _) => Ok(g.clone()),
            (None, Some(l)) => Ok(vec![l]),
            (None, None) => Err(invalid("lambda", "missing (give --lambda or --lambda-grid)")),
        }
    }

    pub fn ns(&self) -> Result<Vec<u32>> {
        match (&self.n_list, self.n) {
            (Some(l), _) => Ok(l.clone()),
            (None, Some(n)) => Ok(vec![n]),
            (None, None) => Err(invalid("n", "missing (give --n or --n-list)")),
        }
    }

    /// Largest `n` of the run.
    pub fn n_max(&self) -> Result<u32> {
        self.ns()?
            .into_iter()
            .max()
            .ok_or_else(|| invalid("n", "empty list"))
    }

    /// `gamma = 1 - alpha (d - 1)`.
    pub fn gamma(&self) -> f64 {
        1.0 - self.alpha * (self.d as f64 - 1.0)
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.sizes.clone().unwrap_or_else(|| (1..=12).collect())
    }

    /// Fills experiment-dependent defaults and validates the result.
    pub fn resolve(mut self) -> Result<Self> {
        let experiment = self.experiment()?;
        if self.d < 2 {
            return Err(Error::BadDimension(self.d));
        }
        check_alpha(self.alpha, self.d)?;
        if self.replicas == 0 {
            return Err(invalid("replicas", "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers", "must be positive"));
        }
        let lambdas = self.lambdas()?;
        if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::NonPositiveLambda(lambdas.first().copied().unwrap_or(0.0)));
        }
        if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::UnsortedLambdas);
        }
        if experiment.uses_side() {
            let side = *self.cap_n.get_or_insert(4);
            if side == 0 || side % 2 == 1 {
                return Err(Error::OddBlockSide(side));
            }
        } else {
            let ns = self.ns()?;
            if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::UnsortedList("n-list"));
            }
        }
        if experiment.uses_blocks() {
            let n = self.n_max()?;
            let k = *self.k.get_or_insert(1.max(n / 2));
            if k == 0 || k > n {
                return Err(Error::KOutOfRange { k, n });
            }
            let horizon = truncation_radius(n, self.alpha);
            let eps = *self.epsilon.get_or_insert(horizon / 8.0);
            crate::osss::partition_blocks(self.d, n, self.alpha, eps)?;
        }
        if experiment == Experiment::RussoCheck && (!(self.h > 0.0) || lambdas[0] - self.h <= 0.0) {
            return Err(Error::StepTooLarge {
                h: self.h,
                lambda: lambdas[0],
            });
        }
        if experiment == Experiment::TvGap && !(self.ref_multiplier > 1.0) {
            return Err(invalid("ref_multiplier", "must exceed 1"));
        }
        if matches!(experiment, Experiment::Tail | Experiment::RenormTail) {
            let sizes = self.sizes();
            if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::UnsortedList("sizes"));
            }
            self.sizes = Some(sizes);
        }
        if self.workers.is_none() {
            self.workers = Some(std::thread::available_parallelism().map_or(1, |n| n.get()));
        }
        Ok(self)
    }
}
