use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphical::{ConfigSource, Mark, PointConfiguration, Sweeper};
use crate::montecarlo::{check_alpha, MonteCarlo};
use crate::percolation::{crossing_from_bits, crossing_window, crossing_with_marks, truncation_radius};
use crate::stats::{combined_stderr, Estimate};

use super::{crossing_after_change, lambda_n_bits, Dependents};

/// `C(lambda) = 2d / (2 d lambda + 1)^2`.
pub fn c_lambda(dim: usize, lambda: f64) -> f64 {
    let two_d = 2.0 * dim as f64;
    two_d / (two_d * lambda + 1.0).powi(2)
}

/// Points whose star/arrow swap changes the crossing indicator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PivotalReport {
    /// Ascending indices into the configuration's points.
    pub pivotal_point_ids: Vec<usize>,
    pub config_size: usize,
    /// The unflipped indicator.
    pub indicator: bool,
}

impl PivotalReport {
    pub fn len(&self) -> usize {
        self.pivotal_point_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivotal_point_ids.is_empty()
    }
}

pub(crate) fn pivotal_with_marks(
    config: &PointConfiguration,
    marks: &[Mark],
    n: u32,
    radius: f64,
) -> Result<PivotalReport> {
    let n64 = u64::from(n);
    let region = config.window().region();
    let dependents = Dependents::new(region, n64, radius);
    let mut sweeper = Sweeper::new();
    let base = lambda_n_bits(config, marks, n64, radius, &mut sweeper)?;
    let indicator = crossing_from_bits(&mut base.clone(), region, n64)?;
    let mut flipped = marks.to_vec();
    let mut pivotal_point_ids = Vec::new();
    for (i, p) in config.points().iter().enumerate() {
        // Points at or below -radius are never read by a sweep.
        if p.time <= -radius {
            continue;
        }
        let targets = dependents.of(config.site_of(i));
        if targets.is_empty() {
            continue;
        }
        flipped[i] = marks[i].flipped(p.direction);
        let after = crossing_after_change(config, &flipped, &base, indicator, targets, n64, radius, &mut sweeper)?;
        flipped[i] = marks[i];
        if after != indicator {
            pivotal_point_ids.push(i);
        }
    }
    Ok(PivotalReport {
        pivotal_point_ids,
        config_size: config.len(),
        indicator,
    })
}

/// Scans every point of `config`, swapping its mark between star and
/// `Arrow(rho_x)` and recomputing the crossing indicator at scale `n`.
pub fn pivotal_points(config: &PointConfiguration, lambda: f64, n: u32, alpha: f64) -> Result<PivotalReport> {
    check_alpha(alpha, config.dim())?;
    let marks = config.marks(lambda)?;
    pivotal_with_marks(config, &marks, n, truncation_radius(n, alpha))
}

/// Finite-difference and pivotal-point estimates of `d/dlambda P(A)`.
#[derive(Clone, Debug, Serialize)]
pub struct RussoCheck {
    pub finite_difference: Estimate,
    pub pivotal_form: Estimate,
    pub mean_pivotal: Estimate,
    pub c_lambda: f64,
    /// `C(lambda) h^2`, allowance for the finite-difference bias.
    pub slack: f64,
}

impl RussoCheck {
    pub fn agrees(&self, sigmas: f64) -> bool {
        let se = combined_stderr(&[self.finite_difference.stderr, self.pivotal_form.stderr]);
        (self.finite_difference.mean - self.pivotal_form.mean).abs() <= sigmas * se + self.slack
    }
}

/// The finite difference uses common random numbers through the mark
/// coupling; the pivotal count runs on an independent pool.
pub fn russo_check<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    lambda: f64,
    h: f64,
    n: u32,
    alpha: f64,
) -> Result<RussoCheck> {
    mc.validate()?;
    check_alpha(alpha, mc.dim)?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(lambda));
    }
    if !(h > 0.0) || lambda - h <= 0.0 {
        return Err(Error::StepTooLarge { h, lambda });
    }
    let r = truncation_radius(n, alpha);
    let window = crossing_window(mc.dim, n, alpha)?;
    let diffs: Vec<f64> = mc
        .pool(0)
        .run(&window, |_, config, _| {
            let up = crossing_with_marks(&config, &config.marks(lambda + h)?, n, r)?;
            let down = crossing_with_marks(&config, &config.marks(lambda - h)?, n, r)?;
            Ok((f64::from(u8::from(up)) - f64::from(u8::from(down))) / (2.0 * h))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let counts: Vec<f64> = mc
        .pool(1)
        .run(&window, |_, config, _| {
            Ok(pivotal_with_marks(&config, &config.marks(lambda)?, n, r)?.len() as f64)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let c = c_lambda(mc.dim, lambda);
    let mean_pivotal = Estimate::from_samples(&counts);
    Ok(RussoCheck {
        finite_difference: Estimate::from_samples(&diffs),
        pivotal_form: Estimate {
            mean: c * mean_pivotal.mean,
            stderr: c * mean_pivotal.stderr,
            replicas: mean_pivotal.replicas,
        },
        mean_pivotal,
        c_lambda: c,
        slack: c * h * h,
    })
}
