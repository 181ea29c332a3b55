//! Monte Carlo summaries and exponential-decay fits.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error over `replicas` independent draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: u64,
}

impl Estimate {
    /// `stderr` is the sample standard deviation (n - 1 denominator) over
    /// `sqrt(n)`; zero for a single sample.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n > 0, "estimate needs at least one sample");
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr,
            replicas: n as u64,
        }
    }

    pub fn from_indicators(hits: impl IntoIterator<Item = bool>) -> Self {
        let xs: Vec<f64> = hits.into_iter().map(|b| f64::from(u8::from(b))).collect();
        Self::from_samples(&xs)
    }

    pub fn exact(value: f64, replicas: u64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
            replicas,
        }
    }
}

/// Quadrature sum of standard errors.
pub fn combined_stderr(parts: &[f64]) -> f64 {
    parts.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// Least-squares fit of `log y = log amplitude + rate * x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub rate: f64,
    pub r_squared: f64,
    /// Points left out because their estimate was zero.
    pub dropped: usize,
}

/// Fits an exponential to the strictly positive `ys`. Returns `None` when
/// fewer than two usable points remain or all abscissae coincide.
pub fn fit_exponential_decay(xs: &[f64], ys: &[f64]) -> Option<DecayFit> {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x, y.ln()))
        .collect();
    let dropped = xs.len() - pts.len();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let sst: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - rate * p.0).powi(2))
        .sum();
    let r_squared = if sst == 0.0 {
        1.0
    } else {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    };
    Some(DecayFit {
        amplitude: intercept.exp(),
        rate,
        r_squared,
        dropped,
    })
}
