use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphical::{check_lambdas, ConfigSource, PointConfiguration, SpaceTimeWindow, Sweeper};
use crate::lattice::Vertex;
use crate::montecarlo::{check_alpha, check_ascending, MonteCarlo};
use crate::stats::{fit_exponential_decay, DecayFit, Estimate};

use super::crossing::{cluster_stats, crossing_with_marks, crossing_window, truncation_radius, LazyField};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(lambda));
    }
    Ok(())
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid {
            field: "n",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// Indicator of `0 <-> dLambda_n` through the field truncated at `n^alpha`.
pub fn theta_indicator(config: &PointConfiguration, lambda: f64, n: u32, alpha: f64) -> Result<bool> {
    let marks = config.marks(lambda)?;
    crossing_with_marks(config, &marks, n, truncation_radius(n, alpha))
}

/// Monte Carlo estimate of `theta_n(lambda)`, the probability of
/// `0 <-> dLambda_n` inside `Lambda_n` under the field truncated at `n^alpha`.
pub fn estimate_theta<S: ConfigSource>(mc: &MonteCarlo<S>, lambda: f64, n: u32, alpha: f64) -> Result<Estimate> {
    let curve = estimate_theta_curve(mc, &[lambda], &[n], alpha)?;
    Ok(curve.estimates[0][0])
}

/// Crossing indicators for every `(lambda, n)` pair on one configuration,
/// indexed `[lambda][n]`. The configuration must cover the window of the
/// largest `n`.
pub fn theta_matrix(config: &PointConfiguration, lambdas: &[f64], ns: &[u32], alpha: f64) -> Result<Vec<Vec<bool>>> {
    lambdas
        .iter()
        .map(|&l| {
            let marks = config.marks(l)?;
            ns.iter()
                .map(|&n| crossing_with_marks(config, &marks, n, truncation_radius(n, alpha)))
                .collect()
        })
        .collect()
}

/// Table of `theta_n(lambda)` estimates on shared randomness.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaCurve {
    pub lambdas: Vec<f64>,
    pub ns: Vec<u32>,
    /// `estimates[i][j]` for `lambdas[i]`, `ns[j]`.
    pub estimates: Vec<Vec<Estimate>>,
    /// Replicas whose indicator decreased somewhere along the lambda axis.
    pub lambda_violations: u64,
    /// Replicas whose indicator increased somewhere along the n axis.
    pub n_violations: u64,
}

fn lambda_monotone(m: &[Vec<bool>]) -> bool {
    m.windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(&a, &b)| !a || b))
}

fn n_antitone(m: &[Vec<bool>]) -> bool {
    m.iter().all(|row| row.windows(2).all(|w| w[0] || !w[1]))
}

/// Every replica samples one configuration on the window of the largest
/// `n` and evaluates all `(lambda, n)` pairs on it.
pub fn estimate_theta_curve<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    lambdas: &[f64],
    ns: &[u32],
    alpha: f64,
) -> Result<ThetaCurve> {
    mc.validate()?;
    check_alpha(alpha, mc.dim)?;
    check_lambdas(lambdas)?;
    check_ascending(ns, "ns")?;
    check_n(ns[0])?;
    let window = crossing_window(mc.dim, *ns.last().expect("non-empty"), alpha)?;
    let matrices: Vec<Vec<Vec<bool>>> = mc
        .run(&window, |_, config, _| theta_matrix(&config, lambdas, ns, alpha))
        .into_iter()
        .collect::<Result<_>>()?;
    let estimates = (0..lambdas.len())
        .map(|i| {
            (0..ns.len())
                .map(|j| Estimate::from_indicators(matrices.iter().map(|m| m[i][j])))
                .collect()
        })
        .collect();
    Ok(ThetaCurve {
        lambdas: lambdas.to_vec(),
        ns: ns.to_vec(),
        estimates,
        lambda_violations: matrices.iter().filter(|m| !lambda_monotone(m)).count() as u64,
        n_violations: matrices.iter().filter(|m| !n_antitone(m)).count() as u64,
    })
}

/// `S_n(lambda) = sum_{k=1..n} theta_k(lambda)` with all `k` evaluated on
/// the same replicas; the standard error comes from the per-replica sums.
pub fn estimate_s<S: ConfigSource>(mc: &MonteCarlo<S>, lambda: f64, n: u32, alpha: f64) -> Result<Estimate> {
    mc.validate()?;
    check_alpha(alpha, mc.dim)?;
    check_lambda(lambda)?;
    check_n(n)?;
    let ns: Vec<u32> = (1..=n).collect();
    let window = crossing_window(mc.dim, n, alpha)?;
    let sums: Vec<f64> = mc
        .run(&window, |_, config, _| {
            theta_matrix(&config, &[lambda], &ns, alpha)
                .map(|m| m[0].iter().filter(|&&b| b).count() as f64)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&sums))
}

/// Cluster-size tail of the origin in a fixed box.
#[derive(Clone, Debug, Serialize)]
pub struct TailResult {
    pub sizes: Vec<u64>,
    /// `P(|C| >= sizes[i])`.
    pub estimates: Vec<Estimate>,
    /// Fit of `log P` against the size; `None` with fewer than two
    /// positive estimates.
    pub fit: Option<DecayFit>,
    /// Fraction of replicas whose cluster reached the box boundary.
    pub edge_touch_fraction: f64,
    pub box_radius: u32,
    pub truncation_radius: f64,
}

/// Estimates `P(|C| >= m)` for the origin's cluster in the field truncated
/// at `box_radius^alpha` on `Lambda_box_radius`, and fits an exponential to
/// the positive estimates.
pub fn cluster_size_tail<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    lambda: f64,
    sizes: &[u64],
    box_radius: u32,
    alpha: f64,
) -> Result<TailResult> {
    mc.validate()?;
    check_alpha(alpha, mc.dim)?;
    check_lambda(lambda)?;
    check_n(box_radius)?;
    let r = truncation_radius(box_radius, alpha);
    let window = SpaceTimeWindow::ball(&Vertex::origin(mc.dim), f64::from(box_radius) + r, r)?;
    let records: Vec<(usize, bool)> = mc
        .run(&window, |_, config, _| {
            let marks = config.marks(lambda)?;
            let mut field = LazyField::new(&config, &marks, r);
            cluster_stats(&mut field, config.window().region(), u64::from(box_radius))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let estimates: Vec<Estimate> = sizes
        .iter()
        .map(|&m| Estimate::from_indicators(records.iter().map(|&(s, _)| s as u64 >= m)))
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&m| m as f64).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let touched = records.iter().filter(|r| r.1).count();
    Ok(TailResult {
        sizes: sizes.to_vec(),
        estimates,
        fit: fit_exponential_decay(&xs, &ys),
        edge_touch_fraction: touched as f64 / records.len() as f64,
        box_radius,
        truncation_radius: r,
    })
}

/// Disagreement probability of the origin's truncated bit against a
/// reference truncation, per tested radius.
#[derive(Clone, Debug, Serialize)]
pub struct GapCurve {
    /// Scales the radii came from; empty when radii were given directly.
    pub ns: Vec<u32>,
    pub radii: Vec<f64>,
    pub reference_radius: f64,
    pub estimates: Vec<Estimate>,
    /// Fit of `log gap` against the radius.
    pub fit: Option<DecayFit>,
    /// Replicas where disagreement at a larger radius was not matched at a
    /// smaller one.
    pub nesting_violations: u64,
}

/// Gap `P(sigma_0^(r) != sigma_0^(ref))` for each radius on shared
/// randomness. Radii must be ascending and not exceed the reference.
pub fn truncation_gap_at_radii<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    lambda: f64,
    radii: &[f64],
    reference_radius: f64,
) -> Result<GapCurve> {
    mc.validate()?;
    check_lambda(lambda)?;
    if radii.is_empty() || radii.windows(2).any(|w| !(w[0] < w[1])) || !(radii[0] >= 0.0) {
        return Err(Error::UnsortedList("radii"));
    }
    let largest = *radii.last().expect("non-empty");
    if reference_radius < largest {
        return Err(Error::ReferenceTooSmall {
            reference: reference_radius,
            tested: largest,
        });
    }
    let window = SpaceTimeWindow::ball(&Vertex::origin(mc.dim), reference_radius, reference_radius)?;
    let origin = window
        .region()
        .site(&Vertex::origin(mc.dim))
        .expect("ball contains its centre");
    let flags: Vec<Vec<bool>> = mc
        .run(&window, |_, config, _| {
            let marks = config.marks(lambda)?;
            let mut sweeper = Sweeper::new();
            let reference = sweeper.bit(&config, &marks, origin, reference_radius)?;
            radii
                .iter()
                .map(|&r| Ok(sweeper.bit(&config, &marks, origin, r)? != reference))
                .collect()
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let estimates: Vec<Estimate> = (0..radii.len())
        .map(|j| Estimate::from_indicators(flags.iter().map(|f| f[j])))
        .collect();
    let nesting_violations = flags
        .iter()
        .filter(|f| f.windows(2).any(|w| w[1] && !w[0]))
        .count() as u64;
    let ys: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    Ok(GapCurve {
        ns: Vec::new(),
        radii: radii.to_vec(),
        reference_radius,
        fit: fit_exponential_decay(radii, &ys),
        estimates,
        nesting_violations,
    })
}

/// [`truncation_gap_at_radii`] at radii `n^alpha` with reference radius
/// `ref_multiplier * max(ns)^alpha`.
pub fn truncation_gap_curve<S: ConfigSource>(
    mc: &MonteCarlo<S>,
    lambda: f64,
    ns: &[u32],
    alpha: f64,
    ref_multiplier: f64,
) -> Result<GapCurve> {
    check_alpha(alpha, mc.dim)?;
    check_ascending(ns, "ns")?;
    check_n(ns[0])?;
    let radii: Vec<f64> = ns.iter().map(|&n| truncation_radius(n, alpha)).collect();
    let largest = *radii.last().expect("non-empty");
    let reference = ref_multiplier * largest;
    if !(ref_multiplier > 1.0) {
        return Err(Error::ReferenceTooSmall {
            reference,
            tested: largest,
        });
    }
    let mut curve = truncation_gap_at_radii(mc, lambda, &radii, reference)?;
    curve.ns = ns.to_vec();
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphical::{sample_points, PointConfiguration, SpaceTimeWindow};
    use crate::rng::ReplicaRng;

    /// Poisson points with every `U` forced to one value, plus one point per
    /// axis so no axis is empty.
    struct Forced(f64);

    impl ConfigSource for Forced {
        fn sample(&self, window: &SpaceTimeWindow, rng: &mut ReplicaRng) -> PointConfiguration {
            let base = sample_points(window, rng);
            let mut points: Vec<_> = base.points().to_vec();
            for v in window.region().vertices() {
                points.push(crate::graphical::draw_point(v, window.time_floor() * 0.5, 0.0, rng));
            }
            for p in &mut points {
                p.uniform = self.0;
            }
            PointConfiguration::new(window.clone(), points).unwrap()
        }
    }

    fn mc(replicas: u64) -> MonteCarlo {
        MonteCarlo::new(2, replicas, 17)
    }

    #[test]
    fn all_star_and_no_star_fixtures() {
        let stars = mc(50).with_source(Forced(0.0));
        let arrows = mc(50).with_source(Forced(1.0));
        for n in 1..=3 {
            assert_eq!(estimate_theta(&stars, 0.5, n, 0.5).unwrap().mean, 0.0);
            assert_eq!(estimate_theta(&arrows, 0.5, n, 0.5).unwrap().mean, 1.0);
        }
        assert_eq!(estimate_s(&stars, 0.5, 3, 0.5).unwrap().mean, 0.0);
        assert_eq!(estimate_s(&arrows, 0.5, 3, 0.5).unwrap().mean, 3.0);
    }

    #[test]
    fn single_point_curve_equals_theta_and_s1() {
        let m = mc(300);
        let theta = estimate_theta(&m, 0.8, 3, 0.5).unwrap();
        let curve = estimate_theta_curve(&m, &[0.8], &[3], 0.5).unwrap();
        assert_eq!(curve.estimates[0][0], theta);
        let s1 = estimate_s(&m, 0.8, 1, 0.5).unwrap();
        assert_eq!(s1, estimate_theta(&m, 0.8, 1, 0.5).unwrap());
    }

    #[test]
    fn curve_is_monotone_per_replica() {
        let curve = estimate_theta_curve(&mc(300), &[0.2, 0.5, 1.0, 2.0], &[1, 2, 3, 4], 0.5).unwrap();
        assert_eq!(curve.lambda_violations, 0);
        assert_eq!(curve.n_violations, 0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            estimate_theta(&mc(10), 0.5, 2, 1.0),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(estimate_theta(&mc(0), 0.5, 2, 0.5).is_err());
        assert!(estimate_theta_curve(&mc(10), &[0.5], &[3, 2], 0.5).is_err());
        assert!(estimate_theta_curve(&mc(10), &[0.5, 0.4], &[2, 3], 0.5).is_err());
        assert!(truncation_gap_curve(&mc(10), 1.0, &[1, 4], 0.5, 1.0).is_err());
        assert!(truncation_gap_at_radii(&mc(10), 1.0, &[1.0, 3.0], 2.0).is_err());
    }

    #[test]
    fn tail_edge_cases() {
        let t = cluster_size_tail(&mc(200), 0.5, &[0, 1, 2, 100], 3, 0.5).unwrap();
        assert_eq!(t.estimates[0].mean, 1.0);
        // |Lambda_3| = 25
        assert_eq!(t.estimates[3].mean, 0.0);
        assert!(t.estimates.windows(2).all(|w| w[0].mean >= w[1].mean));
    }

    #[test]
    fn gap_vanishes_at_the_reference_radius() {
        let g = truncation_gap_at_radii(&mc(200), 2.0, &[1.0, 2.0, 3.0], 3.0).unwrap();
        assert_eq!(g.estimates[2].mean, 0.0);
        assert_eq!(g.nesting_violations, 0);
        assert!(g.estimates.windows(2).all(|w| w[0].mean >= w[1].mean));
    }
}
