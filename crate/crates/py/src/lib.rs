//! Python bindings: configurations, fields, decision trees and the Monte
//! Carlo estimators. Library errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use contact_perc::graphical::{self, SpaceTimeWindow};
use contact_perc::harness::{self, ExperimentConfig};
use contact_perc::lattice;
use contact_perc::osss;
use contact_perc::percolation;
use contact_perc::renorm;
use contact_perc::rng::seed_for;
use contact_perc::stats::Estimate;
use contact_perc::{MonteCarlo, Vertex};

fn err(e: contact_perc::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.code()))
}

fn vertex(coords: Vec<i32>) -> Vertex {
    Vertex::new(coords)
}

fn pair(e: Estimate) -> (f64, f64) {
    (e.mean, e.stderr)
}

/// Poisson points with labels on a space-time window.
#[pyclass(name = "PointConfiguration", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyConfiguration(graphical::PointConfiguration);

#[pymethods]
impl PyConfiguration {
    /// Samples replica `replica` of master seed `seed` on
    /// `ball(center, radius) x [-height, 0]`.
    #[staticmethod]
    #[pyo3(signature = (center, radius, height, seed, replica=0))]
    fn sample(center: Vec<i32>, radius: f64, height: f64, seed: u64, replica: u64) -> PyResult<Self> {
        let window = SpaceTimeWindow::ball(&vertex(center), radius, height).map_err(err)?;
        Ok(Self(graphical::sample_points(&window, &mut seed_for(seed, replica).rng())))
    }

    /// Samples on the window read by the crossing event at scale `n`.
    #[staticmethod]
    #[pyo3(signature = (n, alpha, seed, replica=0, d=2))]
    fn for_crossing(n: u32, alpha: f64, seed: u64, replica: u64, d: usize) -> PyResult<Self> {
        let window = percolation::crossing_window(d, n, alpha).map_err(err)?;
        Ok(Self(graphical::sample_points(&window, &mut seed_for(seed, replica).rng())))
    }

    /// Parses `dump()` text onto `ball(center, radius) x [-height, 0]`.
    #[staticmethod]
    fn from_dump(center: Vec<i32>, radius: f64, height: f64, text: &str) -> PyResult<Self> {
        let window = SpaceTimeWindow::ball(&vertex(center), radius, height).map_err(err)?;
        graphical::PointConfiguration::from_dump(window, text).map(Self).map_err(err)
    }

    fn dump(&self) -> String {
        self.0.dump()
    }

    /// `(vertex, time, uniform, direction)` per point.
    fn points(&self) -> Vec<(Vec<i32>, f64, f64, String)> {
        self.0
            .points()
            .iter()
            .map(|p| (p.vertex.coords().to_vec(), p.time, p.uniform, p.direction.to_string()))
            .collect()
    }

    /// `True` for a star, else the arrow direction.
    fn marks(&self, lambda: f64) -> PyResult<Vec<String>> {
        Ok(self
            .0
            .marks(lambda)
            .map_err(err)?
            .into_iter()
            .map(|m| match m {
                graphical::Mark::Star => "*".to_string(),
                graphical::Mark::Arrow(d) => d.to_string(),
            })
            .collect())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Blocks `{v} x (-(j+1) eps, -j eps]` of the OSSS partition.
#[pyclass(name = "BlockPartition", frozen)]
struct PyPartition(osss::BlockPartition);

#[pymethods]
impl PyPartition {
    #[new]
    #[pyo3(signature = (n, alpha, epsilon, d=2))]
    fn new(n: u32, alpha: f64, epsilon: f64, d: usize) -> PyResult<Self> {
        osss::partition_blocks(d, n, alpha, epsilon).map(Self).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn slots(&self) -> u32 {
        self.0.slots()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    fn vertices(&self) -> Vec<Vec<i32>> {
        self.0.vertices().iter().map(|v| v.coords().to_vec()).collect()
    }

    /// Samples a configuration on the partition's window.
    #[pyo3(signature = (seed, replica=0))]
    fn sample(&self, seed: u64, replica: u64) -> PyConfiguration {
        PyConfiguration(graphical::sample_points(
            self.0.window(),
            &mut seed_for(seed, replica).rng(),
        ))
    }

    /// Decision tree `T_k` on `config`: a dict with `outcome`,
    /// `halt_reason`, `determined`, `revealed_counts`, `revealed` and `dump`.
    fn run_decision_tree<'py>(
        &self,
        py: Python<'py>,
        config: &PyConfiguration,
        lambda: f64,
        k: u32,
    ) -> PyResult<Bound<'py, PyDict>> {
        let t = osss::run_decision_tree(&self.0, &config.0, lambda, k).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("outcome", t.outcome)?;
        let halt = match t.halt_reason {
            osss::HaltReason::FoundCrossing => "found-crossing",
            osss::HaltReason::ClusterExhausted => "cluster-exhausted",
        };
        out.set_item("halt_reason", halt)?;
        let coords = |vs: &[Vertex]| vs.iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>();
        out.set_item("determined", coords(&t.determined_vertices))?;
        out.set_item("revealed_counts", t.revealed_counts.clone())?;
        out.set_item("revealed", coords(&t.revealed_vertices))?;
        out.set_item("dump", t.dump())?;
        Ok(out)
    }

    /// Influence of every block as `(mean, stderr)`, in block order.
    #[pyo3(signature = (lambda, replicas, seed))]
    fn influence_profile(&self, py: Python<'_>, lambda: f64, replicas: u64, seed: u64) -> PyResult<Vec<(f64, f64)>> {
        let mc = MonteCarlo::new(self.0.dim(), replicas, seed);
        let est = py
            .detach(|| osss::influence_profile(&mc, &self.0, lambda))
            .map_err(err)?;
        Ok(est.into_iter().map(pair).collect())
    }

    /// Revealment of every partition vertex under `T_k`.
    #[pyo3(signature = (lambda, k, replicas, seed))]
    fn revealment_profile(
        &self,
        py: Python<'_>,
        lambda: f64,
        k: u32,
        replicas: u64,
        seed: u64,
    ) -> PyResult<Vec<(f64, f64)>> {
        let mc = MonteCarlo::new(self.0.dim(), replicas, seed);
        let est = py
            .detach(|| osss::revealment_profile(&mc, &self.0, lambda, k))
            .map_err(err)?;
        Ok(est.into_iter().map(pair).collect())
    }

    /// Both sides of the OSSS inequality with standard errors.
    #[pyo3(signature = (lambda, k, replicas, seed))]
    fn osss_check<'py>(
        &self,
        py: Python<'py>,
        lambda: f64,
        k: u32,
        replicas: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mc = MonteCarlo::new(self.0.dim(), replicas, seed);
        let c = py
            .detach(|| osss::osss_check(&mc, &self.0, lambda, k))
            .map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("theta", pair(c.theta))?;
        out.set_item("lhs", pair(c.lhs))?;
        out.set_item("rhs", pair(c.rhs))?;
        out.set_item("total_influence", pair(c.total_influence))?;
        out.set_item("total_revealment", pair(c.total_revealment))?;
        out.set_item("holds", c.holds(3.0))?;
        Ok(out)
    }
}

/// Occupancy bits of `targets` in the field truncated at `radius`.
#[pyfunction]
fn truncated_field(config: &PyConfiguration, lambda: f64, targets: Vec<Vec<i32>>, radius: f64) -> PyResult<Vec<bool>> {
    let targets: Vec<Vertex> = targets.into_iter().map(vertex).collect();
    let field = graphical::truncated_field(&config.0, lambda, &targets, radius).map_err(err)?;
    Ok(targets.iter().map(|v| field.occupied(v)).collect())
}

/// Whether an active path joins `(u, s)` to `(w, t)`.
#[pyfunction]
fn active_path_exists(config: &PyConfiguration, lambda: f64, u: Vec<i32>, s: f64, w: Vec<i32>, t: f64) -> PyResult<bool> {
    graphical::active_path_exists(&config.0, lambda, (&vertex(u), s), (&vertex(w), t)).map_err(err)
}

/// `0 <-> dLambda_n` through the field truncated at `radius`.
#[pyfunction]
fn crossing_indicator(config: &PyConfiguration, lambda: f64, n: u32, radius: f64) -> PyResult<bool> {
    percolation::crossing_indicator(&config.0, lambda, n, radius).map_err(err)
}

#[pyfunction]
fn truncation_radius(n: u32, alpha: f64) -> f64 {
    percolation::truncation_radius(n, alpha)
}

/// Indices of the pivotal points of the crossing event at scale `n`.
#[pyfunction]
fn pivotal_points(config: &PyConfiguration, lambda: f64, n: u32, alpha: f64) -> PyResult<Vec<usize>> {
    Ok(osss::pivotal_points(&config.0, lambda, n, alpha)
        .map_err(err)?
        .pivotal_point_ids)
}

#[pyfunction]
#[pyo3(signature = (size, d=2))]
fn count_lattice_animals(size: usize, d: usize) -> PyResult<u64> {
    lattice::count_lattice_animals(d, size).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (lambda, n, alpha, replicas, seed, d=2))]
fn estimate_theta(py: Python<'_>, lambda: f64, n: u32, alpha: f64, replicas: u64, seed: u64, d: usize) -> PyResult<(f64, f64)> {
    let mc = MonteCarlo::new(d, replicas, seed);
    py.detach(|| percolation::estimate_theta(&mc, lambda, n, alpha))
        .map(pair)
        .map_err(err)
}

/// `theta_n(lambda)` on a grid, as a nested list `[lambda][n]` of
/// `(mean, stderr)`.
#[pyfunction]
#[pyo3(signature = (lambdas, ns, alpha, replicas, seed, d=2))]
fn estimate_theta_curve(
    py: Python<'_>,
    lambdas: Vec<f64>,
    ns: Vec<u32>,
    alpha: f64,
    replicas: u64,
    seed: u64,
    d: usize,
) -> PyResult<Vec<Vec<(f64, f64)>>> {
    let mc = MonteCarlo::new(d, replicas, seed);
    let curve = py
        .detach(|| percolation::estimate_theta_curve(&mc, &lambdas, &ns, alpha))
        .map_err(err)?;
    Ok(curve
        .estimates
        .into_iter()
        .map(|row| row.into_iter().map(pair).collect())
        .collect())
}

/// Tail `P(|C| >= m)` with its exponential fit `(rate, r_squared)`.
#[pyfunction]
#[pyo3(signature = (lambda, sizes, box_radius, alpha, replicas, seed, d=2))]
fn cluster_size_tail<'py>(
    py: Python<'py>,
    lambda: f64,
    sizes: Vec<u64>,
    box_radius: u32,
    alpha: f64,
    replicas: u64,
    seed: u64,
    d: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mc = MonteCarlo::new(d, replicas, seed);
    let tail = py
        .detach(|| percolation::cluster_size_tail(&mc, lambda, &sizes, box_radius, alpha))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("estimates", tail.estimates.into_iter().map(pair).collect::<Vec<_>>())?;
    out.set_item("fit", tail.fit.map(|f| (f.rate, f.r_squared)))?;
    out.set_item("edge_touch_fraction", tail.edge_touch_fraction)?;
    Ok(out)
}

/// Gap `P(sigma_0^(n) != sigma_0^(ref))` per `n` with its fit rate.
#[pyfunction]
#[pyo3(signature = (lambda, ns, alpha, ref_multiplier, replicas, seed, d=2))]
fn truncation_gap_curve<'py>(
    py: Python<'py>,
    lambda: f64,
    ns: Vec<u32>,
    alpha: f64,
    ref_multiplier: f64,
    replicas: u64,
    seed: u64,
    d: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mc = MonteCarlo::new(d, replicas, seed);
    let gap = py
        .detach(|| percolation::truncation_gap_curve(&mc, lambda, &ns, alpha, ref_multiplier))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("estimates", gap.estimates.into_iter().map(pair).collect::<Vec<_>>())?;
    out.set_item("fit_rate", gap.fit.map(|f| f.rate))?;
    out.set_item("nesting_violations", gap.nesting_violations)?;
    Ok(out)
}

/// Finite difference against the pivotal form of `d/dlambda P(A)`.
#[pyfunction]
#[pyo3(signature = (lambda, h, n, alpha, replicas, seed, d=2))]
fn russo_check<'py>(
    py: Python<'py>,
    lambda: f64,
    h: f64,
    n: u32,
    alpha: f64,
    replicas: u64,
    seed: u64,
    d: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mc = MonteCarlo::new(d, replicas, seed);
    let c = py
        .detach(|| osss::russo_check(&mc, lambda, h, n, alpha))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("finite_difference", pair(c.finite_difference))?;
    out.set_item("pivotal_form", pair(c.pivotal_form))?;
    out.set_item("c_lambda", c.c_lambda)?;
    out.set_item("agrees", c.agrees(3.0))?;
    Ok(out)
}

/// Correlation of the block events at `v` and `w`.
#[pyfunction]
#[pyo3(signature = (v, w, side, lambda, alpha, replicas, seed))]
fn independence_check<'py>(
    py: Python<'py>,
    v: Vec<i32>,
    w: Vec<i32>,
    side: u32,
    lambda: f64,
    alpha: f64,
    replicas: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mc = MonteCarlo::new(v.len(), replicas, seed);
    let (v, w) = (vertex(v), vertex(w));
    let c = py
        .detach(|| renorm::independence_check(&mc, &v, &w, side, lambda, alpha))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("corr", pair(c.corr))?;
    out.set_item("p_v", pair(c.p_v))?;
    out.set_item("p_w", pair(c.p_w))?;
    out.set_item("disjoint_regions", c.disjoint_regions)?;
    out.set_item("degenerate", c.degenerate)?;
    Ok(out)
}

/// Runs a harness experiment from a JSON config and returns the CSV text.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json)
        .and_then(ExperimentConfig::resolve)
        .map_err(err)?;
    let rows = py.detach(|| harness::run_experiment(&config)).map_err(err)?;
    harness::to_csv(&rows).map_err(err)
}

#[pymodule]
fn contact_perc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyPartition>()?;
    m.add_function(wrap_pyfunction!(truncated_field, m)?)?;
    m.add_function(wrap_pyfunction!(active_path_exists, m)?)?;
    m.add_function(wrap_pyfunction!(crossing_indicator, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_radius, m)?)?;
    m.add_function(wrap_pyfunction!(pivotal_points, m)?)?;
    m.add_function(wrap_pyfunction!(count_lattice_animals, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_theta, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_theta_curve, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_size_tail, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_gap_curve, m)?)?;
    m.add_function(wrap_pyfunction!(russo_check, m)?)?;
    m.add_function(wrap_pyfunction!(independence_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
