//! Experiment configuration, execution and serialization.
//!
//! A run is a pure function of its resolved [`ExperimentConfig`]: replicas
//! draw from per-index streams and are merged in index order, so the worker
//! count only changes the wall time.

mod cli;
mod config;

pub use cli::{main_with_args, Cli, EXIT_RUNTIME, EXIT_VALIDATION};
pub use config::{parse_grid, Experiment, ExperimentConfig};

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Vertex;
use crate::montecarlo::MonteCarlo;
use crate::stats::{DecayFit, Estimate};
use crate::{osss, percolation, renorm};

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "d",
    "lambda",
    "n",
    "k",
    "alpha",
    "epsilon",
    "N",
    "estimate",
    "stderr",
    "replicas",
    "diagnostics",
    "wall_time",
];

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub d: usize,
    pub lambda: Option<f64>,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub cap_n: Option<u32>,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: u64,
    pub diagnostics: Vec<(String, String)>,
    pub wall_time: f64,
}

impl ResultRow {
    fn new(config: &ExperimentConfig, lambda: f64, estimate: Estimate) -> Self {
        ResultRow {
            experiment: config.experiment.map_or("", Experiment::name),
            d: config.d,
            lambda: Some(lambda),
            n: config.n_max().ok(),
            k: config.k,
            alpha: config.alpha,
            epsilon: config.epsilon,
            cap_n: config.cap_n,
            estimate: estimate.mean,
            stderr: estimate.stderr,
            replicas: estimate.replicas,
            diagnostics: Vec::new(),
            wall_time: 0.0,
        }
    }

    fn with_n(mut self, n: u32) -> Self {
        self.n = Some(n);
        self
    }

    fn diag(mut self, key: &str, value: impl ToString) -> Self {
        self.diagnostics.push((key.to_string(), value.to_string()));
        self
    }

    fn fit(self, fit: Option<DecayFit>) -> Self {
        match fit {
            Some(f) => self
                .diag("fit_rate", f.rate)
                .diag("fit_amplitude", f.amplitude)
                .diag("fit_r2", f.r_squared)
                .diag("fit_dropped", f.dropped),
            None => self.diag("fit_rate", "none"),
        }
    }

    /// `key=value;` pairs.
    pub fn diagnostics_field(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.diagnostics {
            let _ = write!(s, "{k}={v};");
        }
        s
    }

    pub fn fields(&self) -> [String; 13] {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let opt_u = |x: Option<u32>| x.map_or(String::new(), |v| v.to_string());
        [
            self.experiment.to_string(),
            self.d.to_string(),
            opt(self.lambda),
            opt_u(self.n),
            opt_u(self.k),
            self.alpha.to_string(),
            opt(self.epsilon),
            opt_u(self.cap_n),
            self.estimate.to_string(),
            self.stderr.to_string(),
            self.replicas.to_string(),
            self.diagnostics_field(),
            format!("{:.3}", self.wall_time),
        ]
    }
}

fn vertex_key(v: &Vertex) -> String {
    v.coords().iter().map(i32::to_string).collect::<Vec<_>>().join(":")
}

/// Runs the experiment on a dedicated pool of `config.workers` threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let config = config.clone().resolve()?;
    let workers = config.workers.expect("resolved");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid {
            field: "workers",
            reason: e.to_string(),
        })?;
    let start = Instant::now();
    let mut rows = pool.install(|| dispatch(&config))?;
    let elapsed = start.elapsed().as_secs_f64();
    for r in &mut rows {
        r.wall_time = elapsed;
    }
    Ok(rows)
}

fn dispatch(c: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mc = MonteCarlo::new(c.d, c.replicas, c.seed);
    let lambdas = c.lambdas()?;
    let mut rows = Vec::new();
    match c.experiment()? {
        Experiment::ThetaCurve => {
            let ns = c.ns()?;
            let curve = percolation::estimate_theta_curve(&mc, &lambdas, &ns, c.alpha)?;
            for (i, &l) in lambdas.iter().enumerate() {
                for (j, &n) in ns.iter().enumerate() {
                    rows.push(
                        ResultRow::new(c, l, curve.estimates[i][j])
                            .with_n(n)
                            .diag("lambda_violations", curve.lambda_violations)
                            .diag("n_violations", curve.n_violations)
                            .diag("gamma", c.gamma()),
                    );
                }
            }
        }
        Experiment::Tail => {
            let n = c.n_max()?;
            let sizes = c.sizes();
            for &l in &lambdas {
                let t = percolation::cluster_size_tail(&mc, l, &sizes, n, c.alpha)?;
                for (m, e) in sizes.iter().zip(&t.estimates) {
                    rows.push(
                        ResultRow::new(c, l, *e)
                            .with_n(n)
                            .diag("size", m)
                            .diag("edge_touch", t.edge_touch_fraction)
                            .fit(t.fit),
                    );
                }
            }
        }
        Experiment::TvGap => {
            let ns = c.ns()?;
            for &l in &lambdas {
                let g = percolation::truncation_gap_curve(&mc, l, &ns, c.alpha, c.ref_multiplier)?;
                for (i, &n) in ns.iter().enumerate() {
                    rows.push(
                        ResultRow::new(c, l, g.estimates[i])
                            .with_n(n)
                            .diag("radius", g.radii[i])
                            .diag("reference", g.reference_radius)
                            .diag("nesting_violations", g.nesting_violations)
                            .fit(g.fit),
                    );
                }
            }
        }
        Experiment::OsssCheck => {
            let p = osss::partition_blocks(c.d, c.n_max()?, c.alpha, c.epsilon.expect("resolved"))?;
            let k = c.k.expect("resolved");
            for &l in &lambdas {
                let o = osss::osss_check(&mc, &p, l, k)?;
                let holds = o.holds(3.0);
                rows.push(
                    ResultRow::new(c, l, o.lhs)
                        .diag("quantity", "lhs")
                        .diag("theta", o.theta.mean)
                        .diag("holds", holds),
                );
                rows.push(
                    ResultRow::new(c, l, o.rhs)
                        .diag("quantity", "rhs")
                        .diag("total_influence", o.total_influence.mean)
                        .diag("total_revealment", o.total_revealment.mean)
                        .diag("holds", holds),
                );
            }
        }
        Experiment::RussoCheck => {
            let n = c.n_max()?;
            for &l in &lambdas {
                let r = osss::russo_check(&mc, l, c.h, n, c.alpha)?;
                let agrees = r.agrees(3.0);
                for (name, e) in [("finite_difference", r.finite_difference), ("pivotal_form", r.pivotal_form)] {
                    rows.push(
                        ResultRow::new(c, l, e)
                            .diag("quantity", name)
                            .diag("h", c.h)
                            .diag("c_lambda", r.c_lambda)
                            .diag("slack", r.slack)
                            .diag("mean_pivotal", r.mean_pivotal.mean)
                            .diag("agrees", agrees),
                    );
                }
            }
        }
        Experiment::Revealment => {
            let p = osss::partition_blocks(c.d, c.n_max()?, c.alpha, c.epsilon.expect("resolved"))?;
            let k = c.k.expect("resolved");
            for &l in &lambdas {
                let prof = osss::revealment_profile(&mc, &p, l, k)?;
                for (v, e) in p.vertices().iter().zip(prof) {
                    rows.push(ResultRow::new(c, l, e).diag("vertex", vertex_key(v)));
                }
            }
        }
        Experiment::RenormIndependence => {
            let side = c.cap_n.expect("resolved");
            let v = Vertex::origin(c.d);
            let w = Vertex::axis(c.d, 0, 3 * c.d as i32);
            for &l in &lambdas {
                let r = renorm::independence_check(&mc, &v, &w, side, l, c.alpha)?;
                rows.push(
                    ResultRow::new(c, l, r.corr)
                        .diag("p_v", r.p_v.mean)
                        .diag("p_w", r.p_w.mean)
                        .diag("disjoint_regions", r.disjoint_regions)
                        .diag("degenerate", r.degenerate),
                );
            }
        }
        Experiment::RenormTail => {
            let side = c.cap_n.expect("resolved");
            let sizes = c.sizes();
            for &l in &lambdas {
                let t = renorm::block_tail_experiment(&mc, l, side, c.alpha, &sizes)?;
                let common = |row: ResultRow| {
                    row.diag("box_radius", t.box_radius)
                        .diag("covering_violations", t.covering_violations)
                        .diag("good_implies_event_violations", t.good_implies_event_violations)
                };
                rows.push(common(ResultRow::new(c, l, t.block_event).diag("quantity", "block_event")));
                for (m, e) in sizes.iter().zip(&t.direct) {
                    rows.push(common(ResultRow::new(c, l, *e).diag("quantity", "direct_tail").diag("size", m)));
                }
            }
        }
    }
    Ok(rows)
}

/// CSV text of `rows` with a header line.
pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invalid {
        field: "out",
        reason: e.to_string(),
    };
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid {
        field: "out",
        reason: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Sidecar contents: the resolved config plus code version and `gamma`.
/// Loading it back with `--config` reproduces the run.
pub fn sidecar_json(config: &ExperimentConfig) -> Result<String> {
    let mut value = serde_json::to_value(config).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = value.as_object_mut().expect("config serializes to an object");
    obj.insert("code_version".into(), env!("CARGO_PKG_VERSION").into());
    obj.insert("gamma".into(), config.gamma().into());
    serde_json::to_string_pretty(&value).map_err(|e| Error::Parse(e.to_string()))
}

/// `<out>.json` next to the CSV path.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the CSV (or stdout without `out`) and, with `out`, the sidecar.
pub fn write_outputs(config: &ExperimentConfig, rows: &[ResultRow]) -> std::io::Result<()> {
    let csv = to_csv(rows).map_err(std::io::Error::other)?;
    match &config.out {
        Some(path) => {
            std::fs::write(path, csv)?;
            let json = sidecar_json(config).map_err(std::io::Error::other)?;
            std::fs::write(sidecar_path(path), json)
        }
        None => std::io::stdout().lock().write_all(csv.as_bytes()),
    }
}
