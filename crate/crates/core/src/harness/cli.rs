use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use super::config::{parse_grid, Experiment, ExperimentConfig};
use super::{run_experiment, write_outputs};
use crate::error::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, Error>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
        .collect()
}

/// Monte Carlo experiments on the graphical representation of the contact
/// process. Flags override values from `--config`.
#[derive(Debug, Parser)]
#[command(name = "contact-perc", version)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, conflicts_with = "lambda_grid")]
    pub lambda: Option<f64>,
    /// Inclusive grid `lo:hi:step`.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<u32>,
    /// Comma-separated increasing list.
    #[arg(long)]
    pub n_list: Option<String>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Block side `N` of the renormalization experiments (even).
    #[arg(long = "cap-N")]
    pub cap_n: Option<u32>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV path; the JSON sidecar goes to `<out>.json`. Stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file (a previous sidecar works).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Finite-difference step for `russo-check`.
    #[arg(long)]
    pub h: Option<f64>,
    /// Comma-separated cluster sizes for the tail experiments.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Reference radius factor for `tv-gap`.
    #[arg(long)]
    pub ref_multiplier: Option<f64>,
}

impl Cli {
    /// Config file (or defaults) with every given flag applied on top.
    pub fn into_config(self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if self.experiment.is_some() {
            c.experiment = self.experiment;
        }
        if let Some(d) = self.d {
            c.d = d;
        }
        if let Some(l) = self.lambda {
            c.lambda = Some(l);
            c.lambda_grid = None;
        }
        if let Some(g) = &self.lambda_grid {
            c.lambda_grid = Some(parse_grid(g)?);
            c.lambda = None;
        }
        if let Some(n) = self.n {
            c.n = Some(n);
            c.n_list = None;
        }
        if let Some(l) = &self.n_list {
            c.n_list = Some(parse_list(l)?);
            c.n = None;
        }
        if self.k.is_some() {
            c.k = self.k;
        }
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        if self.epsilon.is_some() {
            c.epsilon = self.epsilon;
        }
        if self.cap_n.is_some() {
            c.cap_n = self.cap_n;
        }
        if let Some(r) = self.replicas {
            c.replicas = r;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        if let Some(h) = self.h {
            c.h = h;
        }
        if let Some(s) = &self.sizes {
            c.sizes = Some(parse_list(s)?);
        }
        if let Some(m) = self.ref_multiplier {
            c.ref_multiplier = m;
        }
        Ok(c)
    }
}

fn fail(code: i32, kind: &str, reason: &str, detail: &str) -> i32 {
    let detail = detail.replace('\n', " ");
    let _ = writeln!(std::io::stderr(), "{kind}: {reason}: {detail}");
    code
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
/// Failures print one line `validation-error: <code>: <message>` or
/// `runtime-error: <code>: <message>` on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(EXIT_VALIDATION, "validation-error", "usage", first);
        }
    };
    let config = match cli.into_config().and_then(ExperimentConfig::resolve) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_VALIDATION, "validation-error", e.code(), &e.to_string()),
    };
    let rows = match run_experiment(&config) {
        Ok(rows) => rows,
        Err(e) => return fail(EXIT_RUNTIME, "runtime-error", e.code(), &e.to_string()),
    };
    match write_outputs(&config, &rows) {
        Ok(()) => 0,
        Err(e) => fail(EXIT_RUNTIME, "runtime-error", "io", &e.to_string()),
    }
}
