use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::{PointConfiguration, SpaceTimePoint, SpaceTimeWindow};

impl PointConfiguration {
    /// Line-oriented text form: one point per line as `vertex time U rho`,
    /// e.g. `0,-1 -0.25 0.75 +e2`, in configuration order. Floats use the
    /// shortest round-tripping representation.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in self.points() {
            writeln!(out, "{} {} {} {}", p.vertex, p.time, p.uniform, p.direction)
                .expect("writing to a String");
        }
        out
    }

    /// Parses [`Self::dump`] output back into a configuration on `window`.
    pub fn from_dump(window: SpaceTimeWindow, text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [vertex, time, uniform, direction] = fields[..] else {
                return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 1)));
            };
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            points.push(SpaceTimePoint {
                vertex: vertex.parse()?,
                time: num(time)?,
                uniform: num(uniform)?,
                direction: direction.parse()?,
            });
        }
        PointConfiguration::new(window, points)
    }
}
