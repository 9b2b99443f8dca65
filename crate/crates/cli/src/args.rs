//! Command-line values with textual forms.

use std::fmt;
use std::str::FromStr;

/// Comma-separated reals, e.g. `0.25,0.75`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reals(pub Vec<f64>);

impl FromStr for Reals {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Reals)
    }
}

/// Comma-separated counts, e.g. `4,6,8`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<usize>);

impl FromStr for Counts {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Counts)
    }
}

/// Rows separated by `;`, entries by `,`, e.g. `0.9,0.1;0.1,0.9`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rows(pub Vec<Vec<f64>>);

impl FromStr for Rows {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(';').map(|r| r.parse::<Reals>().map(|v| v.0)).collect::<Result<Vec<_>, _>>().map(Rows)
    }
}

/// Inclusive arithmetic grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    /// Slack that keeps a stop value reached up to rounding on the grid.
    const SLACK: f64 = 1e-9;

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + Self::SLACK).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got `{s}`"));
        };
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if !(step > 0.0) || stop < start {
            return Err(format!("empty grid `{s}`: need step > 0 and stop >= start"));
        }
        Ok(Grid { start, stop, step })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}
