use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::stats::Histogram;
use crate::error::{Error, Result};

/// Acceptance region of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    /// |value − target| ≤ tol.
    Within { target: f64, tol: f64 },
}

impl Tolerance {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Tolerance::AtMost { bound } => v <= bound,
            Tolerance::AtLeast { bound } => v >= bound,
            Tolerance::Within { target, tol } => (v - target).abs() <= tol,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Tolerance::AtMost { bound } => format!("<= {}", num(bound)),
            Tolerance::AtLeast { bound } => format!(">= {}", num(bound)),
            Tolerance::Within { target, tol } => format!("{} ± {}", num(target), num(tol)),
        }
    }
}

fn num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{v:.6}")
    } else {
        format!("{v:.4e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
    /// Module path of the code that produced the value.
    pub provenance: String,
    /// Monte-Carlo standard error, when the value is an estimate.
    pub sigma: Option<f64>,
}

impl Metric {
    pub fn new(name: impl Into<String>, value: f64, tolerance: Tolerance, provenance: &str) -> Self {
        Metric {
            name: name.into(),
            value,
            pass: tolerance.admits(value),
            tolerance,
            provenance: provenance.into(),
            sigma: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    /// Effective parameters after defaults.
    pub params: BTreeMap<String, serde_json::Value>,
    pub metrics: Vec<Metric>,
    /// Wall-clock limits. Kept apart so `metrics` stays seed-determined.
    pub timings: Vec<Metric>,
    pub histograms: BTreeMap<String, Histogram>,
    pub wall_clock_ms: u64,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Report {
            config,
            params: BTreeMap::new(),
            metrics: vec![],
            timings: vec![],
            histograms: BTreeMap::new(),
            wall_clock_ms: 0,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) {
        self.params.insert(key.into(), serde_json::to_value(v).expect("plain value"));
    }

    pub fn push(&mut self, m: Metric) {
        self.metrics.push(m);
    }

    pub fn histogram(&mut self, key: &str, h: Histogram) {
        self.histograms.insert(key.into(), h);
    }

    pub fn runtime_limit(&mut self, name: &str, elapsed: Duration, limit_s: f64, provenance: &str) {
        self.timings.push(Metric::new(
            name,
            elapsed.as_secs_f64(),
            Tolerance::AtMost { bound: limit_s },
            provenance,
        ));
    }

    pub fn passed(&self) -> bool {
        self.metrics.iter().chain(&self.timings).all(|m| m.pass)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().chain(&self.timings).find(|m| m.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// JSON without wall-clock fields: identical across runs with one seed.
    pub fn to_canonical_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Format(e.to_string()))?;
        let obj = v.as_object_mut().expect("struct serializes to an object");
        obj.remove("timings");
        obj.remove("wall_clock_ms");
        serde_json::to_string_pretty(&v).map_err(|e| Error::Format(e.to_string()))
    }

    /// One row per metric: name, value, σ, tolerance, verdict, provenance.
    pub fn to_text(&self) -> String {
        let rows: Vec<[String; 6]> = self
            .metrics
            .iter()
            .chain(&self.timings)
            .map(|m| {
                [
                    m.name.clone(),
                    num(m.value),
                    m.sigma.map(num).unwrap_or_else(|| "-".into()),
                    m.tolerance.describe(),
                    if m.pass { "PASS" } else { "FAIL" }.into(),
                    m.provenance.clone(),
                ]
            })
            .collect();
        let head = ["metric", "value", "sigma", "tolerance", "result", "provenance"].map(String::from);
        let mut width = head.clone().map(|h| h.chars().count());
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = format!("experiment {} (seed {})\n", self.config.experiment, self.config.seed);
        for r in std::iter::once(&head).chain(&rows) {
            let cells: Vec<String> = r
                .iter()
                .zip(width)
                .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        let _ = writeln!(out, "wall clock {} ms", self.wall_clock_ms);
        out
    }

    /// Histograms as `histogram,key,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("histogram,key,count\n");
        for (h, table) in &self.histograms {
            for (k, c) in table {
                let _ = writeln!(out, "{h},{k},{c}");
            }
        }
        out
    }
}
