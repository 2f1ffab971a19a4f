//! Resolved run configuration.
//!
//! Precedence, lowest to highest: built-in defaults, command-line flags,
//! then the config file — file entries override flags, so a checked-in
//! config pins a run exactly. The resolved configuration is echoed into
//! every output artifact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use mrc_core::inference::CiMethod;
use mrc_core::sampling::{CovariateLaw, ErrorDist, PopulationModel, SamplingScheme};
use mrc_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Column names for tabular input.
#[derive(Debug, Clone, Serialize)]
pub struct Columns {
    pub y: String,
    pub z: String,
    pub x: Vec<String>,
    pub delta: Option<String>,
    pub trunc: Option<String>,
}

impl Default for Columns {
    fn default() -> Self {
        Columns {
            y: "y".into(),
            z: "z".into(),
            x: Vec::new(), // empty means "every remaining column"
            delta: None,
            trunc: None,
        }
    }
}

/// Everything a run needs, resolved from defaults, flags, and config file.
#[derive(Debug, Clone, Serialize)]
pub struct CliConfig {
    pub input: Option<String>,
    pub columns: Columns,
    pub out: Option<String>,
    pub format: OutputFormat,
    pub seed: u64,
    pub n: usize,
    pub replications: usize,
    pub resamples: usize,
    pub scheme: String,
    pub regions: Vec<(f64, f64)>,
    pub error: String,
    pub ci_level: f64,
    pub ci_method: CiMethod,
    pub smoothed_bandwidth: Option<f64>,
    pub ratio: Option<String>,
    pub emit_data: bool,
    pub table1: bool,
    pub efficiency: bool,
    pub serial: bool,
    pub verbosity: u8,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            input: None,
            columns: Columns::default(),
            out: None,
            format: OutputFormat::Json,
            seed: 0,
            n: 200,
            replications: 100,
            resamples: 500,
            scheme: "4".into(),
            regions: Vec::new(),
            error: "normal".into(),
            ci_level: 0.95,
            ci_method: CiMethod::Normal,
            smoothed_bandwidth: None,
            ratio: None,
            emit_data: false,
            table1: false,
            efficiency: false,
            serial: false,
            verbosity: 0,
        }
    }
}

impl CliConfig {
    /// Parse `--columns y=...,z=...,x=a+b` (x entries may repeat).
    pub fn apply_columns_flag(&mut self, spec: &str) -> Result<(), String> {
        let mut got_x = Vec::new();
        for part in spec.split(',').filter(|s| !s.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("column entry '{part}' is not key=value"))?;
            match key.trim() {
                "y" => self.columns.y = value.trim().to_string(),
                "z" => self.columns.z = value.trim().to_string(),
                "x" => got_x.extend(value.split('+').map(|s| s.trim().to_string())),
                "delta" => self.columns.delta = Some(value.trim().to_string()),
                "trunc" => self.columns.trunc = Some(value.trim().to_string()),
                other => return Err(format!("unknown column key '{other}'")),
            }
        }
        if !got_x.is_empty() {
            self.columns.x = got_x;
        }
        Ok(())
    }

    /// Parse `--regions lo:hi,lo:hi` with `inf`/`-inf` endpoints.
    pub fn apply_regions_flag(&mut self, spec: &str) -> Result<(), String> {
        let mut regions = Vec::new();
        for part in spec.split(',').filter(|s| !s.is_empty()) {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| format!("region '{part}' is not lo:hi"))?;
            let parse = |s: &str| -> Result<f64, String> {
                match s.trim() {
                    "inf" | "+inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => other
                        .parse()
                        .map_err(|_| format!("bad region endpoint '{other}'")),
                }
            };
            regions.push((parse(lo)?, parse(hi)?));
        }
        self.regions = regions;
        Ok(())
    }

    /// Overlay `key = value` lines from a config file (highest precedence).
    /// Returns the keys that were set.
    pub fn apply_config_file(&mut self, path: &Path) -> Result<Vec<String>, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let entries = parse_key_values(&text)?;
        for (key, value) in &entries {
            self.apply_entry(key, value)
                .map_err(|e| format!("config key '{key}': {e}"))?;
        }
        Ok(entries.into_iter().map(|(k, _)| k).collect())
    }

    fn apply_entry(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |what: &str| format!("cannot parse '{value}' as {what}");
        match key {
            "input" => self.input = Some(value.to_string()),
            "out" => self.out = Some(value.to_string()),
            "format" => {
                self.format = match value {
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    _ => return Err(bad("json|csv")),
                }
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            "n" => self.n = value.parse().map_err(|_| bad("integer"))?,
            "replications" => self.replications = value.parse().map_err(|_| bad("integer"))?,
            "resamples" => self.resamples = value.parse().map_err(|_| bad("integer"))?,
            "scheme" => self.scheme = value.to_string(),
            "regions" => self.apply_regions_flag(value)?,
            "error" => self.error = value.to_string(),
            "ci_level" => self.ci_level = value.parse().map_err(|_| bad("real"))?,
            "ci" => {
                self.ci_method = match value {
                    "normal" => CiMethod::Normal,
                    "percentile" => CiMethod::Percentile,
                    _ => return Err(bad("normal|percentile")),
                }
            }
            "smoothed_bandwidth" => {
                self.smoothed_bandwidth = Some(value.parse().map_err(|_| bad("real"))?)
            }
            "ratio" => self.ratio = Some(value.to_string()),
            "emit_data" => self.emit_data = value.parse().map_err(|_| bad("bool"))?,
            "table1" => self.table1 = value.parse().map_err(|_| bad("bool"))?,
            "efficiency" => self.efficiency = value.parse().map_err(|_| bad("bool"))?,
            "serial" => self.serial = value.parse().map_err(|_| bad("bool"))?,
            "columns.y" => self.columns.y = value.to_string(),
            "columns.z" => self.columns.z = value.to_string(),
            "columns.x" => {
                self.columns.x = value
                    .split(['+', ','])
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "columns.delta" => self.columns.delta = Some(value.to_string()),
            "columns.trunc" => self.columns.trunc = Some(value.to_string()),
            "anchor" => self.columns.z = value.to_string(),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn error_dist(&self) -> Result<ErrorDist, Error> {
        match self.error.as_str() {
            "dexp" => Ok(ErrorDist::DoubleExponential),
            "normal" => Ok(ErrorDist::StdNormal),
            "ev" => Ok(ErrorDist::StdExtremeValue),
            "logistic" => Ok(ErrorDist::StdLogistic),
            "mixture" => Ok(ErrorDist::NormalBernoulliMixture),
            other => Err(Error::InvalidArgument(format!(
                "unknown error distribution '{other}' (dexp|normal|ev|logistic|mixture)"
            ))),
        }
    }

    pub fn sampling_scheme(&self) -> Result<SamplingScheme, Error> {
        match self.scheme.as_str() {
            "1" => Ok(SamplingScheme::Scheme1),
            "2" => Ok(SamplingScheme::Scheme2),
            "3" => Ok(SamplingScheme::Scheme3),
            "4" => Ok(SamplingScheme::Scheme4),
            "5" => Ok(SamplingScheme::Scheme5),
            "custom" => {
                if self.regions.is_empty() {
                    Err(Error::InvalidArgument(
                        "scheme 'custom' needs --regions lo:hi,...".into(),
                    ))
                } else {
                    Ok(SamplingScheme::Custom {
                        regions: self.regions.clone(),
                    })
                }
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (1..5|custom)"
            ))),
        }
    }

    /// Simulation model implied by the error choice: the bivariate-normal
    /// design for the Table 1 distributions, the scalar design for the
    /// mixture robustness check.
    pub fn population_model(&self) -> Result<PopulationModel, Error> {
        let error = self.error_dist()?;
        if error == ErrorDist::NormalBernoulliMixture {
            Ok(PopulationModel::new(
                vec![1.0],
                error,
                CovariateLaw::ScalarNormal,
            ))
        } else {
            Ok(PopulationModel::table1(error))
        }
    }

    /// Scheme default for the mixture design when none was given
    /// explicitly: the two-sided region `y < -1.5` or `y > 2.5`.
    pub fn simulate_scheme(&self, scheme_was_set: bool) -> Result<SamplingScheme, Error> {
        if !scheme_was_set && self.error == "mixture" {
            Ok(SamplingScheme::mixture_design())
        } else {
            self.sampling_scheme()
        }
    }

    /// `--ratio NUM` or `--ratio NUM/DEN` or `--ratio NUM/anchor`.
    pub fn ratio_coords(&self) -> Result<Option<(usize, Option<usize>)>, Error> {
        let Some(spec) = &self.ratio else {
            return Ok(None);
        };
        let bad = || Error::InvalidArgument(format!("bad --ratio '{spec}' (NUM[/DEN|/anchor])"));
        let (num, den) = match spec.split_once('/') {
            None => (spec.as_str(), None),
            Some((n, "anchor")) => (n, None),
            Some((n, d)) => (n, Some(d)),
        };
        let num: usize = num.trim().parse().map_err(|_| bad())?;
        let den: Option<usize> = match den {
            None => None,
            Some(d) => Some(d.trim().parse().map_err(|_| bad())?),
        };
        Ok(Some((num, den)))
    }
}

/// Minimal `key = value` file format: one entry per line, `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    let mut seen = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some(prev) = seen.insert(key.clone(), lineno) {
            return Err(format!(
                "line {}: key '{key}' already set on line {}",
                lineno + 1,
                prev + 1
            ));
        }
        entries.push((key, value));
    }
    Ok(entries)
}
