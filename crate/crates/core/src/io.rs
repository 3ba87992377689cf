//! File formats: CSV tables, JSON reports, histogram exports and TOML run configuration.
//!
//! CSV is UTF-8, comma separated, with a mandatory header row and period
//! decimal marks. Numbers are written in shortest round-trip form, so a
//! written table reloads bit-identically.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::{Assessment, BaselineMode, BaselineSpec, DistanceDistribution, SafetyCheck};
use crate::error::{Error, Result};
use crate::linkage::{LinkageResult, LinkageScore};
use crate::privacy::{PrivacyCertificate, RecordVerdict};
use crate::table::{MicrodataTable, Role};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parse a CSV table. Row and column numbers in errors are 1-based and count
/// data rows only (the header is row 0).
pub fn parse_csv<R: Read>(reader: R, role: Role) -> Result<MicrodataTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |row: usize, col: usize, message: String| Error::Parse { row, col, message };

    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(0, 0, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::EmptyInput("missing header row".into()));
    }
    let m = headers.len();
    let mut columns = vec![Vec::new(); m];
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| parse_err(row, 0, e.to_string()))?;
        if rec.len() != m {
            return Err(Error::RaggedRow {
                row,
                expected: m,
                found: rec.len(),
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(row, j + 1, format!("{field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(row, j + 1, format!("{field:?} is not finite")));
            }
            columns[j].push(v);
        }
    }
    MicrodataTable::new(headers, columns, role)
}

pub fn load_csv(path: impl AsRef<Path>, role: Role) -> Result<MicrodataTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, role)
}

pub fn table_to_csv(table: &MicrodataTable) -> String {
    let mut out = table.attribute_names().join(",");
    out.push('\n');
    for i in 0..table.n_records() {
        let row: Vec<String> = (0..table.n_attributes())
            .map(|j| table.cell(i, j).to_string())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(table: &MicrodataTable, path: impl AsRef<Path>) -> Result<()> {
    write_text(path, &table_to_csv(table))
}

pub(crate) fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectReport {
    pub verdicts: Vec<RecordVerdict>,
    #[serde(default)]
    pub safety: Vec<SafetyCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum ReportBody {
    Certificate(PrivacyCertificate),
    Linkage {
        linkage: LinkageResult,
        score: Option<LinkageScore>,
    },
    Assessment(Assessment),
    Subject(SubjectReport),
}

impl ReportBody {
    fn is_empty(&self) -> bool {
        match self {
            ReportBody::Certificate(c) => c.per_record.is_empty(),
            ReportBody::Linkage { linkage, .. } => linkage.links.is_empty(),
            ReportBody::Assessment(a) => a.original.sample_size == 0 || a.baseline.sample_size == 0,
            ReportBody::Subject(s) => s.verdicts.is_empty() && s.safety.is_empty(),
        }
    }
}

/// Self-describing analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    /// Every non-secret seed that influenced the result.
    pub seeds: BTreeMap<String, u64>,
    /// Anonymization method and parameters.
    pub disclosure: Option<String>,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl Report {
    pub fn new(body: ReportBody, seeds: BTreeMap<String, u64>, disclosure: Option<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            seeds,
            disclosure,
            body,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        if self.body.is_empty() {
            return Err(Error::EmptyReport);
        }
        serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Report(format!(
                "unsupported schema version {}",
                report.schema_version
            )));
        }
        Ok(report)
    }
}

pub fn write_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let mut text = report.to_json()?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Report::from_json(&text)
}

/// Histogram rows `distance,frequency_original,frequency_baseline` from 0 up to
/// the larger of both supports and `through`, zero-filled.
pub fn histogram_csv(
    original: &DistanceDistribution,
    baseline: &DistanceDistribution,
    through: Option<usize>,
) -> String {
    let last = original
        .frequencies
        .keys()
        .chain(baseline.frequencies.keys())
        .copied()
        .chain(through)
        .max()
        .unwrap_or(0);
    let mut out = String::from("distance,frequency_original,frequency_baseline\n");
    for d in 0..=last {
        out.push_str(&format!("{d},{},{}\n", original.frequency(d), baseline.frequency(d)));
    }
    out
}

pub fn emit_histogram(
    original: &DistanceDistribution,
    baseline: &DistanceDistribution,
    through: Option<usize>,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_text(path, &histogram_csv(original, baseline, through))
}

/// Read back a histogram written by [`emit_histogram`] as `(distance, original, baseline)` rows.
pub fn load_histogram(path: impl AsRef<Path>) -> Result<Vec<(usize, f64, f64)>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i + 1,
            col: 0,
            message: e.to_string(),
        })?;
        let field = |j: usize| -> Result<&str> {
            rec.get(j).ok_or(Error::RaggedRow {
                row: i + 1,
                expected: 3,
                found: rec.len(),
            })
        };
        let num = |j: usize| -> Result<f64> {
            field(j)?.parse().map_err(|_| Error::Parse {
                row: i + 1,
                col: j + 1,
                message: "not a number".into(),
            })
        };
        let d = field(0)?.parse().map_err(|_| Error::Parse {
            row: i + 1,
            col: 1,
            message: "not a distance".into(),
        })?;
        rows.push((d, num(1)?, num(2)?));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    pub tie_break: u64,
    pub baseline: u64,
    pub mask: u64,
    pub synth: u64,
    /// Seeds withheld from every output. Only anonymization seeds (`mask`, `synth`) may be listed.
    pub secret: Vec<String>,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            tie_break: 0,
            baseline: 20_150_101,
            mask: 5,
            synth: 2,
            secret: vec!["mask".into(), "synth".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// `exhaustive`, `sampled`, or absent for automatic choice by size.
    pub mode: Option<BaselineMode>,
    pub sample_size: usize,
    pub exhaustive_cap: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            mode: None,
            sample_size: crate::baseline::DEFAULT_SAMPLE_SIZE,
            exhaustive_cap: crate::baseline::DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivacyTargets {
    pub d: Option<usize>,
    pub v: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    #[serde(default)]
    pub attribute_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub stds: Vec<f64>,
}

/// Everything a run needs; command-line flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub original: Option<PathBuf>,
    pub anonymized: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub disclosure: Option<String>,
    pub plausibility_threshold: f64,
    pub seeds: SeedConfig,
    pub baseline: BaselineConfig,
    pub privacy: PrivacyTargets,
    pub synth: Option<SynthConfig>,
    pub noise: Option<NoiseConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            original: None,
            anonymized: None,
            out_dir: None,
            disclosure: None,
            plausibility_threshold: crate::baseline::DEFAULT_PLAUSIBILITY_THRESHOLD,
            seeds: SeedConfig::default(),
            baseline: BaselineConfig::default(),
            privacy: PrivacyTargets::default(),
            synth: None,
            noise: None,
        }
    }
}

const SEED_NAMES: [&str; 4] = ["tie_break", "baseline", "mask", "synth"];
const SECRET_CAPABLE: [&str; 2] = ["mask", "synth"];

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.seeds.secret {
            if !SEED_NAMES.contains(&s.as_str()) {
                return Err(Error::Config(format!("unknown seed {s:?} in secret list")));
            }
            if !SECRET_CAPABLE.contains(&s.as_str()) {
                return Err(Error::Config(format!(
                    "seed {s:?} drives the analysis itself and is always disclosed"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.plausibility_threshold) {
            return Err(Error::Config("plausibility_threshold must lie in [0, 1]".into()));
        }
        if let Some(v) = &self.privacy.v {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config("variance targets must be finite".into()));
            }
        }
        if self.baseline.mode == Some(BaselineMode::Sampled) && self.baseline.sample_size == 0 {
            return Err(Error::Config("baseline sample_size must be at least 1".into()));
        }
        Ok(())
    }

    /// Fails with an I/O error naming the first configured input that does not exist.
    pub fn check_inputs(&self) -> Result<()> {
        for p in [&self.original, &self.anonymized].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "configured input not found"),
                ));
            }
        }
        Ok(())
    }

    pub fn is_secret(&self, seed: &str) -> bool {
        self.seeds.secret.iter().any(|s| s == seed)
    }

    /// The named seeds with their values, minus any marked secret.
    pub fn disclosed_seeds(&self, used: &[&str]) -> BTreeMap<String, u64> {
        used.iter()
            .filter(|name| !self.is_secret(name))
            .filter_map(|&name| {
                let value = match name {
                    "tie_break" => self.seeds.tie_break,
                    "baseline" => self.seeds.baseline,
                    "mask" => self.seeds.mask,
                    "synth" => self.seeds.synth,
                    _ => return None,
                };
                Some((name.to_string(), value))
            })
            .collect()
    }

    /// Baseline spec for an `n x m` source under this configuration.
    pub fn baseline_spec(&self, n: usize, m: usize) -> BaselineSpec {
        let mode = self.baseline.mode.unwrap_or_else(|| {
            if (n as u128)
                .checked_pow(m as u32)
                .is_some_and(|c| c <= self.baseline.exhaustive_cap as u128)
            {
                BaselineMode::Exhaustive
            } else {
                BaselineMode::Sampled
            }
        });
        BaselineSpec {
            mode,
            sample_size: self.baseline.sample_size,
            seed: self.seeds.baseline,
            exhaustive_cap: self.baseline.exhaustive_cap,
        }
    }
}
