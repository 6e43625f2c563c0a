//! File formats: CSV datasets, JSON partition and transport artifacts,
//! and the TOML run configuration.
//!
//! Datasets are CSV with a mandatory header; columns `l` (1-D) or
//! `l1,l2` (2-D), `y` in {0,1}, and optional `score` in [0, 1] and
//! `y_hat` in {0,1}, in any order. Unknown columns are ignored with a
//! warning. Partitions and transport maps serialize as versioned JSON
//! with stable key order; numbers use shortest round-trip decimals, so
//! artifacts re-serialize byte-identically and diff cleanly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::debias::{GroupTransport, TransportMap};
use crate::error::{Error, Result};
use crate::types::{
    Dataset, Grid, GridAxis, GridRect, Partition, PartitionMeta, PartitionShape, Sample,
};

/// Schema version written and accepted by this build.
pub const SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Dataset CSV
// ---------------------------------------------------------------------------

struct Columns {
    l1: usize,
    l2: Option<usize>,
    y: usize,
    score: Option<usize>,
    y_hat: Option<usize>,
}

fn resolve_columns(headers: &csv::StringRecord) -> Result<Columns> {
    let mut l = None;
    let mut l1 = None;
    let mut l2 = None;
    let mut y = None;
    let mut score = None;
    let mut y_hat = None;
    for (i, name) in headers.iter().enumerate() {
        let slot = match name.trim() {
            "l" => &mut l,
            "l1" => &mut l1,
            "l2" => &mut l2,
            "y" => &mut y,
            "score" => &mut score,
            "y_hat" => &mut y_hat,
            other => {
                log::warn!("ignoring unknown column `{other}`");
                continue;
            }
        };
        if slot.replace(i).is_some() {
            return Err(Error::Parse {
                line: 1,
                msg: format!("duplicate column `{}`", name.trim()),
            });
        }
    }
    let (l1, l2) = match (l, l1, l2) {
        (Some(i), None, None) => (i, None),
        (None, Some(a), Some(b)) => (a, Some(b)),
        (None, Some(_), None) | (None, None, Some(_)) => {
            return Err(Error::Parse {
                line: 1,
                msg: "2-D data needs both `l1` and `l2`".to_string(),
            })
        }
        (Some(_), _, _) => {
            return Err(Error::Parse {
                line: 1,
                msg: "use either `l` or `l1`/`l2`, not both".to_string(),
            })
        }
        (None, None, None) => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing sensitive-value column (`l` or `l1`/`l2`)".to_string(),
            })
        }
    };
    let y = y.ok_or(Error::Parse {
        line: 1,
        msg: "missing outcome column `y`".to_string(),
    })?;
    Ok(Columns {
        l1,
        l2,
        y,
        score,
        y_hat,
    })
}

fn parse_real(record: &csv::StringRecord, idx: usize, line: u64, what: &str) -> Result<f64> {
    let raw = record.get(idx).ok_or(Error::Parse {
        line,
        msg: format!("missing {what} field"),
    })?;
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} value `{raw}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("{what} must be finite, got `{raw}`"),
        });
    }
    Ok(v)
}

fn parse_binary(record: &csv::StringRecord, idx: usize, line: u64, what: &str) -> Result<u8> {
    let raw = record.get(idx).ok_or(Error::Parse {
        line,
        msg: format!("missing {what} field"),
    })?;
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::Parse {
            line,
            msg: format!("{what} must be 0 or 1, got `{other}`"),
        }),
    }
}

/// Parses a dataset from CSV bytes.
pub fn read_dataset_from_reader<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(map_csv_error)?.clone();
    let cols = resolve_columns(&headers)?;

    let mut samples = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(map_csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let l1 = parse_real(&record, cols.l1, line, "l")?;
        let l2 = cols
            .l2
            .map(|i| parse_real(&record, i, line, "l2"))
            .transpose()?;
        let y = parse_binary(&record, cols.y, line, "y")?;
        let score = cols
            .score
            .map(|i| parse_real(&record, i, line, "score"))
            .transpose()?;
        if let Some(s) = score {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Parse {
                    line,
                    msg: format!("score must lie in [0, 1], got {s}"),
                });
            }
        }
        let y_hat = cols
            .y_hat
            .map(|i| parse_binary(&record, i, line, "y_hat"))
            .transpose()?;
        samples.push(Sample {
            l1,
            l2,
            y,
            score,
            y_hat,
        });
    }
    Dataset::from_samples(&samples)
}

fn map_csv_error(err: csv::Error) -> Error {
    match err.position() {
        Some(p) => Error::Parse {
            line: p.line(),
            msg: err.to_string(),
        },
        None => Error::Csv(err),
    }
}

/// Reads a dataset CSV file.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset_from_reader(BufReader::new(File::open(path)?))
}

/// Writes a dataset as CSV; values round-trip exactly through
/// [`read_dataset`] (shortest round-trip decimals).
pub fn write_dataset_to_writer<W: std::io::Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = if dataset.dimension() == 2 {
        vec!["l1", "l2"]
    } else {
        vec!["l"]
    };
    header.push("y");
    if dataset.score().is_some() {
        header.push("score");
    }
    if dataset.y_hat().is_some() {
        header.push("y_hat");
    }
    w.write_record(&header).map_err(map_csv_error)?;

    let mut fields: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..dataset.len() {
        fields.clear();
        let s = dataset.sample(i);
        fields.push(format!("{}", s.l1));
        if let Some(l2) = s.l2 {
            fields.push(format!("{l2}"));
        }
        fields.push(format!("{}", s.y));
        if let Some(score) = s.score {
            fields.push(format!("{score}"));
        }
        if let Some(y_hat) = s.y_hat {
            fields.push(format!("{y_hat}"));
        }
        w.write_record(&fields).map_err(map_csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a dataset CSV file.
pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_dataset_to_writer(dataset, BufWriter::new(File::create(path)?))
}

// ---------------------------------------------------------------------------
// Partition JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ShapeFile {
    Segments { boundaries: Vec<usize> },
    BinLabels { labels: Vec<usize> },
    Rectangles { rects: Vec<[usize; 4]> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionFile {
    schema_version: u32,
    dimension: usize,
    k: usize,
    grid: Vec<Vec<f64>>,
    shape: ShapeFile,
    method: Option<String>,
    measure: Option<String>,
    objective: Option<f64>,
    n: Option<usize>,
    seed: Option<u64>,
    timestamp: Option<String>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

fn check_version(bytes: &[u8]) -> Result<()> {
    let probe: VersionProbe = serde_json::from_slice(bytes)?;
    if probe.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: probe.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

fn partition_to_file(partition: &Partition) -> PartitionFile {
    let grid = (0..partition.dimension())
        .map(|i| partition.grid().axis(i).edges().to_vec())
        .collect();
    let shape = match partition.shape() {
        PartitionShape::Segments { boundaries } => ShapeFile::Segments {
            boundaries: boundaries.clone(),
        },
        PartitionShape::BinLabels { labels } => ShapeFile::BinLabels {
            labels: labels.clone(),
        },
        PartitionShape::Rectangles { rects } => ShapeFile::Rectangles {
            rects: rects.iter().map(|r| [r.x0, r.x1, r.y0, r.y1]).collect(),
        },
    };
    let meta = partition.meta();
    PartitionFile {
        schema_version: SCHEMA_VERSION,
        dimension: partition.dimension(),
        k: partition.k(),
        grid,
        shape,
        method: meta.method.clone(),
        measure: meta.measure.clone(),
        objective: meta.objective,
        n: meta.n,
        seed: meta.seed,
        timestamp: meta.timestamp.clone(),
    }
}

fn partition_from_file(file: PartitionFile) -> Result<Partition> {
    if file.grid.len() != file.dimension {
        return Err(Error::invalid(format!(
            "declared dimension {} but {} grid axes",
            file.dimension,
            file.grid.len()
        )));
    }
    let mut axes = file.grid.into_iter().map(GridAxis::new);
    let grid = match file.dimension {
        1 => Grid::new_1d(axes.next().unwrap()?)?,
        2 => Grid::new_2d(axes.next().unwrap()?, axes.next().unwrap()?)?,
        d => return Err(Error::invalid(format!("unsupported dimension {d}"))),
    };
    let mut partition = match file.shape {
        ShapeFile::Segments { boundaries } => Partition::segments(grid, boundaries)?,
        ShapeFile::BinLabels { labels } => Partition::bin_labels(grid, labels, file.k)?,
        ShapeFile::Rectangles { rects } => Partition::rectangles(
            grid,
            rects
                .into_iter()
                .map(|[x0, x1, y0, y1]| GridRect { x0, x1, y0, y1 })
                .collect(),
        )?,
    };
    if partition.k() != file.k {
        return Err(Error::invalid(format!(
            "declared K = {} but the shape has {} groups",
            file.k,
            partition.k()
        )));
    }
    partition.set_meta(PartitionMeta {
        method: file.method,
        measure: file.measure,
        objective: file.objective,
        n: file.n,
        seed: file.seed,
        timestamp: file.timestamp,
    });
    Ok(partition)
}

/// Serializes a partition to pretty JSON with a trailing newline.
pub fn partition_to_json(partition: &Partition) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&partition_to_file(partition))?;
    s.push('\n');
    Ok(s)
}

/// Parses and validates a partition from JSON bytes.
pub fn read_partition_from_slice(bytes: &[u8]) -> Result<Partition> {
    check_version(bytes)?;
    partition_from_file(serde_json::from_slice(bytes)?)
}

pub fn read_partition(path: impl AsRef<Path>) -> Result<Partition> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    read_partition_from_slice(&bytes)
}

pub fn write_partition(partition: &Partition, path: impl AsRef<Path>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(partition_to_json(partition)?.as_bytes())?;
    f.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Transport JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransportFile {
    schema_version: u32,
    alpha: f64,
    resolution: usize,
    groups: Vec<GroupTransport>,
}

/// Serializes a transport map to pretty JSON with a trailing newline.
pub fn transport_to_json(map: &TransportMap) -> Result<String> {
    let file = TransportFile {
        schema_version: SCHEMA_VERSION,
        alpha: map.alpha(),
        resolution: map.resolution(),
        groups: map.groups.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

/// Parses and validates a transport map from JSON bytes.
pub fn read_transport_from_slice(bytes: &[u8]) -> Result<TransportMap> {
    check_version(bytes)?;
    let file: TransportFile = serde_json::from_slice(bytes)?;
    TransportMap::from_parts(file.alpha, file.resolution, file.groups)
}

pub fn read_transport(path: impl AsRef<Path>) -> Result<TransportMap> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    read_transport_from_slice(&bytes)
}

pub fn write_transport(map: &TransportMap, path: impl AsRef<Path>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(transport_to_json(map)?.as_bytes())?;
    f.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Flat key-value run configuration. Every key has a default except the
/// input path; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Input dataset path (required by most commands).
    pub input: Option<PathBuf>,
    /// Output directory for artifacts and the manifest.
    pub output: PathBuf,
    /// Partition method: `fairgroups`, `kmeans` or `fixed`.
    pub method: String,
    /// Number of groups.
    pub k: usize,
    /// Grid bins on the first axis.
    pub m: usize,
    /// Grid bins on the second axis (2-D data; defaults to `m`).
    pub m2: Option<usize>,
    /// Grid bounds; default to the data range.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub lo2: Option<f64>,
    pub hi2: Option<f64>,
    /// Target column: `y`, `y_hat` or `score`.
    pub target: String,
    /// Threshold when the target is `score`.
    pub score_threshold: f64,
    /// Repair strengths evaluated by the debias command.
    pub alphas: Vec<f64>,
    pub seed: u64,
    /// Worker threads for exhaustive search.
    pub threads: usize,
    /// Explicit thresholds for the fixed method.
    pub thresholds: Vec<f64>,
    /// Named fixed scheme: `fitzpatrick-ita`, `l60` or `default-2d`.
    pub scheme: Option<String>,
    /// Confidence level for group intervals.
    pub level: f64,
    /// Generator preset: `paper-uniform` or `paper-truncnormal`.
    pub preset: Option<String>,
    /// Sample count for the generator.
    pub n: usize,
    /// Attach the planted-bias synthetic scorer when generating.
    pub scored: bool,
    /// Noise level of the synthetic scorer.
    pub noise_sd: f64,
    /// Equal-frequency bins for the dependence estimate.
    pub bins: usize,
    /// Quantile-grid resolution for transport maps.
    pub resolution: usize,
    /// Disable the dynamic-programming fast path.
    pub exhaustive: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            output: PathBuf::from("."),
            method: "fairgroups".to_string(),
            k: 5,
            m: 100,
            m2: None,
            lo: None,
            hi: None,
            lo2: None,
            hi2: None,
            target: "y".to_string(),
            score_threshold: 0.5,
            alphas: vec![1.0, 0.5, 0.25, 0.0],
            seed: 0,
            threads: 1,
            thresholds: Vec::new(),
            scheme: None,
            level: 0.95,
            preset: None,
            n: 50_000,
            scored: false,
            noise_sd: 0.05,
            bins: 20,
            resolution: 512,
            exhaustive: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut s = String::new();
        File::open(path)?.read_to_string(&mut s)?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}
