//! CSV ingestion and serialization.
//!
//! Formats (header row required):
//! - nodes: `node_id,x,y` (or `node_id,lon,lat` in geodetic mode)
//! - edges: `from_id,to_id,length_m[,oneway]`
//! - traces: `object_id,t_unix_s,x,y,speed_mps`

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use super::weights::{HistoricTraces, TraceRecord};
use super::{LocalProjection, NodeId, SpatialNetwork};
use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },
    #[error("{file}:{line}: unknown node {id}")]
    UnknownNode { file: String, line: u64, id: i64 },
    #[error("{file}:{line}: duplicate node {id}")]
    DuplicateNode { file: String, line: u64, id: i64 },
    #[error("{file}:{line}: edge length must be positive, got {length}")]
    NonPositiveLength { file: String, line: u64, length: f64 },
    #[error("{file}:{line}: records for object {object} are not sorted by time")]
    Unsorted { file: String, line: u64, object: String },
}

/// How coordinate columns are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoordinateMode {
    /// Projected planar meters.
    #[default]
    Planar,
    /// Longitude/latitude degrees, projected around the node centroid.
    Geodetic,
}

pub(crate) struct Rows<R: Read> {
    file: String,
    reader: csv::Reader<R>,
}

impl<R: Read> Rows<R> {
    pub(crate) fn new(reader: R, file: &str) -> Self {
        let reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        Self {
            file: file.to_string(),
            reader,
        }
    }

    pub(crate) fn file(&self) -> &str {
        &self.file
    }

    /// Visits each data row with its 1-based line number.
    pub(crate) fn for_each(
        &mut self,
        mut f: impl FnMut(u64, &csv::StringRecord) -> Result<(), IngestError>,
    ) -> Result<(), IngestError> {
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {
                    let line = record.position().map(|p| p.line()).unwrap_or(0);
                    if record.iter().all(str::is_empty) {
                        continue;
                    }
                    f(line, &record)?;
                }
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(0);
                    return Err(IngestError::Parse {
                        file: self.file.clone(),
                        line,
                        message: e.to_string(),
                    });
                }
            }
        }
    }
}

pub(crate) fn field<T: std::str::FromStr>(
    file: &str,
    line: u64,
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T, IngestError> {
    let raw = record.get(idx).ok_or_else(|| IngestError::Parse {
        file: file.to_string(),
        line,
        message: format!("missing column `{name}`"),
    })?;
    raw.parse().map_err(|_| IngestError::Parse {
        file: file.to_string(),
        line,
        message: format!("invalid `{name}` value {raw:?}"),
    })
}

pub(crate) fn finite(file: &str, line: u64, v: f64, name: &str) -> Result<f64, IngestError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(IngestError::Parse {
            file: file.to_string(),
            line,
            message: format!("`{name}` must be finite"),
        })
    }
}

fn parse_bool(file: &str, line: u64, raw: &str) -> Result<bool, IngestError> {
    match raw.to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" => Ok(false),
        "1" | "true" | "yes" => Ok(true),
        _ => Err(IngestError::Parse {
            file: file.to_string(),
            line,
            message: format!("invalid `oneway` value {raw:?}"),
        }),
    }
}

pub(crate) fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses and validates a network from node and edge CSV sources.
pub fn load_network(
    nodes: impl Read,
    nodes_name: &str,
    edges: impl Read,
    edges_name: &str,
    mode: CoordinateMode,
) -> Result<SpatialNetwork, IngestError> {
    let mut raw_nodes: Vec<(i64, f64, f64)> = Vec::new();
    let mut seen: HashMap<i64, usize> = HashMap::new();
    let mut rows = Rows::new(nodes, nodes_name);
    let file = rows.file().to_string();
    rows.for_each(|line, rec| {
        let id: i64 = field(&file, line, rec, 0, "node_id")?;
        let x = finite(&file, line, field(&file, line, rec, 1, "x")?, "x")?;
        let y = finite(&file, line, field(&file, line, rec, 2, "y")?, "y")?;
        if seen.insert(id, raw_nodes.len()).is_some() {
            return Err(IngestError::DuplicateNode { file: file.clone(), line, id });
        }
        raw_nodes.push((id, x, y));
        Ok(())
    })?;

    let projection = match mode {
        CoordinateMode::Planar => None,
        CoordinateMode::Geodetic => Some(LocalProjection::centered_on(raw_nodes.iter().map(|n| (n.1, n.2)))),
    };
    let nodes: Vec<(i64, Point)> = raw_nodes
        .iter()
        .map(|&(id, x, y)| {
            let p = match &projection {
                Some(proj) => proj.project(x, y),
                None => Point::new(x, y),
            };
            (id, p)
        })
        .collect();

    let mut parsed_edges = Vec::new();
    let mut rows = Rows::new(edges, edges_name);
    let file = rows.file().to_string();
    rows.for_each(|line, rec| {
        let from: i64 = field(&file, line, rec, 0, "from_id")?;
        let to: i64 = field(&file, line, rec, 1, "to_id")?;
        let length: f64 = field(&file, line, rec, 2, "length_m")?;
        let oneway = match rec.get(3) {
            Some(raw) => parse_bool(&file, line, raw)?,
            None => false,
        };
        let resolve = |id: i64| {
            seen.get(&id)
                .map(|&i| NodeId(i as u32))
                .ok_or_else(|| IngestError::UnknownNode { file: file.clone(), line, id })
        };
        let (a, b) = (resolve(from)?, resolve(to)?);
        if !(length > 0.0) || !length.is_finite() {
            return Err(IngestError::NonPositiveLength { file: file.clone(), line, length });
        }
        parsed_edges.push((a, b, length, oneway));
        Ok(())
    })?;

    Ok(SpatialNetwork::new(nodes, parsed_edges, projection))
}

pub fn load_network_from_paths(
    nodes: &Path,
    edges: &Path,
    mode: CoordinateMode,
) -> Result<SpatialNetwork, IngestError> {
    load_network(
        open(nodes)?,
        &nodes.display().to_string(),
        open(edges)?,
        &edges.display().to_string(),
        mode,
    )
}

/// Parses `object_id,t_unix_s,x,y,speed_mps`; coordinates go through
/// `projection` when given.
pub fn load_traces(
    reader: impl Read,
    name: &str,
    projection: Option<&LocalProjection>,
) -> Result<HistoricTraces, IngestError> {
    let mut records = Vec::new();
    let mut last: HashMap<String, f64> = HashMap::new();
    let mut rows = Rows::new(reader, name);
    let file = rows.file().to_string();
    rows.for_each(|line, rec| {
        let object_id: String = field(&file, line, rec, 0, "object_id")?;
        let t = finite(&file, line, field(&file, line, rec, 1, "t_unix_s")?, "t_unix_s")?;
        let x = finite(&file, line, field(&file, line, rec, 2, "x")?, "x")?;
        let y = finite(&file, line, field(&file, line, rec, 3, "y")?, "y")?;
        let speed = finite(&file, line, field(&file, line, rec, 4, "speed_mps")?, "speed_mps")?;
        if speed < 0.0 {
            return Err(IngestError::Parse {
                file: file.clone(),
                line,
                message: format!("speed must be non-negative, got {speed}"),
            });
        }
        if let Some(prev) = last.insert(object_id.clone(), t) {
            if t < prev {
                return Err(IngestError::Unsorted { file: file.clone(), line, object: object_id });
            }
        }
        let point = match projection {
            Some(p) => p.project(x, y),
            None => Point::new(x, y),
        };
        records.push(TraceRecord { object_id, t, point, speed });
        Ok(())
    })?;
    Ok(HistoricTraces::new(records))
}

pub fn load_traces_from_path(
    path: &Path,
    projection: Option<&LocalProjection>,
) -> Result<HistoricTraces, IngestError> {
    load_traces(open(path)?, &path.display().to_string(), projection)
}

/// Writes nodes with their original ids. Geodetic networks are written back
/// as longitude/latitude.
pub fn write_nodes_csv(net: &SpatialNetwork, out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match net.projection() {
        Some(_) => w.write_record(["node_id", "lon", "lat"])?,
        None => w.write_record(["node_id", "x", "y"])?,
    }
    for n in net.nodes() {
        let (x, y) = match net.projection() {
            Some(p) => p.unproject(&n.location),
            None => (n.location.x, n.location.y),
        };
        w.write_record([n.external_id.to_string(), x.to_string(), y.to_string()])?;
    }
    w.flush()
}

pub fn write_edges_csv(net: &SpatialNetwork, out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let any_oneway = net.is_directed();
    if any_oneway {
        w.write_record(["from_id", "to_id", "length_m", "oneway"])?;
    } else {
        w.write_record(["from_id", "to_id", "length_m"])?;
    }
    for e in net.edges() {
        let mut rec = vec![
            net.external_id(e.from).to_string(),
            net.external_id(e.to).to_string(),
            e.length.to_string(),
        ];
        if any_oneway {
            rec.push(if e.oneway { "1".into() } else { "0".into() });
        }
        w.write_record(rec)?;
    }
    w.flush()
}

pub fn write_traces_csv(traces: &HistoricTraces, out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["object_id", "t_unix_s", "x", "y", "speed_mps"])?;
    for r in traces.records() {
        w.write_record([
            r.object_id.clone(),
            r.t.to_string(),
            r.point.x.to_string(),
            r.point.y.to_string(),
            r.speed.to_string(),
        ])?;
    }
    w.flush()
}
