//! Output artifacts: ranked tables, test files, Pajek networks and map
//! overlays, plus the end-to-end pipeline behind the command line.

mod geo;
mod pajek;
pub mod pipeline;
mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use geo::{
    build_map_nodes, emit_geo_overlay, validate_geojson, write_geojson, write_kml, CityResult, Gazetteer,
    GazetteerEntry, GeoFormat, GeocodeLookup, MapColor, MapNode, OverlayMode, OverlaySkip, SIZE_MAX, SIZE_MIN,
};
pub use pajek::{emit_pajek, write_edge_list, write_pajek};
pub use table::{emit_rank_table, write_indicator_report, write_rank_table, write_ri3r, write_strata, write_ztest};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("gazetteer not found: {0}")]
    GazetteerMissing(PathBuf),
    #[error("gazetteer line {line}: {reason}")]
    BadGazetteer { line: usize, reason: String },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = ReportError> = std::result::Result<T, E>;

impl From<std::io::Error> for ReportError {
    fn from(source: std::io::Error) -> Self {
        ReportError::Io {
            path: PathBuf::new(),
            source,
        }
    }
}

/// Creates `path` and hands a buffered writer to `write`; errors carry the path.
pub(crate) fn write_file<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let with_path = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(with_path)?;
    let mut out = BufWriter::new(file);
    match write(&mut out) {
        Err(ReportError::Io { path: p, source }) if p.as_os_str().is_empty() => Err(with_path(source)),
        other => other,
    }?;
    out.flush().map_err(with_path)
}

/// Counts print without decimals when integral (integer counting) and with
/// two otherwise.
pub(crate) fn fmt_count(x: f64) -> String {
    if x.fract() == 0.0 {
        crate::numeric::fixed(x, 0)
    } else {
        crate::numeric::fixed(x, 2)
    }
}
