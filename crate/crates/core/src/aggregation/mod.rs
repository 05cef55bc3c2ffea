//! Mapping records onto evaluation units (journals, countries, cities,
//! institutes, authors) under integer or fractional counting.

mod address;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::records::{CitationRecord, RecordSet};

pub use address::{parse_address, ParsedAddress};

#[derive(Debug, Error)]
pub enum AggregationError {
    #[error("unparseable address {0:?}")]
    UnparseableAddress(String),
    #[error("alias file line {line}: {reason}")]
    BadAlias { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = AggregationError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnitKind {
    Journal,
    Country,
    City,
    Institute,
    Author,
}

impl UnitKind {
    pub fn name(&self) -> &'static str {
        match self {
            UnitKind::Journal => "journal",
            UnitKind::Country => "country",
            UnitKind::City => "city",
            UnitKind::Institute => "institute",
            UnitKind::Author => "author",
        }
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Counting {
    /// One full point for every distinct unit on a record.
    #[default]
    Integer,
    /// One point per record, split evenly over its addresses (or authors).
    Fractional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitAssignment {
    pub record_id: String,
    pub unit_kind: UnitKind,
    pub unit_key: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRecord {
    pub record_id: String,
    pub unit_kind: UnitKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignments {
    pub kind: UnitKind,
    pub counting: Counting,
    pub assignments: Vec<UnitAssignment>,
    pub skipped: Vec<SkippedRecord>,
}

/// Optional key merges, e.g. "England" -> "UK".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasMap {
    map: HashMap<String, String>,
}

impl AliasMap {
    pub fn new<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        AliasMap {
            map: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| AggregationError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(["from_key", "to_key"]) {
            return Err(AggregationError::BadAlias {
                line: 1,
                reason: "expected header from_key,to_key".into(),
            });
        }
        let mut map = HashMap::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let (from, to) = (row.get(0).unwrap_or(""), row.get(1).unwrap_or(""));
            if from.is_empty() || to.is_empty() {
                return Err(AggregationError::BadAlias {
                    line: i + 2,
                    reason: "empty key".into(),
                });
            }
            map.insert(from.to_string(), to.to_string());
        }
        Ok(AliasMap { map })
    }

    pub fn resolve<'a>(&'a self, key: &'a str) -> &'a str {
        self.map.get(key).map_or(key, String::as_str)
    }
}

/// Unit keys of one record with their per-key weight, plus a skip reason if
/// the record cannot be placed.
fn record_keys(
    record: &CitationRecord,
    kind: UnitKind,
    counting: Counting,
    aliases: &AliasMap,
) -> std::result::Result<BTreeMap<String, f64>, String> {
    let raw_keys: Vec<String> = match kind {
        UnitKind::Journal => vec![aliases.resolve(&record.journal).to_string()],
        UnitKind::Author => record
            .authors
            .iter()
            .map(|a| aliases.resolve(&a.to_uppercase()).to_string())
            .collect(),
        UnitKind::Country | UnitKind::City | UnitKind::Institute => {
            let mut keys = Vec::new();
            let mut unparsed = Vec::new();
            for raw in &record.addresses {
                match parse_address(raw) {
                    Ok(a) => {
                        let country = aliases.resolve(&a.country);
                        let city = aliases.resolve(&a.city);
                        let key = match kind {
                            UnitKind::Country => country.to_string(),
                            UnitKind::City if a.degraded => {
                                unparsed.push(raw.as_str());
                                continue;
                            }
                            UnitKind::City => format!("{city}, {country}"),
                            _ => format!("{}, {city}, {country}", aliases.resolve(&a.institute)),
                        };
                        keys.push(aliases.resolve(&key).to_string());
                    }
                    Err(_) => unparsed.push(raw.as_str()),
                }
            }
            if keys.is_empty() && !unparsed.is_empty() {
                return Err(format!("no parseable address ({})", unparsed.join(" | ")));
            }
            keys
        }
    };
    if raw_keys.is_empty() {
        return Err(match kind {
            UnitKind::Author => "no authors".to_string(),
            _ => "no address".to_string(),
        });
    }
    let share = 1.0 / raw_keys.len() as f64;
    let mut keys: BTreeMap<String, f64> = BTreeMap::new();
    for k in raw_keys {
        match counting {
            Counting::Integer => {
                keys.insert(k, 1.0);
            }
            Counting::Fractional => *keys.entry(k).or_default() += share,
        }
    }
    Ok(keys)
}

pub fn assign_units(set: &RecordSet, kind: UnitKind, counting: Counting, aliases: Option<&AliasMap>) -> Assignments {
    let empty = AliasMap::default();
    let aliases = aliases.unwrap_or(&empty);

    let per_record: Vec<_> = set
        .records
        .par_iter()
        .map(|r| (r, record_keys(r, kind, counting, aliases)))
        .collect();

    let mut assignments = Vec::new();
    let mut skipped = Vec::new();
    for (record, keys) in per_record {
        match keys {
            Ok(keys) => assignments.extend(keys.into_iter().map(|(unit_key, weight)| UnitAssignment {
                record_id: record.record_id.clone(),
                unit_kind: kind,
                unit_key,
                weight,
            })),
            Err(reason) => skipped.push(SkippedRecord {
                record_id: record.record_id.clone(),
                unit_kind: kind,
                reason,
            }),
        }
    }
    Assignments {
        kind,
        counting,
        assignments,
        skipped,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub record_id: String,
    pub weight: f64,
}

pub type UnitSubsets = BTreeMap<String, Vec<Member>>;

/// Groups assignments by unit key, keeping weights.
pub fn unit_subsets(assignments: &Assignments) -> UnitSubsets {
    let mut out: UnitSubsets = BTreeMap::new();
    for a in &assignments.assignments {
        out.entry(a.unit_key.clone()).or_default().push(Member {
            record_id: a.record_id.clone(),
            weight: a.weight,
        });
    }
    out
}

pub fn write_skip_report<W: Write>(skipped: &[SkippedRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["record_id", "unit_kind", "reason"])?;
    for s in skipped {
        w.write_record([s.record_id.as_str(), s.unit_kind.name(), s.reason.as_str()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
