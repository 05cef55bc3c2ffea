//! Bibliographic records: parsing, citable-item filtering and fractional
//! citation weights.

mod canonical;
mod export;
mod weights;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

pub use canonical::{read_canonical, read_canonical_str, write_canonical, write_canonical_to};
pub use export::{parse_export, parse_export_str, ExportFormat, REQUIRED_TAGS};
pub use weights::{apply_fractional_weights, read_links, read_links_str, CitationLink};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("header is missing required tag {0}")]
    MissingHeaderTag(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("input file is empty")]
    EmptyFile,
    #[error("duplicate record id {0}")]
    DuplicateRecordId(String),
    #[error("citation link refers to unknown record {0}")]
    UnknownRecordId(String),
    #[error("citation link to {0} has citing_nrefs = 0")]
    ZeroNRefs(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = RecordError> = std::result::Result<T, E>;

/// Document type as reported by the citation database.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocType {
    Article,
    Review,
    ProceedingsPaper,
    Letter,
    Other(String),
}

impl DocType {
    /// The four citable document types.
    pub fn citable() -> BTreeSet<DocType> {
        [
            DocType::Article,
            DocType::Review,
            DocType::ProceedingsPaper,
            DocType::Letter,
        ]
        .into_iter()
        .collect()
    }

    /// Case-insensitive mapping of a DT field value.
    pub fn from_label(label: &str) -> DocType {
        let trimmed = label.trim();
        match trimmed.to_ascii_lowercase().as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            "proceedings paper" => DocType::ProceedingsPaper,
            "letter" => DocType::Letter,
            _ => DocType::Other(trimmed.to_string()),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            DocType::Article => "Article",
            DocType::Review => "Review",
            DocType::ProceedingsPaper => "Proceedings Paper",
            DocType::Letter => "Letter",
            DocType::Other(s) => s,
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DocType {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(DocType::from_label(s))
    }
}

/// One citable item.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationRecord {
    pub record_id: String,
    pub journal: String,
    pub pub_year: i32,
    pub doc_type: DocType,
    /// The database "TC" field.
    pub times_cited: u64,
    /// Equals `times_cited` unless fractional weighting was applied.
    pub citation_score: f64,
    pub addresses: Vec<String>,
    pub authors: Vec<String>,
    pub n_refs: u64,
}

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

/// Where a record set came from and which filters were applied to it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub sources: Vec<PathBuf>,
    pub filters: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    pub records: Vec<CitationRecord>,
    pub provenance: Provenance,
}

impl RecordSet {
    pub fn new(records: Vec<CitationRecord>) -> Result<Self> {
        let set = RecordSet {
            records,
            provenance: Provenance::default(),
        };
        set.check_unique_ids()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn doc_type_counts(&self) -> BTreeMap<DocType, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.doc_type.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn get(&self, record_id: &str) -> Option<&CitationRecord> {
        self.records.iter().find(|r| r.record_id == record_id)
    }

    pub(crate) fn check_unique_ids(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.records {
            if !seen.insert(r.record_id.as_str()) {
                return Err(RecordError::DuplicateRecordId(r.record_id.clone()));
            }
        }
        Ok(())
    }
}

/// Keeps only records whose document type is in `allowed`.
pub fn filter_citable(set: RecordSet, allowed: &BTreeSet<DocType>) -> RecordSet {
    let RecordSet {
        records,
        mut provenance,
    } = set;
    let records: Vec<_> = records.into_iter().filter(|r| allowed.contains(&r.doc_type)).collect();
    let labels: Vec<&str> = allowed.iter().map(DocType::label).collect();
    let description = format!("doc_type in {{{}}}", labels.join(", "));
    if provenance.filters.last() != Some(&description) {
        provenance.filters.push(description);
    }
    RecordSet { records, provenance }
}
