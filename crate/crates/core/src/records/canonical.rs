//! Canonical CSV form of a record set.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{CitationRecord, DocType, Provenance, RecordError, RecordSet, Result, MAX_YEAR, MIN_YEAR};

const HEADER: [&str; 9] = [
    "record_id",
    "journal",
    "pub_year",
    "doc_type",
    "times_cited",
    "citation_score",
    "n_refs",
    "addresses",
    "authors",
];

pub fn write_canonical(set: &RecordSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_canonical_to(set, file)
}

pub fn write_canonical_to<W: Write>(set: &RecordSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &set.records {
        w.write_record([
            r.record_id.as_str(),
            r.journal.as_str(),
            &r.pub_year.to_string(),
            r.doc_type.label(),
            &r.times_cited.to_string(),
            &r.citation_score.to_string(),
            &r.n_refs.to_string(),
            &r.addresses.join("|"),
            &r.authors.join("|"),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_canonical(path: &Path) -> Result<RecordSet> {
    let file = File::open(path).map_err(|source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut set = read_canonical_from(file)?;
    set.provenance.sources.push(path.to_path_buf());
    Ok(set)
}

pub fn read_canonical_str(text: &str) -> Result<RecordSet> {
    read_canonical_from(text.as_bytes())
}

fn read_canonical_from<R: Read>(input: R) -> Result<RecordSet> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        let missing = HEADER
            .iter()
            .find(|h| !headers.iter().any(|x| x == **h))
            .unwrap_or(&"record_id");
        return Err(RecordError::MissingHeaderTag(missing.to_string()));
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let malformed = |reason: String| RecordError::MalformedRow { line, reason };
        let field = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| -> Result<u64> {
            field(k)
                .parse()
                .map_err(|_| malformed(format!("{} is not a non-negative integer", HEADER[k])))
        };
        let pub_year: i32 = field(2)
            .parse()
            .map_err(|_| malformed("pub_year is not a year".into()))?;
        if !(MIN_YEAR..=MAX_YEAR).contains(&pub_year) {
            return Err(malformed(format!("pub_year {pub_year} out of range")));
        }
        let citation_score: f64 = field(5)
            .parse()
            .map_err(|_| malformed("citation_score is not a number".into()))?;
        if !(citation_score >= 0.0 && citation_score.is_finite()) {
            return Err(malformed("citation_score must be finite and non-negative".into()));
        }
        records.push(CitationRecord {
            record_id: field(0).to_string(),
            journal: field(1).to_string(),
            pub_year,
            doc_type: DocType::from_label(field(3)),
            times_cited: num(4)?,
            citation_score,
            n_refs: num(6)?,
            addresses: split_joined(field(7)),
            authors: split_joined(field(8)),
        });
    }
    let set = RecordSet {
        records,
        provenance: Provenance::default(),
    };
    set.check_unique_ids()?;
    Ok(set)
}

fn split_joined(s: &str) -> Vec<String> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split('|').map(String::from).collect()
    }
}
