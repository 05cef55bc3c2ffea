use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{CitationRecord, DocType, Provenance, RecordError, RecordSet, Result, MAX_YEAR, MIN_YEAR};

/// Tags every export header must carry.
pub const REQUIRED_TAGS: [&str; 7] = ["SO", "PY", "DT", "TC", "NR", "C1", "AU"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    /// One record per line, tab-separated, first line holds two-letter field tags.
    #[default]
    TabDelimitedWithHeader,
}

pub fn parse_export(path: &Path, format: ExportFormat) -> Result<RecordSet> {
    let bytes = fs::read(path).map_err(|source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| RecordError::MalformedRow {
        line: 0,
        reason: format!("input is not valid UTF-8: {e}"),
    })?;
    let mut set = parse_export_str(&text, format)?;
    set.provenance.sources.push(path.to_path_buf());
    Ok(set)
}

pub fn parse_export_str(text: &str, format: ExportFormat) -> Result<RecordSet> {
    match format {
        ExportFormat::TabDelimitedWithHeader => parse_tab_delimited(text),
    }
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn get<'a>(&self, fields: &[&'a str], tag: &str) -> &'a str {
        self.index
            .get(tag)
            .and_then(|&i| fields.get(i))
            .map(|s| s.trim())
            .unwrap_or("")
    }
}

fn parse_tab_delimited(text: &str) -> Result<RecordSet> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();

    let header = loop {
        match lines.next() {
            None => return Err(RecordError::EmptyFile),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
        }
    };
    let mut index = HashMap::new();
    for (i, tag) in header.split('\t').enumerate() {
        let tag = tag.trim().trim_start_matches('\u{feff}');
        if !tag.is_empty() {
            index.entry(tag.to_string()).or_insert(i);
        }
    }
    for tag in REQUIRED_TAGS {
        if !index.contains_key(tag) {
            return Err(RecordError::MissingHeaderTag(tag.to_string()));
        }
    }
    let cols = Columns { index };

    let mut records = Vec::new();
    for (row_index, (line_no, line)) in lines.filter(|(_, l)| !l.trim().is_empty()).enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        records.push(parse_row(&cols, &fields, line_no + 1, row_index)?);
    }
    let set = RecordSet {
        records,
        provenance: Provenance::default(),
    };
    set.check_unique_ids()?;
    Ok(set)
}

fn parse_row(cols: &Columns, fields: &[&str], line: usize, row_index: usize) -> Result<CitationRecord> {
    let malformed = |reason: String| RecordError::MalformedRow { line, reason };

    let tc = cols.get(fields, "TC");
    if tc.is_empty() {
        return Err(malformed("missing TC value".into()));
    }
    let times_cited: u64 = tc
        .parse()
        .map_err(|_| malformed(format!("TC is not a non-negative integer: {tc:?}")))?;

    let py = cols.get(fields, "PY");
    if py.is_empty() {
        return Err(malformed("missing PY value".into()));
    }
    let pub_year: i32 = py.parse().map_err(|_| malformed(format!("PY is not a year: {py:?}")))?;
    if !(MIN_YEAR..=MAX_YEAR).contains(&pub_year) {
        return Err(malformed(format!("PY {pub_year} outside [{MIN_YEAR}, {MAX_YEAR}]")));
    }

    let nr = cols.get(fields, "NR");
    let n_refs: u64 = if nr.is_empty() {
        0
    } else {
        nr.parse()
            .map_err(|_| malformed(format!("NR is not a non-negative integer: {nr:?}")))?
    };

    let journal = cols.get(fields, "SO").to_string();
    let doc_type = DocType::from_label(cols.get(fields, "DT"));
    let addresses = split_addresses(cols.get(fields, "C1"));
    let authors = split_list(cols.get(fields, "AU"));

    let ut = cols.get(fields, "UT");
    let record_id = if ut.is_empty() {
        synthesize_id(&journal, pub_year, cols.get(fields, "TI"), row_index)
    } else {
        ut.to_string()
    };

    Ok(CitationRecord {
        record_id,
        journal,
        pub_year,
        doc_type,
        times_cited,
        citation_score: times_cited as f64,
        addresses,
        authors,
        n_refs,
    })
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Removes "[author group]" prefixes, then splits on "; ".
pub(crate) fn split_addresses(field: &str) -> Vec<String> {
    let mut stripped = String::with_capacity(field.len());
    let mut depth = 0usize;
    for c in field.chars() {
        match c {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            _ if depth == 0 => stripped.push(c),
            _ => {}
        }
    }
    split_list(&stripped)
}

fn synthesize_id(journal: &str, year: i32, title: &str, row_index: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(journal.as_bytes());
    hasher.update([0x1f]);
    hasher.update(year.to_string().as_bytes());
    hasher.update([0x1f]);
    if title.is_empty() {
        hasher.update(format!("#{row_index}").as_bytes());
    } else {
        hasher.update(title.as_bytes());
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("H{hex}")
}
