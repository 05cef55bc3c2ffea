//! Fractional citation weighting: each citation counts 1/NRef of the citing paper.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{RecordError, RecordSet, Result};
use crate::numeric::compensated_sum;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct CitationLink {
    #[serde(rename = "cited_id")]
    pub cited_record_id: String,
    #[serde(rename = "citing_nrefs")]
    pub citing_n_refs: u64,
}

pub fn read_links(path: &Path) -> Result<Vec<CitationLink>> {
    let file = File::open(path).map_err(|source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_links_from(file)
}

pub fn read_links_str(text: &str) -> Result<Vec<CitationLink>> {
    read_links_from(text.as_bytes())
}

fn read_links_from<R: Read>(input: R) -> Result<Vec<CitationLink>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    for tag in ["cited_id", "citing_nrefs"] {
        if !headers.iter().any(|h| h == tag) {
            return Err(RecordError::MissingHeaderTag(tag.to_string()));
        }
    }
    let mut links = Vec::new();
    for row in rdr.deserialize() {
        links.push(row?);
    }
    Ok(links)
}

/// Replaces every record's `citation_score` by the sum of 1/NRef over the
/// papers citing it. Records without links score 0.
pub fn apply_fractional_weights(set: RecordSet, links: &[CitationLink]) -> Result<RecordSet> {
    let RecordSet {
        mut records,
        mut provenance,
    } = set;
    let index: HashMap<&str, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.record_id.as_str(), i))
        .collect();

    let mut per_record: Vec<Vec<u64>> = vec![Vec::new(); records.len()];
    for link in links {
        if link.citing_n_refs == 0 {
            return Err(RecordError::ZeroNRefs(link.cited_record_id.clone()));
        }
        let &i = index
            .get(link.cited_record_id.as_str())
            .ok_or_else(|| RecordError::UnknownRecordId(link.cited_record_id.clone()))?;
        per_record[i].push(link.citing_n_refs);
    }

    for (record, mut nrefs) in records.iter_mut().zip(per_record) {
        // Sorting fixes the summation order, so scores do not depend on link order.
        nrefs.sort_unstable();
        record.citation_score = compensated_sum(nrefs.iter().map(|&n| 1.0 / n as f64));
    }
    provenance
        .filters
        .push(format!("fractional citation weights from {} links", links.len()));
    Ok(RecordSet { records, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{CitationRecord, DocType};
    use proptest::prelude::*;

    fn set(ids: &[&str]) -> RecordSet {
        RecordSet::new(
            ids.iter()
                .map(|id| CitationRecord {
                    record_id: id.to_string(),
                    journal: "J".into(),
                    pub_year: 2008,
                    doc_type: DocType::Article,
                    times_cited: 7,
                    citation_score: 7.0,
                    addresses: vec![],
                    authors: vec![],
                    n_refs: 10,
                })
                .collect(),
        )
        .unwrap()
    }

    fn link(id: &str, n: u64) -> CitationLink {
        CitationLink {
            cited_record_id: id.into(),
            citing_n_refs: n,
        }
    }

    #[test]
    fn two_citing_papers() {
        let out = apply_fractional_weights(set(&["a", "b"]), &[link("a", 4), link("a", 5)]).unwrap();
        assert!((out.records[0].citation_score - 0.45).abs() < 1e-12);
        assert_eq!(out.records[1].citation_score, 0.0);
        assert_eq!(out.records[0].times_cited, 7);
    }

    #[test]
    fn ten_citers_with_ten_refs_sum_to_one() {
        let links: Vec<_> = (0..10).map(|_| link("a", 10)).collect();
        let out = apply_fractional_weights(set(&["a"]), &links).unwrap();
        assert!((out.records[0].citation_score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_and_zero_links_are_rejected() {
        let err = apply_fractional_weights(set(&["a"]), &[link("zz", 3)]).unwrap_err();
        assert!(matches!(err, RecordError::UnknownRecordId(id) if id == "zz"));
        let err = apply_fractional_weights(set(&["a"]), &[link("a", 0)]).unwrap_err();
        assert!(matches!(err, RecordError::ZeroNRefs(_)));
    }

    #[test]
    fn link_file_parses() {
        let links = read_links_str("cited_id,citing_nrefs\nW1,12\nW2, 3\n").unwrap();
        assert_eq!(links, [link("W1", 12), link("W2", 3)]);
        assert!(read_links_str("id,n\nW1,1\n").is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_conserving(
            raw in prop::collection::vec((0usize..4, 1u64..60), 0..40),
            seed in any::<u64>(),
        ) {
            let ids = ["a", "b", "c", "d"];
            let links: Vec<_> = raw.iter().map(|&(i, n)| link(ids[i], n)).collect();
            let out = apply_fractional_weights(set(&ids), &links).unwrap();

            let mut shuffled = links.clone();
            let len = shuffled.len();
            if len > 1 {
                let mut s = seed;
                for i in (1..len).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (s >> 33) as usize % (i + 1));
                }
            }
            let out2 = apply_fractional_weights(set(&ids), &shuffled).unwrap();
            for (a, b) in out.records.iter().zip(&out2.records) {
                prop_assert_eq!(a.citation_score, b.citation_score);
                prop_assert_eq!(a.times_cited, 7);
            }
            let total: f64 = out.records.iter().map(|r| r.citation_score).sum();
            let expected: f64 = links.iter().map(|l| 1.0 / l.citing_n_refs as f64).sum();
            prop_assert!((total - expected).abs() < 1e-9);
        }
    }
}
