//! Citation quantiles within (publication year × document type) strata and
//! the six-class percentile-rank scheme.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::records::{CitationRecord, DocType, RecordSet};

#[derive(Debug, Error)]
pub enum QuantileError {
    #[error("cannot stratify an empty record set")]
    EmptySet,
    #[error("record {0} is not a member of the stratum")]
    RecordNotInStratum(String),
    #[error("the +0.9 offset is only valid with the strictly-less counting rule")]
    InvalidRule,
    #[error("quantile {0} is outside [0, 100.9]")]
    OutOfRange(f64),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = QuantileError> = std::result::Result<T, E>;

/// Strata smaller than this are scored but flagged.
pub const SMALL_STRATUM: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StratumKey {
    pub pub_year: i32,
    pub doc_type: DocType,
}

impl StratumKey {
    pub fn of(record: &CitationRecord) -> Self {
        StratumKey {
            pub_year: record.pub_year,
            doc_type: record.doc_type.clone(),
        }
    }
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.pub_year, self.doc_type)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub key: StratumKey,
    pub members: Vec<String>,
}

impl Stratum {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    /// Count of strictly lower scores.
    #[default]
    StrictLess,
    /// Count of lower-or-equal scores.
    LessOrEqual,
    /// Midpoint of the averaged ascending rank of the tie group.
    TieAveraged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountingRule {
    variant: TieRule,
    mutz_offset: bool,
}

impl CountingRule {
    pub fn new(variant: TieRule, mutz_offset: bool) -> Result<Self> {
        if mutz_offset && variant != TieRule::StrictLess {
            return Err(QuantileError::InvalidRule);
        }
        Ok(CountingRule { variant, mutz_offset })
    }

    pub fn variant(&self) -> TieRule {
        self.variant
    }

    pub fn mutz_offset(&self) -> bool {
        self.mutz_offset
    }

    /// Quantile of a score with `below` strictly lower and `tied` equal scores
    /// (the record itself included) in a stratum of `n`.
    fn quantile_for(&self, below: usize, tied: usize, n: usize) -> Quantile {
        let (below, tied, n) = (below as i64, tied as i64, n as i64);
        let q = match self.variant {
            TieRule::StrictLess => Ratio::new(100 * below, n),
            TieRule::LessOrEqual => Ratio::new(100 * (below + tied), n),
            TieRule::TieAveraged => Ratio::new(50 * (2 * below + tied), n),
        };
        if self.mutz_offset {
            Quantile(q + Ratio::new(9, 10))
        } else {
            Quantile(q)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreField {
    #[default]
    TimesCited,
    CitationScore,
}

impl ScoreField {
    pub fn of(&self, record: &CitationRecord) -> f64 {
        match self {
            ScoreField::TimesCited => record.times_cited as f64,
            ScoreField::CitationScore => record.citation_score,
        }
    }
}

/// An exact percentile value on the 0–100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Quantile(Ratio<i64>);

impl Quantile {
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Quantile(Ratio::new(numer, denom))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Decimal rendering with four fractional digits, rounded half up.
    pub fn to_decimal(&self) -> String {
        let (n, d) = (*self.0.numer() as i128, *self.0.denom() as i128);
        let scaled = (n * 20_000 + d) / (2 * d);
        format!("{}.{:04}", scaled / 10_000, scaled % 10_000)
    }
}

impl fmt::Display for Quantile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

/// Lower bounds of classes 6, 5, 4, 3, 2.
const PR6_BOUNDS: [(i64, u8); 5] = [(99, 6), (95, 5), (90, 4), (75, 3), (50, 2)];
const MAX_QUANTILE: f64 = 100.9;

/// Six-class percentile rank of a quantile: 6 for the top-1% down to 1 for
/// the bottom half. Classes are closed at their lower bound.
pub fn pr6_class(quantile: f64) -> Result<u8> {
    if !(0.0..=MAX_QUANTILE).contains(&quantile) {
        return Err(QuantileError::OutOfRange(quantile));
    }
    let q = quantile.min(100.0);
    Ok(PR6_BOUNDS
        .iter()
        .find(|(lo, _)| q >= *lo as f64)
        .map_or(1, |&(_, class)| class))
}

pub fn pr6_class_exact(quantile: Quantile) -> Result<u8> {
    let q = quantile.0;
    if q < Ratio::from_integer(0) || q > Ratio::new(1009, 10) {
        return Err(QuantileError::OutOfRange(quantile.to_f64()));
    }
    Ok(PR6_BOUNDS
        .iter()
        .find(|(lo, _)| q >= Ratio::from_integer(*lo))
        .map_or(1, |&(_, class)| class))
}

/// Partition of a record set into strata, ordered by key.
pub fn stratify(set: &RecordSet) -> Result<Vec<Stratum>> {
    if set.is_empty() {
        return Err(QuantileError::EmptySet);
    }
    let mut groups: BTreeMap<StratumKey, Vec<String>> = BTreeMap::new();
    for r in &set.records {
        groups.entry(StratumKey::of(r)).or_default().push(r.record_id.clone());
    }
    Ok(groups
        .into_iter()
        .map(|(key, members)| Stratum { key, members })
        .collect())
}

/// Quantile of one record by direct counting over its stratum.
pub fn quantile_of(
    record: &CitationRecord,
    stratum: &Stratum,
    set: &RecordSet,
    rule: CountingRule,
    field: ScoreField,
) -> Result<Quantile> {
    if !stratum.members.contains(&record.record_id) {
        return Err(QuantileError::RecordNotInStratum(record.record_id.clone()));
    }
    let by_id: HashMap<&str, &CitationRecord> = set.records.iter().map(|r| (r.record_id.as_str(), r)).collect();
    let own = field.of(record);
    let (mut below, mut tied) = (0, 0);
    for id in &stratum.members {
        let other = by_id
            .get(id.as_str())
            .ok_or_else(|| QuantileError::RecordNotInStratum(id.clone()))?;
        let s = field.of(other);
        if s < own {
            below += 1;
        } else if s == own {
            tied += 1;
        }
    }
    Ok(rule.quantile_for(below, tied, stratum.size()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRecord {
    pub record_id: String,
    pub key: StratumKey,
    pub quantile: Quantile,
    pub pr6_class: u8,
    pub times_cited: u64,
    pub citation_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratumSummary {
    pub key: StratumKey,
    pub size: usize,
    pub small: bool,
}

/// Scored records, ordered by record id, plus per-stratum metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    pub records: Vec<ScoredRecord>,
    pub strata: Vec<StratumSummary>,
    pub rule: CountingRule,
}

impl ScoredSet {
    pub fn get(&self, record_id: &str) -> Option<&ScoredRecord> {
        self.records
            .binary_search_by(|r| r.record_id.as_str().cmp(record_id))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn small_strata(&self) -> impl Iterator<Item = &StratumSummary> {
        self.strata.iter().filter(|s| s.small)
    }

    fn from_parts(mut records: Vec<ScoredRecord>, rule: CountingRule) -> Self {
        records.sort_by(|a, b| a.record_id.cmp(&b.record_id));
        let mut sizes: BTreeMap<StratumKey, usize> = BTreeMap::new();
        for r in &records {
            *sizes.entry(r.key.clone()).or_default() += 1;
        }
        let strata = sizes
            .into_iter()
            .map(|(key, size)| StratumSummary {
                key,
                size,
                small: size < SMALL_STRATUM,
            })
            .collect();
        ScoredSet { records, strata, rule }
    }
}

/// Scores every record against its stratum by sorting, O(N log N) per stratum.
pub fn score_set(set: &RecordSet, rule: CountingRule, field: ScoreField) -> Result<ScoredSet> {
    let strata = stratify(set)?;
    let by_id: HashMap<&str, &CitationRecord> = set.records.iter().map(|r| (r.record_id.as_str(), r)).collect();

    let scored: Vec<Vec<ScoredRecord>> = strata
        .par_iter()
        .map(|stratum| {
            let members: Vec<&CitationRecord> = stratum.members.iter().map(|id| by_id[id.as_str()]).collect();
            let mut sorted: Vec<f64> = members.iter().map(|r| field.of(r)).collect();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            members
                .iter()
                .map(|r| {
                    let s = field.of(r);
                    let below = sorted.partition_point(|&x| x < s);
                    let upto = sorted.partition_point(|&x| x <= s);
                    let quantile = rule.quantile_for(below, upto - below, n);
                    Ok(ScoredRecord {
                        record_id: r.record_id.clone(),
                        key: stratum.key.clone(),
                        pr6_class: pr6_class_exact(quantile)?,
                        quantile,
                        times_cited: r.times_cited,
                        citation_score: r.citation_score,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    Ok(ScoredSet::from_parts(scored.into_iter().flatten().collect(), rule))
}

const SCORED_HEADER: [&str; 7] = [
    "record_id",
    "pub_year",
    "doc_type",
    "quantile",
    "pr6_class",
    "times_cited",
    "citation_score",
];

pub fn write_scored(scored: &ScoredSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| QuantileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_scored_to(scored, file)
}

pub fn write_scored_to<W: Write>(scored: &ScoredSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCORED_HEADER)?;
    for r in &scored.records {
        w.write_record([
            r.record_id.as_str(),
            &r.key.pub_year.to_string(),
            r.key.doc_type.label(),
            &r.quantile.to_decimal(),
            &r.pr6_class.to_string(),
            &r.times_cited.to_string(),
            &r.citation_score.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_scored(path: &Path, rule: CountingRule) -> Result<ScoredSet> {
    let file = File::open(path).map_err(|source| QuantileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_scored_from(file, rule)
}

pub fn read_scored_str(text: &str, rule: CountingRule) -> Result<ScoredSet> {
    read_scored_from(text.as_bytes(), rule)
}

struct ScoredRow {
    line: usize,
    record_id: String,
    key: StratumKey,
    decimal: f64,
    pr6_class: u8,
    times_cited: u64,
    citation_score: f64,
}

/// Reads a scored-record file and recovers exact quantiles. Stratum sizes are
/// recounted from the file and each decimal is snapped to the grid of values
/// the counting rule can produce; a value off that grid is rejected.
fn read_scored_from<R: Read>(input: R, rule: CountingRule) -> Result<ScoredSet> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(SCORED_HEADER.iter().copied()) {
        return Err(QuantileError::Malformed {
            line: 1,
            reason: format!("expected header {}", SCORED_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |what: &str| QuantileError::Malformed {
            line,
            reason: format!("invalid {what}"),
        };
        let f = |k: usize| rec.get(k).unwrap_or("");
        rows.push(ScoredRow {
            line,
            record_id: f(0).to_string(),
            key: StratumKey {
                pub_year: f(1).parse().map_err(|_| bad("pub_year"))?,
                doc_type: DocType::from_label(f(2)),
            },
            decimal: f(3).parse().map_err(|_| bad("quantile"))?,
            pr6_class: f(4).parse().map_err(|_| bad("pr6_class"))?,
            times_cited: f(5).parse().map_err(|_| bad("times_cited"))?,
            citation_score: f(6).parse().map_err(|_| bad("citation_score"))?,
        });
    }

    let mut sizes: HashMap<StratumKey, i64> = HashMap::new();
    for r in &rows {
        *sizes.entry(r.key.clone()).or_default() += 1;
    }
    let step_numer = match rule.variant {
        TieRule::TieAveraged => 50,
        TieRule::StrictLess | TieRule::LessOrEqual => 100,
    };
    let offset = if rule.mutz_offset {
        Ratio::new(9, 10)
    } else {
        Ratio::from_integer(0)
    };

    let mut records = Vec::with_capacity(rows.len());
    for r in rows {
        let n = sizes[&r.key];
        let m = ((r.decimal - offset_f64(offset)) * n as f64 / step_numer as f64).round() as i64;
        let quantile = Quantile(offset + Ratio::new(step_numer * m, n));
        if m < 0 || (quantile.to_f64() - r.decimal).abs() > 5.1e-5 {
            return Err(QuantileError::Malformed {
                line: r.line,
                reason: format!(
                    "quantile {} is not attainable in a stratum of {n} under the chosen counting rule",
                    r.decimal
                ),
            });
        }
        let class = pr6_class_exact(quantile)?;
        if class != r.pr6_class {
            return Err(QuantileError::Malformed {
                line: r.line,
                reason: format!("pr6_class {} does not match quantile {}", r.pr6_class, r.decimal),
            });
        }
        records.push(ScoredRecord {
            record_id: r.record_id,
            key: r.key,
            quantile,
            pr6_class: class,
            times_cited: r.times_cited,
            citation_score: r.citation_score,
        });
    }
    Ok(ScoredSet::from_parts(records, rule))
}

fn offset_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::DocType;
    use proptest::prelude::*;

    fn rec(id: &str, year: i32, doc_type: DocType, tc: u64) -> CitationRecord {
        CitationRecord {
            record_id: id.to_string(),
            journal: "J".into(),
            pub_year: year,
            doc_type,
            times_cited: tc,
            citation_score: tc as f64,
            addresses: vec![],
            authors: vec![],
            n_refs: 1,
        }
    }

    fn one_stratum(counts: &[u64]) -> RecordSet {
        RecordSet::new(
            counts
                .iter()
                .enumerate()
                .map(|(i, &c)| rec(&format!("r{i:03}"), 2007, DocType::Article, c))
                .collect(),
        )
        .unwrap()
    }

    fn strict() -> CountingRule {
        CountingRule::default()
    }
    fn mutz() -> CountingRule {
        CountingRule::new(TieRule::StrictLess, true).unwrap()
    }
    fn leq() -> CountingRule {
        CountingRule::new(TieRule::LessOrEqual, false).unwrap()
    }
    fn tieavg() -> CountingRule {
        CountingRule::new(TieRule::TieAveraged, false).unwrap()
    }

    fn quantiles(counts: &[u64], rule: CountingRule) -> Vec<f64> {
        let set = one_stratum(counts);
        let scored = score_set(&set, rule, ScoreField::TimesCited).unwrap();
        set.records
            .iter()
            .map(|r| scored.get(&r.record_id).unwrap().quantile.to_f64())
            .collect()
    }

    #[test]
    fn offset_requires_strict_rule() {
        assert!(matches!(
            CountingRule::new(TieRule::LessOrEqual, true),
            Err(QuantileError::InvalidRule)
        ));
        assert!(CountingRule::new(TieRule::StrictLess, true).is_ok());
    }

    #[test]
    fn cartesian_strata() {
        let mut records = Vec::new();
        for y in [2008, 2007] {
            for t in [DocType::Review, DocType::Article] {
                records.push(rec(&format!("{y}{t}"), y, t, 1));
            }
        }
        let strata = stratify(&RecordSet::new(records).unwrap()).unwrap();
        assert_eq!(strata.len(), 4);
        assert_eq!(strata[0].key.pub_year, 2007);
        assert_eq!(strata[0].key.doc_type, DocType::Article);
    }

    #[test]
    fn uniform_year_and_type_is_one_stratum() {
        let strata = stratify(&one_stratum(&[1, 2, 3])).unwrap();
        assert_eq!(strata.len(), 1);
        assert_eq!(strata[0].size(), 3);
    }

    #[test]
    fn type_mix_gives_25_5_1() {
        let mut records = Vec::new();
        for (t, n) in [
            (DocType::Article, 25),
            (DocType::ProceedingsPaper, 5),
            (DocType::Review, 1),
        ] {
            for _ in 0..n {
                records.push(rec(&format!("r{}", records.len()), 2007, t.clone(), 0));
            }
        }
        let strata = stratify(&RecordSet::new(records).unwrap()).unwrap();
        let mut sizes: Vec<_> = strata.iter().map(Stratum::size).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, [25, 5, 1]);
    }

    #[test]
    fn empty_set_cannot_be_stratified() {
        assert!(matches!(stratify(&RecordSet::default()), Err(QuantileError::EmptySet)));
    }

    #[test]
    fn ten_distinct_top_record() {
        let set = one_stratum(&(0..10).collect::<Vec<_>>());
        let strata = stratify(&set).unwrap();
        let top = &set.records[9];
        let q = |rule| quantile_of(top, &strata[0], &set, rule, ScoreField::TimesCited).unwrap();
        assert_eq!(q(strict()), Quantile::from_ratio(90, 1));
        assert_eq!(q(mutz()), Quantile::from_ratio(909, 10));
        assert_eq!(q(leq()), Quantile::from_ratio(100, 1));
        assert_eq!(q(mutz()).to_decimal(), "90.9000");
    }

    #[test]
    fn all_tied_strict_is_zero() {
        assert_eq!(quantiles(&[5, 5, 5], strict()), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn singleton_boundaries() {
        assert_eq!(quantiles(&[4], strict()), [0.0]);
        assert_eq!(quantiles(&[4], leq()), [100.0]);
        assert_eq!(quantiles(&[4], tieavg()), [50.0]);
    }

    #[test]
    fn five_record_fixture() {
        assert_eq!(quantiles(&[0, 1, 1, 3, 7], strict()), [0.0, 20.0, 20.0, 60.0, 80.0]);
        // tie group {1,1} occupies ranks 2 and 3, mean 2.5 -> 100 * 2 / 5
        assert_eq!(quantiles(&[0, 1, 1, 3, 7], tieavg()), [10.0, 40.0, 40.0, 70.0, 90.0]);
    }

    #[test]
    fn not_in_stratum() {
        let set = one_stratum(&[1, 2]);
        let strata = stratify(&set).unwrap();
        let outsider = rec("x", 2007, DocType::Article, 1);
        assert!(matches!(
            quantile_of(&outsider, &strata[0], &set, strict(), ScoreField::TimesCited),
            Err(QuantileError::RecordNotInStratum(_))
        ));
    }

    #[test]
    fn pr6_boundaries() {
        let cases = [
            (99.5, 6),
            (99.0, 6),
            (98.999, 5),
            (95.0, 5),
            (90.0, 4),
            (89.999, 3),
            (75.0, 3),
            (50.0, 2),
            (49.99, 1),
            (10.0, 1),
            (0.0, 1),
            (100.0, 6),
            (100.9, 6),
        ];
        for (q, c) in cases {
            assert_eq!(pr6_class(q).unwrap(), c, "q = {q}");
        }
        assert!(pr6_class(-0.1).is_err());
        assert!(pr6_class(101.0).is_err());
        assert!(pr6_class(f64::NAN).is_err());
    }

    #[test]
    fn exact_and_float_classes_agree() {
        for k in 0..=1009 {
            let q = Quantile::from_ratio(k, 10);
            assert_eq!(pr6_class_exact(q).unwrap(), pr6_class(q.to_f64()).unwrap());
        }
    }

    #[test]
    fn decimal_rendering_rounds_half_up() {
        assert_eq!(Quantile::from_ratio(100, 3).to_decimal(), "33.3333");
        assert_eq!(Quantile::from_ratio(200, 3).to_decimal(), "66.6667");
        assert_eq!(Quantile::from_ratio(1, 20000).to_decimal(), "0.0001");
        assert_eq!(Quantile::from_ratio(0, 7).to_decimal(), "0.0000");
    }

    #[test]
    fn small_strata_are_flagged() {
        let mut records: Vec<_> = (0..6)
            .map(|i| rec(&format!("a{i}"), 2007, DocType::Article, i))
            .collect();
        records.push(rec("l0", 2007, DocType::Letter, 3));
        let scored = score_set(&RecordSet::new(records).unwrap(), strict(), ScoreField::TimesCited).unwrap();
        let small: Vec<_> = scored.small_strata().map(|s| s.key.doc_type.clone()).collect();
        assert_eq!(small, [DocType::Letter]);
    }

    #[test]
    fn scored_csv_round_trips_exactly() {
        for rule in [strict(), mutz(), leq(), tieavg()] {
            let set = one_stratum(&[0, 3, 3, 9, 1, 12, 0]);
            let scored = score_set(&set, rule, ScoreField::TimesCited).unwrap();
            let mut buf = Vec::new();
            write_scored_to(&scored, &mut buf).unwrap();
            let back = read_scored_str(std::str::from_utf8(&buf).unwrap(), rule).unwrap();
            assert_eq!(back, scored);
        }
    }

    #[test]
    fn scored_csv_with_wrong_rule_is_rejected() {
        let set = one_stratum(&[0, 3, 9]);
        let scored = score_set(&set, mutz(), ScoreField::TimesCited).unwrap();
        let mut buf = Vec::new();
        write_scored_to(&scored, &mut buf).unwrap();
        let err = read_scored_str(std::str::from_utf8(&buf).unwrap(), strict()).unwrap_err();
        assert!(matches!(err, QuantileError::Malformed { .. }));
    }

    proptest! {
        #[test]
        fn sorted_route_matches_direct_counting(
            counts in prop::collection::vec(0u64..12, 1..40),
            variant in prop_oneof![Just(0u8), Just(1), Just(2), Just(3)],
        ) {
            let rule = match variant {
                0 => strict(),
                1 => mutz(),
                2 => leq(),
                _ => tieavg(),
            };
            let set = one_stratum(&counts);
            let strata = stratify(&set).unwrap();
            let scored = score_set(&set, rule, ScoreField::TimesCited).unwrap();
            for r in &set.records {
                let direct = quantile_of(r, &strata[0], &set, rule, ScoreField::TimesCited).unwrap();
                prop_assert_eq!(scored.get(&r.record_id).unwrap().quantile, direct);
            }
        }

        #[test]
        fn monotone_and_tie_consistent(counts in prop::collection::vec(0u64..20, 1..50)) {
            for rule in [strict(), leq()] {
                let q = quantiles(&counts, rule);
                for i in 0..counts.len() {
                    for j in 0..counts.len() {
                        if counts[i] <= counts[j] {
                            prop_assert!(q[i] <= q[j]);
                        }
                        if counts[i] == counts[j] {
                            prop_assert_eq!(q[i], q[j]);
                        }
                    }
                }
            }
        }

        #[test]
        fn leq_dominates_strict_by_tie_share(counts in prop::collection::vec(0u64..10, 1..40)) {
            let set = one_stratum(&counts);
            let a = score_set(&set, strict(), ScoreField::TimesCited).unwrap();
            let b = score_set(&set, leq(), ScoreField::TimesCited).unwrap();
            let n = counts.len() as i64;
            for (r, c) in set.records.iter().zip(&counts) {
                let tie = counts.iter().filter(|x| *x == c).count() as i64;
                let diff = b.get(&r.record_id).unwrap().quantile.ratio() - a.get(&r.record_id).unwrap().quantile.ratio();
                prop_assert_eq!(diff, Ratio::new(100 * tie, n));
            }
        }

        #[test]
        fn tie_averaged_mean_is_fifty(counts in prop::collection::vec(0u64..6, 1..40)) {
            // Mean ranks always sum to N(N+1)/2, so the midpoint quantiles average 50.
            let set = one_stratum(&counts);
            let scored = score_set(&set, tieavg(), ScoreField::TimesCited).unwrap();
            let total: Ratio<i64> = scored.records.iter().map(|r| r.quantile.ratio()).sum();
            prop_assert_eq!(total, Ratio::from_integer(50 * counts.len() as i64));
        }

        #[test]
        fn strict_range_bound(counts in prop::collection::vec(0u64..30, 1..40)) {
            let n = counts.len() as i64;
            for q in quantiles(&counts, strict()) {
                prop_assert!(q >= 0.0 && q <= 100.0 * (n - 1) as f64 / n as f64);
            }
            for q in quantiles(&counts, leq()) {
                prop_assert!(q > 0.0 && q <= 100.0);
            }
        }

        #[test]
        fn input_order_does_not_matter(counts in prop::collection::vec(0u64..30, 1..30)) {
            let set = one_stratum(&counts);
            let mut reversed = set.clone();
            reversed.records.reverse();
            let a = score_set(&set, strict(), ScoreField::TimesCited).unwrap();
            let b = score_set(&reversed, strict(), ScoreField::TimesCited).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
