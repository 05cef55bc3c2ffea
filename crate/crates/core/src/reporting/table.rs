use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use super::{fmt_count, write_file, Result};
use crate::inference::{ExpectMode, FlaggedResult, SignificanceFlag};
use crate::numeric::fixed;
use crate::quantiles::ScoredSet;

fn by_share(a: &FlaggedResult, b: &FlaggedResult) -> Ordering {
    b.result
        .i3_share
        .partial_cmp(&a.result.i3_share)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.result.unit_id.cmp(&b.result.unit_id))
}

/// Competition ranking, largest value first: 1 + number of strictly larger values.
fn ranks_desc(values: &[f64]) -> Vec<usize> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    values.iter().map(|v| 1 + sorted.partition_point(|s| s > v)).collect()
}

fn pct(share: f64) -> String {
    fixed(100.0 * share, 2)
}

fn with_flag(value: String, flag: SignificanceFlag) -> String {
    match flag {
        SignificanceFlag::NotSignificant => value,
        f => format!("{value} {f}"),
    }
}

fn z3(z: Option<f64>) -> String {
    z.map(|z| fixed(z, 3)).unwrap_or_default()
}

/// Ranked table: one row per unit ordered by I3 share, with bracketed ranks
/// for papers, %I3 and %PR6, and significance flags after the percentages.
/// `top_k = 0` keeps every row.
pub fn write_rank_table<W: Write>(rows: &[FlaggedResult], top_k: usize, out: W) -> Result<()> {
    let mut rows: Vec<&FlaggedResult> = rows.iter().collect();
    rows.sort_by(|a, b| by_share(a, b));
    let papers_rank = ranks_desc(&rows.iter().map(|r| r.result.n_papers).collect::<Vec<_>>());
    let i3_rank = ranks_desc(&rows.iter().map(|r| r.result.i3_share).collect::<Vec<_>>());
    let pr6_rank = ranks_desc(&rows.iter().map(|r| r.result.pr6_share).collect::<Vec<_>>());
    let keep = if top_k == 0 { rows.len() } else { top_k.min(rows.len()) };

    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "rank",
        "unit",
        "n_papers",
        "citations",
        "c_per_p",
        "i3",
        "expected_i3",
        "i3_pct",
        "z_i3",
        "pr6_pct",
        "z_pr6",
        "ri3r_z",
    ])?;
    for (i, f) in rows.iter().take(keep).enumerate() {
        let r = &f.result;
        w.write_record([
            (i + 1).to_string(),
            r.unit_id.clone(),
            format!("{} [{}]", fmt_count(r.n_papers), papers_rank[i]),
            fmt_count(r.sum_citations),
            fixed(r.mean_citations, 2),
            fixed(r.i3, 0),
            fixed(r.expected_i3, 0),
            with_flag(format!("{} [{}]", pct(r.i3_share), i3_rank[i]), f.i3_flag),
            fixed(f.i3_test.z, 3),
            with_flag(format!("{} [{}]", pct(r.pr6_share), pr6_rank[i]), f.pr6_flag),
            fixed(f.pr6_test.z, 3),
            z3(r.ri3r_z),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_rank_table(rows: &[FlaggedResult], top_k: usize, path: &Path) -> Result<()> {
    write_file(path, |out| write_rank_table(rows, top_k, out))
}

/// Plain indicator values, one row per unit in report order.
pub fn write_indicator_report<W: Write>(rows: &[FlaggedResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "unit",
        "n_papers",
        "citations",
        "c_per_p",
        "i3",
        "i3_pct",
        "expected_i3",
        "pr6",
        "pr6_pct",
        "mean_quantile",
        "ri3r_z",
    ])?;
    for f in rows {
        let r = &f.result;
        w.write_record([
            r.unit_id.clone(),
            fmt_count(r.n_papers),
            fmt_count(r.sum_citations),
            fixed(r.mean_citations, 2),
            fixed(r.i3, 0),
            pct(r.i3_share),
            fixed(r.expected_i3, 0),
            fmt_count(r.pr6),
            pct(r.pr6_share),
            fixed(r.mean_quantile, 4),
            z3(r.ri3r_z),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Observed against expected I3 per unit. Under `Shares` the columns hold
/// percentages instead of I3 points.
pub fn write_ztest<W: Write>(rows: &[FlaggedResult], mode: ExpectMode, n_reference: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["unit", "observed", "expected", "z", "flag"])?;
    for f in rows {
        let r = &f.result;
        let (observed, expected) = match mode {
            ExpectMode::I3Points => (fixed(r.i3, 0), fixed(r.expected_i3, 0)),
            ExpectMode::Shares => (pct(r.i3_share), pct(r.n_papers / n_reference as f64)),
        };
        w.write_record([
            r.unit_id.as_str(),
            &observed,
            &expected,
            &fixed(f.i3_test.z, 3),
            f.i3_flag.symbol(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Relative I3-rate per unit; units below the minimum size have empty z.
pub fn write_ri3r<W: Write>(rows: &[FlaggedResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["unit", "n_papers", "mean_quantile", "z", "flag"])?;
    for f in rows {
        let r = &f.result;
        w.write_record([
            r.unit_id.as_str(),
            &fmt_count(r.n_papers),
            &fixed(r.mean_quantile, 4),
            &z3(r.ri3r_z),
            f.ri3r_flag.map_or("", |f| f.symbol()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_strata<W: Write>(scored: &ScoredSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pub_year", "doc_type", "size", "small"])?;
    for s in &scored.strata {
        w.write_record([
            s.key.pub_year.to_string().as_str(),
            s.key.doc_type.label(),
            &s.size.to_string(),
            if s.small { "yes" } else { "no" },
        ])?;
    }
    w.flush()?;
    Ok(())
}
