//! Integrated impact (I3), six-class percentile ranks (PR6), expected values
//! and the relative I3-rate for subsets of a scored reference set.

use std::cmp::Ordering;

use thiserror::Error;

use crate::aggregation::UnitSubsets;
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::quantiles::{ScoredRecord, ScoredSet};

#[derive(Debug, Error, PartialEq)]
pub enum IndicatorError {
    #[error("reference set is empty")]
    EmptyReference,
    #[error("reference quantiles have zero variance")]
    ZeroVariance,
    #[error("unit {unit} refers to record {record_id} missing from the scored set")]
    UnknownRecord { unit: String, record_id: String },
}

pub type Result<T, E = IndicatorError> = std::result::Result<T, E>;

/// Minimum unit size for the relative I3-rate test.
pub const DEFAULT_MIN_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPaper<'a> {
    pub record: &'a ScoredRecord,
    pub weight: f64,
}

/// An evaluation unit: a labelled, possibly weighted, subset of the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit<'a> {
    pub id: String,
    pub papers: Vec<WeightedPaper<'a>>,
}

impl<'a> Unit<'a> {
    pub fn new<I>(id: impl Into<String>, records: I) -> Self
    where
        I: IntoIterator<Item = &'a ScoredRecord>,
    {
        Unit {
            id: id.into(),
            papers: records
                .into_iter()
                .map(|record| WeightedPaper { record, weight: 1.0 })
                .collect(),
        }
    }

    pub fn n_papers(&self) -> f64 {
        compensated_sum(self.papers.iter().map(|p| p.weight))
    }

    pub fn i3(&self) -> f64 {
        compensated_sum(self.papers.iter().map(|p| p.weight * p.record.quantile.to_f64()))
    }

    pub fn pr6(&self, mode: Pr6Mode, n_reference: usize) -> f64 {
        let classes = compensated_sum(self.papers.iter().map(|p| p.weight * p.record.pr6_class as f64));
        match mode {
            Pr6Mode::ClassSum => classes,
            Pr6Mode::UnitMean => {
                let n = self.n_papers();
                if n > 0.0 {
                    classes / n
                } else {
                    0.0
                }
            }
            Pr6Mode::SupersetShare => classes / n_reference as f64,
        }
    }

    pub fn citations(&self) -> f64 {
        compensated_sum(self.papers.iter().map(|p| p.weight * p.record.times_cited as f64))
    }
}

/// Builds weighted units from grouped assignments.
pub fn units_from_subsets<'a>(subsets: &UnitSubsets, scored: &'a ScoredSet) -> Result<Vec<Unit<'a>>> {
    subsets
        .iter()
        .map(|(key, members)| {
            let papers = members
                .iter()
                .map(|m| {
                    scored
                        .get(&m.record_id)
                        .map(|record| WeightedPaper {
                            record,
                            weight: m.weight,
                        })
                        .ok_or_else(|| IndicatorError::UnknownRecord {
                            unit: key.clone(),
                            record_id: m.record_id.clone(),
                        })
                })
                .collect::<Result<_>>()?;
            Ok(Unit {
                id: key.clone(),
                papers,
            })
        })
        .collect()
}

/// Sum of quantile values over the unit.
pub fn i3(unit: &[ScoredRecord]) -> f64 {
    compensated_sum(unit.iter().map(|r| r.quantile.to_f64()))
}

pub fn expected_i3_from_totals(i3_reference: f64, n_unit: f64, n_reference: f64) -> Result<f64> {
    if n_reference <= 0.0 {
        return Err(IndicatorError::EmptyReference);
    }
    Ok(i3_reference * n_unit / n_reference)
}

/// Reference I3 scaled by the unit's share of publications.
pub fn expected_i3(unit: &[ScoredRecord], reference: &[ScoredRecord]) -> Result<f64> {
    expected_i3_from_totals(i3(reference), unit.len() as f64, reference.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pr6Mode {
    /// Plain sum of class weights.
    #[default]
    ClassSum,
    /// Class weights normalized by the unit's own size.
    UnitMean,
    /// Class weights normalized by the size of the whole reference set.
    SupersetShare,
}

pub fn pr6(unit: &[ScoredRecord], mode: Pr6Mode, n_reference: usize) -> f64 {
    Unit::new("", unit).pr6(mode, n_reference)
}

/// Mean and population standard deviation of reference quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMoments {
    pub mean: f64,
    pub sd: f64,
}

impl ReferenceMoments {
    pub fn of(reference: &[ScoredRecord]) -> Result<Self> {
        Self::of_values(reference.iter().map(|r| r.quantile.to_f64()))
    }

    pub fn of_values<I: IntoIterator<Item = f64>>(values: I) -> Result<Self> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Err(IndicatorError::EmptyReference);
        }
        let n = values.len() as f64;
        let mean = compensated_sum(values.iter().copied()) / n;
        let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
        Ok(ReferenceMoments { mean, sd: var.sqrt() })
    }
}

/// One-sample z statistic of the unit's mean quantile against the reference
/// mean, or `None` when the unit has fewer than `min_n` papers.
pub fn ri3r_from_values(unit: &[f64], reference: ReferenceMoments, min_n: usize) -> Result<Option<f64>> {
    if unit.len() < min_n || unit.is_empty() {
        return Ok(None);
    }
    if reference.sd == 0.0 {
        return Err(IndicatorError::ZeroVariance);
    }
    let mean = compensated_sum(unit.iter().copied()) / unit.len() as f64;
    Ok(Some(
        (mean - reference.mean) / (reference.sd / (unit.len() as f64).sqrt()),
    ))
}

pub fn ri3r(unit: &[ScoredRecord], reference: &[ScoredRecord], min_n: usize) -> Result<Option<f64>> {
    let values: Vec<f64> = unit.iter().map(|r| r.quantile.to_f64()).collect();
    ri3r_from_values(&values, ReferenceMoments::of(reference)?, min_n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorResult {
    pub unit_id: String,
    /// Weighted under fractional counting.
    pub n_papers: f64,
    pub sum_citations: f64,
    pub mean_citations: f64,
    pub i3: f64,
    pub i3_share: f64,
    pub expected_i3: f64,
    pub pr6: f64,
    pub pr6_share: f64,
    pub expected_pr6: f64,
    pub mean_quantile: f64,
    pub ri3r_z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTotals {
    pub n_papers: usize,
    pub i3: f64,
    pub pr6: f64,
    pub moments: ReferenceMoments,
}

impl ReferenceTotals {
    pub fn of(reference: &[ScoredRecord]) -> Result<Self> {
        if reference.is_empty() {
            return Err(IndicatorError::EmptyReference);
        }
        Ok(ReferenceTotals {
            n_papers: reference.len(),
            i3: i3(reference),
            pr6: pr6(reference, Pr6Mode::ClassSum, reference.len()),
            moments: ReferenceMoments::of(reference)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorReport {
    pub results: Vec<IndicatorResult>,
    pub reference: ReferenceTotals,
    /// Σ unit paper counts / reference size; 1 for a partition, above 1 when units overlap.
    pub overlap: f64,
}

/// Computes indicators for every unit, sorted by I3 share (descending) and
/// then by unit id.
pub fn indicator_report(units: &[Unit<'_>], reference: &[ScoredRecord], min_n: usize) -> Result<IndicatorReport> {
    let totals = ReferenceTotals::of(reference)?;
    let n_ref = totals.n_papers as f64;
    let mut results = units
        .iter()
        .map(|u| {
            let n_papers = u.n_papers();
            let i3 = u.i3();
            let pr6 = u.pr6(Pr6Mode::ClassSum, totals.n_papers);
            let sum_citations = u.citations();
            let values: Vec<f64> = u.papers.iter().map(|p| p.record.quantile.to_f64()).collect();
            Ok(IndicatorResult {
                unit_id: u.id.clone(),
                n_papers,
                sum_citations,
                mean_citations: ratio_or_zero(sum_citations, n_papers),
                i3,
                i3_share: ratio_or_zero(i3, totals.i3),
                expected_i3: expected_i3_from_totals(totals.i3, n_papers, n_ref)?,
                pr6,
                pr6_share: ratio_or_zero(pr6, totals.pr6),
                expected_pr6: totals.pr6 * n_papers / n_ref,
                mean_quantile: ratio_or_zero(i3, n_papers),
                ri3r_z: ri3r_from_values(&values, totals.moments, min_n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| {
        b.i3_share
            .partial_cmp(&a.i3_share)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.unit_id.cmp(&b.unit_id))
    });
    let overlap = results.iter().map(|r| r.n_papers).collect::<CompensatedSum>().value() / n_ref;
    Ok(IndicatorReport {
        results,
        reference: totals,
        overlap,
    })
}

fn ratio_or_zero(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}
