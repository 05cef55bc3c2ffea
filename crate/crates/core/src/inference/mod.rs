//! Significance tests: observed-vs-expected z-tests with flags, pairwise
//! Mann-Whitney comparisons under Bonferroni correction, and the homogeneity
//! graph with its k-core decomposition.

mod graph;
mod mann_whitney;
mod ztest;

use thiserror::Error;

use crate::indicators::{IndicatorReport, IndicatorResult};

pub use graph::{core_numbers, homogeneity_graph, CompareVariable, ComparisonGraph, PairTest, LARGE_COMPARISON};
pub use mann_whitney::{
    mann_whitney, mann_whitney_exact, mann_whitney_normal, MannWhitney, PMethod, EXACT_MAX_MIN_N, EXACT_TIED_MAX_N,
};
pub use ztest::{flag_unit, ztest_two_proportions, ExpectMode, SignificanceFlag, ZTest, Z_01, Z_05};

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error("invalid proportions {x1}/{n1} vs {x2}/{n2}")]
    InvalidProportion { x1: u64, n1: u64, x2: u64, n2: u64 },
    #[error("observed and reference totals must be positive")]
    NonPositiveTotal,
    #[error("samples must be non-empty")]
    EmptySample,
    #[error("samples must be finite")]
    NonFiniteValue,
    #[error("pairwise comparison needs at least 2 units, got {0}")]
    TooFewUnits(usize),
    #[error("unit {0} has no values")]
    EmptyUnit(String),
}

pub type Result<T, E = InferenceError> = std::result::Result<T, E>;

/// Per-comparison level for all pairwise tests among `n_units` units.
pub fn bonferroni_alpha(alpha: f64, n_units: usize) -> Result<f64> {
    if n_units < 2 {
        return Err(InferenceError::TooFewUnits(n_units));
    }
    let comparisons = (n_units * (n_units - 1) / 2) as f64;
    Ok(alpha / comparisons)
}

/// An indicator row joined with its significance tests.
#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedResult {
    pub result: IndicatorResult,
    pub i3_test: ZTest,
    pub i3_flag: SignificanceFlag,
    pub pr6_test: ZTest,
    pub pr6_flag: SignificanceFlag,
    pub ri3r_flag: Option<SignificanceFlag>,
}

/// Tests every unit's I3 and PR6 against its publication share, keeping the
/// report order.
pub fn flag_results(report: &IndicatorReport, mode: ExpectMode) -> Result<Vec<FlaggedResult>> {
    let n_total = report.reference.n_papers as f64;
    report
        .results
        .iter()
        .map(|r| {
            let (i3_test, i3_flag) = flag_unit(r.i3, report.reference.i3, r.n_papers, n_total, mode)?;
            let (pr6_test, pr6_flag) = flag_unit(r.pr6, report.reference.pr6, r.n_papers, n_total, mode)?;
            Ok(FlaggedResult {
                result: r.clone(),
                i3_test,
                i3_flag,
                pr6_test,
                pr6_flag,
                ri3r_flag: r.ri3r_z.map(SignificanceFlag::from_z),
            })
        })
        .collect()
}
