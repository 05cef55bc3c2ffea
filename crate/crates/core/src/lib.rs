//! Percentile-based citation impact indicators.
//!
//! The pipeline reads bibliographic exports ([`records`]), places every paper
//! at a quantile of its publication-year and document-type stratum
//! ([`quantiles`]), sums those quantiles per evaluation unit
//! ([`aggregation`], [`indicators`]), tests units against their expected
//! share ([`inference`]) and writes tables, network files and map overlays
//! ([`reporting`]).

pub mod aggregation;
pub mod indicators;
pub mod inference;
pub mod numeric;
pub mod quantiles;
pub mod records;
pub mod reporting;
