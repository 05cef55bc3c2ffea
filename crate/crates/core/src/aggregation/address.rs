use std::sync::OnceLock;

use regex::Regex;

use super::AggregationError;

/// An address line split into institute, city and country.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAddress {
    pub institute: String,
    pub city: String,
    pub country: String,
    pub raw: String,
    /// Set when no city survived postal-code stripping.
    pub degraded: bool,
}

fn us_country() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?:[A-Z]{2}\s+)?(?:\d{5}(?:-\d{4})?\s+)?USA$").unwrap())
}

/// Drops whitespace tokens that carry a digit ("Beijing 100080" -> "Beijing",
/// "D-79104 Freiburg" -> "Freiburg"), plus the two-letter suffix of Dutch
/// postal codes ("NL-2628 CJ Delft" -> "Delft").
fn strip_postal(segment: &str) -> String {
    let mut kept = Vec::new();
    let mut after_code = false;
    for tok in segment.split_whitespace() {
        if tok.chars().any(|c| c.is_ascii_digit()) {
            after_code = true;
            continue;
        }
        let suffix = tok.len() == 2 && tok.chars().all(|c| c.is_ascii_uppercase());
        if !(after_code && suffix) {
            kept.push(tok);
        }
        after_code = false;
    }
    kept.join(" ")
}

pub fn parse_address(raw: &str) -> Result<ParsedAddress, AggregationError> {
    let segments: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if segments.len() < 2 {
        return Err(AggregationError::UnparseableAddress(raw.to_string()));
    }
    let last = segments[segments.len() - 1].trim_end_matches('.').trim_end();
    let country = if us_country().is_match(last) {
        "USA".to_string()
    } else {
        let c = last.to_string();
        if c.is_empty() {
            return Err(AggregationError::UnparseableAddress(raw.to_string()));
        }
        c
    };
    let city = strip_postal(segments[segments.len() - 2]);
    Ok(ParsedAddress {
        institute: segments[0].to_string(),
        degraded: city.is_empty(),
        city,
        country,
        raw: raw.to_string(),
    })
}
