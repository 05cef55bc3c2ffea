use std::fmt;

use super::{InferenceError, Result};

/// Two-sided critical values for p ≤ .05 and p ≤ .01.
pub const Z_05: f64 = 1.96;
pub const Z_01: f64 = 2.576;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTest {
    pub z: f64,
    /// Pooled proportion was 0 or 1; z is reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignificanceFlag {
    BelowP01,
    BelowP05,
    NotSignificant,
    AboveP05,
    AboveP01,
}

impl SignificanceFlag {
    pub fn from_z(z: f64) -> Self {
        if z >= Z_01 {
            SignificanceFlag::AboveP01
        } else if z >= Z_05 {
            SignificanceFlag::AboveP05
        } else if z <= -Z_01 {
            SignificanceFlag::BelowP01
        } else if z <= -Z_05 {
            SignificanceFlag::BelowP05
        } else {
            SignificanceFlag::NotSignificant
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            SignificanceFlag::AboveP01 => "++",
            SignificanceFlag::AboveP05 => "+",
            SignificanceFlag::NotSignificant => "",
            SignificanceFlag::BelowP05 => "-",
            SignificanceFlag::BelowP01 => "--",
        }
    }

    pub fn is_above(&self) -> bool {
        matches!(self, SignificanceFlag::AboveP05 | SignificanceFlag::AboveP01)
    }

    pub fn is_below(&self) -> bool {
        matches!(self, SignificanceFlag::BelowP05 | SignificanceFlag::BelowP01)
    }
}

impl fmt::Display for SignificanceFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

fn pooled_z(p1: f64, n1: f64, p2: f64, n2: f64, pooled: f64) -> ZTest {
    if pooled <= 0.0 || pooled >= 1.0 {
        return ZTest {
            z: 0.0,
            degenerate: true,
        };
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    ZTest {
        z: (p1 - p2) / se,
        degenerate: false,
    }
}

/// Pooled two-proportion z-test without continuity correction.
pub fn ztest_two_proportions(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<ZTest> {
    if n1 == 0 || n2 == 0 || x1 > n1 || x2 > n2 {
        return Err(InferenceError::InvalidProportion { x1, n1, x2, n2 });
    }
    let (x1f, n1f, x2f, n2f) = (x1 as f64, n1 as f64, x2 as f64, n2 as f64);
    Ok(pooled_z(x1f / n1f, n1f, x2f / n2f, n2f, (x1f + x2f) / (n1f + n2f)))
}

/// How a unit's observed impact is tested against its publication share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpectMode {
    /// Rounded I3 points out of the reference I3 total against papers out of
    /// the reference paper count.
    #[default]
    I3Points,
    /// Impact share against publication share, both at the reference paper
    /// count as sample size.
    Shares,
}

pub fn flag_unit(
    observed_metric: f64,
    observed_total: f64,
    n_unit: f64,
    n_total: f64,
    mode: ExpectMode,
) -> Result<(ZTest, SignificanceFlag)> {
    if !(observed_total > 0.0 && n_total > 0.0) {
        return Err(InferenceError::NonPositiveTotal);
    }
    let test = match mode {
        ExpectMode::I3Points => ztest_two_proportions(
            round_count(observed_metric),
            round_count(observed_total),
            round_count(n_unit),
            round_count(n_total),
        )?,
        ExpectMode::Shares => {
            let p1 = observed_metric / observed_total;
            let p2 = n_unit / n_total;
            if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) {
                return Err(InferenceError::NonPositiveTotal);
            }
            pooled_z(p1, n_total, p2, n_total, (p1 + p2) / 2.0)
        }
    };
    Ok((test, SignificanceFlag::from_z(test.z)))
}

fn round_count(x: f64) -> u64 {
    x.max(0.0).round() as u64
}
