//! Rank correlation, rating standardization and dependent-correlation tests.

mod rank;
mod ratings;
mod significance;

pub use rank::{krcc, ranks, spearman, srcc, Spearman};
pub use ratings::{zscore_ratings, RatingMatrix, ZScores};
pub use significance::{
    fisher_z, steiger_test, williams_test, TestOutcome, SIGNIFICANCE_LEVEL,
};

use std::fmt;
use std::str::FromStr;

use crate::error::IqaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankStatistic {
    Srcc,
    Krcc,
}

impl fmt::Display for RankStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankStatistic::Srcc => f.write_str("SRCC"),
            RankStatistic::Krcc => f.write_str("KRCC"),
        }
    }
}

/// Which dependent-correlation test drives the significance flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DependentTest {
    #[default]
    Steiger,
    Williams,
}

impl DependentTest {
    pub fn run(self, r_jk: f64, r_jh: f64, r_kh: f64, n: usize) -> crate::Result<TestOutcome> {
        match self {
            DependentTest::Steiger => steiger_test(r_jk, r_jh, r_kh, n),
            DependentTest::Williams => williams_test(r_jk, r_jh, r_kh, n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DependentTest::Steiger => "steiger",
            DependentTest::Williams => "williams",
        }
    }
}

impl FromStr for DependentTest {
    type Err = IqaError;

    fn from_str(s: &str) -> Result<Self, IqaError> {
        match s {
            "steiger" => Ok(DependentTest::Steiger),
            "williams" => Ok(DependentTest::Williams),
            other => Err(IqaError::param(format!(
                "test must be steiger or williams, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Better,
    Worse,
    NotSignificant,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Better => f.write_str("better"),
            Verdict::Worse => f.write_str("worse"),
            Verdict::NotSignificant => f.write_str("none"),
        }
    }
}

impl Verdict {
    /// Flags a difference only when `p` is strictly below [`SIGNIFICANCE_LEVEL`].
    pub fn from_outcome(outcome: &TestOutcome) -> Verdict {
        if outcome.p < SIGNIFICANCE_LEVEL {
            if outcome.statistic > 0.0 {
                Verdict::Better
            } else {
                Verdict::Worse
            }
        } else {
            Verdict::NotSignificant
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceEntry {
    pub against: String,
    pub statistic: RankStatistic,
    pub test: DependentTest,
    pub outcome: TestOutcome,
    pub verdict: Verdict,
    pub n: usize,
    pub caveat: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub measure: String,
    pub srcc: f64,
    pub krcc: f64,
    pub n: usize,
    pub significance: Vec<SignificanceEntry>,
}

impl CorrelationReport {
    pub fn abs_srcc(&self) -> f64 {
        self.srcc.abs()
    }

    pub fn abs_krcc(&self) -> f64 {
        self.krcc.abs()
    }
}
