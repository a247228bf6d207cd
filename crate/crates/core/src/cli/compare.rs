//! Pearson correlation between two tract-variable series.

use std::fmt;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use super::tv_csv::{read_tv_csv, TvTable, TV_NAMES};
use crate::tract_variables::Quality;

/// Maximum timestamp disagreement between compared files (s).
pub const TIMEBASE_TOLERANCE_S: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("{0} has zero variance")]
    ZeroVariance(String),
    #[error("frame {index}: timestamps differ ({a} vs {b})")]
    TimebaseMismatch { index: usize, a: f64, b: f64 },
}

impl CompareError {
    pub fn is_io(&self) -> bool {
        matches!(self, CompareError::Io { .. })
    }
}

/// Pearson product-moment correlation.
///
/// Two-pass: means first, then centered cross products. The result is
/// clamped to `[-1, 1]` to absorb rounding overshoot.
pub fn ppmc(a: &[f64], b: &[f64]) -> Result<f64, CompareError> {
    if a.len() != b.len() {
        return Err(CompareError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(CompareError::InsufficientSamples(n));
    }
    let mean_a = a.iter().sum::<f64>() / n as f64;
    let mean_b = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 {
        return Err(CompareError::ZeroVariance("first series".into()));
    }
    if sbb == 0.0 {
        return Err(CompareError::ZeroVariance("second series".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    #[serde(rename = "LA")]
    pub la: f64,
    #[serde(rename = "LP")]
    pub lp: f64,
    #[serde(rename = "TBCL")]
    pub tbcl: f64,
    #[serde(rename = "TBCD")]
    pub tbcd: f64,
    #[serde(rename = "TTCL")]
    pub ttcl: f64,
    #[serde(rename = "TTCD")]
    pub ttcd: f64,
    pub average: f64,
    pub n_frames_compared: usize,
    pub n_frames_excluded: usize,
}

impl ComparisonReport {
    pub fn scores(&self) -> [f64; 6] {
        [self.la, self.lp, self.tbcl, self.tbcd, self.ttcl, self.ttcd]
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<8}", "TVs")?;
        for name in TV_NAMES.iter().chain(&["Average"]) {
            write!(f, "{name:>9}")?;
        }
        writeln!(f)?;
        write!(f, "{:<8}", "PPMC")?;
        for v in self.scores().iter().chain(&[self.average]) {
            write!(f, "{v:>9.4}")?;
        }
        writeln!(f)?;
        write!(
            f,
            "frames compared: {}, excluded: {}",
            self.n_frames_compared, self.n_frames_excluded
        )
    }
}

/// Correlates every TV column of two tables that share a timebase.
///
/// Frames flagged non-`ok` in either table are dropped from all six
/// correlations.
pub fn compare_tables(a: &TvTable, b: &TvTable) -> Result<ComparisonReport, CompareError> {
    if a.len() != b.len() {
        return Err(CompareError::LengthMismatch(a.len(), b.len()));
    }
    for (index, (&ta, &tb)) in a.t.iter().zip(&b.t).enumerate() {
        if (ta - tb).abs() > TIMEBASE_TOLERANCE_S {
            return Err(CompareError::TimebaseMismatch { index, a: ta, b: tb });
        }
    }

    let keep: Vec<usize> = (0..a.len())
        .filter(|&i| {
            a.quality[i] == Quality::Ok
                && b.quality[i] == Quality::Ok
                && a.values[i].iter().chain(&b.values[i]).all(Option::is_some)
        })
        .collect();

    let mut scores = [0.0; 6];
    for (tv, score) in scores.iter_mut().enumerate() {
        let xa: Vec<f64> = keep.iter().filter_map(|&i| a.values[i][tv]).collect();
        let xb: Vec<f64> = keep.iter().filter_map(|&i| b.values[i][tv]).collect();
        *score = ppmc(&xa, &xb).map_err(|e| match e {
            CompareError::ZeroVariance(which) => {
                CompareError::ZeroVariance(format!("{} ({which})", TV_NAMES[tv]))
            }
            other => other,
        })?;
    }

    Ok(ComparisonReport {
        la: scores[0],
        lp: scores[1],
        tbcl: scores[2],
        tbcd: scores[3],
        ttcl: scores[4],
        ttcd: scores[5],
        average: scores.iter().sum::<f64>() / 6.0,
        n_frames_compared: keep.len(),
        n_frames_excluded: a.len() - keep.len(),
    })
}

pub fn compare_tvs(path_a: &Path, path_b: &Path) -> Result<ComparisonReport, CompareError> {
    compare_tables(&load(path_a)?, &load(path_b)?)
}

fn load(path: &Path) -> Result<TvTable, CompareError> {
    let file = std::fs::File::open(path).map_err(|source| CompareError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_tv_csv(file, &path.display().to_string()).map_err(CompareError::Parse)
}
