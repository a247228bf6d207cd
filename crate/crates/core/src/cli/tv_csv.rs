//! Tract-variable CSV: `t,LA,LP,TBCL,TBCD,TTCL,TTCD,quality`.
//!
//! Absent values are empty cells. Numbers use the shortest representation
//! that parses back to the same `f64`.

use std::io::{Read, Write};
use std::str::FromStr;

use clap::ValueEnum;

use crate::tract_variables::{Quality, TvTrajectory};

pub const TV_HEADER: [&str; 8] = ["t", "LA", "LP", "TBCL", "TBCD", "TTCL", "TTCD", "quality"];

/// Tract-variable names in column order.
pub const TV_NAMES: [&str; 6] = ["LA", "LP", "TBCL", "TBCD", "TTCL", "TTCD"];

/// Columns (in [`TV_NAMES`] order) that hold angles.
pub const ANGLE_COLUMNS: [usize; 2] = [2, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

impl AngleUnit {
    pub fn convert(self, radians: f64) -> f64 {
        match self {
            AngleUnit::Radians => radians,
            AngleUnit::Degrees => radians.to_degrees(),
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            AngleUnit::Radians => "rad",
            AngleUnit::Degrees => "deg",
        }
    }
}

pub fn write_tv_csv<W: Write>(traj: &TvTrajectory, unit: AngleUnit, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TV_HEADER)?;
    for frame in &traj.frames {
        let mut row = Vec::with_capacity(8);
        row.push(frame.t.to_string());
        for (i, value) in frame.values().into_iter().enumerate() {
            row.push(match value {
                Some(v) if ANGLE_COLUMNS.contains(&i) => unit.convert(v).to_string(),
                Some(v) => v.to_string(),
                None => String::new(),
            });
        }
        row.push(frame.quality.to_string());
        w.write_record(&row)?;
    }
    w.flush()
}

/// A TV CSV as read back from disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TvTable {
    pub t: Vec<f64>,
    pub values: Vec<[Option<f64>; 6]>,
    pub quality: Vec<Quality>,
}

impl TvTable {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn column(&self, i: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|v| v[i]).collect()
    }
}

pub fn read_tv_csv<R: Read>(reader: R, source: &str) -> Result<TvTable, String> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| format!("{source}: {e}"))?.clone();
    if headers.iter().ne(TV_HEADER) {
        return Err(format!(
            "{source}: expected header {}, got {}",
            TV_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        ));
    }
    let mut table = TvTable::default();
    for record in rdr.records() {
        let record = record.map_err(|e| format!("{source}: {e}"))?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<Option<f64>, String> {
            let text = &record[i];
            if text.is_empty() {
                return Ok(None);
            }
            text.parse::<f64>()
                .map(Some)
                .map_err(|_| format!("{source}:{line}: column {}: invalid number {text:?}", TV_HEADER[i]))
        };
        let t = num(0)?.ok_or_else(|| format!("{source}:{line}: missing time"))?;
        let mut values = [None; 6];
        for (i, v) in values.iter_mut().enumerate() {
            *v = num(i + 1)?;
        }
        let quality = Quality::from_str(&record[7]).map_err(|e| format!("{source}:{line}: {e}"))?;
        table.t.push(t);
        table.values.push(values);
        table.quality.push(quality);
    }
    Ok(table)
}
