//! Reading pellet trajectories, anatomy traces and speaker manifests, and
//! resampling trajectories onto a uniform time grid.
//!
//! Pellet CSV header:
//! `t,ULx,ULy,LLx,LLy,T1x,T1y,T2x,T2y,T3x,T3y,T4x,T4y,MNIx,MNIy,MNMx,MNMy`
//! (seconds, millimeters). A coordinate whose magnitude is at least
//! [`MISTRACKED_SENTINEL`] marks the pellet as mistracked for that row; an
//! empty cell or `NaN` does the same.
//!
//! Trace CSV header: `x,y` (millimeters), one point per row.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::anatomy::Sex;
use crate::geometry::{Point2D, Polyline};
use crate::tract_variables::{Pellet, PelletFrame};

/// Coordinates at or beyond this magnitude mark a mistracked pellet.
pub const MISTRACKED_SENTINEL: f64 = 9.9e5;

/// Value written for invalid pellets on serialization.
const SENTINEL_OUT: f64 = 1e6;

/// Canonical output rate, samples per second.
pub const DEFAULT_RATE_HZ: f64 = 145.0;

/// Two timestamps closer than this are the same instant (s).
const TIME_EPS: f64 = 1e-9;

pub const PELLET_HEADER: [&str; 17] = [
    "t", "ULx", "ULy", "LLx", "LLy", "T1x", "T1y", "T2x", "T2y", "T3x", "T3y", "T4x", "T4y",
    "MNIx", "MNIy", "MNMx", "MNMy",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: column {column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: degenerate trace: {message}")]
    DegenerateTrace { path: String, message: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("manifest {path}: {message}")]
    Manifest { path: String, message: String },
}

/// Time-ordered pellet positions for one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct PelletTrajectory {
    pub speaker_id: String,
    pub utterance_id: String,
    pub native_rate: f64,
    pub frames: Vec<PelletFrame>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub frames_read: usize,
    /// Frames with at least one pellet flagged invalid.
    pub frames_mistracked: usize,
    /// Resampled pellet samples produced by interpolation rather than copied.
    pub pellets_interpolated: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct FormatOptions {
    pub speaker_id: String,
    pub utterance_id: String,
    /// Overrides the rate estimated from the time column.
    pub native_rate: Option<f64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(io_err(path))
}

pub fn parse_pellet_file(
    path: &Path,
    options: &FormatOptions,
) -> Result<(PelletTrajectory, IngestReport), IngestError> {
    parse_pellet_csv(open(path)?, &path.display().to_string(), options)
}

/// Parses pellet CSV from any reader. `source` names the input in errors.
pub fn parse_pellet_csv<R: Read>(
    reader: R,
    source: &str,
    options: &FormatOptions,
) -> Result<(PelletTrajectory, IngestReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(source, e))?.clone();

    let mut columns = [0usize; 17];
    let mut missing = Vec::new();
    for (slot, name) in columns.iter_mut().zip(PELLET_HEADER) {
        match headers.iter().position(|h| h == name) {
            Some(i) => *slot = i,
            None => missing.push(name),
        }
    }
    if !missing.is_empty() {
        return Err(IngestError::Schema {
            path: source.to_owned(),
            message: format!("missing columns: {}", missing.join(", ")),
        });
    }

    let mut report = IngestReport::default();
    let extra: Vec<_> = headers.iter().filter(|h| !PELLET_HEADER.contains(h)).collect();
    if !extra.is_empty() {
        report
            .warnings
            .push(format!("{source}: ignoring extra columns: {}", extra.join(", ")));
    }

    let mut frames: Vec<PelletFrame> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(source, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |column: &str, message: String| IngestError::Parse {
            path: source.to_owned(),
            line,
            column: column.to_owned(),
            message,
        };

        let t_text = record.get(columns[0]).unwrap_or("");
        let t: f64 = t_text
            .parse()
            .map_err(|_| parse_err("t", format!("invalid time {t_text:?}")))?;
        if !t.is_finite() || t < 0.0 {
            return Err(parse_err("t", format!("time must be finite and non-negative, got {t}")));
        }
        if let Some(prev) = frames.last() {
            if t <= prev.t {
                return Err(parse_err(
                    "t",
                    format!("time {t} does not increase (previous {})", prev.t),
                ));
            }
        }

        let mut frame = PelletFrame::new(t, [Point2D::default(); 8]);
        for pellet in Pellet::ALL {
            let mut coords = [0.0; 2];
            let mut valid = true;
            for (axis, value) in coords.iter_mut().enumerate() {
                let col = 1 + 2 * pellet.index() + axis;
                let text = record.get(columns[col]).unwrap_or("");
                if text.is_empty() {
                    *value = f64::NAN;
                    valid = false;
                    continue;
                }
                *value = text.parse().map_err(|_| {
                    parse_err(PELLET_HEADER[col], format!("invalid number {text:?}"))
                })?;
                if !value.is_finite() || value.abs() >= MISTRACKED_SENTINEL {
                    valid = false;
                }
            }
            frame.positions[pellet.index()] = Point2D::new(coords[0], coords[1]);
            frame.valid[pellet.index()] = valid;
        }
        if frame.valid.iter().any(|v| !v) {
            report.frames_mistracked += 1;
        }
        frames.push(frame);
    }
    report.frames_read = frames.len();

    let native_rate = match options.native_rate {
        Some(rate) if rate.is_finite() && rate > 0.0 => rate,
        Some(rate) => return Err(IngestError::InvalidRate(rate)),
        None if frames.len() >= 2 => {
            let span = frames[frames.len() - 1].t - frames[0].t;
            (frames.len() - 1) as f64 / span
        }
        None => {
            return Err(IngestError::InsufficientData(format!(
                "{source}: cannot estimate sample rate from {} frame(s)",
                frames.len()
            )))
        }
    };

    Ok((
        PelletTrajectory {
            speaker_id: options.speaker_id.clone(),
            utterance_id: options.utterance_id.clone(),
            native_rate,
            frames,
        },
        report,
    ))
}

fn csv_err(source: &str, e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Parse {
        path: source.to_owned(),
        line,
        column: "-".to_owned(),
        message: e.to_string(),
    }
}

/// Writes a trajectory in the pellet CSV format. Invalid pellets are written
/// as sentinel values so they stay invalid when read back.
pub fn write_pellet_csv<W: Write>(traj: &PelletTrajectory, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PELLET_HEADER)?;
    let mut row = Vec::with_capacity(17);
    for frame in &traj.frames {
        row.clear();
        row.push(frame.t.to_string());
        for pellet in Pellet::ALL {
            let p = frame.raw(pellet);
            for v in [p.x, p.y] {
                let out = if frame.is_valid(pellet) || (v.is_finite() && v.abs() >= MISTRACKED_SENTINEL) {
                    v
                } else {
                    SENTINEL_OUT
                };
                row.push(out.to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// Stored anterior→posterior (x descending).
    Palate,
    /// Stored superior→inferior (y descending).
    Wall,
}

pub fn parse_trace_file(path: &Path, kind: TraceKind) -> Result<(Polyline, Vec<String>), IngestError> {
    parse_trace_csv(open(path)?, &path.display().to_string(), kind)
}

pub fn parse_trace_csv<R: Read>(
    reader: R,
    source: &str,
    kind: TraceKind,
) -> Result<(Polyline, Vec<String>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(source, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| IngestError::Schema {
            path: source.to_owned(),
            message: format!("missing column {name}"),
        })
    };
    let (cx, cy) = (col("x")?, col("y")?);

    let mut points: Vec<Point2D> = Vec::new();
    let mut warnings = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(source, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |i: usize, name: &str| -> Result<f64, IngestError> {
            let text = record.get(i).unwrap_or("");
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(IngestError::Parse {
                    path: source.to_owned(),
                    line,
                    column: name.to_owned(),
                    message: format!("invalid coordinate {text:?}"),
                }),
            }
        };
        let p = Point2D::new(get(cx, "x")?, get(cy, "y")?);
        if points.last() == Some(&p) {
            warnings.push(format!("{source}:{line}: duplicate point {p} collapsed"));
            continue;
        }
        points.push(p);
    }

    if points.len() < 2 {
        return Err(IngestError::DegenerateTrace {
            path: source.to_owned(),
            message: format!("need at least 2 distinct points, got {}", points.len()),
        });
    }

    let (first, last) = (points[0], points[points.len() - 1]);
    let reversed = match kind {
        TraceKind::Palate => first.x < last.x,
        TraceKind::Wall => first.y < last.y,
    };
    if reversed {
        points.reverse();
        let order = match kind {
            TraceKind::Palate => "anterior-to-posterior",
            TraceKind::Wall => "superior-to-inferior",
        };
        warnings.push(format!("{source}: trace reversed to {order} order"));
    }

    let polyline = Polyline::new(points).map_err(|e| IngestError::DegenerateTrace {
        path: source.to_owned(),
        message: e.to_string(),
    })?;
    Ok((polyline, warnings))
}

pub fn write_trace_csv<W: Write>(trace: &Polyline, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y"])?;
    for p in trace.points() {
        w.write_record([p.x.to_string(), p.y.to_string()])?;
    }
    w.flush()
}

/// Resamples onto `t_first + k / target_rate`, see [`resample_with_report`].
pub fn resample(traj: &PelletTrajectory, target_rate: f64) -> Result<PelletTrajectory, IngestError> {
    resample_with_report(traj, target_rate, &mut IngestReport::default())
}

/// Linear resampling onto a uniform grid starting at the first frame.
///
/// Each output sample is interpolated between the two input frames that
/// enclose it; a pellet is valid in the output only if it is valid at both.
/// Grid points within 1 ns of an input frame copy that frame exactly, so
/// resampling at the native rate is the identity and both endpoints are
/// reproduced. Gaps are never filled.
pub fn resample_with_report(
    traj: &PelletTrajectory,
    target_rate: f64,
    report: &mut IngestReport,
) -> Result<PelletTrajectory, IngestError> {
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(IngestError::InvalidRate(target_rate));
    }
    let frames = &traj.frames;
    if frames.len() < 2 {
        return Err(IngestError::InsufficientData(format!(
            "utterance {:?} has {} frame(s), need 2",
            traj.utterance_id,
            frames.len()
        )));
    }
    for pellet in Pellet::ALL {
        let valid = frames.iter().filter(|f| f.is_valid(pellet)).count();
        if valid < 2 {
            return Err(IngestError::InsufficientData(format!(
                "utterance {:?}: pellet {pellet} has {valid} valid sample(s), need 2",
                traj.utterance_id
            )));
        }
    }

    let t0 = frames[0].t;
    let span = frames[frames.len() - 1].t - t0;
    let count = (span * target_rate + 1e-6).floor() as usize + 1;

    let mut out = Vec::with_capacity(count);
    let mut j = 0;
    for k in 0..count {
        let t = t0 + k as f64 / target_rate;
        while j + 1 < frames.len() && frames[j + 1].t <= t + TIME_EPS {
            j += 1;
        }
        let lo = &frames[j];
        if (t - lo.t).abs() <= TIME_EPS || j + 1 == frames.len() {
            out.push(PelletFrame { t, ..*lo });
            continue;
        }
        let hi = &frames[j + 1];
        let w = (t - lo.t) / (hi.t - lo.t);
        let mut frame = PelletFrame::new(t, [Point2D::default(); 8]);
        for pellet in Pellet::ALL {
            let i = pellet.index();
            let valid = lo.valid[i] && hi.valid[i];
            frame.valid[i] = valid;
            frame.positions[i] = if valid {
                report.pellets_interpolated += 1;
                lo.positions[i].lerp(hi.positions[i], w)
            } else {
                Point2D::new(f64::NAN, f64::NAN)
            };
        }
        out.push(frame);
    }

    Ok(PelletTrajectory {
        speaker_id: traj.speaker_id.clone(),
        utterance_id: traj.utterance_id.clone(),
        native_rate: target_rate,
        frames: out,
    })
}

/// One speaker's entry in a manifest. Paths are resolved against the
/// manifest's directory on load.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SpeakerEntry {
    pub speaker_id: String,
    pub sex: Sex,
    #[serde(default)]
    pub thickness_mm: Option<f64>,
    pub palate: PathBuf,
    #[serde(default)]
    pub posterior_wall: Option<PathBuf>,
    #[serde(default)]
    pub utterances: Vec<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestDoc {
    Wrapped { speakers: Vec<SpeakerEntry> },
    List(Vec<SpeakerEntry>),
    Single(SpeakerEntry),
}

/// Accepts a single speaker object, an array of them, or `{"speakers": [...]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub speakers: Vec<SpeakerEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::from_json(&text, base).map_err(|message| IngestError::Manifest {
            path: path.display().to_string(),
            message,
        })
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let doc: ManifestDoc = serde_json::from_value(value.clone()).map_err(|_| {
            // re-run per entry for a message that names the bad speaker
            let entries = match &value {
                serde_json::Value::Array(v) => v.clone(),
                serde_json::Value::Object(o) => match o.get("speakers") {
                    Some(serde_json::Value::Array(v)) => v.clone(),
                    _ => vec![value.clone()],
                },
                _ => vec![value.clone()],
            };
            for entry in entries {
                if let Err(e) = serde_json::from_value::<SpeakerEntry>(entry.clone()) {
                    let id = entry
                        .get("speaker_id")
                        .and_then(|v| v.as_str())
                        .unwrap_or("<unnamed>");
                    return format!("speaker {id}: {e}");
                }
            }
            "unrecognized manifest layout".to_owned()
        })?;
        let mut speakers = match doc {
            ManifestDoc::Wrapped { speakers } | ManifestDoc::List(speakers) => speakers,
            ManifestDoc::Single(s) => vec![s],
        };
        for s in &mut speakers {
            s.palate = base.join(&s.palate);
            s.posterior_wall = s.posterior_wall.as_ref().map(|p| base.join(p));
            s.utterances = s.utterances.iter().map(|p| base.join(p)).collect();
        }
        Ok(Self { speakers })
    }
}

/// Utterance id from a pellet file name: the file name without `.csv`.
pub fn utterance_id(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(".csv").map(str::to_owned).unwrap_or(name)
}
