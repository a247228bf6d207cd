//! Per-frame tract variables.
//!
//! | TV   | definition                                                        |
//! |------|-------------------------------------------------------------------|
//! | LA   | distance between UL and LL                                        |
//! | LP   | x-coordinate of UL                                                |
//! | TBCD | signed clearance between the tongue-body circle and the extended palate |
//! | TBCL | angle about the palatal center of the tongue-body point attaining TBCD |
//! | TTCD | distance from T1 to the extended palate                           |
//! | TTCL | angle about the palatal center of T1                              |
//!
//! Angles follow [`geometry::angle_from_reference`]: measured from `+y`,
//! positive toward `+x`, in radians.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anatomy::SpeakerAnatomy;
use crate::geometry::{self, Circle, GeometryError, Point2D};
use crate::ingest::PelletTrajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TvError {
    #[error("pellet {0} is flagged invalid")]
    MissingPellet(Pellet),
    #[error("tongue body pellets T2, T3, T4 are collinear")]
    DegenerateTongue,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pellet {
    UL,
    LL,
    T1,
    T2,
    T3,
    T4,
    MNI,
    MNM,
}

impl Pellet {
    /// Column order of the pellet CSV.
    pub const ALL: [Pellet; 8] = [
        Pellet::UL,
        Pellet::LL,
        Pellet::T1,
        Pellet::T2,
        Pellet::T3,
        Pellet::T4,
        Pellet::MNI,
        Pellet::MNM,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Pellet::UL => "UL",
            Pellet::LL => "LL",
            Pellet::T1 => "T1",
            Pellet::T2 => "T2",
            Pellet::T3 => "T3",
            Pellet::T4 => "T4",
            Pellet::MNI => "MNI",
            Pellet::MNM => "MNM",
        }
    }
}

impl fmt::Display for Pellet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Positions of all eight pellets at one instant.
///
/// MNI and MNM are carried through ingestion but no tract variable reads them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PelletFrame {
    pub t: f64,
    pub positions: [Point2D; 8],
    pub valid: [bool; 8],
}

impl PelletFrame {
    pub fn new(t: f64, positions: [Point2D; 8]) -> Self {
        Self {
            t,
            positions,
            valid: [true; 8],
        }
    }

    /// Position of a pellet regardless of its validity flag.
    pub fn raw(&self, pellet: Pellet) -> Point2D {
        self.positions[pellet.index()]
    }

    pub fn is_valid(&self, pellet: Pellet) -> bool {
        self.valid[pellet.index()]
    }

    pub fn get(&self, pellet: Pellet) -> Result<Point2D, TvError> {
        if self.is_valid(pellet) {
            Ok(self.raw(pellet))
        } else {
            Err(TvError::MissingPellet(pellet))
        }
    }

    pub fn set(&mut self, pellet: Pellet, position: Point2D) {
        self.positions[pellet.index()] = position;
        self.valid[pellet.index()] = true;
    }

    pub fn invalidate(&mut self, pellet: Pellet) {
        self.valid[pellet.index()] = false;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Ok,
    DegenerateTongue,
    MissingPellet,
}

impl Quality {
    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Ok => "ok",
            Quality::DegenerateTongue => "degenerate_tongue",
            Quality::MissingPellet => "missing_pellet",
        }
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Quality::Ok),
            "degenerate_tongue" => Ok(Quality::DegenerateTongue),
            "missing_pellet" => Ok(Quality::MissingPellet),
            other => Err(format!("unknown quality flag {other:?}")),
        }
    }
}

/// The six tract variables at one instant. `None` marks a value that could
/// not be computed from valid pellets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractVariableFrame {
    pub t: f64,
    pub la: Option<f64>,
    pub lp: Option<f64>,
    pub tbcl: Option<f64>,
    pub tbcd: Option<f64>,
    pub ttcl: Option<f64>,
    pub ttcd: Option<f64>,
    pub quality: Quality,
}

impl TractVariableFrame {
    /// Values in output column order: LA, LP, TBCL, TBCD, TTCL, TTCD.
    pub fn values(&self) -> [Option<f64>; 6] {
        [self.la, self.lp, self.tbcl, self.tbcd, self.ttcl, self.ttcd]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvTrajectory {
    pub speaker_id: String,
    pub utterance_id: String,
    pub sample_rate: f64,
    pub frames: Vec<TractVariableFrame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TvOptions {
    /// Clamp tongue-body clearance at zero instead of reporting penetration.
    pub clamp_tbcd: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrictionTvs {
    /// Constriction degree, mm.
    pub degree: f64,
    /// Constriction location, radians.
    pub location: f64,
}

/// Lip aperture.
pub fn compute_la(frame: &PelletFrame) -> Result<f64, TvError> {
    Ok(geometry::distance(frame.get(Pellet::UL)?, frame.get(Pellet::LL)?))
}

/// Lip protrusion.
pub fn compute_lp(frame: &PelletFrame) -> Result<f64, TvError> {
    Ok(frame.get(Pellet::UL)?.x)
}

/// Circle through T2, T3 and T4.
pub fn tongue_body_circle(frame: &PelletFrame) -> Result<Circle, TvError> {
    let (t2, t3, t4) = (
        frame.get(Pellet::T2)?,
        frame.get(Pellet::T3)?,
        frame.get(Pellet::T4)?,
    );
    geometry::circumcircle(t2, t3, t4).map_err(|e| match e {
        GeometryError::CollinearPoints { .. } => TvError::DegenerateTongue,
        other => other.into(),
    })
}

/// Tongue-body constriction degree and location.
///
/// The location is taken at the point on the tongue-body circle nearest the
/// extended palate, not at the palate point.
pub fn compute_tongue_body_tvs(
    frame: &PelletFrame,
    anatomy: &SpeakerAnatomy,
    options: TvOptions,
) -> Result<ConstrictionTvs, TvError> {
    let circle = tongue_body_circle(frame)?;
    let clearance = geometry::circle_polyline_clearance(&circle, &anatomy.extended_palate);
    let degree = if options.clamp_tbcd {
        clearance.distance.max(0.0)
    } else {
        clearance.distance
    };
    let location =
        geometry::angle_from_reference(anatomy.reference_center, clearance.closest_object_point)?;
    Ok(ConstrictionTvs { degree, location })
}

/// Tongue-body measurement for frames whose T2, T3, T4 are collinear: the
/// pellet nearest the extended palate stands in for the circle.
pub fn tongue_body_fallback(
    frame: &PelletFrame,
    anatomy: &SpeakerAnatomy,
) -> Result<ConstrictionTvs, TvError> {
    let mut best: Option<(f64, Point2D)> = None;
    for pellet in [Pellet::T2, Pellet::T3, Pellet::T4] {
        let p = frame.get(pellet)?;
        let d = geometry::point_polyline_clearance(p, &anatomy.extended_palate).distance;
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, p));
        }
    }
    let (degree, p) = best.expect("three pellets checked");
    let location = geometry::angle_from_reference(anatomy.reference_center, p)?;
    Ok(ConstrictionTvs { degree, location })
}

/// Tongue-tip constriction degree and location.
pub fn compute_tongue_tip_tvs(
    frame: &PelletFrame,
    anatomy: &SpeakerAnatomy,
) -> Result<ConstrictionTvs, TvError> {
    let t1 = frame.get(Pellet::T1)?;
    let degree = geometry::point_polyline_clearance(t1, &anatomy.extended_palate).distance;
    let location = geometry::angle_from_reference(anatomy.reference_center, t1)?;
    Ok(ConstrictionTvs { degree, location })
}

/// All six tract variables for one frame.
///
/// Each TV is computed independently so that a missing lip pellet still
/// leaves tongue measurements intact. `MissingPellet` outranks
/// `DegenerateTongue` when both apply.
pub fn compute_frame(
    frame: &PelletFrame,
    anatomy: &SpeakerAnatomy,
    options: TvOptions,
) -> TractVariableFrame {
    let mut degenerate = false;
    let body = match compute_tongue_body_tvs(frame, anatomy, options) {
        Err(TvError::DegenerateTongue) | Err(TvError::Geometry(_)) => {
            let fallback = tongue_body_fallback(frame, anatomy);
            degenerate = fallback.is_ok();
            fallback
        }
        other => other,
    };
    let tip = compute_tongue_tip_tvs(frame, anatomy);

    let mut missing = false;
    let mut keep = |r: Result<f64, TvError>| match r {
        Ok(v) => Some(v),
        Err(TvError::MissingPellet(_)) => {
            missing = true;
            None
        }
        Err(_) => {
            degenerate = true;
            None
        }
    };

    let la = keep(compute_la(frame));
    let lp = keep(compute_lp(frame));
    let tbcd = keep(body.as_ref().map(|b| b.degree).map_err(Clone::clone));
    let tbcl = keep(body.map(|b| b.location));
    let ttcd = keep(tip.as_ref().map(|b| b.degree).map_err(Clone::clone));
    let ttcl = keep(tip.map(|b| b.location));

    let quality = if missing {
        Quality::MissingPellet
    } else if degenerate {
        Quality::DegenerateTongue
    } else {
        Quality::Ok
    };

    TractVariableFrame {
        t: frame.t,
        la,
        lp,
        tbcl,
        tbcd,
        ttcl,
        ttcd,
        quality,
    }
}

/// Frame-wise map over a trajectory, in input order.
pub fn compute_trajectory(
    trajectory: &PelletTrajectory,
    anatomy: &SpeakerAnatomy,
    options: TvOptions,
) -> TvTrajectory {
    TvTrajectory {
        speaker_id: trajectory.speaker_id.clone(),
        utterance_id: trajectory.utterance_id.clone(),
        sample_rate: trajectory.native_rate,
        frames: trajectory
            .frames
            .iter()
            .map(|f| compute_frame(f, anatomy, options))
            .collect(),
    }
}

/// Same as [`compute_trajectory`] but spread across the current rayon pool.
/// Output is identical to the sequential version.
pub fn compute_trajectory_par(
    trajectory: &PelletTrajectory,
    anatomy: &SpeakerAnatomy,
    options: TvOptions,
) -> TvTrajectory {
    TvTrajectory {
        speaker_id: trajectory.speaker_id.clone(),
        utterance_id: trajectory.utterance_id.clone(),
        sample_rate: trajectory.native_rate,
        frames: trajectory
            .frames
            .par_iter()
            .map(|f| compute_frame(f, anatomy, options))
            .collect(),
    }
}
