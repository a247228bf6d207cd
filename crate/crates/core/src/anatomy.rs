//! Static per-speaker anatomy: inferred anterior pharyngeal wall, extended
//! palate trace and palatal reference center.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, GeometryError, Point2D, Polyline};

/// Average low retropalatal oropharyngeal thickness, women (mm).
pub const FEMALE_OROPHARYNX_THICKNESS_MM: f64 = 5.8;
/// Average low retropalatal oropharyngeal thickness, men (mm).
pub const MALE_OROPHARYNX_THICKNESS_MM: f64 = 5.6;

/// Maximum spacing of samples along the inferred soft-palate line (mm).
pub const VELAR_STEP_MM: f64 = 1.0;

/// A junction this far above the last palate sample is treated as implausible (mm).
pub const MAX_JUNCTION_RISE_MM: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnatomyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("oropharyngeal thickness must be positive and finite, got {0}")]
    InvalidThickness(f64),
    #[error("palate trace needs at least {needed} points, got {got}")]
    PalateTooShort { needed: usize, got: usize },
    #[error("posterior pharyngeal wall trace is missing")]
    MissingPosteriorWall,
    #[error("inconsistent anatomy: {0}")]
    AnatomyInconsistent(String),
    #[error("speaker {speaker_id}: {source}")]
    Speaker {
        speaker_id: String,
        #[source]
        source: Box<AnatomyError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sex {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
}

impl Sex {
    pub fn oropharynx_thickness_mm(self) -> f64 {
        match self {
            Sex::Female => FEMALE_OROPHARYNX_THICKNESS_MM,
            Sex::Male => MALE_OROPHARYNX_THICKNESS_MM,
        }
    }
}

/// Translates the posterior wall anteriorly (`+x`) by `thickness`.
pub fn infer_anterior_wall(
    posterior_wall: &Polyline,
    thickness: f64,
) -> Result<Polyline, AnatomyError> {
    if !(thickness.is_finite() && thickness > 0.0) {
        return Err(AnatomyError::InvalidThickness(thickness));
    }
    Ok(posterior_wall.translated(Point2D::new(thickness, 0.0)))
}

/// Extends the palate along the line through its two posterior samples
/// until it meets the anterior wall, then follows the wall downward.
///
/// The result is the original palate, the soft-palate line sampled at no
/// more than [`VELAR_STEP_MM`], and the anterior-wall points strictly below
/// the junction in wall order.
pub fn extend_palate(palate: &Polyline, anterior_wall: &Polyline) -> Result<Polyline, AnatomyError> {
    let (junction, _) = velar_junction(palate, anterior_wall)?;
    let last = palate.last();

    let mut points = palate.points().to_vec();
    let span = geometry::distance(last, junction);
    if span > 0.0 {
        let steps = (span / VELAR_STEP_MM).ceil().max(1.0) as usize;
        points.extend((1..steps).map(|k| last.lerp(junction, k as f64 / steps as f64)));
        points.push(junction);
    }
    points.extend(
        anterior_wall
            .points()
            .iter()
            .copied()
            .filter(|p| p.y < junction.y),
    );
    // lerp rounding on very short velar spans can repeat a point
    points.dedup();
    Ok(Polyline::new(points)?)
}

/// Intersection of the posterior palate extension with the anterior wall.
pub fn velar_junction(
    palate: &Polyline,
    anterior_wall: &Polyline,
) -> Result<(Point2D, usize), AnatomyError> {
    let pts = palate.points();
    let (a, b) = (pts[pts.len() - 2], pts[pts.len() - 1]);
    let (junction, index) = geometry::extend_line_to_polyline(a, b, anterior_wall)?;
    if junction.y - b.y > MAX_JUNCTION_RISE_MM {
        return Err(AnatomyError::AnatomyInconsistent(format!(
            "soft-palate junction {junction} lies {:.2} mm above the last palate sample",
            junction.y - b.y
        )));
    }
    Ok((junction, index))
}

/// Center of the least-squares circle through the original palate trace.
pub fn palatal_reference_center(palate: &Polyline) -> Result<Point2D, AnatomyError> {
    if palate.len() < 3 {
        return Err(AnatomyError::PalateTooShort {
            needed: 3,
            got: palate.len(),
        });
    }
    Ok(geometry::fit_circle(palate.points())?.center)
}

/// Derived anatomy for one speaker. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerAnatomy {
    pub speaker_id: String,
    pub sex: Sex,
    pub thickness_mm: f64,
    pub palate: Polyline,
    pub posterior_wall: Polyline,
    pub anterior_wall: Polyline,
    pub velar_junction: Point2D,
    /// Palate extended through the soft palate to the anterior pharyngeal wall.
    pub extended_palate: Polyline,
    pub reference_center: Point2D,
}

impl SpeakerAnatomy {
    pub fn build(
        speaker_id: impl Into<String>,
        palate: Polyline,
        posterior_wall: Option<Polyline>,
        sex: Sex,
        thickness_override: Option<f64>,
    ) -> Result<Self, AnatomyError> {
        let speaker_id = speaker_id.into();
        Self::build_inner(&speaker_id, palate, posterior_wall, sex, thickness_override).map_err(
            |source| AnatomyError::Speaker {
                speaker_id,
                source: Box::new(source),
            },
        )
    }

    fn build_inner(
        speaker_id: &str,
        palate: Polyline,
        posterior_wall: Option<Polyline>,
        sex: Sex,
        thickness_override: Option<f64>,
    ) -> Result<Self, AnatomyError> {
        let posterior_wall = posterior_wall.ok_or(AnatomyError::MissingPosteriorWall)?;
        let thickness_mm = thickness_override.unwrap_or_else(|| sex.oropharynx_thickness_mm());
        let anterior_wall = infer_anterior_wall(&posterior_wall, thickness_mm)?;
        let reference_center = palatal_reference_center(&palate)?;
        let (velar_junction, _) = velar_junction(&palate, &anterior_wall)?;
        let extended_palate = extend_palate(&palate, &anterior_wall)?;

        if let Some(p) = palate.points().iter().find(|p| p.y <= reference_center.y) {
            return Err(AnatomyError::AnatomyInconsistent(format!(
                "palatal reference center {reference_center} is not below palate point {p}"
            )));
        }

        Ok(Self {
            speaker_id: speaker_id.to_owned(),
            sex,
            thickness_mm,
            palate,
            posterior_wall,
            anterior_wall,
            velar_junction,
            extended_palate,
            reference_center,
        })
    }

    /// The soft-palate line from the last palate sample to the junction, inclusive.
    pub fn velar_segment(&self) -> &[Point2D] {
        let start = self.palate.len() - 1;
        let pts = self.extended_palate.points();
        let end = pts
            .iter()
            .skip(start)
            .position(|&p| p == self.velar_junction)
            .map_or(start + 1, |i| start + i + 1);
        &pts[start..end]
    }
}
