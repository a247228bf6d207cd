//! Tract variables from midsagittal pellet trajectories.
//!
//! Pellet positions (upper and lower lip, four tongue pellets, two mandible
//! pellets) are mapped to six relative constriction measures: lip aperture
//! and protrusion, and constriction location and degree for the tongue body
//! and tongue tip. Tongue constrictions are measured against the palate
//! trace extended through an inferred soft-palate line down the anterior
//! pharyngeal wall, which is itself inferred by shifting the posterior wall
//! forward by the oropharyngeal thickness.

pub mod anatomy;
pub mod cli;
pub mod geometry;
pub mod ingest;
pub mod tract_variables;

pub use anatomy::{Sex, SpeakerAnatomy};
pub use geometry::{Circle, ClearanceResult, Point2D, Polyline};
pub use ingest::{IngestReport, PelletTrajectory};
pub use tract_variables::{
    compute_frame, compute_trajectory, Pellet, PelletFrame, Quality, TractVariableFrame,
    TvOptions, TvTrajectory,
};
